#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "flownet/dynamics.hpp"

namespace flownet {

/// Process exit codes shared by the command-line tools.
enum ExitCode : int {
  exit_transferring = 0,
  exit_input_error = 1,
  exit_non_transferring = 2,
  exit_undetermined = 3,
};

int exit_code(TransferVerdict::Kind kind);
std::string_view exit_code_label(int code);

/// One row per (sample, link): t,link_id,rho,u,flow,failed.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);

struct RunSummary {
  std::string scenario;
  TransferVerdict verdict;
  double window = 0.0;
  double epsilon = 0.0;
  double horizon = 0.0;
  double dt = 0.0;
  std::vector<FailureEvent> failures;
  /// Largest |residual| over intervals without a failure event.
  double mass_residual_max = 0.0;
  /// Largest |residual| over intervals containing a failure event.
  double mass_residual_event_max = 0.0;
  double mass_defect_max = 0.0;
};

RunSummary summarize(const std::string& name, const SimulationTrace& trace, double window, double epsilon);

/// `key: value` lines; failures appear as failure_1, failure_2, ...
void write_summary(std::ostream& out, const RunSummary& summary, const FlowNetwork& network);

std::map<std::string, std::string> parse_summary(std::istream& in);

}  // namespace flownet
