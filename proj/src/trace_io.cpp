#include "flownet/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace flownet {

int exit_code(TransferVerdict::Kind kind) {
  switch (kind) {
    case TransferVerdict::Kind::transferring: return exit_transferring;
    case TransferVerdict::Kind::non_transferring: return exit_non_transferring;
    case TransferVerdict::Kind::undetermined: return exit_undetermined;
  }
  return exit_undetermined;
}

std::string_view exit_code_label(int code) {
  switch (code) {
    case exit_transferring: return "transferring";
    case exit_input_error: return "input_error";
    case exit_non_transferring: return "non_transferring";
    case exit_undetermined: return "undetermined";
    default: return "unknown";
  }
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
  out << "t,link_id,rho,u,flow,failed\n";
  for (const TraceSample& sample : trace.samples) {
    for (std::size_t e = 0; e < sample.density.size(); ++e) {
      fmt::print(out, "{},{},{},{},{},{}\n", sample.time, e, sample.density[e], sample.speed[e], sample.flow[e],
                 sample.failed[e] ? 1 : 0);
    }
  }
}

RunSummary summarize(const std::string& name, const SimulationTrace& trace, double window, double epsilon) {
  RunSummary summary;
  summary.scenario = name;
  summary.verdict = classify(trace, window, epsilon);
  summary.window = window;
  summary.epsilon = epsilon;
  summary.horizon = trace.samples.empty() ? 0.0 : trace.samples.back().time;
  summary.dt = trace.dt;
  summary.failures = trace.failures;
  for (const MassResidualSample& r : mass_residual(trace)) {
    double& slot = r.spans_failure ? summary.mass_residual_event_max : summary.mass_residual_max;
    slot = std::max(slot, std::abs(r.residual));
    summary.mass_defect_max = std::max(summary.mass_defect_max, std::abs(r.cumulative_defect));
  }
  return summary;
}

void write_summary(std::ostream& out, const RunSummary& s, const FlowNetwork& network) {
  fmt::print(out, "scenario: {}\n", s.scenario.empty() ? "unnamed" : s.scenario);
  fmt::print(out, "verdict: {}\n", to_string(s.verdict.kind));
  fmt::print(out, "blocked_origin: {}\n",
             s.verdict.blocked_origin ? std::to_string(s.verdict.blocked_origin->value) : std::string("none"));
  fmt::print(out, "demand: {}\n", s.verdict.demand);
  fmt::print(out, "throughput: {}\n", s.verdict.throughput);
  fmt::print(out, "window: {}\n", s.window);
  fmt::print(out, "epsilon: {}\n", s.epsilon);
  fmt::print(out, "horizon: {}\n", s.horizon);
  fmt::print(out, "dt: {}\n", s.dt);
  fmt::print(out, "failure_count: {}\n", s.failures.size());
  for (std::size_t i = 0; i < s.failures.size(); ++i) {
    const Link& link = network.link(s.failures[i].link);
    fmt::print(out, "failure_{}: link={} tail={} head={} time={}\n", i + 1, link.id.value, link.tail.value,
               link.head.value, s.failures[i].time);
  }
  fmt::print(out, "mass_residual_max: {}\n", s.mass_residual_max);
  fmt::print(out, "mass_residual_event_max: {}\n", s.mass_residual_event_max);
  fmt::print(out, "mass_defect_max: {}\n", s.mass_defect_max);
}

std::map<std::string, std::string> parse_summary(std::istream& in) {
  std::map<std::string, std::string> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    values[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return values;
}

}  // namespace flownet
