// flownet: scenario-driven front end for simulation, feasibility checks,
// capacity allocation and routing-policy verification.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "flownet/allocation.hpp"
#include "flownet/dynamics.hpp"
#include "flownet/feasibility.hpp"
#include "flownet/routing.hpp"
#include "flownet/scenario_io.hpp"
#include "flownet/trace_io.hpp"

namespace fs = std::filesystem;
using namespace flownet;

namespace {

std::string format_cut(const NodeSet& cut) {
  std::string out = "{";
  for (const NodeId v : cut) out += fmt::format("{}{}", out.size() > 1 ? "," : "", v.value);
  return out + "}";
}

std::string scenario_name(const ScenarioSpec& spec, const fs::path& path) {
  return spec.name.empty() ? path.stem().string() : spec.name;
}

/// Runs one scenario, writing the trace (when `trace_path` is set) and its
/// summary. Returns the exit code for the verdict.
int run_simulation(const fs::path& scenario_path, const std::vector<fs::path>& overlays,
                   const std::optional<fs::path>& trace_path, std::ostream& summary_out) {
  const ScenarioSpec spec = parse_scenario_file(scenario_path, overlays);
  const BuiltScenario built = build_scenario(spec);
  const SimulationTrace trace = simulate(built.scenario);
  const RunSummary summary = summarize(scenario_name(spec, scenario_path), trace, built.window, built.epsilon);

  if (trace_path) {
    std::ofstream csv(*trace_path);
    if (!csv) throw Error(Errc::parse_error, fmt::format("cannot write '{}'", trace_path->string()));
    write_trace_csv(csv, trace);
    fs::path summary_path = *trace_path;
    summary_path += ".summary";
    std::ofstream sum(summary_path);
    write_summary(sum, summary, *built.scenario.network);
  }
  write_summary(summary_out, summary, *built.scenario.network);
  return exit_code(summary.verdict.kind);
}

int cmd_simulate(const fs::path& scenario, const std::vector<fs::path>& overlays,
                 const std::optional<fs::path>& out) {
  return run_simulation(scenario, overlays, out, std::cout);
}

int cmd_feasibility(const fs::path& scenario, const std::vector<fs::path>& overlays) {
  const ScenarioSpec spec = parse_scenario_file(scenario, overlays);
  const BuiltScenario built = build_scenario(spec);
  const Scenario& s = built.scenario;
  std::vector<double> capacity;
  for (const LinkPhysics& p : s.physics) capacity.push_back(p.capacity());
  const FeasibilityResult result = is_feasible(*s.network, capacity, s.inflow);
  fmt::print("feasible: {}\n", result.feasible ? "true" : "false");
  fmt::print("min_slack: {}\n", result.min_slack);
  fmt::print("witness_cut: {}\n", format_cut(result.witness_cut));
  fmt::print("max_flow: {}\n", result.max_flow_value);
  fmt::print("total_inflow: {}\n", result.total_inflow);
  return result.feasible ? exit_transferring : exit_non_transferring;
}

int cmd_allocate(const fs::path& scenario, const std::vector<fs::path>& overlays, const std::string& mode_name,
                 const std::optional<fs::path>& fragment_path) {
  const ScenarioSpec spec = parse_scenario_file(scenario, overlays);
  const BuiltScenario built = build_scenario(spec);
  const Scenario& s = built.scenario;
  const SpeedLimitMode mode = mode_name == "constant" ? SpeedLimitMode::constant : SpeedLimitMode::feedback;

  CapacityAllocation allocation;
  try {
    allocation = allocate_for(spec, s, built.rho_star);
  } catch (const InfeasibleInflowError& e) {
    fmt::print("feasible: false\n");
    fmt::print("min_slack: {}\n", e.result().min_slack);
    fmt::print("witness_cut: {}\n", format_cut(e.result().witness_cut));
    fmt::print(std::cerr, "error: {}\n", e.what());
    return exit_non_transferring;
  }
  const std::vector<SpeedLimitPolicy> policies = speed_limits_from_allocation(allocation, mode);

  fmt::print("feasible: true\n");
  fmt::print("rho_star: {}\n", spec.rho_star ? "custom" : "critical");
  fmt::print("objective: {}\n", allocation.objective);
  fmt::print("possibly_non_unique: {}\n", allocation.possibly_non_unique ? "true" : "false");
  for (std::size_t e = 0; e < allocation.target.size(); ++e) {
    const Link& link = s.network->link(LinkId{e});
    const LinkPhysics& p = s.physics[e];
    const double target = allocation.target[e];
    fmt::print("link_{}: tail={} head={} capacity={} target={} policy={} rho_hat={} constant_speed={}\n", e,
               link.tail.value, link.head.value, p.capacity(), target, policy_name(policies[e]), p.rho_hat(target),
               p.constant_speed_limit(target));
  }
  const std::string fragment = speed_limit_fragment(policies);
  if (fragment_path) {
    std::ofstream out(*fragment_path);
    if (!out) throw Error(Errc::parse_error, fmt::format("cannot write '{}'", fragment_path->string()));
    out << fragment;
  } else {
    fmt::print("---\n{}", fragment);
  }
  return exit_transferring;
}

int cmd_verify_routing(const fs::path& scenario, const std::vector<fs::path>& overlays, std::size_t samples,
                       std::uint64_t seed) {
  if (samples == 0) {
    fmt::print(std::cerr, "error: --samples must be at least 1\n");
    return exit_input_error;
  }
  const ScenarioSpec spec = parse_scenario_file(scenario, overlays);
  const BuiltScenario built = build_scenario(spec);
  const Scenario& s = built.scenario;
  const FlowNetwork& net = *s.network;

  std::size_t conservation_samples = 0;
  std::size_t conservation_violations = 0;
  for (std::size_t v = 0; v < net.node_count(); ++v) {
    if (net.kind(v) == NodeKind::destination) continue;
    const ConservationReport report = check_conservation(*s.routing, net, s.physics, v, samples, seed + v);
    conservation_samples += report.samples;
    conservation_violations += report.violations.size();
    for (const ConservationViolation& bad : report.violations) {
      fmt::print("conservation_violation: node={} rule={} residual={}\n", net.node_at(bad.node).value,
                 bad.rule == ConservationRule::conservation   ? "conservation"
                 : bad.rule == ConservationRule::jam_exclusion ? "jam_exclusion"
                                                               : "nonnegativity",
                 bad.residual);
    }
  }
  const AwarenessReport awareness = check_congestion_aware(*s.routing, net, s.physics, built.rho_star, samples, seed);
  for (const AwarenessViolation& bad : awareness.violations) {
    fmt::print("awareness_violation: node={} link={} inflow={} routed={} bound={}\n", net.node_at(bad.node).value,
               bad.link.value, bad.inflow, bad.routed, bad.bound);
  }
  fmt::print("policy: {}\n", s.routing->name());
  fmt::print("conservation_samples: {}\n", conservation_samples);
  fmt::print("conservation_violations: {}\n", conservation_violations);
  fmt::print("awareness_samples: {}\n", awareness.samples);
  fmt::print("awareness_violations: {}\n", awareness.violations.size());
  const bool ok = conservation_violations == 0 && awareness.aware();
  fmt::print("result: {}\n", ok ? "pass" : "fail");
  return ok ? exit_transferring : exit_non_transferring;
}

int cmd_batch(const std::vector<fs::path>& scenarios, const fs::path& out_dir, unsigned jobs) {
  fs::create_directories(out_dir);
  std::vector<int> codes(scenarios.size(), exit_input_error);
  std::vector<std::string> reports(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      std::ostringstream summary;
      try {
        codes[i] = run_simulation(scenarios[i], {}, out_dir / (scenarios[i].stem().string() + ".csv"), summary);
        reports[i] = fmt::format("{}: {}", scenarios[i].string(), exit_code_label(codes[i]));
      } catch (const std::exception& e) {
        reports[i] = fmt::format("{}: error: {}", scenarios[i].string(), e.what());
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
  }
  for (const std::string& line : reports) fmt::print("{}\n", line);
  // Worst outcome wins: input error, then non-transferring, then undetermined.
  for (const int code : {exit_input_error, exit_non_transferring, exit_undetermined}) {
    if (std::find(codes.begin(), codes.end(), code) != codes.end()) return code;
  }
  return exit_transferring;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical flow network simulator with variable speed limit synthesis"};
  app.require_subcommand(1);

  std::vector<fs::path> overlays;
  fs::path scenario;

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a scenario and classify the outcome");
  std::optional<fs::path> trace_out;
  simulate_cmd->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("-o,--out", trace_out, "Trace CSV path (summary written alongside)");
  simulate_cmd->add_option("--overlay", overlays, "Scenario fragment applied on top")->check(CLI::ExistingFile);

  auto* feasibility_cmd = app.add_subcommand("feasibility", "Check external inflow feasibility");
  feasibility_cmd->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  feasibility_cmd->add_option("--overlay", overlays, "Scenario fragment applied on top")->check(CLI::ExistingFile);

  auto* allocate_cmd = app.add_subcommand("allocate", "Solve the capacity allocation and emit speed limits");
  std::string mode = "feedback";
  std::optional<fs::path> fragment;
  allocate_cmd->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  allocate_cmd->add_option("--overlay", overlays, "Scenario fragment applied on top")->check(CLI::ExistingFile);
  allocate_cmd->add_option("--mode", mode, "Speed limit form")->check(CLI::IsMember({"feedback", "constant"}));
  allocate_cmd->add_option("--fragment", fragment, "Write the speed-limit fragment to this file");

  auto* verify_cmd = app.add_subcommand("verify-routing", "Sample-check conservation and congestion awareness");
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  verify_cmd->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--overlay", overlays, "Scenario fragment applied on top")->check(CLI::ExistingFile);
  verify_cmd->add_option("--samples", samples, "Random samples per node");
  verify_cmd->add_option("--seed", seed, "Random seed");

  auto* batch_cmd = app.add_subcommand("batch", "Simulate several scenarios concurrently");
  std::vector<fs::path> batch_files;
  fs::path out_dir = "traces";
  unsigned jobs = 1;
  batch_cmd->add_option("scenarios", batch_files, "Scenario files")->required()->check(CLI::ExistingFile);
  batch_cmd->add_option("--out-dir", out_dir, "Directory for traces and summaries");
  batch_cmd->add_option("-j,--jobs", jobs, "Concurrent runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_input_error;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(scenario, overlays, trace_out);
    if (*feasibility_cmd) return cmd_feasibility(scenario, overlays);
    if (*allocate_cmd) return cmd_allocate(scenario, overlays, mode, fragment);
    if (*verify_cmd) return cmd_verify_routing(scenario, overlays, samples, seed);
    if (*batch_cmd) return cmd_batch(batch_files, out_dir, jobs);
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return exit_input_error;
  }
  return exit_input_error;
}
