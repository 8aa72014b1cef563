#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flownet/allocation.hpp"
#include "flownet/dynamics.hpp"
#include "flownet/error.hpp"

namespace flownet {

/// Parse failure anchored to a file and 1-based line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& message);

  const std::string& source() const noexcept { return source_; }
  int line() const noexcept { return line_; }

 private:
  std::string source_;
  int line_;
};

/// Values used for any key a scenario file leaves out.
struct Defaults {
  double dt = 0.01;
  double horizon = 200.0;
  double window_fraction = 0.5;
  double epsilon = 0.02;
  double alpha = 1.0;
  std::size_t stride = 10;
  double free_flow_speed = 1.0;
  double jam_density = 4.0;
  std::string routing = "proportional";
  bool operator==(const Defaults&) const = default;
};

Defaults parse_defaults(const std::filesystem::path& path);
/// Built-in table, or the file named by FLOWNET_DEFAULTS when set.
Defaults load_defaults();

/// Speed-limit modes. `feedback`, `constant` and `allocated` take their
/// targets from the capacity allocation; `allocated` uses the feedback form.
enum class SpeedMode { max, constant, feedback, allocated };

std::string_view to_string(SpeedMode mode);

struct LinkEntry {
  std::int64_t tail = 0;
  std::int64_t head = 0;
  double lanes = 1.0;
  std::optional<double> max_speed;
  bool operator==(const LinkEntry&) const = default;
};

/// Per-link speed limit. Without a target, constant and feedback modes use
/// the allocated capacity.
struct SpeedOverride {
  std::size_t link = 0;
  SpeedMode mode = SpeedMode::max;
  std::optional<double> target;
  bool operator==(const SpeedOverride&) const = default;
};

/// Parsed scenario document with every default filled in.
struct ScenarioSpec {
  std::string name;
  std::vector<std::int64_t> nodes;
  std::vector<LinkEntry> links;
  double free_flow_speed = 1.0;
  double jam_density = 4.0;
  std::map<std::int64_t, double> inflows;
  std::string routing = "proportional";
  SpeedMode speed_mode = SpeedMode::max;
  std::vector<SpeedOverride> speed_overrides;
  std::vector<double> initial_density;
  double dt = 0.01;
  double horizon = 200.0;
  std::size_t stride = 10;
  double window = 100.0;
  double epsilon = 0.02;
  /// Empty means the critical densities.
  std::optional<std::vector<double>> rho_star;
  std::vector<double> alpha;
  bool operator==(const ScenarioSpec&) const = default;
};

/// Parses a scenario file, then applies each overlay file's top-level keys
/// on top of it (replacing whole sections). Unknown keys are errors.
ScenarioSpec parse_scenario_file(const std::filesystem::path& path,
                                 const std::vector<std::filesystem::path>& overlays = {},
                                 const Defaults& defaults = load_defaults());

ScenarioSpec parse_scenario_text(const std::string& text, const Defaults& defaults = Defaults{},
                                 const std::string& source = "<string>");

/// Emits a document that parses back to an identical spec.
std::string serialize_scenario(const ScenarioSpec& spec);

/// Scenario fragment holding an explicit per-link speed-limit section.
std::string speed_limit_fragment(std::span<const SpeedLimitPolicy> policies);

struct BuiltScenario {
  Scenario scenario;
  std::vector<double> rho_star;
  std::optional<CapacityAllocation> allocation;
  double window = 100.0;
  double epsilon = 0.02;
};

/// Builds the network, physics and policies. Computes a capacity allocation
/// only when a speed limit needs one. Throws invalid_scenario (and the
/// network and allocation errors).
BuiltScenario build_scenario(const ScenarioSpec& spec);

/// Capacity allocation for the document's rho_star and alpha, on a built scenario.
CapacityAllocation allocate_for(const ScenarioSpec& spec, const Scenario& scenario,
                                std::span<const double> rho_star);

}  // namespace flownet
