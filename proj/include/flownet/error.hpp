#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flownet {

enum class Errc {
  // network construction
  no_destination,
  unreachable_destination,
  dangling_endpoint,
  non_positive_parameter,
  self_loop,
  isolated_node,
  duplicate_node,
  unknown_node,
  destination_in_cut,
  // link physics
  out_of_range,
  target_above_capacity,
  // routing
  all_links_jammed,
  // simulation
  invalid_scenario,
  non_finite_state,
  empty_trace,
  // feasibility and allocation
  negative_input,
  too_large,
  numerical_failure,
  infeasible_inflow,
  infeasible_polytope,
  // scenario files
  parse_error,
};

std::string_view to_string(Errc code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace flownet
