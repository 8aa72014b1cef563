#include "flownet/error.hpp"

namespace flownet {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::no_destination: return "no_destination";
    case Errc::unreachable_destination: return "unreachable_destination";
    case Errc::dangling_endpoint: return "dangling_endpoint";
    case Errc::non_positive_parameter: return "non_positive_parameter";
    case Errc::self_loop: return "self_loop";
    case Errc::isolated_node: return "isolated_node";
    case Errc::duplicate_node: return "duplicate_node";
    case Errc::unknown_node: return "unknown_node";
    case Errc::destination_in_cut: return "destination_in_cut";
    case Errc::out_of_range: return "out_of_range";
    case Errc::target_above_capacity: return "target_above_capacity";
    case Errc::all_links_jammed: return "all_links_jammed";
    case Errc::invalid_scenario: return "invalid_scenario";
    case Errc::non_finite_state: return "non_finite_state";
    case Errc::empty_trace: return "empty_trace";
    case Errc::negative_input: return "negative_input";
    case Errc::too_large: return "too_large";
    case Errc::numerical_failure: return "numerical_failure";
    case Errc::infeasible_inflow: return "infeasible_inflow";
    case Errc::infeasible_polytope: return "infeasible_polytope";
    case Errc::parse_error: return "parse_error";
  }
  return "unknown";
}

}  // namespace flownet
