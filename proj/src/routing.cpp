#include "flownet/routing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "flownet/error.hpp"

namespace flownet {

namespace {

// Sustainable inflows below this are treated as zero in the proportional split.
constexpr double kPhiFloor = 1e-12;
constexpr std::size_t kMaxRecordedViolations = 64;

bool is_jammed(double density, const LinkPhysics& link) { return density >= link.jam_density(); }

struct NodeView {
  std::vector<LinkId> ids;
  std::vector<const LinkPhysics*> links;
};

NodeView node_view(const FlowNetwork& network, std::span<const LinkPhysics> physics, std::size_t node) {
  NodeView view;
  for (const LinkId e : network.outgoing(node)) {
    view.ids.push_back(e);
    view.links.push_back(&physics[e.value]);
  }
  return view;
}

}  // namespace

bool ProportionalRouting::route(std::span<const double> densities, std::span<const LinkPhysics* const> links,
                                double inflow, std::span<double> routed) const {
  double total = 0.0;
  for (std::size_t j = 0; j < links.size(); ++j) {
    double phi = is_jammed(densities[j], *links[j]) ? 0.0 : links[j]->max_sustainable_inflow(densities[j]);
    if (phi < kPhiFloor) phi = 0.0;
    routed[j] = phi;
    total += phi;
  }
  if (!(total > 0.0)) {
    std::fill(routed.begin(), routed.end(), 0.0);
    return false;
  }
  for (double& r : routed) r = inflow * (r / total);
  return true;
}

bool EqualSplitRouting::route(std::span<const double> densities, std::span<const LinkPhysics* const> links,
                              double inflow, std::span<double> routed) const {
  std::size_t open = 0;
  for (std::size_t j = 0; j < links.size(); ++j) {
    if (!is_jammed(densities[j], *links[j])) ++open;
  }
  if (open == 0) {
    std::fill(routed.begin(), routed.end(), 0.0);
    return false;
  }
  const double share = inflow / static_cast<double>(open);
  for (std::size_t j = 0; j < links.size(); ++j) {
    routed[j] = is_jammed(densities[j], *links[j]) ? 0.0 : share;
  }
  return true;
}

std::shared_ptr<const RoutingPolicy> make_routing_policy(std::string_view name) {
  if (name == "proportional") return std::make_shared<ProportionalRouting>();
  if (name == "broken_equal_split") return std::make_shared<EqualSplitRouting>();
  throw Error(Errc::invalid_scenario, fmt::format("unknown routing policy '{}'", name));
}

std::vector<double> proportional_route(std::span<const double> densities,
                                       std::span<const LinkPhysics* const> links, double inflow) {
  std::vector<double> routed(links.size(), 0.0);
  if (!ProportionalRouting{}.route(densities, links, inflow, routed)) {
    throw Error(Errc::all_links_jammed, "every outgoing link is at jam density");
  }
  return routed;
}

ConservationReport check_conservation(const RoutingPolicy& policy, const FlowNetwork& network,
                                      std::span<const LinkPhysics> physics, std::size_t node_index,
                                      std::size_t samples, std::uint64_t seed) {
  const NodeView view = node_view(network, physics, node_index);
  const std::size_t k = view.links.size();
  std::vector<double> jam(k);
  double total_capacity = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    jam[j] = view.links[j]->jam_density();
    total_capacity += view.links[j]->capacity();
  }

  std::vector<std::vector<double>> profiles;
  profiles.emplace_back(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> single(k, 0.0);
    single[j] = jam[j];
    profiles.push_back(single);
    std::vector<double> all_but_one = jam;
    all_but_one[j] = 0.0;
    profiles.push_back(all_but_one);
  }
  profiles.push_back(jam);
  std::vector<double> inflows(profiles.size(), total_capacity);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> rho(k);
    for (std::size_t j = 0; j < k; ++j) {
      rho[j] = unit(rng) < 0.15 ? jam[j] : unit(rng) * jam[j];
    }
    profiles.push_back(std::move(rho));
    inflows.push_back(unit(rng) * 2.0 * total_capacity);
  }

  ConservationReport report;
  std::vector<double> routed(k);
  auto record = [&](ConservationViolation v) {
    if (report.violations.size() < kMaxRecordedViolations) report.violations.push_back(std::move(v));
  };
  for (std::size_t s = 0; s < profiles.size(); ++s) {
    const std::vector<double>& rho = profiles[s];
    const double mu = inflows[s];
    const bool all_jammed = std::equal(rho.begin(), rho.end(), jam.begin());
    policy.route(rho, view.links, mu, routed);
    ++report.samples;
    for (std::size_t j = 0; j < k; ++j) {
      if (routed[j] < 0.0) {
        record({node_index, ConservationRule::nonnegativity, rho, mu, view.ids[j], routed[j]});
      }
      if (rho[j] >= jam[j] && routed[j] != 0.0) {
        record({node_index, ConservationRule::jam_exclusion, rho, mu, view.ids[j], routed[j]});
      }
    }
    if (!all_jammed) {
      const double sum = std::accumulate(routed.begin(), routed.end(), 0.0);
      if (std::abs(sum - mu) > 1e-9 * std::max(mu, 1e-12)) {
        record({node_index, ConservationRule::conservation, rho, mu, std::nullopt, sum - mu});
      }
    }
  }
  return report;
}

AwarenessReport check_congestion_aware(const RoutingPolicy& policy, const FlowNetwork& network,
                                       std::span<const LinkPhysics> physics,
                                       std::span<const double> rho_star, std::size_t samples_per_node,
                                       std::uint64_t seed) {
  if (rho_star.size() != network.link_count()) {
    throw Error(Errc::out_of_range, "rho_star must have one entry per link");
  }
  AwarenessReport report;
  report.checked_profile.assign(rho_star.begin(), rho_star.end());
  for (std::size_t e = 0; e < physics.size(); ++e) {
    report.checked_profile[e] = physics[e].checked_density(rho_star[e]);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t v = 0; v < network.node_count(); ++v) {
    if (network.kind(v) == NodeKind::destination) continue;
    const NodeView view = node_view(network, physics, v);
    const std::size_t k = view.links.size();
    std::vector<double> star(k), jam(k);
    for (std::size_t j = 0; j < k; ++j) {
      star[j] = report.checked_profile[view.ids[j].value];
      jam[j] = view.links[j]->jam_density();
    }

    // Corner profiles use the inflow at its bound; random ones draw it.
    std::vector<std::vector<double>> profiles;
    std::vector<double> inflow_fraction;
    profiles.push_back(star);
    inflow_fraction.push_back(1.0);
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> near_jam = star;
      near_jam[j] = jam[j] * (1.0 - 1e-9);
      profiles.push_back(std::move(near_jam));
      inflow_fraction.push_back(1.0);
    }
    for (std::size_t s = 0; s < samples_per_node; ++s) {
      std::vector<double> rho(k);
      for (std::size_t j = 0; j < k; ++j) {
        rho[j] = unit(rng) < 0.5 ? star[j] + unit(rng) * (jam[j] - star[j]) : unit(rng) * jam[j];
      }
      profiles.push_back(std::move(rho));
      const double pick = unit(rng);
      inflow_fraction.push_back(pick < 0.1 ? 1.0 : (pick < 0.15 ? 0.0 : unit(rng)));
    }

    std::vector<double> routed(k), phi(k);
    for (std::size_t s = 0; s < profiles.size(); ++s) {
      const std::vector<double>& rho = profiles[s];
      double bound = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        phi[j] = view.links[j]->max_sustainable_inflow(rho[j]);
        bound += phi[j];
      }
      const double mu = inflow_fraction[s] * bound;
      ++report.samples;
      if (!policy.route(rho, view.links, mu, routed)) continue;
      for (std::size_t j = 0; j < k; ++j) {
        if (rho[j] < star[j]) continue;
        if (routed[j] > phi[j] * (1.0 + 1e-9) + 1e-300) {
          if (report.violations.size() < kMaxRecordedViolations) {
            report.violations.push_back({v, view.ids[j], rho, mu, routed[j], phi[j]});
          }
        }
      }
    }
  }
  return report;
}

}  // namespace flownet
