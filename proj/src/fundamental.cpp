#include "flownet/fundamental.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "flownet/error.hpp"

namespace flownet {

namespace {

constexpr double kRangeSlack = 1e-9;

double bisect_decreasing_branch(const auto& flow, double lo, double hi, double target, double tolerance) {
  // flow(lo) >= target >= flow(hi), flow strictly decreasing on [lo, hi].
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (flow(mid) >= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double FundamentalDiagram::flow(double unit_density, double speed_limit) const {
  return unit_density * std::min(speed_limit, max_speed(unit_density));
}

double FundamentalDiagram::critical_density(double speed_cap) const {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0;
  double hi = jam_density();
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = flow(a, speed_cap);
  double fb = flow(b, speed_cap);
  while (hi - lo > 1e-13 * jam_density()) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = flow(b, speed_cap);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = flow(a, speed_cap);
    }
  }
  return 0.5 * (lo + hi);
}

double FundamentalDiagram::congested_density(double unit_target, double speed_cap) const {
  const double crit = critical_density(speed_cap);
  if (unit_target <= 0.0) return jam_density();
  return bisect_decreasing_branch([&](double r) { return flow(r, speed_cap); }, crit, jam_density(),
                                  unit_target, 1e-12 * jam_density());
}

GreenshieldsDiagram::GreenshieldsDiagram(double free_flow_speed, double jam_density)
    : free_flow_speed_(free_flow_speed), jam_density_(jam_density) {
  if (!(free_flow_speed > 0.0) || !(jam_density > 0.0) || !std::isfinite(free_flow_speed) ||
      !std::isfinite(jam_density)) {
    throw Error(Errc::non_positive_parameter, "diagram needs positive free-flow speed and jam density");
  }
}

double GreenshieldsDiagram::max_speed(double unit_density) const {
  return free_flow_speed_ * std::max(0.0, 1.0 - unit_density / jam_density_);
}

double GreenshieldsDiagram::critical_density(double speed_cap) const {
  const double half = 0.5 * jam_density_;
  if (speed_cap >= free_flow_speed_) return half;
  // Below free-flow speed the peak sits where the cap meets the speed curve,
  // unless that crossing lies left of the parabola's apex.
  return std::max(half, jam_density_ * (1.0 - speed_cap / free_flow_speed_));
}

double GreenshieldsDiagram::congested_density(double unit_target, double speed_cap) const {
  const double disc = std::max(0.0, 1.0 - 4.0 * unit_target / (free_flow_speed_ * jam_density_));
  const double root = 0.5 * jam_density_ * (1.0 + std::sqrt(disc));
  return std::clamp(root, critical_density(speed_cap), jam_density_);
}

LinkPhysics::LinkPhysics(std::shared_ptr<const FundamentalDiagram> diagram, double lane_count,
                         double max_speed)
    : diagram_(std::move(diagram)), lane_count_(lane_count), max_speed_(max_speed) {
  if (!diagram_) throw Error(Errc::non_positive_parameter, "link physics needs a diagram");
  if (!(lane_count > 0.0) || !(max_speed > 0.0)) {
    throw Error(Errc::non_positive_parameter, "lane count and max speed must be positive");
  }
  jam_density_ = lane_count_ * diagram_->jam_density();
  const double unit_critical = diagram_->critical_density(max_speed_);
  critical_density_ = lane_count_ * unit_critical;
  capacity_ = lane_count_ * diagram_->flow(unit_critical, max_speed_);
}

double LinkPhysics::checked_density(double density) const {
  const double slack = kRangeSlack * jam_density_;
  if (!(density >= -slack && density <= jam_density_ + slack)) {
    throw Error(Errc::out_of_range,
                fmt::format("density {} outside [0, {}]", density, jam_density_));
  }
  return std::clamp(density, 0.0, jam_density_);
}

double LinkPhysics::checked_target(double target) const {
  if (!(target >= -kRangeSlack * capacity_)) {
    throw Error(Errc::out_of_range, fmt::format("negative target capacity {}", target));
  }
  if (target > capacity_ * (1.0 + kRangeSlack)) {
    throw Error(Errc::target_above_capacity,
                fmt::format("target {} exceeds capacity {}", target, capacity_));
  }
  return std::clamp(target, 0.0, capacity_);
}

double LinkPhysics::flow(double density, double speed) const {
  density = checked_density(density);
  if (!(speed >= 0.0 && speed <= max_speed_ * (1.0 + kRangeSlack))) {
    throw Error(Errc::out_of_range, fmt::format("speed {} outside [0, {}]", speed, max_speed_));
  }
  if (density >= jam_density_) return 0.0;
  return lane_count_ * diagram_->flow(density / lane_count_, std::min(speed, max_speed_));
}

double LinkPhysics::max_sustainable_inflow(double density) const {
  density = checked_density(density);
  if (density <= critical_density_) return capacity_;
  return flow_at_max_speed(density);
}

double LinkPhysics::rho_hat(double target) const {
  target = checked_target(target);
  if (target <= 0.0) return jam_density_;
  if (target >= capacity_) return critical_density_;
  const double unit = diagram_->congested_density(target / lane_count_, max_speed_);
  return std::clamp(lane_count_ * unit, critical_density_, jam_density_);
}

double LinkPhysics::constant_speed_limit(double target) const {
  target = checked_target(target);
  if (target <= 0.0) return 0.0;
  return std::min(max_speed_, target / rho_hat(target));
}

double LinkPhysics::feedback_speed_limit(double target, double density) const {
  target = checked_target(target);
  density = checked_density(density);
  if (flow_at_max_speed(density) <= target) return max_speed_;
  return target / density;
}

double rho_hat_bisection(const LinkPhysics& physics, double target, double tolerance) {
  target = physics.checked_target(target);
  if (target <= 0.0) return physics.jam_density();
  return bisect_decreasing_branch([&](double r) { return physics.flow_at_max_speed(r); },
                                  physics.critical_density(), physics.jam_density(), target, tolerance);
}

std::vector<LinkPhysics> link_physics(const FlowNetwork& network,
                                      std::shared_ptr<const FundamentalDiagram> diagram) {
  std::vector<LinkPhysics> result;
  result.reserve(network.link_count());
  for (const Link& link : network.links()) {
    result.emplace_back(diagram, link.lane_count, link.max_speed);
  }
  return result;
}

double speed_limit(const SpeedLimitPolicy& policy, const LinkPhysics& physics, double density) {
  struct Visitor {
    const LinkPhysics& physics;
    double density;
    double operator()(const MaxSpeed&) const { return physics.max_speed(); }
    double operator()(const ConstantCap& cap) const { return physics.constant_speed_limit(cap.target); }
    double operator()(const FeedbackCap& cap) const {
      return physics.feedback_speed_limit(cap.target, density);
    }
  };
  return std::visit(Visitor{physics, density}, policy);
}

double induced_capacity(const SpeedLimitPolicy& policy, const LinkPhysics& physics) {
  if (const auto* c = std::get_if<ConstantCap>(&policy)) return physics.checked_target(c->target);
  if (const auto* f = std::get_if<FeedbackCap>(&policy)) return physics.checked_target(f->target);
  return physics.capacity();
}

std::string_view policy_name(const SpeedLimitPolicy& policy) {
  if (std::holds_alternative<ConstantCap>(policy)) return "constant";
  if (std::holds_alternative<FeedbackCap>(policy)) return "feedback";
  return "max";
}

}  // namespace flownet
