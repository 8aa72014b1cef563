#pragma once

#include <memory>
#include <string_view>
#include <variant>
#include <vector>

#include "flownet/network.hpp"

namespace flownet {

/// Single-lane speed-density relation. The flow at per-lane density r under
/// speed limit u is r * min(u, max_speed(r)); implementations must make that
/// unimodal in r (strictly increasing then strictly decreasing) at full speed.
class FundamentalDiagram {
 public:
  virtual ~FundamentalDiagram() = default;

  virtual double free_flow_speed() const = 0;
  /// Per-lane jam density.
  virtual double jam_density() const = 0;
  /// Largest safe speed at per-lane density; decreasing, zero at jam.
  virtual double max_speed(double unit_density) const = 0;

  double flow(double unit_density, double speed_limit) const;

  /// Per-lane density at which flow(., speed_cap) peaks. The default runs a
  /// golden-section search.
  virtual double critical_density(double speed_cap) const;

  /// Largest per-lane density with flow(., speed_cap) == unit_target. The
  /// default bisects the decreasing branch.
  virtual double congested_density(double unit_target, double speed_cap) const;
};

/// Linear speed-density relation s(r) = v_f (1 - r / r_jam).
class GreenshieldsDiagram final : public FundamentalDiagram {
 public:
  explicit GreenshieldsDiagram(double free_flow_speed = 1.0, double jam_density = 4.0);

  double free_flow_speed() const override { return free_flow_speed_; }
  double jam_density() const override { return jam_density_; }
  double max_speed(double unit_density) const override;
  double critical_density(double speed_cap) const override;
  double congested_density(double unit_target, double speed_cap) const override;

 private:
  double free_flow_speed_;
  double jam_density_;
};

/// Flow function of one link, f_e(rho, u) = c_e f_0(rho / c_e, u), together
/// with its derived thresholds.
class LinkPhysics {
 public:
  LinkPhysics(std::shared_ptr<const FundamentalDiagram> diagram, double lane_count, double max_speed);

  double lane_count() const { return lane_count_; }
  double max_speed() const { return max_speed_; }
  double jam_density() const { return jam_density_; }
  double critical_density() const { return critical_density_; }
  double capacity() const { return capacity_; }
  const FundamentalDiagram& diagram() const { return *diagram_; }

  /// Throws out_of_range unless density is in [0, jam] and speed in [0, max].
  double flow(double density, double speed) const;
  double flow_at_max_speed(double density) const { return flow(density, max_speed_); }

  /// Largest constant inflow the link can absorb from `density` without
  /// jamming: the capacity when uncongested, the current flow otherwise.
  double max_sustainable_inflow(double density) const;

  /// Largest density whose full-speed flow equals `target`; lies in
  /// [critical, jam]. Throws target_above_capacity.
  double rho_hat(double target) const;

  /// Constant speed limit keeping the flow at or below `target` at every
  /// density. A zero target closes the link (returns 0).
  double constant_speed_limit(double target) const;

  /// Full speed while the full-speed flow stays within `target`, else the
  /// speed that makes the flow exactly `target`.
  double feedback_speed_limit(double target, double density) const;

  /// Clamps values within round-off of the admissible density range.
  double checked_density(double density) const;
  double checked_target(double target) const;

 private:
  std::shared_ptr<const FundamentalDiagram> diagram_;
  double lane_count_;
  double max_speed_;
  double jam_density_;
  double critical_density_;
  double capacity_;
};

/// Bisection for rho_hat on the link's decreasing branch; independent of any
/// closed form a diagram might provide.
double rho_hat_bisection(const LinkPhysics& physics, double target, double tolerance = 1e-10);

std::vector<LinkPhysics> link_physics(const FlowNetwork& network,
                                      std::shared_ptr<const FundamentalDiagram> diagram);

struct MaxSpeed {
  bool operator==(const MaxSpeed&) const = default;
};

/// Constant speed limit inducing capacity `target`.
struct ConstantCap {
  double target = 0.0;
  bool operator==(const ConstantCap&) const = default;
};

/// Density-feedback speed limit inducing capacity `target`.
struct FeedbackCap {
  double target = 0.0;
  bool operator==(const FeedbackCap&) const = default;
};

using SpeedLimitPolicy = std::variant<MaxSpeed, ConstantCap, FeedbackCap>;

double speed_limit(const SpeedLimitPolicy& policy, const LinkPhysics& physics, double density);

/// Target capacity induced by a policy (the link capacity for MaxSpeed).
double induced_capacity(const SpeedLimitPolicy& policy, const LinkPhysics& physics);

std::string_view policy_name(const SpeedLimitPolicy& policy);

}  // namespace flownet
