#include <doctest.h>

#include <cmath>
#include <memory>

#include "flownet/error.hpp"
#include "flownet/fundamental.hpp"

using namespace flownet;

namespace {

LinkPhysics normalized(double lanes = 1.0, double max_speed = 1.0) {
  return LinkPhysics(std::make_shared<GreenshieldsDiagram>(), lanes, max_speed);
}

/// Diagram without closed forms, so the generic searches are exercised.
class QuadraticSpeed final : public FundamentalDiagram {
 public:
  double free_flow_speed() const override { return 2.0; }
  double jam_density() const override { return 3.0; }
  double max_speed(double r) const override {
    const double x = 1.0 - r / 3.0;
    return r >= 3.0 ? 0.0 : 2.0 * x * x;
  }
};

double grid_peak(const LinkPhysics& p, double speed, double* argmax = nullptr) {
  double best = -1.0;
  constexpr int n = 100000;
  for (int i = 0; i <= n; ++i) {
    const double rho = p.jam_density() * i / n;
    const double f = p.flow(rho, speed);
    if (f > best) {
      best = f;
      if (argmax) *argmax = rho;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("flow values on the normalized link") {
  const LinkPhysics p = normalized();
  CHECK(p.flow(0.0, 1.0) == 0.0);
  CHECK(p.flow(2.0, 1.0) == doctest::Approx(1.0));
  CHECK(p.flow(4.0, 1.0) == 0.0);
  CHECK(p.flow(1.0, 0.3) == doctest::Approx(0.3));
  CHECK(p.capacity() == doctest::Approx(1.0));
  CHECK(p.critical_density() == doctest::Approx(2.0));
  CHECK(p.jam_density() == 4.0);
}

TEST_CASE("closed-form peak agrees with a grid search") {
  const LinkPhysics p = normalized();
  double argmax = 0.0;
  CHECK(grid_peak(p, 1.0, &argmax) == doctest::Approx(p.capacity()).epsilon(1e-8));
  CHECK(argmax == doctest::Approx(p.critical_density()).epsilon(1e-4));
}

TEST_CASE("lane count scales density and flow") {
  const LinkPhysics p = normalized(4.0);
  CHECK(p.jam_density() == 16.0);
  CHECK(p.critical_density() == doctest::Approx(8.0));
  CHECK(p.capacity() == doctest::Approx(4.0));
  CHECK(p.flow(12.0, 1.0) == doctest::Approx(4.0 * normalized().flow(3.0, 1.0)));
}

TEST_CASE("flow rejects out-of-range arguments") {
  const LinkPhysics p = normalized();
  CHECK_THROWS_AS(p.flow(-0.1, 1.0), Error);
  CHECK_THROWS_AS(p.flow(4.1, 1.0), Error);
  CHECK_THROWS_AS(p.flow(1.0, 1.5), Error);
  CHECK_THROWS_AS(p.flow(1.0, -0.5), Error);
  CHECK(p.flow(4.0 + 1e-12, 1.0) == 0.0);
}

TEST_CASE("maximum sustainable inflow") {
  const LinkPhysics p = normalized();
  CHECK(p.max_sustainable_inflow(0.0) == doctest::Approx(1.0));
  CHECK(p.max_sustainable_inflow(2.0) == doctest::Approx(1.0));
  CHECK(p.max_sustainable_inflow(3.0) == doctest::Approx(0.75));
  CHECK(p.max_sustainable_inflow(4.0) == 0.0);
}

TEST_CASE("rho_hat") {
  const LinkPhysics p = normalized();
  CHECK(p.rho_hat(1.0) == doctest::Approx(2.0));
  CHECK(p.rho_hat(0.0) == doctest::Approx(4.0));
  CHECK(p.rho_hat(0.75) == doctest::Approx(3.0));
  CHECK_THROWS_AS(p.rho_hat(1.1), Error);
  CHECK_THROWS_AS(p.rho_hat(-0.1), Error);

  SUBCASE("closed form matches bisection") {
    const LinkPhysics wide = normalized(2.5);
    for (double target = 0.0; target <= wide.capacity(); target += 0.05) {
      const double closed = wide.rho_hat(target);
      CHECK(closed >= wide.critical_density());
      CHECK(std::abs(wide.flow_at_max_speed(closed) - target) <= 1e-12 * wide.capacity());
      // The root is ill-conditioned at the peak, where density error grows
      // like the square root of the flow error.
      CHECK(closed == doctest::Approx(rho_hat_bisection(wide, target)).epsilon(1e-7));
    }
  }
}

TEST_CASE("constant speed limit") {
  const LinkPhysics p = normalized();
  CHECK(p.constant_speed_limit(1.0) == doctest::Approx(0.5));
  CHECK(p.constant_speed_limit(0.75) == doctest::Approx(0.25));
  CHECK(p.constant_speed_limit(0.0) == 0.0);
  CHECK(p.constant_speed_limit(1.0) <= p.max_speed());

  SUBCASE("the capped peak equals the target") {
    for (const double target : {0.2, 0.5, 0.75, 1.0}) {
      const double u = p.constant_speed_limit(target);
      CHECK(grid_peak(p, u) <= target + 1e-12);
      CHECK(p.flow(p.rho_hat(target), u) == doctest::Approx(target).epsilon(1e-12));
    }
  }
}

TEST_CASE("feedback speed limit") {
  const LinkPhysics p = normalized();
  CHECK(p.feedback_speed_limit(0.75, 0.5) == 1.0);
  CHECK(p.feedback_speed_limit(0.75, 2.0) == doctest::Approx(0.375));
  CHECK(p.flow(2.0, p.feedback_speed_limit(0.75, 2.0)) == doctest::Approx(0.75));
  for (double rho = 0.0; rho <= 4.0; rho += 0.25) CHECK(p.feedback_speed_limit(1.0, rho) == 1.0);

  SUBCASE("capped flow is exactly min(f, target)") {
    for (const double target : {0.1, 0.5, 0.9}) {
      for (int i = 0; i <= 400; ++i) {
        const double rho = 4.0 * i / 400;
        const double capped = p.flow(rho, p.feedback_speed_limit(target, rho));
        CHECK(capped == doctest::Approx(std::min(p.flow(rho, 1.0), target)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("lower max speed caps the free-flow branch") {
  const LinkPhysics p = normalized(1.0, 0.5);
  // Flow rises at slope 0.5 until the speed-density curve drops below it.
  CHECK(p.critical_density() == doctest::Approx(2.0));
  CHECK(p.capacity() == doctest::Approx(1.0));
  const LinkPhysics slow = normalized(1.0, 0.25);
  CHECK(slow.critical_density() == doctest::Approx(3.0));
  CHECK(slow.capacity() == doctest::Approx(0.75));
  CHECK(slow.rho_hat(0.75) == doctest::Approx(3.0));
  CHECK(slow.rho_hat(0.5) == doctest::Approx(rho_hat_bisection(slow, 0.5)).epsilon(1e-9));
}

TEST_CASE("generic diagram uses numeric searches") {
  const LinkPhysics p(std::make_shared<QuadraticSpeed>(), 1.0, 2.0);
  double argmax = 0.0;
  const double peak = grid_peak(p, 2.0, &argmax);
  CHECK(p.critical_density() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(p.capacity() == doctest::Approx(peak).epsilon(1e-8));
  CHECK(p.rho_hat(0.5 * p.capacity()) == doctest::Approx(rho_hat_bisection(p, 0.5 * p.capacity())).epsilon(1e-7));
}

TEST_CASE("speed-limit policies") {
  const LinkPhysics p = normalized();
  CHECK(speed_limit(MaxSpeed{}, p, 3.0) == 1.0);
  CHECK(speed_limit(ConstantCap{0.75}, p, 3.0) == doctest::Approx(0.25));
  CHECK(speed_limit(FeedbackCap{0.75}, p, 2.0) == doctest::Approx(0.375));
  CHECK(induced_capacity(MaxSpeed{}, p) == doctest::Approx(1.0));
  CHECK(induced_capacity(FeedbackCap{0.4}, p) == 0.4);
  CHECK(policy_name(ConstantCap{}) == "constant");
}
