#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flatplan/sim.hpp"

using namespace flatplan;
using crane::ControlInput;
using crane::CraneParams;
using crane::CraneState;

TEST_CASE("integrate") {
  CraneParams params;

  SUBCASE("equilibrium fixed point stays put") {
    CraneState z0;
    z0.q << 1.0, 0.5, 0.4, 0.0, 0.0;
    ControlInput hold;
    hold.u = Vec3(0.0, 0.0, params.payload_mass * params.gravity);
    const auto result = sim::integrate(
        z0, [&](double) { return hold; }, params, 1e-3, 1.0);
    double drift = 0.0;
    for (const auto& s : result.states)
      drift = std::max(drift, (s.to_vector() - z0.to_vector()).cwiseAbs().maxCoeff());
    CHECK(drift < 1e-9);
  }

  SUBCASE("fourth-order convergence on a smooth input") {
    CraneState z0;
    z0.q << 0.5, 0.5, 0.4, 0.0, 0.0;
    auto input = [&](double t) {
      ControlInput u;
      u.u = Vec3(0.3 * std::sin(2.0 * t), 0.2 * std::cos(1.5 * t),
                 params.payload_mass * params.gravity + 0.1 * std::sin(t));
      return u;
    };
    const double T = 1.0;
    const auto fine = sim::integrate(z0, input, params, 1e-5, T);
    auto terminal_err = [&](double dt) {
      const auto r = sim::integrate(z0, input, params, dt, T);
      return (r.states.back().to_vector() - fine.states.back().to_vector())
          .cwiseAbs()
          .maxCoeff();
    };
    const double e1 = terminal_err(4e-3);
    const double e2 = terminal_err(2e-3);
    CHECK(e1 / e2 > 10.0);  // ~16x for order 4
    CHECK(e1 / e2 < 24.0);
  }

  SUBCASE("free sway period matches the coupled-pendulum oracle") {
    // support free in y: omega^2 = (g/l)(1 + m_payload/m_trolley)
    CraneParams p;
    CraneState z0;
    const double alpha0 = 0.5 * std::numbers::pi / 180.0;
    z0.q << 0.5, 0.5, 0.4, alpha0, 0.0;
    ControlInput hold;
    hold.u = Vec3(0.0, 0.0, p.payload_mass * p.gravity);
    const double l = p.suspension_height - 0.4;
    const double omega = std::sqrt(p.gravity / l * (1.0 + p.payload_mass / p.trolley_mass));
    const double period_ref = 2.0 * std::numbers::pi / omega;

    const auto result = sim::integrate(
        z0, [&](double) { return hold; }, p, 1e-4, 3.0 * period_ref);
    // measure the period from upward zero crossings of alpha
    std::vector<double> crossings;
    for (std::size_t i = 1; i < result.t.size(); ++i) {
      const double a0 = result.states[i - 1].q[3], a1 = result.states[i].q[3];
      if (a0 < 0.0 && a1 >= 0.0) {
        const double frac = a0 / (a0 - a1);
        crossings.push_back(result.t[i - 1] + frac * (result.t[i] - result.t[i - 1]));
      }
    }
    REQUIRE(crossings.size() >= 2);
    const double period = (crossings.back() - crossings.front()) / (crossings.size() - 1);
    CHECK(std::abs(period - period_ref) / period_ref < 0.01);
  }

  SUBCASE("energy conservation with zero input") {
    CraneParams p;
    CraneState z0;
    z0.q << 0.5, 0.5, 0.4, 0.02, -0.015;
    z0.qdot << 0.05, -0.04, 0.0, 0.1, 0.08;
    const double e0 = crane::total_energy(z0, p);
    const auto result = sim::integrate(
        z0, [](double) { return ControlInput{}; }, p, 1e-4, 1.0);
    double drift = 0.0;
    for (const auto& s : result.states)
      drift = std::max(drift, std::abs(crane::total_energy(s, p) - e0));
    CHECK(drift < 1e-6);
  }
}

TEST_CASE("validate_flat_trajectory") {
  CraneParams params;
  SteeringWeights w;
  SteeringBounds b;

  SUBCASE("degenerate single-point trajectory") {
    const auto sol = lqmt::steer(FlatState::rest(Vec3(0.5, 0.5, 0.5)),
                                 FlatState::rest(Vec3(0.5, 0.5, 0.5)), w, b);
    const auto result = sim::validate_flat_trajectory({sol}, params, 1e-3);
    CHECK(result.max_state_error == 0.0);
  }

  SUBCASE("single-edge open-loop consistency") {
    const auto sol = lqmt::steer(FlatState::rest(Vec3(0.3, 0.3, 0.5)),
                                 FlatState::rest(Vec3(0.8, 0.6, 0.4)), w, b);
    const auto result = sim::validate_flat_trajectory({sol}, params, 1e-3);
    CHECK(result.max_state_error < 1e-4);
  }

  SUBCASE("two-edge chain keeps the certificate") {
    const FlatState a = FlatState::rest(Vec3(0.3, 0.3, 0.5));
    FlatState mid = FlatState::rest(Vec3(0.6, 0.5, 0.45));
    mid.velocity() = Vec3(0.1, 0.05, 0.0);
    const FlatState c = FlatState::rest(Vec3(0.9, 0.7, 0.4));
    const auto e1 = lqmt::steer(a, mid, w, b);
    const auto e2 = lqmt::steer(mid, c, w, b);
    const auto result = sim::validate_flat_trajectory({e1, e2}, params, 1e-3);
    CHECK(result.max_state_error < 1e-4);
  }

  SUBCASE("error shrinks ~16x per step halving on a single smooth edge") {
    const auto sol = lqmt::steer(FlatState::rest(Vec3(0.3, 0.3, 0.5)),
                                 FlatState::rest(Vec3(0.9, 0.8, 0.35)), w, b);
    const double e1 = sim::validate_flat_trajectory({sol}, params, 8e-3).max_state_error;
    const double e2 = sim::validate_flat_trajectory({sol}, params, 4e-3).max_state_error;
    CHECK(e1 / e2 > 8.0);
    CHECK(e1 / e2 < 32.0);
  }
}
