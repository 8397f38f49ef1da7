#include <cmath>

#include "doctest.h"
#include "gridssa/errors.hpp"
#include "gridssa/power_flow.hpp"
#include "oracles.hpp"

using namespace gridssa;

TEST_CASE("scale_profile") {
  const GridCase c = oracles::load_fixture("threebus.case");

  SUBCASE("identity range returns the input case") {
    auto [scaled, profile] = scale_profile(c, 1.0, 1.0, 99);
    CHECK(scaled.buses[2].p_load == c.buses[2].p_load);
    CHECK(scaled.generators[0].p_gen == c.generators[0].p_gen);
    for (double f : profile.gen_factors) CHECK(f == 1.0);
  }
  SUBCASE("deterministic per seed") {
    auto [a, pa] = scale_profile(c, 0.7, 1.5, 42);
    auto [b, pb] = scale_profile(c, 0.7, 1.5, 42);
    CHECK(pa.gen_factors == pb.gen_factors);
    CHECK(pa.load_factors == pb.load_factors);
    CHECK(a.buses[2].p_load == b.buses[2].p_load);
    auto [c2, pc] = scale_profile(c, 0.7, 1.5, 43);
    CHECK(pa.load_factors != pc.load_factors);
  }
  SUBCASE("factors land inside the requested range") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      auto [scaled, profile] = scale_profile(c, 0.7, 1.5, seed);
      for (double f : profile.gen_factors) {
        CHECK(f >= 0.7);
        CHECK(f <= 1.5);
      }
      for (auto [fp, fq] : profile.load_factors) {
        CHECK(fp >= 0.7);
        CHECK(fp <= 1.5);
        CHECK(fq >= 0.7);
        CHECK(fq <= 1.5);
      }
    }
  }
  SUBCASE("scaled dispatch respects generator limits") {
    GridCase tight = c;
    tight.generators[0].p_max = 0.32;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto [scaled, profile] = scale_profile(tight, 0.7, 1.5, seed);
      CHECK(scaled.generators[0].p_gen <= 0.32);
      CHECK(scaled.generators[0].p_gen >= tight.generators[0].p_min);
    }
  }
  SUBCASE("bad range rejected") {
    CHECK_THROWS_AS(scale_profile(c, 0.0, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(scale_profile(c, 1.2, 1.0, 1), ValidationError);
  }
}

TEST_CASE("no-load two-bus case solves flat") {
  const GridCase c = oracles::load_fixture("twobus.case");
  const OperatingPoint op = solve_power_flow(c);
  REQUIRE(op.converged);
  CHECK(op.v_mag[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(op.v_mag[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(op.v_ang[0] == 0.0);
  CHECK(op.v_ang[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(op.line_p[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(op.line_q[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("three-bus case matches the Gauss-Seidel oracle") {
  const GridCase c = oracles::load_fixture("threebus.case");
  const auto gs = oracles::gauss_seidel_power_flow(c, 1e-10);
  REQUIRE(gs.converged);

  PowerFlowOptions opt;
  opt.tol = 1e-10;
  const OperatingPoint op = solve_power_flow(c, opt);
  REQUIRE(op.converged);
  for (int i = 0; i < 3; ++i) {
    CHECK(op.v_mag[i] ==
          doctest::Approx(std::abs(gs.v[i])).epsilon(1e-8));
    CHECK(op.v_ang[i] ==
          doctest::Approx(std::arg(gs.v[i])).epsilon(1e-8));
  }
}

TEST_CASE("slack angle is exactly zero and mismatch meets the tolerance") {
  const GridCase c = oracles::load_fixture("threebus.case");
  const OperatingPoint op = solve_power_flow(c);
  REQUIRE(op.converged);
  CHECK(op.v_ang[0] == 0.0);

  // scheduled vs computed injections at non-slack buses
  CHECK(op.p_net[1] ==
        doctest::Approx(0.3 - 0.1).epsilon(1e-7));  // gen minus load
  CHECK(op.p_net[2] == doctest::Approx(-0.4).epsilon(1e-7));
  CHECK(op.q_net[2] == doctest::Approx(-0.15).epsilon(1e-7));
}

TEST_CASE("infeasible two-bus load does not converge") {
  GridCase c = oracles::load_fixture("twobus.case");
  c.buses[1].p_load = 100.0;
  // the oracle confirms no real solution exists for this loading
  CHECK(!oracles::two_bus_has_real_solution(1.0, 0.1, 100.0, 0.0));
  const OperatingPoint op = solve_power_flow(c);
  CHECK(!op.converged);
}

TEST_CASE("feasible edge of the circle still solves") {
  GridCase c = oracles::load_fixture("twobus.case");
  c.buses[1].p_load = 2.0;  // well inside: max transfer is 1/(2*0.1) = 5
  CHECK(oracles::two_bus_has_real_solution(1.0, 0.1, 2.0, 0.0));
  const OperatingPoint op = solve_power_flow(c);
  CHECK(op.converged);
}

TEST_CASE("disconnected network detected before iterating") {
  GridCase c = oracles::load_fixture("threebus.case");
  c.buses.push_back({9, BusKind::PQ, 0.1, 0.0, std::nullopt, 0.9, 1.1});
  CHECK_THROWS_AS(solve_power_flow(c), DisconnectedNetworkError);
}

TEST_CASE("line flow formulas") {
  SUBCASE("zero angle difference on a lossless line carries nothing") {
    const GridCase c = oracles::load_fixture("twobus.case");
    Eigen::VectorXd vm(2), va(2);
    vm << 1.0, 1.0;
    va << 0.0, 0.0;
    auto [lp, lq] = compute_line_flows(c, vm, va);
    CHECK(lp[0] == 0.0);
    CHECK(lq[0] == 0.0);
  }
  SUBCASE("lossless line: p = sin(theta)/x") {
    const GridCase c = oracles::load_fixture("twobus.case");
    Eigen::VectorXd vm(2), va(2);
    vm << 1.0, 1.0;
    const double theta = 0.15;
    va << theta, 0.0;
    auto [lp, lq] = compute_line_flows(c, vm, va);
    CHECK(lp[0] == doctest::Approx(std::sin(theta) / 0.1).epsilon(1e-12));
  }
}

TEST_CASE("power conservation at every bus of the three-bus fixture") {
  const GridCase c = oracles::load_fixture("threebus.case");
  const OperatingPoint op = solve_power_flow(c);
  REQUIRE(op.converged);

  auto [rp, rq] = receiving_end_flows(c, op.v_mag, op.v_ang);
  const auto index = bus_index_map(c);
  for (int i = 0; i < 3; ++i) {
    double out_p = 0.0, out_q = 0.0;
    for (int b = 0; b < static_cast<int>(c.branches.size()); ++b) {
      if (index.at(c.branches[b].from_bus) == i) {
        out_p += op.line_p[b];
        out_q += op.line_q[b];
      }
      if (index.at(c.branches[b].to_bus) == i) {
        out_p += rp[b];
        out_q += rq[b];
      }
    }
    CHECK(op.p_net[i] == doctest::Approx(out_p).epsilon(1e-8));
    CHECK(op.q_net[i] == doctest::Approx(out_q).epsilon(1e-8));
  }
}

TEST_CASE("check_limits") {
  const GridCase c = oracles::load_fixture("threebus.case");
  OperatingPoint op = solve_power_flow(c);
  REQUIRE(op.converged);

  SUBCASE("clean point reports nothing") {
    CHECK(check_limits(c, op).empty());
  }
  SUBCASE("low voltage flagged") {
    OperatingPoint low = op;
    low.v_mag[2] = 0.85;
    const auto v = check_limits(c, low);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == LimitViolation::Kind::VoltageLow);
    CHECK(v[0].index == 2);
  }
  SUBCASE("branch overload flagged") {
    GridCase rated = c;
    rated.branches[1].rating = 0.1;
    const auto v = check_limits(rated, op);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == LimitViolation::Kind::Overload);
    CHECK(v[0].index == 1);
  }
  SUBCASE("rating zero means unlimited") {
    CHECK(check_limits(c, op).empty());
  }
}

TEST_CASE("determinism: identical runs produce identical points") {
  const GridCase c = oracles::load_fixture("threebus.case");
  const OperatingPoint a = solve_power_flow(c);
  const OperatingPoint b = solve_power_flow(c);
  CHECK((a.v_mag.array() == b.v_mag.array()).all());
  CHECK((a.v_ang.array() == b.v_ang.array()).all());
  CHECK(a.iterations == b.iterations);
}
