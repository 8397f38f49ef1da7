#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "doctest.h"
#include "gridssa/errors.hpp"
#include "gridssa/rng.hpp"
#include "gridssa/small_signal.hpp"
#include "oracles.hpp"

using namespace gridssa;
using Complex = std::complex<double>;

namespace {

// Closed-form SMIB quantities computed with scalar arithmetic only.
struct SmibHand {
  double k;      // synchronizing coefficient E*V*cos(delta)/x_total
  double m;      // 2H/omega_s
  double d;
  double omega_s;
  double zeta;   // D / (2 sqrt(K M omega_s))
};

SmibHand smib_closed_form(const GridCase& c, const OperatingPoint& op,
                          double omega_s) {
  const Generator& gen = c.generators[0];
  const double x_line = c.branches[0].x;
  const double x_total = gen.xd_prime + x_line;

  // machine terminal state (bus index 1), slack is the infinite bus
  const Complex v2 = std::polar(op.v_mag[1], op.v_ang[1]);
  const Complex s(op.p_net[1], op.q_net[1]);
  const Complex current = std::conj(s / v2);
  const Complex emf = v2 + Complex(0.0, gen.xd_prime) * current;
  const double v1 = op.v_mag[0];

  SmibHand h;
  h.omega_s = omega_s;
  h.m = 2.0 * gen.inertia_h / omega_s;
  h.d = gen.damping_d;
  h.k = std::abs(emf) * v1 * std::cos(std::arg(emf) - op.v_ang[0]) / x_total;
  h.zeta = h.d / (2.0 * std::sqrt(h.k * h.m * omega_s));
  return h;
}

}  // namespace

TEST_CASE("SMIB state matrix reproduces the hand linearization") {
  const GridCase c = oracles::load_fixture("smib.case");
  const OperatingPoint op = solve_power_flow(c);
  REQUIRE(op.converged);

  SmallSignalOptions opt;
  const StateMatrix sm = build_state_matrix(c, op, std::nullopt, opt);
  REQUIRE(sm.machines == 1);
  REQUIRE(sm.a.rows() == 2);

  const SmibHand hand = smib_closed_form(c, op, opt.omega_s);
  CHECK(sm.a(0, 0) == 0.0);
  CHECK(sm.a(0, 1) == doctest::Approx(opt.omega_s).epsilon(1e-14));
  CHECK(sm.a(1, 0) == doctest::Approx(-hand.k / hand.m).epsilon(1e-10));
  CHECK(sm.a(1, 1) == doctest::Approx(-hand.d / hand.m).epsilon(1e-10));
}

TEST_CASE("SMIB eigenvalues give the closed-form damping ratio") {
  const GridCase c = oracles::load_fixture("smib.case");
  const OperatingPoint op = solve_power_flow(c);
  REQUIRE(op.converged);

  SmallSignalOptions opt;
  const StateMatrix sm = build_state_matrix(c, op, std::nullopt, opt);
  const SmibHand hand = smib_closed_form(c, op, opt.omega_s);

  const double zeta = min_damping(eigenvalues(sm.a), opt.omega_floor);
  CHECK(zeta == doctest::Approx(hand.zeta).epsilon(1e-10));
}

TEST_CASE("uniform-angle direction is a null mode on lossless networks") {
  const GridCase c = oracles::load_fixture("threemach.case");
  const OperatingPoint op = solve_power_flow(c);
  REQUIRE(op.converged);

  const StateMatrix sm = build_state_matrix(c, op);
  const int g = sm.machines;
  REQUIRE(g == 3);

  // row sums of L vanish: A * [1...1, 0...0]^T = 0
  Eigen::VectorXd uniform = Eigen::VectorXd::Zero(2 * g);
  uniform.head(g).setOnes();
  CHECK((sm.a * uniform).norm() == doctest::Approx(0.0).epsilon(1e-12));

  // and the eigensolve sees it as an omega = 0 mode that min_damping skips
  const auto eigs = eigenvalues(sm.a);
  int near_zero = 0;
  for (const auto& ev : eigs)
    if (std::abs(ev) < 1e-9) ++near_zero;
  CHECK(near_zero >= 1);
}

TEST_CASE("top-right block is omega_s scaled identity") {
  const GridCase c = oracles::load_fixture("threemach.case");
  const OperatingPoint op = solve_power_flow(c);
  SmallSignalOptions opt;
  opt.omega_s = 100.0 * 3.141592653589793;  // 50 Hz system
  const StateMatrix sm = build_state_matrix(c, op, std::nullopt, opt);
  const int g = sm.machines;
  CHECK(sm.a.topLeftCorner(g, g).isZero(0.0));
  CHECK(sm.a.topRightCorner(g, g).isApprox(
      opt.omega_s * Eigen::MatrixXd::Identity(g, g)));
}

TEST_CASE("radial branch outage islands a generator") {
  const GridCase c = oracles::load_fixture("radialgen.case");
  const OperatingPoint op = solve_power_flow(c);
  REQUIRE(op.converged);
  CHECK_THROWS_AS(build_state_matrix(c, op, 3), IslandingError);
  // non-islanding outage works
  CHECK_NOTHROW(build_state_matrix(c, op, 0));
}

TEST_CASE("eigenvalues of analytic fixtures") {
  SUBCASE("rotation matrix") {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, -1, 0;
    auto eigs = eigenvalues(a);
    std::sort(eigs.begin(), eigs.end(),
              [](Complex x, Complex y) { return x.imag() < y.imag(); });
    CHECK(std::abs(eigs[0] - Complex(0, -1)) < 1e-10);
    CHECK(std::abs(eigs[1] - Complex(0, 1)) < 1e-10);
  }
  SUBCASE("diagonal matrix") {
    Eigen::Vector3d d(3.0, -2.0, 0.5);
    auto eigs = eigenvalues(d.asDiagonal());
    std::vector<double> re;
    for (auto& ev : eigs) {
      CHECK(ev.imag() == 0.0);
      re.push_back(ev.real());
    }
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(re[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(re[2] == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("companion matrix of s^2 + 2s + 5") {
    Eigen::MatrixXd a(2, 2);
    a << 0, -5, 1, -2;
    auto eigs = eigenvalues(a);
    std::sort(eigs.begin(), eigs.end(),
              [](Complex x, Complex y) { return x.imag() < y.imag(); });
    CHECK(std::abs(eigs[0] - Complex(-1, -2)) < 1e-10);
    CHECK(std::abs(eigs[1] - Complex(-1, 2)) < 1e-10);
  }
  SUBCASE("empty and non-finite rejected") {
    CHECK_THROWS_AS(eigenvalues(Eigen::MatrixXd()), ValidationError);
    Eigen::MatrixXd bad(1, 1);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(eigenvalues(bad), ValidationError);
  }
}

TEST_CASE("conjugate pairing is exact for random matrices") {
  gridssa::Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(8));
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    auto eigs = eigenvalues(a);
    std::vector<bool> used(eigs.size(), false);
    for (std::size_t i = 0; i < eigs.size(); ++i) {
      if (used[i] || eigs[i].imag() == 0.0) continue;
      bool found = false;
      for (std::size_t j = i + 1; j < eigs.size(); ++j) {
        if (used[j]) continue;
        if (eigs[j].real() == eigs[i].real() &&
            eigs[j].imag() == -eigs[i].imag()) {
          used[i] = used[j] = true;
          found = true;
          break;
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("damping ratio of a complex pole") {
  CHECK(damping_ratio(-1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(damping_ratio(0.0, 5.0) == 0.0);
  CHECK(damping_ratio(-3.0, 4.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(damping_ratio(3.0, 4.0) == doctest::Approx(-0.6).epsilon(1e-15));
  CHECK_THROWS_AS(damping_ratio(0.0, 0.0), ValidationError);
}

TEST_CASE("labeling the SMIB fixture") {
  const GridCase base = oracles::load_fixture("smib.case");

  SUBCASE("well-damped machine at light load is secure") {
    // the single line is the only contingency and outaging it islands the
    // machine, so screen the intact system through an added parallel path
    GridCase c = base;
    c.branches.push_back({1, 2, 0.0, 0.4, 0.0, 0.0});
    const OperatingPoint op = solve_power_flow(c);
    REQUIRE(op.converged);
    const SecurityLabel label = label_operating_point(c, op, {0, 1}, 0.03);
    CHECK(label.secure);
    CHECK(!label.discarded.has_value());
    CHECK(label.per_contingency.size() == 2);
    CHECK(label.min_zeta >= 0.03);
  }

  SUBCASE("zero damping is insecure") {
    GridCase c = base;
    c.branches.push_back({1, 2, 0.0, 0.4, 0.0, 0.0});
    c.generators[0].damping_d = 0.0;
    const OperatingPoint op = solve_power_flow(c);
    const SecurityLabel label = label_operating_point(c, op, {0, 1}, 0.03);
    CHECK(!label.secure);
    CHECK(label.min_zeta == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("threshold is inclusive: min_zeta == threshold is secure") {
    GridCase c = base;
    c.branches.push_back({1, 2, 0.0, 0.4, 0.0, 0.0});
    const OperatingPoint op = solve_power_flow(c);
    SecurityLabel probe = label_operating_point(c, op, {0, 1}, 0.03);
    // use the measured min_zeta itself as the threshold
    const SecurityLabel label =
        label_operating_point(c, op, {0, 1}, probe.min_zeta);
    CHECK(label.secure);
  }

  SUBCASE("islanding contingency marks the point insecure with a reason") {
    const OperatingPoint op = solve_power_flow(base);
    const SecurityLabel label = label_operating_point(base, op, {0}, 0.03);
    CHECK(!label.secure);
    REQUIRE(label.discarded.has_value());
    CHECK(label.discarded->find("islanding") != std::string::npos);
    REQUIRE(label.per_contingency.size() == 1);
    CHECK(std::isnan(label.per_contingency[0].second));
  }
}

TEST_CASE("monotone labeling: raising the threshold never turns secure") {
  const GridCase c = oracles::load_fixture("radialgen.case");
  const OperatingPoint op = solve_power_flow(c);
  REQUIRE(op.converged);
  const std::vector<int> cont = {0, 1, 2};  // skip the islanding branch
  bool previous = true;
  for (double threshold : {0.0, 0.01, 0.02, 0.05, 0.2, 0.5, 0.9}) {
    const bool secure =
        label_operating_point(c, op, cont, threshold).secure;
    if (!previous) CHECK(!secure);
    previous = secure;
  }
}
