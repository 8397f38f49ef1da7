#include "gridssa/small_signal.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "gridssa/errors.hpp"
#include "gridssa/grid_graph.hpp"

namespace gridssa {

using Complex = std::complex<double>;

StateMatrix build_state_matrix(const GridCase& c, const OperatingPoint& op,
                               std::optional<int> outage,
                               const SmallSignalOptions& opt) {
  const int n = static_cast<int>(c.buses.size());
  const int g = static_cast<int>(c.generators.size());
  if (g == 0) throw ValidationError("case has no generators to model");
  if (!op.converged)
    throw ValidationError("operating point did not converge");
  if (outage && !connected_without_branch(c, *outage))
    throw IslandingError(*outage);

  const auto index = bus_index_map(c);
  const OperatingPoint* point = &op;
  OperatingPoint resolved;
  if (outage && opt.resolve_power_flow) {
    GridCase outaged = c;
    outaged.branches.erase(outaged.branches.begin() + *outage);
    resolved = solve_power_flow(outaged, opt.pf);
    if (!resolved.converged)
      throw NumericalError("post-outage power flow did not converge");
    point = &resolved;
  }

  // Network with loads folded in as constant admittances computed from the
  // operating point, plus one internal node per machine behind xd'.
  Eigen::MatrixXcd y_aug = Eigen::MatrixXcd::Zero(n + g, n + g);
  y_aug.topLeftCorner(n, n) =
      bus_admittance(c, outage ? *outage : -1);
  for (int i = 0; i < n; ++i) {
    const double vm2 = point->v_mag[i] * point->v_mag[i];
    y_aug(i, i) += Complex(c.buses[i].p_load, -c.buses[i].q_load) / vm2;
  }
  for (int k = 0; k < g; ++k) {
    const int i = index.at(c.generators[k].bus);
    const Complex yg = 1.0 / Complex(0.0, c.generators[k].xd_prime);
    y_aug(n + k, n + k) += yg;
    y_aug(i, i) += yg;
    y_aug(n + k, i) -= yg;
    y_aug(i, n + k) -= yg;
  }

  // Internal EMFs from the operating point. The generation at a bus is the
  // net injection plus the local load; buses with several machines split it
  // in proportion to scheduled dispatch.
  Eigen::VectorXd pgen_at_bus = Eigen::VectorXd::Zero(n);
  for (const Generator& gen : c.generators)
    pgen_at_bus[index.at(gen.bus)] += gen.p_gen;
  std::vector<int> machines_at_bus(n, 0);
  for (const Generator& gen : c.generators)
    ++machines_at_bus[index.at(gen.bus)];

  Eigen::VectorXcd emf(g);
  for (int k = 0; k < g; ++k) {
    const Generator& gen = c.generators[k];
    const int i = index.at(gen.bus);
    const Complex v = std::polar(point->v_mag[i], point->v_ang[i]);
    const Complex s_bus(point->p_net[i] + c.buses[i].p_load,
                        point->q_net[i] + c.buses[i].q_load);
    double share = 1.0 / machines_at_bus[i];
    if (pgen_at_bus[i] > 0.0) share = gen.p_gen / pgen_at_bus[i];
    const Complex s = s_bus * share;
    const Complex current = std::conj(s / v);
    emf[k] = v + Complex(0.0, gen.xd_prime) * current;
  }

  // A slack bus without a machine stays as an ideal source; everything else
  // is eliminated.
  const int slack = slack_index(c);
  const bool slack_is_machine = machines_at_bus[slack] > 0;
  std::vector<int> elim;
  elim.reserve(n);
  for (int i = 0; i < n; ++i)
    if (slack_is_machine || i != slack) elim.push_back(i);

  Eigen::MatrixXcd y_bb(elim.size(), elim.size());
  Eigen::MatrixXcd y_ib(g, elim.size());
  Eigen::MatrixXcd y_bi(elim.size(), g);
  for (std::size_t r = 0; r < elim.size(); ++r) {
    for (std::size_t cc = 0; cc < elim.size(); ++cc)
      y_bb(r, cc) = y_aug(elim[r], elim[cc]);
    for (int k = 0; k < g; ++k) {
      y_bi(r, k) = y_aug(elim[r], n + k);
      y_ib(k, r) = y_aug(n + k, elim[r]);
    }
  }

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(y_bb);
  if (!lu.isInvertible())
    throw NumericalError("singular reduced network (Kron elimination)");

  Eigen::MatrixXcd y_red =
      y_aug.bottomRightCorner(g, g) - y_ib * lu.solve(y_bi);

  // Transfer admittances from the fixed source to the internal nodes.
  Eigen::VectorXcd y_fix = Eigen::VectorXcd::Zero(g);
  Complex v_fixed(0.0, 0.0);
  if (!slack_is_machine) {
    Eigen::VectorXcd y_bf(elim.size());
    for (std::size_t r = 0; r < elim.size(); ++r)
      y_bf[r] = y_aug(elim[r], slack);
    Eigen::VectorXcd y_if(g);
    for (int k = 0; k < g; ++k) y_if[k] = y_aug(n + k, slack);
    y_fix = y_if - y_ib * lu.solve(y_bf);
    v_fixed = std::polar(point->v_mag[slack], point->v_ang[slack]);
  }

  // Synchronizing-coefficient matrix L = dP/ddelta at the operating point.
  Eigen::VectorXd mag(g), ang(g);
  for (int k = 0; k < g; ++k) {
    mag[k] = std::abs(emf[k]);
    ang[k] = std::arg(emf[k]);
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(g, g);
  for (int k = 0; k < g; ++k) {
    double diag = 0.0;
    for (int j = 0; j < g; ++j) {
      if (j == k) continue;
      const double gkj = y_red(k, j).real();
      const double bkj = y_red(k, j).imag();
      const double d = ang[k] - ang[j];
      l(k, j) = mag[k] * mag[j] * (gkj * std::sin(d) - bkj * std::cos(d));
      diag += mag[k] * mag[j] * (-gkj * std::sin(d) + bkj * std::cos(d));
    }
    if (!slack_is_machine) {
      const double gf = y_fix[k].real();
      const double bf = y_fix[k].imag();
      const double d = ang[k] - std::arg(v_fixed);
      diag += mag[k] * std::abs(v_fixed) *
              (-gf * std::sin(d) + bf * std::cos(d));
    }
    l(k, k) = diag;
  }

  StateMatrix sm;
  sm.machines = g;
  sm.a = Eigen::MatrixXd::Zero(2 * g, 2 * g);
  sm.a.topRightCorner(g, g) =
      opt.omega_s * Eigen::MatrixXd::Identity(g, g);
  for (int k = 0; k < g; ++k) {
    const double m = 2.0 * c.generators[k].inertia_h / opt.omega_s;
    sm.a.row(g + k).head(g) = -l.row(k) / m;
    sm.a(g + k, g + k) = -c.generators[k].damping_d / m;
  }
  if (!sm.a.allFinite())
    throw NumericalError("state matrix has non-finite entries");
  return sm;
}

std::vector<Complex> eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw ValidationError("eigenvalues need a non-empty square matrix");
  if (!a.allFinite())
    throw ValidationError("eigenvalues need finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigenvalue QR iteration did not converge");
  const auto& vals = solver.eigenvalues();
  return {vals.data(), vals.data() + vals.size()};
}

double damping_ratio(double sigma, double omega) {
  if (sigma == 0.0 && omega == 0.0)
    throw ValidationError("damping ratio undefined at the origin");
  return -sigma / std::hypot(sigma, omega);
}

std::vector<Mode> oscillatory_modes(const std::vector<Complex>& eigs,
                                    double omega_floor) {
  std::vector<Mode> modes;
  for (const Complex& ev : eigs) {
    if (std::abs(ev.imag()) <= omega_floor) continue;
    modes.push_back(
        {ev.real(), ev.imag(), damping_ratio(ev.real(), ev.imag())});
  }
  return modes;
}

double min_damping(const std::vector<Complex>& eigs, double omega_floor) {
  double z = std::numeric_limits<double>::infinity();
  for (const Mode& m : oscillatory_modes(eigs, omega_floor))
    z = std::min(z, m.zeta);
  return z;
}

SecurityLabel label_operating_point(const GridCase& c,
                                    const OperatingPoint& op,
                                    const std::vector<int>& contingencies,
                                    double threshold,
                                    const SmallSignalOptions& opt) {
  std::vector<int> order = contingencies;
  std::sort(order.begin(), order.end());

  SecurityLabel label;
  bool islanded = false;
  double worst = std::numeric_limits<double>::infinity();
  for (int branch : order) {
    try {
      const StateMatrix sm = build_state_matrix(c, op, branch, opt);
      const double z = min_damping(eigenvalues(sm.a), opt.omega_floor);
      label.per_contingency.emplace_back(branch, z);
      worst = std::min(worst, z);
    } catch (const IslandingError&) {
      label.per_contingency.emplace_back(
          branch, std::numeric_limits<double>::quiet_NaN());
      if (!islanded)
        label.discarded = "islanding: branch " + std::to_string(branch);
      islanded = true;
    } catch (const NumericalError& e) {
      throw NumericalError("contingency branch " + std::to_string(branch) +
                           ": " + e.what());
    }
  }
  label.min_zeta = worst;
  label.secure = !islanded && worst >= threshold;
  return label;
}

}  // namespace gridssa
