#include "gridssa/power_flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "gridssa/errors.hpp"
#include "gridssa/grid_graph.hpp"
#include "gridssa/rng.hpp"

namespace gridssa {

using Complex = std::complex<double>;

std::pair<GridCase, ScaledProfile> scale_profile(const GridCase& c,
                                                 double lo, double hi,
                                                 std::uint64_t seed) {
  if (!(lo > 0.0) || !(lo <= hi))
    throw ValidationError("scale range must satisfy 0 < lo <= hi");
  GridCase scaled = c;
  ScaledProfile profile;
  profile.seed = seed;
  Rng rng(seed);

  for (Generator& g : scaled.generators) {
    const double f = rng.uniform(lo, hi);
    profile.gen_factors.push_back(f);
    g.p_gen = std::clamp(g.p_gen * f, g.p_min, g.p_max);
  }
  for (Bus& b : scaled.buses) {
    const double fp = rng.uniform(lo, hi);
    const double fq = rng.uniform(lo, hi);
    profile.load_factors.emplace_back(fp, fq);
    b.p_load *= fp;
    b.q_load *= fq;
  }
  return {std::move(scaled), std::move(profile)};
}

Eigen::MatrixXcd bus_admittance(const GridCase& c, int skip_branch) {
  const int n = static_cast<int>(c.buses.size());
  const auto index = bus_index_map(c);
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (int b = 0; b < static_cast<int>(c.branches.size()); ++b) {
    if (b == skip_branch) continue;
    const Branch& br = c.branches[b];
    const int f = index.at(br.from_bus);
    const int t = index.at(br.to_bus);
    const Complex ys = 1.0 / Complex(br.r, br.x);
    const Complex ysh(0.0, br.b_shunt / 2.0);
    y(f, f) += ys + ysh;
    y(t, t) += ys + ysh;
    y(f, t) -= ys;
    y(t, f) -= ys;
  }
  return y;
}

namespace {

// Per-bus scheduled injections: sum of generator dispatch minus load.
void scheduled_injections(const GridCase& c, Eigen::VectorXd& p_spec,
                          Eigen::VectorXd& q_spec) {
  const int n = static_cast<int>(c.buses.size());
  const auto index = bus_index_map(c);
  p_spec = Eigen::VectorXd::Zero(n);
  q_spec = Eigen::VectorXd::Zero(n);
  for (const Generator& g : c.generators)
    p_spec[index.at(g.bus)] += g.p_gen;
  for (int i = 0; i < n; ++i) {
    p_spec[i] -= c.buses[i].p_load;
    q_spec[i] -= c.buses[i].q_load;
  }
}

// Computed complex injections S_i = V_i * conj((Y V)_i).
void computed_injections(const Eigen::MatrixXcd& y,
                         const Eigen::VectorXd& v_mag,
                         const Eigen::VectorXd& v_ang,
                         Eigen::VectorXd& p, Eigen::VectorXd& q) {
  const int n = static_cast<int>(v_mag.size());
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = std::polar(v_mag[i], v_ang[i]);
  Eigen::VectorXcd s = v.array() * (y * v).conjugate().array();
  p = s.real();
  q = s.imag();
}

}  // namespace

OperatingPoint solve_power_flow(const GridCase& c,
                                const PowerFlowOptions& opt) {
  const int n = static_cast<int>(c.buses.size());
  if (!is_connected(build_graph(c)))
    throw DisconnectedNetworkError("bus graph is not connected");

  const Eigen::MatrixXcd y = bus_admittance(c);
  const Eigen::MatrixXd g = y.real();
  const Eigen::MatrixXd b = y.imag();

  Eigen::VectorXd p_spec, q_spec;
  scheduled_injections(c, p_spec, q_spec);

  // Flat start: setpoint magnitudes where given, 1.0 elsewhere, zero angles.
  Eigen::VectorXd v_mag(n), v_ang = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    v_mag[i] = c.buses[i].v_setpoint.value_or(1.0);

  std::vector<int> ang_vars, v_vars;  // theta unknowns; |V| unknowns
  for (int i = 0; i < n; ++i) {
    if (c.buses[i].kind != BusKind::Slack) ang_vars.push_back(i);
    if (c.buses[i].kind == BusKind::PQ) v_vars.push_back(i);
  }
  const int na = static_cast<int>(ang_vars.size());
  const int nv = static_cast<int>(v_vars.size());

  Eigen::VectorXd p_calc(n), q_calc(n);
  auto mismatch = [&](Eigen::VectorXd& f) {
    computed_injections(y, v_mag, v_ang, p_calc, q_calc);
    f.resize(na + nv);
    for (int a = 0; a < na; ++a)
      f[a] = p_spec[ang_vars[a]] - p_calc[ang_vars[a]];
    for (int vq = 0; vq < nv; ++vq)
      f[na + vq] = q_spec[v_vars[vq]] - q_calc[v_vars[vq]];
  };

  OperatingPoint op;
  Eigen::VectorXd f;
  int iter = 0;
  bool converged = false;
  for (;; ++iter) {
    mismatch(f);
    if (!f.allFinite()) break;
    if (f.size() == 0 || f.cwiseAbs().maxCoeff() < opt.tol) {
      converged = true;
      break;
    }
    if (iter >= opt.max_iter) break;

    // Standard polar-form Jacobian blocks.
    Eigen::MatrixXd jac(na + nv, na + nv);
    for (int rw = 0; rw < na; ++rw) {
      const int i = ang_vars[rw];
      for (int cl = 0; cl < na; ++cl) {
        const int j = ang_vars[cl];
        if (i == j) {
          jac(rw, cl) = -q_calc[i] - b(i, i) * v_mag[i] * v_mag[i];
        } else {
          const double th = v_ang[i] - v_ang[j];
          jac(rw, cl) = v_mag[i] * v_mag[j] *
                        (g(i, j) * std::sin(th) - b(i, j) * std::cos(th));
        }
      }
      for (int cl = 0; cl < nv; ++cl) {
        const int j = v_vars[cl];
        if (i == j) {
          jac(rw, na + cl) = p_calc[i] / v_mag[i] + g(i, i) * v_mag[i];
        } else {
          const double th = v_ang[i] - v_ang[j];
          jac(rw, na + cl) = v_mag[i] * (g(i, j) * std::cos(th) +
                                         b(i, j) * std::sin(th));
        }
      }
    }
    for (int rw = 0; rw < nv; ++rw) {
      const int i = v_vars[rw];
      for (int cl = 0; cl < na; ++cl) {
        const int j = ang_vars[cl];
        if (i == j) {
          jac(na + rw, cl) = p_calc[i] - g(i, i) * v_mag[i] * v_mag[i];
        } else {
          const double th = v_ang[i] - v_ang[j];
          jac(na + rw, cl) = -v_mag[i] * v_mag[j] *
                             (g(i, j) * std::cos(th) + b(i, j) * std::sin(th));
        }
      }
      for (int cl = 0; cl < nv; ++cl) {
        const int j = v_vars[cl];
        if (i == j) {
          jac(na + rw, na + cl) = q_calc[i] / v_mag[i] - b(i, i) * v_mag[i];
        } else {
          const double th = v_ang[i] - v_ang[j];
          jac(na + rw, na + cl) = v_mag[i] * (g(i, j) * std::sin(th) -
                                              b(i, j) * std::cos(th));
        }
      }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) throw SingularJacobianError(iter);
    const Eigen::VectorXd dx = lu.solve(f);
    if (!dx.allFinite()) throw SingularJacobianError(iter);
    for (int a = 0; a < na; ++a) v_ang[ang_vars[a]] += dx[a];
    for (int vq = 0; vq < nv; ++vq) v_mag[v_vars[vq]] += dx[na + vq];
  }

  op.v_mag = v_mag;
  op.v_ang = v_ang;
  op.converged = converged;
  op.iterations = iter;
  computed_injections(y, v_mag, v_ang, op.p_net, op.q_net);
  std::tie(op.line_p, op.line_q) = compute_line_flows(c, v_mag, v_ang);
  return op;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_line_flows(
    const GridCase& c, const Eigen::VectorXd& v_mag,
    const Eigen::VectorXd& v_ang) {
  const int nb = static_cast<int>(c.branches.size());
  const auto index = bus_index_map(c);
  Eigen::VectorXd lp(nb), lq(nb);
  for (int k = 0; k < nb; ++k) {
    const Branch& br = c.branches[k];
    const int f = index.at(br.from_bus);
    const int t = index.at(br.to_bus);
    const Complex vf = std::polar(v_mag[f], v_ang[f]);
    const Complex vt = std::polar(v_mag[t], v_ang[t]);
    const Complex ys = 1.0 / Complex(br.r, br.x);
    const Complex ysh(0.0, br.b_shunt / 2.0);
    const Complex s = vf * std::conj(ys * (vf - vt) + ysh * vf);
    lp[k] = s.real();
    lq[k] = s.imag();
  }
  return {std::move(lp), std::move(lq)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> receiving_end_flows(
    const GridCase& c, const Eigen::VectorXd& v_mag,
    const Eigen::VectorXd& v_ang) {
  const int nb = static_cast<int>(c.branches.size());
  const auto index = bus_index_map(c);
  Eigen::VectorXd lp(nb), lq(nb);
  for (int k = 0; k < nb; ++k) {
    const Branch& br = c.branches[k];
    const int f = index.at(br.from_bus);
    const int t = index.at(br.to_bus);
    const Complex vf = std::polar(v_mag[f], v_ang[f]);
    const Complex vt = std::polar(v_mag[t], v_ang[t]);
    const Complex ys = 1.0 / Complex(br.r, br.x);
    const Complex ysh(0.0, br.b_shunt / 2.0);
    const Complex s = vt * std::conj(ys * (vt - vf) + ysh * vt);
    lp[k] = s.real();
    lq[k] = s.imag();
  }
  return {std::move(lp), std::move(lq)};
}

std::vector<LimitViolation> check_limits(const GridCase& c,
                                         const OperatingPoint& op) {
  std::vector<LimitViolation> out;
  for (int i = 0; i < static_cast<int>(c.buses.size()); ++i) {
    if (op.v_mag[i] < c.buses[i].v_min)
      out.push_back({LimitViolation::Kind::VoltageLow, i, op.v_mag[i],
                     c.buses[i].v_min});
    else if (op.v_mag[i] > c.buses[i].v_max)
      out.push_back({LimitViolation::Kind::VoltageHigh, i, op.v_mag[i],
                     c.buses[i].v_max});
  }
  for (int k = 0; k < static_cast<int>(c.branches.size()); ++k) {
    const double rating = c.branches[k].rating;
    if (rating <= 0.0) continue;
    const double s = std::hypot(op.line_p[k], op.line_q[k]);
    if (s > rating)
      out.push_back({LimitViolation::Kind::Overload, k, s, rating});
  }
  return out;
}

}  // namespace gridssa
