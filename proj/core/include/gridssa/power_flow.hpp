#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "gridssa/grid_case.hpp"

namespace gridssa {

/// Solved steady state. Flows are sending-end (from-bus side) per branch.
struct OperatingPoint {
  Eigen::VectorXd v_mag;   // per-unit
  Eigen::VectorXd v_ang;   // radians, slack pinned to 0
  Eigen::VectorXd p_net;   // per-bus net active injection
  Eigen::VectorXd q_net;   // per-bus net reactive injection
  Eigen::VectorXd line_p;  // per-branch sending-end active flow
  Eigen::VectorXd line_q;  // per-branch sending-end reactive flow
  bool converged = false;
  int iterations = 0;
};

/// Multipliers applied to the base case by scale_profile.
struct ScaledProfile {
  std::vector<double> gen_factors;                      // per generator
  std::vector<std::pair<double, double>> load_factors;  // (p, q) per bus
  std::uint64_t seed = 0;
};

struct PowerFlowOptions {
  double tol = 1e-8;  // max |mismatch|, per-unit
  int max_iter = 20;
};

/// Returns a copy of the case with every generator p_gen and every bus
/// p_load/q_load multiplied by independent uniform draws in [lo, hi]
/// (p_gen clamped to its dispatch limits afterwards), plus the profile of
/// drawn factors. Deterministic per seed: generators first, then per bus a
/// (p, q) factor pair, all in case order.
std::pair<GridCase, ScaledProfile> scale_profile(const GridCase& c,
                                                 double lo, double hi,
                                                 std::uint64_t seed);

/// Complex bus admittance matrix from the pi model; skip_branch removes one
/// branch (for contingencies), -1 keeps all.
Eigen::MatrixXcd bus_admittance(const GridCase& c, int skip_branch = -1);

/// Full Newton-Raphson AC power flow in polar form from a flat start.
/// Throws DisconnectedNetworkError before iterating when the bus graph is
/// not connected, SingularJacobianError when the LU factorization fails.
/// Non-convergence within max_iter is not an error: converged=false and the
/// caller decides (dataset generation discards such points).
OperatingPoint solve_power_flow(const GridCase& c,
                                const PowerFlowOptions& opt = {});

/// Sending-end pi-model flows for each branch at the given voltages.
std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_line_flows(
    const GridCase& c, const Eigen::VectorXd& v_mag,
    const Eigen::VectorXd& v_ang);

/// Receiving-end (to-bus side) flows; the complement of compute_line_flows,
/// used for conservation checks.
std::pair<Eigen::VectorXd, Eigen::VectorXd> receiving_end_flows(
    const GridCase& c, const Eigen::VectorXd& v_mag,
    const Eigen::VectorXd& v_ang);

struct LimitViolation {
  enum class Kind { VoltageLow, VoltageHigh, Overload };
  Kind kind;
  int index;     // bus index for voltage, branch index for overload
  double value;  // offending quantity
  double bound;  // violated limit
};

/// Buses outside their voltage band and branches above their apparent-power
/// rating (rating 0 = unlimited). Requires a converged point.
std::vector<LimitViolation> check_limits(const GridCase& c,
                                         const OperatingPoint& op);

}  // namespace gridssa
