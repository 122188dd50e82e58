#pragma once

#include <Eigen/Dense>

#include "ddyn/rigid_body.hpp"
#include "ddyn/transmission.hpp"

namespace ddyn {

/// Reduced equation of motion with direction-dependent efficiency
/// weighting:
///   inertia * qdd + bias = J^T f_ext + actuation_map * tau_phi
/// where inertia = K^T E_s H_s K, bias = K^T E_s c_s, and
/// actuation_map = [0; B_m E_m]. With independent rotors the weighted
/// inertia stays symmetric; direction-dependent asymmetry instead shows
/// up in task-space maps (B_m E_m B_m^-1), whose symmetric parts are
/// taken only for rendering.
struct DissipativeDynamics {
    Eigen::MatrixXd inertia;        ///< (b+m) x (b+m)
    Eigen::VectorXd bias;           ///< length b+m
    Eigen::MatrixXd actuation_map;  ///< (b+m) x m
    FlowAssignment flow;
    int base_dof = 0;
};

/// Resolves the per-coupling energy-flow direction from rotor-side power:
/// coupling i is Fwd when tau_phi_i * phi_rate_i > +eps_power, Bwd when
/// below -eps_power, and falls back to `tie_mode` inside the dead band
/// (static analyses pick the scenario explicitly).
FlowAssignment resolve_flow_direction(const TransmissionSet& t,
                                      const Eigen::VectorXd& tau_phi,
                                      const Eigen::VectorXd& phi_rate,
                                      Flow tie_mode,
                                      double eps_power = 1e-9);

/// Builds the reduced dynamics for a model at (q, qd) under a given flow
/// assignment.
DissipativeDynamics assemble(const RobotModel& model, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& qd,
                             const FlowAssignment& flow);

/// Matrix-level assembly from an explicit redundant mass matrix and bias;
/// lets non-chain mechanisms (e.g. the wedge recast as a one-coupling
/// system) reuse the same reduction.
DissipativeDynamics assemble_from(const Eigen::MatrixXd& H_s,
                                  const Eigen::VectorXd& c_s,
                                  const ConstraintMatrices& cm,
                                  const EfficiencyMatrices& em,
                                  const FlowAssignment& flow, int base_dof);

/// qdd = inertia^-1 (J^T f_ext + actuation_map tau_phi - bias).
/// Throws SingularError when the reduced inertia is ill-conditioned.
Eigen::VectorXd forward_dynamics(const DissipativeDynamics& dd,
                                 const Eigen::VectorXd& tau_phi,
                                 const Eigen::Vector2d& f_ext,
                                 const Eigen::MatrixXd& J);

/// Mesh reaction over the redundant coordinates,
/// r = H_s sdd + c_s - tau_s (constraint force plus transmission drag).
Eigen::VectorXd meshing_forces(const Eigen::MatrixXd& H_s,
                               const Eigen::VectorXd& c_s,
                               const Eigen::VectorXd& sdd,
                               const Eigen::VectorXd& tau_s);

/// Model-level convenience overload.
Eigen::VectorXd meshing_forces(const RobotModel& model,
                               const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qd,
                               const Eigen::VectorXd& sdd,
                               const Eigen::VectorXd& tau_s);

/// K^T diag(e_s) r: zero (to rounding) on every dynamically consistent
/// state; test harnesses assert on its infinity norm.
Eigen::VectorXd efficiency_null_residual(const Eigen::MatrixXd& K,
                                         const Eigen::VectorXd& e_s,
                                         const Eigen::VectorXd& r);

/// Rotor torques that exert a given quasi-static task-space force at the
/// foot: tau_phi = B_m^-1 J^T f_task = (D R)^T J^T f_task. Requires a
/// fixed-base (fully actuated) model; throws ModelError otherwise.
Eigen::VectorXd virtual_task_force_torques(const RobotModel& model,
                                           const Eigen::VectorXd& q,
                                           const Eigen::Vector2d& f_task);

}  // namespace ddyn
