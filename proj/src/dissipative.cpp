#include "ddyn/dissipative.hpp"

#include <algorithm>
#include <cmath>

namespace ddyn {

FlowAssignment resolve_flow_direction(const TransmissionSet& t,
                                      const Eigen::VectorXd& tau_phi,
                                      const Eigen::VectorXd& phi_rate,
                                      Flow tie_mode, double eps_power) {
    const int m = t.size();
    if (tau_phi.size() != m || phi_rate.size() != m)
        throw ModelError("torque/rate length differs from joint count");
    std::vector<Flow> dirs(m, tie_mode);
    for (int i = 0; i < m; ++i) {
        const double power = tau_phi(i) * phi_rate(i);
        if (power > eps_power) dirs[i] = Flow::Fwd;
        else if (power < -eps_power) dirs[i] = Flow::Bwd;
    }
    return make_flow(t, dirs);
}

DissipativeDynamics assemble_from(const Eigen::MatrixXd& H_s,
                                  const Eigen::VectorXd& c_s,
                                  const ConstraintMatrices& cm,
                                  const EfficiencyMatrices& em,
                                  const FlowAssignment& flow, int base_dof) {
    const int m = static_cast<int>(cm.B_m.rows());
    const int reduced = static_cast<int>(cm.K.cols());
    if (H_s.rows() != cm.K.rows() || H_s.cols() != cm.K.rows() ||
        c_s.size() != cm.K.rows() || em.e_s.size() != cm.K.rows())
        throw ModelError("redundant matrix sizes are inconsistent");
    DissipativeDynamics dd;
    const Eigen::MatrixXd weighted_kt =
        cm.K.transpose() * em.e_s.asDiagonal();
    dd.inertia = weighted_kt * H_s * cm.K;
    dd.bias = weighted_kt * c_s;
    dd.actuation_map = Eigen::MatrixXd::Zero(reduced, m);
    dd.actuation_map.bottomRows(m) = cm.B_m * em.e_m.asDiagonal();
    dd.flow = flow;
    dd.base_dof = base_dof;
    return dd;
}

DissipativeDynamics assemble(const RobotModel& model, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& qd,
                             const FlowAssignment& flow) {
    const ConstraintMatrices cm =
        constraint_matrices(model.base_dof, model.transmission);
    const EfficiencyMatrices em =
        efficiency_matrices(model.transmission, flow, model.base_dof);
    return assemble_from(mass_matrix_redundant(model, q),
                         bias_forces_redundant(model, q, qd), cm, em, flow,
                         model.base_dof);
}

Eigen::VectorXd forward_dynamics(const DissipativeDynamics& dd,
                                 const Eigen::VectorXd& tau_phi,
                                 const Eigen::Vector2d& f_ext,
                                 const Eigen::MatrixXd& J) {
    if (J.cols() != dd.inertia.rows())
        throw ModelError("Jacobian column count differs from coordinate count");
    if (tau_phi.size() != dd.actuation_map.cols())
        throw ModelError("rotor torque length differs from joint count");
    const Eigen::VectorXd rhs =
        J.transpose() * f_ext + dd.actuation_map * tau_phi - dd.bias;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dd.inertia);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 0.0) || sv(0) / sv(sv.size() - 1) > 1e12)
        throw SingularError("reduced inertia matrix is ill-conditioned");
    const Eigen::VectorXd qdd = dd.inertia.partialPivLu().solve(rhs);
    if (!qdd.allFinite())
        throw NumericError("forward dynamics produced non-finite accelerations");
    return qdd;
}

Eigen::VectorXd meshing_forces(const Eigen::MatrixXd& H_s,
                               const Eigen::VectorXd& c_s,
                               const Eigen::VectorXd& sdd,
                               const Eigen::VectorXd& tau_s) {
    if (H_s.rows() != sdd.size() || c_s.size() != sdd.size() ||
        tau_s.size() != sdd.size())
        throw ModelError("redundant vector sizes are inconsistent");
    return H_s * sdd + c_s - tau_s;
}

Eigen::VectorXd meshing_forces(const RobotModel& model,
                               const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qd,
                               const Eigen::VectorXd& sdd,
                               const Eigen::VectorXd& tau_s) {
    return meshing_forces(mass_matrix_redundant(model, q),
                          bias_forces_redundant(model, q, qd), sdd, tau_s);
}

Eigen::VectorXd efficiency_null_residual(const Eigen::MatrixXd& K,
                                         const Eigen::VectorXd& e_s,
                                         const Eigen::VectorXd& r) {
    if (K.rows() != e_s.size() || K.rows() != r.size())
        throw ModelError("efficiency-null operand sizes are inconsistent");
    return K.transpose() * (e_s.asDiagonal() * r);
}

Eigen::VectorXd virtual_task_force_torques(const RobotModel& model,
                                           const Eigen::VectorXd& q,
                                           const Eigen::Vector2d& f_task) {
    if (model.base_dof != 0)
        throw ModelError("virtual task forces need a fixed-base (fully "
                         "actuated) model");
    const Eigen::MatrixXd jac = contact_jacobian(model, q);
    return model.transmission.drive().transpose() * (jac.transpose() * f_task);
}

}  // namespace ddyn
