#include "ddyn/rigid_body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddyn {

namespace {

Eigen::Vector2d link_dir(double theta) {
    return {std::cos(theta), std::sin(theta)};
}

/// Derivative of link_dir with respect to the angle.
Eigen::Vector2d link_normal(double theta) {
    return {-std::sin(theta), std::cos(theta)};
}

struct ChainPose {
    Eigen::Vector2d base_com;            // (x_b, z_b) or origin
    double base_angle;                   // theta_b or 0
    std::vector<double> angles;          // world angle of each link
    std::vector<Eigen::Vector2d> joints; // proximal joint of each link
    std::vector<Eigen::Vector2d> coms;   // COM of each link
    Eigen::Vector2d foot;
};

ChainPose chain_pose(const RobotModel& model, const Eigen::VectorXd& q) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    if (q.size() != b + m)
        throw ModelError("pose length differs from coordinate count");
    ChainPose pose;
    pose.base_com = b == 3 ? Eigen::Vector2d(q(0), q(1)) : Eigen::Vector2d::Zero();
    pose.base_angle = b == 3 ? q(2) : 0.0;
    pose.angles.resize(m);
    pose.joints.resize(m);
    pose.coms.resize(m);
    double theta = pose.base_angle;
    Eigen::Vector2d joint = pose.base_com;
    for (int k = 0; k < m; ++k) {
        theta += q(b + k);
        pose.angles[k] = theta;
        pose.joints[k] = joint;
        pose.coms[k] = joint + model.links[k].com_offset * link_dir(theta);
        joint += model.links[k].length * link_dir(theta);
    }
    pose.foot = joint;
    return pose;
}

/// Lever arms a_jk of the point reached by accumulating full lengths of
/// links j < k plus `tip_offset` along link k; used for both COM points
/// (tip_offset = com_offset) and the foot (k = m-1, tip_offset = length).
/// Column i of the Jacobian is sum_{j >= i} a_jk * normal(theta_j).
Eigen::MatrixXd point_jacobian(const RobotModel& model, const ChainPose& pose,
                               int k, double tip_offset) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, b + m);
    if (b == 3) jac.topLeftCorner(2, 2) = Eigen::Matrix2d::Identity();
    // Accumulate from the distal link inward so column i reuses the sum
    // over j >= i.
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int i = k; i >= 0; --i) {
        const double lever = i == k ? tip_offset : model.links[i].length;
        acc += lever * link_normal(pose.angles[i]);
        jac.col(b + i) = acc;
    }
    if (b == 3) jac.col(2) = acc;  // base pitch swings the whole chain
    return jac;
}

/// Centripetal point acceleration with all joint accelerations zero:
/// -sum_j a_jk * dir(theta_j) * omega_j^2.
Eigen::Vector2d point_centripetal(const RobotModel& model, const ChainPose& pose,
                                  const Eigen::VectorXd& qd, int k,
                                  double tip_offset) {
    const int b = model.base_dof;
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    double omega = b == 3 ? qd(2) : 0.0;
    for (int j = 0; j <= k; ++j) {
        omega += qd(b + j);
        const double lever = j == k ? tip_offset : model.links[j].length;
        acc -= lever * link_dir(pose.angles[j]) * omega * omega;
    }
    return acc;
}

}  // namespace

bool PlanarBody::operator==(const PlanarBody& other) const {
    return mass == other.mass && length == other.length &&
           com_offset == other.com_offset && inertia_com == other.inertia_com;
}

bool BaseBody::operator==(const BaseBody& other) const {
    return mass == other.mass && inertia == other.inertia;
}

void RobotModel::validate() const {
    if (base_dof != 0 && base_dof != 3)
        throw ModelError("base DoF count must be 0 (fixed) or 3 (planar floating)");
    const int m = joint_count();
    if (m < 1) throw ModelError("model needs at least one link");
    for (const PlanarBody& link : links) {
        if (!(link.mass >= 0.0)) throw ModelError("link mass must be >= 0");
        if (!(link.length > 0.0)) throw ModelError("link length must be positive");
        if (!(link.inertia_com >= 0.0))
            throw ModelError("link COM inertia must be >= 0");
        if (link.com_offset < 0.0 || link.com_offset > link.length)
            throw ModelError("link COM offset must lie within the link");
    }
    if (base_dof == 3) {
        if (!(base.mass > 0.0)) throw ModelError("floating base mass must be positive");
        if (!(base.inertia > 0.0))
            throw ModelError("floating base inertia must be positive");
    }
    if (rotor_inertias.size() != m)
        throw ModelError("rotor count differs from link count");
    if (rotor_inertias.minCoeff() < 0.0)
        throw ModelError("rotor inertias must be >= 0");
    if (torque_limits.size() != m)
        throw ModelError("torque limit count differs from link count");
    if (torque_limits.minCoeff() < 0.0)
        throw ModelError("torque limits must be >= 0 (0 = unset)");
    if (transmission.size() != m)
        throw ModelError("transmission size differs from joint count");
    transmission.validate();
    if (!(gravity >= 0.0)) throw ModelError("gravity magnitude must be >= 0");
    if (default_pose.size() != coord_count())
        throw ModelError("default pose length differs from coordinate count");
}

bool RobotModel::operator==(const RobotModel& other) const {
    return base_dof == other.base_dof && base == other.base &&
           links == other.links &&
           rotor_inertias.size() == other.rotor_inertias.size() &&
           rotor_inertias == other.rotor_inertias &&
           torque_limits.size() == other.torque_limits.size() &&
           torque_limits == other.torque_limits &&
           transmission == other.transmission &&
           eta_map.table() == other.eta_map.table() &&
           gravity == other.gravity && default_pose == other.default_pose;
}

RobotModel fixed_base_submodel(const RobotModel& model) {
    RobotModel sub = model;
    sub.base_dof = 0;
    sub.base = BaseBody{};
    sub.default_pose = model.default_pose.tail(model.joint_count());
    return sub;
}

std::vector<Eigen::Vector2d> link_com_positions(const RobotModel& model,
                                                const Eigen::VectorXd& q) {
    return chain_pose(model, q).coms;
}

Eigen::Vector2d foot_position(const RobotModel& model, const Eigen::VectorXd& q) {
    return chain_pose(model, q).foot;
}

Eigen::MatrixXd mass_matrix(const RobotModel& model, const Eigen::VectorXd& q) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    const ChainPose pose = chain_pose(model, q);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(b + m, b + m);
    if (b == 3) {
        h(0, 0) += model.base.mass;
        h(1, 1) += model.base.mass;
        h(2, 2) += model.base.inertia;
    }
    for (int k = 0; k < m; ++k) {
        const PlanarBody& link = model.links[k];
        const Eigen::MatrixXd jc =
            point_jacobian(model, pose, k, link.com_offset);
        h += link.mass * jc.transpose() * jc;
        // Angular rows: omega_k = theta_b_dot + sum of joint rates up to k.
        Eigen::VectorXd jw = Eigen::VectorXd::Zero(b + m);
        if (b == 3) jw(2) = 1.0;
        for (int i = 0; i <= k; ++i) jw(b + i) = 1.0;
        h += link.inertia_com * jw * jw.transpose();
    }
    return h;
}

Eigen::VectorXd bias_forces(const RobotModel& model, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qd) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    if (qd.size() != b + m)
        throw ModelError("velocity length differs from coordinate count");
    const ChainPose pose = chain_pose(model, q);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(b + m);
    for (int k = 0; k < m; ++k) {
        const PlanarBody& link = model.links[k];
        const Eigen::MatrixXd jc =
            point_jacobian(model, pose, k, link.com_offset);
        // Coriolis/centrifugal: m J^T (Jdot qd); the angular rows are
        // velocity-independent, so only the linear part contributes.
        c += link.mass * jc.transpose() *
             point_centripetal(model, pose, qd, k, link.com_offset);
        // Gravity: gradient of m g z_com.
        c += link.mass * model.gravity * jc.row(1).transpose();
    }
    if (b == 3) c(1) += model.base.mass * model.gravity;
    return c;
}

Eigen::MatrixXd mass_matrix_redundant(const RobotModel& model,
                                      const Eigen::VectorXd& q) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(b + 2 * m, b + 2 * m);
    h.topLeftCorner(b + m, b + m) = mass_matrix(model, q);
    h.bottomRightCorner(m, m) = model.rotor_inertias.asDiagonal();
    return h;
}

Eigen::VectorXd bias_forces_redundant(const RobotModel& model,
                                      const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& qd) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(b + 2 * m);
    c.head(b + m) = bias_forces(model, q, qd);
    return c;
}

Eigen::MatrixXd contact_jacobian(const RobotModel& model,
                                 const Eigen::VectorXd& q) {
    const ChainPose pose = chain_pose(model, q);
    const int last = model.joint_count() - 1;
    return point_jacobian(model, pose, last, model.links[last].length);
}

bool singular_pose(const RobotModel& model, const Eigen::VectorXd& q,
                   double cond_limit) {
    const Eigen::MatrixXd j = contact_jacobian(model, q);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int rows_wanted = static_cast<int>(std::min(j.rows(), j.cols()));
    const double smin = sv(rows_wanted - 1);
    return !(smin > 0.0) || sv(0) / smin > cond_limit;
}

double kinetic_energy(const RobotModel& model, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& qd) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    if (qd.size() != b + m)
        throw ModelError("velocity length differs from coordinate count");
    const ChainPose pose = chain_pose(model, q);
    // Recursive velocity propagation: deliberately independent of the
    // Jacobian-based mass matrix so the two can cross-check each other.
    Eigen::Vector2d v_joint =
        b == 3 ? Eigen::Vector2d(qd(0), qd(1)) : Eigen::Vector2d::Zero();
    double omega = b == 3 ? qd(2) : 0.0;
    double energy =
        b == 3 ? 0.5 * (model.base.mass * v_joint.squaredNorm() +
                        model.base.inertia * omega * omega)
               : 0.0;
    for (int k = 0; k < m; ++k) {
        const PlanarBody& link = model.links[k];
        omega += qd(b + k);
        const Eigen::Vector2d swing = omega * link_normal(pose.angles[k]);
        const Eigen::Vector2d v_com = v_joint + link.com_offset * swing;
        energy += 0.5 * (link.mass * v_com.squaredNorm() +
                         link.inertia_com * omega * omega);
        v_joint += link.length * swing;
    }
    return energy;
}

double kinetic_energy_redundant(const RobotModel& model,
                                const Eigen::VectorXd& s,
                                const Eigen::VectorXd& sd) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    if (s.size() != b + 2 * m || sd.size() != b + 2 * m)
        throw ModelError("state length differs from redundant coordinate count");
    double energy = kinetic_energy(model, s.head(b + m), sd.head(b + m));
    for (int i = 0; i < m; ++i)
        energy += 0.5 * model.rotor_inertias(i) * sd(b + m + i) * sd(b + m + i);
    return energy;
}

double potential_energy(const RobotModel& model, const Eigen::VectorXd& q) {
    const ChainPose pose = chain_pose(model, q);
    double v = 0.0;
    for (int k = 0; k < model.joint_count(); ++k)
        v += model.links[k].mass * model.gravity * pose.coms[k](1);
    if (model.base_dof == 3)
        v += model.base.mass * model.gravity * pose.base_com(1);
    return v;
}

SystemState make_consistent_state(const RobotModel& model,
                                  const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& qd) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    if (q.size() != b + m || qd.size() != b + m)
        throw ModelError("state length differs from coordinate count");
    const Eigen::MatrixXd dr = model.transmission.drive();
    SystemState st;
    st.q = q;
    st.qd = qd;
    st.phi = dr.partialPivLu().solve(q.tail(m));
    st.phid = dr.partialPivLu().solve(qd.tail(m));
    return st;
}

double constraint_residual(const RobotModel& model, const SystemState& state) {
    const int m = model.joint_count();
    return (state.q.tail(m) - model.transmission.drive() * state.phi)
        .lpNorm<Eigen::Infinity>();
}

OracleRun simulate_redundant_system(const RobotModel& model,
                                    const SystemState& initial,
                                    const TorqueSignal& tau_phi,
                                    const ForceSignal& f_ext, double dt,
                                    int steps, const OracleOptions& opts) {
    model.validate();
    if (!(dt > 0.0)) throw ModelError("time step must be positive");
    if (steps < 1) throw ModelError("step count must be >= 1");
    const int b = model.base_dof;
    const int m = model.joint_count();
    const int n = b + 2 * m;

    const ConstraintMatrices cm = constraint_matrices(b, model.transmission);
    const Eigen::MatrixXd dr = model.transmission.drive();
    const Eigen::MatrixXd dr_t = dr.transpose();

    Eigen::VectorXd k_fwd(m), k_bwd(m);
    for (int i = 0; i < m; ++i) {
        k_fwd(i) = (1.0 - model.transmission.eta_f(i)) / model.transmission.eta_f(i);
        k_bwd(i) = 1.0 - model.transmission.eta_b(i);
    }

    Eigen::VectorXd s(n), sd(n);
    s << initial.q, initial.phi;
    sd << initial.qd, initial.phid;

    std::vector<Flow> dirs(m, opts.tie_mode);
    Eigen::VectorXd sgn = Eigen::VectorXd::Ones(m);

    OracleRun run;
    run.steps.reserve(steps / std::max(1, opts.record_stride) + 1);
    run.initial_energy = kinetic_energy_redundant(model, s, sd) +
                         potential_energy(model, s.head(b + m));

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
    double dissipated = 0.0;

    for (int it = 0; it < steps; ++it) {
        const double t = it * dt;
        const Eigen::VectorXd q = s.head(b + m);
        const Eigen::VectorXd qd = sd.head(b + m);
        const Eigen::VectorXd phid = sd.tail(m);

        const Eigen::VectorXd tau =
            tau_phi ? tau_phi(t) : Eigen::VectorXd::Zero(m);
        const Eigen::Vector2d fe = f_ext ? f_ext(t) : Eigen::Vector2d::Zero();
        if (tau.size() != m) throw ModelError("rotor torque signal has wrong length");

        const Eigen::MatrixXd hs = mass_matrix_redundant(model, q);
        const Eigen::VectorXd cs = bias_forces_redundant(model, q, qd);
        const Eigen::MatrixXd jac = contact_jacobian(model, q);
        Eigen::VectorXd tau_s = Eigen::VectorXd::Zero(n);
        tau_s.head(b + m) = jac.transpose() * fe;
        tau_s.tail(m) += tau;

        const Eigen::VectorXd theta =
            (phid / opts.eps_vel).array().tanh().matrix();

        Eigen::VectorXd sol, lambda, transmitted, k(m);
        for (int round = 0; round < opts.max_direction_iters; ++round) {
            for (int i = 0; i < m; ++i)
                k(i) = dirs[i] == Flow::Fwd ? k_fwd(i) : k_bwd(i);
            // Coulomb drag tau_d = -diag(k theta sgn) (D R)^T lambda moves
            // into the multiplier column of the saddle-point system.
            const Eigen::VectorXd drag =
                (k.array() * theta.array() * sgn.array()).matrix();
            const Eigen::MatrixXd g = -(drag.asDiagonal() * dr_t);
            kkt.setZero();
            kkt.topLeftCorner(n, n) = hs;
            kkt.block(0, n, b + m, m) = -cm.A.transpose().topRows(b + m);
            kkt.block(b + m, n, m, m) = dr_t - g;
            kkt.block(n, 0, m, n) = cm.A;
            rhs.head(n) = tau_s - cs;
            rhs.tail(m).setZero();
            sol = kkt.partialPivLu().solve(rhs);
            lambda = sol.tail(m);
            transmitted = dr_t * lambda;

            bool changed = false;
            for (int i = 0; i < m; ++i) {
                const double sg =
                    transmitted(i) == 0.0 ? sgn(i) : (transmitted(i) > 0.0 ? 1.0 : -1.0);
                const double power = transmitted(i) * phid(i);
                Flow d = dirs[i];
                if (power > opts.eps_power) d = Flow::Fwd;
                else if (power < -opts.eps_power) d = Flow::Bwd;
                if (sg != sgn(i) || d != dirs[i]) changed = true;
                sgn(i) = sg;
                dirs[i] = d;
            }
            if (!changed) break;
        }
        if (!sol.allFinite() ||
            (kkt * sol - rhs).lpNorm<Eigen::Infinity>() >
                1e-8 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()))
            throw NumericError("redundant-system saddle-point solve lost accuracy");

        const Eigen::VectorXd sdd = sol.head(n);
        const Eigen::VectorXd tau_d =
            -(k.array() * transmitted.array().abs() * theta.array()).matrix();
        const double power_loss = -tau_d.dot(phid);

        const double energy = kinetic_energy_redundant(model, s, sd) +
                              potential_energy(model, q);
        run.max_energy_defect =
            std::max(run.max_energy_defect,
                     std::abs(energy + dissipated - run.initial_energy));

        const double de = sd.dot(hs * sdd + cs);
        const double applied = sd.dot(tau_s);
        const double power_residual =
            std::abs(de - (applied - power_loss)) /
            std::max({1.0, std::abs(applied), power_loss});
        const double cres = (cm.A * s).lpNorm<Eigen::Infinity>();
        if (cres > 1e-6)
            throw NumericError(
                "transmission constraint drifted; reduce the time step");

        if (power_loss * dt < 0.0) run.dissipation_monotone = false;
        dissipated += power_loss * dt;
        run.max_constraint_residual = std::max(run.max_constraint_residual, cres);
        run.max_power_residual = std::max(run.max_power_residual, power_residual);

        if (it % std::max(1, opts.record_stride) == 0) {
            OracleStep step;
            step.t = t;
            step.s = s;
            step.sd = sd;
            step.sdd = sdd;
            step.lambda = lambda;
            step.transmitted = transmitted;
            step.directions = dirs;
            step.power_loss = power_loss;
            step.dissipated = dissipated;
            step.power_residual = power_residual;
            step.constraint_residual = cres;
            run.steps.push_back(std::move(step));
        }

        sd += dt * sdd;
        s += dt * sd;
    }

    run.final_s = s;
    run.final_sd = sd;
    run.dissipated = dissipated;
    run.final_energy = kinetic_energy_redundant(model, s, sd) +
                       potential_energy(model, s.head(b + m));
    run.max_energy_defect =
        std::max(run.max_energy_defect,
                 std::abs(run.final_energy + dissipated - run.initial_energy));
    return run;
}

}  // namespace ddyn
