#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ddyn/transmission.hpp"

namespace ddyn {

/// One rigid link of a planar serial chain.
struct PlanarBody {
    double mass = 0.0;         ///< kg
    double length = 0.0;       ///< joint-to-joint length, m
    double com_offset = 0.0;   ///< proximal joint to COM along the link, m
    double inertia_com = 0.0;  ///< rotational inertia about the COM, kg m^2

    bool operator==(const PlanarBody& other) const;
};

/// Floating torso modeled as a single planar rigid body. The chain is
/// attached at the torso center of mass.
struct BaseBody {
    double mass = 0.0;
    double inertia = 0.0;

    bool operator==(const BaseBody& other) const;
};

/// Planar robot: optional floating base (x, z, pitch), a serial chain of
/// links, and one geared rotor per joint. Rotors enter the dynamics only
/// through their reflected inertia; they carry no gravity load.
struct RobotModel {
    int base_dof = 0;  ///< 0 (fixed base) or 3 (planar floating base)
    BaseBody base;
    std::vector<PlanarBody> links;
    Eigen::VectorXd rotor_inertias;  ///< kg m^2, length m
    Eigen::VectorXd torque_limits;   ///< per-rotor |tau| bound, 0 = unset
    TransmissionSet transmission;
    EfficiencyMap eta_map;           ///< backward-from-forward map
    double gravity = 9.81;           ///< magnitude along -z, m/s^2
    Eigen::VectorXd default_pose;    ///< length base_dof + m

    int joint_count() const { return static_cast<int>(links.size()); }
    int coord_count() const { return base_dof + joint_count(); }
    int state_count() const { return base_dof + 2 * joint_count(); }

    /// Throws ModelError when any invariant fails.
    void validate() const;

    bool operator==(const RobotModel& other) const;
};

/// Copy of the model with the base welded to the world at the origin.
RobotModel fixed_base_submodel(const RobotModel& model);

/// World positions of all link centers of mass (hip attached at the base
/// COM, or at the origin for fixed-base models).
std::vector<Eigen::Vector2d> link_com_positions(const RobotModel& model,
                                                const Eigen::VectorXd& q);

/// World position of the point foot (tip of the last link).
Eigen::Vector2d foot_position(const RobotModel& model, const Eigen::VectorXd& q);

/// Mass matrix over the reduced coordinates (q_b, q_m); symmetric PSD.
Eigen::MatrixXd mass_matrix(const RobotModel& model, const Eigen::VectorXd& q);

/// Coriolis/centrifugal plus gravity forces over (q_b, q_m).
Eigen::VectorXd bias_forces(const RobotModel& model, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qd);

/// Block-diagonal mass matrix over the redundant coordinates
/// s = (q_b, q_m, phi_m): the link/base block plus diag(rotor inertias).
Eigen::MatrixXd mass_matrix_redundant(const RobotModel& model,
                                      const Eigen::VectorXd& q);

/// Bias forces padded with zeros on the rotor coordinates.
Eigen::VectorXd bias_forces_redundant(const RobotModel& model,
                                      const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& qd);

/// Planar point-foot Jacobian, 2 x (b+m) rows (x, z).
Eigen::MatrixXd contact_jacobian(const RobotModel& model,
                                 const Eigen::VectorXd& q);

/// True when the contact Jacobian loses row rank (e.g. a fully extended
/// leg), judged by singular-value ratio against `cond_limit`.
bool singular_pose(const RobotModel& model, const Eigen::VectorXd& q,
                   double cond_limit = 1e12);

/// Kinetic energy of base and links from reduced coordinates.
double kinetic_energy(const RobotModel& model, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& qd);

/// Kinetic energy including rotor spin, from redundant coordinates.
double kinetic_energy_redundant(const RobotModel& model,
                                const Eigen::VectorXd& s,
                                const Eigen::VectorXd& sd);

/// Gravitational potential energy of base and links.
double potential_energy(const RobotModel& model, const Eigen::VectorXd& q);

/// Redundant-coordinate state: joints and rotors tracked independently,
/// coupled only through the transmission constraint q_m = D*R*phi.
struct SystemState {
    Eigen::VectorXd q;     ///< length b+m
    Eigen::VectorXd qd;
    Eigen::VectorXd phi;   ///< length m
    Eigen::VectorXd phid;
};

/// State with rotor coordinates chosen to satisfy the constraint exactly.
SystemState make_consistent_state(const RobotModel& model,
                                  const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& qd);

/// Position-level constraint defect |q_m - D*R*phi|_inf.
double constraint_residual(const RobotModel& model, const SystemState& state);

/// One recorded step of the redundant-coordinate simulation.
struct OracleStep {
    double t;
    Eigen::VectorXd s;            ///< (q_b, q_m, phi), length b+2m
    Eigen::VectorXd sd;
    Eigen::VectorXd sdd;
    Eigen::VectorXd lambda;       ///< constraint multipliers, length m
    Eigen::VectorXd transmitted;  ///< rotor-side mesh torque (D*R)^T lambda
    std::vector<Flow> directions;
    double power_loss;            ///< instantaneous dissipation >= 0
    double dissipated;            ///< cumulative dissipated energy
    double power_residual;        ///< relative power-balance defect
    double constraint_residual;   ///< position-level defect |A s|_inf
};

struct OracleOptions {
    double eps_vel = 1e-5;        ///< tanh friction regularization width
    double eps_power = 1e-9;      ///< dead band for direction resolution
    Flow tie_mode = Flow::Fwd;    ///< direction at ~zero transmitted power
    int record_stride = 1;        ///< keep every k-th step
    int max_direction_iters = 10;
};

/// Summary and (strided) trace of one oracle run.
struct OracleRun {
    std::vector<OracleStep> steps;
    Eigen::VectorXd final_s;
    Eigen::VectorXd final_sd;
    double dissipated = 0.0;            ///< total dissipated energy
    bool dissipation_monotone = true;   ///< cumulative dissipation never drops
    double max_constraint_residual = 0.0;
    double max_power_residual = 0.0;
    double initial_energy = 0.0;        ///< kinetic + potential at start
    double final_energy = 0.0;
    /// max |E(t) + dissipated(t) - E(0)| over the run; for lossless runs
    /// this is the plain integration energy drift.
    double max_energy_defect = 0.0;
};

using TorqueSignal = std::function<Eigen::VectorXd(double)>;
using ForceSignal = std::function<Eigen::Vector2d(double)>;

/// Brute-force reference dynamics: integrates joints and rotors as
/// independent coordinates, solving a per-step saddle-point system
/// [H_s, -(A^T + friction coupling); A, 0] for accelerations and mesh
/// multipliers. Joint friction is Coulomb drag on each rotor proportional
/// to the transmitted mesh torque, with a velocity-regularized sign and a
/// drag coefficient calibrated per flow direction so the steady-state
/// power ratio across coupling i equals eta_f_i forward and eta_b_i
/// backward. Direction and torque-sign are resolved by a small fixed-point
/// iteration on the current solve. Semi-implicit Euler preserves the
/// linear constraint to rounding. Null signals are treated as zero.
/// Throws NumericError when a per-step solve loses accuracy.
OracleRun simulate_redundant_system(const RobotModel& model,
                                    const SystemState& initial,
                                    const TorqueSignal& tau_phi,
                                    const ForceSignal& f_ext, double dt,
                                    int steps, const OracleOptions& opts = {});

}  // namespace ddyn
