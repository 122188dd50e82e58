#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddyn/rigid_body.hpp"

namespace ddyn {

/// Which efficiency scenario a metric is evaluated under.
enum class MetricVariant { Conventional, Forward, Backward };

const char* variant_name(MetricVariant v);

/// Reading of "backdriven inertia" for the Backward task-space tensor:
/// EfficiencyWeighted scales rotor inertia by 1/eta_b inside the reduced
/// mass matrix (heavier to backdrive); ConventionalInertia leaves the mass
/// matrix unweighted, making Backward identical to Conventional.
enum class BackwardWeighting { EfficiencyWeighted, ConventionalInertia };

struct GitOptions {
    BackwardWeighting backward = BackwardWeighting::EfficiencyWeighted;
};

/// Task-space inertia felt at the foot. The Forward variant is generally
/// asymmetric; quadratic-form comparisons and ellipse rendering use
/// `symmetric_part`.
struct InertiaTensorResult {
    Eigen::MatrixXd tensor;          ///< n x n, n = 2 (or 1 for a 1-link chain)
    Eigen::MatrixXd symmetric_part;  ///< (tensor + tensor^T) / 2
    MetricVariant variant;
    std::string weighting_note;      ///< active Backward reading, for reports
};

/// Generalized inertia tensor (J H^-1 J^T)^-1 under the chosen variant:
/// Conventional uses the unweighted mass matrix; Backward weights rotor
/// inertia by 1/eta_b (by default, see GitOptions); Forward evaluates
/// (J H_f^-1 B_m E_m B_m^-1 J^T)^-1 with forward efficiencies and requires
/// a fixed-base model. One-link chains use the 1-D tangential task
/// direction (a 2-D point task is rank-deficient there).
/// Throws SingularError at kinematically singular poses and ModelError for
/// Forward on a floating-base model.
InertiaTensorResult git(const RobotModel& model, const Eigen::VectorXd& q,
                        MetricVariant variant, const GitOptions& opts = {});

/// Convex set of task-space forces reachable (Forward), nominally
/// transmitted (Conventional), or quasi-statically resisted (Backward)
/// under the per-rotor torque bounds. Vertices are hull-ordered
/// counter-clockwise.
struct ForcePolytope {
    std::vector<Eigen::Vector2d> vertices;
    MetricVariant variant;

    /// Point-in-polytope test with an absolute slack on each edge.
    bool contains(const Eigen::Vector2d& f, double tol = 1e-9) const;

    double area() const;
};

/// Maps the rotor torque box through J_m (J_m^T J_m)^-1 B_m E_m (the
/// quasi-static torque balance restricted to the feasible motion
/// subspace; equal to J_m^-T B_m E_m when J_m is square). E_m carries
/// eta_f for Forward, 1/eta_b for Backward, ones for Conventional.
/// Requires positive torque limits on every rotor.
ForcePolytope force_capability(const RobotModel& model,
                               const Eigen::VectorXd& q, MetricVariant variant);

/// Support function of the force-capability set along `direction`:
/// the largest force magnitude reachable that way, found by the (box)
/// linear program max n^T f over the torque bounds, which for a box
/// constraint reduces to a closed form.
double directional_force_extent(const RobotModel& model,
                                const Eigen::VectorXd& q,
                                MetricVariant variant,
                                const Eigen::Vector2d& direction);

/// Directional impact mitigation in [0, 1]: how much less task-space
/// inertia the foot presents when the base floats than when it is locked.
struct ImfResult {
    double value;
    Eigen::Vector2d direction;
};

/// value = 1 - (n^T L_float n) / (n^T L_locked n), with L = (J H^-1 J^T)^-1
/// evaluated on the floating model and on the same model with base
/// coordinates locked. Impacts backdrive the transmission, so the mass
/// matrix weights each rotor inertia by its backward efficiency (the mesh
/// transmits only an eta_b fraction of the rotor's inertial reaction).
/// Requires a floating-base model; throws ModelError otherwise.
ImfResult impact_mitigation(const RobotModel& model, const Eigen::VectorXd& q,
                            const Eigen::Vector2d& direction);

/// One row of an efficiency sweep: both joints set to the same forward
/// efficiency, backward efficiency from the model's map, force extents
/// along the sweep direction normalized by the conventional extent, and
/// the directional impact mitigation value. A locked row (eta_b <= 0)
/// carries fc_bwd_norm = infinity.
struct SweepRow {
    double eta_f;
    double eta_b;
    double fc_fwd_norm;
    double fc_bwd_norm;
    double imf;
};

/// Evaluates one row per grid value. Force extents are computed on the
/// fixed-base submodel (the leg pushes against the world); impact
/// mitigation needs the floating base, so the model must have one.
/// Grid values must lie in (0, 1].
std::vector<SweepRow> efficiency_sweep(const RobotModel& model,
                                       const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& eta_f_grid,
                                       const Eigen::Vector2d& direction);

}  // namespace ddyn
