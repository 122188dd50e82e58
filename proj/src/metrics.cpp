#include "ddyn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddyn/dissipative.hpp"

namespace ddyn {

namespace {

constexpr double kConditionLimit = 1e12;

/// Reduced mass matrix K^T E_s H_s K with per-rotor inertia weights on the
/// trailing diagonal of E_s. Always symmetric: H_s is block-diagonal and
/// the weights sit on a diagonal.
Eigen::MatrixXd weighted_reduced_mass(const RobotModel& model,
                                      const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& rotor_weights) {
    const int b = model.base_dof;
    const int m = model.joint_count();
    const ConstraintMatrices cm = constraint_matrices(b, model.transmission);
    Eigen::VectorXd e_s = Eigen::VectorXd::Ones(b + 2 * m);
    e_s.tail(m) = rotor_weights;
    return cm.K.transpose() * e_s.asDiagonal() *
           mass_matrix_redundant(model, q) * cm.K;
}

/// Task Jacobian used by the inertia metrics: planar point task when the
/// chain spans it, otherwise (single joint, fixed base) the 1-D tangential
/// magnitude.
Eigen::MatrixXd metric_task_jacobian(const RobotModel& model,
                                     const Eigen::VectorXd& q) {
    const Eigen::MatrixXd jac = contact_jacobian(model, q);
    if (jac.cols() >= 2) return jac;
    Eigen::MatrixXd tangential(1, 1);
    tangential(0, 0) = jac.col(0).norm();
    return tangential;
}

void require_full_row_rank(const Eigen::MatrixXd& jac) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin > kConditionLimit)
        throw SingularError("kinematically singular pose");
}

/// (inner)^-1 with a conditioning check.
Eigen::MatrixXd inverted_task_inertia(const Eigen::MatrixXd& inner) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(inner);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin > kConditionLimit)
        throw SingularError("task-space inertia is singular at this pose");
    return inner.inverse();
}

Eigen::Vector2d unit_direction(const Eigen::Vector2d& direction) {
    const double norm = direction.norm();
    if (!(norm > 0.0)) throw ModelError("direction vector must be nonzero");
    return direction / norm;
}

/// Force map of the quasi-static torque balance restricted to the feasible
/// motion subspace: G = J_m (J_m^T J_m)^-1 B_m diag(weights).
Eigen::MatrixXd force_map(const RobotModel& model, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& weights) {
    const int m = model.joint_count();
    const Eigen::MatrixXd jac = contact_jacobian(model, q);
    const Eigen::MatrixXd j_m = jac.rightCols(m);
    const Eigen::MatrixXd gram = j_m.transpose() * j_m;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin > kConditionLimit)
        throw SingularError("kinematically singular pose");
    const ConstraintMatrices cm =
        constraint_matrices(model.base_dof, model.transmission);
    return j_m * gram.inverse() * cm.B_m * weights.asDiagonal();
}

Eigen::VectorXd variant_weights(const RobotModel& model, MetricVariant variant) {
    const int m = model.joint_count();
    switch (variant) {
        case MetricVariant::Conventional:
            return Eigen::VectorXd::Ones(m);
        case MetricVariant::Forward:
            return model.transmission.eta_f;
        case MetricVariant::Backward:
            for (int i = 0; i < m; ++i)
                if (model.transmission.eta_b(i) <= 1e-12)
                    throw SingularError("coupling is locked against backdriving");
            return model.transmission.eta_b.cwiseInverse();
    }
    throw ModelError("unknown metric variant");
}

Eigen::VectorXd torque_bounds(const RobotModel& model) {
    if (model.torque_limits.size() != model.joint_count() ||
        model.torque_limits.minCoeff() <= 0.0)
        throw ModelError("force capability needs positive rotor torque limits");
    return model.torque_limits;
}

/// Support extent of the zonotope {G tau : |tau_i| <= bound_i} along a
/// unit direction; the maximizing torque has tau_i = bound_i sign(n^T g_i),
/// which is the exact solution of the box linear program.
double support_extent(const Eigen::MatrixXd& g, const Eigen::VectorXd& bounds,
                      const Eigen::Vector2d& n) {
    double extent = 0.0;
    for (int i = 0; i < g.cols(); ++i)
        extent += std::abs(n.dot(g.col(i))) * bounds(i);
    return extent;
}

/// Counter-clockwise convex hull (monotone chain); keeps collinear sets as
/// their two extreme points.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
    std::sort(pts.begin(), pts.end(),
              [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                  return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
              });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                              return a == b;
                          }),
              pts.end());
    const size_t n = pts.size();
    if (n <= 2) return pts;
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                    const Eigen::Vector2d& b) {
        return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
    };
    std::vector<Eigen::Vector2d> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

/// Directional impact mitigation with explicit rotor inertia weights.
double imf_value(const RobotModel& model, const Eigen::VectorXd& q,
                 const Eigen::Vector2d& n, const Eigen::VectorXd& weights) {
    const int m = model.joint_count();
    const Eigen::MatrixXd h = weighted_reduced_mass(model, q, weights);
    const Eigen::MatrixXd jac = contact_jacobian(model, q);
    require_full_row_rank(jac);
    const Eigen::MatrixXd lam_float =
        inverted_task_inertia(jac * h.partialPivLu().solve(jac.transpose()));
    const Eigen::MatrixXd h_locked = h.bottomRightCorner(m, m);
    const Eigen::MatrixXd j_m = jac.rightCols(m);
    require_full_row_rank(j_m);
    const Eigen::MatrixXd lam_locked = inverted_task_inertia(
        j_m * h_locked.partialPivLu().solve(j_m.transpose()));
    return 1.0 - (n.dot(lam_float * n)) / (n.dot(lam_locked * n));
}

}  // namespace

const char* variant_name(MetricVariant v) {
    switch (v) {
        case MetricVariant::Conventional: return "conventional";
        case MetricVariant::Forward: return "forward";
        case MetricVariant::Backward: return "backward";
    }
    return "unknown";
}

InertiaTensorResult git(const RobotModel& model, const Eigen::VectorXd& q,
                        MetricVariant variant, const GitOptions& opts) {
    model.validate();
    if (variant == MetricVariant::Forward && model.base_dof != 0)
        throw ModelError("forward task-space inertia needs a fixed-base "
                         "(fully actuated) model");

    InertiaTensorResult result;
    result.variant = variant;
    Eigen::VectorXd weights;
    switch (variant) {
        case MetricVariant::Conventional:
            weights = Eigen::VectorXd::Ones(model.joint_count());
            result.weighting_note = "unweighted inertia";
            break;
        case MetricVariant::Forward:
            weights = model.transmission.eta_f;
            result.weighting_note =
                "forward efficiencies in the inertia; torque map folded in";
            break;
        case MetricVariant::Backward:
            if (opts.backward == BackwardWeighting::EfficiencyWeighted) {
                weights = variant_weights(model, MetricVariant::Backward);
                result.weighting_note =
                    "backward weighting: rotor inertia scaled by 1/eta_b";
            } else {
                weights = Eigen::VectorXd::Ones(model.joint_count());
                result.weighting_note =
                    "backward weighting: conventional (unweighted) inertia";
            }
            break;
    }

    const Eigen::MatrixXd h = weighted_reduced_mass(model, q, weights);
    const Eigen::MatrixXd jac = metric_task_jacobian(model, q);
    require_full_row_rank(jac);

    Eigen::MatrixXd mapped_jt = jac.transpose();
    if (variant == MetricVariant::Forward) {
        const ConstraintMatrices cm =
            constraint_matrices(model.base_dof, model.transmission);
        const Eigen::MatrixXd output_map =
            cm.B_m * model.transmission.eta_f.asDiagonal() * cm.B_m.inverse();
        mapped_jt = output_map * mapped_jt;
    }
    const Eigen::MatrixXd inner = jac * h.partialPivLu().solve(mapped_jt);
    result.tensor = inverted_task_inertia(inner);
    result.symmetric_part = 0.5 * (result.tensor + result.tensor.transpose());
    return result;
}

bool ForcePolytope::contains(const Eigen::Vector2d& f, double tol) const {
    const size_t n = vertices.size();
    if (n == 0) return false;
    if (n == 1) return (f - vertices[0]).norm() <= tol;
    if (n == 2) {
        // Degenerate (segment) set: distance to the segment.
        const Eigen::Vector2d d = vertices[1] - vertices[0];
        const double len2 = d.squaredNorm();
        const double s =
            len2 > 0.0 ? std::clamp((f - vertices[0]).dot(d) / len2, 0.0, 1.0)
                       : 0.0;
        return (f - (vertices[0] + s * d)).norm() <= tol;
    }
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& a = vertices[i];
        const Eigen::Vector2d& b = vertices[(i + 1) % n];
        const double cross =
            (b(0) - a(0)) * (f(1) - a(1)) - (b(1) - a(1)) * (f(0) - a(0));
        if (cross < -tol * std::max(1.0, (b - a).norm())) return false;
    }
    return true;
}

double ForcePolytope::area() const {
    const size_t n = vertices.size();
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& a = vertices[i];
        const Eigen::Vector2d& b = vertices[(i + 1) % n];
        twice += a(0) * b(1) - a(1) * b(0);
    }
    return 0.5 * std::abs(twice);
}

ForcePolytope force_capability(const RobotModel& model,
                               const Eigen::VectorXd& q,
                               MetricVariant variant) {
    model.validate();
    const int m = model.joint_count();
    const Eigen::VectorXd bounds = torque_bounds(model);
    const Eigen::MatrixXd g = force_map(model, q, variant_weights(model, variant));
    if (m > 16) throw ModelError("too many couplings for vertex enumeration");
    std::vector<Eigen::Vector2d> images;
    images.reserve(size_t{1} << m);
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        Eigen::VectorXd tau(m);
        for (int i = 0; i < m; ++i)
            tau(i) = (mask >> i) & 1u ? bounds(i) : -bounds(i);
        images.emplace_back(g * tau);
    }
    ForcePolytope poly;
    poly.variant = variant;
    poly.vertices = convex_hull(std::move(images));
    return poly;
}

double directional_force_extent(const RobotModel& model,
                                const Eigen::VectorXd& q,
                                MetricVariant variant,
                                const Eigen::Vector2d& direction) {
    model.validate();
    const Eigen::Vector2d n = unit_direction(direction);
    const Eigen::MatrixXd g = force_map(model, q, variant_weights(model, variant));
    return support_extent(g, torque_bounds(model), n);
}

ImfResult impact_mitigation(const RobotModel& model, const Eigen::VectorXd& q,
                            const Eigen::Vector2d& direction) {
    model.validate();
    if (model.base_dof != 3)
        throw ModelError("impact mitigation needs a floating-base model");
    ImfResult result;
    result.direction = unit_direction(direction);
    result.value = imf_value(model, q, result.direction, model.transmission.eta_b);
    return result;
}

std::vector<SweepRow> efficiency_sweep(const RobotModel& model,
                                       const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& eta_f_grid,
                                       const Eigen::Vector2d& direction) {
    model.validate();
    if (model.base_dof != 3)
        throw ModelError("efficiency sweep needs a floating-base model "
                         "(impact mitigation column)");
    const int m = model.joint_count();
    const Eigen::Vector2d n = unit_direction(direction);
    const RobotModel fixed = fixed_base_submodel(model);
    const Eigen::VectorXd q_m = q.tail(m);
    const Eigen::VectorXd bounds = torque_bounds(model);

    const Eigen::MatrixXd g_conv =
        force_map(fixed, q_m, Eigen::VectorXd::Ones(m));
    const double base_extent = support_extent(g_conv, bounds, n);
    if (!(base_extent > 0.0))
        throw SingularError("no force capability along the sweep direction");

    std::vector<SweepRow> rows;
    rows.reserve(eta_f_grid.size());
    for (int r = 0; r < eta_f_grid.size(); ++r) {
        const double ef = eta_f_grid(r);
        if (!(ef > 0.0) || ef > 1.0)
            throw ModelError("sweep grid values must lie in (0, 1]");
        const double eb = model.eta_map.eta_b(ef);
        SweepRow row;
        row.eta_f = ef;
        row.eta_b = eb;
        const Eigen::MatrixXd g_fwd =
            force_map(fixed, q_m, Eigen::VectorXd::Constant(m, ef));
        row.fc_fwd_norm = support_extent(g_fwd, bounds, n) / base_extent;
        if (eb <= 1e-12) {
            row.fc_bwd_norm = std::numeric_limits<double>::infinity();
        } else {
            const Eigen::MatrixXd g_bwd =
                force_map(fixed, q_m, Eigen::VectorXd::Constant(m, 1.0 / eb));
            row.fc_bwd_norm = support_extent(g_bwd, bounds, n) / base_extent;
        }
        row.imf = imf_value(model, q, n, Eigen::VectorXd::Constant(m, eb));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ddyn
