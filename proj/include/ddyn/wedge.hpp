#pragma once

#include <functional>
#include <vector>

#include "ddyn/transmission.hpp"

namespace ddyn::wedge {

/// One-DoF wedge-and-block mechanism: a block of mass M sliding on a
/// frictional incline of a moving wedge of mass m. The incline angle plays
/// the role of a gear reduction (ratio 1/cos(incline)) and the Coulomb
/// friction on the contact produces direction-dependent efficiency, making
/// this the smallest closed-form model of a lossy gearbox.
struct Params {
    double block_mass = 1.0;  ///< M > 0 (output side), kg
    double wedge_mass = 1.0;  ///< m > 0 (input side), kg
    double incline = 0.0;     ///< contact angle in [0, pi/2), rad
    double friction = 0.0;    ///< Coulomb coefficient >= 0

    /// Throws ModelError when any invariant fails.
    void validate() const;
};

/// Directional efficiencies of the mechanism. When friction * tan(incline)
/// reaches 1 the forward efficiency hits zero and the mechanism can no
/// longer be driven from the input side; that state is flagged rather than
/// treated as an error so parameter sweeps can cross it.
struct Efficiencies {
    double eta_f;         ///< 1 - friction * tan(incline)
    double eta_b;         ///< 1 / (1 + friction * tan(incline))
    bool forward_locked;  ///< eta_f <= 0
};

Efficiencies efficiencies(const Params& p);

/// Closed-form block acceleration under constant forces f_x (on the block)
/// and f_u (on the wedge input), with the energy-flow direction fixed:
///   Fwd: (f_x - eta_f * fu_hat) / (M + eta_f * m / cos^2)
///   Bwd: (f_x - (1/eta_b) * fu_hat) / (M + (1/eta_b) * m / cos^2)
/// where fu_hat = f_u / cos(incline). Throws SingularError for Fwd when
/// the mechanism is forward-locked.
double reduced_acceleration(const Params& p, Flow dir, double f_x, double f_u);

/// Coefficient c of the rigid-body impedance X(s) = c * s seen from the
/// block under the given flow direction. Throws SingularError for Fwd when
/// forward-locked.
double impedance_coefficient(const Params& p, Flow dir);

/// One integration step of the redundant two-coordinate simulation.
struct TrajectoryStep {
    double t;
    double x, u;              ///< block and wedge positions
    double xd, ud;            ///< velocities
    double xdd, udd;          ///< accelerations
    double lambda;            ///< constraint multiplier
    double transmitted;       ///< input-side transmitted force cos(a)*lambda
    Flow dir;                 ///< resolved energy-flow direction
    double power_loss;        ///< instantaneous friction dissipation >= 0
    double dissipated;        ///< cumulative dissipated energy
    double power_residual;    ///< relative power-balance defect
    double constraint_residual;  ///< |x - u*cos(incline)|
};

struct SimOptions {
    double eps_vel = 1e-5;    ///< width of the tanh friction regularization
    double eps_power = 1e-9;  ///< dead band for direction resolution
    Flow tie_mode = Flow::Fwd;  ///< direction when transmitted power ~ 0
};

/// Brute-force reference: integrates block and wedge as separate
/// coordinates coupled by the contact constraint, solving a per-step
/// saddle-point system for accelerations and the constraint multiplier,
/// with regularized Coulomb friction on the contact. Semi-implicit Euler
/// keeps the linear constraint satisfied to rounding.
/// Throws NumericError when a per-step solve loses accuracy.
std::vector<TrajectoryStep> simulate_redundant(
    const Params& p, const std::function<double(double)>& f_x,
    const std::function<double(double)>& f_u, double dt, int steps,
    const SimOptions& opts = {});

}  // namespace ddyn::wedge
