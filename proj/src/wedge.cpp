#include "ddyn/wedge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "ddyn/errors.hpp"

namespace ddyn::wedge {

void Params::validate() const {
    if (!(block_mass > 0.0)) throw ModelError("block mass must be positive");
    if (!(wedge_mass > 0.0)) throw ModelError("wedge mass must be positive");
    if (!(friction >= 0.0)) throw ModelError("friction coefficient must be >= 0");
    if (!(incline >= 0.0) || !(incline < M_PI / 2.0))
        throw ModelError("incline angle must lie in [0, pi/2)");
}

Efficiencies efficiencies(const Params& p) {
    p.validate();
    const double mt = p.friction * std::tan(p.incline);
    Efficiencies e;
    e.eta_f = 1.0 - mt;
    e.eta_b = 1.0 / (1.0 + mt);
    e.forward_locked = e.eta_f <= 0.0;
    return e;
}

double reduced_acceleration(const Params& p, Flow dir, double f_x, double f_u) {
    const Efficiencies e = efficiencies(p);
    const double c = std::cos(p.incline);
    const double fu_hat = f_u / c;
    const double reflected = p.wedge_mass / (c * c);
    if (dir == Flow::Fwd) {
        if (e.forward_locked)
            throw SingularError("wedge is forward-locked (eta_f <= 0)");
        return (f_x - e.eta_f * fu_hat) / (p.block_mass + e.eta_f * reflected);
    }
    const double w = 1.0 / e.eta_b;
    return (f_x - w * fu_hat) / (p.block_mass + w * reflected);
}

double impedance_coefficient(const Params& p, Flow dir) {
    const Efficiencies e = efficiencies(p);
    const double c = std::cos(p.incline);
    const double reflected = p.wedge_mass / (c * c);
    if (dir == Flow::Fwd) {
        if (e.forward_locked)
            throw SingularError("wedge is forward-locked (eta_f <= 0)");
        return p.block_mass / e.eta_f + reflected;
    }
    return p.block_mass + reflected / e.eta_b;
}

std::vector<TrajectoryStep> simulate_redundant(
    const Params& p, const std::function<double(double)>& f_x,
    const std::function<double(double)>& f_u, double dt, int steps,
    const SimOptions& opts) {
    const Efficiencies e = efficiencies(p);
    if (!(dt > 0.0)) throw ModelError("time step must be positive");

    const double c = std::cos(p.incline);
    // Coulomb drag coefficients calibrated so the steady-state power ratio
    // across the contact equals eta_f forward and eta_b backward.
    const double k_fwd = e.forward_locked
                             ? std::numeric_limits<double>::infinity()
                             : (1.0 - e.eta_f) / e.eta_f;
    const double k_bwd = 1.0 - e.eta_b;

    double x = 0.0, u = 0.0, xd = 0.0, ud = 0.0;
    double dissipated = 0.0;
    Flow dir = opts.tie_mode;
    double sgn = 1.0;

    std::vector<TrajectoryStep> out;
    out.reserve(steps);

    for (int it = 0; it < steps; ++it) {
        const double t = it * dt;
        const double fx = f_x(t);
        const double fu = f_u(t);
        const double theta = std::tanh(ud / opts.eps_vel);

        // Unknowns (xdd, udd, lambda). Block row: M xdd = fx + lambda.
        // Wedge row: m udd = -fu - c lambda + tau_d with the Coulomb drag
        // tau_d = -k |c lambda| theta linearized in lambda via the sign of
        // the transmitted force. Constraint row: xdd - c udd = 0.
        Eigen::Matrix3d kkt;
        Eigen::Vector3d rhs, sol;
        for (int round = 0; round < 10; ++round) {
            if (dir == Flow::Fwd && e.forward_locked)
                throw SingularError(
                    "forward energy flow through a forward-locked wedge");
            const double k = dir == Flow::Fwd ? k_fwd : k_bwd;
            const double drag = k * theta * sgn * c;  // tau_d = -drag * lambda
            kkt << p.block_mass, 0.0, -1.0,
                   0.0, p.wedge_mass, c + drag,
                   1.0, -c, 0.0;
            rhs << fx, -fu, 0.0;
            sol = kkt.partialPivLu().solve(rhs);
            const double transmitted = c * sol(2);
            const double sgn_next = transmitted == 0.0
                                        ? sgn
                                        : (transmitted > 0.0 ? 1.0 : -1.0);
            const double power = transmitted * ud;
            Flow dir_next = dir;
            if (power > opts.eps_power) dir_next = Flow::Fwd;
            else if (power < -opts.eps_power) dir_next = Flow::Bwd;
            if (sgn_next == sgn && dir_next == dir) break;
            sgn = sgn_next;
            dir = dir_next;
        }
        if (!sol.allFinite() || (kkt * sol - rhs).lpNorm<Eigen::Infinity>() >
                                    1e-8 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()))
            throw NumericError("wedge saddle-point solve lost accuracy");

        const double xdd = sol(0);
        const double udd = sol(1);
        const double lambda = sol(2);
        const double k = dir == Flow::Fwd ? k_fwd : k_bwd;
        const double tau_d = -k * std::abs(c * lambda) * theta;
        const double power_loss = -tau_d * ud;
        dissipated += power_loss * dt;

        // d/dt(kinetic) must equal applied power minus dissipation.
        const double de = xd * p.block_mass * xdd + ud * p.wedge_mass * udd;
        const double applied = fx * xd - fu * ud;
        const double power_residual =
            std::abs(de - (applied - power_loss)) /
            std::max({1.0, std::abs(applied), power_loss});

        TrajectoryStep step;
        step.t = t;
        step.x = x;
        step.u = u;
        step.xd = xd;
        step.ud = ud;
        step.xdd = xdd;
        step.udd = udd;
        step.lambda = lambda;
        step.transmitted = c * lambda;
        step.dir = dir;
        step.power_loss = power_loss;
        step.dissipated = dissipated;
        step.power_residual = power_residual;
        step.constraint_residual = std::abs(x - u * c);
        out.push_back(step);

        xd += dt * xdd;
        ud += dt * udd;
        x += dt * xd;
        u += dt * ud;
    }
    return out;
}

}  // namespace ddyn::wedge
