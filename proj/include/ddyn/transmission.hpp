#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ddyn/errors.hpp"

namespace ddyn {

/// Direction of energy flow across a gear mesh: Fwd drives the load from
/// the rotor side, Bwd backdrives the rotor from the load side.
enum class Flow { Fwd, Bwd };

/// Short lowercase tag ("fwd"/"bwd") for reports and file output.
const char* flow_name(Flow f);

/// Maps forward gear efficiency to backward efficiency.
///
/// The analytic default is eta_b = max(0, 2 - 1/eta_f), which is exact at
/// the lossless point (1 -> 1) and reaches lock at eta_f = 0.5. Measured
/// gearbox data can replace it as a table of (eta_f, eta_b) pairs with
/// linear interpolation between entries (clamped outside the table range).
class EfficiencyMap {
public:
    /// Analytic default map.
    EfficiencyMap() = default;

    /// Tabulated map; pairs must be sorted by strictly increasing eta_f
    /// and every eta_b must lie in [0, 1].
    static EfficiencyMap tabulated(std::vector<std::pair<double, double>> pairs);

    /// Backward efficiency for a forward efficiency in (0, 1].
    double eta_b(double eta_f) const;

    bool is_tabulated() const { return !table_.empty(); }
    const std::vector<std::pair<double, double>>& table() const { return table_; }

private:
    std::vector<std::pair<double, double>> table_;
};

/// Convenience wrapper: evaluate `map` at `eta_f`, validating the range.
double backward_from_forward(double eta_f, const EfficiencyMap& map = {});

/// Per-joint gear ratios, directional efficiencies, and the actuation
/// topology matrix D that routes motor angles to joint angles.
struct TransmissionSet {
    Eigen::VectorXd ratios;    ///< gear ratios N_i >= 1, length m
    Eigen::VectorXd eta_f;     ///< forward efficiencies in (0, 1]
    Eigen::VectorXd eta_b;     ///< backward efficiencies in (0, 1]
    Eigen::MatrixXd topology;  ///< invertible m x m matrix D

    int size() const { return static_cast<int>(ratios.size()); }

    /// R = diag(1/N_i), rotor angle -> motor angle.
    Eigen::MatrixXd reduction() const;

    /// D * R, rotor angle -> joint angle.
    Eigen::MatrixXd drive() const;

    /// Throws ModelError when any invariant fails.
    void validate() const;

    bool operator==(const TransmissionSet& other) const;
};

/// Serial topology (D = identity) with uniform ratio and efficiencies.
TransmissionSet uniform_transmission(int joints, double ratio, double eta_f,
                                     double eta_b);

/// Energy-flow direction per coupling with the efficiencies it implies:
/// entry i is eta_f_i when forward-driven and 1/eta_b_i when backdriven.
struct FlowAssignment {
    std::vector<Flow> directions;
    Eigen::VectorXd effective_eta;
};

/// Builds a FlowAssignment from explicit per-coupling directions.
/// Throws SingularError when a backdriven coupling has eta_b ~ 0 (locked).
FlowAssignment make_flow(const TransmissionSet& t, const std::vector<Flow>& dirs);

/// All couplings in the same direction.
FlowAssignment uniform_flow(const TransmissionSet& t, Flow dir);

/// Constraint machinery for the redundant coordinates s = (q_b, q_m, phi_m):
/// A annihilates consistent motion (A*K = 0), K injects the reduced
/// coordinates (q_b, q_m), and B_m = (D*R)^-T distributes rotor torques
/// onto the joints.
struct ConstraintMatrices {
    Eigen::MatrixXd A;    ///< m x (b+2m)
    Eigen::MatrixXd K;    ///< (b+2m) x (b+m)
    Eigen::MatrixXd B_m;  ///< m x m
};

/// A = [0 | I | -D*R], K = [[I,0],[0,I],[0,(D*R)^-1]], B_m = (D*R)^-T.
/// Throws SingularError when D*R has condition number above 1e12.
ConstraintMatrices constraint_matrices(int base_dof, const TransmissionSet& t);

/// Diagonals of the efficiency matrices: e_s weights the redundant
/// coordinates (ones for q_b and q_m, effective eta for phi_m) and e_m
/// weights rotor torques.
struct EfficiencyMatrices {
    Eigen::VectorXd e_s;  ///< length b+2m
    Eigen::VectorXd e_m;  ///< length m
};

EfficiencyMatrices efficiency_matrices(const TransmissionSet& t,
                                       const FlowAssignment& flow, int base_dof);

/// The composed linear maps rotor -> motor -> joint -> task displacement.
struct CoordinateChain {
    Eigen::MatrixXd reduction;    ///< R: rotor -> motor
    Eigen::MatrixXd topology;     ///< D: motor -> joint
    Eigen::MatrixXd task;         ///< J: joint -> task
    Eigen::MatrixXd composition;  ///< J * D * R: rotor -> task
};

/// Throws ModelError when the task Jacobian column count differs from the
/// joint count.
CoordinateChain coordinate_chain(const TransmissionSet& t,
                                 const Eigen::MatrixXd& task_jacobian);

}  // namespace ddyn
