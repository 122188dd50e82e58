#include "ddyn/transmission.hpp"

#include <algorithm>
#include <cmath>

namespace ddyn {

namespace {

/// Largest-to-smallest singular value ratio; infinity for a zero matrix.
double condition_number(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

constexpr double kConditionLimit = 1e12;

}  // namespace

const char* flow_name(Flow f) { return f == Flow::Fwd ? "fwd" : "bwd"; }

EfficiencyMap EfficiencyMap::tabulated(
    std::vector<std::pair<double, double>> pairs) {
    if (pairs.empty()) throw ModelError("efficiency map table is empty");
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (i > 0 && pairs[i].first <= pairs[i - 1].first)
            throw ModelError("efficiency map table must be sorted by "
                             "strictly increasing forward efficiency");
        if (pairs[i].first <= 0.0 || pairs[i].first > 1.0)
            throw ModelError("efficiency map forward values must lie in (0, 1]");
        if (pairs[i].second < 0.0 || pairs[i].second > 1.0)
            throw ModelError("efficiency map backward values must lie in [0, 1]");
    }
    EfficiencyMap map;
    map.table_ = std::move(pairs);
    return map;
}

double EfficiencyMap::eta_b(double eta_f) const {
    if (!(eta_f > 0.0) || eta_f > 1.0)
        throw ModelError("forward efficiency must lie in (0, 1]");
    if (table_.empty()) return std::max(0.0, 2.0 - 1.0 / eta_f);
    if (eta_f <= table_.front().first) return table_.front().second;
    if (eta_f >= table_.back().first) return table_.back().second;
    auto hi = std::upper_bound(
        table_.begin(), table_.end(), eta_f,
        [](double v, const std::pair<double, double>& row) { return v < row.first; });
    auto lo = hi - 1;
    const double w = (eta_f - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

double backward_from_forward(double eta_f, const EfficiencyMap& map) {
    return map.eta_b(eta_f);
}

Eigen::MatrixXd TransmissionSet::reduction() const {
    return ratios.cwiseInverse().asDiagonal();
}

Eigen::MatrixXd TransmissionSet::drive() const { return topology * reduction(); }

void TransmissionSet::validate() const {
    const int m = size();
    if (m < 1) throw ModelError("transmission needs at least one coupling");
    if (eta_f.size() != m || eta_b.size() != m)
        throw ModelError("efficiency vector length differs from joint count");
    if (topology.rows() != m || topology.cols() != m)
        throw ModelError("topology matrix must be square with one row per joint");
    for (int i = 0; i < m; ++i) {
        if (!(ratios(i) >= 1.0))
            throw ModelError("gear ratios must be >= 1");
        if (!(eta_f(i) > 0.0) || eta_f(i) > 1.0)
            throw ModelError("forward efficiencies must lie in (0, 1]");
        if (!(eta_b(i) > 0.0) || eta_b(i) > 1.0)
            throw ModelError("backward efficiencies must lie in (0, 1]");
    }
    if (condition_number(topology) > kConditionLimit)
        throw SingularError("actuation topology matrix is singular");
}

bool TransmissionSet::operator==(const TransmissionSet& other) const {
    return ratios.size() == other.ratios.size() &&
           topology.rows() == other.topology.rows() &&
           ratios == other.ratios && eta_f == other.eta_f &&
           eta_b == other.eta_b && topology == other.topology;
}

TransmissionSet uniform_transmission(int joints, double ratio, double eta_f,
                                     double eta_b) {
    TransmissionSet t;
    t.ratios = Eigen::VectorXd::Constant(joints, ratio);
    t.eta_f = Eigen::VectorXd::Constant(joints, eta_f);
    t.eta_b = Eigen::VectorXd::Constant(joints, eta_b);
    t.topology = Eigen::MatrixXd::Identity(joints, joints);
    return t;
}

FlowAssignment make_flow(const TransmissionSet& t, const std::vector<Flow>& dirs) {
    const int m = t.size();
    if (static_cast<int>(dirs.size()) != m)
        throw ModelError("flow direction count differs from joint count");
    FlowAssignment flow;
    flow.directions = dirs;
    flow.effective_eta.resize(m);
    for (int i = 0; i < m; ++i) {
        if (dirs[i] == Flow::Fwd) {
            flow.effective_eta(i) = t.eta_f(i);
        } else {
            if (t.eta_b(i) <= 1e-12)
                throw SingularError("coupling is locked against backdriving "
                                    "(backward efficiency ~ 0)");
            flow.effective_eta(i) = 1.0 / t.eta_b(i);
        }
    }
    return flow;
}

FlowAssignment uniform_flow(const TransmissionSet& t, Flow dir) {
    return make_flow(t, std::vector<Flow>(t.size(), dir));
}

ConstraintMatrices constraint_matrices(int base_dof, const TransmissionSet& t) {
    const int m = t.size();
    const Eigen::MatrixXd dr = t.drive();
    if (condition_number(dr) > kConditionLimit)
        throw SingularError("drive matrix D*R is singular");
    const Eigen::MatrixXd dr_inv = dr.inverse();

    ConstraintMatrices cm;
    cm.A = Eigen::MatrixXd::Zero(m, base_dof + 2 * m);
    cm.A.block(0, base_dof, m, m) = Eigen::MatrixXd::Identity(m, m);
    cm.A.block(0, base_dof + m, m, m) = -dr;

    cm.K = Eigen::MatrixXd::Zero(base_dof + 2 * m, base_dof + m);
    cm.K.topLeftCorner(base_dof, base_dof) =
        Eigen::MatrixXd::Identity(base_dof, base_dof);
    cm.K.block(base_dof, base_dof, m, m) = Eigen::MatrixXd::Identity(m, m);
    cm.K.block(base_dof + m, base_dof, m, m) = dr_inv;

    cm.B_m = dr_inv.transpose();
    return cm;
}

EfficiencyMatrices efficiency_matrices(const TransmissionSet& t,
                                       const FlowAssignment& flow,
                                       int base_dof) {
    const int m = t.size();
    if (flow.effective_eta.size() != m)
        throw ModelError("flow assignment length differs from joint count");
    EfficiencyMatrices em;
    em.e_s = Eigen::VectorXd::Ones(base_dof + 2 * m);
    em.e_s.tail(m) = flow.effective_eta;
    em.e_m = flow.effective_eta;
    return em;
}

CoordinateChain coordinate_chain(const TransmissionSet& t,
                                 const Eigen::MatrixXd& task_jacobian) {
    if (task_jacobian.cols() != t.size())
        throw ModelError("task Jacobian column count differs from joint count");
    CoordinateChain chain;
    chain.reduction = t.reduction();
    chain.topology = t.topology;
    chain.task = task_jacobian;
    chain.composition = task_jacobian * t.topology * chain.reduction;
    return chain;
}

}  // namespace ddyn
