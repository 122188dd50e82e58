#include "doctest.h"

#include <cmath>

#include "ddyn/metrics.hpp"
#include "ddyn/model_io.hpp"

using namespace ddyn;

namespace {

Eigen::VectorXd make_vec(std::initializer_list<double> vals) {
    Eigen::VectorXd v(static_cast<int>(vals.size()));
    int i = 0;
    for (double x : vals) v(i++) = x;
    return v;
}

const Eigen::VectorXd kPose = make_vec({M_PI / 3.0, M_PI / 3.0});

RobotModel fixed_leg() { return fixed_base_submodel(builtin_case_study()); }

/// Single-link arm with unit inertia about the joint: a point mass at the
/// tip of a unit link plus a small geared rotor.
RobotModel one_link_arm() {
    RobotModel model;
    model.base_dof = 0;
    PlanarBody link;
    link.mass = 1.0;
    link.length = 1.0;
    link.com_offset = 1.0;
    link.inertia_com = 0.0;
    model.links = {link};
    model.rotor_inertias = make_vec({0.01});
    model.torque_limits = make_vec({20.0});
    model.transmission.ratios = make_vec({10.0});
    model.transmission.eta_f = make_vec({0.8});
    model.transmission.eta_b = make_vec({0.75});
    model.transmission.topology = Eigen::MatrixXd::Identity(1, 1);
    model.gravity = 0.0;
    model.default_pose = make_vec({0.0});
    return model;
}

RobotModel uniform_leg(double eta_f, double eta_b) {
    RobotModel model = fixed_leg();
    model.transmission.eta_f = Eigen::VectorXd::Constant(2, eta_f);
    model.transmission.eta_b = Eigen::VectorXd::Constant(2, eta_b);
    return model;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("frozen task-space inertia tensors at the reference pose") {
    const RobotModel model = fixed_leg();

    const InertiaTensorResult conv = git(model, kPose, MetricVariant::Conventional);
    CHECK(conv.tensor(0, 0) == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(conv.tensor(0, 1) == doctest::Approx(-1.2509255832441895).epsilon(1e-9));
    CHECK(conv.tensor(1, 1) == doctest::Approx(3.1666666666666679).epsilon(1e-9));

    const InertiaTensorResult fwd = git(model, kPose, MetricVariant::Forward);
    CHECK(fwd.tensor(0, 0) == doctest::Approx(1.8611111111111112).epsilon(1e-9));
    CHECK(fwd.tensor(0, 1) == doctest::Approx(-1.5396007178390028).epsilon(1e-9));
    CHECK(fwd.tensor(1, 0) == doctest::Approx(-1.2990381056766587).epsilon(1e-9));
    CHECK(fwd.tensor(1, 1) == doctest::Approx(3.809523809523812).epsilon(1e-9));
    // The forward tensor is asymmetric; its symmetric part is reported.
    CHECK(fwd.symmetric_part(0, 1) ==
          doctest::Approx(-1.4193194117578307).epsilon(1e-9));
    CHECK(fwd.symmetric_part(1, 0) == fwd.symmetric_part(0, 1));

    const InertiaTensorResult bwd = git(model, kPose, MetricVariant::Backward);
    CHECK(bwd.tensor(0, 0) == doctest::Approx(1.5185185185185186).epsilon(1e-9));
    CHECK(bwd.tensor(0, 1) == doctest::Approx(-1.2830005981991686).epsilon(1e-9));
    CHECK(bwd.tensor(1, 1) == doctest::Approx(3.7222222222222237).epsilon(1e-9));
}

TEST_CASE("backward weighting switch reproduces the conventional reading") {
    const RobotModel model = fixed_leg();
    GitOptions opts;
    opts.backward = BackwardWeighting::ConventionalInertia;
    const InertiaTensorResult alt =
        git(model, kPose, MetricVariant::Backward, opts);
    const InertiaTensorResult conv =
        git(model, kPose, MetricVariant::Conventional);
    CHECK((alt.tensor - conv.tensor).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(alt.weighting_note.find("conventional") != std::string::npos);

    const InertiaTensorResult eff = git(model, kPose, MetricVariant::Backward);
    CHECK(eff.tensor(0, 0) > conv.tensor(0, 0));
    CHECK(eff.weighting_note.find("1/eta_b") != std::string::npos);
}

TEST_CASE("lossless limit collapses the three variants") {
    const RobotModel ideal = uniform_leg(1.0, 1.0);
    const Eigen::MatrixXd conv =
        git(ideal, kPose, MetricVariant::Conventional).tensor;
    const Eigen::MatrixXd fwd = git(ideal, kPose, MetricVariant::Forward).tensor;
    const Eigen::MatrixXd bwd = git(ideal, kPose, MetricVariant::Backward).tensor;
    CHECK((fwd - conv).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK((bwd - conv).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("directional dominance of the lossy tensors") {
    const RobotModel model = fixed_leg();
    const Eigen::MatrixXd conv =
        git(model, kPose, MetricVariant::Conventional).tensor;
    const Eigen::MatrixXd fwd_sym =
        git(model, kPose, MetricVariant::Forward).symmetric_part;
    const Eigen::MatrixXd bwd = git(model, kPose, MetricVariant::Backward).tensor;
    for (int k = 0; k < 72; ++k) {
        const double a = 2.0 * M_PI * k / 72.0;
        const Eigen::Vector2d n(std::cos(a), std::sin(a));
        const double base = n.dot(conv * n);
        CHECK(n.dot(fwd_sym * n) >= base - 1e-9);
        CHECK(n.dot(bwd * n) >= base - 1e-9);
    }
}

TEST_CASE("one-link closed-form anchors") {
    const RobotModel arm = one_link_arm();
    const Eigen::VectorXd q = make_vec({0.7});
    // Inertia about the joint: 1 (link) + 0.01 * 100 (reflected rotor) = 2,
    // felt over the unit-length tangential task direction.
    CHECK(git(arm, q, MetricVariant::Conventional).tensor(0, 0) ==
          doctest::Approx(2.0).epsilon(1e-9));
    CHECK(git(arm, q, MetricVariant::Forward).tensor(0, 0) ==
          doctest::Approx(2.25).epsilon(1e-9));
    CHECK(git(arm, q, MetricVariant::Backward).tensor(0, 0) ==
          doctest::Approx(7.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("forward tensor needs a fixed base; singular poses are rejected") {
    const RobotModel floating = builtin_case_study();
    CHECK_THROWS_AS(
        git(floating, floating.default_pose, MetricVariant::Forward),
        ModelError);
    CHECK_NOTHROW(git(floating, floating.default_pose, MetricVariant::Conventional));

    const RobotModel model = fixed_leg();
    CHECK_THROWS_AS(git(model, make_vec({0.5, 0.0}), MetricVariant::Conventional),
                    SingularError);
}

TEST_CASE("frozen force-capability vertices") {
    const RobotModel model = fixed_leg();
    const ForcePolytope conv =
        force_capability(model, kPose, MetricVariant::Conventional);
    REQUIRE(conv.vertices.size() == 4);
    // Hull starts at the lexicographically smallest vertex, CCW.
    CHECK(conv.vertices[0](0) == doctest::Approx(-577.35026918962592).epsilon(1e-9));
    CHECK(conv.vertices[0](1) == doctest::Approx(-1000.0).epsilon(1e-9));
    CHECK(conv.vertices[1](0) == doctest::Approx(577.35026918962512).epsilon(1e-9));
    CHECK(conv.vertices[1](1) == doctest::Approx(-3000.0).epsilon(1e-9));
    CHECK(conv.vertices[3](1) == doctest::Approx(3000.0).epsilon(1e-9));

    const ForcePolytope fwd = force_capability(model, kPose, MetricVariant::Forward);
    const ForcePolytope bwd = force_capability(model, kPose, MetricVariant::Backward);
    CHECK(fwd.area() < conv.area());
    CHECK(bwd.area() > conv.area());
}

TEST_CASE("directional extent equals the polytope support") {
    const RobotModel model = fixed_leg();
    for (MetricVariant v : {MetricVariant::Conventional, MetricVariant::Forward,
                            MetricVariant::Backward}) {
        const ForcePolytope poly = force_capability(model, kPose, v);
        for (int k = 0; k < 12; ++k) {
            const double a = 2.0 * M_PI * k / 12.0 + 0.1;
            const Eigen::Vector2d n(std::cos(a), std::sin(a));
            double best = 0.0;
            for (const auto& vert : poly.vertices)
                best = std::max(best, n.dot(vert));
            CHECK(directional_force_extent(model, kPose, v, n) ==
                  doctest::Approx(best).epsilon(1e-9));
        }
    }
}

TEST_CASE("frozen vertical extents at the reference pose") {
    const RobotModel model = fixed_leg();
    const Eigen::Vector2d up(0.0, 1.0);
    CHECK(directional_force_extent(model, kPose, MetricVariant::Conventional, up) ==
          doctest::Approx(3000.0).epsilon(1e-12));
    CHECK(directional_force_extent(model, kPose, MetricVariant::Forward, up) ==
          doctest::Approx(2200.0).epsilon(1e-12));
    CHECK(directional_force_extent(model, kPose, MetricVariant::Backward, up) ==
          doctest::Approx(4833.333333333333).epsilon(1e-12));
}

TEST_CASE("uniform efficiency scales the polytope exactly") {
    const double ef = 0.76;
    const RobotModel model = uniform_leg(ef, backward_from_forward(ef));
    const Eigen::Vector2d up(0.0, 1.0);
    const double conv =
        directional_force_extent(model, kPose, MetricVariant::Conventional, up);
    const double fwd =
        directional_force_extent(model, kPose, MetricVariant::Forward, up);
    const double bwd =
        directional_force_extent(model, kPose, MetricVariant::Backward, up);
    CHECK(fwd / conv == doctest::Approx(ef).epsilon(1e-9));
    CHECK(bwd / conv ==
          doctest::Approx(1.0 / backward_from_forward(ef)).epsilon(1e-9));
}

TEST_CASE("polytopes nest forward in conventional in backward") {
    const RobotModel model = fixed_leg();
    const ForcePolytope conv =
        force_capability(model, kPose, MetricVariant::Conventional);
    const ForcePolytope fwd = force_capability(model, kPose, MetricVariant::Forward);
    const ForcePolytope bwd = force_capability(model, kPose, MetricVariant::Backward);
    const double tol = 1e-6;
    for (const auto& v : fwd.vertices) CHECK(conv.contains(v, tol));
    for (const auto& v : conv.vertices) CHECK(bwd.contains(v, tol));
    // Strictness: the conventional set is not inside the forward set.
    bool all_inside = true;
    for (const auto& v : conv.vertices) all_inside &= fwd.contains(v, tol);
    CHECK(!all_inside);
}

TEST_CASE("polytope membership and area") {
    const RobotModel model = fixed_leg();
    const ForcePolytope conv =
        force_capability(model, kPose, MetricVariant::Conventional);
    CHECK(conv.contains({0.0, 0.0}));
    CHECK(!conv.contains({1e4, 0.0}));
    CHECK(conv.area() > 0.0);
}

TEST_CASE("single-joint capability degenerates to a segment") {
    const RobotModel arm = one_link_arm();
    const Eigen::VectorXd q = make_vec({0.0});
    const ForcePolytope poly =
        force_capability(arm, q, MetricVariant::Conventional);
    REQUIRE(poly.vertices.size() == 2);
    // Torque bound 20 through a 10:1 reduction over a unit lever: 200 N
    // along the tangential (vertical) direction.
    CHECK(poly.vertices[0](1) == doctest::Approx(-200.0).epsilon(1e-12));
    CHECK(poly.vertices[1](1) == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(poly.area() == 0.0);
    CHECK(poly.contains({0.0, 150.0}, 1e-9));
    CHECK(!poly.contains({0.0, 250.0}, 1e-9));
    CHECK(!poly.contains({5.0, 0.0}, 1e-9));

    const double ext = directional_force_extent(arm, q, MetricVariant::Forward,
                                                {0.0, 1.0});
    CHECK(ext == doctest::Approx(160.0).epsilon(1e-12));
}

TEST_CASE("force capability needs positive torque limits") {
    RobotModel model = fixed_leg();
    model.torque_limits = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(force_capability(model, kPose, MetricVariant::Conventional),
                    ModelError);
}

TEST_CASE("frozen impact mitigation at the reference pose") {
    const RobotModel model = builtin_case_study();
    const ImfResult r =
        impact_mitigation(model, model.default_pose, {0.0, 1.0});
    CHECK(r.value == doctest::Approx(0.019619311344122981).epsilon(1e-9));
    CHECK(r.value >= 0.0);
    CHECK(r.value <= 1.0);

    // Direction vectors are normalized, so scaling changes nothing.
    const ImfResult scaled =
        impact_mitigation(model, model.default_pose, {0.0, 2.5});
    CHECK(scaled.value == doctest::Approx(r.value).epsilon(1e-14));

    CHECK_THROWS_AS(impact_mitigation(fixed_leg(), kPose, {0.0, 1.0}),
                    ModelError);
    CHECK_THROWS_AS(
        impact_mitigation(model, model.default_pose, {0.0, 0.0}), ModelError);
}

TEST_CASE("efficiency sweep reproduces the frozen trade-off") {
    const RobotModel model = builtin_case_study();
    Eigen::VectorXd grid(10);
    for (int i = 0; i < 10; ++i) grid(i) = 1.0 - 0.05 * i;
    const std::vector<SweepRow> rows =
        efficiency_sweep(model, model.default_pose, grid, {0.0, 1.0});
    REQUIRE(rows.size() == 10);

    const double frozen_imf[10] = {
        0.028891151775022217, 0.027507934831939029, 0.026008942667085644,
        0.024384276254839743, 0.022625701326310366, 0.02072939175184374,
        0.018701362608441574, 0.016568392398061071, 0.014400648606144872,
        0.012360725558981822};
    for (int i = 0; i < 10; ++i) {
        CHECK(rows[i].eta_f == doctest::Approx(grid(i)).epsilon(1e-12));
        CHECK(rows[i].fc_fwd_norm == doctest::Approx(grid(i)).epsilon(1e-9));
        CHECK(rows[i].fc_bwd_norm ==
              doctest::Approx(1.0 / rows[i].eta_b).epsilon(1e-9));
        CHECK(rows[i].imf == doctest::Approx(frozen_imf[i]).epsilon(1e-9));
        CHECK(rows[i].imf >= 0.0);
        CHECK(rows[i].imf <= 1.0);
        if (i > 0) {
            CHECK(rows[i].imf <= rows[i - 1].imf + 1e-12);
            CHECK(rows[i].fc_bwd_norm >= rows[i - 1].fc_bwd_norm - 1e-12);
        }
    }
}

TEST_CASE("sweep emits infinite backward capability at lock") {
    const RobotModel model = builtin_case_study();
    const std::vector<SweepRow> rows = efficiency_sweep(
        model, model.default_pose, make_vec({0.6, 0.5}), {0.0, 1.0});
    CHECK(std::isfinite(rows[0].fc_bwd_norm));
    CHECK(std::isinf(rows[1].fc_bwd_norm));
    CHECK(rows[1].eta_b == 0.0);
    CHECK(rows[1].imf >= 0.0);

    CHECK_THROWS_AS(efficiency_sweep(model, model.default_pose,
                                     make_vec({1.2}), {0.0, 1.0}),
                    ModelError);
    CHECK_THROWS_AS(efficiency_sweep(fixed_leg(), kPose, make_vec({0.9}),
                                     {0.0, 1.0}),
                    ModelError);
}

}  // TEST_SUITE
