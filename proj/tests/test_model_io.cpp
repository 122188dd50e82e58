#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "ddyn/metrics.hpp"
#include "ddyn/model_io.hpp"

using namespace ddyn;

namespace {

/// Parses `text`, expecting a ModelError whose message contains `needle`.
void expect_parse_error(const std::string& text, const std::string& needle) {
    try {
        parse_model(text);
        FAIL_CHECK("expected ModelError for:\n" << text);
    } catch (const ModelError& e) {
        const std::string msg = e.what();
        CHECK_MESSAGE(msg.find(needle) != std::string::npos,
                      "message '" << msg << "' lacks '" << needle << "'");
    }
}

const char* kMinimalDoc =
    "[link]\n"
    "mass = 1.5\n"
    "length = 0.5\n"
    "\n"
    "[rotor]\n"
    "inertia = 0.0001\n";

const char* kFullDoc =
    "# planar leg with a serially coupled second joint\n"
    "[base]\n"
    "dof = 3\n"
    "mass = 12\n"
    "side = 0.4\n"
    "\n"
    "[link]\n"
    "mass = 1.2\n"
    "length = 0.35\n"
    "com = 0.15\n"
    "inertia = 0.011\n"
    "\n"
    "[link]\n"
    "mass = 0.9\n"
    "length = 0.3\n"
    "\n"
    "[rotor]\n"
    "inertia = 5e-5\n"
    "tau_max = 18\n"
    "\n"
    "[rotor]\n"
    "inertia = 4e-5\n"
    "tau_max = 15\n"
    "\n"
    "[reduction]\n"
    "n = 16 24\n"
    "\n"
    "[topology]\n"
    "d = 1 0\n"
    "d = -1 1\n"
    "\n"
    "[efficiency]\n"
    "eta_f = 0.85 0.75\n"
    "map = 0.6 0.3\n"
    "map = 0.9 0.85\n"
    "\n"
    "[pose]\n"
    "q = 0.1 -0.2 0.05 0.6 0.9\n"
    "\n"
    "[gravity]\n"
    "g = 9.81\n";

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("built-in case study carries the documented parameters") {
    const RobotModel model = builtin_case_study();
    CHECK(model.base_dof == 3);
    CHECK(model.base.mass == 15.0);
    CHECK(model.base.inertia == doctest::Approx(0.625).epsilon(1e-12));
    REQUIRE(model.links.size() == 2);
    CHECK(model.links[0].mass == 2.0);
    CHECK(model.links[0].length == 0.4);
    CHECK(model.links[0].com_offset == 0.2);
    CHECK(model.rotor_inertias(0) ==
          doctest::Approx(6.6666666666666683e-05).epsilon(1e-9));
    CHECK(model.transmission.ratios(0) == 20.0);
    CHECK(model.transmission.eta_f(0) == 0.8);
    CHECK(model.transmission.eta_f(1) == 0.7);
    CHECK(model.transmission.eta_b(0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(model.transmission.eta_b(1) ==
          doctest::Approx(0.5714285714285714).epsilon(1e-12));
    CHECK(model.torque_limits(0) == 20.0);
    CHECK(model.gravity == 9.81);
    CHECK(model.default_pose(3) == doctest::Approx(M_PI / 3.0).epsilon(1e-15));
    // Reflected rotor inertia matches the link COM inertia by construction.
    CHECK(model.rotor_inertias(0) * 400.0 ==
          doctest::Approx(model.links[0].inertia_com).epsilon(1e-12));
}

TEST_CASE("a minimal document fills in every default") {
    const RobotModel model = parse_model(kMinimalDoc);
    CHECK(model.base_dof == 0);
    REQUIRE(model.links.size() == 1);
    CHECK(model.links[0].com_offset == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(model.links[0].inertia_com ==
          doctest::Approx(1.5 * 0.5 * 0.5 / 12.0).epsilon(1e-15));
    CHECK(model.transmission.ratios(0) == 1.0);
    CHECK(model.transmission.topology(0, 0) == 1.0);
    CHECK(model.transmission.eta_f(0) == 1.0);
    CHECK(model.transmission.eta_b(0) == 1.0);
    CHECK(model.torque_limits(0) == 0.0);
    CHECK(model.gravity == 9.81);
    REQUIRE(model.default_pose.size() == 1);
    CHECK(model.default_pose(0) == 0.0);
    CHECK(!model.eta_map.is_tabulated());
}

TEST_CASE("comments, blank lines, and broadcast values are accepted") {
    const RobotModel model = parse_model(
        "# two identical joints\n"
        "[link]\nmass = 1\nlength = 0.2\n"
        "[link]\nmass = 1\nlength = 0.2\n"
        "[rotor]\ninertia = 1e-5\n"
        "[rotor]\ninertia = 1e-5\n"
        "\n"
        "[reduction]\n"
        "n = 9   # same reduction on both joints\n"
        "[efficiency]\n"
        "eta_f = 0.9\n"
        "[pose]\n"
        "q = 0.3 -0.3\n");
    CHECK(model.transmission.ratios(1) == 9.0);
    CHECK(model.transmission.eta_f(1) == 0.9);
    CHECK(model.default_pose(1) == -0.3);
}

TEST_CASE("full document parses with tabulated backward efficiencies") {
    const RobotModel model = parse_model(kFullDoc);
    CHECK(model.base_dof == 3);
    CHECK(model.base.inertia == doctest::Approx(12.0 * 0.16 / 6.0).epsilon(1e-12));
    CHECK(model.links[1].com_offset == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(model.transmission.topology(1, 0) == -1.0);
    CHECK(model.eta_map.is_tabulated());
    // Linear interpolation between (0.6, 0.3) and (0.9, 0.85).
    CHECK(model.transmission.eta_b(0) ==
          doctest::Approx(0.3 + (0.25 / 0.3) * 0.55).epsilon(1e-12));
    CHECK(model.transmission.eta_b(1) == doctest::Approx(0.575).epsilon(1e-12));
    REQUIRE(model.default_pose.size() == 5);
    CHECK(model.default_pose(4) == 0.9);
}

TEST_CASE("explicit backward efficiencies override the map") {
    const RobotModel model = parse_model(
        "[link]\nmass = 1\nlength = 1\n"
        "[rotor]\ninertia = 1e-4\n"
        "[efficiency]\neta_f = 0.8\neta_b = 0.6\nmap = 0.8 0.9\n");
    CHECK(model.transmission.eta_b(0) == 0.6);
    CHECK(model.eta_map.is_tabulated());

    const RobotModel mapped = parse_model(
        "[link]\nmass = 1\nlength = 1\n"
        "[rotor]\ninertia = 1e-4\n"
        "[efficiency]\neta_f = 0.8\nmap = 0.8 0.9\n");
    CHECK(mapped.transmission.eta_b(0) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("round trip preserves every field") {
    const RobotModel builtin = builtin_case_study();
    CHECK(parse_model(serialize_model(builtin)) == builtin);

    const RobotModel full = parse_model(kFullDoc);
    const std::string text = serialize_model(full);
    const RobotModel again = parse_model(text);
    CHECK(again == full);
    CHECK(serialize_model(again) == text);
}

TEST_CASE("file loading reports missing paths as model errors") {
    const std::string path = "/tmp/ddyn_roundtrip_model.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << serialize_model(builtin_case_study());
    }
    CHECK(parse_model_file(path) == builtin_case_study());
    std::remove(path.c_str());

    try {
        parse_model_file("/tmp/ddyn_no_such_model.txt");
        FAIL_CHECK("expected ModelError for a missing file");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()).find("cannot open") != std::string::npos);
    }
}

TEST_CASE("syntax errors carry the offending line number") {
    expect_parse_error("[link]\nmass = abc\n", "line 2");
    expect_parse_error("[link]\nmass = abc\n", "malformed number");
    expect_parse_error("[link]\nmass = 1\nmass = 2\n", "line 3");
    expect_parse_error("[link]\nmass = 1\nmass = 2\n", "duplicate key");
    expect_parse_error("[gearbox]\n", "unknown section");
    expect_parse_error("[base]\ncolour = red\n", "unknown key");
    expect_parse_error("[link]\nmass 3\n", "expected 'key = value'");
    expect_parse_error("mass = 3\n", "outside any section");
    expect_parse_error("[link\n", "unterminated section header");
    expect_parse_error("[link]\nmass = \n", "missing value");
}

TEST_CASE("semantic errors are rejected") {
    expect_parse_error("", "at least one [link]");
    expect_parse_error("[link]\nlength = 1\n[rotor]\ninertia = 1e-4\n",
                       "[link] needs 'mass'");
    expect_parse_error("[link]\nmass = 1\n[rotor]\ninertia = 1e-4\n",
                       "[link] needs 'length'");
    expect_parse_error("[link]\nmass = 1\nlength = 1\n[rotor]\ntau_max = 3\n",
                       "[rotor] needs 'inertia'");
    expect_parse_error("[link]\nmass = 1\nlength = 1\n",
                       "one [rotor] section per link");
    expect_parse_error(
        "[base]\ndof = 3\nmass = 1\nside = 1\ninertia = 0.2\n"
        "[link]\nmass = 1\nlength = 1\n[rotor]\ninertia = 1e-4\n",
        "either 'side' or 'inertia'");
    expect_parse_error(
        "[base]\ndof = 2\n[link]\nmass = 1\nlength = 1\n[rotor]\ninertia = 1e-4\n",
        "base dof must be 0 or 3");
    expect_parse_error(
        "[base]\ndof = 3\nside = 1\n[link]\nmass = 1\nlength = 1\n"
        "[rotor]\ninertia = 1e-4\n",
        "floating base needs 'mass'");
    expect_parse_error(
        "[link]\nmass = 1\nlength = 1\n[rotor]\ninertia = 1e-4\ntau_max = 0\n",
        "tau_max must be positive");
    expect_parse_error(
        "[link]\nmass = 1\nlength = 1\n[rotor]\ninertia = 1e-4\n"
        "[efficiency]\nmap = 0.5 0.4 0.3\n",
        "exactly two values");
    expect_parse_error(
        "[link]\nmass = 1\nlength = 1\n[rotor]\ninertia = 1e-4\n"
        "[pose]\nq = 0.1 0.2\n",
        "'q' needs 1 or 1 values");
    expect_parse_error(
        "[link]\nmass = 1\nlength = 1\n[rotor]\ninertia = 1e-4\n"
        "[gravity]\ng = -9.81\n",
        "gravity magnitude");
    expect_parse_error(
        "[link]\nmass = 1\nlength = 1\n[link]\nmass = 1\nlength = 1\n"
        "[rotor]\ninertia = 1e-4\n[rotor]\ninertia = 1e-4\n"
        "[topology]\nd = 1 0\n",
        "needs 2 'd' rows");
    expect_parse_error(
        "[link]\nmass = 1\nlength = 1\n[link]\nmass = 1\nlength = 1\n"
        "[rotor]\ninertia = 1e-4\n[rotor]\ninertia = 1e-4\n"
        "[efficiency]\neta_f = 0.9 0.8 0.7\n",
        "needs 1 or 2 values");
}

TEST_CASE("documents describing unusable drivetrains are invalid models") {
    // A non-invertible coupling matrix is a document problem, not a runtime
    // singularity: it must surface as ModelError.
    const std::string singular_topology =
        "[link]\nmass = 1\nlength = 1\n[link]\nmass = 1\nlength = 1\n"
        "[rotor]\ninertia = 1e-4\n[rotor]\ninertia = 1e-4\n"
        "[topology]\nd = 1 1\nd = 1 1\n";
    CHECK_THROWS_AS(parse_model(singular_topology), ModelError);

    // eta_f = 0.5 maps to eta_b = 0 under the default map: such a coupling
    // cannot be backdriven at all and is rejected at parse time.
    const std::string locked =
        "[link]\nmass = 1\nlength = 1\n[rotor]\ninertia = 1e-4\n"
        "[efficiency]\neta_f = 0.5\n";
    CHECK_THROWS_AS(parse_model(locked), ModelError);
}

TEST_CASE("tensor table serializes with stable nine-digit rows") {
    const RobotModel leg = fixed_base_submodel(builtin_case_study());
    const Eigen::VectorXd q = leg.default_pose;
    std::vector<InertiaTensorResult> results = {
        git(leg, q, MetricVariant::Conventional),
        git(leg, q, MetricVariant::Forward),
        git(leg, q, MetricVariant::Backward)};
    const std::string csv = git_csv(results);
    CHECK(csv.find("variant,m00,m01,m10,m11\n") != std::string::npos);
    CHECK(csv.find("conventional,1.5,-1.25092558,-1.25092558,3.16666667\n") !=
          std::string::npos);
    CHECK(csv.find("forward_symmetric,") != std::string::npos);
    CHECK(csv.rfind("# conventional:", 0) == 0);
    CHECK(csv == git_csv(results));

    // One-link tensors are 1x1; the remaining columns pad with zeros.
    const RobotModel arm = parse_model(
        "[link]\nmass = 1\nlength = 1\ncom = 1\ninertia = 0\n"
        "[rotor]\ninertia = 0.01\ntau_max = 20\n[reduction]\nn = 10\n"
        "[efficiency]\neta_f = 0.8\neta_b = 0.75\n[gravity]\ng = 0\n");
    const std::string one = git_csv({git(arm, arm.default_pose,
                                         MetricVariant::Conventional)});
    CHECK(one.find("conventional,2,0,0,0\n") != std::string::npos);
}

TEST_CASE("polytope and sweep tables are deterministic") {
    const RobotModel leg = fixed_base_submodel(builtin_case_study());
    const Eigen::VectorXd q = leg.default_pose;
    std::vector<ForcePolytope> polys = {
        force_capability(leg, q, MetricVariant::Conventional),
        force_capability(leg, q, MetricVariant::Forward),
        force_capability(leg, q, MetricVariant::Backward)};
    const std::string fc = fc_csv(polys);
    CHECK(fc.rfind("variant,vertex,fx,fz\n", 0) == 0);
    CHECK(fc.find("conventional,0,-577.350269,-1000\n") != std::string::npos);
    CHECK(fc == fc_csv(polys));

    const RobotModel model = builtin_case_study();
    Eigen::VectorXd grid(3);
    grid << 0.7, 0.6, 0.5;
    const std::vector<SweepRow> rows =
        efficiency_sweep(model, model.default_pose, grid, {0.0, 1.0});
    const std::string sweep = sweep_csv(rows);
    CHECK(sweep.rfind("eta_f,eta_b,fc_fwd_norm,fc_bwd_norm,imf\n", 0) == 0);
    // The locked row prints an explicit infinity marker.
    CHECK(sweep.find(",inf,") != std::string::npos);
    CHECK(sweep.find("0.5,0,0.5,inf,") != std::string::npos);
    CHECK(sweep == sweep_csv(rows));
}

TEST_CASE("trajectory table lists states, mesh forces, and flow directions") {
    const RobotModel leg = fixed_base_submodel(builtin_case_study());
    Eigen::VectorXd q(2), qd(2), tau(2);
    q << M_PI / 3.0, M_PI / 3.0;
    qd << 0.0, 0.0;
    tau << 0.8, 0.5;
    OracleOptions opts;
    const OracleRun run = simulate_redundant_system(
        leg, make_consistent_state(leg, q, qd),
        [&](double) { return tau; }, nullptr, 1e-4, 10, opts);
    const std::string csv = trajectory_csv(run, 0, 2);
    CHECK(csv.rfind("t,q1,q2,phi1,phi2,qd1,qd2,phid1,phid2,"
                    "lam1,lam2,dir1,dir2,power_loss,dissipated\n",
                    0) == 0);
    const size_t lines = static_cast<size_t>(
        std::count(csv.begin(), csv.end(), '\n'));
    CHECK(lines == run.steps.size() + 1);
    CHECK(csv.find(",fwd,") != std::string::npos);

    const RobotModel floating = builtin_case_study();
    const OracleRun free_fall = simulate_redundant_system(
        floating,
        make_consistent_state(floating, floating.default_pose,
                              Eigen::VectorXd::Zero(5)),
        [](double) { return Eigen::VectorXd::Zero(2); }, nullptr, 1e-4, 5,
        opts);
    const std::string fcsv = trajectory_csv(free_fall, 3, 2);
    CHECK(fcsv.rfind("t,x_b,z_b,th_b,q1,q2,phi1,phi2,xd_b,zd_b,thd_b,", 0) == 0);
}

TEST_CASE("wedge report prints aligned key = value text") {
    const std::string report = wedge_report(0.8, 5.0 / 6.0, false, 3.25, 3.4);
    CHECK(report ==
          "eta_f          = 0.8\n"
          "eta_b          = 0.833333333\n"
          "forward_locked = no\n"
          "impedance_fwd  = 3.25\n"
          "impedance_bwd  = 3.4\n");
    CHECK(wedge_report(0.1, 0.2, true, INFINITY, 1.0)
              .find("forward_locked = yes") != std::string::npos);
}

TEST_CASE("svg plots are well-formed and deterministic") {
    const RobotModel leg = fixed_base_submodel(builtin_case_study());
    const Eigen::VectorXd q = leg.default_pose;
    std::vector<InertiaTensorResult> tensors = {
        git(leg, q, MetricVariant::Conventional),
        git(leg, q, MetricVariant::Forward)};
    const std::string ellipses = git_svg(tensors);
    CHECK(ellipses.find("<svg") != std::string::npos);
    CHECK(ellipses.find("</svg>") != std::string::npos);
    CHECK(ellipses.find("<ellipse") != std::string::npos);
    CHECK(ellipses == git_svg(tensors));

    std::vector<ForcePolytope> polys = {
        force_capability(leg, q, MetricVariant::Backward)};
    const std::string polygons = fc_svg(polys);
    CHECK(polygons.find("<polygon") != std::string::npos);

    const RobotModel model = builtin_case_study();
    Eigen::VectorXd grid(4);
    grid << 1.0, 0.9, 0.8, 0.7;
    const std::vector<SweepRow> rows =
        efficiency_sweep(model, model.default_pose, grid, {0.0, 1.0});
    const std::string lines = sweep_svg(rows);
    CHECK(lines.find("<polyline") != std::string::npos);
    CHECK(lines == sweep_svg(rows));
}

}  // TEST_SUITE
