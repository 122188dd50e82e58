#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddyn/dissipative.hpp"
#include "ddyn/metrics.hpp"
#include "ddyn/model_io.hpp"
#include "ddyn/wedge.hpp"

namespace fs = std::filesystem;
using namespace ddyn;

namespace {

std::string f9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// "builtin" names the built-in case-study model; anything else is a path.
RobotModel load_model(const std::string& spec) {
    if (spec == "builtin") return builtin_case_study();
    return parse_model_file(spec);
}

Eigen::VectorXd resolve_pose(const RobotModel& model,
                             const std::vector<double>& vals) {
    if (vals.empty()) return model.default_pose;
    const int m = model.joint_count();
    const int b = model.base_dof;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(b + m);
    if (static_cast<int>(vals.size()) == m) {
        q.tail(m) = Eigen::Map<const Eigen::VectorXd>(vals.data(), m);
    } else if (static_cast<int>(vals.size()) == b + m) {
        q = Eigen::Map<const Eigen::VectorXd>(vals.data(), b + m);
    } else {
        throw ModelError("pose needs " + std::to_string(m) + " or " +
                         std::to_string(b + m) + " values");
    }
    return q;
}

Eigen::Vector2d parse_direction(const std::string& s) {
    if (s == "z") return {0.0, 1.0};
    if (s == "-z") return {0.0, -1.0};
    if (s == "x") return {1.0, 0.0};
    if (s == "-x") return {-1.0, 0.0};
    const size_t comma = s.find(',');
    if (comma != std::string::npos) {
        try {
            const double dx = std::stod(s.substr(0, comma));
            const double dz = std::stod(s.substr(comma + 1));
            return {dx, dz};
        } catch (const std::exception&) {
        }
    }
    throw ModelError("direction must be x, z, -x, -z, or 'dx,dz'");
}

/// "lo:hi:step" (inclusive, step > 0, hi may be below lo) or "a,b,c".
Eigen::VectorXd parse_grid(const std::string& s) {
    std::vector<double> vals;
    if (s.find(':') != std::string::npos) {
        double lo = 0.0, hi = 0.0, step = 0.0;
        char tail = 0;
        if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &tail) != 3 ||
            !(step > 0.0))
            throw ModelError("grid must be 'lo:hi:step' with step > 0");
        const double sgn = hi >= lo ? 1.0 : -1.0;
        const int n = static_cast<int>(std::floor(std::abs(hi - lo) / step + 1e-9)) + 1;
        for (int i = 0; i < n; ++i) vals.push_back(lo + sgn * step * i);
    } else {
        std::string tok;
        std::istringstream in(s);
        while (std::getline(in, tok, ',')) {
            try {
                vals.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ModelError("malformed grid value '" + tok + "'");
            }
        }
    }
    if (vals.empty()) throw ModelError("empty efficiency grid");
    return Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                             static_cast<int>(vals.size()));
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write file: " + path);
    out << content;
    std::cerr << "wrote " << path << "\n";
}

std::vector<MetricVariant> variants_for(const std::string& mode) {
    if (mode == "fwd")
        return {MetricVariant::Conventional, MetricVariant::Forward};
    if (mode == "bwd")
        return {MetricVariant::Conventional, MetricVariant::Backward};
    return {MetricVariant::Conventional, MetricVariant::Forward,
            MetricVariant::Backward};
}

struct WedgeCfg {
    double mu = 0.0;
    double alpha_deg = 0.0;
    double block_mass = 1.0;
    double wedge_mass = 1.0;
};

int run_wedge(const WedgeCfg& cfg) {
    wedge::Params p;
    p.block_mass = cfg.block_mass;
    p.wedge_mass = cfg.wedge_mass;
    p.incline = cfg.alpha_deg * M_PI / 180.0;
    p.friction = cfg.mu;
    p.validate();
    const wedge::Efficiencies eff = wedge::efficiencies(p);
    const double c_fwd = eff.forward_locked
                             ? std::numeric_limits<double>::infinity()
                             : wedge::impedance_coefficient(p, Flow::Fwd);
    const double c_bwd = wedge::impedance_coefficient(p, Flow::Bwd);
    std::cout << wedge_report(eff.eta_f, eff.eta_b, eff.forward_locked, c_fwd,
                              c_bwd);
    return 0;
}

struct AnalyzeCfg {
    std::string model;
    std::vector<double> pose;
    std::string mode = "both";
    std::string metrics;
    std::string direction = "z";
    std::string weighting = "efficiency";
    std::string out_dir;
    bool svg = false;
};

int run_analyze(const AnalyzeCfg& cfg) {
    const RobotModel model = load_model(cfg.model);
    const int m = model.joint_count();
    const Eigen::VectorXd q = resolve_pose(model, cfg.pose);
    const RobotModel fixed =
        model.base_dof == 0 ? model : fixed_base_submodel(model);
    const Eigen::VectorXd q_m = q.tail(m);

    const std::string metrics =
        !cfg.metrics.empty() ? cfg.metrics
                             : (model.base_dof == 3 ? "git,fc,imf" : "git,fc");
    const bool want_git = metrics.find("git") != std::string::npos;
    const bool want_fc = metrics.find("fc") != std::string::npos;
    const bool want_imf = metrics.find("imf") != std::string::npos;
    if (!want_git && !want_fc && !want_imf)
        throw ModelError("no known metric in '" + metrics +
                         "' (expected a subset of git,fc,imf)");

    GitOptions gopts;
    gopts.backward = cfg.weighting == "inertia"
                         ? BackwardWeighting::ConventionalInertia
                         : BackwardWeighting::EfficiencyWeighted;
    const std::vector<MetricVariant> variants = variants_for(cfg.mode);

    if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
    std::string to_stdout;

    if (want_git) {
        std::vector<InertiaTensorResult> results;
        results.reserve(variants.size());
        for (MetricVariant v : variants) results.push_back(git(fixed, q_m, v, gopts));
        const std::string csv = git_csv(results);
        if (cfg.out_dir.empty()) {
            to_stdout += csv;
        } else {
            write_file(cfg.out_dir + "/git.csv", csv);
            if (cfg.svg) write_file(cfg.out_dir + "/git.svg", git_svg(results));
        }
    }
    if (want_fc) {
        std::vector<ForcePolytope> polys;
        polys.reserve(variants.size());
        for (MetricVariant v : variants)
            polys.push_back(force_capability(fixed, q_m, v));
        const std::string csv = fc_csv(polys);
        if (cfg.out_dir.empty()) {
            if (!to_stdout.empty()) to_stdout += "\n";
            to_stdout += csv;
        } else {
            write_file(cfg.out_dir + "/fc.csv", csv);
            if (cfg.svg) write_file(cfg.out_dir + "/fc.svg", fc_svg(polys));
        }
    }
    if (want_imf) {
        const ImfResult r =
            impact_mitigation(model, q, parse_direction(cfg.direction));
        if (!to_stdout.empty()) to_stdout += "\n";
        to_stdout += "imf = " + f9(r.value) + "\n";
    }
    std::cout << to_stdout;
    return 0;
}

struct SweepCfg {
    std::string model;
    std::string grid = "1.0:0.55:0.05";
    std::string direction = "z";
    std::vector<double> pose;
    std::string out;
};

int run_sweep(const SweepCfg& cfg) {
    const RobotModel model = load_model(cfg.model);
    const Eigen::VectorXd q = resolve_pose(model, cfg.pose);
    const std::vector<SweepRow> rows = efficiency_sweep(
        model, q, parse_grid(cfg.grid), parse_direction(cfg.direction));
    const std::string csv = sweep_csv(rows);
    if (cfg.out.empty())
        std::cout << csv;
    else
        write_file(cfg.out, csv);
    return 0;
}

struct CaseStudyCfg {
    std::string out_dir = "out";
    bool svg = false;
};

int run_case_study(const CaseStudyCfg& cfg) {
    const RobotModel model = builtin_case_study();
    const RobotModel fixed = fixed_base_submodel(model);
    const Eigen::VectorXd q_m = model.default_pose.tail(2);
    fs::create_directories(cfg.out_dir);

    std::vector<InertiaTensorResult> gits;
    std::vector<ForcePolytope> fcs;
    for (MetricVariant v : variants_for("both")) {
        gits.push_back(git(fixed, q_m, v));
        fcs.push_back(force_capability(fixed, q_m, v));
    }
    const std::vector<SweepRow> rows =
        efficiency_sweep(model, model.default_pose, parse_grid("1.0:0.55:0.05"),
                         Eigen::Vector2d(0.0, 1.0));

    write_file(cfg.out_dir + "/git.csv", git_csv(gits));
    write_file(cfg.out_dir + "/fc.csv", fc_csv(fcs));
    write_file(cfg.out_dir + "/sweep.csv", sweep_csv(rows));
    if (cfg.svg) {
        write_file(cfg.out_dir + "/git.svg", git_svg(gits));
        write_file(cfg.out_dir + "/fc.svg", fc_svg(fcs));
        write_file(cfg.out_dir + "/sweep.svg", sweep_svg(rows));
    }
    return 0;
}

struct SimulateCfg {
    std::string model;
    double dt = 1e-4;
    int steps = 1000;
    int record_stride = 1;
    std::vector<double> tau;
    std::vector<double> fext;
    std::vector<double> q0;
    std::vector<double> qd0;
    std::string out;
};

int run_simulate(const SimulateCfg& cfg) {
    const RobotModel model = load_model(cfg.model);
    const int m = model.joint_count();
    const int b = model.base_dof;
    if (!(cfg.dt > 0.0)) throw ModelError("time step must be positive");
    if (cfg.steps < 1) throw ModelError("step count must be >= 1");
    if (cfg.record_stride < 1) throw ModelError("record stride must be >= 1");

    Eigen::VectorXd tau = Eigen::VectorXd::Zero(m);
    if (!cfg.tau.empty()) {
        if (static_cast<int>(cfg.tau.size()) != m)
            throw ModelError("tau needs " + std::to_string(m) + " values");
        tau = Eigen::Map<const Eigen::VectorXd>(cfg.tau.data(), m);
    }
    Eigen::Vector2d fext = Eigen::Vector2d::Zero();
    if (!cfg.fext.empty()) {
        if (cfg.fext.size() != 2)
            throw ModelError("fext needs 2 values (x and z)");
        fext << cfg.fext[0], cfg.fext[1];
    }
    const Eigen::VectorXd q = resolve_pose(model, cfg.q0);
    Eigen::VectorXd qd = Eigen::VectorXd::Zero(b + m);
    if (!cfg.qd0.empty()) {
        if (static_cast<int>(cfg.qd0.size()) == m) {
            qd.tail(m) = Eigen::Map<const Eigen::VectorXd>(cfg.qd0.data(), m);
        } else if (static_cast<int>(cfg.qd0.size()) == b + m) {
            qd = Eigen::Map<const Eigen::VectorXd>(cfg.qd0.data(), b + m);
        } else {
            throw ModelError("qd0 needs " + std::to_string(m) + " or " +
                             std::to_string(b + m) + " values");
        }
    }

    OracleOptions opts;
    opts.record_stride = cfg.record_stride;
    const SystemState initial = make_consistent_state(model, q, qd);
    const OracleRun run = simulate_redundant_system(
        model, initial, [tau](double) { return tau; },
        [fext](double) { return fext; }, cfg.dt, cfg.steps, opts);
    const std::string csv = trajectory_csv(run, b, m);
    if (cfg.out.empty())
        std::cout << csv;
    else
        write_file(cfg.out, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dissipative rigid-body dynamics and design metrics for "
                 "geared planar robots"};
    app.require_subcommand(1);

    WedgeCfg wcfg;
    CLI::App* wedge_cmd = app.add_subcommand(
        "wedge", "Closed-form efficiencies and impedance of the wedge-block "
                 "mechanism");
    wedge_cmd->add_option("--mu", wcfg.mu, "Coulomb friction coefficient")
        ->required();
    wedge_cmd
        ->add_option("--alpha-deg", wcfg.alpha_deg, "incline angle in degrees")
        ->required();
    wedge_cmd->add_option("--block-mass", wcfg.block_mass, "output-side mass");
    wedge_cmd->add_option("--wedge-mass", wcfg.wedge_mass, "input-side mass");

    AnalyzeCfg acfg;
    CLI::App* analyze_cmd = app.add_subcommand(
        "analyze", "Task-space inertia, force capability, and impact "
                   "mitigation at a pose");
    analyze_cmd->add_option("model", acfg.model, "model file or 'builtin'")
        ->required();
    analyze_cmd->add_option("--pose", acfg.pose, "joint (or full) pose, rad")
        ->delimiter(',');
    analyze_cmd->add_option("--mode", acfg.mode, "variants to report")
        ->check(CLI::IsMember({"fwd", "bwd", "both"}));
    analyze_cmd->add_option("--metrics", acfg.metrics,
                            "comma list from git,fc,imf");
    analyze_cmd->add_option("--direction", acfg.direction,
                            "impact direction (x, z, or 'dx,dz')");
    analyze_cmd
        ->add_option("--backward-weighting", acfg.weighting,
                     "backward inertia reading")
        ->check(CLI::IsMember({"efficiency", "inertia"}));
    analyze_cmd->add_option("--out-dir", acfg.out_dir,
                            "write CSV files here instead of stdout");
    analyze_cmd->add_flag("--svg", acfg.svg, "also write SVG plots");

    SweepCfg scfg;
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "Force capability and impact mitigation across forward "
                 "efficiencies");
    sweep_cmd->add_option("model", scfg.model, "model file or 'builtin'")
        ->required();
    sweep_cmd->add_option("--eta-f", scfg.grid,
                          "grid 'lo:hi:step' or comma list");
    sweep_cmd->add_option("--direction", scfg.direction,
                          "task direction (x, z, or 'dx,dz')");
    sweep_cmd->add_option("--pose", scfg.pose, "joint (or full) pose, rad")
        ->delimiter(',');
    sweep_cmd->add_option("--out", scfg.out, "output CSV path (default stdout)");

    CaseStudyCfg ccfg;
    CLI::App* case_cmd = app.add_subcommand(
        "case-study", "Emit the built-in two-joint leg study (git.csv, "
                      "fc.csv, sweep.csv)");
    case_cmd->add_option("--out-dir", ccfg.out_dir, "output directory");
    case_cmd->add_flag("--svg", ccfg.svg, "also write SVG plots");

    SimulateCfg mcfg;
    CLI::App* sim_cmd = app.add_subcommand(
        "simulate", "Integrate the redundant-coordinate reference dynamics");
    sim_cmd->add_option("model", mcfg.model, "model file or 'builtin'")
        ->required();
    sim_cmd->add_option("--dt", mcfg.dt, "time step, s");
    sim_cmd->add_option("--steps", mcfg.steps, "number of steps");
    sim_cmd->add_option("--record-stride", mcfg.record_stride,
                        "keep every k-th step");
    sim_cmd->add_option("--tau", mcfg.tau, "constant rotor torques")
        ->delimiter(',');
    sim_cmd->add_option("--fext", mcfg.fext, "constant foot force 'fx,fz'")
        ->delimiter(',');
    sim_cmd->add_option("--q0", mcfg.q0, "initial pose (default: model pose)")
        ->delimiter(',');
    sim_cmd->add_option("--qd0", mcfg.qd0, "initial velocities")
        ->delimiter(',');
    sim_cmd->add_option("--out", mcfg.out, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
        if (wedge_cmd->parsed()) return run_wedge(wcfg);
        if (analyze_cmd->parsed()) return run_analyze(acfg);
        if (sweep_cmd->parsed()) return run_sweep(scfg);
        if (case_cmd->parsed()) return run_case_study(ccfg);
        if (sim_cmd->parsed()) return run_simulate(mcfg);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return ModelError::exit_code;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ModelError::exit_code;
    } catch (const SingularError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return SingularError::exit_code;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return NumericError::exit_code;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return NumericError::exit_code;
    }
}
