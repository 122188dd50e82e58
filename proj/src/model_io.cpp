#include "ddyn/model_io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace ddyn {

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

bool is_set(double v) { return !std::isnan(v); }

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string f17(double v) { return fmt("%.17g", v); }
std::string f9(double v) { return fmt("%.9g", v); }
std::string f6(double v) { return fmt("%.6g", v); }

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ModelError("line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    const size_t from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) return "";
    const size_t to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
}

double parse_number(const std::string& tok, int line) {
    try {
        size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) fail(line, "malformed number '" + tok + "'");
        return v;
    } catch (const ModelError&) {
        throw;
    } catch (const std::exception&) {
        fail(line, "malformed number '" + tok + "'");
    }
}

std::vector<double> parse_numbers(const std::string& value, int line) {
    std::istringstream in(value);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_number(tok, line));
    if (out.empty()) fail(line, "expected at least one number");
    return out;
}

void set_once(double& slot, double v, const std::string& key, int line) {
    if (is_set(slot)) fail(line, "duplicate key '" + key + "'");
    slot = v;
}

struct LinkDraft {
    double mass = kUnset, length = kUnset, com = kUnset, inertia = kUnset;
    int line = 0;
};

struct RotorDraft {
    double inertia = kUnset, tau_max = kUnset;
    int line = 0;
};

/// Broadcast a 1-element vector to length m, keep an m-element one.
Eigen::VectorXd spread(const std::vector<double>& vals, int m,
                       const std::string& what, int line) {
    if (vals.size() == 1) return Eigen::VectorXd::Constant(m, vals[0]);
    if (static_cast<int>(vals.size()) == m)
        return Eigen::Map<const Eigen::VectorXd>(vals.data(), m);
    fail(line, what + " needs 1 or " + std::to_string(m) + " values, got " +
                   std::to_string(vals.size()));
}

}  // namespace

RobotModel parse_model(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::string section;

    bool have_base = false;
    int base_line = 0;
    double base_mass = kUnset, base_side = kUnset, base_inertia = kUnset;
    double base_dof = kUnset;
    std::vector<LinkDraft> links;
    std::vector<RotorDraft> rotors;
    std::vector<double> reduction, eta_f_vals, eta_b_vals, pose_vals;
    int reduction_line = 0, eta_f_line = 0, eta_b_line = 0, pose_line = 0;
    std::vector<std::vector<double>> topo_rows;
    int topo_line = 0;
    std::vector<std::pair<double, double>> map_rows;
    double gravity = kUnset;

    while (std::getline(in, raw)) {
        ++line_no;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                fail(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section == "base") {
                if (have_base) fail(line_no, "only one [base] section is allowed");
                have_base = true;
                base_line = line_no;
            } else if (section == "link") {
                links.push_back({});
                links.back().line = line_no;
            } else if (section == "rotor") {
                rotors.push_back({});
                rotors.back().line = line_no;
            } else if (section != "reduction" && section != "topology" &&
                       section != "efficiency" && section != "pose" &&
                       section != "gravity") {
                fail(line_no, "unknown section [" + section + "]");
            }
            continue;
        }

        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(line_no, "expected 'key = value' or a [section] header");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "missing key before '='");
        if (value.empty()) fail(line_no, "missing value for '" + key + "'");
        if (section.empty())
            fail(line_no, "key '" + key + "' appears outside any section");

        if (section == "base") {
            if (key == "mass") set_once(base_mass, parse_number(value, line_no), key, line_no);
            else if (key == "side") set_once(base_side, parse_number(value, line_no), key, line_no);
            else if (key == "inertia") set_once(base_inertia, parse_number(value, line_no), key, line_no);
            else if (key == "dof") set_once(base_dof, parse_number(value, line_no), key, line_no);
            else fail(line_no, "unknown key '" + key + "' in [base]");
        } else if (section == "link") {
            LinkDraft& l = links.back();
            if (key == "mass") set_once(l.mass, parse_number(value, line_no), key, line_no);
            else if (key == "length") set_once(l.length, parse_number(value, line_no), key, line_no);
            else if (key == "com") set_once(l.com, parse_number(value, line_no), key, line_no);
            else if (key == "inertia") set_once(l.inertia, parse_number(value, line_no), key, line_no);
            else fail(line_no, "unknown key '" + key + "' in [link]");
        } else if (section == "rotor") {
            RotorDraft& r = rotors.back();
            if (key == "inertia") set_once(r.inertia, parse_number(value, line_no), key, line_no);
            else if (key == "tau_max") set_once(r.tau_max, parse_number(value, line_no), key, line_no);
            else fail(line_no, "unknown key '" + key + "' in [rotor]");
        } else if (section == "reduction") {
            if (key != "n") fail(line_no, "unknown key '" + key + "' in [reduction]");
            if (!reduction.empty()) fail(line_no, "duplicate key 'n'");
            reduction = parse_numbers(value, line_no);
            reduction_line = line_no;
        } else if (section == "topology") {
            if (key != "d") fail(line_no, "unknown key '" + key + "' in [topology]");
            topo_rows.push_back(parse_numbers(value, line_no));
            topo_line = line_no;
        } else if (section == "efficiency") {
            if (key == "eta_f") {
                if (!eta_f_vals.empty()) fail(line_no, "duplicate key 'eta_f'");
                eta_f_vals = parse_numbers(value, line_no);
                eta_f_line = line_no;
            } else if (key == "eta_b") {
                if (!eta_b_vals.empty()) fail(line_no, "duplicate key 'eta_b'");
                eta_b_vals = parse_numbers(value, line_no);
                eta_b_line = line_no;
            } else if (key == "map") {
                const std::vector<double> pair = parse_numbers(value, line_no);
                if (pair.size() != 2)
                    fail(line_no, "'map' rows need exactly two values "
                                  "(forward and backward efficiency)");
                map_rows.emplace_back(pair[0], pair[1]);
            } else {
                fail(line_no, "unknown key '" + key + "' in [efficiency]");
            }
        } else if (section == "pose") {
            if (key != "q") fail(line_no, "unknown key '" + key + "' in [pose]");
            if (!pose_vals.empty()) fail(line_no, "duplicate key 'q'");
            pose_vals = parse_numbers(value, line_no);
            pose_line = line_no;
        } else if (section == "gravity") {
            if (key != "g") fail(line_no, "unknown key '" + key + "' in [gravity]");
            set_once(gravity, parse_number(value, line_no), key, line_no);
        }
    }

    const int m = static_cast<int>(links.size());
    if (m == 0) throw ModelError("model needs at least one [link] section");
    if (static_cast<int>(rotors.size()) != m)
        throw ModelError("model needs one [rotor] section per link (got " +
                         std::to_string(rotors.size()) + " rotors for " +
                         std::to_string(m) + " links)");

    RobotModel model;

    // Base.
    int b = 0;
    if (have_base) {
        if (is_set(base_dof)) {
            if (base_dof != 0.0 && base_dof != 3.0)
                fail(base_line, "base dof must be 0 or 3");
            b = static_cast<int>(base_dof);
        }
        if (is_set(base_side) && is_set(base_inertia))
            fail(base_line, "[base] takes either 'side' or 'inertia', not both");
        if (b == 3 && !is_set(base_mass))
            fail(base_line, "a floating base needs 'mass'");
        if (b == 3 && !is_set(base_side) && !is_set(base_inertia))
            fail(base_line, "a floating base needs 'side' or 'inertia'");
        model.base.mass = is_set(base_mass) ? base_mass : 0.0;
        if (is_set(base_inertia)) {
            model.base.inertia = base_inertia;
        } else if (is_set(base_side)) {
            // Uniform square plate spun about its center.
            model.base.inertia = model.base.mass * base_side * base_side / 6.0;
        }
    }
    model.base_dof = b;

    // Links.
    model.links.reserve(links.size());
    for (const LinkDraft& l : links) {
        if (!is_set(l.mass)) fail(l.line, "[link] needs 'mass'");
        if (!is_set(l.length)) fail(l.line, "[link] needs 'length'");
        PlanarBody body;
        body.mass = l.mass;
        body.length = l.length;
        body.com_offset = is_set(l.com) ? l.com : 0.5 * l.length;
        body.inertia_com =
            is_set(l.inertia) ? l.inertia : l.mass * l.length * l.length / 12.0;
        model.links.push_back(body);
    }

    // Rotors.
    model.rotor_inertias.resize(m);
    model.torque_limits = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
        if (!is_set(rotors[i].inertia)) fail(rotors[i].line, "[rotor] needs 'inertia'");
        model.rotor_inertias(i) = rotors[i].inertia;
        if (is_set(rotors[i].tau_max)) {
            if (!(rotors[i].tau_max > 0.0))
                fail(rotors[i].line, "rotor tau_max must be positive");
            model.torque_limits(i) = rotors[i].tau_max;
        }
    }

    // Transmission.
    model.transmission.ratios = reduction.empty()
                                    ? Eigen::VectorXd::Ones(m)
                                    : spread(reduction, m, "'n'", reduction_line);
    if (topo_rows.empty()) {
        model.transmission.topology = Eigen::MatrixXd::Identity(m, m);
    } else {
        if (static_cast<int>(topo_rows.size()) != m)
            fail(topo_line, "[topology] needs " + std::to_string(m) + " 'd' rows");
        model.transmission.topology.resize(m, m);
        for (int r = 0; r < m; ++r) {
            if (static_cast<int>(topo_rows[r].size()) != m)
                fail(topo_line, "each 'd' row needs " + std::to_string(m) + " values");
            for (int c = 0; c < m; ++c)
                model.transmission.topology(r, c) = topo_rows[r][c];
        }
    }
    model.transmission.eta_f =
        eta_f_vals.empty() ? Eigen::VectorXd::Ones(m)
                           : spread(eta_f_vals, m, "'eta_f'", eta_f_line);
    if (!map_rows.empty()) model.eta_map = EfficiencyMap::tabulated(map_rows);
    if (eta_b_vals.empty()) {
        model.transmission.eta_b.resize(m);
        for (int i = 0; i < m; ++i)
            model.transmission.eta_b(i) =
                backward_from_forward(model.transmission.eta_f(i), model.eta_map);
    } else {
        model.transmission.eta_b = spread(eta_b_vals, m, "'eta_b'", eta_b_line);
    }

    // Pose and gravity.
    if (pose_vals.empty()) {
        model.default_pose = Eigen::VectorXd::Zero(b + m);
    } else if (static_cast<int>(pose_vals.size()) == m) {
        model.default_pose = Eigen::VectorXd::Zero(b + m);
        model.default_pose.tail(m) =
            Eigen::Map<const Eigen::VectorXd>(pose_vals.data(), m);
    } else if (static_cast<int>(pose_vals.size()) == b + m) {
        model.default_pose =
            Eigen::Map<const Eigen::VectorXd>(pose_vals.data(), b + m);
    } else {
        fail(pose_line, "'q' needs " + std::to_string(m) + " or " +
                            std::to_string(b + m) + " values");
    }
    if (is_set(gravity)) {
        if (gravity < 0.0) throw ModelError("gravity magnitude must be >= 0");
        model.gravity = gravity;
    }

    // Document-level validation failures are all semantic model errors,
    // including a singular topology matrix; SingularError is reserved for
    // runtime conditions (poses, locked backdriving) on valid models.
    try {
        model.validate();
        constraint_matrices(model.base_dof, model.transmission);
    } catch (const SingularError& e) {
        throw ModelError(e.what());
    }
    return model;
}

RobotModel parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_model(text.str());
}

std::string serialize_model(const RobotModel& model) {
    const int m = model.joint_count();
    std::string out;
    out += "[base]\n";
    out += "dof = " + std::to_string(model.base_dof) + "\n";
    out += "mass = " + f17(model.base.mass) + "\n";
    out += "inertia = " + f17(model.base.inertia) + "\n\n";
    for (int i = 0; i < m; ++i) {
        const PlanarBody& l = model.links[i];
        out += "[link]\n";
        out += "mass = " + f17(l.mass) + "\n";
        out += "length = " + f17(l.length) + "\n";
        out += "com = " + f17(l.com_offset) + "\n";
        out += "inertia = " + f17(l.inertia_com) + "\n\n";
    }
    for (int i = 0; i < m; ++i) {
        out += "[rotor]\n";
        out += "inertia = " + f17(model.rotor_inertias(i)) + "\n";
        if (model.torque_limits.size() == m && model.torque_limits(i) > 0.0)
            out += "tau_max = " + f17(model.torque_limits(i)) + "\n";
        out += "\n";
    }
    out += "[reduction]\nn =";
    for (int i = 0; i < m; ++i) out += " " + f17(model.transmission.ratios(i));
    out += "\n\n[topology]\n";
    for (int r = 0; r < m; ++r) {
        out += "d =";
        for (int c = 0; c < m; ++c)
            out += " " + f17(model.transmission.topology(r, c));
        out += "\n";
    }
    out += "\n[efficiency]\neta_f =";
    for (int i = 0; i < m; ++i) out += " " + f17(model.transmission.eta_f(i));
    out += "\neta_b =";
    for (int i = 0; i < m; ++i) out += " " + f17(model.transmission.eta_b(i));
    out += "\n";
    for (const auto& [ef, eb] : model.eta_map.table())
        out += "map = " + f17(ef) + " " + f17(eb) + "\n";
    out += "\n[pose]\nq =";
    for (int i = 0; i < model.default_pose.size(); ++i)
        out += " " + f17(model.default_pose(i));
    out += "\n\n[gravity]\ng = " + f17(model.gravity) + "\n";
    return out;
}

RobotModel builtin_case_study() {
    RobotModel model;
    model.base_dof = 3;
    model.base.mass = 15.0;
    model.base.inertia = 15.0 * 0.5 * 0.5 / 6.0;

    PlanarBody link;
    link.mass = 2.0;
    link.length = 0.4;
    link.com_offset = 0.2;
    link.inertia_com = link.mass * link.length * link.length / 12.0;
    model.links = {link, link};

    const double ratio = 20.0;
    model.rotor_inertias =
        Eigen::VectorXd::Constant(2, link.inertia_com / (ratio * ratio));
    model.torque_limits = Eigen::VectorXd::Constant(2, 20.0);

    model.transmission.ratios = Eigen::VectorXd::Constant(2, ratio);
    model.transmission.topology = Eigen::MatrixXd::Identity(2, 2);
    model.transmission.eta_f.resize(2);
    model.transmission.eta_f << 0.8, 0.7;
    model.transmission.eta_b.resize(2);
    for (int i = 0; i < 2; ++i)
        model.transmission.eta_b(i) =
            backward_from_forward(model.transmission.eta_f(i));

    model.gravity = 9.81;
    const double third = M_PI / 3.0;
    model.default_pose.resize(5);
    model.default_pose << 0.0, 0.0, 0.0, third, third;
    model.validate();
    return model;
}

namespace {

std::string tensor_row(const std::string& label, const Eigen::MatrixXd& t) {
    double m00 = t(0, 0), m01 = 0.0, m10 = 0.0, m11 = 0.0;
    if (t.rows() == 2) {
        m01 = t(0, 1);
        m10 = t(1, 0);
        m11 = t(1, 1);
    }
    return label + "," + f9(m00) + "," + f9(m01) + "," + f9(m10) + "," +
           f9(m11) + "\n";
}

}  // namespace

std::string git_csv(const std::vector<InertiaTensorResult>& results) {
    std::string out;
    for (const InertiaTensorResult& r : results)
        out += std::string("# ") + variant_name(r.variant) + ": " +
               r.weighting_note + "\n";
    out += "variant,m00,m01,m10,m11\n";
    for (const InertiaTensorResult& r : results) {
        out += tensor_row(variant_name(r.variant), r.tensor);
        if (r.variant == MetricVariant::Forward)
            out += tensor_row("forward_symmetric", r.symmetric_part);
    }
    return out;
}

std::string fc_csv(const std::vector<ForcePolytope>& polytopes) {
    std::string out = "variant,vertex,fx,fz\n";
    for (const ForcePolytope& p : polytopes)
        for (size_t i = 0; i < p.vertices.size(); ++i)
            out += std::string(variant_name(p.variant)) + "," +
                   std::to_string(i) + "," + f9(p.vertices[i](0)) + "," +
                   f9(p.vertices[i](1)) + "\n";
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "eta_f,eta_b,fc_fwd_norm,fc_bwd_norm,imf\n";
    for (const SweepRow& r : rows)
        out += f9(r.eta_f) + "," + f9(r.eta_b) + "," + f9(r.fc_fwd_norm) +
               "," + f9(r.fc_bwd_norm) + "," + f9(r.imf) + "\n";
    return out;
}

std::string trajectory_csv(const OracleRun& run, int base_dof, int joints) {
    const int b = base_dof;
    const int m = joints;
    std::string out = "t";
    if (b == 3) out += ",x_b,z_b,th_b";
    for (int i = 1; i <= m; ++i) out += ",q" + std::to_string(i);
    for (int i = 1; i <= m; ++i) out += ",phi" + std::to_string(i);
    if (b == 3) out += ",xd_b,zd_b,thd_b";
    for (int i = 1; i <= m; ++i) out += ",qd" + std::to_string(i);
    for (int i = 1; i <= m; ++i) out += ",phid" + std::to_string(i);
    for (int i = 1; i <= m; ++i) out += ",lam" + std::to_string(i);
    for (int i = 1; i <= m; ++i) out += ",dir" + std::to_string(i);
    out += ",power_loss,dissipated\n";
    for (const OracleStep& st : run.steps) {
        out += f9(st.t);
        for (int i = 0; i < b + 2 * m; ++i) out += "," + f9(st.s(i));
        for (int i = 0; i < b + 2 * m; ++i) out += "," + f9(st.sd(i));
        for (int i = 0; i < m; ++i) out += "," + f9(st.lambda(i));
        for (int i = 0; i < m; ++i)
            out += std::string(",") + flow_name(st.directions[i]);
        out += "," + f9(st.power_loss) + "," + f9(st.dissipated) + "\n";
    }
    return out;
}

std::string wedge_report(double eta_f, double eta_b, bool forward_locked,
                         double c_fwd, double c_bwd) {
    std::string out;
    out += "eta_f          = " + f9(eta_f) + "\n";
    out += "eta_b          = " + f9(eta_b) + "\n";
    out += std::string("forward_locked = ") + (forward_locked ? "yes" : "no") +
           "\n";
    out += "impedance_fwd  = " + f9(c_fwd) + "\n";
    out += "impedance_bwd  = " + f9(c_bwd) + "\n";
    return out;
}

namespace {

const char* variant_color(MetricVariant v) {
    switch (v) {
        case MetricVariant::Conventional: return "#777777";
        case MetricVariant::Forward: return "#1f77b4";
        case MetricVariant::Backward: return "#d62728";
    }
    return "#000000";
}

std::string svg_open(double w, double h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + f6(w) +
           " " + f6(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
}

std::string svg_legend(const std::vector<MetricVariant>& variants, double x,
                       double y) {
    std::string out;
    for (size_t i = 0; i < variants.size(); ++i) {
        const double yy = y + 18.0 * static_cast<double>(i);
        out += "<rect x=\"" + f6(x) + "\" y=\"" + f6(yy - 10.0) +
               "\" width=\"12\" height=\"12\" fill=\"" +
               variant_color(variants[i]) + "\"/>\n";
        out += "<text x=\"" + f6(x + 18.0) + "\" y=\"" + f6(yy) + "\">" +
               variant_name(variants[i]) + "</text>\n";
    }
    return out;
}

}  // namespace

std::string git_svg(const std::vector<InertiaTensorResult>& results) {
    const double w = 420.0, h = 420.0, cx = w / 2.0, cy = h / 2.0;
    double max_axis = 0.0;
    std::vector<std::array<double, 3>> shapes;  // a, b, angle (deg)
    std::vector<MetricVariant> variants;
    for (const InertiaTensorResult& r : results) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.symmetric_part);
        const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
        if (r.symmetric_part.rows() == 1) {
            shapes.push_back({std::sqrt(ev(0)), 0.05 * std::sqrt(ev(0)), 0.0});
        } else {
            const double angle =
                std::atan2(es.eigenvectors()(1, 1), es.eigenvectors()(0, 1)) *
                180.0 / M_PI;
            shapes.push_back({std::sqrt(ev(1)), std::sqrt(ev(0)), angle});
        }
        variants.push_back(r.variant);
        max_axis = std::max(max_axis, shapes.back()[0]);
    }
    const double scale = max_axis > 0.0 ? 0.42 * w / max_axis : 1.0;
    std::string out = svg_open(w, h);
    out += "<line x1=\"0\" y1=\"" + f6(cy) + "\" x2=\"" + f6(w) + "\" y2=\"" +
           f6(cy) + "\" stroke=\"#cccccc\"/>\n";
    out += "<line x1=\"" + f6(cx) + "\" y1=\"0\" x2=\"" + f6(cx) +
           "\" y2=\"" + f6(h) + "\" stroke=\"#cccccc\"/>\n";
    for (size_t i = 0; i < shapes.size(); ++i) {
        out += "<ellipse cx=\"0\" cy=\"0\" rx=\"" + f6(shapes[i][0] * scale) +
               "\" ry=\"" + f6(shapes[i][1] * scale) +
               "\" fill=\"none\" stroke-width=\"2\" stroke=\"" +
               variant_color(variants[i]) + "\" transform=\"translate(" +
               f6(cx) + " " + f6(cy) + ") rotate(" + f6(-shapes[i][2]) +
               ")\"/>\n";
    }
    out += svg_legend(variants, 16.0, 24.0);
    out += "<text x=\"" + f6(w - 140.0) + "\" y=\"" + f6(h - 12.0) +
           "\">task-space inertia</text>\n</svg>\n";
    return out;
}

std::string fc_svg(const std::vector<ForcePolytope>& polytopes) {
    const double w = 420.0, h = 420.0, cx = w / 2.0, cy = h / 2.0;
    double max_f = 0.0;
    for (const ForcePolytope& p : polytopes)
        for (const Eigen::Vector2d& v : p.vertices)
            max_f = std::max({max_f, std::abs(v(0)), std::abs(v(1))});
    const double scale = max_f > 0.0 ? 0.45 * w / max_f : 1.0;
    std::string out = svg_open(w, h);
    out += "<line x1=\"0\" y1=\"" + f6(cy) + "\" x2=\"" + f6(w) + "\" y2=\"" +
           f6(cy) + "\" stroke=\"#cccccc\"/>\n";
    out += "<line x1=\"" + f6(cx) + "\" y1=\"0\" x2=\"" + f6(cx) +
           "\" y2=\"" + f6(h) + "\" stroke=\"#cccccc\"/>\n";
    std::vector<MetricVariant> variants;
    for (const ForcePolytope& p : polytopes) {
        variants.push_back(p.variant);
        std::string pts;
        for (const Eigen::Vector2d& v : p.vertices) {
            if (!pts.empty()) pts += " ";
            pts += f6(cx + v(0) * scale) + "," + f6(cy - v(1) * scale);
        }
        out += "<polygon points=\"" + pts +
               "\" fill=\"none\" stroke-width=\"2\" stroke=\"" +
               variant_color(p.variant) + "\"/>\n";
    }
    out += svg_legend(variants, 16.0, 24.0);
    out += "<text x=\"" + f6(w - 150.0) + "\" y=\"" + f6(h - 12.0) +
           "\">quasi-static force set</text>\n</svg>\n";
    return out;
}

std::string sweep_svg(const std::vector<SweepRow>& rows) {
    const double w = 480.0, h = 320.0;
    const double x0 = 50.0, x1 = w - 20.0, y0 = h - 40.0, y1 = 20.0;
    double ef_min = 1.0, ef_max = 0.0, v_max = 1.0;
    for (const SweepRow& r : rows) {
        ef_min = std::min(ef_min, r.eta_f);
        ef_max = std::max(ef_max, r.eta_f);
        v_max = std::max(v_max, r.fc_fwd_norm);
        if (std::isfinite(r.fc_bwd_norm)) v_max = std::max(v_max, r.fc_bwd_norm);
    }
    if (!(ef_max > ef_min)) ef_max = ef_min + 1.0;
    auto px = [&](double ef) {
        return x0 + (ef - ef_min) / (ef_max - ef_min) * (x1 - x0);
    };
    auto py = [&](double v) { return y0 - v / v_max * (y0 - y1); };
    auto polyline = [&](const char* color, auto value, bool scaled_to_one) {
        std::string pts;
        for (const SweepRow& r : rows) {
            const double v = value(r);
            if (!std::isfinite(v)) continue;
            if (!pts.empty()) pts += " ";
            pts += f6(px(r.eta_f)) + "," +
                   f6(scaled_to_one ? y0 - v * (y0 - y1) : py(v));
        }
        return "<polyline points=\"" + pts +
               "\" fill=\"none\" stroke-width=\"2\" stroke=\"" + color +
               "\"/>\n";
    };
    std::string out = svg_open(w, h);
    out += "<line x1=\"" + f6(x0) + "\" y1=\"" + f6(y0) + "\" x2=\"" + f6(x1) +
           "\" y2=\"" + f6(y0) + "\" stroke=\"#444444\"/>\n";
    out += "<line x1=\"" + f6(x0) + "\" y1=\"" + f6(y0) + "\" x2=\"" + f6(x0) +
           "\" y2=\"" + f6(y1) + "\" stroke=\"#444444\"/>\n";
    out += polyline("#1f77b4", [](const SweepRow& r) { return r.fc_fwd_norm; },
                    false);
    out += polyline("#d62728", [](const SweepRow& r) { return r.fc_bwd_norm; },
                    false);
    out += polyline("#2ca02c", [](const SweepRow& r) { return r.imf; }, true);
    out += "<text x=\"" + f6((x0 + x1) / 2.0 - 30.0) + "\" y=\"" +
           f6(h - 10.0) + "\">forward efficiency</text>\n";
    out += "<text x=\"" + f6(x0 + 8.0) + "\" y=\"" + f6(y1 + 12.0) +
           "\" fill=\"#1f77b4\">force fwd (norm.)</text>\n";
    out += "<text x=\"" + f6(x0 + 8.0) + "\" y=\"" + f6(y1 + 28.0) +
           "\" fill=\"#d62728\">force bwd (norm.)</text>\n";
    out += "<text x=\"" + f6(x0 + 8.0) + "\" y=\"" + f6(y1 + 44.0) +
           "\" fill=\"#2ca02c\">impact mitigation (0-1 scale)</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace ddyn
