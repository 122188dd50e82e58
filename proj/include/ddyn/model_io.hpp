#pragma once

#include <string>
#include <vector>

#include "ddyn/metrics.hpp"
#include "ddyn/rigid_body.hpp"

namespace ddyn {

/// Parses the sectioned text model format (see README for the grammar).
/// Throws ModelError on syntax or semantic problems (line-numbered where
/// a specific line is at fault); that includes a singular topology matrix,
/// since a document describing an unusable drivetrain is an invalid model.
RobotModel parse_model(const std::string& text);

/// Reads and parses a model file; missing/unreadable files raise
/// ModelError.
RobotModel parse_model_file(const std::string& path);

/// Canonical text form; parse(serialize(m)) == m field-wise (floats are
/// written with 17 significant digits).
std::string serialize_model(const RobotModel& model);

/// The built-in 2-DoF planar leg on a floating square torso: 15 kg, 0.5 m
/// torso; two 2 kg, 0.4 m uniform links; 20:1 reductions with forward
/// efficiencies (0.8, 0.7); 20 N m rotor torque bounds; rotor inertia
/// chosen so the reflected inertia equals the link COM inertia; bent pose
/// q1 = q2 = pi/3.
RobotModel builtin_case_study();

/// CSV emitters. All numbers are printed with %.9g, '.' decimal separator
/// and '\n' line endings so identical inputs serialize byte-identically.
std::string git_csv(const std::vector<InertiaTensorResult>& results);
std::string fc_csv(const std::vector<ForcePolytope>& polytopes);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string trajectory_csv(const OracleRun& run, int base_dof, int joints);

/// Wedge report (eta, impedance coefficients) as aligned key = value text.
std::string wedge_report(double eta_f, double eta_b, bool forward_locked,
                         double c_fwd, double c_bwd);

/// Presentational SVG plots; CSV remains the data contract.
std::string git_svg(const std::vector<InertiaTensorResult>& results);
std::string fc_svg(const std::vector<ForcePolytope>& polytopes);
std::string sweep_svg(const std::vector<SweepRow>& rows);

}  // namespace ddyn
