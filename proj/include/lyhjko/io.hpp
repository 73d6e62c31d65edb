#pragma once

// Text artifacts: columnar node files for grid fields, trajectory and flow
// directories with hashed manifests, fixed-column CSV tables per report
// type, and small standalone SVG line charts.  Floats print with 17
// significant digits everywhere so round trips are bit exact.

#include <lyhjko/jko.hpp>
#include <lyhjko/pde.hpp>
#include <lyhjko/verify.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lyhjko {

std::string format_g17(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// '# torus-field dim=<d> n=<n> t=<time>', then one '<indices> <value>' line
// per node, row major in 2d
void write_field(const std::filesystem::path& path, const PeriodicGrid& g,
                 const ArrayXd& values, double t);

struct FieldFile {
  PeriodicGrid grid;
  ArrayXd values;
  double t = 0;
};
FieldFile read_field(const std::filesystem::path& path);

// snapshot files snap_<k>.field plus 'trajectory.txt' headed by
// '# trajectory dt=<dt> scheme=<scheme>' and listing '<file> <time>' lines
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                      const std::string& scheme = "strang2");
Trajectory read_trajectory(const std::filesystem::path& dir);

// '# transport method=<m> w2sq=<c> eps=<e>' followed by the psi and phi
// blocks in the field format
void write_transport(const std::filesystem::path& path, const PeriodicGrid& g,
                     const TransportResult& tr);

// flow directory: the trajectory layout at times k tau, per-step transport
// files, and steps.csv with k,energy,w2sq,residual,lambda1_meas,bound,margin;
// bound is the one-step certified curvature when tau clears the threshold
void write_flow(const std::filesystem::path& dir, const JkoFlow& flow,
                const PotentialSpec& v, const PotentialSpec& w);

// fixed columns: check,label,t,measured,bound,margin,slack,pass
std::string report_csv(const LyhReport& rep, const std::string& check);
// fixed columns: check,seed,total,passed_upper,passed_opt,ordering_ok,
//                worst_margin_upper,worst_margin_opt,pass
std::string report_csv(const HarnackReport& rep, const std::string& check);
// fixed columns: tau,w2_sup,h2_integral,w2_decreasing,h2_decreasing
std::string report_csv(const ConvergenceReport& rep);

std::uint64_t fnv1a64(const std::string& data);

// 'manifest.txt' at dir root: '<16-hex hash> <relative path>' per regular
// file under dir, sorted by path; the manifest itself is excluded
void write_manifest(const std::filesystem::path& dir);

struct SvgSeries {
  std::string name;
  std::vector<double> x, y;
};

// standalone line chart, one polyline per series, extents annotated
std::string svg_chart(const std::string& title, const std::vector<SvgSeries>& series);

}  // namespace lyhjko
