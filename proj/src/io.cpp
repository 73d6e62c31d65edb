#include <lyhjko/io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace lyhjko {

namespace {

std::string csv_bool(bool b) { return b ? "1" : "0"; }

void append_field_block(std::string& out, const PeriodicGrid& g, const ArrayXd& values,
                        double t) {
  out += "# torus-field dim=" + std::to_string(g.dim) + " n=" + std::to_string(g.n) +
         " t=" + format_g17(t) + "\n";
  for (long i = 0; i < g.size(); ++i) {
    if (g.dim == 1)
      out += std::to_string(i);
    else
      out += std::to_string(i / g.n) + " " + std::to_string(i % g.n);
    out += " " + format_g17(values[i]) + "\n";
  }
}

// reads one field block from the stream, header line included
FieldFile parse_field_block(std::istream& in, const char* who) {
  std::string line;
  do {
    if (!std::getline(in, line)) throw std::runtime_error(std::string(who) + ": missing field header");
  } while (line.empty());
  int dim = 0, n = 0;
  double t = 0;
  if (std::sscanf(line.c_str(), "# torus-field dim=%d n=%d t=%lf", &dim, &n, &t) != 3)
    throw std::runtime_error(std::string(who) + ": bad field header: " + line);
  FieldFile f;
  f.grid = PeriodicGrid(dim, n);
  f.t = t;
  f.values.resize(f.grid.size());
  for (long i = 0; i < f.grid.size(); ++i) {
    if (!std::getline(in, line)) throw std::runtime_error(std::string(who) + ": truncated field");
    long a = 0, b = 0;
    double val = 0;
    const int got = dim == 1 ? std::sscanf(line.c_str(), "%ld %lf", &a, &val)
                             : std::sscanf(line.c_str(), "%ld %ld %lf", &a, &b, &val);
    if (got != dim + 1) throw std::runtime_error(std::string(who) + ": bad node line: " + line);
    const long id = dim == 1 ? a : a * n + b;
    if (id != i) throw std::runtime_error(std::string(who) + ": nodes out of order");
    f.values[i] = val;
  }
  return f;
}

}  // namespace

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_text: cannot open " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write_text: short write to " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_text: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_field(const fs::path& path, const PeriodicGrid& g, const ArrayXd& values,
                 double t) {
  if (values.size() != g.size()) throw std::invalid_argument("write_field: size mismatch");
  std::string out;
  out.reserve(static_cast<size_t>(g.size()) * 28 + 64);
  append_field_block(out, g, values, t);
  write_text(path, out);
}

FieldFile read_field(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_field: cannot open " + path.string());
  return parse_field_block(in, "read_field");
}

void write_trajectory(const fs::path& dir, const Trajectory& traj,
                      const std::string& scheme) {
  if (traj.snapshots.size() != traj.times.size())
    throw std::invalid_argument("write_trajectory: times and snapshots disagree");
  fs::create_directories(dir);
  std::string man = "# trajectory dt=" + format_g17(traj.dt) + " scheme=" + scheme + "\n";
  for (size_t k = 0; k < traj.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%03zu.field", k);
    write_field(dir / name, traj.snapshots[k].grid, traj.snapshots[k].values,
                traj.times[k]);
    man += std::string(name) + " " + format_g17(traj.times[k]) + "\n";
  }
  write_text(dir / "trajectory.txt", man);
}

Trajectory read_trajectory(const fs::path& dir) {
  std::istringstream man(read_text(dir / "trajectory.txt"));
  std::string line;
  if (!std::getline(man, line)) throw std::runtime_error("read_trajectory: empty manifest");
  Trajectory traj;
  char scheme[32];
  if (std::sscanf(line.c_str(), "# trajectory dt=%lf scheme=%31s", &traj.dt, scheme) != 2)
    throw std::runtime_error("read_trajectory: bad manifest header: " + line);
  while (std::getline(man, line)) {
    if (line.empty()) continue;
    const auto cut = line.find(' ');
    if (cut == std::string::npos)
      throw std::runtime_error("read_trajectory: bad manifest line: " + line);
    const FieldFile f = read_field(dir / line.substr(0, cut));
    traj.times.push_back(std::stod(line.substr(cut + 1)));
    traj.snapshots.push_back(DensityField{f.grid, f.values});
  }
  return traj;
}

void write_transport(const fs::path& path, const PeriodicGrid& g,
                     const TransportResult& tr) {
  std::string out = "# transport method=" + tr.method + " w2sq=" + format_g17(tr.w2sq) +
                    " eps=" + format_g17(tr.eps) + "\n";
  append_field_block(out, g, tr.psi, 0.0);
  append_field_block(out, g, tr.phi, 0.0);
  write_text(path, out);
}

void write_flow(const fs::path& dir, const JkoFlow& flow, const PotentialSpec& v,
                const PotentialSpec& w) {
  Trajectory steps;
  steps.dt = flow.tau;
  for (size_t k = 0; k < flow.steps.size(); ++k) {
    steps.times.push_back(flow.tau * static_cast<double>(k));
    steps.snapshots.push_back(flow.steps[k]);
  }
  write_trajectory(dir, steps, "jko");

  const PotentialConstants pc = make_constants(v, w);
  const bool seq_ok = flow.tau < tau_thresholds(pc).tau_star;
  std::string csv = "k,energy,w2sq,residual,lambda1_meas,bound,margin\n";
  for (size_t k = 1; k < flow.steps.size(); ++k) {
    char name[40];
    std::snprintf(name, sizeof name, "transport_%03zu.transport", k);
    write_transport(dir / name, flow.steps[k].grid, flow.transports[k - 1]);

    const OneStepLambda ls =
        one_step_lambda(flow.steps[k - 1], flow.steps[k], v, w, flow.tau);
    double bound = std::numeric_limits<double>::quiet_NaN();
    double margin = bound;
    if (seq_ok) {
      bound = invert_g(flow.tau * ls.lambda0_pos, flow.tau, pc) / flow.tau;
      margin = bound - ls.lambda1_raw;
    }
    csv += std::to_string(k) + "," + format_g17(energy(flow.steps[k], v, w)) + "," +
           format_g17(flow.transports[k - 1].w2sq) + "," +
           format_g17(flow.residuals[k - 1]) + "," + format_g17(ls.lambda1_raw) + "," +
           format_g17(bound) + "," + format_g17(margin) + "\n";
  }
  write_text(dir / "steps.csv", csv);
}

std::string report_csv(const LyhReport& rep, const std::string& check) {
  std::string out = "check,label,t,measured,bound,margin,slack,pass\n";
  for (const LyhRow& r : rep.rows)
    out += check + "," + r.label + "," + format_g17(r.t) + "," + format_g17(r.measured) +
           "," + format_g17(r.bound) + "," + format_g17(r.margin) + "," +
           format_g17(r.slack) + "," + csv_bool(r.pass) + "\n";
  return out;
}

std::string report_csv(const HarnackReport& rep, const std::string& check) {
  std::string out =
      "check,seed,total,passed_upper,passed_opt,ordering_ok,"
      "worst_margin_upper,worst_margin_opt,pass\n";
  out += check + "," + std::to_string(rep.seed) + "," + std::to_string(rep.total) + "," +
         std::to_string(rep.passed_upper) + "," + std::to_string(rep.passed_opt) + "," +
         csv_bool(rep.ordering_ok) + "," + format_g17(rep.worst_margin_upper) + "," +
         format_g17(rep.worst_margin_opt) + "," + csv_bool(rep.pass) + "\n";
  return out;
}

std::string report_csv(const ConvergenceReport& rep) {
  std::string out = "tau,w2_sup,h2_integral,w2_decreasing,h2_decreasing\n";
  for (const ConvergenceRow& r : rep.rows)
    out += format_g17(r.tau) + "," + format_g17(r.w2_sup) + "," +
           format_g17(r.h2_integral) + "," + csv_bool(rep.w2_decreasing) + "," +
           csv_bool(rep.h2_decreasing) + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_manifest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.txt")
      files.push_back(fs::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  std::string out;
  for (const fs::path& p : files) {
    char hex[24];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_text(dir / p))));
    out += std::string(hex) + " " + p.generic_string() + "\n";
  }
  write_text(dir / "manifest.txt", out);
}

std::string svg_chart(const std::string& title, const std::vector<SvgSeries>& series) {
  constexpr int kW = 640, kH = 400, kL = 64, kR = 620, kT = 40, kB = 360;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const SvgSeries& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x0 <= x1)) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
  if (x1 - x0 < 1e-300) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-300) { y0 -= 0.5; y1 += 0.5; }
  const auto sx = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kR - kL); };
  const auto sy = [&](double y) { return kB - (y - y0) / (y1 - y0) * (kB - kT); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
      << kH << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
      << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"monospace\" font-size=\"14\">" << title << "</text>\n"
      << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kR - kL
      << "\" height=\"" << kB - kT << "\" fill=\"none\" stroke=\"#888\"/>\n";
  const auto tick = [&](double v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  out << "<text x=\"" << kL << "\" y=\"" << kB + 16 << "\" font-family=\"monospace\" "
      << "font-size=\"11\">" << tick(x0) << "</text>\n"
      << "<text x=\"" << kR << "\" y=\"" << kB + 16 << "\" text-anchor=\"end\" "
      << "font-family=\"monospace\" font-size=\"11\">" << tick(x1) << "</text>\n"
      << "<text x=\"" << kL - 4 << "\" y=\"" << kB << "\" text-anchor=\"end\" "
      << "font-family=\"monospace\" font-size=\"11\">" << tick(y0) << "</text>\n"
      << "<text x=\"" << kL - 4 << "\" y=\"" << kT + 4 << "\" text-anchor=\"end\" "
      << "font-family=\"monospace\" font-size=\"11\">" << tick(y1) << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) continue;
      out << sx(series[s].x[i]) << "," << sy(series[s].y[i]) << " ";
    }
    out << "\"/>\n"
        << "<text x=\"" << kR - 6 << "\" y=\"" << kT + 16 + 14 * s
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\" fill=\""
        << color << "\">" << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace lyhjko
