#include <lyhjko/config.hpp>
#include <lyhjko/io.hpp>

#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace lyhjko {

namespace {

[[noreturn]] void bad(const std::string& what, const std::string& line) {
  throw std::invalid_argument("config: " + what + ": " + line);
}

double to_double(const std::string& key, const std::string& val) {
  char* end = nullptr;
  const double x = std::strtod(val.c_str(), &end);
  if (end == val.c_str() || *end != '\0') bad("bad number for " + key, val);
  return x;
}

long to_long(const std::string& key, const std::string& val) {
  char* end = nullptr;
  const long x = std::strtol(val.c_str(), &end, 10);
  if (end == val.c_str() || *end != '\0') bad("bad integer for " + key, val);
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& val) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(val.c_str(), &end, 10);
  if (end == val.c_str() || *end != '\0') bad("bad integer for " + key, val);
  return x;
}

}  // namespace

Lambda0Mode ExperimentConfig::lambda0_mode() const {
  if (lambda0 == "measured") return Lambda0Mode::measured;
  if (lambda0 == "infinite") return Lambda0Mode::infinite;
  throw std::invalid_argument("config: lambda0 must be measured or infinite: " + lambda0);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "schema=1\n"
      << "[scenario]\n"
      << "name=" << c.name << "\n"
      << "[grid]\n"
      << "dim=" << c.dim << "\n"
      << "n=" << c.n << "\n"
      << "[potential]\n"
      << "v=" << c.v_terms << "\n"
      << "w=" << c.w_terms << "\n"
      << "[density]\n"
      << "family=" << c.family << "\n"
      << "amp=" << format_g17(c.amp) << "\n"
      << "kappa=" << format_g17(c.kappa) << "\n"
      << "[solver]\n"
      << "dt=" << format_g17(c.dt) << "\n"
      << "t_end=" << format_g17(c.t_end) << "\n"
      << "tau=" << format_g17(c.tau) << "\n"
      << "eps=" << format_g17(c.eps) << "\n"
      << "steps=" << c.steps << "\n"
      << "[verify]\n"
      << "t0=" << format_g17(c.t0) << "\n"
      << "eps_envelope=" << format_g17(c.eps_envelope) << "\n"
      << "samples=" << c.samples << "\n"
      << "seed=" << c.seed << "\n"
      << "lambda0=" << c.lambda0 << "\n"
      << "[output]\n"
      << "out_dir=" << c.out_dir << "\n";
  return out.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line, section;
  bool have_schema = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad("bad section header", line);
      section = line.substr(1, line.size() - 2);
      if (section != "scenario" && section != "grid" && section != "potential" &&
          section != "density" && section != "solver" && section != "verify" &&
          section != "output")
        bad("unknown section", line);
      continue;
    }
    const auto cut = line.find('=');
    if (cut == std::string::npos) bad("expected key=value", line);
    const std::string key = line.substr(0, cut);
    const std::string val = line.substr(cut + 1);
    if (!have_schema) {
      if (!section.empty() || key != "schema") bad("first entry must be schema=1", line);
      if (val != "1") bad("unsupported schema", line);
      have_schema = true;
      continue;
    }
    const std::string qual = section + "." + key;
    if (qual == "scenario.name") c.name = val;
    else if (qual == "grid.dim") c.dim = static_cast<int>(to_long(qual, val));
    else if (qual == "grid.n") c.n = static_cast<int>(to_long(qual, val));
    else if (qual == "potential.v") c.v_terms = val;
    else if (qual == "potential.w") c.w_terms = val;
    else if (qual == "density.family") c.family = val;
    else if (qual == "density.amp") c.amp = to_double(qual, val);
    else if (qual == "density.kappa") c.kappa = to_double(qual, val);
    else if (qual == "solver.dt") c.dt = to_double(qual, val);
    else if (qual == "solver.t_end") c.t_end = to_double(qual, val);
    else if (qual == "solver.tau") c.tau = to_double(qual, val);
    else if (qual == "solver.eps") c.eps = to_double(qual, val);
    else if (qual == "solver.steps") c.steps = static_cast<int>(to_long(qual, val));
    else if (qual == "verify.t0") c.t0 = to_double(qual, val);
    else if (qual == "verify.eps_envelope") c.eps_envelope = to_double(qual, val);
    else if (qual == "verify.samples") c.samples = static_cast<int>(to_long(qual, val));
    else if (qual == "verify.seed") c.seed = to_u64(qual, val);
    else if (qual == "verify.lambda0") c.lambda0 = val;
    else if (qual == "output.out_dir") c.out_dir = val;
    else bad("unknown key", line);
  }
  if (!have_schema) throw std::invalid_argument("config: missing schema=1 line");

  if (c.dim != 1 && c.dim != 2) throw std::invalid_argument("config: dim must be 1 or 2");
  if (c.family != "uniform" && c.family != "cosine" && c.family != "sharp" &&
      c.family != "gibbs")
    throw std::invalid_argument("config: unknown density family: " + c.family);
  c.lambda0_mode();
  if (!(c.dt > 0) || !(c.t_end > 0) || !(c.tau > 0) || !(c.eps >= 0))
    throw std::invalid_argument("config: dt, t_end, tau must be positive, eps nonnegative");
  if (c.steps < 1 || c.samples < 1)
    throw std::invalid_argument("config: steps and samples must be at least 1");
  if (!(c.t0 > 0) || !(c.eps_envelope >= 0))
    throw std::invalid_argument("config: t0 must be positive, eps_envelope nonnegative");
  c.v();  // surfaces grammar errors here rather than mid-run
  c.w();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_text(path));
}

}  // namespace lyhjko
