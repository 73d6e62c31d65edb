#pragma once

// Subcommand bodies behind the experiment CLI.  Each run_* builds its
// scenario from the config, writes CSV/field/SVG artifacts plus a hashed
// manifest under the output root, and folds row-level pass flags into a
// RunOutcome.  Identical config and seed give byte-identical files.

#include <lyhjko/config.hpp>
#include <lyhjko/field.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace lyhjko {

struct RunOptions {
  std::filesystem::path out;
  int jobs = 1;
  bool strict = false;  // drop slack and floor allowances: raw margin >= 0
};

struct RunOutcome {
  bool pass = true;
  std::vector<std::string> failures;  // one echoed line per failing row

  void merge(const RunOutcome& o) {
    pass = pass && o.pass;
    failures.insert(failures.end(), o.failures.begin(), o.failures.end());
  }
};

// families: uniform, cosine (1 + amp * prod cos), sharp (normalized
// exp(kappa (sum cos - dim)) bump), gibbs (exp(-V))
DensityField initial_density(const ExperimentConfig& cfg);

RunOutcome run_seq(const ExperimentConfig& cfg, const RunOptions& opt);
RunOutcome run_pde(const ExperimentConfig& cfg, const RunOptions& opt);
RunOutcome run_jko(const ExperimentConfig& cfg, const RunOptions& opt);
RunOutcome run_converge(const ExperimentConfig& cfg, const RunOptions& opt);
RunOutcome run_calibrate(const ExperimentConfig& cfg, const RunOptions& opt);
RunOutcome run_all(const ExperimentConfig& cfg, const RunOptions& opt);

// dispatch by name; throws std::invalid_argument for an unknown subcommand
RunOutcome run_subcommand(const std::string& name, const ExperimentConfig& cfg,
                          const RunOptions& opt);

// drains jobs on up to `workers` threads; rethrows the first job failure
void run_jobs(std::vector<std::function<void()>>& jobs, int workers);

}  // namespace lyhjko
