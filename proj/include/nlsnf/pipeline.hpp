#pragma once

#include <string>
#include <vector>

#include "nlsnf/normal_form.hpp"
#include "nlsnf/simulate.hpp"

namespace nlsnf {

// End-to-end experiment description. A run is fully determined by (config,
// seed, thread count); summaries carry no timestamps so reruns are
// byte-identical.
struct ExperimentConfig {
  int d = 1;
  int K = 6;
  double m = 2.0;
  double R = 1.0;
  std::uint64_t seed = 1;
  double beta = 0.5;
  std::vector<double> epsilons;
  double rho = 0.5;
  std::string nonlinearity = "power:p=1,a=1";
  double T = 100.0;
  double h = 1e-3;
  int cadence = 100;
  double gamma = 1e-5;
  double nu = 0.0;  // 0 -> calibrate
  double c0 = 0.0;  // 0 -> calibrate
  int r_max = 4;
  bool build_nf = true;
  int lie_substeps = 32;
  std::vector<double> verify_amplitudes = {1e-2, 5e-3, 2.5e-3};
  std::string out_dir = "out";
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

struct PipelineResult {
  std::string summary_json;
  bool all_checks_passed = true;
  std::vector<std::string> artifact_paths;
};

// sample -> certify -> (per epsilon) parameters/expand/build/verify/simulate,
// writing pot.json, nonres.json/csv, nf_*.json, traj_*.csv and summary.json
// under cfg.out_dir. Stage failures raise errors tagged with the stage name;
// artifacts written before the failure are kept.
PipelineResult run_pipeline(const ExperimentConfig& cfg);

// cross-run tables from summary files: drift-vs-epsilon log-log slope and
// certification margins; errors name the missing path or offending field
struct ReportTables {
  std::string csv;
  std::string json;
};
ReportTables report_merge(const std::vector<std::string>& summary_paths);

}  // namespace nlsnf
