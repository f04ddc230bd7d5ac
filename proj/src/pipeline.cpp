#include "nlsnf/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nlsnf/fourier.hpp"

namespace nlsnf {

using nlohmann::json;
namespace fs = std::filesystem;

ExperimentConfig config_from_json(const std::string& text) {
  json in = json::parse(text);
  ExperimentConfig cfg;
  cfg.d = in.value("d", cfg.d);
  cfg.K = in.value("K", cfg.K);
  cfg.m = in.value("m", cfg.m);
  cfg.R = in.value("R", cfg.R);
  cfg.seed = in.value("seed", cfg.seed);
  cfg.beta = in.value("beta", cfg.beta);
  if (in.contains("epsilons")) cfg.epsilons = in.at("epsilons").get<std::vector<double>>();
  cfg.rho = in.value("rho", cfg.rho);
  if (in.contains("nonlinearity")) {
    if (in.at("nonlinearity").is_string())
      cfg.nonlinearity = in.at("nonlinearity").get<std::string>();
    else
      cfg.nonlinearity = in.at("nonlinearity").dump();
  }
  cfg.T = in.value("T", cfg.T);
  cfg.h = in.value("h", cfg.h);
  cfg.cadence = in.value("cadence", cfg.cadence);
  cfg.gamma = in.value("gamma", cfg.gamma);
  cfg.nu = in.value("nu", cfg.nu);
  cfg.c0 = in.value("c0", cfg.c0);
  cfg.r_max = in.value("r_max", cfg.r_max);
  cfg.build_nf = in.value("build_nf", cfg.build_nf);
  cfg.lie_substeps = in.value("lie_substeps", cfg.lie_substeps);
  if (in.contains("verify_amplitudes"))
    cfg.verify_amplitudes = in.at("verify_amplitudes").get<std::vector<double>>();
  cfg.out_dir = in.value("out_dir", cfg.out_dir);
  for (double e : cfg.epsilons)
    if (!(e > 0.0) || !(e < 1.0))
      throw std::invalid_argument("config: epsilon values must lie in (0,1)");
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json out;
  out["d"] = cfg.d;
  out["K"] = cfg.K;
  out["m"] = cfg.m;
  out["R"] = cfg.R;
  out["seed"] = cfg.seed;
  out["beta"] = cfg.beta;
  out["epsilons"] = cfg.epsilons;
  out["rho"] = cfg.rho;
  out["nonlinearity"] = cfg.nonlinearity;
  out["T"] = cfg.T;
  out["h"] = cfg.h;
  out["cadence"] = cfg.cadence;
  out["gamma"] = cfg.gamma;
  out["nu"] = cfg.nu;
  out["c0"] = cfg.c0;
  out["r_max"] = cfg.r_max;
  out["build_nf"] = cfg.build_nf;
  out["lie_substeps"] = cfg.lie_substeps;
  out["verify_amplitudes"] = cfg.verify_amplitudes;
  out["out_dir"] = cfg.out_dir;
  return out.dump(2);
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

[[noreturn]] void stage_error(const std::string& stage, const std::exception& e) {
  throw std::runtime_error("stage '" + stage + "': " + e.what());
}

// analytic initial profile xi_k = e^{-3 rho |k|}, scaled so the strip sup
// |u0| over |y| <= 2 rho equals eps
State initial_state(const Lattice& lat, double rho, double eps) {
  std::map<Site, cplx> xi;
  for (const Site& a : lat.sites()) xi[a] = std::exp(-3.0 * rho * site_abs(a));
  State profile = state_from_xi(lat, xi);
  double sup = strip_sup(profile, 2.0 * rho, 128);
  return (eps / sup) * profile;
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  PipelineResult result;
  fs::create_directories(cfg.out_dir);
  auto out_path = [&](const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); };

  json summary;
  summary["config"] = json::parse(config_to_json(cfg));
  bool all_ok = true;

  Lattice lat(cfg.d, cfg.K);

  // ---- sample ----
  Potential pot;
  try {
    pot = sample_potential(cfg.m, cfg.R, lat, cfg.seed);
    write_file(out_path("pot.json"), potential_to_json(pot));
    result.artifact_paths.push_back(out_path("pot.json"));
  } catch (const std::exception& e) {
    stage_error("sample", e);
  }
  Frequencies freqs = frequencies(pot);

  // ---- certify ----
  NonResParams params{cfg.gamma, cfg.nu, cfg.c0};
  try {
    if (cfg.nu <= 0.0 || cfg.c0 <= 0.0) {
      Calibration cal = calibrate_nonres(freqs, cfg.r_max, cfg.gamma, cfg.m);
      if (!cal.ok) throw std::runtime_error("calibration failed: a divisor vanishes exactly");
      params.nu = cal.nu;
      params.c0 = cal.c0;
      summary["calibration"] = {{"nu", cal.nu}, {"c0", cal.c0}, {"c0_exact", cal.c0_exact}};
    }
    NonResReport rep = check_nonres(freqs, cfg.r_max, params);
    write_file(out_path("nonres.json"), nonres_report_to_json(rep));
    write_file(out_path("nonres_stats.csv"), nonres_report_stats_csv(rep));
    result.artifact_paths.push_back(out_path("nonres.json"));
    json cert;
    cert["nu"] = params.nu;
    cert["c0"] = params.c0;
    cert["gamma"] = params.gamma;
    cert["violations"] = rep.violations.size();
    cert["checked_count"] = rep.checked_count;
    cert["incomplete"] = rep.incomplete;
    cert["guard_violations"] = rep.guard_violations;
    json mins = json::array();
    for (double v : rep.min_abs_divisor_per_r) mins.push_back(std::isfinite(v) ? v : -1.0);
    cert["min_abs_divisor_per_r"] = mins;
    cert["pass"] = rep.ok();
    summary["certification"] = cert;
    if (!rep.ok()) all_ok = false;
  } catch (const std::exception& e) {
    stage_error("certify", e);
  }

  SeriesSpec spec;
  try {
    spec = parse_series_spec(cfg.nonlinearity);
    spec.validate();
  } catch (const std::exception& e) {
    stage_error("nonlinearity", e);
  }

  json runs = json::array();
  for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
    double eps = cfg.epsilons[ei];
    std::string tag = "eps" + std::to_string(ei);
    json run;
    run["epsilon"] = eps;

    ParameterChoice pc;
    try {
      pc = choose_parameters(eps, cfg.beta);
      run["N"] = pc.N;
      run["r"] = pc.r;
    } catch (const std::exception& e) {
      stage_error("parameters", e);
    }

    if (cfg.build_nf) {
      try {
        int cap = std::max(kDefaultDegreeCap, 2 * pc.r);
        Polynomial P = expand(spec, lat, std::max(pc.r, spec.max_total_degree()), cap);
        BuildOptions bopts;
        bopts.nu_for_estimate = params.nu;
        NormalFormResult nf = build_normal_form(P, freqs, pc.N, pc.r, bopts);
        write_file(out_path("nf_" + tag + ".json"), normal_form_to_json(nf));
        result.artifact_paths.push_back(out_path("nf_" + tag + ".json"));

        ConjugacyReport conj =
            verify_conjugacy(P, nf, freqs, cfg.verify_amplitudes, 7, cfg.lie_substeps);
        json nfj;
        nfj["chi_norms"] = nf.diag.chi_norms;
        nfj["Z_norms"] = nf.diag.Z_norms;
        json mins = json::array();
        for (double v : nf.diag.min_abs_divisor) mins.push_back(std::isfinite(v) ? v : -1.0);
        nfj["min_abs_divisor"] = mins;
        nfj["C_estimate"] = nf.diag.C_estimate;
        nfj["conjugacy_slope"] = conj.indistinguishable_from_zero ? -1.0 : conj.slope;
        nfj["conjugacy_zero"] = conj.indistinguishable_from_zero;
        bool conj_ok = conj.indistinguishable_from_zero || conj.slope >= double(pc.r) + 0.8;
        nfj["conjugacy_pass"] = conj_ok;
        if (!conj_ok) all_ok = false;
        run["normal_form"] = nfj;
      } catch (const std::exception& e) {
        stage_error("build-nf", e);
      }
    }

    if (cfg.T > 0.0) {
      try {
        State z0 = initial_state(lat, cfg.rho, eps);
        SimOptions sopts;
        sopts.rho = cfg.rho;
        sopts.tail_N = pc.N;
        sopts.lean = true;
        Trajectory traj = simulate(z0, cfg.T, cfg.h, cfg.cadence, freqs, spec, sopts);
        write_file(out_path("traj_" + tag + ".csv"), trajectory_to_csv(traj));
        result.artifact_paths.push_back(out_path("traj_" + tag + ".csv"));

        double max_drift = 0.0, max_tail = 0.0, max_norm = 0.0;
        for (const ObservableRow& row : traj.observables) {
          max_drift = std::max(max_drift, row.drift);
          max_tail = std::max(max_tail, row.tail);
          max_norm = std::max(max_norm, row.norm_rho);
        }
        double drift_bound = std::pow(eps, 1.5);

        // monitored stopping thresholds of the long-time argument
        double sigma = std::min(0.125, cfg.rho / 2.0);
        double c_rho = std::pow(2.0, cfg.d + 2) /
                       std::pow(1.0 - std::exp(-cfg.rho / (2.0 * std::sqrt(double(cfg.d)))), cfg.d);
        double tail_threshold = c_rho * eps * std::exp(-sigma * pc.N);
        double norm_threshold = c_rho * eps;
        double first_exit = -1.0;
        for (const ObservableRow& row : traj.observables) {
          if (row.tail > tail_threshold || row.norm_rho > norm_threshold) {
            first_exit = row.t;
            break;
          }
        }

        json sim;
        sim["max_drift"] = max_drift;
        sim["drift_bound"] = drift_bound;
        bool drift_ok = max_drift <= drift_bound;
        sim["drift_pass"] = drift_ok;
        sim["max_tail"] = max_tail;
        sim["max_norm_rho"] = max_norm;
        // strip-sup proxy |u|_{rho/2} <= c_{rho,rho/2} ||z||_rho, reported as
        // a multiple of the initial size
        double c_conv = conversion_constant(cfg.rho, cfg.rho / 2.0, cfg.d);
        sim["strip_sup_proxy_max"] = c_conv * max_norm;
        sim["strip_sup_ratio"] = c_conv * max_norm / eps;
        sim["sigma"] = sigma;
        sim["c_rho"] = c_rho;
        sim["tail_threshold"] = tail_threshold;
        sim["norm_threshold"] = norm_threshold;
        sim["first_exit_time"] = first_exit;
        sim["final_energy"] = traj.observables.back().H;
        sim["initial_energy"] = traj.observables.front().H;
        run["simulation"] = sim;
        if (!drift_ok) all_ok = false;
      } catch (const std::exception& e) {
        stage_error("simulate", e);
      }
    }
    runs.push_back(run);
  }
  summary["runs"] = runs;
  summary["all_checks_passed"] = all_ok;

  result.summary_json = summary.dump(2);
  result.all_checks_passed = all_ok;
  write_file(out_path("summary.json"), result.summary_json);
  result.artifact_paths.push_back(out_path("summary.json"));
  return result;
}

ReportTables report_merge(const std::vector<std::string>& summary_paths) {
  json merged;
  json rows = json::array();
  std::vector<double> eps_all, drift_all;

  for (const std::string& path : summary_paths) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("report: missing summary file " + path);
    json s;
    try {
      is >> s;
    } catch (const std::exception& e) {
      throw std::runtime_error("report: cannot parse " + path + ": " + e.what());
    }
    if (!s.contains("runs"))
      throw std::runtime_error("report: schema mismatch in " + path + ": missing field 'runs'");
    for (const auto& run : s.at("runs")) {
      if (!run.contains("epsilon"))
        throw std::runtime_error("report: schema mismatch in " + path +
                                 ": missing field 'epsilon'");
      json row;
      row["source"] = path;
      row["epsilon"] = run.at("epsilon");
      if (run.contains("simulation")) {
        row["max_drift"] = run.at("simulation").at("max_drift");
        row["drift_bound"] = run.at("simulation").at("drift_bound");
        row["drift_pass"] = run.at("simulation").at("drift_pass");
        eps_all.push_back(run.at("epsilon").get<double>());
        drift_all.push_back(run.at("simulation").at("max_drift").get<double>());
      }
      if (run.contains("normal_form")) {
        row["conjugacy_slope"] = run.at("normal_form").at("conjugacy_slope");
        row["C_estimate"] = run.at("normal_form").at("C_estimate");
      }
      rows.push_back(row);
    }
  }
  merged["rows"] = rows;

  if (eps_all.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < eps_all.size(); ++i) {
      if (!(drift_all[i] > 0.0)) continue;
      double x = std::log(eps_all[i]), y = std::log(drift_all[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n >= 2) merged["drift_vs_eps_slope"] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  std::ostringstream csv;
  csv.precision(17);
  csv << "source,epsilon,max_drift,drift_bound,drift_pass,conjugacy_slope\n";
  for (const auto& row : rows) {
    csv << row.at("source").get<std::string>() << "," << row.at("epsilon").get<double>() << ",";
    if (row.contains("max_drift"))
      csv << row.at("max_drift").get<double>() << "," << row.at("drift_bound").get<double>() << ","
          << (row.at("drift_pass").get<bool>() ? 1 : 0) << ",";
    else
      csv << ",,,";
    if (row.contains("conjugacy_slope"))
      csv << row.at("conjugacy_slope").get<double>();
    csv << "\n";
  }

  ReportTables out;
  out.csv = csv.str();
  out.json = merged.dump(2);
  return out;
}

}  // namespace nlsnf
