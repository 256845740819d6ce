#include "pcrpo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "pcrpo/serialize.hpp"
#include "pcrpo/sweeps.hpp"

namespace pcrpo {

namespace fs = std::filesystem;

namespace {

fs::path resolve_out_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("PCRPO_OUT_ROOT")) {
      p = fs::path(root) / p;
    }
  }
  return p;
}

struct SeedSummary {
  std::uint64_t seed = 0;
  double final_v_r = 0.0;
  std::vector<double> final_v_c;
  double tail_v_r = 0.0;
  std::vector<double> tail_v_c;
  int flip_count = 0;
  int stall_count = 0;
  double wall_time_s = 0.0;
};

SeedSummary summarize_run(std::uint64_t seed,
                          const std::vector<TrainRecord>& records,
                          int n_channels, double wall_time_s) {
  SeedSummary s;
  s.seed = seed;
  s.wall_time_s = wall_time_s;
  s.final_v_c.assign(n_channels, 0.0);
  s.tail_v_c.assign(n_channels, 0.0);
  if (records.empty()) return s;
  s.final_v_r = records.back().v_r;
  for (int i = 0; i < n_channels; ++i) s.final_v_c[i] = records.back().v_c[i];
  const std::size_t tail = std::min<std::size_t>(10, records.size());
  for (std::size_t k = records.size() - tail; k < records.size(); ++k) {
    s.tail_v_r += records[k].v_r / tail;
    for (int i = 0; i < n_channels; ++i) {
      s.tail_v_c[i] += records[k].v_c[i] / tail;
    }
  }
  s.flip_count = mode_flip_count(records);
  for (const TrainRecord& r : records) {
    if (r.step_scale == 0.0) ++s.stall_count;
  }
  return s;
}

Json seed_summary_json(const SeedSummary& s) {
  Json j;
  j["seed"] = s.seed;
  j["final_v_r"] = s.final_v_r;
  j["final_v_c"] = s.final_v_c;
  j["tail_mean_v_r"] = s.tail_v_r;
  j["tail_mean_v_c"] = s.tail_v_c;
  j["flip_count"] = s.flip_count;
  j["stall_count"] = s.stall_count;
  j["wall_time_s"] = s.wall_time_s;
  return j;
}

// Runs every seed of one config and writes the per-seed CSV/JSON artifacts
// plus the aggregate plot data. Returns the per-seed summaries.
std::vector<SeedSummary> execute_run(const RunConfig& config,
                                     const fs::path& out_dir,
                                     std::ostream& out) {
  const CmdpSpec spec = config.env.build();
  fs::create_directories(out_dir);

  Json echo = config.echo();
  echo["out_dir"] = out_dir.string();
  std::vector<double> limits(spec.limits.data(),
                             spec.limits.data() + spec.limits.size());
  echo["resolved_limits"] = limits;

  std::vector<std::vector<TrainRecord>> all_records;
  std::vector<SeedSummary> summaries;
  for (std::uint64_t seed : config.seeds) {
    TrainerConfig tc = config.trainer;
    tc.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    TrainResult result = train(tc, spec, config.slack);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    const std::string tag = std::to_string(seed);
    {
      std::ofstream csv(out_dir / ("train_seed" + tag + ".csv"));
      write_train_csv(csv, result.records, spec.n_channels());
    }
    save_policy(result.final_policy,
                (out_dir / ("policy_seed" + tag + ".json")).string());
    const SeedSummary s =
        summarize_run(seed, result.records, spec.n_channels(), wall);
    {
      Json j;
      j["format"] = "pcrpo-run-summary-v1";
      j["config"] = echo;
      j["summary"] = seed_summary_json(s);
      std::ofstream js(out_dir / ("summary_seed" + tag + ".json"));
      js << j.dump(2) << '\n';
    }
    summaries.push_back(s);
    all_records.push_back(std::move(result.records));
    out << "seed " << seed << ": final v_r=" << format_double(s.final_v_r)
        << " v_c_0=" << format_double(s.final_v_c.empty() ? 0.0 : s.final_v_c[0])
        << " flips=" << s.flip_count << " (" << format_double(wall) << " s)\n";
  }

  if (!all_records.empty() && !all_records.front().empty()) {
    std::ofstream agg(out_dir / "aggregate.csv");
    write_aggregate_csv(agg, all_records, spec.n_channels());
  }
  {
    Json j;
    j["format"] = "pcrpo-run-summary-v1";
    j["config"] = echo;
    Json per_seed = Json::array();
    for (const SeedSummary& s : summaries) per_seed.push_back(seed_summary_json(s));
    j["seeds"] = std::move(per_seed);
    std::ofstream js(out_dir / "summary.json");
    js << j.dump(2) << '\n';
  }
  return summaries;
}

std::string sanitize_for_path(const Json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') {
      c = '_';
    }
  }
  return s;
}

}  // namespace

int cmd_train(const std::string& config_path,
              const std::vector<std::string>& overrides, std::ostream& out,
              std::ostream& err) {
  try {
    const RunConfig config = load_run_config(config_path, overrides);
    execute_run(config, resolve_out_dir(config.out_dir), out);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidSpecError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_verify_gradients(long samples, const std::vector<int>& dims,
                         std::uint64_t seed, bool parallel, std::ostream& out,
                         std::ostream& err) {
  if (samples < 1) {
    err << "usage error: --samples must be at least 1\n";
    return 2;
  }
  if (dims.empty()) {
    err << "usage error: need at least one dimension\n";
    return 2;
  }
  bool all_pass = true;
  for (int dim : dims) {
    if (dim < 2) {
      err << "usage error: dimensions must be at least 2\n";
      return 2;
    }
    const auto outcomes = parallel ? gradient_sweep_parallel(dim, samples, seed)
                                   : gradient_sweep_serial(dim, samples, seed);
    const GradientSweepReport rep = summarize_gradient_sweep(outcomes, dim);
    out << "dim " << dim << ": " << rep.samples << " unit pairs ("
        << rep.conflict_samples << " conflicting)\n";
    out << "  orthogonality       " << (rep.orth_violations == 0 ? "pass" : "FAIL")
        << "  violations=" << rep.orth_violations
        << " worst=" << format_double(rep.worst_orth) << "\n";
    out << "  idempotence         " << (rep.idem_violations == 0 ? "pass" : "FAIL")
        << "  violations=" << rep.idem_violations
        << " worst=" << format_double(rep.worst_idem) << "\n";
    out << "  equal-norm identity " << (rep.eqnorm_violations == 0 ? "pass" : "FAIL")
        << "  checked=" << rep.eqnorm_checked
        << " violations=" << rep.eqnorm_violations
        << " worst=" << format_double(rep.worst_eqnorm) << "\n";
    out << "  ascent identity     " << (rep.ascent_violations == 0 ? "pass" : "FAIL")
        << "  violations=" << rep.ascent_violations
        << " worst=" << format_double(rep.worst_ascent) << "\n";
    out << "  surgery dominance   " << (rep.surgery_violations == 0 ? "pass" : "FAIL")
        << "  checked=" << rep.surgery_checked
        << " violations=" << rep.surgery_violations << "\n";
    if (rep.surgery_violations > 0) {
      out << "    dominance of the projected combination over the one-sided\n"
             "    surgery direction holds on unit pairs only for cos(theta) >= "
             "(1-sqrt(17))/4 ~ -0.7808;\n"
             "    every violation here has cos(theta) <= "
          << format_double(rep.surgery_violation_max_cos)
          << " (worst gap " << format_double(rep.worst_surgery_gap) << ")\n";
      for (long idx : rep.surgery_counterexamples) {
        const PairOutcome o = evaluate_pair_sample(dim, seed, idx);
        out << "    counterexample: sample " << idx
            << " cos=" << format_double(o.cos_theta)
            << " |g|-|g'|=" << format_double(o.surgery_gap) << "\n";
      }
    }
    out << "  informational (raw, unnormalized gradients): averaged-dominance "
           "failures="
        << rep.raw_avg_dominance_failures
        << ", surgery-dominance failures=" << rep.raw_surgery_dominance_failures
        << " of " << rep.samples << "\n";
    all_pass = all_pass && rep.asserted_properties_pass();
  }
  out << (all_pass ? "all asserted properties pass\n"
                   : "asserted property FAILURES present\n");
  return all_pass ? 0 : 1;
}

int cmd_verify_theorems(long instances, std::uint64_t seed, bool parallel,
                        std::ostream& out, std::ostream& err) {
  if (instances < 1) {
    err << "usage error: --instances must be at least 1\n";
    return 2;
  }
  const auto outcomes = parallel ? theorem_sweep_parallel(instances, seed)
                                 : theorem_sweep_serial(instances, seed);
  const TheoremSweepReport rep = summarize_theorem_sweep(outcomes);
  out << rep.instances << " random quadratic instances, eta in {1/L, 1/(2L)}\n";
  out << "  lower bound  " << (rep.lower_bound_failures == 0 ? "pass" : "FAIL")
      << "  failures=" << rep.lower_bound_failures << "/"
      << rep.upper_bound_checks
      << " worst margin=" << format_double(rep.worst_lower_margin) << "\n";
  out << "  positivity   " << (rep.positivity_failures == 0 ? "pass" : "FAIL")
      << "  (delta_f > 0 when sin(theta) != 0)\n";
  out << "  upper bound  holds in " << rep.upper_bound_holds << "/"
      << rep.upper_bound_checks << " checks (reported, not asserted)\n";

  // antiparallel degenerate case: the combination collapses, the guaranteed
  // progress is exactly zero
  QuadraticTestSpec degen;
  degen.h_r = -Matrix::Identity(2, 2);
  degen.h_c = -Matrix::Identity(2, 2);
  degen.b_r = Vector(2);
  degen.b_r << 1.0, 0.0;
  degen.b_c = Vector(2);
  degen.b_c << -2.0, 0.0;
  degen.w0 = Vector::Zero(2);
  degen.lipschitz = 2.0;
  const TheoremCheck dc = verify_theorem_bounds(degen, 1.0 / degen.lipschitz);
  out << "  sin(theta)=0 instance: delta_f=" << format_double(dc.delta_f)
      << " lower=" << format_double(dc.lower)
      << (dc.delta_f >= -1e-12 && std::abs(dc.lower) <= 1e-12 ? " (pass)\n"
                                                              : " (FAIL)\n");

  const bool ok = rep.lower_bound_passes() && dc.delta_f >= -1e-12;
  return ok ? 0 : 1;
}

int cmd_sweep(const std::string& sweep_path, int jobs_override,
              std::ostream& out, std::ostream& err) {
  SweepSpec sweep;
  try {
    sweep = load_sweep_spec(sweep_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  const int jobs = std::max(1, jobs_override > 0 ? jobs_override : sweep.jobs);

  const fs::path root = resolve_out_dir(
      sweep.out_dir.empty() ? sweep.base.value("out_dir", "runs/sweep")
                            : sweep.out_dir);
  fs::create_directories(root);

  struct PointResult {
    std::string label;
    bool failed = false;
    std::string error;
    std::vector<SeedSummary> summaries;
  };
  std::vector<PointResult> results(sweep.values.size());

  const int n = static_cast<int>(sweep.values.size());
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (int i = 0; i < n; ++i) {
    PointResult& res = results[i];
    res.label = sanitize_for_path(sweep.values[i]);
    try {
      Json point = sweep.base;
      point[sweep.axis] = sweep.values[i];
      const fs::path dir = root / (sweep.axis + "_" + res.label);
      point["out_dir"] = dir.string();
      const RunConfig config = run_config_from_json(point);
      std::ostringstream sink;  // per-run chatter stays out of the shared stream
      res.summaries = execute_run(config, dir, sink);
    } catch (const std::exception& e) {
      res.failed = true;
      res.error = e.what();
    }
  }

  std::ofstream cmp(root / "comparison.csv");
  cmp << "axis_value,n_seeds,final_v_r_mean,final_v_c_0_mean,tail_v_r_mean,"
         "tail_v_c_0_mean,flip_count_mean,status\n";
  bool any_failed = false;
  for (const PointResult& res : results) {
    if (res.failed) {
      any_failed = true;
      cmp << res.label << ",0,nan,nan,nan,nan,nan,failed\n";
      err << "sweep point " << res.label << " failed: " << res.error << '\n';
      continue;
    }
    const double n_seeds = static_cast<double>(res.summaries.size());
    double fr = 0.0, fc = 0.0, tr = 0.0, tc = 0.0, flips = 0.0;
    for (const SeedSummary& s : res.summaries) {
      fr += s.final_v_r / n_seeds;
      fc += (s.final_v_c.empty() ? 0.0 : s.final_v_c[0]) / n_seeds;
      tr += s.tail_v_r / n_seeds;
      tc += (s.tail_v_c.empty() ? 0.0 : s.tail_v_c[0]) / n_seeds;
      flips += s.flip_count / n_seeds;
    }
    cmp << res.label << ',' << res.summaries.size() << ',' << format_double(fr)
        << ',' << format_double(fc) << ',' << format_double(tr) << ','
        << format_double(tc) << ',' << format_double(flips) << ",ok\n";
    out << "sweep point " << res.label << ": tail v_r=" << format_double(tr)
        << " tail v_c_0=" << format_double(tc)
        << " flips=" << format_double(flips) << '\n';
  }
  out << "comparison written to " << (root / "comparison.csv").string() << '\n';
  return any_failed ? 1 : 0;
}

int cmd_export(const std::vector<std::string>& run_dirs,
               const std::string& combined_out, std::ostream& out,
               std::ostream& err) {
  if (run_dirs.empty()) {
    err << "usage error: need at least one run directory\n";
    return 2;
  }
  bool ok = true;
  std::vector<std::vector<TrainRecord>> combined;
  int combined_channels = -1;
  for (const std::string& dir_name : run_dirs) {
    const fs::path dir = resolve_out_dir(dir_name);
    const fs::path summary_path = dir / "summary.json";
    if (!fs::exists(summary_path)) {
      err << "config error: " << summary_path.string() << " not found\n";
      return 2;
    }
    Json summary;
    {
      std::ifstream in(summary_path);
      in >> summary;
    }
    const Json& cfg = summary.at("config");
    const std::string algo_name = cfg.value("algorithm", "pcrpo");
    const Algorithm algo = algo_name == "crpo"
                               ? Algorithm::Crpo
                               : (algo_name == "scrpo" ? Algorithm::Scrpo
                                                       : Algorithm::Pcrpo);
    const int warmup = cfg.value("safety_warmup_iters", 0);
    const auto limits_vec = cfg.at("resolved_limits").get<std::vector<double>>();
    const Vector limits =
        Eigen::Map<const Vector>(limits_vec.data(), limits_vec.size());

    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("train_seed", 0) == 0 && name.ends_with(".csv")) {
        csvs.push_back(entry.path());
      }
    }
    std::sort(csvs.begin(), csvs.end());
    if (csvs.empty()) {
      err << "config error: no train_seed*.csv files in " << dir.string() << '\n';
      return 2;
    }

    std::vector<std::vector<TrainRecord>> runs;
    for (const fs::path& csv : csvs) {
      std::ifstream in(csv);
      int n_channels = 0;
      std::vector<TrainRecord> records = read_train_csv(in, &n_channels);
      const auto problems =
          validate_train_log(records, limits, algo, warmup);
      if (!problems.empty()) {
        ok = false;
        for (const std::string& p : problems) {
          err << csv.filename().string() << ": " << p << '\n';
        }
      }
      combined_channels = n_channels;
      runs.push_back(records);
      combined.push_back(std::move(records));
    }
    std::ofstream agg(dir / "aggregate.csv");
    write_aggregate_csv(agg, runs, combined_channels);
    out << dir.string() << ": " << runs.size() << " logs validated"
        << (ok ? "" : " (with inconsistencies)") << '\n';
  }
  if (!combined_out.empty()) {
    std::ofstream agg(resolve_out_dir(combined_out));
    write_aggregate_csv(agg, combined, combined_channels);
    out << "combined aggregate written to " << combined_out << '\n';
  }
  return ok ? 0 : 1;
}

}  // namespace pcrpo
