// mccr: command-line front end.
//
//   mccr sample --spec noise.json --out DIR [--seed U64]
//   mccr fit    --spec fit.json   --out DIR [--seed U64]
//   mccr verify --spec risk.json  --out DIR
//   mccr rates  --spec study.json --out DIR [--seed U64] [--jobs N]
//
// Exit codes: 0 success, 1 sandwich bound violated (verify only),
// 2 input validation, 3 numerical failure, 4 experiment degradation.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mccr/errors.hpp"
#include "mccr/experiments.hpp"
#include "mccr/io.hpp"
#include "mccr/risk_oracle.hpp"
#include "mccr/solver.hpp"
#include "mccr/stable_noise.hpp"

namespace fs = std::filesystem;
using mccr::io::json;

namespace {

struct RunConfig {
  std::string command;
  fs::path spec;
  fs::path out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw mccr::ValidationError("cannot create output directory " + dir_.string());
  }

  void write(const std::string& name, const std::string& content) {
    mccr::io::write_file(dir_ / name, content);
    hashes_[name] = mccr::io::sha256_hex(content);
  }

  void write_manifest(json manifest) {
    manifest["artifact_version"] = mccr::io::kArtifactVersion;
    manifest["outputs"] = hashes_;
    mccr::io::write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  json hashes_ = json::object();
};

int cmd_sample(const RunConfig& cfg) {
  const json spec = mccr::io::read_json_file(cfg.spec);
  const json noise_json = spec.contains("noise") ? spec.at("noise") : spec;
  const mccr::NoiseModel noise = mccr::io::noise_from_json(noise_json);
  if (!spec.contains("n") || !spec.at("n").is_number_unsigned() || spec.at("n").get<std::uint64_t>() == 0) {
    throw mccr::ValidationError("field 'n' must be a positive integer");
  }
  const auto n = spec.at("n").get<std::size_t>();
  const std::uint64_t seed = cfg.seed.value_or(spec.value("seed", std::uint64_t{0}));
  const mccr::RngState state{seed, spec.value("stream", std::uint64_t{0})};

  std::string body;
  for (double v : mccr::sample_mixture(noise, state, n)) body += mccr::io::format_double(v) + "\n";

  Outputs out(cfg.out);
  out.write("samples.csv", body);
  out.write_manifest({{"command", "sample"},
                      {"noise", mccr::io::to_json(noise)},
                      {"n", n},
                      {"seed", seed},
                      {"stream", state.stream}});
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  const json spec = mccr::io::read_json_file(cfg.spec);
  if (!spec.contains("data") || !spec.at("data").is_string()) throw mccr::ValidationError("missing field 'data'");
  fs::path data_path = spec.at("data").get<std::string>();
  if (data_path.is_relative()) data_path = cfg.spec.parent_path() / data_path;
  const mccr::Dataset data = mccr::io::dataset_from_csv(mccr::io::read_file(data_path));
  if (!spec.contains("feature_map")) throw mccr::ValidationError("missing field 'feature_map'");
  const mccr::FeatureMap space = mccr::io::feature_map_from_json(spec.at("feature_map"));
  if (!spec.contains("estimator")) throw mccr::ValidationError("missing field 'estimator'");
  const mccr::EstimatorSpec est = mccr::io::estimator_from_json(spec.at("estimator"));
  const mccr::SolverConfig solver =
      spec.contains("solver") ? mccr::io::solver_config_from_json(spec.at("solver")) : mccr::SolverConfig{};
  const std::uint64_t seed = cfg.seed.value_or(spec.value("seed", std::uint64_t{0}));
  const mccr::RngState rng{seed, 0};

  json report;
  switch (est.kind) {
    case mccr::EstimatorSpec::Kind::ols:
      report = mccr::io::to_json(mccr::fit_ols(space, data, solver.jitter));
      break;
    case mccr::EstimatorSpec::Kind::huber:
      report = mccr::io::to_json(mccr::fit_huber(space, data, est.huber_delta, solver));
      break;
    case mccr::EstimatorSpec::Kind::mccr: {
      double sigma = est.sigma_grid.front();
      json selection = nullptr;
      if (est.sigma_grid.size() > 1) {
        const auto sel = mccr::select_sigma(space, data, est.sigma_grid, solver, rng.child(1));
        sigma = sel.sigma;
        json scores = json::array();
        for (double s : sel.validation_scores) scores.push_back(std::isfinite(s) ? json(s) : json(nullptr));
        selection = {{"sigma_grid", est.sigma_grid}, {"validation_median_abs_residual", scores}};
      }
      report = mccr::io::to_json(mccr::fit_mccr(space, data, sigma, solver, rng));
      report["sigma_selection"] = selection;
      break;
    }
  }
  report["estimator"] = mccr::io::to_json(est);
  report["n"] = data.size();

  Outputs out(cfg.out);
  out.write("fit_report.json", report.dump(2) + "\n");
  out.write_manifest({{"command", "fit"},
                      {"spec", spec},
                      {"seed", seed},
                      {"data_sha256", mccr::io::sha256_hex(mccr::io::read_file(data_path))}});
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  const json spec = mccr::io::read_json_file(cfg.spec);
  const mccr::RiskProblem problem = mccr::io::risk_problem_from_json(spec);
  const mccr::SandwichReport report = mccr::verify_sandwich(problem);
  json j = mccr::io::to_json(report);

  bool closed_form = true;
  for (const auto& c : problem.noise.components()) closed_form = closed_form && (c.alpha() == 1.0 || c.alpha() == 2.0);
  if (closed_form) {
    const double direct = mccr::excess_risk_direct(problem);
    j["excess_risk_direct"] = direct;
    j["spectral_direct_rel_gap"] =
        std::abs(report.excess_risk - direct) / std::max(std::abs(direct), 1e-12);
  }

  Outputs out(cfg.out);
  out.write("sandwich.json", j.dump(2) + "\n");
  out.write_manifest({{"command", "verify"}, {"spec", mccr::io::to_json(problem)}});
  std::cout << (report.holds() ? "sandwich bound holds" : "sandwich bound VIOLATED") << "\n";
  return report.holds() ? 0 : 1;
}

int cmd_rates(const RunConfig& cfg) {
  mccr::ExperimentSpec spec = mccr::io::experiment_from_json(mccr::io::read_json_file(cfg.spec));
  if (cfg.seed) spec.seed = *cfg.seed;

  Outputs out(cfg.out);
  json manifest = {{"command", "rates"}, {"spec", mccr::io::to_json(spec)}};
  const mccr::RateStudyResult* study = nullptr;
  std::optional<mccr::OutlierStudyResult> outlier;
  std::optional<mccr::RateStudyResult> rate;
  if (spec.study == mccr::ExperimentSpec::Study::outlier) {
    outlier = mccr::run_outlier_study(spec, cfg.jobs);
    study = &outlier->study;
    out.write("comparison.csv", mccr::io::outlier_table_csv(*outlier));
    manifest["contamination"] = outlier->contamination;
  } else {
    rate = mccr::run_rate_study(spec, cfg.jobs);
    study = &*rate;
  }
  out.write("results.csv", mccr::io::results_csv(*study));

  json summaries = json::array();
  for (const auto& s : study->summaries) {
    summaries.push_back(mccr::io::to_json(s));
    std::cout << s.method << ": slope " << mccr::io::format_double(s.slope) << " +/- "
              << mccr::io::format_double(2.0 * s.slope_stderr) << (s.monotone ? "" : " (non-monotone)") << "\n";
  }
  manifest["summaries"] = summaries;
  manifest["warnings"] = study->warnings;
  out.write_manifest(manifest);

  for (const auto& w : study->warnings) std::cerr << "warning: " << w << "\n";
  if (study->degraded()) throw mccr::DegradationError("more than 5% of fits failed for at least one method");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum correntropy regression under mixture-stable noise"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", cfg.spec, "Path to the spec JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", cfg.out, "Output directory")->required();
    sub->add_option("--seed", cfg.seed, "Override the spec seed");
    sub->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  for (const char* name : {"sample", "fit", "verify", "rates"}) {
    const std::string help = std::string(name) == "sample" ? "Draw noise samples"
                             : std::string(name) == "fit"  ? "Fit an estimator to a dataset CSV"
                             : std::string(name) == "verify"
                                 ? "Check the excess-risk sandwich bound for one problem"
                                 : "Run a convergence-rate or outlier study";
    add_common(app.add_subcommand(name, help));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (cfg.command == "sample") return cmd_sample(cfg);
    if (cfg.command == "fit") return cmd_fit(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    return cmd_rates(cfg);
  } catch (const mccr::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mccr::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const mccr::DegradationError& e) {
    std::cerr << "degraded: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
