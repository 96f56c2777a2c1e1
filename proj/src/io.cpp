#include "mccr/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "mccr/errors.hpp"

namespace mccr::io {

namespace {

[[noreturn]] void fail(const std::string& ctx, const std::string& msg) {
  throw ValidationError(ctx.empty() ? msg : ctx + ": " + msg);
}

std::string join(const std::string& ctx, const std::string& field) {
  return ctx.empty() ? field : ctx + "." + field;
}

template <class T>
T get(const json& j, const std::string& field, const std::string& ctx) {
  if (!j.is_object()) fail(ctx, "expected a JSON object");
  if (!j.contains(field)) fail(ctx, "missing field '" + join(ctx, field) + "'");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    fail(ctx, "field '" + join(ctx, field) + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const std::string& field, const std::string& ctx, T fallback) {
  if (!j.is_object()) fail(ctx, "expected a JSON object");
  if (!j.contains(field)) return fallback;
  return get<T>(j, field, ctx);
}

// Re-throws construction errors with the JSON path prefixed.
template <class F>
auto with_context(const std::string& ctx, F&& make) {
  try {
    return make();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (what.rfind(ctx, 0) == 0) throw;
    fail(ctx, what);
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

NoiseModel noise_from_json_ctx(const json& j, const std::string& ctx) {
  const json comps = get<json>(j, "components", ctx);
  if (!comps.is_array() || comps.empty()) fail(ctx, "field '" + join(ctx, "components") + "' must be a non-empty array");
  std::vector<StableComponent> components;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string c = join(ctx, "components[" + std::to_string(i) + "]");
    const double alpha = get<double>(comps[i], "alpha", c);
    const double gamma = get<double>(comps[i], "gamma", c);
    const double mu = get_or<double>(comps[i], "mu", c, 0.0);
    components.push_back(with_context(c, [&] { return StableComponent(alpha, gamma, mu); }));
  }
  std::vector<double> weights =
      get_or<std::vector<double>>(j, "weights", ctx, std::vector<double>(components.size(), 1.0));
  return with_context(join(ctx, "weights"), [&] { return NoiseModel(components, weights); });
}

Domain domain_from_json_ctx(const json& j, const std::string& ctx) {
  auto lower = get<std::vector<double>>(j, "lower", ctx);
  auto upper = get<std::vector<double>>(j, "upper", ctx);
  return with_context(ctx, [&] { return Domain(lower, upper); });
}

FeatureMap feature_map_from_json_ctx(const json& j, const std::string& ctx) {
  const auto kind = get<std::string>(j, "kind", ctx);
  return with_context(ctx, [&] {
    if (kind == "affine") return FeatureMap::affine(get<std::size_t>(j, "dim", ctx));
    if (kind == "polynomial") {
      return FeatureMap::polynomial(get_or<std::size_t>(j, "dim", ctx, 1), get<int>(j, "degree", ctx));
    }
    if (kind == "trigonometric") {
      return FeatureMap::trigonometric(get_or<std::size_t>(j, "dim", ctx, 1), get<int>(j, "max_frequency", ctx));
    }
    if (kind == "gaussian_centers") {
      return FeatureMap::gaussian_centers(get<std::vector<std::vector<double>>>(j, "centers", ctx),
                                          get<double>(j, "bandwidth", ctx));
    }
    fail(ctx, "unknown feature map kind '" + kind + "'");
  });
}

Hypothesis hypothesis_from_json_ctx(const json& j, const std::string& ctx) {
  FeatureMap map = feature_map_from_json_ctx(get<json>(j, "feature_map", ctx), join(ctx, "feature_map"));
  auto coefficients = get<std::vector<double>>(j, "coefficients", ctx);
  return with_context(ctx, [&] { return Hypothesis(std::move(map), std::move(coefficients)); });
}

SolverConfig solver_from_json_ctx(const json& j, const std::string& ctx) {
  SolverConfig c;
  c.max_iterations = get_or<int>(j, "max_iterations", ctx, c.max_iterations);
  c.rel_tol = get_or<double>(j, "rel_tol", ctx, c.rel_tol);
  c.stationarity_tol = get_or<double>(j, "stationarity_tol", ctx, c.stationarity_tol);
  c.restarts = get_or<int>(j, "restarts", ctx, c.restarts);
  c.perturbation = get_or<double>(j, "perturbation", ctx, c.perturbation);
  c.jitter = get_or<double>(j, "jitter", ctx, c.jitter);
  with_context(ctx, [&] {
    c.validate();
    return 0;
  });
  return c;
}

L2Method l2_from_json_ctx(const json& j, const std::string& ctx) {
  if (j.is_string()) {
    if (j.get<std::string>() == "grid") return L2Method::grid();
    fail(ctx, "expected \"grid\" or {\"monte_carlo\": n, \"seed\": s}");
  }
  const auto n = get<std::size_t>(j, "monte_carlo", ctx);
  const auto seed = get_or<std::uint64_t>(j, "seed", ctx, 0);
  return L2Method::monte_carlo(n, RngState{seed, 0});
}

EstimatorSpec estimator_from_json_ctx(const json& j, const std::string& ctx) {
  const auto kind = get<std::string>(j, "kind", ctx);
  EstimatorSpec e;
  if (kind == "mccr") {
    if (j.contains("sigma_grid")) {
      e = EstimatorSpec::mccr(get<std::vector<double>>(j, "sigma_grid", ctx));
    } else {
      e = EstimatorSpec::mccr({get<double>(j, "sigma", ctx)});
    }
    if (e.sigma_grid.empty()) fail(ctx, "field '" + join(ctx, "sigma_grid") + "' must be non-empty");
    for (double s : e.sigma_grid) {
      if (!(s > 0.0)) fail(ctx, "sigma must be > 0");
    }
  } else if (kind == "ols") {
    e = EstimatorSpec::ols();
  } else if (kind == "huber") {
    e = EstimatorSpec::huber(get_or<double>(j, "delta", ctx, 1.345));
    if (!(e.huber_delta > 0.0)) fail(ctx, "huber delta must be > 0");
  } else {
    fail(ctx, "unknown estimator kind '" + kind + "'");
  }
  e.label = get_or<std::string>(j, "label", ctx, e.label);
  return e;
}

void append_row(std::string& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

json to_json(const StableComponent& c) { return {{"alpha", c.alpha()}, {"gamma", c.gamma()}, {"mu", c.mu()}}; }

json to_json(const NoiseModel& m) {
  json comps = json::array();
  for (const auto& c : m.components()) comps.push_back(to_json(c));
  return {{"components", comps}, {"weights", std::vector<double>(m.weights().begin(), m.weights().end())}};
}

NoiseModel noise_from_json(const json& j) { return noise_from_json_ctx(j, "noise"); }

json to_json(const Domain& d) {
  return {{"lower", std::vector<double>(d.lower().begin(), d.lower().end())},
          {"upper", std::vector<double>(d.upper().begin(), d.upper().end())}};
}

Domain domain_from_json(const json& j) { return domain_from_json_ctx(j, "domain"); }

json to_json(const FeatureMap& m) {
  switch (m.kind()) {
    case FeatureKind::affine:
      return {{"kind", "affine"}, {"dim", m.input_dim()}};
    case FeatureKind::polynomial:
      return {{"kind", "polynomial"}, {"dim", m.input_dim()}, {"degree", m.degree()}};
    case FeatureKind::trigonometric:
      return {{"kind", "trigonometric"}, {"dim", m.input_dim()}, {"max_frequency", m.max_frequency()}};
    case FeatureKind::gaussian_centers:
      return {{"kind", "gaussian_centers"}, {"centers", m.centers()}, {"bandwidth", m.bandwidth()}};
  }
  return {};
}

FeatureMap feature_map_from_json(const json& j) { return feature_map_from_json_ctx(j, "feature_map"); }

json to_json(const Hypothesis& h) {
  return {{"feature_map", to_json(h.feature_map())},
          {"coefficients", std::vector<double>(h.coefficients().begin(), h.coefficients().end())}};
}

Hypothesis hypothesis_from_json(const json& j) { return hypothesis_from_json_ctx(j, "hypothesis"); }

json to_json(const LossSpec& s) {
  switch (s.kind()) {
    case LossSpec::Kind::correntropy:
      return {{"kind", "correntropy"}, {"sigma", s.scale()}};
    case LossSpec::Kind::squared:
      return {{"kind", "squared"}};
    case LossSpec::Kind::huber:
      return {{"kind", "huber"}, {"delta", s.scale()}};
  }
  return {};
}

json to_json(const SolverConfig& c) {
  return {{"max_iterations", c.max_iterations}, {"rel_tol", c.rel_tol},
          {"stationarity_tol", c.stationarity_tol}, {"restarts", c.restarts},
          {"perturbation", c.perturbation}, {"jitter", c.jitter}};
}

SolverConfig solver_config_from_json(const json& j) { return solver_from_json_ctx(j, "solver"); }

json to_json(const FitReport& r) {
  return {{"hypothesis", to_json(r.hypothesis)},
          {"loss", to_json(r.loss)},
          {"empirical_risk", number_or_null(r.empirical_risk)},
          {"trace", r.trace},
          {"restart_traces", r.restart_traces},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"winning_restart", r.winning_restart},
          {"jitter_used", r.jitter_used},
          {"stationarity", number_or_null(r.stationarity)}};
}

json to_json(const SandwichReport& r) {
  return {{"excess_risk", r.excess_risk},   {"l2_distance", r.l2_distance},
          {"constant", r.constant},         {"lower", r.lower},
          {"lower_ok", r.lower_ok},         {"upper_ok", r.upper_ok},
          {"holds", r.holds()},             {"lower_margin", optional_number(r.lower_margin)},
          {"upper_margin", optional_number(r.upper_margin)}, {"slack", r.slack}};
}

json to_json(const L2Method& m) {
  if (m.kind == L2Method::Kind::grid) return "grid";
  return {{"monte_carlo", m.samples}, {"seed", m.rng.seed}};
}

L2Method l2_method_from_json(const json& j) { return l2_from_json_ctx(j, "outer"); }

json to_json(const RiskProblem& p) {
  return {{"noise", to_json(p.noise)},   {"target", to_json(p.target)}, {"candidate", to_json(p.candidate)},
          {"sigma", p.sigma},            {"M", p.bound},                {"domain", to_json(p.domain)},
          {"outer", to_json(p.outer)}};
}

RiskProblem risk_problem_from_json(const json& j) {
  Hypothesis target = hypothesis_from_json_ctx(get<json>(j, "target", ""), "target");
  Hypothesis candidate = hypothesis_from_json_ctx(get<json>(j, "candidate", ""), "candidate");
  Domain domain = j.contains("domain") ? domain_from_json_ctx(j.at("domain"), "domain")
                                       : Domain::unit(target.feature_map().input_dim());
  RiskProblem p{
      .noise = noise_from_json_ctx(get<json>(j, "noise", ""), "noise"),
      .target = std::move(target),
      .candidate = std::move(candidate),
      .sigma = get<double>(j, "sigma", ""),
      .bound = get<double>(j, "M", ""),
      .domain = std::move(domain),
      .outer = j.contains("outer") ? l2_from_json_ctx(j.at("outer"), "outer") : L2Method::grid(),
  };
  p.validate();
  return p;
}

json to_json(const EstimatorSpec& e) {
  json j = {{"kind", to_string(e.kind)}, {"label", e.label}};
  if (e.kind == EstimatorSpec::Kind::mccr) j["sigma_grid"] = e.sigma_grid;
  if (e.kind == EstimatorSpec::Kind::huber) j["delta"] = e.huber_delta;
  return j;
}

EstimatorSpec estimator_from_json(const json& j) { return estimator_from_json_ctx(j, "estimator"); }

json to_json(const ExperimentSpec& s) {
  json estimators = json::array();
  for (const auto& e : s.estimators) estimators.push_back(to_json(e));
  return {{"study", s.study == ExperimentSpec::Study::rate ? "rate" : "outlier"},
          {"domain", to_json(s.domain)},
          {"target", to_json(s.target)},
          {"noise", to_json(s.noise)},
          {"estimators", estimators},
          {"sizes", s.sizes},
          {"trials", s.trials},
          {"seed", s.seed},
          {"metric", s.metric == L2Method::Kind::grid ? "grid" : "monte_carlo"},
          {"metric_samples", s.metric_samples},
          {"solver", to_json(s.solver)}};
}

ExperimentSpec experiment_from_json(const json& j) {
  const auto study = get_or<std::string>(j, "study", "", "rate");
  if (study != "rate" && study != "outlier") fail("study", "must be \"rate\" or \"outlier\"");
  Hypothesis target = hypothesis_from_json_ctx(get<json>(j, "target", ""), "target");
  Domain domain = j.contains("domain") ? domain_from_json_ctx(j.at("domain"), "domain")
                                       : Domain::unit(target.feature_map().input_dim());
  const json est = get<json>(j, "estimators", "");
  if (!est.is_array() || est.empty()) fail("estimators", "must be a non-empty array");
  std::vector<EstimatorSpec> estimators;
  for (std::size_t i = 0; i < est.size(); ++i) {
    estimators.push_back(estimator_from_json_ctx(est[i], "estimators[" + std::to_string(i) + "]"));
  }
  const auto metric = get_or<std::string>(j, "metric", "", "grid");
  if (metric != "grid" && metric != "monte_carlo") fail("metric", "must be \"grid\" or \"monte_carlo\"");

  ExperimentSpec s{
      .study = study == "rate" ? ExperimentSpec::Study::rate : ExperimentSpec::Study::outlier,
      .domain = std::move(domain),
      .target = std::move(target),
      .noise = noise_from_json_ctx(get<json>(j, "noise", ""), "noise"),
      .estimators = std::move(estimators),
  };
  s.sizes = get_or<std::vector<std::size_t>>(j, "sizes", "", s.sizes);
  s.trials = get_or<int>(j, "trials", "", s.trials);
  s.seed = get_or<std::uint64_t>(j, "seed", "", s.seed);
  s.metric = metric == "grid" ? L2Method::Kind::grid : L2Method::Kind::monte_carlo;
  s.metric_samples = get_or<std::size_t>(j, "metric_samples", "", s.metric_samples);
  if (j.contains("solver")) s.solver = solver_from_json_ctx(j.at("solver"), "solver");
  s.validate();
  return s;
}

json to_json(const MethodSummary& s) {
  json medians = json::array();
  for (double m : s.median_error) medians.push_back(number_or_null(m));
  return {{"method", s.method},
          {"sizes", s.sizes},
          {"median_l2_error", medians},
          {"slope", number_or_null(s.slope)},
          {"slope_stderr", number_or_null(s.slope_stderr)},
          {"slope_2se_low", number_or_null(s.slope - 2.0 * s.slope_stderr)},
          {"slope_2se_high", number_or_null(s.slope + 2.0 * s.slope_stderr)},
          {"monotone", s.monotone},
          {"records", s.records},
          {"failures", s.failures}};
}

std::string results_csv(const RateStudyResult& r) {
  std::string out = "method,n,trial,sigma,l2_error,emp_risk,converged,seed\n";
  for (const auto& rec : r.records) {
    append_row(out, {rec.method, std::to_string(rec.n), std::to_string(rec.trial),
                     std::isnan(rec.sigma) ? std::string() : format_double(rec.sigma), format_double(rec.l2_error),
                     format_double(rec.emp_risk), rec.converged ? "1" : "0", std::to_string(rec.seed)});
  }
  return out;
}

std::string outlier_table_csv(const OutlierStudyResult& r) {
  std::string out = "n";
  for (const auto& m : r.methods) out += "," + m;
  out += ",mccr_over_ols\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.n);
    for (double v : row.median_error) out += "," + format_double(v);
    out += "," + format_double(row.mccr_over_ols) + "\n";
  }
  return out;
}

std::string dataset_csv(const Dataset& d) {
  std::string out;
  for (std::size_t j = 0; j < d.dim(); ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (double v : d.x(i)) out += format_double(v) + ",";
    out += format_double(d.y()[i]) + "\n";
  }
  return out;
}

Dataset dataset_from_csv(std::string_view text) {
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      const std::string cell = line.substr(start, end - start);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) numeric = false;
      row.push_back(v);
      start = end + 1;
    }
    if (!numeric) {
      if (line_no == 1) continue;  // header
      throw ValidationError("dataset line " + std::to_string(line_no) + " is not numeric");
    }
    if (row.size() < 2) throw ValidationError("dataset rows need at least one input and a response");
    if (columns == 0) columns = row.size();
    if (row.size() != columns) throw ValidationError("dataset line " + std::to_string(line_no) + " has the wrong column count");
    xs.insert(xs.end(), row.begin(), row.end() - 1);
    ys.push_back(row.back());
  }
  if (ys.empty()) throw ValidationError("dataset is empty");
  return Dataset(columns - 1, std::move(xs), std::move(ys));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ValidationError("failed writing " + path.string());
}

}  // namespace mccr::io
