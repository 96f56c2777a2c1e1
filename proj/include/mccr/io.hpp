#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mccr/experiments.hpp"
#include "mccr/hypothesis.hpp"
#include "mccr/mcc_core.hpp"
#include "mccr/risk_oracle.hpp"
#include "mccr/solver.hpp"
#include "mccr/stable_noise.hpp"

namespace mccr::io {

using nlohmann::json;

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Shortest decimal string that round-trips to the same double; "nan"/"inf"
/// for non-finite values.
std::string format_double(double v);

std::string sha256_hex(std::string_view bytes);

// Every parser throws ValidationError naming the offending field.
json to_json(const StableComponent& c);
json to_json(const NoiseModel& m);
NoiseModel noise_from_json(const json& j);

json to_json(const Domain& d);
Domain domain_from_json(const json& j);

json to_json(const FeatureMap& m);
FeatureMap feature_map_from_json(const json& j);

json to_json(const Hypothesis& h);
Hypothesis hypothesis_from_json(const json& j);

json to_json(const LossSpec& s);
json to_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const json& j);

json to_json(const FitReport& r);
json to_json(const SandwichReport& r);

json to_json(const L2Method& m);
L2Method l2_method_from_json(const json& j);

/// {"noise", "target", "candidate", "sigma", "M", "domain"?, "outer"?}
json to_json(const RiskProblem& p);
RiskProblem risk_problem_from_json(const json& j);

json to_json(const EstimatorSpec& e);
EstimatorSpec estimator_from_json(const json& j);

json to_json(const ExperimentSpec& s);
ExperimentSpec experiment_from_json(const json& j);

json to_json(const MethodSummary& s);

/// Columns: method,n,trial,sigma,l2_error,emp_risk,converged,seed
std::string results_csv(const RateStudyResult& r);
/// Columns: n, one median-error column per method, mccr_over_ols
std::string outlier_table_csv(const OutlierStudyResult& r);

/// Header "x1,...,xd,y"; the last column is the response.
std::string dataset_csv(const Dataset& d);
Dataset dataset_from_csv(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Parses JSON; throws ValidationError naming the file on syntax errors.
json read_json_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace mccr::io
