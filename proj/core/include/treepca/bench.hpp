#pragma once
// Named test functions, Monte-Carlo error estimation, and a seeded experiment
// runner that repeats approximation runs and reports empirical quantiles with
// deterministic CSV/JSON serialization.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "treepca/hopca.hpp"

namespace treepca {

// Named functions with their natural domain measures:
//   henon_heiles       d >= 2, standard Gaussian dimensions
//   sine_sum           d >= 2, uniform(-1,1) dimensions
//   sum_bivariate_poly4  even d >= 2, uniform(-1,1): sum of g(y,z) = sum_{j<=3} y^j z^j
//   sum_bivariate_gauss  even d >= 2, uniform(-1,1): sum of g(y,z) = exp(-(y-z)^2/8)
//   borehole           d = 8, two Gaussian + six uniform(-1,1) dimensions
//   tensorized_square  binary digits of t in [0,1): f(t) = t^2
//   tensorized_sqrt    binary digits of t in [0,1): f(t) = sqrt(t)
BlackBox test_function(const std::string& name, int d);
std::vector<std::string> test_function_names();

// Polynomial space matched to a measure: scaled Legendre on uniform
// intervals, normalized Hermite on the standard Gaussian, indicator basis on
// finite supports (where `degree` is ignored).
FeatureSpace space_for(const Measure1D& measure, int degree);

// Degree from a target tolerance: ceil(log10(1/eps)), at least 1.
int degree_for_tolerance(double eps);

struct ErrorEstimate {
  double l2 = 0.0;    // sqrt(sum (u-v)^2 / sum u^2)
  double linf = 0.0;  // max|u-v| / max|u| over the same samples
};

// Monte-Carlo relative errors over `nsamples` i.i.d. draws from the product
// measure. Uses its own RNG stream and the uncounted evaluation path, so the
// training budget is untouched. Throws if the norm estimate is zero.
ErrorEstimate mc_errors(const BlackBox& u, const TreeTensor& approx, std::int64_t nsamples,
                        std::uint64_t seed);
double mc_relative_error(const BlackBox& u, const TreeTensor& approx, std::int64_t nsamples,
                         std::uint64_t seed);

struct ExperimentConfig {
  std::string label;            // output file stem; derived from content if empty
  std::string function;         // test_function name
  int d = 0;
  std::string tree = "tt";      // tucker | tt | ttt | balanced
  int degree = -1;              // -1: use the tolerance degree rule
  std::string mode = "rank";    // rank | tolerance
  int rank = 0;                 // rank mode
  double gamma = 1.0;           // sample multiplier
  double eps = 0.0;             // tolerance mode
  std::string local_rule = "eps";  // eps | eps_sqrt (eps / sqrt(#active))
  int runs = 10;
  std::uint64_t base_seed = 20260819;
  std::int64_t mc_samples = 100000;
  int pool = 1000;

  std::string effective_label() const;
  int effective_degree() const;
};
void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

struct RunRow {
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string message;     // failure description when !ok
  double err_l2 = 0.0;
  double err_linf = 0.0;
  std::int64_t evaluations = 0;
  std::int64_t storage = 0;
  std::vector<int> ranks;  // bottom-up node order
  int max_rank = 0;
};

// Empirical order-statistic quantiles: index ceil(q*n) - 1 of the sorted
// successful values (so q05/q95 bracket a 90% range).
struct QuantileSummary {
  double q05 = 0.0, q50 = 0.0, q95 = 0.0;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<RunRow> rows;
  int failures = 0;
  QuantileSummary err_l2, err_linf, evaluations, storage, max_rank;
  std::vector<int> mean_ranks;  // per-node rounded mean over successful runs
};

// Runs `cfg.runs` independent approximations with seeds base_seed + i,
// estimates errors, and aggregates quantiles over the successful rows.
// Failures are captured per row, never thrown.
RunReport run_experiment(const ExperimentConfig& cfg);

// Deterministic serializations (doubles printed with %.17g).
std::string to_csv(const RunReport& report);
nlohmann::json report_json(const RunReport& report);

// Writes <dir>/<label>.csv and/or .json; format is "csv", "json" or "both".
// Returns the paths written.
std::vector<std::string> write_report(const RunReport& report, const std::string& dir,
                                      const std::string& format);

// Canned experiment grids reproducing the library's headline studies; a name
// expands to one config per grid point.
std::vector<std::string> preset_names();
std::vector<ExperimentConfig> preset_configs(const std::string& name);

}  // namespace treepca
