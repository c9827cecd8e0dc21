#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lhc/market.hpp"

namespace lhc {

struct GridSpec {
  double T_star = 1.0;
  int n_steps = 50;
  bool operator==(const GridSpec&) const = default;
};

struct AtomSpec {
  std::vector<double> y;
  double rho = 0.0;
  bool operator==(const AtomSpec&) const = default;
};

struct ModelSpec {
  int dim = 1;
  std::vector<double> a;
  std::vector<std::vector<double>> Q;  // dense, dim x dim
  std::vector<AtomSpec> atoms;
  bool operator==(const ModelSpec&) const = default;
};

/// Initial forward curve: flat, Nelson-Siegel or raw grid values.
struct CurveSpec {
  std::string type = "flat";
  double rate = 0.0;
  double beta0 = 0.0, beta1 = 0.0, beta2 = 0.0, tau = 1.0;
  std::vector<double> values;
  bool operator==(const CurveSpec&) const = default;
};

/// sigma(t, theta) = sigma exp(-decay (theta - t)); decay 0 for constant.
struct VolSpec {
  int model = 0;
  std::string type = "constant";
  std::vector<double> sigma;
  double decay = 0.0;
  bool operator==(const VolSpec&) const = default;
};

using Matrix = std::vector<std::vector<double>>;

struct LambdaSpec {
  std::string mode = "constant";  // constant | piecewise | h1
  Matrix matrix;                  // constant and h1 (default column ignored)
  std::vector<double> breakpoints;
  std::vector<Matrix> matrices;   // piecewise
  bool operator==(const LambdaSpec&) const = default;
};

struct RatingsSpec {
  int K = 2;
  LambdaSpec lambda;
  std::vector<std::vector<double>> deltas;  // per rating: one value or one per node
  int initial_state = 1;                    // 1-based
  bool operator==(const RatingsSpec&) const = default;
};

struct SchemeSpec {
  std::string type = "market_value";
  std::vector<double> loss;  // multiple defaults: one value or one per node
  std::optional<double> gamma;
  bool operator==(const SchemeSpec&) const = default;
};

struct McSpec {
  std::uint64_t n_paths = 100000;
  std::uint64_t seed = 0;
  int checkpoints = 5;
  std::optional<double> maturity;  // defaults to T_star
  double z_threshold = 4.0;
  std::uint64_t export_paths = 10;
  double negative_control_bump = 0.01;
  bool operator==(const McSpec&) const = default;
};

struct OutputSpec {
  std::string directory = "out";
  std::string format = "csv";
  bool operator==(const OutputSpec&) const = default;
};

struct Scenario {
  std::string name;
  GridSpec grid;
  std::vector<ModelSpec> models;
  CurveSpec f0;
  std::vector<CurveSpec> g0;
  VolSpec vol_f;
  std::vector<VolSpec> vol_g;
  std::optional<RatingsSpec> ratings;
  SchemeSpec scheme;
  McSpec mc;
  OutputSpec output;
  bool operator==(const Scenario&) const = default;

  int maturity_node() const;
  bool has_ratings() const { return ratings.has_value(); }
};

/// Parses and validates a scenario document. Errors are ScenarioError with
/// "<source>:<line>: <field path>: <message>".
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::string& path);

/// Canonical JSON: sorted keys, every field written, round-trip exact.
std::string canonical_json(const Scenario& scenario);
/// FNV-1a of the compact canonical form, as 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

std::vector<double> build_curve(const CurveSpec& spec, const TimeGrid& grid);
LevyModel build_levy_model(const ModelSpec& spec);
IntensityMatrixProcess build_generator(const Scenario& scenario);
RecoveryScheme build_recovery(const Scenario& scenario);
/// Market model for the scenario; with `include_ratings` false only the
/// risk-free curve is simulated.
MarketModel build_market(const Scenario& scenario, bool include_ratings = true);

}  // namespace lhc
