#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "manilip/data.hpp"
#include "manilip/trainers.hpp"

namespace manilip {

/// Unreadable or invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while running an experiment, tagged with the stage that failed
/// ("dataset", "graph", "training", "evaluation", "output").
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct TwoMoonsParams {
  int labeled_per_class = 1;
  int unlabeled_per_class = 200;
  double noise = 0.05;
  bool fixed_seed = false;  ///< when false the run seed also draws the data
  std::uint64_t seed = 0;
};

struct NavigationParams {
  NavEnv env = NavEnv::with_default_obstacles();
  int n_starts = 100;
};

struct CsvParams {
  std::string train_path;
  std::string test_path;
  CsvSchema schema;
};

struct ExperimentConfig {
  std::string experiment;  ///< twomoons | navigate | fit_csv | ablate_t | laplacian_info
  std::string output_dir = "results";
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  int grid_resolution = 50;
  TrainConfig defaults;
  std::map<Method, nlohmann::json> overrides;
  TwoMoonsParams moons;
  NavigationParams navigation;
  CsvParams csv;
  std::vector<double> temperatures;

  /// defaults + per-method overrides, with method and seed filled in.
  TrainConfig train_config(Method method, std::uint64_t seed) const;
};

/// Throws ConfigError. Relative CSV paths resolve against `base_dir` when given.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::string& base_dir = "");
ExperimentConfig load_experiment_config(const std::string& path);

/// Applies the keys present in `patch` on top of `cfg`.
void apply_train_json(TrainConfig& cfg, const nlohmann::json& patch);

/// One line of metrics.jsonl.
struct MetricRecord {
  std::string experiment;
  Method method = Method::erm;
  std::uint64_t seed = 0;
  std::optional<double> temperature;
  std::string metric_name;  ///< accuracy | mse | successes
  double metric = 0.0;
  std::optional<int> n_starts;
  double lipschitz = 0.0;
  double feasibility_gap = 0.0;
  double final_loss = 0.0;
  bool feasible = false;
  double mu_final = 0.0;
  int epochs = 0;
  double wall_seconds = 0.0;

  /// Deterministic fields only; wall time lives in run_times.jsonl.
  nlohmann::ordered_json to_json() const;
};

/// Writes metrics.jsonl (sorted by method, seed, temperature) and run_times.jsonl.
void emit_metrics(std::vector<MetricRecord> records, const std::string& output_dir);

/// Runs the configured experiment, writing into cfg.output_dir.
/// Throws StageError on failure.
std::vector<MetricRecord> run_experiment(const ExperimentConfig& cfg);

/// Regular res x res lattice over the bounding box of `points` (first output only).
/// Rows: x, y, f.
Mat decision_grid(const MlpParams& model, const Mat& points, int resolution);

}  // namespace manilip
