#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "manilip/data.hpp"
#include "manilip/duality.hpp"
#include "manilip/laplacian.hpp"
#include "manilip/lipschitz.hpp"
#include "manilip/nn.hpp"

namespace manilip {

enum class Method { erm, ambient, manifold_reg, manifold_lipschitz };
/// How the smoothness term of the Lipschitz Lagrangian is evaluated.
enum class Variant { grad_based, laplacian_based };
/// Both are per-sample mean squared error over output coordinates; the second
/// marks +-1 classification targets read out by sign.
enum class LossKind { mse, mse_pm1_labels };
/// Denominator of the data term in the primal objective: the labeled count, or
/// every point (labeled + unlabeled) as in the semi-supervised Lagrangian.
/// Dual updates and feasibility always use the mean over labeled points.
enum class LossNormalization { labeled, all_points };

std::string to_string(Method m);
std::string to_string(Variant v);
Method parse_method(const std::string& name);
Variant parse_variant(const std::string& name);

/// Every method runs `epochs` x `primal_steps` full-batch gradient steps; the
/// Lipschitz method updates its multipliers once per epoch.
struct TrainConfig {
  Method method = Method::erm;
  Variant variant = Variant::laplacian_based;
  int hidden = 64;
  bool use_bias = true;
  double epsilon = 0.01;
  double eta_theta = 0.9;
  double eta_mu = 0.5;
  double eta_lambda = 0.1;
  double mu0 = 1.0;
  double gamma = 0.5;
  double weight_decay = 0.1;
  int primal_steps = 10;
  int epochs = 1000;
  LaplacianConfig laplacian;
  NeighborhoodRule neighborhoods = NeighborhoodRule::knn(8);
  LossKind loss = LossKind::mse;
  LossNormalization loss_normalization = LossNormalization::labeled;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  double mean_loss = 0.0;
  double lipschitz = 0.0;  ///< sqrt of the largest squared gradient-norm estimate
  double mu = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double lambda_sum = 0.0;
  double objective = 0.0;  ///< training objective (the Lagrangian for the Lipschitz method)
};

struct TrainReport {
  Method method = Method::erm;
  MlpParams model;
  std::vector<EpochRecord> history;
  DualState dual;  ///< final multipliers; mu = 0 and uniform lambda for the baselines
  double final_mean_loss = 0.0;
  double final_lipschitz = 0.0;
  bool feasible = false;  ///< final mean labeled loss <= epsilon
  double wall_seconds = 0.0;
};

TrainReport train_erm(const TrainConfig& cfg, const Dataset& data);
TrainReport train_ambient(const TrainConfig& cfg, const Dataset& data);
TrainReport train_manifold_reg(const TrainConfig& cfg, const Dataset& data);
TrainReport train_manifold_lipschitz(const TrainConfig& cfg, const Dataset& data);

/// Dispatches on cfg.method.
TrainReport train(const TrainConfig& cfg, const Dataset& data);

/// Mean over labeled rows of (1/O) |f(x_i) - y_i|^2, given outputs for every point.
Vec labeled_losses(const Mat& outputs, const Dataset& data);

struct Evaluation {
  double metric = 0.0;  ///< accuracy for classification, MSE for regression
  double lipschitz = 0.0;
  double feasibility_gap = 0.0;  ///< mean labeled loss - epsilon
};

/// Classification: sign readout on unlabeled points (all points if none are
/// unlabeled) against class_of_point; an output of exactly 0 counts as wrong.
/// Regression: MSE on `heldout` when given, else on the labeled rows.
Evaluation evaluate(const MlpParams& model, const Dataset& data, const Neighborhoods& nbrs,
                    double epsilon, const Dataset* heldout = nullptr);

}  // namespace manilip
