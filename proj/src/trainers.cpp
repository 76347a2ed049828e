#include "manilip/trainers.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include "manilip/error.hpp"

namespace manilip {

std::string to_string(Method m) {
  switch (m) {
    case Method::erm: return "erm";
    case Method::ambient: return "ambient";
    case Method::manifold_reg: return "manifold_reg";
    case Method::manifold_lipschitz: return "manifold_lipschitz";
  }
  return "unknown";
}

std::string to_string(Variant v) {
  return v == Variant::grad_based ? "grad_based" : "laplacian_based";
}

Method parse_method(const std::string& name) {
  if (name == "erm") return Method::erm;
  if (name == "ambient") return Method::ambient;
  if (name == "manifold_reg") return Method::manifold_reg;
  if (name == "manifold_lipschitz") return Method::manifold_lipschitz;
  throw InvalidArgument("unknown method '" + name + "'");
}

Variant parse_variant(const std::string& name) {
  if (name == "grad_based") return Variant::grad_based;
  if (name == "laplacian_based") return Variant::laplacian_based;
  throw InvalidArgument("unknown variant '" + name + "'");
}

void TrainConfig::validate() const {
  if (hidden < 1) throw InvalidArgument("hidden width must be positive");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
  if (!(eta_theta > 0.0)) throw InvalidArgument("eta_theta must be positive");
  if (!(eta_mu > 0.0) || !(eta_lambda > 0.0)) throw InvalidArgument("dual step sizes must be positive");
  if (!(mu0 >= 0.0)) throw InvalidArgument("mu0 must be nonnegative");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be nonnegative");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("weight decay must be nonnegative");
  if (primal_steps < 1) throw InvalidArgument("primal_steps must be >= 1");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
}

Vec labeled_losses(const Mat& outputs, const Dataset& data) {
  const int m = data.n_labeled;
  Vec out(m);
  const double inv_o = 1.0 / static_cast<double>(data.labels.cols());
  for (int i = 0; i < m; ++i) out[i] = (outputs.row(i) - data.labels.row(i)).squaredNorm() * inv_o;
  return out;
}

namespace {

/// Shared full-batch loop. The baselines are the Lipschitz loop with the dual
/// machinery switched off, so their trajectories agree bit for bit when their
/// extra coefficients are zero.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const Dataset& data) : cfg_(cfg), data_(data) {
    cfg_.validate();
    data_.validate();
    if (data_.n_labeled < 1 && cfg_.method != Method::manifold_lipschitz)
      throw InvalidArgument(to_string(cfg_.method) + " needs at least one labeled sample");
    if (data_.size() < 2) throw InvalidArgument("training needs at least two points");
    if (data_.labels.cols() < 1) throw InvalidArgument("dataset has no target columns");

    nbrs_ = build_neighborhoods(data_.points, cfg_.neighborhoods);
    const bool needs_graph = cfg_.method == Method::manifold_reg ||
                             (cfg_.method == Method::manifold_lipschitz &&
                              cfg_.variant == Variant::laplacian_based);
    if (needs_graph) graph_ = build_laplacian(data_.points, cfg_.laplacian);
    const int n = data_.size();
    dual_ = cfg_.method == Method::manifold_lipschitz
                ? make_dual_state(n, cfg_.mu0, cfg_.epsilon, cfg_.eta_mu, cfg_.eta_lambda)
                : make_dual_state(n, 0.0, cfg_.epsilon, cfg_.eta_mu, cfg_.eta_lambda);
    ones_ = Vec::Ones(n);
  }

  TrainReport run() {
    const auto t0 = std::chrono::steady_clock::now();
    MlpParams model = mlp_init({data_.input_dim(), cfg_.hidden, data_.output_dim()}, cfg_.seed,
                               cfg_.use_bias);
    TrainReport report;
    report.method = cfg_.method;
    report.history.reserve(cfg_.epochs);
    const bool lipschitz = cfg_.method == Method::manifold_lipschitz;
    const double decay = cfg_.method == Method::ambient ? cfg_.weight_decay : 0.0;

    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      for (int k = 0; k < cfg_.primal_steps; ++k) {
        const ForwardCache cache = mlp_forward_cached(model, data_.points);
        const Mat upstream = objective_gradient(cache.outputs);
        const Gradient grad = mlp_backward(model, data_.points, cache, ones_, upstream);
        model = sgd_step(model, grad, cfg_.eta_theta, decay);
      }

      const Mat outputs = mlp_forward_batch(model, data_.points);
      if (!outputs.allFinite())
        throw std::runtime_error("training diverged: non-finite outputs at epoch " + std::to_string(epoch));
      const Vec losses = labeled_losses(outputs, data_);
      const double mean_loss = losses.size() ? losses.mean() : 0.0;
      const GradNormEstimate est = grad_norm_estimates(outputs, nbrs_);
      if (!est.values.array().square().allFinite())
        throw std::runtime_error("training diverged: gradient-norm estimates overflow at epoch " + std::to_string(epoch));

      EpochRecord rec;
      rec.mean_loss = mean_loss;
      rec.lipschitz = max_grad_norm(est).lipschitz;
      rec.objective = objective_value(outputs, losses, est, model);
      if (lipschitz) {
        dual_ = update_mu(dual_, mean_loss);
        dual_ = update_lambda(dual_, est.values.array().square().matrix());
      }
      rec.mu = dual_.mu;
      rec.lambda_min = dual_.lambda.minCoeff();
      rec.lambda_max = dual_.lambda.maxCoeff();
      rec.lambda_sum = dual_.lambda.sum();
      report.history.push_back(rec);
    }

    report.model = std::move(model);
    report.dual = dual_;
    report.final_mean_loss = report.history.back().mean_loss;
    report.final_lipschitz = report.history.back().lipschitz;
    report.feasible = report.final_mean_loss <= cfg_.epsilon;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  }

 private:
  double data_weight() const {
    return cfg_.method == Method::manifold_lipschitz ? dual_.mu : 1.0;
  }

  /// Scale turning the labeled mean into the configured data term.
  double data_scale() const {
    if (cfg_.loss_normalization == LossNormalization::labeled) return 1.0;
    return static_cast<double>(data_.n_labeled) / static_cast<double>(data_.size());
  }

  /// d objective / d outputs, n x O.
  Mat objective_gradient(const Mat& outputs) const {
    const int n = data_.size();
    const int m = data_.n_labeled;
    Mat g = Mat::Zero(n, outputs.cols());
    if (m > 0) {
      const double coef = data_weight() * data_scale() * 2.0 / (static_cast<double>(m) * outputs.cols());
      g.topRows(m) = coef * (outputs.topRows(m) - data_.labels);
    }
    switch (cfg_.method) {
      case Method::erm:
      case Method::ambient:
        break;
      case Method::manifold_reg:
        g += cfg_.gamma * dirichlet_energy_gradient(*graph_, outputs, ones_);
        break;
      case Method::manifold_lipschitz:
        if (cfg_.variant == Variant::laplacian_based) {
          g += weighted_dirichlet_form_gradient(*graph_, outputs, dual_.lambda);
        } else {
          // (1/n) sum_i lambda_i |f_i - f_z|^2 / d^2 with z the frozen argmax neighbor.
          const GradNormEstimate est = grad_norm_estimates(outputs, nbrs_);
          for (int i = 0; i < n; ++i) {
            const int z = est.argmax[i];
            if (z < 0) continue;
            const double d = neighbor_distance(i, z);
            const double c = 2.0 * dual_.lambda[i] / (static_cast<double>(n) * d * d);
            const Eigen::RowVectorXd diff = c * (outputs.row(i) - outputs.row(z));
            g.row(i) += diff;
            g.row(z) -= diff;
          }
        }
        break;
    }
    return g;
  }

  double objective_value(const Mat& outputs, const Vec& losses, const GradNormEstimate& est,
                         const MlpParams& model) const {
    const double data_term = (losses.size() ? losses.mean() : 0.0) * data_scale();
    switch (cfg_.method) {
      case Method::erm:
        return data_term;
      case Method::ambient:
        return data_term + 0.5 * cfg_.weight_decay * model.squared_norm();
      case Method::manifold_reg:
        return data_term + cfg_.gamma * dirichlet_energy(*graph_, outputs, ones_);
      case Method::manifold_lipschitz: {
        double smooth = 0.0;
        if (cfg_.variant == Variant::laplacian_based) {
          smooth = weighted_dirichlet_form(*graph_, outputs, dual_.lambda);
        } else {
          for (int i = 0; i < data_.size(); ++i) smooth += dual_.lambda[i] * est.values[i] * est.values[i];
          smooth /= data_.size();
        }
        return dual_.mu * (data_term - cfg_.epsilon) + smooth;
      }
    }
    return data_term;
  }

  double neighbor_distance(int i, int z) const {
    for (const Neighbor& nb : nbrs_.lists[i])
      if (nb.index == z) return nb.distance;
    throw std::logic_error("argmax neighbor missing from its list");
  }

  TrainConfig cfg_;
  const Dataset& data_;
  Neighborhoods nbrs_;
  std::optional<LaplacianMatrix> graph_;
  DualState dual_;
  Vec ones_;
};

TrainReport run_as(Method method, TrainConfig cfg, const Dataset& data) {
  cfg.method = method;
  return Trainer(cfg, data).run();
}

}  // namespace

TrainReport train_erm(const TrainConfig& cfg, const Dataset& data) {
  return run_as(Method::erm, cfg, data);
}

TrainReport train_ambient(const TrainConfig& cfg, const Dataset& data) {
  return run_as(Method::ambient, cfg, data);
}

TrainReport train_manifold_reg(const TrainConfig& cfg, const Dataset& data) {
  return run_as(Method::manifold_reg, cfg, data);
}

TrainReport train_manifold_lipschitz(const TrainConfig& cfg, const Dataset& data) {
  return run_as(Method::manifold_lipschitz, cfg, data);
}

TrainReport train(const TrainConfig& cfg, const Dataset& data) { return Trainer(cfg, data).run(); }

Evaluation evaluate(const MlpParams& model, const Dataset& data, const Neighborhoods& nbrs,
                    double epsilon, const Dataset* heldout) {
  if (model.input_dim() != data.input_dim())
    throw InvalidArgument("model expects inputs of dimension " + std::to_string(model.input_dim()) +
                          ", data has " + std::to_string(data.input_dim()));
  const Mat outputs = mlp_forward_batch(model, data.points);
  Evaluation ev;
  ev.lipschitz = max_grad_norm(grad_norm_estimates(outputs, nbrs)).lipschitz;
  const Vec losses = labeled_losses(outputs, data);
  ev.feasibility_gap = (losses.size() ? losses.mean() : 0.0) - epsilon;

  if (data.task == Task::classification_pm1) {
    if (data.class_of_point.empty()) throw InvalidArgument("classification data lacks ground-truth classes");
    const int begin = data.n_unlabeled > 0 ? data.n_labeled : 0;
    int correct = 0;
    for (int i = begin; i < data.size(); ++i) {
      const double f = outputs(i, 0);
      const int predicted = f > 0.0 ? 1 : (f < 0.0 ? -1 : 0);
      if (predicted == data.class_of_point[i]) ++correct;
    }
    ev.metric = static_cast<double>(correct) / static_cast<double>(data.size() - begin);
  } else if (heldout != nullptr) {
    if (heldout->n_labeled < 1) throw InvalidArgument("held-out set has no labeled rows");
    if (heldout->input_dim() != model.input_dim()) throw InvalidArgument("held-out set has wrong dimension");
    ev.metric = labeled_losses(mlp_forward_batch(model, heldout->points), *heldout).mean();
  } else {
    ev.metric = losses.size() ? losses.mean() : 0.0;
  }
  return ev;
}

}  // namespace manilip
