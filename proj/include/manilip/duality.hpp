#pragma once

#include "manilip/nn.hpp"

namespace manilip {

/// Multipliers of the Lipschitz-constrained problem.
///
/// `mu` prices the average-loss constraint, `lambda` holds one multiplier per
/// point (labeled and unlabeled) and is kept on {lambda >= 0, sum = n}.
struct DualState {
  double mu = 0.0;
  Vec lambda;
  double epsilon = 0.0;
  double eta_mu = 0.5;
  double eta_lambda = 0.1;
};

/// lambda uniform (all ones), mu = mu0.
DualState make_dual_state(int n_points, double mu0, double epsilon, double eta_mu,
                          double eta_lambda);

/// mu' = max(0, mu + eta_mu (mean_loss - epsilon)).
DualState update_mu(const DualState& state, double mean_loss);

/// lambda' = project(lambda + eta_lambda * grad_norm_sq) onto the scaled simplex.
DualState update_lambda(const DualState& state, const Vec& grad_norm_sq);

/// Euclidean projection onto {x >= 0, sum x = total} by sort-and-threshold.
/// Inputs already on the set (to rounding) come back unchanged.
Vec project_scaled_simplex(const Vec& v, double total);

/// mu (mean(losses) - epsilon) + smooth_term.
double empirical_lagrangian(const Vec& losses, double smooth_term, double mu, double epsilon);

}  // namespace manilip
