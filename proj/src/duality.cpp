#include "manilip/duality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "manilip/error.hpp"

namespace manilip {

DualState make_dual_state(int n_points, double mu0, double epsilon, double eta_mu,
                          double eta_lambda) {
  if (n_points < 1) throw InvalidArgument("dual state needs at least one point");
  if (!(mu0 >= 0.0)) throw InvalidArgument("initial mu must be nonnegative");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
  if (!(eta_mu > 0.0) || !(eta_lambda > 0.0)) throw InvalidArgument("dual step sizes must be positive");
  DualState s;
  s.mu = mu0;
  s.lambda = Vec::Ones(n_points);
  s.epsilon = epsilon;
  s.eta_mu = eta_mu;
  s.eta_lambda = eta_lambda;
  return s;
}

DualState update_mu(const DualState& state, double mean_loss) {
  if (!std::isfinite(mean_loss)) throw InvalidArgument("mean loss must be finite");
  DualState next = state;
  next.mu = std::max(0.0, state.mu + state.eta_mu * (mean_loss - state.epsilon));
  return next;
}

DualState update_lambda(const DualState& state, const Vec& grad_norm_sq) {
  if (grad_norm_sq.size() != state.lambda.size())
    throw InvalidArgument("grad_norm_sq has length " + std::to_string(grad_norm_sq.size()) +
                          ", lambda has " + std::to_string(state.lambda.size()));
  if (!grad_norm_sq.allFinite() || (grad_norm_sq.array() < 0.0).any())
    throw InvalidArgument("squared gradient norms must be finite and nonnegative");
  DualState next = state;
  const Vec ascended = state.lambda + state.eta_lambda * grad_norm_sq;
  next.lambda = project_scaled_simplex(ascended, static_cast<double>(state.lambda.size()));
  return next;
}

Vec project_scaled_simplex(const Vec& v, double total) {
  if (!(total > 0.0) || !std::isfinite(total)) throw InvalidArgument("simplex total must be positive");
  if (!v.allFinite()) throw InvalidArgument("cannot project a non-finite vector");
  const auto n = v.size();
  if (n == 0) throw InvalidArgument("cannot project an empty vector");

  const double slack = 2.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * total;
  if (v.minCoeff() >= 0.0 && std::abs(v.sum() - total) <= slack) return v;

  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double prefix = 0.0;
  double shift = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    prefix += u[j];
    const double candidate = (prefix - total) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) shift = candidate;
  }
  return (v.array() - shift).max(0.0).matrix();
}

double empirical_lagrangian(const Vec& losses, double smooth_term, double mu, double epsilon) {
  const double mean = losses.size() ? losses.mean() : 0.0;
  return mu * (mean - epsilon) + smooth_term;
}

}  // namespace manilip
