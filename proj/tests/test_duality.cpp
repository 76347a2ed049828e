#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "manilip/duality.hpp"
#include "manilip/error.hpp"

using namespace manilip;

namespace {

/// Exhaustive KKT oracle: for each candidate support S, the minimizer of
/// |x - v|^2 on {sum x = total, x_i = 0 off S} is x_S = v_S - (sum v_S - total)/|S|.
/// The projection is the feasible candidate with the smallest distance.
Vec active_set_projection(const Vec& v, double total) {
  const int n = static_cast<int>(v.size());
  Vec best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        sum += v[i];
        ++count;
      }
    const double shift = (sum - total) / count;
    Vec x = Vec::Zero(n);
    bool ok = true;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        x[i] = v[i] - shift;
        if (x[i] < 0.0) ok = false;
      }
    if (!ok) continue;
    const double d = (x - v).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = x;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("initial dual state") {
  const DualState s = make_dual_state(4, 5.0, 0.1, 0.5, 0.2);
  CHECK(s.mu == 5.0);
  CHECK(s.lambda == Vec::Ones(4));
  CHECK(s.epsilon == 0.1);
  CHECK_THROWS_AS(make_dual_state(0, 1.0, 0.1, 0.5, 0.1), InvalidArgument);
  CHECK_THROWS_AS(make_dual_state(3, -1.0, 0.1, 0.5, 0.1), InvalidArgument);
  CHECK_THROWS_AS(make_dual_state(3, 1.0, 0.1, 0.0, 0.1), InvalidArgument);
}

TEST_CASE("mu update") {
  const DualState s = make_dual_state(3, 1.0, 0.1, 0.5, 0.1);
  CHECK(update_mu(s, 0.1).mu == 1.0);
  CHECK(update_mu(s, 0.3).mu == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(update_mu(s, 0.3).lambda == s.lambda);

  DualState z = s;
  z.mu = 0.0;
  CHECK(update_mu(z, 0.05).mu == 0.0);
  CHECK(update_mu(s, -100.0).mu == 0.0);
  CHECK_THROWS_AS(update_mu(s, std::nan("")), InvalidArgument);
}

TEST_CASE("mu grows by eta times the excess while infeasible") {
  DualState s = make_dual_state(2, 0.0, 0.1, 0.25, 0.1);
  for (int k = 0; k < 10; ++k) {
    const double before = s.mu;
    s = update_mu(s, 0.5);
    CHECK(s.mu > before);
    CHECK(s.mu - before == doctest::Approx(0.25 * 0.4).epsilon(1e-12));
  }
}

TEST_CASE("lambda update") {
  const DualState s = make_dual_state(4, 1.0, 0.1, 0.5, 0.3);
  CHECK(update_lambda(s, Vec::Zero(4)).lambda == s.lambda);
  CHECK((update_lambda(s, Vec::Constant(4, 0.7)).lambda - s.lambda).cwiseAbs().maxCoeff() < 1e-15);

  DualState two = make_dual_state(2, 1.0, 0.1, 0.5, 1.0);
  const Vec out = update_lambda(two, (Vec(2) << 2.0, 0.0).finished()).lambda;
  CHECK(out[0] == doctest::Approx(2.0));
  CHECK(out[1] == doctest::Approx(0.0));
  CHECK(update_lambda(two, (Vec(2) << 2.0, 0.0).finished()).mu == two.mu);

  CHECK_THROWS_AS(update_lambda(s, Vec::Zero(3)), InvalidArgument);
  CHECK_THROWS_AS(update_lambda(s, (Vec(4) << 1.0, -0.1, 0.0, 0.0).finished()), InvalidArgument);
}

TEST_CASE("projection examples") {
  const Vec on = (Vec(3) << 0.5, 2.0, 0.5).finished();
  CHECK(project_scaled_simplex(on, 3.0) == on);
  const Vec sym = project_scaled_simplex((Vec(2) << -1.0, -1.0).finished(), 2.0);
  CHECK(sym[0] == doctest::Approx(1.0));
  CHECK(sym[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(project_scaled_simplex(Vec::Ones(2), 0.0), InvalidArgument);
}

TEST_CASE("projection matches the active-set oracle on 100 random instances") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd(1.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Vec v(5);
    for (auto& x : v) x = nd(rng);
    const Vec got = project_scaled_simplex(v, 5.0);
    const Vec want = active_set_projection(v, 5.0);
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
    CHECK(got.minCoeff() >= 0.0);
    CHECK(std::abs(got.sum() - 5.0) < 1e-12);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("projection is idempotent and order-equivariant") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    Vec v(12);
    for (auto& x : v) x = 3.0 * nd(rng);
    const Vec p = project_scaled_simplex(v, 12.0);
    CHECK(project_scaled_simplex(p, 12.0) == p);

    std::vector<int> perm(12);
    for (int i = 0; i < 12; ++i) perm[i] = (5 * i + trial) % 12;
    Vec vp(12);
    for (int i = 0; i < 12; ++i) vp[i] = v[perm[i]];
    const Vec pp = project_scaled_simplex(vp, 12.0);
    for (int i = 0; i < 12; ++i) CHECK(pp[i] == doctest::Approx(p[perm[i]]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("invariants hold over a long random update sequence") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DualState s = make_dual_state(200, 1.0, 0.05, 0.5, 0.4);
  for (int k = 0; k < 2000; ++k) {
    s = update_mu(s, 0.1 * u(rng));
    Vec g(200);
    for (auto& x : g) x = std::pow(u(rng), 4) * 50.0;
    s = update_lambda(s, g);
    CHECK(s.mu >= 0.0);
    CHECK(s.lambda.minCoeff() >= 0.0);
    CHECK(std::abs(s.lambda.sum() - 200.0) < 1e-9 * 200.0);
  }
}

TEST_CASE("empirical lagrangian") {
  CHECK(empirical_lagrangian(Vec::Ones(3), 0.0, 0.0, 0.1) == 0.0);
  const Vec losses = (Vec(3) << 0.1, 0.3, 0.5).finished();
  CHECK(empirical_lagrangian(losses, 0.5, 2.0, 0.1) == doctest::Approx(0.9).epsilon(1e-14));
  const double base = empirical_lagrangian(losses, 0.2, 1.5, 0.1);
  CHECK(empirical_lagrangian(Vec(losses.array() + 0.4), 0.2, 1.5, 0.1) == doctest::Approx(base + 1.5 * 0.4).epsilon(1e-14));
}
