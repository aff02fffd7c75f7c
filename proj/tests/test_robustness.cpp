#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "wlqc/rng.hpp"
#include "wlqc/robustness.hpp"

using namespace wlqc;
using namespace wlqc::robustness;

namespace {

DiscreteDistribution random_uniform(Philox4x32& rng, int k, int n) {
  Eigen::MatrixXd pts(k, n);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) pts(i, j) = rng.normal();
  return DiscreteDistribution::uniform(pts);
}

// Exact 1-d W2 between weighted discrete distributions via the quantile
// coupling (monotone rearrangement), independent of the simplex solver.
double w2_1d_quantile(const DiscreteDistribution& mu,
                      const DiscreteDistribution& nu) {
  auto sorted = [](const DiscreteDistribution& d) {
    std::vector<std::pair<double, double>> atoms;
    for (int i = 0; i < d.count(); ++i)
      atoms.push_back({d.support(0, i), d.weights(i)});
    std::sort(atoms.begin(), atoms.end());
    return atoms;
  };
  auto a = sorted(mu), b = sorted(nu);
  size_t i = 0, j = 0;
  double ra = a[0].second, rb = b[0].second, acc = 0.0;
  while (i < a.size() && j < b.size()) {
    const double mass = std::min(ra, rb);
    const double d = a[i].first - b[j].first;
    acc += mass * d * d;
    ra -= mass;
    rb -= mass;
    if (ra <= 1e-15 && ++i < a.size()) ra = a[i].second;
    if (rb <= 1e-15 && ++j < b.size()) rb = b[j].second;
  }
  return std::sqrt(std::max(0.0, acc));
}

}  // namespace

TEST_CASE("wasserstein2 basics") {
  Philox4x32 rng(29, 0);
  SUBCASE("identity of indiscernibles") {
    const auto mu = random_uniform(rng, 2, 4);
    CHECK(wasserstein2(mu, mu) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("single atoms give the Euclidean distance") {
    Eigen::MatrixXd pa(3, 1), pb(3, 1);
    pa << 1.0, -2.0, 0.5;
    pb << 0.0, 1.0, 2.0;
    const auto mu = DiscreteDistribution::uniform(pa);
    const auto nu = DiscreteDistribution::uniform(pb);
    CHECK(wasserstein2(mu, nu) ==
          doctest::Approx((pa - pb).norm()).epsilon(1e-14));
  }
  SUBCASE("permuted supports are at distance zero") {
    Eigen::MatrixXd pts(2, 3);
    pts << 0.0, 1.0, -1.0, 2.0, -2.0, 0.5;
    Eigen::MatrixXd perm(2, 3);
    perm.col(0) = pts.col(2);
    perm.col(1) = pts.col(0);
    perm.col(2) = pts.col(1);
    CHECK(wasserstein2(DiscreteDistribution::uniform(pts),
                       DiscreteDistribution::uniform(perm)) ==
          doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(wasserstein2(random_uniform(rng, 2, 3),
                                 random_uniform(rng, 3, 3)),
                    SolverError);
  }
}

TEST_CASE("wasserstein2 metric properties on random instances") {
  Philox4x32 rng(31, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(4));
    const auto mu = random_uniform(rng, 2, n);
    const auto nu = random_uniform(rng, 2, n);
    const auto pi = random_uniform(rng, 2, n);
    const double d_mn = wasserstein2(mu, nu);
    const double d_nm = wasserstein2(nu, mu);
    const double d_mp = wasserstein2(mu, pi);
    const double d_pn = wasserstein2(pi, nu);
    CHECK(std::abs(d_mn - d_nm) <= 1e-12);
    CHECK(d_mn <= d_mp + d_pn + 1e-10);

    // A fixed identity coupling can never beat the optimum.
    double identity_cost = 0.0;
    for (int i = 0; i < n; ++i)
      identity_cost += (mu.support.col(i) - nu.support.col(i)).squaredNorm();
    CHECK(d_mn <= std::sqrt(identity_cost / n) + 1e-12);
  }
}

TEST_CASE("Hungarian assignment equals permutation brute force") {
  Philox4x32 rng(37, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(5));  // 2..6
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = rng.uniform(0.0, 10.0);
    const double brute = oracle::min_permutation_cost(cost);
    const double fast = matching_cost(cost, assign_hungarian(cost));
    CHECK(fast == brute);  // identical sums over the same optimal matching
  }
}

TEST_CASE("transportation simplex matches the 1-d quantile coupling") {
  Philox4x32 rng(41, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const int na = 2 + static_cast<int>(rng.uniform_index(4));
    const int nb = 2 + static_cast<int>(rng.uniform_index(4));
    Eigen::MatrixXd pa(1, na), pb(1, nb);
    Eigen::VectorXd wa(na), wb(nb);
    for (int i = 0; i < na; ++i) {
      pa(0, i) = rng.normal();
      wa(i) = rng.uniform(0.05, 1.0);
    }
    for (int i = 0; i < nb; ++i) {
      pb(0, i) = rng.normal();
      wb(i) = rng.uniform(0.05, 1.0);
    }
    wa /= wa.sum();
    wb /= wb.sum();
    const auto mu = DiscreteDistribution::make(pa, wa);
    const auto nu = DiscreteDistribution::make(pb, wb);
    CHECK(wasserstein2(mu, nu) ==
          doctest::Approx(w2_1d_quantile(mu, nu)).epsilon(1e-9));
  }
}

TEST_CASE("transportation simplex agrees with assignment on uniform inputs") {
  Philox4x32 rng(43, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_index(4));
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = rng.uniform(0.0, 4.0);
    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / n);
    const double simplex = transport_cost(cost, uniform, uniform);
    const double matching = matching_cost(cost, assign_hungarian(cost)) / n;
    CHECK(simplex == doctest::Approx(matching).epsilon(1e-10));
  }
}

TEST_CASE("in_ambiguity_set uses a closed ball") {
  Eigen::MatrixXd pa(1, 1), pb(1, 1);
  pa << 1.0;
  pb << 0.0;
  const auto emp = EmpiricalDistribution::from_samples(pb);
  const auto mu = DiscreteDistribution::uniform(pa);
  CHECK(in_ambiguity_set(to_discrete(emp), emp, 0.0));
  CHECK_FALSE(in_ambiguity_set(mu, emp, 0.5));
  CHECK(in_ambiguity_set(mu, emp, 1.0));  // boundary included
}

TEST_CASE("radius formulas") {
  SUBCASE("T=1 specialization") {
    RadiusParams p;
    p.N = 3;
    p.beta = 0.1;
    p.T = 1;
    p.k = 2;
    p.q = 3.5;
    const double c = std::log(p.c1 / p.beta) / (p.N * p.c2);
    const double expected = c > 1.0 ? std::pow(c, 1.0 / p.q)
                                    : std::pow(c, 0.25);
    CHECK(radius_light_tail(p) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("boundary c=1: both branches give 1") {
    RadiusParams p;
    p.beta = 0.37;
    p.c1 = std::exp(1.0) * p.beta;
    p.c2 = 1.0;
    p.N = 1;
    p.T = 1;
    p.q = 4.0;
    p.k = 2;
    CHECK(radius_light_tail(p) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("k=4 transcendental residual") {
    RadiusParams p;
    p.N = 10;
    p.beta = 0.05;
    p.T = 1;
    p.k = 4;
    const double theta = radius_light_tail(p);
    const double c = std::log(p.c1 / p.beta) / (p.N * p.c2);
    const double residual =
        theta * theta / std::log(2.0 + 1.0 / (theta * theta)) - std::sqrt(c);
    CHECK(std::abs(residual) <= 1e-10);
  }
  SUBCASE("compact: k=2, c=1e-4, zeta=1 gives 0.1") {
    RadiusParams p;
    p.N = 1;
    p.c2 = 1.0;
    p.c1 = 1.0;
    p.T = 1;
    p.k = 2;
    p.zeta = 1.0;
    p.beta = std::exp(-1e-4);  // c = log(1/beta) = 1e-4
    CHECK(radius_compact(p) == doctest::Approx(0.1).epsilon(1e-9));
  }
  SUBCASE("compact radius scales linearly in zeta below k=4") {
    RadiusParams p;
    p.N = 5;
    p.beta = 0.1;
    p.T = 2;
    p.k = 3;
    p.zeta = 0.7;
    const double base = radius_compact(p);
    p.zeta = 1.4;
    CHECK(radius_compact(p) == doctest::Approx(2.0 * base).epsilon(1e-13));
  }
  SUBCASE("compact k=4 residual") {
    RadiusParams p;
    p.N = 10;
    p.beta = 0.05;
    p.T = 1;
    p.k = 4;
    p.zeta = 2.0;
    const double theta = radius_compact(p);
    const double c = std::log(p.c1 / p.beta) / (p.N * p.c2);
    const double residual =
        theta * theta /
            (p.zeta * p.zeta * std::log(2.0 + p.zeta * p.zeta / (theta * theta))) -
        std::sqrt(c);
    CHECK(std::abs(residual) <= 1e-10);
  }
  SUBCASE("invalid risk level throws") {
    RadiusParams p;
    p.beta = 1.5;
    CHECK_THROWS_AS(radius_light_tail(p), SolverError);
  }
}

TEST_CASE("radius monotonicity in N, T and beta") {
  RadiusParams p;
  p.beta = 0.1;
  p.T = 5;
  p.k = 2;
  const auto table = radius_sensitivity(p, {1, 2, 5, 10, 50, 200});
  for (size_t i = 1; i < table.size(); ++i)
    CHECK(table[i].second <= table[i - 1].second + 1e-12);

  p.N = 10;
  RadiusParams longer = p;
  longer.T = 50;
  CHECK(radius_light_tail(longer) >= radius_light_tail(p) - 1e-12);

  RadiusParams safer = p;
  safer.beta = 0.01;  // smaller beta -> larger radius
  CHECK(radius_light_tail(safer) >= radius_light_tail(p) - 1e-12);
  RadiusParams looser = p;
  looser.beta = 0.5;
  CHECK(radius_light_tail(looser) <= radius_light_tail(p) + 1e-12);
}

TEST_CASE("light-tail branches are continuous at their boundaries") {
  // At c = 1 the c^{1/q} and c^{1/4} / c^{1/k} branches meet at 1.
  for (int k : {1, 2, 3, 5, 6}) {
    for (double q : {2.5, 4.0, 7.0}) {
      RadiusParams p;
      p.k = k;
      p.q = q;
      p.N = 1;
      p.T = 1;
      p.c2 = 1.0;
      const double eps = 1e-9;
      p.beta = 0.2;
      p.c1 = std::exp(1.0 + eps) * p.beta;  // c slightly above 1
      const double above = radius_light_tail(p);
      p.c1 = std::exp(1.0 - eps) * p.beta;  // c slightly below 1
      const double below = radius_light_tail(p);
      CHECK(std::abs(above - below) <= 1e-6);
    }
  }
  // The k<4 and k>4 power branches coincide as k -> 4.
  RadiusParams p;
  p.N = 4;
  p.beta = 0.2;
  p.T = 1;
  const double c = std::log(p.c1 / p.beta) / (p.N * p.c2);
  CHECK(std::abs(std::pow(c, 0.25) - std::pow(c, 1.0 / 4.0)) <= 1e-15);
}
