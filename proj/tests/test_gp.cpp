#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "msplan/gp.hpp"
#include "msplan/rng.hpp"

using namespace msplan;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd dense_cov(const std::vector<double>& x, const Hyperparams& hp) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = x[i] - x[j];
      k(i, j) = hp.signal_variance * std::exp(-0.5 * d * d / (hp.length_scale * hp.length_scale));
    }
    k(i, i) += hp.noise_variance;
  }
  return k;
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST_CASE("kernel values", "[gp]") {
  const Hyperparams hp{0.5, 2.0, 0.1};
  CHECK(kernel(0.3, 0.3, hp) == 2.0);
  CHECK_THAT(kernel(0.0, 0.5, hp), WithinRel(2.0 * std::exp(-0.5), 1e-15));
  CHECK(kernel(1.0, -1.0, hp) == kernel(-1.0, 1.0, hp));
  CHECK_THROWS_AS(Hyperparams({0.0, 1.0, 0.1}).validate(), InvalidArgument);
  CHECK_THROWS_AS(Hyperparams({1.0, 1.0, -0.1}).validate(), InvalidArgument);
}

TEST_CASE("fit on one point", "[gp]") {
  const Hyperparams hp{1.0, 1.0, 0.0};
  const GpModel m = GpModel::fit({0.0}, {3.0}, hp);
  REQUIRE(m.alpha().size() == 1);
  CHECK_THAT(m.alpha()[0], WithinRel(3.0, 1e-15));
  CHECK(m.jitter() == 0.0);
  CHECK_THAT(m.predict_mean(0.0), WithinRel(3.0, 1e-15));

  CHECK_THROWS_AS(GpModel::fit({}, {}, hp), InvalidArgument);
  CHECK_THROWS_AS(GpModel::fit({0.0, 1.0}, {1.0}, hp), InvalidArgument);
  CHECK_THROWS_AS(GpModel().predict_mean(0.0), InvalidArgument);
}

TEST_CASE("duplicate inputs without noise need jitter", "[gp]") {
  const GpModel m = GpModel::fit({0.2, 0.2}, {1.0, 1.0}, {0.5, 1.0, 0.0});
  CHECK(m.jitter() > 0.0);
  CHECK(m.jitter() <= 1e-4);
  CHECK_THAT(m.predict_mean(0.2), WithinAbs(1.0, 1e-3));
}

TEST_CASE("alpha matches a dense solve", "[gp]") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const CounterRng rng(s, 1);
    std::vector<double> x, y;
    for (std::uint64_t i = 0; i < 10; ++i) {
      x.push_back(rng.uniform(2 * i, -1.0, 1.0));
      y.push_back(rng.uniform(2 * i + 1, -2.0, 2.0));
    }
    const Hyperparams hp{0.3, 1.5, 0.05};
    const GpModel m = GpModel::fit(x, y, hp);
    const Eigen::VectorXd ref = dense_cov(x, hp).ldlt().solve(as_vector(y));
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK_THAT(m.alpha()[i], WithinAbs(ref[static_cast<Eigen::Index>(i)], 1e-8));
    }

    // Posterior at a few queries.
    const std::vector<double> q{-0.9, 0.0, 0.37, 1.2};
    const GpPrediction p = m.predict(q);
    const Eigen::MatrixXd kinv = dense_cov(x, hp).inverse();
    for (std::size_t j = 0; j < q.size(); ++j) {
      Eigen::VectorXd ks(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) ks[static_cast<Eigen::Index>(i)] = kernel(q[j], x[i], hp);
      CHECK_THAT(p.mean[j], WithinAbs(ks.dot(ref), 1e-8));
      CHECK_THAT(p.variance[j], WithinAbs(hp.signal_variance - ks.dot(kinv * ks), 1e-8));
      CHECK(p.mean[j] == m.predict_mean(q[j]));
    }
  }
}

TEST_CASE("two-point posterior by hand", "[gp]") {
  const Hyperparams hp{1.0, 1.0, 0.0};
  const GpModel m = GpModel::fit({0.0, 1.0}, {1.0, 0.0}, hp);
  const double e = std::exp(-0.5);
  const double q = 0.5;
  const double k0 = std::exp(-0.125), k1 = std::exp(-0.125);
  // K^-1 = 1/(1-e^2) [[1, -e], [-e, 1]]
  const double a0 = 1.0 / (1.0 - e * e), a1 = -e / (1.0 - e * e);
  CHECK_THAT(m.predict_mean(q), WithinAbs(k0 * a0 + k1 * a1, 1e-10));
  const double var = 1.0 - (k0 * k0 + k1 * k1 - 2.0 * e * k0 * k1) / (1.0 - e * e);
  CHECK_THAT(m.predict({&q, 1}).variance[0], WithinAbs(var, 1e-10));
}

TEST_CASE("interpolation and prior recovery", "[gp]") {
  const std::vector<double> x{-1.0, -0.3, 0.4, 1.1};
  const std::vector<double> y{0.5, -1.0, 2.0, 0.25};
  const GpModel m = GpModel::fit(x, y, {0.2, 1.0, 1e-8});
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK_THAT(m.predict_mean(x[i]), WithinAbs(y[i], 1e-6));
    CHECK(m.predict({&x[i], 1}).variance[0] < 1e-6);
  }
  const double far = 50.0;
  CHECK_THAT(m.predict_mean(far), WithinAbs(0.0, 1e-12));
  CHECK_THAT(m.predict({&far, 1}).variance[0], WithinAbs(1.0, 1e-12));
}

TEST_CASE("log marginal likelihood", "[gp]") {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  CHECK_THAT(GpModel::fit({0.0}, {0.0}, {1.0, 1.0, 0.0}).log_marginal_likelihood(),
             WithinAbs(-half_log_2pi, 1e-14));
  CHECK_THAT(GpModel::fit({0.0}, {2.0}, {1.0, 1.0, 0.0}).log_marginal_likelihood(),
             WithinAbs(-2.0 - half_log_2pi, 1e-14));

  for (std::uint64_t s = 0; s < 10; ++s) {
    const CounterRng rng(s, 2);
    std::vector<double> x, y;
    for (std::uint64_t i = 0; i < 8; ++i) {
      x.push_back(rng.uniform(2 * i, 0.0, 3.0));
      y.push_back(rng.uniform(2 * i + 1, -1.0, 1.0));
    }
    const Hyperparams hp{0.7, 0.8, 0.1};
    const Eigen::MatrixXd k = dense_cov(x, hp);
    const Eigen::VectorXd yv = as_vector(y);
    const double ref = -0.5 * yv.dot(k.ldlt().solve(yv)) - 0.5 * std::log(k.determinant()) -
                       4.0 * std::log(2.0 * std::numbers::pi);
    CHECK_THAT(log_marginal_likelihood(x, y, hp), WithinAbs(ref, 1e-9));
  }
}

TEST_CASE("hyperparameter search", "[gp]") {
  SECTION("recovers the generating length scale") {
    SearchSpace space;
    space.length_scales = {0.01, 0.03, 0.1, 0.3, 1.0, 3.0};
    space.signal_variances = {1.0};
    space.noise_variances = {0.01};
    const Hyperparams truth{0.1, 1.0, 0.01};
    int hits = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      // Draw a sample path from the prior with a dense Cholesky factor.
      const CounterRng rng(s, 5);
      std::vector<double> x;
      for (std::uint64_t i = 0; i < 40; ++i) x.push_back(double(i) / 39.0);
      const Eigen::MatrixXd l = dense_cov(x, truth).llt().matrixL();
      Eigen::VectorXd z(40);
      for (Eigen::Index i = 0; i < 40; ++i) {
        const double u1 = rng.uniform(2 * std::uint64_t(i)), u2 = rng.uniform(2 * std::uint64_t(i) + 1);
        z[i] = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
      }
      const Eigen::VectorXd f = l * z;
      const std::vector<double> y(f.data(), f.data() + f.size());
      hits += optimize_hyperparams(x, y, space).length_scale == 0.1;
    }
    CHECK(hits >= 16);
  }

  SECTION("returns the grid argmax") {
    const SearchSpace space = SearchSpace::standard();
    const std::vector<double> x{0.0, 0.1, 0.25, 0.3, 0.55, 0.9};
    const std::vector<double> y{0.1, 0.3, 0.2, -0.4, 0.0, 0.8};
    const Hyperparams best = optimize_hyperparams(x, y, space);
    const double best_lml = log_marginal_likelihood(x, y, best);
    for (double l : space.length_scales) {
      for (double f : space.signal_variances) {
        for (double n : space.noise_variances) {
          CHECK(log_marginal_likelihood(x, y, {l, f, n}) <= best_lml);
        }
      }
    }
  }

  SECTION("standard space") {
    const SearchSpace s = SearchSpace::standard();
    REQUIRE(s.length_scales.size() == 13);
    CHECK_THAT(s.length_scales.front(), WithinRel(1e-6, 1e-12));
    CHECK_THAT(s.length_scales.back(), WithinRel(10.0, 1e-12));
    for (std::size_t i = 1; i < s.length_scales.size(); ++i) {
      CHECK_THAT(s.length_scales[i] / s.length_scales[i - 1], WithinRel(std::pow(10.0, 7.0 / 12.0), 1e-9));
    }
  }

  SECTION("too few points or an empty space") {
    const Hyperparams defaults{0.5, 2.0, 0.05};
    CHECK(optimize_hyperparams(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 2.0},
                               SearchSpace::standard(), defaults) == defaults);
    SearchSpace empty = SearchSpace::standard();
    empty.noise_variances.clear();
    CHECK_THROWS_AS(optimize_hyperparams(std::vector<double>{0, 1, 2}, std::vector<double>{0, 1, 2},
                                         empty),
                    InvalidArgument);
  }
}
