#pragma once

// One-dimensional Gaussian-process regression with a zero mean function and a
// squared-exponential covariance:
//
//   k(a, b) = signal_variance * exp(-0.5 * (a - b)^2 / length_scale^2)
//
// with noise_variance added to the diagonal of the training covariance only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"

namespace msplan {

struct Hyperparams {
  double length_scale = 0.01;
  double signal_variance = 1.0;
  double noise_variance = 0.2;

  void validate() const {
    if (!(length_scale > 0.0) || !(signal_variance > 0.0) || !(noise_variance >= 0.0)) {
      throw InvalidArgument("Hyperparams: length_scale and signal_variance must be > 0, "
                            "noise_variance >= 0");
    }
  }

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Candidate values for exhaustive hyperparameter search.
struct SearchSpace {
  std::vector<double> length_scales;
  std::vector<double> signal_variances;
  std::vector<double> noise_variances;

  bool empty() const {
    return length_scales.empty() || signal_variances.empty() || noise_variances.empty();
  }

  /// 13 log-spaced length scales over [1e-6, 1e1], signal variance in
  /// {0.25, 1, 4}, noise variance in {0.01, 0.05, 0.2}.
  static SearchSpace standard() {
    SearchSpace s;
    constexpr int n = 13;
    for (int i = 0; i < n; ++i) {
      s.length_scales.push_back(std::pow(10.0, -6.0 + 7.0 * i / (n - 1)));
    }
    s.signal_variances = {0.25, 1.0, 4.0};
    s.noise_variances = {0.01, 0.05, 0.2};
    return s;
  }
};

/// Squared-exponential covariance between two distinct evaluation points.
inline double kernel(double a, double b, const Hyperparams& hp) {
  const double d = (a - b) / hp.length_scale;
  return hp.signal_variance * std::exp(-0.5 * d * d);
}

namespace detail {

/// Row-major dense lower Cholesky factor; returns false if not SPD.
inline bool cholesky_in_place(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
    for (std::size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
  }
  return true;
}

// Solves L z = b in place.
inline void forward_solve(const std::vector<double>& l, std::size_t n, std::span<double> b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
}

// Solves L^T z = b in place.
inline void backward_solve(const std::vector<double>& l, std::size_t n, std::span<double> b) {
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * b[k];
    b[ii] = s / l[ii * n + ii];
  }
}

struct Factor {
  std::vector<double> chol;
  double jitter = 0.0;
};

// Jitter schedule: none, then 1e-10 growing x10 up to 1e-4.
inline Factor factorize(std::span<const double> x, const Hyperparams& hp) {
  const std::size_t n = x.size();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) k[i * n + j] = k[j * n + i] = kernel(x[i], x[j], hp);
    k[i * n + i] = hp.signal_variance + hp.noise_variance;
  }
  double jitter = 0.0;
  for (;;) {
    std::vector<double> a = k;
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += jitter;
    if (cholesky_in_place(a, n)) return {std::move(a), jitter};
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > 1e-4 * (1.0 + 1e-9)) {
      throw SingularKernel("GP covariance is not positive definite even with jitter 1e-4");
    }
  }
}

inline void check_data(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("GP: inputs and targets differ in length");
  if (x.empty()) throw InvalidArgument("GP: at least one observation required");
}

}  // namespace detail

struct GpPrediction {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Fitted GP posterior. Immutable once fitted; a refit yields a new value.
class GpModel {
 public:
  GpModel() = default;

  static GpModel fit(std::vector<double> x, std::vector<double> y, const Hyperparams& hp) {
    detail::check_data(x, y);
    hp.validate();
    GpModel m;
    m.x_ = std::move(x);
    m.y_ = std::move(y);
    m.hyper_ = hp;
    auto f = detail::factorize(m.x_, hp);
    m.chol_ = std::move(f.chol);
    m.jitter_ = f.jitter;
    m.alpha_ = m.y_;
    detail::forward_solve(m.chol_, m.size(), m.alpha_);
    detail::backward_solve(m.chol_, m.size(), m.alpha_);
    return m;
  }

  bool fitted() const noexcept { return !x_.empty(); }
  std::size_t size() const noexcept { return x_.size(); }
  const std::vector<double>& inputs() const noexcept { return x_; }
  const std::vector<double>& targets() const noexcept { return y_; }
  const Hyperparams& hyper() const noexcept { return hyper_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  double jitter() const noexcept { return jitter_; }

  GpPrediction predict(std::span<const double> queries) const {
    require_fitted();
    const std::size_t n = size();
    GpPrediction out;
    out.mean.reserve(queries.size());
    out.variance.reserve(queries.size());
    std::vector<double> ks(n);
    for (double q : queries) {
      double mu = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        ks[i] = kernel(q, x_[i], hyper_);
        mu += ks[i] * alpha_[i];
      }
      detail::forward_solve(chol_, n, ks);
      double v = hyper_.signal_variance;
      for (double e : ks) v -= e * e;
      out.mean.push_back(mu);
      out.variance.push_back(std::max(0.0, v));
    }
    return out;
  }

  double predict_mean(double q) const {
    require_fitted();
    double mu = 0.0;
    for (std::size_t i = 0; i < size(); ++i) mu += kernel(q, x_[i], hyper_) * alpha_[i];
    return mu;
  }

  /// -1/2 y^T K^-1 y - 1/2 log|K| - n/2 log(2 pi), from the cached factor.
  double log_marginal_likelihood() const {
    require_fitted();
    const std::size_t n = size();
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) quad += y_[i] * alpha_[i];
    double half_logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) half_logdet += std::log(chol_[i * n + i]);
    return -0.5 * quad - half_logdet -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  }

 private:
  void require_fitted() const {
    if (!fitted()) throw InvalidArgument("GpModel: model has not been fitted");
  }

  std::vector<double> x_;
  std::vector<double> y_;
  Hyperparams hyper_{};
  std::vector<double> chol_;
  std::vector<double> alpha_;
  double jitter_ = 0.0;
};

inline double log_marginal_likelihood(std::span<const double> x, std::span<const double> y,
                                      const Hyperparams& hp) {
  return GpModel::fit({x.begin(), x.end()}, {y.begin(), y.end()}, hp).log_marginal_likelihood();
}

/// Exhaustive grid search for the maximum log marginal likelihood. Ties go to
/// the smallest length scale, then signal variance, then noise variance.
/// Fewer than three observations return `defaults` unchanged.
inline Hyperparams optimize_hyperparams(std::span<const double> x, std::span<const double> y,
                                        const SearchSpace& space,
                                        const Hyperparams& defaults = {}) {
  if (space.empty()) throw InvalidArgument("optimize_hyperparams: empty search space");
  if (x.size() < 3) return defaults;
  detail::check_data(x, y);
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto ls = sorted(space.length_scales);
  const auto sf = sorted(space.signal_variances);
  const auto sn = sorted(space.noise_variances);

  Hyperparams best = defaults;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double l : ls) {
    for (double f : sf) {
      for (double s : sn) {
        const Hyperparams hp{l, f, s};
        double lml = -std::numeric_limits<double>::infinity();
        try {
          lml = log_marginal_likelihood(x, y, hp);
        } catch (const SingularKernel&) {
          continue;
        }
        if (lml > best_lml) {
          best_lml = lml;
          best = hp;
        }
      }
    }
  }
  return best;
}

}  // namespace msplan
