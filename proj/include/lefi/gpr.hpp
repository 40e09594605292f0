#pragma once

// Gaussian process regression with an RBF kernel and additive white noise.
// Serves two roles: a scalar reward-to-size surrogate per client, and a
// joint weights-to-objective surrogate for Bayesian-optimization search.
//
// Hyperparameters are expressed in raw data units. Internally inputs are
// shifted/scaled to [0, 1] by one global factor and outputs standardized;
// the transform is affine in both directions, so posterior mean/std in raw
// units are bit-for-bit equivalent to the untransformed textbook formulas.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lefi/rng.hpp"

namespace lefi {

inline constexpr double kMinNoiseVariance = 1e-8;
inline constexpr double kMaxJitter = 1e-2;

struct KernelConfig {
  double signal_variance = 1.0;  // output units^2
  double length_scale = 1.0;     // input units, > 0
  double noise_variance = 1e-6;  // output units^2, >= kMinNoiseVariance
  bool auto_tune = true;         // grid-search length_scale/signal_variance
};

struct Posterior {
  double mean = 0.0;
  double std = 0.0;
};

class GprModel {
 public:
  GprModel() = default;

  static GprModel fit(const Eigen::MatrixXd& xs, const Eigen::VectorXd& ys,
                      const KernelConfig& config) {
    if (xs.rows() == 0) throw std::invalid_argument("gpr: need >= 1 point");
    if (xs.rows() != ys.size())
      throw std::invalid_argument("gpr: xs/ys length mismatch");
    if (!xs.allFinite() || !ys.allFinite())
      throw std::invalid_argument("gpr: non-finite training data");
    if (!(config.length_scale > 0.0))
      throw std::invalid_argument("gpr: length_scale must be > 0");
    if (!(config.signal_variance > 0.0))
      throw std::invalid_argument("gpr: signal_variance must be > 0");
    if (!(config.noise_variance >= kMinNoiseVariance))
      throw std::invalid_argument("gpr: noise_variance below jitter floor");

    GprModel m;
    m.config_ = config;
    const auto n = xs.rows();

    // Normalization: single scale so that isotropic distances map exactly.
    m.x_min_ = xs.colwise().minCoeff();
    const double range = (xs.colwise().maxCoeff() - m.x_min_).maxCoeff();
    m.x_scale_ = range > 0.0 ? range : 1.0;
    m.xn_ = (xs.rowwise() - m.x_min_) / m.x_scale_;

    m.y_mean_ = ys.mean();
    const double y_var = (ys.array() - m.y_mean_).square().sum() /
                         static_cast<double>(n);
    m.y_std_ = y_var > 0.0 ? std::sqrt(y_var) : 1.0;
    m.zn_ = ((ys.array() - m.y_mean_) / m.y_std_).matrix();

    // Pairwise squared distances in normalized coordinates, built once.
    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2(i, i) = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        const double v = (m.xn_.row(i) - m.xn_.row(j)).squaredNorm();
        d2(i, j) = v;
        d2(j, i) = v;
      }
    }

    const double noise_n =
        config.noise_variance / (m.y_std_ * m.y_std_);

    if (config.auto_tune) {
      // Coarse log grid; the normalized input range and output variance are
      // both 1, so the grid needs no further scaling.
      static constexpr double grid[] = {0.1, 0.31622776601683794, 1.0,
                                        3.1622776601683795, 10.0};
      double best_lml = -std::numeric_limits<double>::infinity();
      double best_ls = grid[2], best_sf2 = grid[2];
      for (double ls : grid) {
        const Eigen::MatrixXd corr =
            (-d2.array() / (2.0 * ls * ls)).exp().matrix();
        for (double sf2 : grid) {
          GprModel trial = m;
          trial.length_scale_n_ = ls;
          trial.signal_variance_n_ = sf2;
          trial.noise_variance_n_ = noise_n;
          if (!trial.factorize(sf2 * corr)) continue;
          if (trial.lml_ > best_lml) {
            best_lml = trial.lml_;
            best_ls = ls;
            best_sf2 = sf2;
          }
        }
      }
      m.length_scale_n_ = best_ls;
      m.signal_variance_n_ = best_sf2;
    } else {
      m.length_scale_n_ = config.length_scale / m.x_scale_;
      m.signal_variance_n_ = config.signal_variance / (m.y_std_ * m.y_std_);
    }
    m.noise_variance_n_ = noise_n;

    const Eigen::MatrixXd corr =
        (-d2.array() / (2.0 * m.length_scale_n_ * m.length_scale_n_))
            .exp()
            .matrix();
    if (!m.factorize(m.signal_variance_n_ * corr))
      throw std::runtime_error("gpr: covariance factorization failed");
    m.fitted_ = true;
    return m;
  }

  // Scalar-input convenience used by the per-client surrogates.
  static GprModel fit(const std::vector<std::pair<double, double>>& points,
                      const KernelConfig& config) {
    Eigen::MatrixXd xs(points.size(), 1);
    Eigen::VectorXd ys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      xs(static_cast<Eigen::Index>(i), 0) = points[i].first;
      ys(static_cast<Eigen::Index>(i)) = points[i].second;
    }
    return fit(xs, ys, config);
  }

  Posterior predict(const Eigen::VectorXd& x) const {
    require_fitted();
    if (x.size() != xn_.cols())
      throw std::invalid_argument("gpr: query dimension mismatch");
    const Eigen::RowVectorXd q =
        (x.transpose() - x_min_) / x_scale_;
    Eigen::VectorXd k(xn_.rows());
    const double inv = 1.0 / (2.0 * length_scale_n_ * length_scale_n_);
    for (Eigen::Index i = 0; i < xn_.rows(); ++i)
      k(i) = signal_variance_n_ *
             std::exp(-(q - xn_.row(i)).squaredNorm() * inv);

    const double mean_n = k.dot(alpha_);
    Eigen::VectorXd w = k;
    chol_.matrixL().solveInPlace(w);
    const double var_n =
        std::max(0.0, signal_variance_n_ - w.squaredNorm());
    return {y_mean_ + y_std_ * mean_n, y_std_ * std::sqrt(var_n)};
  }

  Posterior predict(double x) const {
    return predict(Eigen::VectorXd::Constant(1, x));
  }

  // Log marginal likelihood of the training targets, raw units.
  double log_marginal_likelihood() const {
    require_fitted();
    return lml_;
  }

  double sample_posterior(const Eigen::VectorXd& x, Rng& rng) const {
    const Posterior p = predict(x);
    return rng.normal(p.mean, p.std);
  }

  double sample_posterior(double x, Rng& rng) const {
    return sample_posterior(Eigen::VectorXd::Constant(1, x), rng);
  }

  bool fitted() const { return fitted_; }
  Eigen::Index size() const { return xn_.rows(); }

  // Chosen hyperparameters mapped back to raw units.
  double length_scale() const { return length_scale_n_ * x_scale_; }
  double signal_variance() const {
    return signal_variance_n_ * y_std_ * y_std_;
  }
  double noise_variance() const { return config_.noise_variance; }
  double jitter() const { return jitter_; }

 private:
  void require_fitted() const {
    if (!fitted_) throw std::logic_error("gpr: model not fitted");
  }

  // Factorizes corr + noise I, escalating jitter from 1e-8 by decades up to
  // 1e-2; stores the Cholesky factor, the weight vector and the normalized
  // log marginal likelihood. Returns false if even max jitter fails.
  bool factorize(const Eigen::MatrixXd& cov) {
    const auto n = cov.rows();
    double jit = 0.0;
    for (;;) {
      Eigen::MatrixXd k = cov;
      k.diagonal().array() += noise_variance_n_ + jit;
      chol_.compute(k);
      if (chol_.info() == Eigen::Success) break;
      jit = jit == 0.0 ? 1e-8 : jit * 10.0;
      if (jit > kMaxJitter) return false;
    }
    jitter_ = jit;
    alpha_ = chol_.solve(zn_);
    const double log_det =
        chol_.matrixLLT().diagonal().array().log().sum();
    const double lml_norm = -0.5 * zn_.dot(alpha_) - log_det -
                            0.5 * static_cast<double>(n) *
                                std::log(2.0 * std::numbers::pi);
    // Change of variables back to raw outputs.
    lml_ = lml_norm - static_cast<double>(n) * std::log(y_std_);
    return true;
  }

  KernelConfig config_;
  Eigen::MatrixXd xn_;     // normalized inputs, one row per point
  Eigen::VectorXd zn_;     // standardized targets
  Eigen::RowVectorXd x_min_;
  double x_scale_ = 1.0;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  double length_scale_n_ = 1.0;
  double signal_variance_n_ = 1.0;
  double noise_variance_n_ = 1e-6;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  bool fitted_ = false;
};

}  // namespace lefi
