#pragma once

// Closed-form domain models shared by the whole simulator: the fitted
// accuracy surface, the saturating reward curve, and the linear compute
// cost model. Data sizes are measured in kilo-samples throughout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lefi {

// Reward cap per client, USD. All entries nonnegative.
using RewardWeights = std::vector<double>;

// Second-order polynomial accuracy surface
//   A(d, pi) = a d^2 + b pi^2 + c d pi + d d + e pi + f
// with d in kilo-samples and pi the non-IID severity in [0, 1].
// Defaults are the profiled regression coefficients.
struct AccuracyModel {
  double a = -0.000152;
  double b = 0.071;
  double c = -0.00117;
  double d = 0.0151;
  double e = 0.011;
  double f = 0.073;
};

// Training compute demand C(d) = p d + q, in TFLOPs.
struct ComputeModel {
  double p = 79.1259;  // TFLOPs per kilo-sample
  double q = 17.6219;  // constant overhead, TFLOPs
};

// One client's private parameters.
struct CavProfile {
  std::size_t id = 0;
  double beta = 0.5;         // reward curvature per kilo-sample, > 0
  double theta = 0.00025;    // compute cost rate, USD per second
  double capacity_f = 28.9;  // TFLOPS
  double pi = 0.5;           // non-IID severity in [0, 1]
  double d_min = 0.0;        // kilo-samples
  double d_max = 10.0;       // kilo-samples
  double t_max = 200.0;      // per-round latency allowance, seconds
};

inline double eval_accuracy(const AccuracyModel& m, double d, double pi) {
  if (!(d >= 0.0)) throw std::domain_error("eval_accuracy: d must be >= 0");
  if (!(pi >= 0.0 && pi <= 1.0))
    throw std::domain_error("eval_accuracy: pi must be in [0, 1]");
  return m.a * d * d + m.b * pi * pi + m.c * d * pi + m.d * d + m.e * pi + m.f;
}

// dA/dd at (d, pi).
inline double accuracy_grad_d(const AccuracyModel& m, double d, double pi) {
  if (!(d >= 0.0)) throw std::domain_error("accuracy_grad_d: d must be >= 0");
  if (!(pi >= 0.0 && pi <= 1.0))
    throw std::domain_error("accuracy_grad_d: pi must be in [0, 1]");
  return 2.0 * m.a * d + m.c * pi + m.d;
}

// Saturating reward alpha * (1 - exp(-beta d)); bounded above by alpha.
inline double eval_reward(double alpha, double beta, double d) {
  if (alpha < 0.0 || beta < 0.0 || d < 0.0)
    throw std::domain_error("eval_reward: negative input");
  return alpha * (1.0 - std::exp(-beta * d));
}

inline double compute_flops(const ComputeModel& cm, double d) {
  if (!(d >= 0.0)) throw std::domain_error("compute_flops: d must be >= 0");
  return cm.p * d + cm.q;
}

inline double compute_time(const ComputeModel& cm, double d, double capacity_f) {
  if (!(capacity_f > 0.0))
    throw std::domain_error("compute_time: capacity_f must be > 0");
  return compute_flops(cm, d) / capacity_f;
}

// Monetary cost of local training: rate (USD/s) times compute time.
inline double compute_cost(const CavProfile& profile, const ComputeModel& cm,
                           double d) {
  return profile.theta * compute_time(cm, d, profile.capacity_f);
}

// Largest data size the client can feasibly train: the data cap and the
// latency cap folded into one box bound. C is affine, so this is exact.
inline double feasible_upper_bound(const CavProfile& profile,
                                   const ComputeModel& cm) {
  if (cm.p > 0.0) {
    return std::min(profile.d_max,
                    (profile.t_max * profile.capacity_f - cm.q) / cm.p);
  }
  // Constant compute demand: latency either always or never satisfiable.
  return cm.q <= profile.t_max * profile.capacity_f
             ? profile.d_max
             : -std::numeric_limits<double>::infinity();
}

inline void validate_profile(const CavProfile& p, const ComputeModel& cm) {
  if (!(p.beta > 0.0)) throw std::invalid_argument("profile: beta must be > 0");
  if (!(p.theta >= 0.0))
    throw std::invalid_argument("profile: theta must be >= 0");
  if (!(p.capacity_f > 0.0))
    throw std::invalid_argument("profile: capacity_f must be > 0");
  if (!(p.pi >= 0.0 && p.pi <= 1.0))
    throw std::invalid_argument("profile: pi must be in [0, 1]");
  if (!(p.d_min >= 0.0 && p.d_min <= p.d_max))
    throw std::invalid_argument("profile: need 0 <= d_min <= d_max");
  if (!(p.t_max > 0.0))
    throw std::invalid_argument("profile: t_max must be > 0");
  if (feasible_upper_bound(p, cm) < p.d_min)
    throw std::invalid_argument("profile: latency cap leaves no feasible d");
}

// Total reward paid out across clients at the given data sizes.
inline double total_payout(const RewardWeights& weights,
                           const std::vector<CavProfile>& profiles,
                           const std::vector<double>& sizes) {
  if (weights.size() != profiles.size() || weights.size() != sizes.size())
    throw std::invalid_argument("total_payout: length mismatch");
  double sum = 0.0;
  for (std::size_t n = 0; n < weights.size(); ++n)
    sum += eval_reward(weights[n], profiles[n].beta, sizes[n]);
  return sum;
}

// Reporting-time clamp; never applied inside gradients.
inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace lefi
