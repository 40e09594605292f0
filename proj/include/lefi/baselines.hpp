#pragma once

// Comparison optimizers: uniform random search over the weight box, and
// joint Bayesian optimization with an expected-improvement acquisition over
// the full weight vector.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "lefi/gpr.hpp"
#include "lefi/optimizer.hpp"

namespace lefi {

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Expected improvement over the incumbent for maximization.
inline double expected_improvement(double mean, double std, double best_so_far,
                                   double xi) {
  const double gain = mean - best_so_far - xi;
  if (std <= 0.0) return std::max(0.0, gain);
  const double z = gain / std;
  return std::max(0.0, gain * normal_cdf(z) + std * normal_pdf(z));
}

inline double expected_improvement(const GprModel& surrogate,
                                   const Eigen::VectorXd& x,
                                   double best_so_far, double xi) {
  const Posterior p = surrogate.predict(x);
  return expected_improvement(p.mean, p.std, best_so_far, xi);
}

// One uniform proposal in [0, alpha_hi]^n evaluated through the clients.
inline WeightsEvaluation random_search_step(
    double alpha_hi, std::size_t n_cavs, Rng& rng,
    const std::vector<CavProfile>& profiles, const AccuracyModel& acc,
    double m_max, const ClientFn& client_fn) {
  RewardWeights proposal(n_cavs);
  for (double& a : proposal) a = rng.uniform(0.0, alpha_hi);
  return evaluate_weights(proposal, profiles, acc, m_max, client_fn);
}

struct BoState {
  std::vector<std::pair<RewardWeights, double>> observations;
  GprModel surrogate;
  double best_so_far = -std::numeric_limits<double>::infinity();
  double alpha_hi = 5.0;  // per-dimension upper bound on proposals
  KernelConfig surrogate_config;
  double xi = 0.01;
  void record(const RewardWeights& alpha, double objective) {
    observations.emplace_back(alpha, objective);
    best_so_far = std::max(best_so_far, objective);
  }
};

// Fit the joint surrogate, pick the best of `candidate_count` uniform
// candidates by expected improvement (first index wins ties), evaluate it
// through the clients and append the observation.
inline WeightsEvaluation bara_step(BoState& state, Rng& rng,
                                   std::size_t candidate_count,
                                   const std::vector<CavProfile>& profiles,
                                   const AccuracyModel& acc, double m_max,
                                   const ClientFn& client_fn) {
  if (state.observations.empty())
    throw std::logic_error("bara_step: need at least one prior observation");
  if (candidate_count == 0)
    throw std::invalid_argument("bara_step: candidate_count must be > 0");

  const std::size_t n = profiles.size();
  Eigen::MatrixXd xs(state.observations.size(), n);
  Eigen::VectorXd ys(state.observations.size());
  for (std::size_t i = 0; i < state.observations.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j)
      xs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          state.observations[i].first[j];
    ys(static_cast<Eigen::Index>(i)) = state.observations[i].second;
  }
  state.surrogate = GprModel::fit(xs, ys, state.surrogate_config);

  Eigen::VectorXd best_candidate(n);
  double best_ei = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd candidate(n);
  for (std::size_t c = 0; c < candidate_count; ++c) {
    for (std::size_t j = 0; j < n; ++j)
      candidate(static_cast<Eigen::Index>(j)) =
          rng.uniform(0.0, state.alpha_hi);
    const double ei =
        expected_improvement(state.surrogate, candidate, state.best_so_far,
                             state.xi);
    if (ei > best_ei) {
      best_ei = ei;
      best_candidate = candidate;
    }
  }

  RewardWeights proposal(n);
  for (std::size_t j = 0; j < n; ++j)
    proposal[j] = best_candidate(static_cast<Eigen::Index>(j));
  WeightsEvaluation ev =
      evaluate_weights(proposal, profiles, acc, m_max, client_fn);
  state.record(ev.alpha, ev.objective);
  return ev;
}

}  // namespace lefi
