#pragma once

// Server-side reward optimizer: per-client GP surrogates of the unknown
// reward-to-size response, sample-based gradient ascent on the summed
// accuracy objective, and uniform scaling onto the budget.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lefi/client.hpp"
#include "lefi/gpr.hpp"
#include "lefi/models.hpp"
#include "lefi/rng.hpp"
#include "lefi/scenario.hpp"

namespace lefi {

// Observed response of one client to an offered reward cap.
using ClientFn = std::function<double(const CavProfile&, double)>;

inline ClientFn make_kkt_client(const ComputeModel& cm) {
  return [cm](const CavProfile& profile, double alpha) {
    return solve_data_selection(profile, cm, alpha).d_star;
  };
}

struct IterationRow {
  std::size_t t = 0;
  std::vector<double> alpha;
  std::vector<double> d;
  double payout = 0.0;
  double objective = 0.0;      // sum of per-client accuracy, unclamped
  double mean_accuracy = 0.0;  // objective / n, clamped to [0, 1]
  bool projected = false;      // budget scaling fired at the recorded (alpha, d)
  double wall_ms = 0.0;
};

struct ServerState {
  RewardWeights weights;
  std::vector<GprModel> surrogates;
  // Accumulated (alpha, d) pairs per client, warm-start probes included.
  std::vector<std::vector<std::pair<double, double>>> observations;
  std::vector<double> last_d;
  std::vector<IterationRow> history;
  std::size_t t = 0;
  double m_max = 5.0;
  double eta = 1.5;
  double delta = 0.05;
  KernelConfig surrogate_config;
  Rng rng{0};
};

// Finite-difference slope of the surrogate at alpha, with the probe value
// sampled from the posterior so its uncertainty feeds the ascent.
inline double estimate_sensitivity_gradient(const GprModel& surrogate,
                                            double alpha, double delta,
                                            Rng& rng) {
  if (!(delta > 0.0))
    throw std::domain_error("estimate_sensitivity_gradient: delta must be > 0");
  const double probe = surrogate.sample_posterior(alpha + delta, rng);
  return (probe - surrogate.predict(alpha).mean) / delta;
}

// dA/d(alpha) through the chain dA/dD * dD/d(alpha).
inline double chain_gradient(const AccuracyModel& acc, double pi,
                             double d_current, double sens_grad) {
  return accuracy_grad_d(acc, d_current, pi) * sens_grad;
}

inline RewardWeights update_weights(const RewardWeights& weights,
                                    const std::vector<double>& gradients,
                                    double eta) {
  if (weights.size() != gradients.size())
    throw std::invalid_argument("update_weights: length mismatch");
  RewardWeights next(weights.size());
  for (std::size_t n = 0; n < weights.size(); ++n) {
    if (!std::isfinite(gradients[n]))
      throw std::invalid_argument("update_weights: non-finite gradient");
    next[n] = std::max(0.0, weights[n] + eta * gradients[n]);
  }
  return next;
}

// Uniform scaling onto the budget: if the payout at the observed sizes
// exceeds m_max, every weight is multiplied by m_max / payout. Payout is
// linear in the weights at fixed d, so the scaled payout is exactly m_max.
inline RewardWeights project_weights(const RewardWeights& weights,
                                     const std::vector<CavProfile>& profiles,
                                     const std::vector<double>& d_observed,
                                     double m_max) {
  const double payout = total_payout(weights, profiles, d_observed);
  if (payout <= m_max) return weights;
  const double scale = m_max / payout;
  RewardWeights scaled = weights;
  for (double& a : scaled) a *= scale;
  return scaled;
}

// One proposal evaluated through the clients. An over-budget proposal is
// projected at the observed response and the clients are queried again at
// the feasible weights, so the recorded objective is what those weights
// actually buy. The `projected` flag marks rows whose recorded payout is
// pinned at m_max by a binding projection at the recorded sizes.
struct WeightsEvaluation {
  RewardWeights alpha;  // post-projection
  std::vector<double> d;
  double payout = 0.0;
  double objective = 0.0;
  bool projected = false;
};

inline WeightsEvaluation evaluate_weights(const RewardWeights& proposal,
                                          const std::vector<CavProfile>& profiles,
                                          const AccuracyModel& acc,
                                          double m_max,
                                          const ClientFn& client_fn) {
  WeightsEvaluation ev;
  ev.alpha = proposal;
  ev.d.resize(profiles.size());
  for (std::size_t n = 0; n < profiles.size(); ++n)
    ev.d[n] = client_fn(profiles[n], proposal[n]);
  ev.payout = total_payout(ev.alpha, profiles, ev.d);
  if (ev.payout > m_max) {
    ev.alpha = project_weights(ev.alpha, profiles, ev.d, m_max);
    for (std::size_t n = 0; n < profiles.size(); ++n)
      ev.d[n] = client_fn(profiles[n], ev.alpha[n]);
    ev.payout = total_payout(ev.alpha, profiles, ev.d);
    // Shrinking every weight can only shrink the responses, so the payout
    // lands at or below the budget; pin it exactly if it still binds.
    if (ev.payout > m_max) {
      ev.alpha = project_weights(ev.alpha, profiles, ev.d, m_max);
      ev.payout = total_payout(ev.alpha, profiles, ev.d);
      ev.projected = true;
    }
  }
  ev.objective = 0.0;
  for (std::size_t n = 0; n < profiles.size(); ++n)
    ev.objective += eval_accuracy(acc, ev.d[n], profiles[n].pi);
  return ev;
}

// Client responses are deterministic, so the surrogate noise sits just
// above the jitter floor; posterior spread then reflects data geometry
// rather than an artificial noise term.
inline constexpr double kSurrogateNoiseVariance = 1e-6;

// The ascent runs on a decaying schedule: eta_t = eta_0 / (1 + t / horizon).
// Early iterations take large steps (the budget cap is typically reached
// within a handful of rounds), late iterations settle the allocation.
inline constexpr double kStepDecayHorizon = 6.0;

// Warm start: probe rounds at staggered scales seed each client surrogate
// before gradient steps begin. Weights start at m_max / (2 n_cavs).
inline ServerState init_server_state(const Scenario& sc,
                                     const std::vector<CavProfile>& profiles,
                                     Rng rng, const ClientFn& client_fn) {
  const std::size_t n = profiles.size();
  ServerState state;
  state.m_max = sc.m_max;
  // The sensitivity slope scales like 1/alpha, so a step that is quadratic
  // in the per-client weight scale makes the iteration count to reach the
  // budget invariant across budgets and client counts.
  const double weight_scale = sc.m_max / (2.0 * static_cast<double>(n));
  state.eta = sc.eta * (weight_scale / 0.25) * (weight_scale / 0.25);
  state.delta = sc.delta;
  state.surrogate_config.noise_variance = kSurrogateNoiseVariance;
  state.rng = rng;
  state.weights.assign(n, weight_scale);
  state.observations.resize(n);
  state.surrogates.resize(n);
  state.last_d.assign(n, 0.0);
  const double hi = sc.m_max / static_cast<double>(n);
  for (std::size_t k = 0; k < sc.warmup; ++k) {
    const double mult =
        sc.warmup > 1
            ? 0.5 + static_cast<double>(k) / static_cast<double>(sc.warmup - 1)
            : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::max(0.0, state.rng.uniform(0.1, hi) * mult);
      const double d = client_fn(profiles[i], a);
      state.observations[i].emplace_back(a, d);
      state.last_d[i] = d;
    }
  }
  return state;
}

// One optimizer iteration: refit surrogates, ascend, project, query, record.
inline void lefi_step(ServerState& state,
                      const std::vector<CavProfile>& profiles,
                      const AccuracyModel& acc, const ClientFn& client_fn) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = profiles.size();
  std::vector<double> gradients(n);
  for (std::size_t i = 0; i < n; ++i) {
    state.surrogates[i] =
        GprModel::fit(state.observations[i], state.surrogate_config);
    const double sens = estimate_sensitivity_gradient(
        state.surrogates[i], state.weights[i], state.delta, state.rng);
    gradients[i] = chain_gradient(acc, profiles[i].pi, state.last_d[i], sens);
  }
  const double eta_t =
      state.eta / (1.0 + static_cast<double>(state.t) / kStepDecayHorizon);
  state.weights = update_weights(state.weights, gradients, eta_t);
  // Projection at the most recent observed response, then one query. The
  // fresh response gets a final budget enforcement at fixed sizes before
  // recording, so the recorded payout never exceeds m_max and equals it
  // exactly whenever that scaling binds.
  state.weights =
      project_weights(state.weights, profiles, state.last_d, state.m_max);
  const RewardWeights queried = state.weights;
  std::vector<double> d_new(n);
  for (std::size_t i = 0; i < n; ++i) {
    d_new[i] = client_fn(profiles[i], queried[i]);
    state.observations[i].emplace_back(queried[i], d_new[i]);
  }
  double payout = total_payout(queried, profiles, d_new);
  bool projected = false;
  if (payout > state.m_max) {
    state.weights = project_weights(queried, profiles, d_new, state.m_max);
    payout = total_payout(state.weights, profiles, d_new);
    projected = true;
  }
  double objective = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    objective += eval_accuracy(acc, d_new[i], profiles[i].pi);
  state.last_d = d_new;
  state.t += 1;

  IterationRow row;
  row.t = state.t;
  row.alpha = state.weights;
  row.d = std::move(d_new);
  row.payout = payout;
  row.objective = objective;
  row.mean_accuracy = clamp01(objective / static_cast<double>(n));
  row.projected = projected;
  row.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  state.history.push_back(std::move(row));
}

// Warm start plus `rounds` iterations; returns the per-iteration trace.
inline std::vector<IterationRow> lefi_run(const Scenario& sc,
                                          const std::vector<CavProfile>& profiles,
                                          std::size_t rounds, Rng rng,
                                          const ClientFn& client_fn) {
  if (rounds < 1) throw std::invalid_argument("lefi_run: rounds must be >= 1");
  ServerState state = init_server_state(sc, profiles, rng, client_fn);
  for (std::size_t t = 0; t < rounds; ++t)
    lefi_step(state, profiles, sc.acc_model, client_fn);
  return std::move(state.history);
}

}  // namespace lefi
