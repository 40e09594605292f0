#pragma once

// Experiment configuration and seeded generation of client populations.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lefi/models.hpp"
#include "lefi/rng.hpp"

namespace lefi {

struct Scenario {
  std::size_t n_cavs = 10;
  double m_max = 5.0;    // total reward budget, USD
  double t_max = 200.0;  // per-round latency allowance, seconds
  double d_min = 0.0;    // kilo-samples
  double d_max = 10.0;   // kilo-samples
  // Cost rate draw, USD per second of compute: 0.5x..2x of 0.9 USD/hour.
  std::array<double, 2> theta_range = {0.5 * 0.9 / 3600.0, 2.0 * 0.9 / 3600.0};
  std::array<double, 2> beta_range = {0.2, 0.8};  // per kilo-sample
  std::array<double, 2> pi_range = {0.1, 1.0};
  double capacity_f = 28.9;  // TFLOPS
  double cost_scale = 1.0;   // global multiplier on theta draws
  AccuracyModel acc_model;
  ComputeModel cm;
  double eta = 1.5;     // initial step size at the default weight scale
  double delta = 0.05;  // probe perturbation, USD
  std::size_t warmup = 3;
  std::size_t rounds = 100;
  std::uint64_t seed = 0;
};

inline void validate_scenario(const Scenario& s) {
  const auto ordered = [](const std::array<double, 2>& r) {
    return r[0] <= r[1];
  };
  if (s.n_cavs == 0) throw std::invalid_argument("scenario: n_cavs must be > 0");
  if (!(s.m_max >= 0.0)) throw std::invalid_argument("scenario: m_max must be >= 0");
  if (!ordered(s.theta_range) || s.theta_range[0] < 0.0)
    throw std::invalid_argument("scenario: bad theta_range");
  if (!ordered(s.beta_range) || s.beta_range[0] <= 0.0)
    throw std::invalid_argument("scenario: bad beta_range");
  if (!ordered(s.pi_range) || s.pi_range[0] < 0.0 || s.pi_range[1] > 1.0)
    throw std::invalid_argument("scenario: bad pi_range");
  if (!(s.cost_scale >= 0.0))
    throw std::invalid_argument("scenario: cost_scale must be >= 0");
  if (!(s.delta > 0.0)) throw std::invalid_argument("scenario: delta must be > 0");
}

struct ScenarioInstance {
  Scenario scenario;
  std::vector<CavProfile> profiles;
};

// Draws the client population. Deterministic in (config, seed); the seed is
// stamped into the returned scenario.
inline ScenarioInstance gen_scenario(const Scenario& config,
                                     std::uint64_t seed) {
  validate_scenario(config);
  Scenario sc = config;
  sc.seed = seed;
  Rng rng(derive_seed(seed, /*stream=*/0x5ce7a5110ULL));
  std::vector<CavProfile> profiles;
  profiles.reserve(sc.n_cavs);
  for (std::size_t n = 0; n < sc.n_cavs; ++n) {
    CavProfile p;
    p.id = n;
    p.beta = rng.uniform(sc.beta_range[0], sc.beta_range[1]);
    p.theta =
        sc.cost_scale * rng.uniform(sc.theta_range[0], sc.theta_range[1]);
    p.pi = rng.uniform(sc.pi_range[0], sc.pi_range[1]);
    p.capacity_f = sc.capacity_f;
    p.d_min = sc.d_min;
    p.d_max = sc.d_max;
    p.t_max = sc.t_max;
    validate_profile(p, sc.cm);
    profiles.push_back(p);
  }
  return {sc, profiles};
}

}  // namespace lefi
