#pragma once

// Selfish client decision: the revenue-maximizing training-data size for a
// given reward cap. The objective alpha(1 - e^{-beta d}) - theta C(d)/F is
// strictly concave in d, so the KKT system reduces to one interior candidate
// clamped to the feasible box [d_min, ub].

#include <cmath>
#include <stdexcept>
#include <string>

#include "lefi/models.hpp"

namespace lefi {

enum class Binding { interior, lower_bound, upper_bound_data, upper_bound_latency };

inline const char* to_string(Binding b) {
  switch (b) {
    case Binding::interior: return "interior";
    case Binding::lower_bound: return "lower_bound";
    case Binding::upper_bound_data: return "upper_bound_data";
    case Binding::upper_bound_latency: return "upper_bound_latency";
  }
  return "?";
}

struct ClientDecision {
  double d_star = 0.0;   // kilo-samples
  double revenue = 0.0;  // USD
  Binding binding = Binding::interior;
};

struct InfeasibleProfile : std::runtime_error {
  explicit InfeasibleProfile(std::size_t id)
      : std::runtime_error("client " + std::to_string(id) +
                           ": feasible interval is empty") {}
};

inline double client_revenue(const CavProfile& profile, const ComputeModel& cm,
                             double alpha, double d) {
  return eval_reward(alpha, profile.beta, d) - compute_cost(profile, cm, d);
}

namespace detail {
// Tag for a decision pinned at the upper bound: report which cap bound it.
inline Binding upper_binding(const CavProfile& profile, const ComputeModel& cm) {
  if (cm.p <= 0.0) return Binding::upper_bound_data;
  const double latency_ub = (profile.t_max * profile.capacity_f - cm.q) / cm.p;
  return profile.d_max <= latency_ub ? Binding::upper_bound_data
                                     : Binding::upper_bound_latency;
}
}  // namespace detail

// Closed-form maximizer of client revenue over [d_min, ub].
// Interior stationarity: alpha beta e^{-beta d} = theta p / F.
// Revenue ties are broken toward the smaller d.
inline ClientDecision solve_data_selection(const CavProfile& profile,
                                           const ComputeModel& cm,
                                           double alpha) {
  if (alpha < 0.0)
    throw std::domain_error("solve_data_selection: alpha must be >= 0");
  const double ub = feasible_upper_bound(profile, cm);
  if (ub < profile.d_min) throw InfeasibleProfile(profile.id);

  // Marginal cost per kilo-sample; the q/F overhead is constant and drops
  // out of the argmax.
  const double marginal_cost = profile.theta * cm.p / profile.capacity_f;
  const double marginal_reward0 = alpha * profile.beta;

  double d = profile.d_min;
  Binding binding = Binding::lower_bound;
  if (marginal_reward0 <= marginal_cost) {
    // Revenue non-increasing from d_min on (constant when both are zero).
  } else if (marginal_cost <= 0.0) {
    d = ub;
    binding = detail::upper_binding(profile, cm);
  } else {
    const double d_interior =
        std::log(marginal_reward0 / marginal_cost) / profile.beta;
    if (d_interior <= profile.d_min) {
      d = profile.d_min;
      binding = Binding::lower_bound;
    } else if (d_interior >= ub) {
      d = ub;
      binding = detail::upper_binding(profile, cm);
    } else {
      d = d_interior;
      binding = Binding::interior;
    }
  }
  return {d, client_revenue(profile, cm, alpha, d), binding};
}

// Exhaustive scan of the feasible interval at a fixed resolution. Slow but
// assumption-free; used to arbitrate the closed form.
inline ClientDecision oracle_grid_search(const CavProfile& profile,
                                         const ComputeModel& cm, double alpha,
                                         double resolution) {
  if (!(resolution > 0.0))
    throw std::domain_error("oracle_grid_search: resolution must be > 0");
  if (alpha < 0.0)
    throw std::domain_error("oracle_grid_search: alpha must be >= 0");
  const double ub = feasible_upper_bound(profile, cm);
  if (ub < profile.d_min) throw InfeasibleProfile(profile.id);

  double best_d = profile.d_min;
  double best_rev = client_revenue(profile, cm, alpha, best_d);
  const auto consider = [&](double d) {
    const double rev = client_revenue(profile, cm, alpha, d);
    if (rev > best_rev) {  // strict: ties keep the smaller d
      best_rev = rev;
      best_d = d;
    }
  };
  const std::size_t steps =
      static_cast<std::size_t>(std::floor((ub - profile.d_min) / resolution));
  for (std::size_t k = 1; k <= steps; ++k)
    consider(profile.d_min + static_cast<double>(k) * resolution);
  consider(ub);

  Binding binding = Binding::interior;
  if (best_d <= profile.d_min)
    binding = Binding::lower_bound;
  else if (best_d >= ub)
    binding = detail::upper_binding(profile, cm);
  return {best_d, best_rev, binding};
}

}  // namespace lefi
