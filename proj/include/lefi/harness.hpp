#pragma once

// Experiment orchestration: JSON configs, method dispatch, trace
// persistence (CSV + manifest), relative-improvement reports and axis
// sweeps. All outputs are deterministic in (config, seed).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lefi/baselines.hpp"
#include "lefi/optimizer.hpp"
#include "lefi/scenario.hpp"

namespace lefi {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::size_t kBaraCandidateCount = 512;

enum class Method { lefi, random, bara };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::lefi: return "lefi";
    case Method::random: return "random";
    case Method::bara: return "bara";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  if (name == "lefi") return Method::lefi;
  if (name == "random") return Method::random;
  if (name == "bara") return Method::bara;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Config file handling. Unknown keys are rejected so typos cannot silently
// fall back to defaults.

inline nlohmann::json scenario_to_json(const Scenario& s) {
  return nlohmann::json{
      {"n_cavs", s.n_cavs},
      {"m_max", s.m_max},
      {"t_max", s.t_max},
      {"d_min", s.d_min},
      {"d_max", s.d_max},
      {"theta_range", {s.theta_range[0], s.theta_range[1]}},
      {"beta_range", {s.beta_range[0], s.beta_range[1]}},
      {"pi_range", {s.pi_range[0], s.pi_range[1]}},
      {"capacity_f", s.capacity_f},
      {"cost_scale", s.cost_scale},
      {"accuracy",
       {{"a", s.acc_model.a},
        {"b", s.acc_model.b},
        {"c", s.acc_model.c},
        {"d", s.acc_model.d},
        {"e", s.acc_model.e},
        {"f", s.acc_model.f}}},
      {"compute", {{"p", s.cm.p}, {"q", s.cm.q}}},
      {"eta", s.eta},
      {"delta", s.delta},
      {"warmup", s.warmup},
      {"rounds", s.rounds},
      {"seed", s.seed}};
}

namespace detail {
inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return key == k;
        }) == known.end())
      throw std::invalid_argument("config: unknown key '" + key + "' in " +
                                  where);
  }
}

inline std::array<double, 2> read_range(const nlohmann::json& j,
                                        const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2)
    throw std::invalid_argument(std::string("config: ") + key +
                                " must be a [lo, hi] pair");
  return {v[0].get<double>(), v[1].get<double>()};
}
}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  detail::reject_unknown_keys(
      j,
      {"n_cavs", "m_max", "t_max", "d_min", "d_max", "theta_range",
       "beta_range", "pi_range", "capacity_f", "cost_scale", "accuracy",
       "compute", "eta", "delta", "warmup", "rounds", "seed"},
      "scenario");
  Scenario s;
  if (j.contains("n_cavs")) s.n_cavs = j["n_cavs"].get<std::size_t>();
  if (j.contains("m_max")) s.m_max = j["m_max"].get<double>();
  if (j.contains("t_max")) s.t_max = j["t_max"].get<double>();
  if (j.contains("d_min")) s.d_min = j["d_min"].get<double>();
  if (j.contains("d_max")) s.d_max = j["d_max"].get<double>();
  if (j.contains("theta_range"))
    s.theta_range = detail::read_range(j, "theta_range");
  if (j.contains("beta_range"))
    s.beta_range = detail::read_range(j, "beta_range");
  if (j.contains("pi_range")) s.pi_range = detail::read_range(j, "pi_range");
  if (j.contains("capacity_f")) s.capacity_f = j["capacity_f"].get<double>();
  if (j.contains("cost_scale")) s.cost_scale = j["cost_scale"].get<double>();
  if (j.contains("accuracy")) {
    const auto& a = j["accuracy"];
    detail::reject_unknown_keys(a, {"a", "b", "c", "d", "e", "f"}, "accuracy");
    if (a.contains("a")) s.acc_model.a = a["a"].get<double>();
    if (a.contains("b")) s.acc_model.b = a["b"].get<double>();
    if (a.contains("c")) s.acc_model.c = a["c"].get<double>();
    if (a.contains("d")) s.acc_model.d = a["d"].get<double>();
    if (a.contains("e")) s.acc_model.e = a["e"].get<double>();
    if (a.contains("f")) s.acc_model.f = a["f"].get<double>();
  }
  if (j.contains("compute")) {
    const auto& c = j["compute"];
    detail::reject_unknown_keys(c, {"p", "q"}, "compute");
    if (c.contains("p")) s.cm.p = c["p"].get<double>();
    if (c.contains("q")) s.cm.q = c["q"].get<double>();
  }
  if (j.contains("eta")) s.eta = j["eta"].get<double>();
  if (j.contains("delta")) s.delta = j["delta"].get<double>();
  if (j.contains("warmup")) s.warmup = j["warmup"].get<std::size_t>();
  if (j.contains("rounds")) s.rounds = j["rounds"].get<std::size_t>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  validate_scenario(s);
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  nlohmann::json j;
  in >> j;
  return scenario_from_json(j);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Stable hex digest of the scenario, used to tie traces to their config.
inline std::string config_hash(const Scenario& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(scenario_to_json(s).dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Experiment dispatch.

struct RunRecord {
  Method method = Method::lefi;
  std::uint64_t seed = 0;
  std::string scenario_hash;
  std::vector<IterationRow> rows;
};

inline double final_objective(const RunRecord& r) {
  return r.rows.back().objective;
}

inline double best_objective(const RunRecord& r) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& row : r.rows) best = std::max(best, row.objective);
  return best;
}

// The result a method actually delivers: the converged objective for the
// gradient optimizer, the incumbent for the search baselines.
inline double achieved_objective(const RunRecord& r) {
  return r.method == Method::lefi ? final_objective(r) : best_objective(r);
}

inline RunRecord run_experiment(const Scenario& config, Method method,
                                std::size_t rounds, std::uint64_t seed) {
  if (rounds < 1)
    throw std::invalid_argument("run_experiment: rounds must be >= 1");
  const auto [sc, profiles] = gen_scenario(config, seed);
  const ClientFn client = make_kkt_client(sc.cm);
  Rng rng(derive_seed(seed, /*stream=*/0x0e71));

  RunRecord rec;
  rec.method = method;
  rec.seed = seed;
  rec.scenario_hash = config_hash(sc);

  switch (method) {
    case Method::lefi:
      rec.rows = lefi_run(sc, profiles, rounds, rng, client);
      break;
    case Method::random: {
      for (std::size_t t = 1; t <= rounds; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        WeightsEvaluation ev = random_search_step(
            sc.m_max, sc.n_cavs, rng, profiles, sc.acc_model, sc.m_max, client);
        IterationRow row;
        row.t = t;
        row.alpha = ev.alpha;
        row.d = ev.d;
        row.payout = ev.payout;
        row.objective = ev.objective;
        row.mean_accuracy =
            clamp01(ev.objective / static_cast<double>(sc.n_cavs));
        row.projected = ev.projected;
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        rec.rows.push_back(std::move(row));
      }
      break;
    }
    case Method::bara: {
      BoState state;
      state.alpha_hi = sc.m_max;
      for (std::size_t t = 1; t <= rounds; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        WeightsEvaluation ev;
        if (state.observations.empty()) {
          // The surrogate needs a prior point; seed with one random draw.
          ev = random_search_step(sc.m_max, sc.n_cavs, rng, profiles,
                                  sc.acc_model, sc.m_max, client);
          state.record(ev.alpha, ev.objective);
        } else {
          ev = bara_step(state, rng, kBaraCandidateCount, profiles,
                         sc.acc_model, sc.m_max, client);
        }
        IterationRow row;
        row.t = t;
        row.alpha = ev.alpha;
        row.d = ev.d;
        row.payout = ev.payout;
        row.objective = ev.objective;
        row.mean_accuracy =
            clamp01(ev.objective / static_cast<double>(sc.n_cavs));
        row.projected = ev.projected;
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        rec.rows.push_back(std::move(row));
      }
      break;
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Relative accuracy improvement.

// Objective under the fixed arbitrary-weights reference: uniform
// alpha = m_max / (2 n), evaluated once through the clients.
inline double reference_objective(const Scenario& sc,
                                  const std::vector<CavProfile>& profiles) {
  const RewardWeights uniform(
      profiles.size(), sc.m_max / (2.0 * static_cast<double>(profiles.size())));
  return evaluate_weights(uniform, profiles, sc.acc_model, sc.m_max,
                          make_kkt_client(sc.cm))
      .objective;
}

// Per-seed RAI of each method against the arbitrary-weights reference,
// normalized by the gradient optimizer's improvement.
inline std::map<Method, double> compute_rai(
    const std::map<Method, double>& achieved, double reference) {
  const auto it = achieved.find(Method::lefi);
  if (it == achieved.end())
    throw std::invalid_argument("compute_rai: missing lefi record");
  const double denom = it->second - reference;
  const double scale = std::max(1.0, std::abs(it->second));
  if (std::abs(denom) < 1e-12 * scale)
    throw std::runtime_error("compute_rai: degenerate denominator");
  std::map<Method, double> rai;
  for (const auto& [method, value] : achieved)
    rai[method] = (value - reference) / denom;
  return rai;
}

struct RaiReport {
  std::map<Method, std::vector<double>> per_seed;
  std::map<Method, double> median;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// Builds the report from records grouped however the caller obtained them;
// records must share the scenario hash and cover lefi for every seed.
inline RaiReport build_rai_report(const std::vector<RunRecord>& records,
                                  const Scenario& config) {
  std::map<std::uint64_t, std::map<Method, double>> by_seed;
  for (const auto& r : records) {
    if (r.scenario_hash != config_hash(gen_scenario(config, r.seed).scenario))
      throw std::invalid_argument("build_rai_report: scenario mismatch");
    by_seed[r.seed][r.method] = achieved_objective(r);
  }
  RaiReport report;
  for (const auto& [seed, achieved] : by_seed) {
    const auto inst = gen_scenario(config, seed);
    const double ref = reference_objective(inst.scenario, inst.profiles);
    for (const auto& [method, value] : compute_rai(achieved, ref))
      report.per_seed[method].push_back(value);
  }
  for (const auto& [method, values] : report.per_seed)
    report.median[method] = median_of(values);
  return report;
}

// ---------------------------------------------------------------------------
// Axis sweeps.

enum class SweepAxis { budget, latency, n_cavs };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::budget: return "budget";
    case SweepAxis::latency: return "latency";
    case SweepAxis::n_cavs: return "n_cavs";
  }
  return "?";
}

inline SweepAxis parse_axis(std::string_view name) {
  if (name == "budget") return SweepAxis::budget;
  if (name == "latency") return SweepAxis::latency;
  if (name == "n_cavs") return SweepAxis::n_cavs;
  throw std::invalid_argument("unknown sweep axis: " + std::string(name));
}

inline Scenario apply_axis(const Scenario& base, SweepAxis axis, double value) {
  Scenario sc = base;
  switch (axis) {
    case SweepAxis::budget:
      sc.m_max = value;
      break;
    case SweepAxis::latency:
      sc.t_max = value;
      break;
    case SweepAxis::n_cavs: {
      if (value < 1.0 || value != std::floor(value))
        throw std::invalid_argument("n_cavs sweep values must be integers >= 1");
      sc.n_cavs = static_cast<std::size_t>(value);
      break;
    }
  }
  return sc;
}

struct SweepCell {
  Method method = Method::lefi;
  double value = 0.0;
  double median_objective = 0.0;
};

struct SweepTable {
  SweepAxis axis = SweepAxis::budget;
  std::vector<SweepCell> cells;
};

inline SweepTable sweep(const Scenario& config, SweepAxis axis,
                        const std::vector<double>& values,
                        const std::vector<std::uint64_t>& seeds) {
  if (values.empty() || seeds.empty())
    throw std::invalid_argument("sweep: values and seeds must be non-empty");
  SweepTable table;
  table.axis = axis;
  for (double v : values) {
    const Scenario sc = apply_axis(config, axis, v);
    for (Method m : {Method::lefi, Method::random, Method::bara}) {
      std::vector<double> achieved;
      achieved.reserve(seeds.size());
      for (std::uint64_t seed : seeds)
        achieved.push_back(
            achieved_objective(run_experiment(sc, m, sc.rounds, seed)));
      table.cells.push_back({m, v, median_of(achieved)});
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Persistence. CSV column order is part of the interface; floats carry nine
// significant digits. Writes go through a temp file and an atomic rename.

inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string render_csv(const RunRecord& rec) {
  const std::size_t n = rec.rows.empty() ? 0 : rec.rows.front().alpha.size();
  std::string out = "t,method,seed,objective,mean_accuracy,payout";
  for (std::size_t i = 0; i < n; ++i) out += ",alpha_" + std::to_string(i);
  for (std::size_t i = 0; i < n; ++i) out += ",d_" + std::to_string(i);
  out += "\n";
  for (const auto& row : rec.rows) {
    out += std::to_string(row.t);
    out += ",";
    out += to_string(rec.method);
    out += ",";
    out += std::to_string(rec.seed);
    out += ",";
    out += format_g9(row.objective);
    out += ",";
    out += format_g9(row.mean_accuracy);
    out += ",";
    out += format_g9(row.payout);
    for (double a : row.alpha) {
      out += ",";
      out += format_g9(a);
    }
    for (double d : row.d) {
      out += ",";
      out += format_g9(d);
    }
    out += "\n";
  }
  return out;
}

inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write: " + tmp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw std::runtime_error("cannot replace " + path.string() + ": " +
                             ec.message());
}

inline std::string run_filename(const RunRecord& rec) {
  return std::string(to_string(rec.method)) + "_seed" +
         std::to_string(rec.seed) + ".csv";
}

// Writes one CSV per record and maintains manifest.json. The manifest keys
// on the base config (run seeds are listed per entry), so successive
// invocations against the same directory accumulate: an existing entry for
// the same (method, seed) is replaced, others are kept. Mixing configs in
// one directory is an error.
inline void emit_outputs(const std::vector<RunRecord>& records,
                         const Scenario& config,
                         const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create " + out_dir.string() + ": " +
                             ec.message());
  const std::string hash = config_hash(config);

  nlohmann::json runs = nlohmann::json::array();
  const std::filesystem::path manifest_path = out_dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json previous;
    in >> previous;
    if (previous.at("config_hash").get<std::string>() != hash)
      throw std::runtime_error(out_dir.string() +
                               " holds runs of a different config");
    runs = previous.at("runs");
  }

  for (const auto& rec : records) {
    const std::string name = run_filename(rec);
    write_file_atomic(out_dir / name, render_csv(rec));
    double wall = 0.0;
    for (const auto& row : rec.rows) wall += row.wall_ms;
    const nlohmann::json entry = {{"method", to_string(rec.method)},
                                  {"seed", rec.seed},
                                  {"rounds", rec.rows.size()},
                                  {"file", name},
                                  {"final_objective", final_objective(rec)},
                                  {"best_objective", best_objective(rec)},
                                  {"wall_ms_total", wall}};
    bool replaced = false;
    for (auto& existing : runs)
      if (existing.at("file").get<std::string>() == name) {
        existing = entry;
        replaced = true;
        break;
      }
    if (!replaced) runs.push_back(entry);
  }

  std::vector<std::uint64_t> seeds;
  for (const auto& entry : runs)
    seeds.push_back(entry.at("seed").get<std::uint64_t>());
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  const nlohmann::json manifest = {{"version", kVersion},
                                   {"config_hash", hash},
                                   {"scenario", scenario_to_json(config)},
                                   {"seeds", seeds},
                                   {"runs", runs}};
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
}

inline std::string render_sweep_csv(const SweepTable& table) {
  std::string out = "axis,value,method,median_objective\n";
  for (const auto& cell : table.cells) {
    out += to_string(table.axis);
    out += ",";
    out += format_g9(cell.value);
    out += ",";
    out += to_string(cell.method);
    out += ",";
    out += format_g9(cell.median_objective);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cost-scale calibration: the smallest global theta multiplier at which the
// median client decision under uniform alpha = m_max / (2 n) is interior.
// Found by geometric bracketing of the rising edge followed by bisection.

inline double calibrate_cost_scale(const Scenario& config) {
  const auto interior_fraction = [&](double scale) {
    Scenario s = config;
    s.cost_scale = scale;
    const auto inst = gen_scenario(s, config.seed);
    const double alpha =
        inst.scenario.m_max / (2.0 * static_cast<double>(inst.profiles.size()));
    std::size_t interior = 0;
    for (const auto& p : inst.profiles)
      if (solve_data_selection(p, inst.scenario.cm, alpha).binding ==
          Binding::interior)
        ++interior;
    return static_cast<double>(interior) /
           static_cast<double>(inst.profiles.size());
  };

  double hi = 1e-4;
  while (interior_fraction(hi) < 0.5) {
    hi *= 2.0;
    if (hi > 1e6)
      throw std::runtime_error("calibrate_cost_scale: no interior regime found");
  }
  double lo = hi / 2.0;
  while (lo > 1e-9 && interior_fraction(lo) >= 0.5) {
    hi = lo;
    lo /= 2.0;
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (interior_fraction(mid) >= 0.5 ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace lefi
