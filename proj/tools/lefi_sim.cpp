// Command-line front end: single runs, axis sweeps and RAI reports over
// persisted run directories.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lefi/lefi.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t next = csv.find(',', pos);
    const std::string tok =
        csv.substr(pos, next == std::string::npos ? next : next - pos);
    if (tok.empty()) throw std::invalid_argument("empty entry in list: " + csv);
    out.push_back(std::stod(tok));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> out;
  for (double v : parse_double_list(csv)) {
    if (v < 0 || v != std::floor(v))
      throw std::invalid_argument("seeds must be nonnegative integers: " + csv);
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

int run_command(const std::string& config_path, const std::string& method_name,
                std::uint64_t seed, std::optional<std::size_t> rounds,
                const std::string& out_dir) {
  const lefi::Scenario config = lefi::load_scenario(config_path);
  const lefi::Method method = lefi::parse_method(method_name);
  const std::size_t n_rounds = rounds.value_or(config.rounds);
  const lefi::RunRecord rec =
      lefi::run_experiment(config, method, n_rounds, seed);
  lefi::emit_outputs({rec}, config, out_dir);
  std::printf("%s seed=%llu rounds=%zu final_objective=%s payout=%s -> %s\n",
              lefi::to_string(method), static_cast<unsigned long long>(seed),
              rec.rows.size(), lefi::format_g9(lefi::final_objective(rec)).c_str(),
              lefi::format_g9(rec.rows.back().payout).c_str(),
              (std::filesystem::path(out_dir) / lefi::run_filename(rec))
                  .string()
                  .c_str());
  return 0;
}

int sweep_command(const std::string& config_path, const std::string& axis_name,
                  const std::string& values_csv, const std::string& seeds_csv,
                  const std::string& out_dir) {
  const lefi::Scenario config = lefi::load_scenario(config_path);
  const lefi::SweepAxis axis = lefi::parse_axis(axis_name);
  const auto values = parse_double_list(values_csv);
  const auto seeds = parse_seed_list(seeds_csv);
  const lefi::SweepTable table = lefi::sweep(config, axis, values, seeds);
  std::filesystem::create_directories(out_dir);
  const std::string csv = lefi::render_sweep_csv(table);
  lefi::write_file_atomic(std::filesystem::path(out_dir) / "sweep.csv", csv);
  const nlohmann::json manifest = {
      {"version", lefi::kVersion},
      {"config_hash", lefi::config_hash(config)},
      {"scenario", lefi::scenario_to_json(config)},
      {"axis", lefi::to_string(axis)},
      {"values", values},
      {"seeds", seeds}};
  lefi::write_file_atomic(std::filesystem::path(out_dir) / "sweep_manifest.json",
                          manifest.dump(2) + "\n");
  std::fputs(csv.c_str(), stdout);
  return 0;
}

int rai_command(const std::string& in_dir) {
  const std::filesystem::path dir(in_dir);
  std::ifstream in(dir / "manifest.json");
  if (!in)
    throw std::runtime_error("cannot open manifest: " +
                             (dir / "manifest.json").string());
  nlohmann::json manifest;
  in >> manifest;
  const lefi::Scenario config =
      lefi::scenario_from_json(manifest.at("scenario"));

  // Re-run the recorded (method, seed) pairs; traces are deterministic, so
  // this reproduces exactly what the directory holds.
  std::vector<lefi::RunRecord> records;
  for (const auto& run : manifest.at("runs")) {
    const lefi::Method method =
        lefi::parse_method(run.at("method").get<std::string>());
    const std::uint64_t seed = run.at("seed").get<std::uint64_t>();
    const std::size_t rounds = run.at("rounds").get<std::size_t>();
    records.push_back(lefi::run_experiment(config, method, rounds, seed));
  }
  const lefi::RaiReport report = lefi::build_rai_report(records, config);
  std::printf("method,median_rai,seeds\n");
  for (const auto& [method, median] : report.median)
    std::printf("%s,%s,%zu\n", lefi::to_string(method),
                lefi::format_g9(median).c_str(),
                report.per_seed.at(method).size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-constrained reward-allocation simulator"};
  app.require_subcommand(1);

  std::string config_path, method_name, out_dir, axis_name, values_csv,
      seeds_csv, in_dir;
  std::uint64_t seed = 0;
  std::optional<std::size_t> rounds;

  CLI::App* run = app.add_subcommand("run", "simulate one method");
  run->add_option("--config", config_path, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--method", method_name, "lefi|random|bara")->required();
  run->add_option("--seed", seed, "master seed")->required();
  run->add_option("--rounds", rounds, "override configured rounds");
  run->add_option("--out", out_dir, "output directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "sweep one scenario axis");
  sweep->add_option("--config", config_path, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis_name, "budget|latency|n_cavs")->required();
  sweep->add_option("--values", values_csv, "comma-separated axis values")
      ->required();
  sweep->add_option("--seeds", seeds_csv, "comma-separated seeds")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI::App* rai = app.add_subcommand("rai", "RAI report for a run directory");
  rai->add_option("--in", in_dir, "directory with manifest.json")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(config_path, method_name, seed, rounds, out_dir);
    if (sweep->parsed())
      return sweep_command(config_path, axis_name, values_csv, seeds_csv,
                           out_dir);
    if (rai->parsed()) return rai_command(in_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "{\"error\":\"%s\"}\n", e.what());
    return 1;
  }
  return 0;
}
