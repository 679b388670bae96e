#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "uramac/rng.hpp"

// Experiment configuration, deterministic parallel Monte-Carlo orchestration,
// result persistence and figure-data emission.
namespace uramac::harness {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what, std::string key = "")
      : std::runtime_error(what), offending_key(std::move(key)) {}
  std::string offending_key;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  int trials = 100;
  int workers = 1;
  std::string out = "out/run";
  std::string scale = "desk";
  nlohmann::json params = nlohmann::json::object();

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& file);
  nlohmann::json to_json() const;
  std::string canonical_string() const;  // sorted keys, lossless round trip
  std::uint64_t hash() const;            // FNV-1a over the canonical string
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  double se = 0.0;     // Monte-Carlo standard error; 0 with exact=true
  bool exact = false;
  long trials = 0;
};

enum class DatSchema { ka_ebno, ebno_pupe, eps_mu, ebno_fer };
const char* schema_header(DatSchema s);
void emit_dat(const std::vector<Point>& points, DatSchema schema,
              const std::filesystem::path& file);
std::vector<Point> parse_dat(const std::filesystem::path& file);

struct ResultRecord {
  std::string kind;
  std::string config_hash;
  std::string revision;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> data_files;
  nlohmann::json points = nlohmann::json::array();
  void save(const std::filesystem::path& file) const;
};

std::string source_revision();

// Deterministic parallel map: fn(trial, rng) with rng = Rng(seed, trial).
// Results are collected by trial index; `checkpoint` (if set) is invoked from
// the coordinating thread roughly every `checkpoint_seconds` with the done
// flags and partial values.
template <typename T>
std::vector<T> parallel_map(int trials, int workers, std::uint64_t seed,
                            const std::function<T(int, Rng&)>& fn,
                            const std::function<void(const std::vector<T>&,
                                                     const std::vector<char>&)>& checkpoint = {},
                            double checkpoint_seconds = 60.0) {
  std::vector<T> results(trials);
  std::vector<char> done(trials, 0);
  std::atomic<int> next{0};
  std::atomic<int> completed{0};
  const int nw = std::max(1, workers);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int t = next.fetch_add(1);
        if (t >= trials) break;
        Rng rng(seed, std::uint64_t(t));
        results[t] = fn(t, rng);
        reinterpret_cast<std::atomic<char>&>(done[t]).store(1, std::memory_order_release);
        completed.fetch_add(1, std::memory_order_release);
      }
    });
  }
  auto last = std::chrono::steady_clock::now();
  while (completed.load(std::memory_order_acquire) < trials) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    const auto now = std::chrono::steady_clock::now();
    if (checkpoint && std::chrono::duration<double>(now - last).count() >= checkpoint_seconds) {
      checkpoint(results, done);
      last = now;
    }
  }
  for (auto& th : pool) th.join();
  return results;
}

// standard error by batch means over >= min_batches batches
double batch_mean_se(const std::vector<double>& values, int min_batches = 30);
double mean(const std::vector<double>& values);

ResultRecord run(const ExperimentConfig& cfg);

struct CurveJob {
  std::string curve;
  ExperimentConfig config;
};

struct FigurePlan {
  std::string figure;
  std::string scale;
  std::vector<CurveJob> jobs;
};

// Figure names: fig1, fig2, figK2, figK3, figK4, fig_asymp1, fig_asymp2,
// fig_hard_decision. Full scale carries the long-running paper geometry.
FigurePlan reproduce_figure(const std::string& name, const std::string& scale,
                            const std::string& out_dir, const std::string& codes_dir);
std::vector<ResultRecord> run_figure(const FigurePlan& plan);

}  // namespace uramac::harness
