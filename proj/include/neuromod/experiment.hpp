#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "neuromod/es.hpp"
#include "neuromod/evaluation.hpp"
#include "neuromod/topology.hpp"

namespace neuromod {

EnvKind parse_env(const std::string& text);
Strategy parse_strategy(const std::string& text);
bool parse_gating(const std::string& text);
BehaviorId parse_behavior(const std::string& text);

// Full description of one training experiment (all replications).
struct RunConfig {
  EnvKind env = EnvKind::hopper;
  Strategy strategy = Strategy::paired;
  bool gating = true;
  int hidden = 16;
  long generations = 300;
  int n_pairs = 40;
  double sigma = 0.05;
  double learning_rate = 0.01;
  double weight_decay = 0.005;
  int max_steps = 500;
  std::uint64_t seed = 1;
  int replications = 5;
  std::filesystem::path out_dir = "runs";
  bool parallel_replications = false;

  void validate() const;  // throws ConfigError
  NetworkTopology topology() const;
  EsConfig es_config(std::uint64_t replication_seed) const;
};

// Applies "key = value" lines from a config file onto cfg. '#' starts a
// comment; blank lines are skipped. Unknown keys or bad values throw
// ConfigError naming file and line.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& file);

struct CurveRow {
  long generation = 0;
  long eval_steps = 0;  // cumulative candidate-evaluation steps
  double fitness_b1 = 0.0;
  double fitness_b2 = 0.0;
  double combined = 0.0;
  double best_sample = 0.0;
};

struct ReplicationResult {
  int replication = 0;
  std::vector<CurveRow> curve;
  ParameterVector final_params;
  bool aborted = false;
  long abort_generation = -1;
  std::string abort_reason;
};

// One full training run with seed = config.seed + replication. Progress is
// printed to stderr once per generation when verbose. Numerical failure
// stops the run and returns the rows collected so far with aborted set.
ReplicationResult train_replication(const RunConfig& config, int replication,
                                    bool verbose);

struct ExperimentResult {
  std::vector<ReplicationResult> replications;
};

// Runs every replication and writes fitness_gen_r<r>.csv plus
// params_final_r<r>.txt into config.out_dir. Aborted replications leave a
// trailing "# aborted ..." row in their curve file and no parameter file;
// the rest proceed. Throws only if no replication produced a curve file.
ExperimentResult run_experiment(const RunConfig& config, bool verbose = true);

void write_curve_csv(const std::filesystem::path& file,
                     std::span<const CurveRow> rows, bool aborted = false,
                     long abort_generation = -1,
                     const std::string& abort_reason = {});

// Strict parse of a curve file: exact header, six fields per row, full
// numeric consumption. Lines starting with '#' are skipped. Throws IoError
// naming file and line on any malformed content.
std::vector<CurveRow> parse_curve_csv(const std::filesystem::path& file);

struct SummaryStats {
  std::string config_label;
  std::size_t n = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // population standard deviation
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Population statistics of the given values; quartiles by linear
// interpolation at h = p*(n-1) on the sorted values.
SummaryStats compute_summary(std::string label, std::span<const double> finals);

// Reads the final-generation combined fitness from each curve file.
SummaryStats summarize(std::string label,
                       std::span<const std::filesystem::path> curve_files);

void write_summary_csv(const std::filesystem::path& file,
                       std::span<const SummaryStats> rows);

struct ReplayResult {
  double fitness = 0.0;
  int steps = 0;
};

// Single deterministic rollout that dumps one trajectory row per step:
// "step,x,h,vh,reward,done" on the hopper, "step,x,y,yaw,reward,done" on
// the walker.
ReplayResult replay(const ParameterVector& params,
                    const NetworkTopology& topology, EnvKind env,
                    BehaviorId behavior, std::uint64_t episode_seed,
                    int max_steps, const std::filesystem::path& trajectory_file);

}  // namespace neuromod
