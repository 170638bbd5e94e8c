#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "neuromod/environments.hpp"
#include "neuromod/es.hpp"
#include "neuromod/policy.hpp"
#include "neuromod/topology.hpp"

namespace neuromod {

enum class EnvKind { hopper, walker };

int env_obs_size(EnvKind kind);
int env_action_size(EnvKind kind);
const char* env_name(EnvKind kind);

// How candidates are matched to behaviors within a generation.
//   naive       each candidate draws its own random behavior
//   two_episode every candidate runs B1 then B2, fitness is the sum
//   paired      one random behavior per mirrored pair, shared by members
enum class Strategy { naive, two_episode, paired };

const char* strategy_name(Strategy strategy);

struct PlanEntry {
  std::uint64_t episode_seed = 0;
  BehaviorId behavior = BehaviorId::b1;
};

// Episode assignments for one generation, one entry list per candidate in
// candidate order (pair i occupies slots 2i and 2i+1).
struct EvaluationPlan {
  Strategy strategy = Strategy::paired;
  std::vector<std::vector<PlanEntry>> per_candidate;

  int episodes_per_candidate() const {
    return strategy == Strategy::two_episode ? 2 : 1;
  }
};

EvaluationPlan build_plan(Strategy strategy, long generation,
                          std::uint64_t run_seed, int n_pairs);

struct RolloutResult {
  double fitness = 0.0;
  int steps_used = 0;
  GateTrace trace;  // filled only when tracing a gated policy
};

// Resets the environment and runs forward pass -> env step until done or
// max_steps, accumulating per-step rewards. Throws NumericalError on
// non-finite values in the network or the environment.
RolloutResult rollout(const ParameterVector& params,
                      const NetworkTopology& topology, EnvKind env,
                      BehaviorId behavior, std::uint64_t episode_seed,
                      int max_steps, bool trace = false);

struct GenerationEval {
  std::vector<double> fitness;  // one value per candidate, candidate order
  long steps_used = 0;          // env steps consumed by all episodes
};

// Serial reference implementation: candidates evaluated one after another.
GenerationEval evaluate_generation_serial(const ParameterVector& centroid,
                                          double sigma,
                                          const PerturbationBatch& batch,
                                          const EvaluationPlan& plan,
                                          EnvKind env,
                                          const NetworkTopology& topology,
                                          int max_steps);

// OpenMP-parallel version; produces exactly the same results as the serial
// reference (every candidate is an independent pure rollout). A candidate
// whose rollout fails numerically receives the generation's minimum finite
// fitness; if no candidate finishes, the generation fails.
GenerationEval evaluate_generation(const ParameterVector& centroid,
                                   double sigma,
                                   const PerturbationBatch& batch,
                                   const EvaluationPlan& plan, EnvKind env,
                                   const NetworkTopology& topology,
                                   int max_steps);

// Normalized fitness difference between the two cued behaviors, in [0, 1]:
// |f1 - f2| / max(|f1|, |f2|, 1e-9). 1 means the policy has collapsed onto
// one behavior.
double behavior_gap(const ParameterVector& params,
                    const NetworkTopology& topology, EnvKind env,
                    std::uint64_t episode_seed, int max_steps);

double behavior_gap_from_fitness(double f1, double f2);

// Per-gate mean activations under each behavior cue and the per-neuron
// specialization index |mean_b1 - mean_b2|.
struct SpecializationReport {
  std::vector<double> mean_gate_b1;
  std::vector<double> mean_gate_b2;
  std::vector<double> index;
  double aggregate = 0.0;
};

SpecializationReport specialization_report(
    const ParameterVector& params, const NetworkTopology& topology,
    EnvKind env, std::span<const std::uint64_t> episode_seeds, int max_steps);

// CSV: neuron_index,mean_gate_b1,mean_gate_b2,index rows, then a final
// "aggregate" row carrying the overall means and the aggregate index.
void write_specialization_csv(const std::filesystem::path& file,
                              const SpecializationReport& report);

}  // namespace neuromod
