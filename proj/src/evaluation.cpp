#include "neuromod/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "neuromod/errors.hpp"
#include "neuromod/rng.hpp"

namespace neuromod {

int env_obs_size(EnvKind kind) {
  return kind == EnvKind::hopper ? HopperEnv::kObsSize : WalkerEnv::kObsSize;
}

int env_action_size(EnvKind kind) {
  return kind == EnvKind::hopper ? HopperEnv::kActionSize
                                 : WalkerEnv::kActionSize;
}

const char* env_name(EnvKind kind) {
  return kind == EnvKind::hopper ? "hopper" : "walker";
}

const char* strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::naive:
      return "naive";
    case Strategy::two_episode:
      return "two_episode";
    case Strategy::paired:
      return "paired";
  }
  return "?";
}

EvaluationPlan build_plan(Strategy strategy, long generation,
                          std::uint64_t run_seed, int n_pairs) {
  if (n_pairs < 1) throw ConfigError("build_plan: n_pairs must be >= 1");
  if (generation < 0) throw ConfigError("build_plan: negative generation");

  Xoshiro256pp rng(derive_seed(run_seed, stream::kEvaluationPlan,
                               static_cast<std::uint64_t>(generation)));
  EvaluationPlan plan;
  plan.strategy = strategy;
  plan.per_candidate.resize(static_cast<std::size_t>(n_pairs) * 2);

  switch (strategy) {
    case Strategy::naive:
      // Independent draw per candidate: behavior first, then episode seed.
      for (auto& entries : plan.per_candidate) {
        const BehaviorId b = rng.next_bool() ? BehaviorId::b2 : BehaviorId::b1;
        entries.push_back({rng.next_u64(), b});
      }
      break;
    case Strategy::two_episode: {
      // One seed per behavior, drawn once and shared by the generation.
      const std::uint64_t seed_b1 = rng.next_u64();
      const std::uint64_t seed_b2 = rng.next_u64();
      for (auto& entries : plan.per_candidate) {
        entries.push_back({seed_b1, BehaviorId::b1});
        entries.push_back({seed_b2, BehaviorId::b2});
      }
      break;
    }
    case Strategy::paired:
      // One draw per mirrored pair, shared by both members.
      for (int i = 0; i < n_pairs; ++i) {
        const BehaviorId b = rng.next_bool() ? BehaviorId::b2 : BehaviorId::b1;
        const std::uint64_t seed = rng.next_u64();
        plan.per_candidate[static_cast<std::size_t>(2 * i)].push_back(
            {seed, b});
        plan.per_candidate[static_cast<std::size_t>(2 * i) + 1].push_back(
            {seed, b});
      }
      break;
  }
  return plan;
}

namespace {

template <typename Env>
RolloutResult run_episode(Env& env, const ParameterVector& params,
                          const NetworkTopology& topology, BehaviorId behavior,
                          std::uint64_t episode_seed, int max_steps,
                          bool trace) {
  RolloutResult result;
  Observation obs = env.reset(episode_seed);
  apply_cue(obs, behavior);
  std::vector<double> action(Env::kActionSize, 0.0);
  std::vector<double> gate;
  for (int step = 0; step < max_steps; ++step) {
    forward(params, topology, obs, action, trace ? &gate : nullptr);
    if (trace) result.trace.push_back(gate);
    StepOutcome outcome = env.step(action, behavior);
    result.fitness += outcome.reward;
    ++result.steps_used;
    if (outcome.done) break;
    obs = std::move(outcome.observation);
  }
  return result;
}

}  // namespace

RolloutResult rollout(const ParameterVector& params,
                      const NetworkTopology& topology, EnvKind env,
                      BehaviorId behavior, std::uint64_t episode_seed,
                      int max_steps, bool trace) {
  if (max_steps < 1) throw ConfigError("rollout: max_steps must be >= 1");
  if (topology.n_inputs != env_obs_size(env) ||
      topology.n_outputs != env_action_size(env)) {
    throw ConfigError("rollout: topology does not match environment " +
                      std::string(env_name(env)));
  }
  if (env == EnvKind::hopper) {
    HopperEnv e;
    return run_episode(e, params, topology, behavior, episode_seed, max_steps,
                       trace);
  }
  WalkerEnv e;
  return run_episode(e, params, topology, behavior, episode_seed, max_steps,
                     trace);
}

namespace {

GenerationEval evaluate_impl(const ParameterVector& centroid, double sigma,
                             const PerturbationBatch& batch,
                             const EvaluationPlan& plan, EnvKind env,
                             const NetworkTopology& topology, int max_steps,
                             bool parallel) {
  const int n_candidates = batch.n_pairs * 2;
  if (plan.per_candidate.size() != static_cast<std::size_t>(n_candidates)) {
    throw ConfigError("evaluate_generation: plan size does not match batch");
  }
  if (centroid.size() != static_cast<std::size_t>(batch.dim)) {
    throw ConfigError("evaluate_generation: centroid/batch dim mismatch");
  }

  GenerationEval eval;
  eval.fitness.assign(static_cast<std::size_t>(n_candidates), 0.0);
  std::vector<long> steps(static_cast<std::size_t>(n_candidates), 0);
  std::vector<unsigned char> failed(static_cast<std::size_t>(n_candidates), 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (int c = 0; c < n_candidates; ++c) {
    ParameterVector candidate;
    batch.candidate(centroid, sigma, c, candidate);
    double total = 0.0;
    long used = 0;
    bool ok = true;
    for (const PlanEntry& entry : plan.per_candidate[static_cast<std::size_t>(c)]) {
      try {
        const RolloutResult r = rollout(candidate, topology, env,
                                        entry.behavior, entry.episode_seed,
                                        max_steps, /*trace=*/false);
        total += r.fitness;
        used += r.steps_used;
      } catch (const NumericalError&) {
        ok = false;
        break;
      }
    }
    eval.fitness[static_cast<std::size_t>(c)] = total;
    steps[static_cast<std::size_t>(c)] = used;
    failed[static_cast<std::size_t>(c)] = ok ? 0 : 1;
  }

  (void)parallel;

  double min_finite = std::numeric_limits<double>::infinity();
  int n_failed = 0;
  for (int c = 0; c < n_candidates; ++c) {
    if (failed[static_cast<std::size_t>(c)]) {
      ++n_failed;
    } else {
      min_finite = std::min(min_finite, eval.fitness[static_cast<std::size_t>(c)]);
    }
    eval.steps_used += steps[static_cast<std::size_t>(c)];
  }
  if (n_failed == n_candidates) {
    throw NumericalError(
        "evaluate_generation: every candidate failed numerically");
  }
  // Diverged candidates are ranked at the bottom instead of aborting the run.
  for (int c = 0; c < n_candidates; ++c) {
    if (failed[static_cast<std::size_t>(c)]) {
      eval.fitness[static_cast<std::size_t>(c)] = min_finite;
    }
  }
  return eval;
}

}  // namespace

GenerationEval evaluate_generation_serial(const ParameterVector& centroid,
                                          double sigma,
                                          const PerturbationBatch& batch,
                                          const EvaluationPlan& plan,
                                          EnvKind env,
                                          const NetworkTopology& topology,
                                          int max_steps) {
  return evaluate_impl(centroid, sigma, batch, plan, env, topology, max_steps,
                       /*parallel=*/false);
}

GenerationEval evaluate_generation(const ParameterVector& centroid,
                                   double sigma,
                                   const PerturbationBatch& batch,
                                   const EvaluationPlan& plan, EnvKind env,
                                   const NetworkTopology& topology,
                                   int max_steps) {
  return evaluate_impl(centroid, sigma, batch, plan, env, topology, max_steps,
                       /*parallel=*/true);
}

double behavior_gap_from_fitness(double f1, double f2) {
  const double denom = std::max({std::fabs(f1), std::fabs(f2), 1e-9});
  const double gap = std::fabs(f1 - f2) / denom;
  return std::clamp(gap, 0.0, 1.0);
}

double behavior_gap(const ParameterVector& params,
                    const NetworkTopology& topology, EnvKind env,
                    std::uint64_t episode_seed, int max_steps) {
  const double f1 =
      rollout(params, topology, env, BehaviorId::b1, episode_seed, max_steps)
          .fitness;
  const double f2 =
      rollout(params, topology, env, BehaviorId::b2, episode_seed, max_steps)
          .fitness;
  return behavior_gap_from_fitness(f1, f2);
}

SpecializationReport specialization_report(
    const ParameterVector& params, const NetworkTopology& topology,
    EnvKind env, std::span<const std::uint64_t> episode_seeds, int max_steps) {
  if (!topology.gating) {
    throw ConfigError("specialization_report: policy has no gating units");
  }
  if (episode_seeds.empty()) {
    throw ConfigError("specialization_report: need at least one episode seed");
  }
  const int gates = topology.gate_count();
  SpecializationReport report;
  report.mean_gate_b1.assign(static_cast<std::size_t>(gates), 0.0);
  report.mean_gate_b2.assign(static_cast<std::size_t>(gates), 0.0);
  report.index.assign(static_cast<std::size_t>(gates), 0.0);

  long samples_b1 = 0;
  long samples_b2 = 0;
  for (const std::uint64_t seed : episode_seeds) {
    for (const BehaviorId behavior : {BehaviorId::b1, BehaviorId::b2}) {
      const RolloutResult r = rollout(params, topology, env, behavior, seed,
                                      max_steps, /*trace=*/true);
      auto& mean = behavior == BehaviorId::b1 ? report.mean_gate_b1
                                              : report.mean_gate_b2;
      auto& count = behavior == BehaviorId::b1 ? samples_b1 : samples_b2;
      for (const auto& gate_row : r.trace) {
        for (int j = 0; j < gates; ++j) {
          mean[static_cast<std::size_t>(j)] += gate_row[static_cast<std::size_t>(j)];
        }
        ++count;
      }
    }
  }
  double aggregate = 0.0;
  for (int j = 0; j < gates; ++j) {
    auto& m1 = report.mean_gate_b1[static_cast<std::size_t>(j)];
    auto& m2 = report.mean_gate_b2[static_cast<std::size_t>(j)];
    m1 /= static_cast<double>(samples_b1);
    m2 /= static_cast<double>(samples_b2);
    report.index[static_cast<std::size_t>(j)] = std::fabs(m1 - m2);
    aggregate += report.index[static_cast<std::size_t>(j)];
  }
  report.aggregate = aggregate / static_cast<double>(gates);
  return report;
}

namespace {

// Shortest representation that round-trips through strtod.
void append_double(std::string& out, double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

}  // namespace

void write_specialization_csv(const std::filesystem::path& file,
                              const SpecializationReport& report) {
  std::string body = "neuron_index,mean_gate_b1,mean_gate_b2,index\n";
  double sum_b1 = 0.0;
  double sum_b2 = 0.0;
  for (std::size_t j = 0; j < report.index.size(); ++j) {
    body += std::to_string(j);
    body += ',';
    append_double(body, report.mean_gate_b1[j]);
    body += ',';
    append_double(body, report.mean_gate_b2[j]);
    body += ',';
    append_double(body, report.index[j]);
    body += '\n';
    sum_b1 += report.mean_gate_b1[j];
    sum_b2 += report.mean_gate_b2[j];
  }
  const double n = static_cast<double>(report.index.size());
  body += "aggregate,";
  append_double(body, sum_b1 / n);
  body += ',';
  append_double(body, sum_b2 / n);
  body += ',';
  append_double(body, report.aggregate);
  body += '\n';

  std::FILE* f = std::fopen(file.string().c_str(), "wb");
  if (!f) throw IoError("cannot open " + file.string() + " for writing");
  const std::size_t written = std::fwrite(body.data(), 1, body.size(), f);
  const int rc = std::fclose(f);
  if (written != body.size() || rc != 0) {
    throw IoError("short write to " + file.string());
  }
}

}  // namespace neuromod
