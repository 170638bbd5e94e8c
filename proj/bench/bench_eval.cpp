// Times one generation of candidate evaluation, serial reference vs the
// OpenMP path, and checks they produce identical fitness vectors.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "neuromod/evaluation.hpp"
#include "neuromod/experiment.hpp"
#include "neuromod/rng.hpp"

using namespace neuromod;

namespace {

double time_ms(auto&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  EnvKind env = EnvKind::hopper;
  int n_pairs = 40;
  int hidden = 16;
  int max_steps = 500;
  int repeats = 3;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--env") && i + 1 < argc) {
      env = parse_env(argv[++i]);
    } else if (!std::strcmp(argv[i], "--pairs") && i + 1 < argc) {
      n_pairs = std::atoi(argv[++i]);
    } else if (!std::strcmp(argv[i], "--hidden") && i + 1 < argc) {
      hidden = std::atoi(argv[++i]);
    } else if (!std::strcmp(argv[i], "--max-steps") && i + 1 < argc) {
      max_steps = std::atoi(argv[++i]);
    } else if (!std::strcmp(argv[i], "--repeats") && i + 1 < argc) {
      repeats = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr,
                   "usage: %s [--env hopper|walker] [--pairs N] [--hidden N] "
                   "[--max-steps N] [--repeats N]\n",
                   argv[0]);
      return 1;
    }
  }

  NetworkTopology topo;
  topo.n_inputs = env_obs_size(env);
  topo.n_hidden = hidden;
  topo.n_outputs = env_action_size(env);
  topo.gating = true;
  topo.validate();

  EsConfig es;
  es.n_pairs = n_pairs;
  es.seed = 42;
  EsState state = EsState::fresh(init_params(topo, 42));
  const PerturbationBatch batch = sample_pairs(state, es);
  const EvaluationPlan plan = build_plan(Strategy::paired, 0, es.seed, n_pairs);

#ifdef _OPENMP
  std::printf("openmp on, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp off (serial build)\n");
#endif
  std::printf("env %s, %d candidates, hidden %d, max %d steps\n",
              env_name(env), batch.n_candidates(), hidden, max_steps);

  GenerationEval serial, parallel;
  double best_serial = 1e30;
  double best_parallel = 1e30;
  for (int rep = 0; rep < repeats; ++rep) {
    const double ms_s = time_ms([&] {
      serial = evaluate_generation_serial(state.centroid, es.sigma, batch,
                                          plan, env, topo, max_steps);
    });
    const double ms_p = time_ms([&] {
      parallel = evaluate_generation(state.centroid, es.sigma, batch, plan,
                                     env, topo, max_steps);
    });
    best_serial = std::min(best_serial, ms_s);
    best_parallel = std::min(best_parallel, ms_p);
    std::printf("  repeat %d: serial %.1f ms, parallel %.1f ms\n", rep, ms_s,
                ms_p);
  }

  if (serial.fitness != parallel.fitness ||
      serial.steps_used != parallel.steps_used) {
    std::printf("MISMATCH between serial and parallel results\n");
    return 1;
  }
  std::printf("results identical; best serial %.1f ms, best parallel %.1f ms, "
              "speedup %.2fx\n",
              best_serial, best_parallel, best_serial / best_parallel);
  return 0;
}
