#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neuromod/errors.hpp"
#include "neuromod/experiment.hpp"
#include "neuromod/rng.hpp"

namespace {

using namespace neuromod;

// Shared --config + override flags. String-valued enums are parsed after
// CLI11 so the config file can be applied first.
struct CommonFlags {
  std::string config_file;
  std::string env;
  std::string strategy;
  std::string gating;
  std::uint64_t seed = 0;
  long generations = 0;
  int pairs = 0;
  double sigma = 0.0;
  double lr = 0.0;
  double weight_decay = 0.0;
  int hidden = 0;
  int max_steps = 0;
  int replications = 0;
  std::string out;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "config file (key = value lines)");
  cmd->add_option("--env", f.env, "hopper or walker");
  cmd->add_option("--strategy", f.strategy, "naive, episodes or paired");
  cmd->add_option("--gating", f.gating, "on or off");
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--generations", f.generations, "generations per replication");
  cmd->add_option("--pairs", f.pairs, "mirrored pairs per generation");
  cmd->add_option("--sigma", f.sigma, "perturbation scale");
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--weight-decay", f.weight_decay, "decoupled weight decay");
  cmd->add_option("--hidden", f.hidden, "hidden layer width");
  cmd->add_option("--max-steps", f.max_steps, "episode step limit");
  cmd->add_option("--replications", f.replications, "independent runs");
  cmd->add_option("--out", f.out, "output directory");
}

RunConfig resolve_config(const CLI::App* cmd, const CommonFlags& f) {
  RunConfig cfg;
  if (cmd->count("--config")) apply_config_file(cfg, f.config_file);
  if (cmd->count("--env")) cfg.env = parse_env(f.env);
  if (cmd->count("--strategy")) cfg.strategy = parse_strategy(f.strategy);
  if (cmd->count("--gating")) cfg.gating = parse_gating(f.gating);
  if (cmd->count("--seed")) cfg.seed = f.seed;
  if (cmd->count("--generations")) cfg.generations = f.generations;
  if (cmd->count("--pairs")) cfg.n_pairs = f.pairs;
  if (cmd->count("--sigma")) cfg.sigma = f.sigma;
  if (cmd->count("--lr")) cfg.learning_rate = f.lr;
  if (cmd->count("--weight-decay")) cfg.weight_decay = f.weight_decay;
  if (cmd->count("--hidden")) cfg.hidden = f.hidden;
  if (cmd->count("--max-steps")) cfg.max_steps = f.max_steps;
  if (cmd->count("--replications")) cfg.replications = f.replications;
  if (cmd->count("--out")) cfg.out_dir = f.out;
  return cfg;
}

ParameterVector load_checked_params(const std::string& file,
                                    const NetworkTopology& topo) {
  ParameterVector params = load_params(file);
  const std::size_t expected = param_count(topo);
  if (params.size() != expected) {
    throw ConfigError(file + " holds " + std::to_string(params.size()) +
                      " parameters but the requested topology needs " +
                      std::to_string(expected) +
                      " (check --env, --hidden, --gating)");
  }
  return params;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuromod: gated-policy neuroevolution on surrogate tasks"};
  app.require_subcommand(1);

  CommonFlags train_f, sum_f, replay_f, spec_f;

  CLI::App* train = app.add_subcommand("train", "run a replicated experiment");
  add_common_flags(train, train_f);
  bool parallel_reps = false;
  bool quiet = false;
  train->add_flag("--parallel-replications", parallel_reps,
                  "run replications concurrently");
  train->add_flag("--quiet", quiet, "suppress per-generation progress");

  CLI::App* sum = app.add_subcommand("summarize",
                                     "final-fitness statistics of curve files");
  add_common_flags(sum, sum_f);
  std::string sum_label = "default";
  std::vector<std::string> sum_files;
  sum->add_option("--label", sum_label, "config column value");
  sum->add_option("files", sum_files, "fitness_gen_r<r>.csv files")
      ->required();

  CLI::App* rep = app.add_subcommand("replay", "roll out a saved policy");
  add_common_flags(rep, replay_f);
  std::string rep_params;
  std::string rep_behavior = "b1";
  rep->add_option("--params", rep_params, "parameter file")->required();
  rep->add_option("--behavior", rep_behavior, "b1 or b2");

  CLI::App* spec = app.add_subcommand(
      "specialization", "per-gate behavior specialization of a saved policy");
  add_common_flags(spec, spec_f);
  std::string spec_params;
  int spec_episodes = 3;
  spec->add_option("--params", spec_params, "parameter file")->required();
  spec->add_option("--episodes", spec_episodes, "episodes per behavior");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // bad usage is a config error
  }

  try {
    if (train->parsed()) {
      RunConfig cfg = resolve_config(train, train_f);
      cfg.parallel_replications = parallel_reps;
      const ExperimentResult result = run_experiment(cfg, !quiet);
      int aborted = 0;
      for (const auto& r : result.replications) aborted += r.aborted ? 1 : 0;
      std::printf("wrote %d replication(s) to %s (%d aborted)\n",
                  cfg.replications, cfg.out_dir.string().c_str(), aborted);
    } else if (sum->parsed()) {
      RunConfig cfg = resolve_config(sum, sum_f);
      std::vector<std::filesystem::path> files(sum_files.begin(),
                                               sum_files.end());
      const SummaryStats stats = summarize(sum_label, files);
      std::error_code ec;
      std::filesystem::create_directories(cfg.out_dir, ec);
      if (ec) {
        throw IoError("cannot create " + cfg.out_dir.string() + ": " +
                      ec.message());
      }
      const auto out_file = cfg.out_dir / "summary.csv";
      write_summary_csv(out_file, {&stats, 1});
      std::printf("%s: n=%zu mean=%.6f std=%.6f -> %s\n",
                  stats.config_label.c_str(), stats.n, stats.mean,
                  stats.std_dev, out_file.string().c_str());
    } else if (rep->parsed()) {
      RunConfig cfg = resolve_config(rep, replay_f);
      const NetworkTopology topo = cfg.topology();
      topo.validate();
      const ParameterVector params = load_checked_params(rep_params, topo);
      const BehaviorId behavior = parse_behavior(rep_behavior);
      std::error_code ec;
      std::filesystem::create_directories(cfg.out_dir, ec);
      if (ec) {
        throw IoError("cannot create " + cfg.out_dir.string() + ": " +
                      ec.message());
      }
      const auto traj_file =
          cfg.out_dir / ("trajectory_" + rep_behavior + ".csv");
      const ReplayResult result =
          replay(params, topo, cfg.env, behavior, cfg.seed, cfg.max_steps,
                 traj_file);
      std::printf("fitness %.6f over %d steps -> %s\n", result.fitness,
                  result.steps, traj_file.string().c_str());
    } else if (spec->parsed()) {
      RunConfig cfg = resolve_config(spec, spec_f);
      if (!cfg.gating) {
        throw ConfigError("specialization requires a gated policy");
      }
      const NetworkTopology topo = cfg.topology();
      topo.validate();
      const ParameterVector params = load_checked_params(spec_params, topo);
      if (spec_episodes < 1) {
        throw ConfigError("--episodes must be >= 1");
      }
      std::vector<std::uint64_t> seeds;
      seeds.reserve(static_cast<std::size_t>(spec_episodes));
      for (int i = 0; i < spec_episodes; ++i) {
        seeds.push_back(derive_seed(cfg.seed, stream::kAnalysis,
                                    static_cast<std::uint64_t>(i)));
      }
      const SpecializationReport report = specialization_report(
          params, topo, cfg.env, seeds, cfg.max_steps);
      std::error_code ec;
      std::filesystem::create_directories(cfg.out_dir, ec);
      if (ec) {
        throw IoError("cannot create " + cfg.out_dir.string() + ": " +
                      ec.message());
      }
      const auto out_file = cfg.out_dir / "specialization.csv";
      write_specialization_csv(out_file, report);
      std::printf("aggregate specialization %.6f -> %s\n", report.aggregate,
                  out_file.string().c_str());
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  }
  return 0;
}
