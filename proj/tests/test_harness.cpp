#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "neuromod/errors.hpp"
#include "neuromod/experiment.hpp"
#include "neuromod/rng.hpp"

using namespace neuromod;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny_config(const fs::path& out) {
  RunConfig cfg;
  cfg.env = EnvKind::walker;
  cfg.strategy = Strategy::paired;
  cfg.gating = true;
  cfg.hidden = 4;
  cfg.generations = 2;
  cfg.n_pairs = 2;
  cfg.max_steps = 20;
  cfg.seed = 5;
  cfg.replications = 1;
  cfg.out_dir = out;
  return cfg;
}

}  // namespace

TEST_CASE("run config validation") {
  RunConfig cfg = tiny_config("unused");
  CHECK_NOTHROW(cfg.validate());
  RunConfig bad = cfg;
  bad.hidden = 5;  // odd with gating on
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.generations = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.replications = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.sigma = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("enum parsing") {
  CHECK(parse_env("hopper") == EnvKind::hopper);
  CHECK(parse_env("walker") == EnvKind::walker);
  CHECK_THROWS_AS(parse_env("antelope"), ConfigError);
  CHECK(parse_strategy("naive") == Strategy::naive);
  CHECK(parse_strategy("episodes") == Strategy::two_episode);
  CHECK(parse_strategy("paired") == Strategy::paired);
  CHECK_THROWS_AS(parse_strategy(""), ConfigError);
  CHECK(parse_gating("on"));
  CHECK(!parse_gating("off"));
  CHECK_THROWS_AS(parse_gating("maybe"), ConfigError);
  CHECK(parse_behavior("b1") == BehaviorId::b1);
  CHECK(parse_behavior("b2") == BehaviorId::b2);
  CHECK_THROWS_AS(parse_behavior("b3"), ConfigError);
}

TEST_CASE("config files apply every key and tolerate comments") {
  const fs::path dir = fresh_dir("nm_cfg");
  const fs::path file = dir / "run.cfg";
  std::ofstream(file) << "# experiment setup\n"
                         "env = walker\n"
                         "strategy = episodes   # overridden later by flags\n"
                         "gating = off\n"
                         "hidden = 24\n"
                         "\n"
                         "generations = 12\n"
                         "n_pairs = 9\n"
                         "sigma = 0.125\n"
                         "learning_rate = 0.02\n"
                         "weight_decay = 0\n"
                         "max_steps = 77\n"
                         "seed = 12345678901234567890\n"
                         "replications = 3\n"
                         "out_dir = results/run1\n";
  RunConfig cfg;
  apply_config_file(cfg, file);
  CHECK(cfg.env == EnvKind::walker);
  CHECK(cfg.strategy == Strategy::two_episode);
  CHECK(!cfg.gating);
  CHECK(cfg.hidden == 24);
  CHECK(cfg.generations == 12);
  CHECK(cfg.n_pairs == 9);
  CHECK(cfg.sigma == 0.125);
  CHECK(cfg.learning_rate == 0.02);
  CHECK(cfg.weight_decay == 0.0);
  CHECK(cfg.max_steps == 77);
  CHECK(cfg.seed == 12345678901234567890ULL);
  CHECK(cfg.replications == 3);
  CHECK(cfg.out_dir == fs::path("results/run1"));
  fs::remove_all(dir);
}

TEST_CASE("config file errors name the file and line") {
  const fs::path dir = fresh_dir("nm_cfg_bad");
  const fs::path file = dir / "bad.cfg";

  const auto expect_error = [&](const std::string& content,
                                const std::string& needle) {
    std::ofstream(file) << content;
    RunConfig cfg;
    try {
      apply_config_file(cfg, file);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(file.string()) != std::string::npos);
      CHECK(msg.find(needle) != std::string::npos);
    }
  };

  expect_error("env = hopper\nwhat is this\n", ":2:");
  expect_error("mystery = 4\n", "unknown key");
  expect_error("hidden = twelve\n", "integer");
  expect_error("sigma =\n", "empty value");
  expect_error("env = plains\n", "unknown env");

  RunConfig cfg;
  CHECK_THROWS_AS(apply_config_file(cfg, dir / "absent.cfg"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("minimal experiment produces one data row per generation") {
  const fs::path dir = fresh_dir("nm_exp_min");
  RunConfig cfg = tiny_config(dir);
  cfg.generations = 1;
  cfg.n_pairs = 1;
  run_experiment(cfg, false);

  const std::string csv = slurp(dir / "fitness_gen_r0.csv");
  CHECK(csv.substr(0, csv.find('\n')) ==
        "generation,eval_steps,fitness_b1,fitness_b2,combined,best_sample");
  int lines = 0;
  for (char c : csv) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 2);  // header + exactly one data row
  fs::remove_all(dir);
}

TEST_CASE("experiment writes one curve and one parameter file per replication") {
  const fs::path dir = fresh_dir("nm_exp_reps");
  RunConfig cfg = tiny_config(dir);
  cfg.replications = 3;
  const ExperimentResult result = run_experiment(cfg, false);
  CHECK(result.replications.size() == 3);
  for (int r = 0; r < 3; ++r) {
    CHECK(fs::exists(dir / ("fitness_gen_r" + std::to_string(r) + ".csv")));
    CHECK(fs::exists(dir / ("params_final_r" + std::to_string(r) + ".txt")));
  }
  CHECK(!fs::exists(dir / "fitness_gen_r3.csv"));

  // distinct seeds produce distinct outcomes
  CHECK(slurp(dir / "fitness_gen_r0.csv") != slurp(dir / "fitness_gen_r1.csv"));
  fs::remove_all(dir);
}

TEST_CASE("same configuration twice gives byte-identical outputs") {
  const fs::path dir_a = fresh_dir("nm_exp_det_a");
  const fs::path dir_b = fresh_dir("nm_exp_det_b");
  RunConfig cfg = tiny_config(dir_a);
  run_experiment(cfg, false);
  cfg.out_dir = dir_b;
  run_experiment(cfg, false);
  CHECK(slurp(dir_a / "fitness_gen_r0.csv") ==
        slurp(dir_b / "fitness_gen_r0.csv"));
  CHECK(slurp(dir_a / "params_final_r0.txt") ==
        slurp(dir_b / "params_final_r0.txt"));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("walker step accounting is exact") {
  // The walker never stops early, so the cumulative evaluation steps are
  // exactly candidates x episodes x max_steps per generation.
  const fs::path dir = fresh_dir("nm_exp_steps");
  RunConfig cfg = tiny_config(dir);
  cfg.strategy = Strategy::two_episode;
  run_experiment(cfg, false);
  const std::vector<CurveRow> rows = parse_curve_csv(dir / "fitness_gen_r0.csv");
  REQUIRE(rows.size() == 2);
  const long per_gen = 2L * cfg.n_pairs * 2 * cfg.max_steps;
  CHECK(rows[0].generation == 0);
  CHECK(rows[1].generation == 1);
  CHECK(rows[0].eval_steps == per_gen);
  CHECK(rows[1].eval_steps == 2 * per_gen);
  CHECK(rows[0].combined == rows[0].fitness_b1 + rows[0].fitness_b2);
  fs::remove_all(dir);
}

TEST_CASE("curve files round-trip byte-identically") {
  const fs::path dir = fresh_dir("nm_curve_rt");
  const fs::path file = dir / "curve.csv";
  std::vector<CurveRow> rows(3);
  rows[0] = {0, 100, 1.0 / 3.0, -2.5e-17, 1.0 / 3.0 - 2.5e-17, 7.75};
  rows[1] = {1, 250, 123456.789012345, 0.1, 123456.889012345, -0.0};
  rows[2] = {2, 251, -1e300, 1e-300, -1e300, 3.141592653589793};
  write_curve_csv(file, rows);

  const std::vector<CurveRow> parsed = parse_curve_csv(file);
  REQUIRE(parsed.size() == rows.size());
  const fs::path file2 = dir / "curve2.csv";
  write_curve_csv(file2, parsed);
  CHECK(slurp(file) == slurp(file2));
  fs::remove_all(dir);
}

TEST_CASE("curve parser names the offending file and line") {
  const fs::path dir = fresh_dir("nm_curve_bad");
  const fs::path file = dir / "bad.csv";

  const auto expect_error = [&](const std::string& content,
                                const std::string& needle) {
    std::ofstream(file, std::ios::binary) << content;
    try {
      parse_curve_csv(file);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(file.string()) != std::string::npos);
      CHECK(msg.find(needle) != std::string::npos);
    }
  };

  expect_error("wrong,header\n", ":1:");
  expect_error(
      "generation,eval_steps,fitness_b1,fitness_b2,combined,best_sample\n"
      "0,10,1.0,2.0,3.0\n",
      ":2:");
  expect_error(
      "generation,eval_steps,fitness_b1,fitness_b2,combined,best_sample\n"
      "0,10,1.0,2.0,3.0,oops\n",
      "bad number");
  CHECK_THROWS_AS(parse_curve_csv(dir / "absent.csv"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("summary statistics on known values") {
  const double finals[] = {10.0, 20.0, 30.0};
  const SummaryStats s = compute_summary("demo", finals);
  CHECK(s.n == 3);
  CHECK(s.mean == doctest::Approx(20.0));
  CHECK(s.std_dev == doctest::Approx(8.164965809277260));
  CHECK(s.min == 10.0);
  CHECK(s.q1 == doctest::Approx(15.0));
  CHECK(s.median == doctest::Approx(20.0));
  CHECK(s.q3 == doctest::Approx(25.0));
  CHECK(s.max == 30.0);

  const double single[] = {1137.19};
  const SummaryStats one = compute_summary("single", single);
  CHECK(one.mean == 1137.19);
  CHECK(one.std_dev == 0.0);
  CHECK(one.q1 == 1137.19);
  CHECK(one.q3 == 1137.19);
}

TEST_CASE("summarize reads the final combined fitness of each curve") {
  const fs::path dir = fresh_dir("nm_summarize");
  std::vector<fs::path> files;
  const double finals[] = {10.0, 20.0, 30.0};
  for (int i = 0; i < 3; ++i) {
    std::vector<CurveRow> rows(2);
    rows[0] = {0, 100, 0.0, 0.0, -5.0, 0.0};
    rows[1] = {1, 200, finals[i] / 2, finals[i] / 2, finals[i], 0.0};
    const fs::path f = dir / ("c" + std::to_string(i) + ".csv");
    write_curve_csv(f, rows);
    files.push_back(f);
  }
  const SummaryStats s = summarize("cfg", files);
  CHECK(s.n == 3);
  CHECK(s.mean == doctest::Approx(20.0));
  CHECK(s.std_dev == doctest::Approx(8.164965809277260));

  const fs::path out = dir / "summary.csv";
  write_summary_csv(out, {&s, 1});
  const std::string body = slurp(out);
  CHECK(body.substr(0, body.find('\n')) ==
        "config,n,mean,std,min,q1,median,q3,max");
  CHECK(body.find("cfg,3,20,") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("replay dumps a deterministic trajectory") {
  const fs::path dir = fresh_dir("nm_replay");
  NetworkTopology topo;
  topo.n_inputs = 17;
  topo.n_hidden = 4;
  topo.n_outputs = 3;
  topo.gating = false;
  const ParameterVector params(param_count(topo), 0.0);

  const fs::path traj = dir / "traj.csv";
  const ReplayResult res = replay(params, topo, EnvKind::hopper,
                                  BehaviorId::b1, 0, 500, traj);
  CHECK(res.fitness == 0.0);
  CHECK(res.steps == 51);

  const std::string body = slurp(traj);
  CHECK(body.substr(0, body.find('\n')) == "step,x,h,vh,reward,done");
  int lines = 0;
  for (char c : body) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 52);  // header + one row per step
  CHECK(body.find("\n50,0,0,0,0,1\n") != std::string::npos);  // final row

  const fs::path traj2 = dir / "traj2.csv";
  replay(params, topo, EnvKind::hopper, BehaviorId::b1, 0, 500, traj2);
  CHECK(slurp(traj) == slurp(traj2));
  fs::remove_all(dir);
}

TEST_CASE("replay fitness equals rollout fitness") {
  const fs::path dir = fresh_dir("nm_replay_eq");
  NetworkTopology topo;
  topo.n_inputs = 30;
  topo.n_hidden = 6;
  topo.n_outputs = 8;
  topo.gating = true;
  const ParameterVector params = init_params(topo, 77);
  const ReplayResult rep = replay(params, topo, EnvKind::walker,
                                  BehaviorId::b2, 9, 120, dir / "t.csv");
  const RolloutResult roll =
      rollout(params, topo, EnvKind::walker, BehaviorId::b2, 9, 120);
  CHECK(rep.fitness == roll.fitness);
  CHECK(rep.steps == roll.steps_used);
  fs::remove_all(dir);
}

TEST_CASE("cue-conditioned policy replays differently under the two cues") {
  // Hand-built gated walker net: the single active gate reads only the cue
  // slots, so the policy turns under B1 and drives straight under B2.
  const fs::path dir = fresh_dir("nm_replay_cues");
  NetworkTopology topo;
  topo.n_inputs = 30;
  topo.n_hidden = 4;
  topo.n_outputs = 8;
  topo.gating = true;
  const ParamLayout lay = param_layout(topo);
  ParameterVector params(param_count(topo), 0.0);
  params[lay.b_hidden + 0] = 1.0;  // tanh unit 0 always active
  // its gate (hidden row 2) saturates open under B1, closed under B2
  params[lay.w_in + 2 * 30 + 28] = 100.0;
  params[lay.w_in + 2 * 30 + 29] = -100.0;
  // thrust outputs always on; turn outputs driven by the gated unit
  for (int k = 0; k < 4; ++k) {
    params[lay.b_out + static_cast<std::size_t>(k)] = 2.0;
  }
  for (int k = 4; k < 8; ++k) {
    params[lay.w_out + static_cast<std::size_t>(k) * 4 + 0] = 3.0;
  }

  const ReplayResult r1 = replay(params, topo, EnvKind::walker, BehaviorId::b1,
                                 3, 200, dir / "b1.csv");
  const ReplayResult r2 = replay(params, topo, EnvKind::walker, BehaviorId::b2,
                                 3, 200, dir / "b2.csv");
  CHECK(slurp(dir / "b1.csv") != slurp(dir / "b2.csv"));
  CHECK(r1.fitness != r2.fitness);
  CHECK(r1.fitness > 0.0);
  CHECK(r2.fitness > 0.0);
  fs::remove_all(dir);
}

TEST_CASE("seed derivation separates streams and indices") {
  CHECK(derive_seed(1, stream::kSamplePairs, 0) !=
        derive_seed(1, stream::kSamplePairs, 1));
  CHECK(derive_seed(1, stream::kSamplePairs, 0) !=
        derive_seed(1, stream::kEvaluationPlan, 0));
  CHECK(derive_seed(1, stream::kSamplePairs, 0) !=
        derive_seed(2, stream::kSamplePairs, 0));
  CHECK(derive_seed(1, stream::kSamplePairs, 7) ==
        derive_seed(1, stream::kSamplePairs, 7));
}
