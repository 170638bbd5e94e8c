#include "neuromod/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <utility>

#include "neuromod/errors.hpp"
#include "neuromod/rng.hpp"

namespace neuromod {

EnvKind parse_env(const std::string& text) {
  if (text == "hopper") return EnvKind::hopper;
  if (text == "walker") return EnvKind::walker;
  throw ConfigError("unknown env '" + text + "' (expected hopper or walker)");
}

Strategy parse_strategy(const std::string& text) {
  if (text == "naive") return Strategy::naive;
  if (text == "episodes") return Strategy::two_episode;
  if (text == "paired") return Strategy::paired;
  throw ConfigError("unknown strategy '" + text +
                    "' (expected naive, episodes or paired)");
}

bool parse_gating(const std::string& text) {
  if (text == "on") return true;
  if (text == "off") return false;
  throw ConfigError("gating must be 'on' or 'off', got '" + text + "'");
}

BehaviorId parse_behavior(const std::string& text) {
  if (text == "b1") return BehaviorId::b1;
  if (text == "b2") return BehaviorId::b2;
  throw ConfigError("behavior must be 'b1' or 'b2', got '" + text + "'");
}

void RunConfig::validate() const {
  if (hidden < 1) throw ConfigError("hidden must be >= 1");
  if (generations < 1) throw ConfigError("generations must be >= 1");
  if (n_pairs < 1) throw ConfigError("n_pairs must be >= 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  topology().validate();
  es_config(seed).validate();
}

NetworkTopology RunConfig::topology() const {
  NetworkTopology topo;
  topo.n_inputs = env_obs_size(env);
  topo.n_hidden = hidden;
  topo.n_outputs = env_action_size(env);
  topo.gating = gating;
  return topo;
}

EsConfig RunConfig::es_config(std::uint64_t replication_seed) const {
  EsConfig es;
  es.sigma = sigma;
  es.learning_rate = learning_rate;
  es.n_pairs = n_pairs;
  es.weight_decay = weight_decay;
  es.seed = replication_seed;
  return es;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_fail(const std::filesystem::path& file, int line,
                              const std::string& what) {
  throw ConfigError(file.string() + ":" + std::to_string(line) + ": " + what);
}

long parse_count(const std::string& value, const std::filesystem::path& file,
                 int line) {
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    config_fail(file, line, "expected an integer, got '" + value + "'");
  }
  return v;
}

double parse_real(const std::string& value, const std::filesystem::path& file,
                  int line) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    config_fail(file, line, "expected a number, got '" + value + "'");
  }
  return v;
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file " + file.string());
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      config_fail(file, line_no, "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_fail(file, line_no, "empty key");
    if (value.empty()) config_fail(file, line_no, "empty value for '" + key + "'");

    try {
      if (key == "env") {
        cfg.env = parse_env(value);
      } else if (key == "strategy") {
        cfg.strategy = parse_strategy(value);
      } else if (key == "gating") {
        cfg.gating = parse_gating(value);
      } else if (key == "hidden") {
        cfg.hidden = static_cast<int>(parse_count(value, file, line_no));
      } else if (key == "generations") {
        cfg.generations = parse_count(value, file, line_no);
      } else if (key == "n_pairs") {
        cfg.n_pairs = static_cast<int>(parse_count(value, file, line_no));
      } else if (key == "sigma") {
        cfg.sigma = parse_real(value, file, line_no);
      } else if (key == "learning_rate") {
        cfg.learning_rate = parse_real(value, file, line_no);
      } else if (key == "weight_decay") {
        cfg.weight_decay = parse_real(value, file, line_no);
      } else if (key == "max_steps") {
        cfg.max_steps = static_cast<int>(parse_count(value, file, line_no));
      } else if (key == "seed") {
        std::uint64_t v = 0;
        const auto res =
            std::from_chars(value.data(), value.data() + value.size(), v);
        if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
          config_fail(file, line_no, "expected an unsigned integer seed");
        }
        cfg.seed = v;
      } else if (key == "replications") {
        cfg.replications = static_cast<int>(parse_count(value, file, line_no));
      } else if (key == "out_dir") {
        cfg.out_dir = value;
      } else {
        config_fail(file, line_no, "unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      // Re-wrap enum parse failures with the file position.
      const std::string msg = e.what();
      if (msg.find(file.string() + ":") == 0) throw;
      config_fail(file, line_no, msg);
    }
  }
}

namespace {

void append_double(std::string& out, double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

void write_text_file(const std::filesystem::path& file,
                     const std::string& body) {
  std::FILE* f = std::fopen(file.string().c_str(), "wb");
  if (!f) throw IoError("cannot open " + file.string() + " for writing");
  const std::size_t written = std::fwrite(body.data(), 1, body.size(), f);
  const int rc = std::fclose(f);
  if (written != body.size() || rc != 0) {
    throw IoError("short write to " + file.string());
  }
}

constexpr const char* kCurveHeader =
    "generation,eval_steps,fitness_b1,fitness_b2,combined,best_sample";

}  // namespace

ReplicationResult train_replication(const RunConfig& config, int replication,
                                    bool verbose) {
  ReplicationResult result;
  result.replication = replication;

  const std::uint64_t rep_seed =
      config.seed + static_cast<std::uint64_t>(replication);
  const NetworkTopology topo = config.topology();
  const EsConfig es = config.es_config(rep_seed);

  EsState state = EsState::fresh(
      init_params(topo, derive_seed(rep_seed, stream::kInitParams, 0)));

  long cumulative_steps = 0;
  for (long g = 0; g < config.generations; ++g) {
    try {
      const PerturbationBatch batch = sample_pairs(state, es);
      const EvaluationPlan plan =
          build_plan(config.strategy, g, rep_seed, config.n_pairs);
      const GenerationEval eval =
          evaluate_generation(state.centroid, es.sigma, batch, plan,
                              config.env, topo, config.max_steps);
      const std::vector<double> utilities = centered_ranks(eval.fitness);
      const std::vector<double> gradient =
          estimate_update(batch, utilities, es);
      apply_update(state, gradient, es);
      cumulative_steps += eval.steps_used;

      // Curve point: the fresh centroid, one episode per behavior.
      const std::uint64_t curve_seed = derive_seed(
          rep_seed, stream::kCentroidCurve, static_cast<std::uint64_t>(g));
      const double f1 = rollout(state.centroid, topo, config.env,
                                BehaviorId::b1, curve_seed, config.max_steps)
                            .fitness;
      const double f2 = rollout(state.centroid, topo, config.env,
                                BehaviorId::b2, curve_seed, config.max_steps)
                            .fitness;
      CurveRow row;
      row.generation = g;
      row.eval_steps = cumulative_steps;
      row.fitness_b1 = f1;
      row.fitness_b2 = f2;
      row.combined = f1 + f2;
      row.best_sample =
          *std::max_element(eval.fitness.begin(), eval.fitness.end());
      result.curve.push_back(row);

      if (verbose) {
        std::fprintf(stderr, "rep %d gen %ld/%ld combined %.4f gap %.4f\n",
                     replication, g, config.generations, row.combined,
                     behavior_gap_from_fitness(f1, f2));
      }
    } catch (const NumericalError& e) {
      result.aborted = true;
      result.abort_generation = g;
      result.abort_reason = e.what();
      if (verbose) {
        std::fprintf(stderr, "rep %d aborted at gen %ld: %s\n", replication, g,
                     e.what());
      }
      break;
    }
  }
  result.final_params = std::move(state.centroid);
  return result;
}

void write_curve_csv(const std::filesystem::path& file,
                     std::span<const CurveRow> rows, bool aborted,
                     long abort_generation, const std::string& abort_reason) {
  std::string body = kCurveHeader;
  body += '\n';
  for (const CurveRow& row : rows) {
    body += std::to_string(row.generation);
    body += ',';
    body += std::to_string(row.eval_steps);
    body += ',';
    append_double(body, row.fitness_b1);
    body += ',';
    append_double(body, row.fitness_b2);
    body += ',';
    append_double(body, row.combined);
    body += ',';
    append_double(body, row.best_sample);
    body += '\n';
  }
  if (aborted) {
    body += "# aborted at generation ";
    body += std::to_string(abort_generation);
    body += ": ";
    body += abort_reason;
    body += '\n';
  }
  write_text_file(file, body);
}

ExperimentResult run_experiment(const RunConfig& config, bool verbose) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + config.out_dir.string() +
                  ": " + ec.message());
  }

  ExperimentResult result;
  result.replications.resize(static_cast<std::size_t>(config.replications));
  std::vector<std::string> io_failures(
      static_cast<std::size_t>(config.replications));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (config.parallel_replications)
#endif
  for (int r = 0; r < config.replications; ++r) {
    ReplicationResult rep = train_replication(config, r, verbose);
    const auto curve_file =
        config.out_dir / ("fitness_gen_r" + std::to_string(r) + ".csv");
    try {
      write_curve_csv(curve_file, rep.curve, rep.aborted, rep.abort_generation,
                      rep.abort_reason);
      if (!rep.aborted) {
        const auto params_file =
            config.out_dir / ("params_final_r" + std::to_string(r) + ".txt");
        save_params(params_file, rep.final_params);
      }
    } catch (const IoError& e) {
      rep.aborted = true;
      rep.abort_reason = e.what();
      io_failures[static_cast<std::size_t>(r)] = e.what();
      std::fprintf(stderr, "rep %d output failed: %s\n", r, e.what());
    }
    result.replications[static_cast<std::size_t>(r)] = std::move(rep);
  }

  int usable = 0;
  for (const auto& rep : result.replications) {
    if (!rep.aborted) ++usable;
  }
  if (usable == 0) {
    for (const auto& msg : io_failures) {
      if (!msg.empty()) throw IoError("all replications failed; last: " + msg);
    }
    throw NumericalError("all replications aborted; last: " +
                         result.replications.back().abort_reason);
  }
  return result;
}

std::vector<CurveRow> parse_curve_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());

  const auto fail = [&file](int line, const std::string& what) {
    throw IoError(file.string() + ":" + std::to_string(line) + ": " + what);
  };

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) fail(1, "empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCurveHeader) {
    fail(line_no, "bad header, expected '" + std::string(kCurveHeader) + "'");
  }

  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;  // abort marker rows

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 6) {
      fail(line_no, "expected 6 fields, got " + std::to_string(fields.size()));
    }

    const auto to_long = [&](const std::string& s) {
      long v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        fail(line_no, "bad integer '" + s + "'");
      }
      return v;
    };
    const auto to_double = [&](const std::string& s) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(s.c_str(), &end);
      if (errno == ERANGE || end != s.c_str() + s.size() || s.empty()) {
        fail(line_no, "bad number '" + s + "'");
      }
      return v;
    };

    CurveRow row;
    row.generation = to_long(fields[0]);
    row.eval_steps = to_long(fields[1]);
    row.fitness_b1 = to_double(fields[2]);
    row.fitness_b2 = to_double(fields[3]);
    row.combined = to_double(fields[4]);
    row.best_sample = to_double(fields[5]);
    rows.push_back(row);
  }
  return rows;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

SummaryStats compute_summary(std::string label,
                             std::span<const double> finals) {
  if (finals.empty()) throw ConfigError("compute_summary: no values");
  SummaryStats s;
  s.config_label = std::move(label);
  s.n = finals.size();

  std::vector<double> sorted(finals.begin(), finals.end());
  std::sort(sorted.begin(), sorted.end());

  double sum = 0.0;
  for (const double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(s.n);

  double sq = 0.0;
  for (const double v : sorted) sq += (v - s.mean) * (v - s.mean);
  s.std_dev = std::sqrt(sq / static_cast<double>(s.n));

  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  return s;
}

SummaryStats summarize(std::string label,
                       std::span<const std::filesystem::path> curve_files) {
  if (curve_files.empty()) throw ConfigError("summarize: no curve files");
  std::vector<double> finals;
  finals.reserve(curve_files.size());
  for (const auto& file : curve_files) {
    const std::vector<CurveRow> rows = parse_curve_csv(file);
    if (rows.empty()) throw IoError(file.string() + ":1: no data rows");
    finals.push_back(rows.back().combined);
  }
  return compute_summary(std::move(label), finals);
}

void write_summary_csv(const std::filesystem::path& file,
                       std::span<const SummaryStats> rows) {
  std::string body = "config,n,mean,std,min,q1,median,q3,max\n";
  for (const SummaryStats& s : rows) {
    body += s.config_label;
    body += ',';
    body += std::to_string(s.n);
    body += ',';
    append_double(body, s.mean);
    body += ',';
    append_double(body, s.std_dev);
    body += ',';
    append_double(body, s.min);
    body += ',';
    append_double(body, s.q1);
    body += ',';
    append_double(body, s.median);
    body += ',';
    append_double(body, s.q3);
    body += ',';
    append_double(body, s.max);
    body += '\n';
  }
  write_text_file(file, body);
}

namespace {

template <typename Env, typename StateCols>
ReplayResult replay_episode(Env& env, const ParameterVector& params,
                            const NetworkTopology& topology,
                            BehaviorId behavior, std::uint64_t episode_seed,
                            int max_steps, const char* header,
                            StateCols state_cols, std::string& body) {
  ReplayResult result;
  body = header;
  body += '\n';
  Observation obs = env.reset(episode_seed);
  apply_cue(obs, behavior);
  std::vector<double> action(Env::kActionSize, 0.0);
  for (int step = 0; step < max_steps; ++step) {
    forward(params, topology, obs, action);
    StepOutcome outcome = env.step(action, behavior);
    result.fitness += outcome.reward;
    ++result.steps;

    body += std::to_string(step);
    body += ',';
    state_cols(env.state(), body);
    append_double(body, outcome.reward);
    body += ',';
    body += outcome.done ? '1' : '0';
    body += '\n';

    if (outcome.done) break;
    obs = std::move(outcome.observation);
  }
  return result;
}

}  // namespace

ReplayResult replay(const ParameterVector& params,
                    const NetworkTopology& topology, EnvKind env,
                    BehaviorId behavior, std::uint64_t episode_seed,
                    int max_steps,
                    const std::filesystem::path& trajectory_file) {
  if (max_steps < 1) throw ConfigError("replay: max_steps must be >= 1");
  if (topology.n_inputs != env_obs_size(env) ||
      topology.n_outputs != env_action_size(env)) {
    throw ConfigError("replay: topology does not match environment " +
                      std::string(env_name(env)));
  }
  std::string body;
  ReplayResult result;
  if (env == EnvKind::hopper) {
    HopperEnv e;
    result = replay_episode(
        e, params, topology, behavior, episode_seed, max_steps,
        "step,x,h,vh,reward,done",
        [](const HopperState& s, std::string& out) {
          append_double(out, s.x);
          out += ',';
          append_double(out, s.h);
          out += ',';
          append_double(out, s.vh);
          out += ',';
        },
        body);
  } else {
    WalkerEnv e;
    result = replay_episode(
        e, params, topology, behavior, episode_seed, max_steps,
        "step,x,y,yaw,reward,done",
        [](const WalkerState& s, std::string& out) {
          append_double(out, s.x);
          out += ',';
          append_double(out, s.y);
          out += ',';
          append_double(out, s.yaw);
          out += ',';
        },
        body);
  }
  write_text_file(trajectory_file, body);
  return result;
}

}  // namespace neuromod
