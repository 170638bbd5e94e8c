#include "neuromod/es.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "neuromod/errors.hpp"
#include "neuromod/rng.hpp"

namespace neuromod {

void EsConfig::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (n_pairs < 1) throw ConfigError("n_pairs must be >= 1");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 ||
      adam_beta2 >= 1.0)
    throw ConfigError("adam betas must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
}

EsState EsState::fresh(ParameterVector initial_centroid) {
  EsState state;
  state.first_moment.assign(initial_centroid.size(), 0.0);
  state.second_moment.assign(initial_centroid.size(), 0.0);
  state.centroid = std::move(initial_centroid);
  return state;
}

void PerturbationBatch::candidate(const ParameterVector& centroid,
                                  double sigma, int j,
                                  ParameterVector& out) const {
  const std::span<const double> eps = epsilon(j / 2);
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  out.resize(dim);
  for (std::size_t d = 0; d < dim; ++d)
    out[d] = centroid[d] + sign * sigma * eps[d];
}

PerturbationBatch sample_pairs(const EsState& state, const EsConfig& config) {
  config.validate();
  PerturbationBatch batch;
  batch.n_pairs = config.n_pairs;
  batch.dim = state.centroid.size();
  batch.epsilons.resize(static_cast<std::size_t>(config.n_pairs) * batch.dim);
  Xoshiro256pp rng(derive_seed(config.seed, stream::kSamplePairs,
                               static_cast<std::uint64_t>(state.generation)));
  for (double& e : batch.epsilons) e = rng.next_gaussian();
  return batch;
}

std::vector<double> centered_ranks(std::span<const double> fitnesses) {
  const std::size_t m = fitnesses.size();
  if (m < 2) throw ConfigError("centered_ranks needs at least 2 values");
  for (double f : fitnesses)
    if (!std::isfinite(f))
      throw NumericalError("non-finite fitness in rank shaping");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fitnesses[a] != fitnesses[b]) return fitnesses[a] < fitnesses[b];
    return a < b;  // ties broken by original index
  });
  std::vector<double> utilities(m);
  const double denom = static_cast<double>(m - 1);
  for (std::size_t rank = 0; rank < m; ++rank)
    utilities[order[rank]] = static_cast<double>(rank) / denom - 0.5;
  return utilities;
}

std::vector<double> estimate_update(const PerturbationBatch& batch,
                                    std::span<const double> utilities,
                                    const EsConfig& config) {
  if (utilities.size() != static_cast<std::size_t>(batch.n_candidates()))
    throw ConfigError("utilities size " + std::to_string(utilities.size()) +
                      " != candidate count " +
                      std::to_string(batch.n_candidates()));
  std::vector<double> gradient(batch.dim, 0.0);
  for (int i = 0; i < batch.n_pairs; ++i) {
    const double weight = utilities[2 * i] - utilities[2 * i + 1];
    if (weight == 0.0) continue;
    const std::span<const double> eps = batch.epsilon(i);
    for (std::size_t d = 0; d < batch.dim; ++d)
      gradient[d] += weight * eps[d];
  }
  const double scale = 1.0 / (static_cast<double>(batch.n_pairs) * config.sigma);
  for (double& g : gradient) g *= scale;
  return gradient;
}

void apply_update(EsState& state, std::span<const double> gradient,
                  const EsConfig& config) {
  if (gradient.size() != state.centroid.size())
    throw ConfigError("gradient size mismatch in apply_update");
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const long t = state.step_count + 1;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t));
  const double decay = 1.0 - config.learning_rate * config.weight_decay;
  for (std::size_t d = 0; d < gradient.size(); ++d) {
    const double g = gradient[d];
    double& m = state.first_moment[d];
    double& v = state.second_moment[d];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    const double next = state.centroid[d] * decay +
                        config.learning_rate * m_hat /
                            (std::sqrt(v_hat) + config.adam_epsilon);
    if (!std::isfinite(next))
      throw NumericalError("non-finite centroid update at component " +
                           std::to_string(d));
    state.centroid[d] = next;
  }
  ++state.step_count;
  ++state.generation;
}

}  // namespace neuromod
