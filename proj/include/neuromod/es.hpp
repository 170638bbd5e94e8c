#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neuromod/topology.hpp"

namespace neuromod {

// OpenAI-style evolution strategy: mirrored Gaussian perturbations around a
// centroid, centered-rank fitness shaping, adaptive-moment ascent.
struct EsConfig {
  double sigma = 0.05;
  double learning_rate = 0.01;
  int n_pairs = 20;
  double weight_decay = 0.005;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EsState {
  ParameterVector centroid;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step_count = 0;
  long generation = 0;

  static EsState fresh(ParameterVector initial_centroid);
};

// One generation of mirrored perturbations: n_pairs standard-normal vectors,
// each yielding candidates centroid + sigma*eps and centroid - sigma*eps.
// Candidate 2i is the plus member of pair i, candidate 2i+1 the minus one.
struct PerturbationBatch {
  int n_pairs = 0;
  std::size_t dim = 0;
  std::vector<double> epsilons;  // n_pairs x dim, row-major

  int n_candidates() const { return 2 * n_pairs; }

  std::span<const double> epsilon(int pair) const {
    return {epsilons.data() + static_cast<std::size_t>(pair) * dim, dim};
  }

  // Materializes candidate j (0 <= j < 2*n_pairs) into out.
  void candidate(const ParameterVector& centroid, double sigma, int j,
                 ParameterVector& out) const;
};

// Deterministic given (config.seed, state.generation); epsilons come from
// xoshiro256++ seeded per generation, normals via Box-Muller.
PerturbationBatch sample_pairs(const EsState& state, const EsConfig& config);

// Centered-rank utilities: ascending stable sort (ties by input index), rank
// k of m maps to k/(m-1) - 0.5; returned in input order, summing to zero.
std::vector<double> centered_ranks(std::span<const double> fitnesses);

// g = (1/(n_pairs*sigma)) * sum_i (u_plus_i - u_minus_i) * eps_i, with the
// utilities in candidate order. An ascent direction on shaped fitness.
std::vector<double> estimate_update(const PerturbationBatch& batch,
                                    std::span<const double> utilities,
                                    const EsConfig& config);

// Adam-style ascent step with decoupled weight decay on the centroid;
// increments step_count and generation. Throws NumericalError if the update
// is non-finite.
void apply_update(EsState& state, std::span<const double> gradient,
                  const EsConfig& config);

}  // namespace neuromod
