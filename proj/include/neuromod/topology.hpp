#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace neuromod {

// Flat genome of a policy network. Layout (row-major):
//   input->hidden weights   n_hidden x n_inputs
//   hidden biases           n_hidden
//   hidden->output weights  n_outputs x n_hidden
//   output biases           n_outputs
using ParameterVector = std::vector<double>;

// Shape of a one-hidden-layer feedforward policy. With gating enabled the
// hidden layer is split in two equal halves: the first half drives the
// outputs through tanh units, the second half produces multiplicative
// logistic gates for the first half and contributes nothing to the outputs
// directly (its output weights stay in the genome but are never read).
struct NetworkTopology {
  int n_inputs = 0;
  int n_hidden = 0;
  int n_outputs = 0;
  bool gating = false;

  // Number of gate units (half the hidden layer when gating is on).
  int gate_count() const { return gating ? n_hidden / 2 : 0; }

  bool operator==(const NetworkTopology&) const = default;

  // Throws ConfigError when sizes are out of range or gating is requested
  // with an odd hidden layer.
  void validate() const;
};

std::size_t param_count(const NetworkTopology& topology);

// Offsets of the layout sections inside a ParameterVector.
struct ParamLayout {
  std::size_t w_in;      // n_hidden * n_inputs values
  std::size_t b_hidden;  // n_hidden values
  std::size_t w_out;     // n_outputs * n_hidden values
  std::size_t b_out;     // n_outputs values
  std::size_t total;
};

ParamLayout param_layout(const NetworkTopology& topology);

// Gaussian weights with per-layer std dev 1/sqrt(fan_in), zero biases.
// Deterministic for a given seed.
ParameterVector init_params(const NetworkTopology& topology,
                            std::uint64_t seed);

// Plain-text parameter file:
//   line 1: "neuromod-params v1 <dim>"
//   then <dim> lines, one value per line in round-trip-exact scientific
//   notation.
void save_params(const std::filesystem::path& file,
                 const ParameterVector& params);
ParameterVector load_params(const std::filesystem::path& file);

}  // namespace neuromod
