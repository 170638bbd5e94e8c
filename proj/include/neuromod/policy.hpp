#pragma once

#include <span>
#include <vector>

#include "neuromod/topology.hpp"

namespace neuromod {

// Per-step gate activations of a gated policy, one vector of n_hidden/2
// values in [0,1] per recorded step. Empty when gating is off.
using GateTrace = std::vector<std::vector<double>>;

// h = tanh(W_in * obs + b_h); action = tanh(W_out * h + b_out).
// Requires topology.gating == false and obs.size() == n_inputs.
void forward_standard(const ParameterVector& params,
                      const NetworkTopology& topology,
                      std::span<const double> obs, std::span<double> action);

// Neuro-regulated forward pass. The hidden pre-activations z are split in
// two halves: t = tanh(z[0..K)), g = logistic(z[K..H)). The effective hidden
// vector is t*g on the first half and exactly 0 on the second, so the
// gating-half output weights never influence the action. When gate_out is
// non-null the gate vector g is stored there.
// Requires topology.gating == true and obs.size() == n_inputs.
void forward_gated(const ParameterVector& params,
                   const NetworkTopology& topology,
                   std::span<const double> obs, std::span<double> action,
                   std::vector<double>* gate_out = nullptr);

// Dispatches on topology.gating.
void forward(const ParameterVector& params, const NetworkTopology& topology,
             std::span<const double> obs, std::span<double> action,
             std::vector<double>* gate_out = nullptr);

}  // namespace neuromod
