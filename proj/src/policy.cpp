#include "neuromod/policy.hpp"

#include <cmath>
#include <string>

#include "neuromod/errors.hpp"

namespace neuromod {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_dims(const ParameterVector& params, const NetworkTopology& topology,
                std::span<const double> obs, std::span<double> action) {
  if (params.size() != param_count(topology))
    throw ConfigError("parameter vector has " + std::to_string(params.size()) +
                      " values, topology needs " +
                      std::to_string(param_count(topology)));
  if (obs.size() != static_cast<std::size_t>(topology.n_inputs))
    throw ConfigError("observation size " + std::to_string(obs.size()) +
                      " != n_inputs " + std::to_string(topology.n_inputs));
  if (action.size() != static_cast<std::size_t>(topology.n_outputs))
    throw ConfigError("action size " + std::to_string(action.size()) +
                      " != n_outputs " + std::to_string(topology.n_outputs));
}

}  // namespace

void forward_standard(const ParameterVector& params,
                      const NetworkTopology& topology,
                      std::span<const double> obs, std::span<double> action) {
  if (topology.gating)
    throw ConfigError("forward_standard called on a gated topology");
  check_dims(params, topology, obs, action);
  const ParamLayout lay = param_layout(topology);
  const int n_in = topology.n_inputs;
  const int n_hid = topology.n_hidden;
  const int n_out = topology.n_outputs;

  std::vector<double> hidden(static_cast<std::size_t>(n_hid));
  const double* w_in = params.data() + lay.w_in;
  const double* b_h = params.data() + lay.b_hidden;
  for (int j = 0; j < n_hid; ++j) {
    double z = b_h[j];
    const double* row = w_in + static_cast<std::size_t>(j) * n_in;
    for (int i = 0; i < n_in; ++i) z += row[i] * obs[i];
    hidden[j] = std::tanh(z);
  }
  const double* w_out = params.data() + lay.w_out;
  const double* b_o = params.data() + lay.b_out;
  for (int k = 0; k < n_out; ++k) {
    double z = b_o[k];
    const double* row = w_out + static_cast<std::size_t>(k) * n_hid;
    for (int j = 0; j < n_hid; ++j) z += row[j] * hidden[j];
    action[k] = std::tanh(z);
  }
}

void forward_gated(const ParameterVector& params,
                   const NetworkTopology& topology,
                   std::span<const double> obs, std::span<double> action,
                   std::vector<double>* gate_out) {
  if (!topology.gating)
    throw ConfigError("forward_gated called on a topology without gating");
  check_dims(params, topology, obs, action);
  const ParamLayout lay = param_layout(topology);
  const int n_in = topology.n_inputs;
  const int n_hid = topology.n_hidden;
  const int n_out = topology.n_outputs;
  const int half = n_hid / 2;

  // Effective hidden vector: tanh half scaled by its gate. The second half
  // is zero by construction, so the output loop only runs over the first
  // half and the gating-half output weights are never read.
  std::vector<double> effective(static_cast<std::size_t>(half));
  std::vector<double> gates(static_cast<std::size_t>(half));
  const double* w_in = params.data() + lay.w_in;
  const double* b_h = params.data() + lay.b_hidden;
  for (int j = 0; j < half; ++j) {
    double zt = b_h[j];
    const double* row_t = w_in + static_cast<std::size_t>(j) * n_in;
    for (int i = 0; i < n_in; ++i) zt += row_t[i] * obs[i];
    double zg = b_h[half + j];
    const double* row_g = w_in + static_cast<std::size_t>(half + j) * n_in;
    for (int i = 0; i < n_in; ++i) zg += row_g[i] * obs[i];
    gates[j] = logistic(zg);
    effective[j] = std::tanh(zt) * gates[j];
  }
  const double* w_out = params.data() + lay.w_out;
  const double* b_o = params.data() + lay.b_out;
  for (int k = 0; k < n_out; ++k) {
    double z = b_o[k];
    const double* row = w_out + static_cast<std::size_t>(k) * n_hid;
    for (int j = 0; j < half; ++j) z += row[j] * effective[j];
    action[k] = std::tanh(z);
  }
  if (gate_out) *gate_out = std::move(gates);
}

void forward(const ParameterVector& params, const NetworkTopology& topology,
             std::span<const double> obs, std::span<double> action,
             std::vector<double>* gate_out) {
  if (topology.gating)
    forward_gated(params, topology, obs, action, gate_out);
  else
    forward_standard(params, topology, obs, action);
}

}  // namespace neuromod
