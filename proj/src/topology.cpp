#include "neuromod/topology.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "neuromod/errors.hpp"
#include "neuromod/rng.hpp"

namespace neuromod {

void NetworkTopology::validate() const {
  if (n_inputs < 1 || n_hidden < 2 || n_outputs < 1)
    throw ConfigError("topology out of range: need n_inputs >= 1, "
                      "n_hidden >= 2, n_outputs >= 1");
  if (gating && n_hidden % 2 != 0)
    throw ConfigError("gating requires an even hidden layer, got " +
                      std::to_string(n_hidden));
}

std::size_t param_count(const NetworkTopology& topology) {
  topology.validate();
  const std::size_t in = static_cast<std::size_t>(topology.n_inputs);
  const std::size_t hid = static_cast<std::size_t>(topology.n_hidden);
  const std::size_t out = static_cast<std::size_t>(topology.n_outputs);
  // The gating-half output weights are counted even though the forward pass
  // never reads them; they exist in the genome.
  return hid * in + hid + out * hid + out;
}

ParamLayout param_layout(const NetworkTopology& topology) {
  topology.validate();
  const std::size_t in = static_cast<std::size_t>(topology.n_inputs);
  const std::size_t hid = static_cast<std::size_t>(topology.n_hidden);
  const std::size_t out = static_cast<std::size_t>(topology.n_outputs);
  ParamLayout layout{};
  layout.w_in = 0;
  layout.b_hidden = hid * in;
  layout.w_out = layout.b_hidden + hid;
  layout.b_out = layout.w_out + out * hid;
  layout.total = layout.b_out + out;
  return layout;
}

ParameterVector init_params(const NetworkTopology& topology,
                            std::uint64_t seed) {
  const ParamLayout layout = param_layout(topology);
  ParameterVector params(layout.total, 0.0);
  Xoshiro256pp rng(seed);
  const double sd_in = 1.0 / std::sqrt(static_cast<double>(topology.n_inputs));
  for (std::size_t i = layout.w_in; i < layout.b_hidden; ++i)
    params[i] = rng.next_gaussian() * sd_in;
  // hidden biases stay 0
  const double sd_out = 1.0 / std::sqrt(static_cast<double>(topology.n_hidden));
  for (std::size_t i = layout.w_out; i < layout.b_out; ++i)
    params[i] = rng.next_gaussian() * sd_out;
  // output biases stay 0
  return params;
}

void save_params(const std::filesystem::path& file,
                 const ParameterVector& params) {
  std::FILE* fp = std::fopen(file.string().c_str(), "w");
  if (!fp) throw IoError("cannot open " + file.string() + " for writing");
  std::fprintf(fp, "neuromod-params v1 %zu\n", params.size());
  char buf[64];
  for (double v : params) {
    auto res = std::to_chars(buf, buf + sizeof(buf) - 1, v,
                             std::chars_format::scientific);
    *res.ptr = '\0';
    std::fprintf(fp, "%s\n", buf);
  }
  if (std::fclose(fp) != 0)
    throw IoError("write failure on " + file.string());
}

ParameterVector load_params(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::string header;
  if (!std::getline(in, header))
    throw IoError(file.string() + ": empty parameter file");
  std::size_t dim = 0;
  if (std::sscanf(header.c_str(), "neuromod-params v1 %zu", &dim) != 1)
    throw IoError(file.string() + ": bad header \"" + header + "\"");
  ParameterVector params;
  params.reserve(dim);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || errno == ERANGE)
      throw IoError(file.string() + ": bad value \"" + line + "\" at line " +
                    std::to_string(params.size() + 2));
    params.push_back(v);
  }
  if (params.size() != dim)
    throw IoError(file.string() + ": header promises " + std::to_string(dim) +
                  " values, file holds " + std::to_string(params.size()));
  return params;
}

}  // namespace neuromod
