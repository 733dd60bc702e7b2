#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zdiv/rng.hpp"

namespace zdiv::nn {

enum class Activation { Identity, Tanh };

struct Layer {
  std::size_t n_in = 0, n_out = 0;
  std::vector<double> w;  // n_out x n_in, row-major
  std::vector<double> b;  // n_out
  Activation act = Activation::Identity;
};

struct MlpParams {
  std::vector<Layer> layers;

  void validate() const;  // finite entries, dimensions chain
  std::size_t n_params() const;
  std::vector<std::size_t> layer_sizes() const;  // n_in of each layer + final n_out
};

/// dims = {n_in, hidden..., n_out}. Hidden layers get hidden_act, the last
/// layer is linear. Weights are Xavier-uniform; out_scale multiplies the
/// final layer (0 gives an exactly-zero output, the residual identity init).
MlpParams make_mlp(const std::vector<std::size_t>& dims, Activation hidden_act,
                   Rng& rng, double out_scale = 1.0);

std::vector<double> mlp_apply(const MlpParams& p, const std::vector<double>& input);

std::vector<double> flatten(const MlpParams& p);
void unflatten(const std::vector<double>& flat, MlpParams& p);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::vector<double> m, v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n = 0, AdamConfig c = {})
      : cfg(c), m(n, 0.0), v(n, 0.0) {}
};

/// Standard bias-corrected Adam update, in place.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& s);

/// Checkpoint container: named shape-prefixed float64 arrays in one binary
/// file plus a JSON manifest string. Binary layout, little-endian:
///   u64 n_arrays, then per array: u64 name_len, name bytes, u64 rank,
///   u64 dims[rank], f64 data[prod(dims)].
struct Checkpoint {
  struct Array {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::vector<double> data;
  };
  std::vector<Array> arrays;
  std::string manifest_json;

  const Array& find(const std::string& name) const;
};

/// Writes base_path + ".bin" and base_path + ".json".
void save_checkpoint(const Checkpoint& ckpt, const std::string& base_path);
Checkpoint load_checkpoint(const std::string& base_path);

/// Manifest helpers for MLP checkpoints.
void append_mlp(Checkpoint& ckpt, const std::string& prefix, const MlpParams& p);
MlpParams extract_mlp(const Checkpoint& ckpt, const std::string& prefix,
                      const std::vector<std::size_t>& dims,
                      Activation hidden_act);

}  // namespace zdiv::nn
