#include "zdiv/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace zdiv::nn {

void MlpParams::validate() const {
  if (layers.empty()) throw std::invalid_argument("mlp: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& ly = layers[l];
    if (ly.n_in == 0 || ly.n_out == 0)
      throw std::invalid_argument("mlp: zero layer dimension");
    if (ly.w.size() != ly.n_in * ly.n_out || ly.b.size() != ly.n_out)
      throw std::invalid_argument("mlp: parameter shape mismatch");
    if (l > 0 && ly.n_in != layers[l - 1].n_out)
      throw std::invalid_argument("mlp: layer dimensions do not chain");
    for (double v : ly.w)
      if (!std::isfinite(v)) throw std::invalid_argument("mlp: non-finite weight");
    for (double v : ly.b)
      if (!std::isfinite(v)) throw std::invalid_argument("mlp: non-finite bias");
  }
}

std::size_t MlpParams::n_params() const {
  std::size_t n = 0;
  for (const auto& ly : layers) n += ly.w.size() + ly.b.size();
  return n;
}

std::vector<std::size_t> MlpParams::layer_sizes() const {
  std::vector<std::size_t> dims;
  for (const auto& ly : layers) dims.push_back(ly.n_in);
  dims.push_back(layers.back().n_out);
  return dims;
}

MlpParams make_mlp(const std::vector<std::size_t>& dims, Activation hidden_act,
                   Rng& rng, double out_scale) {
  if (dims.size() < 2) throw std::invalid_argument("mlp: need at least one layer");
  MlpParams p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer ly;
    ly.n_in = dims[l];
    ly.n_out = dims[l + 1];
    ly.act = (l + 2 < dims.size()) ? hidden_act : Activation::Identity;
    const bool last = (l + 2 == dims.size());
    const double bound =
        std::sqrt(6.0 / static_cast<double>(ly.n_in + ly.n_out)) *
        (last ? out_scale : 1.0);
    ly.w.resize(ly.n_in * ly.n_out);
    for (auto& w : ly.w) w = bound * (2.0 * rng.uniform01() - 1.0);
    ly.b.assign(ly.n_out, 0.0);
    p.layers.push_back(std::move(ly));
  }
  p.validate();
  return p;
}

std::vector<double> mlp_apply(const MlpParams& p, const std::vector<double>& input) {
  p.validate();
  if (input.size() != p.layers.front().n_in)
    throw std::invalid_argument("mlp_apply: input length mismatch");
  std::vector<double> x = input;
  for (const auto& ly : p.layers) {
    std::vector<double> y(ly.n_out);
    for (std::size_t k = 0; k < ly.n_out; ++k) {
      double acc = ly.b[k];
      for (std::size_t j = 0; j < ly.n_in; ++j)
        acc += ly.w[k * ly.n_in + j] * x[j];
      y[k] = (ly.act == Activation::Tanh) ? std::tanh(acc) : acc;
    }
    x = std::move(y);
  }
  return x;
}

std::vector<double> flatten(const MlpParams& p) {
  std::vector<double> out;
  out.reserve(p.n_params());
  for (const auto& ly : p.layers) {
    out.insert(out.end(), ly.w.begin(), ly.w.end());
    out.insert(out.end(), ly.b.begin(), ly.b.end());
  }
  return out;
}

void unflatten(const std::vector<double>& flat, MlpParams& p) {
  if (flat.size() != p.n_params())
    throw std::invalid_argument("unflatten: size mismatch");
  std::size_t pos = 0;
  for (auto& ly : p.layers) {
    std::copy(flat.begin() + pos, flat.begin() + pos + ly.w.size(), ly.w.begin());
    pos += ly.w.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + ly.b.size(), ly.b.begin());
    pos += ly.b.size();
  }
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& s) {
  if (params.size() != grads.size() || params.size() != s.m.size() ||
      params.size() != s.v.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.cfg.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.cfg.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.cfg.beta1 * s.m[i] + (1.0 - s.cfg.beta1) * grads[i];
    s.v[i] = s.cfg.beta2 * s.v[i] + (1.0 - s.cfg.beta2) * grads[i] * grads[i];
    const double mhat = s.m[i] / bc1;
    const double vhat = s.v[i] / bc2;
    params[i] -= s.cfg.lr * mhat / (std::sqrt(vhat) + s.cfg.eps);
  }
}

const Checkpoint::Array& Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  throw std::out_of_range("checkpoint: no array named " + name);
}

namespace {

void write_u64(std::ofstream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& base_path) {
  std::ofstream bin(base_path + ".bin", std::ios::binary | std::ios::trunc);
  if (!bin) throw std::runtime_error("checkpoint: cannot write " + base_path + ".bin");
  write_u64(bin, ckpt.arrays.size());
  for (const auto& a : ckpt.arrays) {
    write_u64(bin, a.name.size());
    bin.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    write_u64(bin, a.shape.size());
    std::uint64_t count = 1;
    for (auto d : a.shape) {
      write_u64(bin, d);
      count *= d;
    }
    if (a.data.size() != count)
      throw std::invalid_argument("checkpoint: data does not match shape");
    bin.write(reinterpret_cast<const char*>(a.data.data()),
              static_cast<std::streamsize>(a.data.size() * sizeof(double)));
  }
  if (!bin) throw std::runtime_error("checkpoint: write failed");

  std::ofstream man(base_path + ".json", std::ios::trunc);
  if (!man) throw std::runtime_error("checkpoint: cannot write manifest");
  man << ckpt.manifest_json;
}

Checkpoint load_checkpoint(const std::string& base_path) {
  std::ifstream bin(base_path + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("checkpoint: cannot open " + base_path + ".bin");
  Checkpoint ckpt;
  const std::uint64_t n = read_u64(bin);
  for (std::uint64_t i = 0; i < n; ++i) {
    Checkpoint::Array a;
    const std::uint64_t name_len = read_u64(bin);
    a.name.resize(name_len);
    bin.read(a.name.data(), static_cast<std::streamsize>(name_len));
    const std::uint64_t rank = read_u64(bin);
    std::uint64_t count = 1;
    for (std::uint64_t r = 0; r < rank; ++r) {
      a.shape.push_back(read_u64(bin));
      count *= a.shape.back();
    }
    a.data.resize(count);
    bin.read(reinterpret_cast<char*>(a.data.data()),
             static_cast<std::streamsize>(count * sizeof(double)));
    if (!bin) throw std::runtime_error("checkpoint: truncated array data");
    ckpt.arrays.push_back(std::move(a));
  }

  std::ifstream man(base_path + ".json");
  if (man) {
    std::string s((std::istreambuf_iterator<char>(man)),
                  std::istreambuf_iterator<char>());
    ckpt.manifest_json = std::move(s);
  }
  return ckpt;
}

void append_mlp(Checkpoint& ckpt, const std::string& prefix, const MlpParams& p) {
  p.validate();
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const Layer& ly = p.layers[l];
    char name[64];
    std::snprintf(name, sizeof(name), "%s.w%zu", prefix.c_str(), l);
    ckpt.arrays.push_back({name, {ly.n_out, ly.n_in}, ly.w});
    std::snprintf(name, sizeof(name), "%s.b%zu", prefix.c_str(), l);
    ckpt.arrays.push_back({name, {ly.n_out}, ly.b});
  }
}

MlpParams extract_mlp(const Checkpoint& ckpt, const std::string& prefix,
                      const std::vector<std::size_t>& dims,
                      Activation hidden_act) {
  MlpParams p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer ly;
    ly.n_in = dims[l];
    ly.n_out = dims[l + 1];
    ly.act = (l + 2 < dims.size()) ? hidden_act : Activation::Identity;
    char name[64];
    std::snprintf(name, sizeof(name), "%s.w%zu", prefix.c_str(), l);
    const auto& wa = ckpt.find(name);
    if (wa.shape != std::vector<std::uint64_t>{ly.n_out, ly.n_in})
      throw std::runtime_error("checkpoint: weight shape mismatch for " +
                               std::string(name));
    ly.w = wa.data;
    std::snprintf(name, sizeof(name), "%s.b%zu", prefix.c_str(), l);
    const auto& ba = ckpt.find(name);
    if (ba.shape != std::vector<std::uint64_t>{ly.n_out})
      throw std::runtime_error("checkpoint: bias shape mismatch for " +
                               std::string(name));
    ly.b = ba.data;
    p.layers.push_back(std::move(ly));
  }
  p.validate();
  return p;
}

}  // namespace zdiv::nn
