#include "zdiv/transceiver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace zdiv {

using ad::Tape;
using ad::Var;
using detail::MlpVars;

// ---------------------------------------------------------------- params

TransceiverParams TransceiverParams::make(const Constellation& c,
                                          std::size_t window_k,
                                          std::size_t hidden,
                                          std::size_t demapper_hidden, Rng& rng,
                                          double out_scale) {
  c.validate();
  const std::size_t win = 2 * window_k + 1;
  TransceiverParams p;
  p.constellation = c;
  p.window_k = window_k;
  p.predistort =
      nn::make_mlp({2 * win, hidden, hidden, 2}, nn::Activation::Tanh, rng, out_scale);
  p.combine =
      nn::make_mlp({4 * win, hidden, hidden, 2}, nn::Activation::Tanh, rng, out_scale);
  p.train_demapper = nn::make_mlp({2, demapper_hidden, demapper_hidden, c.size()},
                                  nn::Activation::Tanh, rng, 1.0);
  p.validate();
  return p;
}

void TransceiverParams::validate() const {
  constellation.validate();
  predistort.validate();
  combine.validate();
  train_demapper.validate();
  const std::size_t win = 2 * window_k + 1;
  if (predistort.layers.front().n_in != 2 * win ||
      predistort.layers.back().n_out != 2)
    throw std::invalid_argument("transceiver: predistortion net shape");
  if (combine.layers.front().n_in != 4 * win || combine.layers.back().n_out != 2)
    throw std::invalid_argument("transceiver: combining net shape");
  if (train_demapper.layers.front().n_in != 2 ||
      train_demapper.layers.back().n_out != constellation.size())
    throw std::invalid_argument("transceiver: demapper net shape");
}

std::size_t TransceiverParams::n_params() const {
  return predistort.n_params() + combine.n_params() + train_demapper.n_params();
}

SamplingGrid TrainConfig::grid() const {
  return SamplingGrid::make(sample_rate_hz, symbol_rate_hz, symbols_per_frame);
}

void TrainConfig::validate() const {
  topology.validate();
  if (symbols_per_frame == 0 || steps == 0 || frames_per_batch == 0)
    throw std::invalid_argument("TrainConfig: counts must be positive");
  grid().validate();
}

// ---------------------------------------------------------------- builders

namespace detail {

MlpVars mlp_to_tape(Tape& t, const nn::MlpParams& p, bool requires_grad) {
  MlpVars v;
  for (const auto& ly : p.layers) {
    cvec w(ly.w.size()), b(ly.b.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = cplx(ly.w[i], 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = cplx(ly.b[i], 0.0);
    v.ws.push_back(t.leaf(std::move(w), requires_grad));
    v.bs.push_back(t.leaf(std::move(b), requires_grad));
  }
  return v;
}

Var mlp_tape_apply(Tape& t, const MlpVars& v, const nn::MlpParams& shape,
                   Var input) {
  Var x = input;
  for (std::size_t l = 0; l < shape.layers.size(); ++l) {
    const auto& ly = shape.layers[l];
    x = t.dense(x, v.ws[l], v.bs[l], ly.n_in, ly.n_out);
    if (ly.act == nn::Activation::Tanh) x = t.tanh_real(x);
  }
  return x;
}

Var build_fiber(Tape& t, Var q, const SamplingGrid& grid, const FiberSpec& fiber,
                double length_km, const SsfmConfig& cfg, Rng& rng) {
  fiber.validate();
  cfg.validate();
  if (length_km == 0.0) return q;
  const double steps_exact = length_km / cfg.step_km;
  const auto n_steps = static_cast<std::size_t>(std::llround(steps_exact));
  if (std::abs(steps_exact - static_cast<double>(n_steps)) > 1e-6)
    throw std::invalid_argument("build_fiber: length not a multiple of the step");

  const cvec half =
      ad::dispersion_response(grid, fiber.beta2_ps2_per_km, cfg.step_km / 2.0);
  const double gamma_dz = fiber.gamma_per_w_km * cfg.step_km;
  const bool noise = cfg.noise_enabled && fiber.nsp_raman > 0.0;
  const double sigma2 =
      noise ? ase_sigma2_watt(fiber, cfg.step_km, cfg.noise_bandwidth_hz) : 0.0;

  for (std::size_t step = 0; step < n_steps; ++step) {
    q = t.spectral_mask(q, half);
    q = t.kerr_phase(q, gamma_dz);
    q = t.spectral_mask(q, half);
    if (noise) {
      cvec n(grid.n_samples);
      for (auto& s : n) s = rng.normal_complex(sigma2);
      q = t.add(q, t.constant(std::move(n)));
    }
  }
  return q;
}

namespace {

// circular sliding windows, flattened batch-major: entry [i*(2k+1) + j]
// addresses symbol (i + j - k) mod n, optionally shifted by `offset`
std::vector<std::size_t> window_indices(std::size_t n, std::size_t k,
                                        std::size_t offset = 0) {
  const std::size_t win = 2 * k + 1;
  std::vector<std::size_t> idx(n * win);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < win; ++j)
      idx[i * win + j] = offset + (i + j + n - k) % n;
  return idx;
}

}  // namespace

Var build_tx(Tape& t, const std::vector<std::uint32_t>& indices,
             const TransceiverParams& p, const MlpVars& predistort,
             const SamplingGrid& grid, double p_avg_watt) {
  if (p_avg_watt <= 0.0)
    throw std::invalid_argument("build_tx: launch power must be positive");
  if (indices.size() != grid.n_symbols())
    throw std::invalid_argument("build_tx: frame length mismatch");
  const std::size_t n_sym = indices.size();
  if (2 * p.window_k + 1 > n_sym)
    throw std::invalid_argument("build_tx: window larger than the frame");

  auto frame = map_symbols(indices, p.constellation);
  Var a0 = t.constant(frame.symbols);

  Var windows = t.gather(a0, window_indices(n_sym, p.window_k));
  Var corr = t.merge_reim(
      mlp_tape_apply(t, predistort, p.predistort, t.split_reim(windows)));
  Var a = t.add(a0, corr);

  std::vector<std::size_t> up_idx(n_sym);
  for (std::size_t i = 0; i < n_sym; ++i) up_idx[i] = i * grid.samples_per_symbol;
  Var up = t.scatter(a, std::move(up_idx), grid.n_samples);
  Var shaped = t.spectral_mask(up, ad::lowpass_response(grid, grid.symbol_rate_hz, true));
  return t.normalize_sum_sq(shaped,
                            p_avg_watt * static_cast<double>(grid.n_samples));
}

RxVars build_rx(Tape& t, Var y1, Var y2, const TransceiverParams& p,
                const MlpVars& combine, const MlpVars& demapper,
                const SamplingGrid& grid, const LinkTopology& topo,
                double p_avg_watt) {
  const std::size_t n_sym = grid.n_symbols();
  const std::size_t sps = grid.samples_per_symbol;

  // undo the deterministic gains in front of each ADC
  double g1 = 1.0, g2 = 1.0;
  double len2 = topo.l1_km;
  if (topo.mode != LinkMode::Baseline) {
    g1 = std::numbers::sqrt2;
    g2 = std::numbers::sqrt2;
    len2 = topo.l1_km + topo.l2_km;
    if (topo.mode == LinkMode::SDA)
      g2 /= std::sqrt(topo.edfa.gain_linear());
  }

  const cvec brick = ad::lowpass_response(grid, grid.symbol_rate_hz, false);
  // downsampled symbol instants carry amplitude a/sps and the tx normalizer
  // contributes ~sqrt(P_avg * sps * ...)/..., so sps * (1/(sps sqrt(P))) puts
  // shat back in constellation units up to the per-frame power fluctuation
  const double unit = 1.0 / std::sqrt(p_avg_watt);
  std::vector<std::size_t> down_idx(n_sym);
  for (std::size_t i = 0; i < n_sym; ++i) down_idx[i] = i * sps;

  auto path = [&](Var y, double gain, double length_km) {
    Var q = t.spectral_mask(
        y, ad::dispersion_response(grid, topo.fiber.beta2_ps2_per_km, -length_km));
    q = t.spectral_mask(q, brick);
    q = t.gather(q, down_idx);
    return t.scale(q, gain * unit);
  };
  Var s1 = path(y1, g1, topo.l1_km);
  Var s2 = path(y2, g2, len2);

  Var both = t.concat(s1, s2);
  auto idx1 = window_indices(n_sym, p.window_k, 0);
  auto idx2 = window_indices(n_sym, p.window_k, n_sym);
  const std::size_t win = 2 * p.window_k + 1;
  std::vector<std::size_t> idx(n_sym * 2 * win);
  for (std::size_t i = 0; i < n_sym; ++i) {
    for (std::size_t j = 0; j < win; ++j) {
      idx[i * 2 * win + j] = idx1[i * win + j];
      idx[i * 2 * win + win + j] = idx2[i * win + j];
    }
  }
  Var feats = t.split_reim(t.gather(both, std::move(idx)));
  Var corr = t.merge_reim(mlp_tape_apply(t, combine, p.combine, feats));
  Var shat = t.add(t.scale(t.add(s1, s2), 0.5), corr);

  RxVars out;
  out.shat = shat;
  out.logits = mlp_tape_apply(t, demapper, p.train_demapper, t.split_reim(shat));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- plain passes

Signal tx_forward(const std::vector<std::uint32_t>& indices,
                  const TransceiverParams& p, const SamplingGrid& grid,
                  double p_avg_watt) {
  p.validate();
  Tape t;
  auto pre = detail::mlp_to_tape(t, p.predistort, false);
  Var x = detail::build_tx(t, indices, p, pre, grid, p_avg_watt);
  Signal out;
  out.samples = t.val(x);
  out.grid = grid;
  out.z_km = 0.0;
  return out;
}

RxResult rx_forward(const LinkOutput& y, const TransceiverParams& p,
                    const LinkTopology& topo, double p_avg_watt) {
  p.validate();
  y.y1.validate();
  y.y2.validate();
  if (!(y.y1.grid == y.y2.grid))
    throw std::invalid_argument("rx_forward: path grids differ");

  Tape t;
  auto comb = detail::mlp_to_tape(t, p.combine, false);
  auto dem = detail::mlp_to_tape(t, p.train_demapper, false);
  Var y1 = t.constant(y.y1.samples);
  Var y2 = t.constant(y.y2.samples);
  auto rx = detail::build_rx(t, y1, y2, p, comb, dem, y.y1.grid, topo, p_avg_watt);

  RxResult out;
  out.shat.symbols = t.val(rx.shat);
  out.logits.reserve(t.val(rx.logits).size());
  for (const auto& v : t.val(rx.logits)) out.logits.push_back(v.real());
  return out;
}

// ---------------------------------------------------------------- training

namespace {

std::vector<double> real_grad(const Tape& t, const MlpVars& v) {
  std::vector<double> g;
  for (std::size_t l = 0; l < v.ws.size(); ++l) {
    for (const auto& x : t.grad(v.ws[l])) g.push_back(x.real());
    for (const auto& x : t.grad(v.bs[l])) g.push_back(x.real());
  }
  return g;
}

struct FlatParams {
  std::vector<double> values;

  explicit FlatParams(const TransceiverParams& p) {
    auto append = [&](const nn::MlpParams& m) {
      auto f = nn::flatten(m);
      values.insert(values.end(), f.begin(), f.end());
    };
    append(p.predistort);
    append(p.combine);
    append(p.train_demapper);
  }

  void restore(TransceiverParams& p) const {
    std::size_t pos = 0;
    auto take = [&](nn::MlpParams& m) {
      std::vector<double> f(values.begin() + pos, values.begin() + pos + m.n_params());
      nn::unflatten(f, m);
      pos += m.n_params();
    };
    take(p.predistort);
    take(p.combine);
    take(p.train_demapper);
  }
};

}  // namespace

TrainResult train(const TrainConfig& cfg, const TransceiverParams& params0) {
  cfg.validate();
  params0.validate();
  const SamplingGrid grid = cfg.grid();
  const double p_avg = dbm_to_watt(cfg.p_avg_dbm);
  const std::size_t m_order = params0.constellation.size();

  SsfmConfig ssfm = cfg.topology.ssfm;
  ssfm.noise_enabled = ssfm.noise_enabled && cfg.noise_during_training;
  EdfaSpec edfa = cfg.topology.edfa;
  if (!cfg.noise_during_training) edfa.nsp_edfa = 0.0;

  TrainResult res;
  res.params = params0;
  Rng master(cfg.seed);
  Rng rng_data = master.fork(1);
  Rng rng_noise = master.fork(2);

  FlatParams flat(res.params);
  nn::AdamState adam(flat.values.size(), cfg.adam);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    if (cfg.lr_final > 0.0 && cfg.steps > 1) {
      const double frac =
          static_cast<double>(step) / static_cast<double>(cfg.steps - 1);
      adam.cfg.lr = cfg.adam.lr * std::pow(cfg.lr_final / cfg.adam.lr, frac);
    }
    Tape t;
    auto pre = detail::mlp_to_tape(t, res.params.predistort, true);
    auto comb = detail::mlp_to_tape(t, res.params.combine, true);
    auto dem = detail::mlp_to_tape(t, res.params.train_demapper, true);

    Var total = t.constant(cvec{cplx(0, 0)});
    for (std::size_t f = 0; f < cfg.frames_per_batch; ++f) {
      std::vector<std::uint32_t> indices(cfg.symbols_per_frame);
      for (auto& s : indices)
        s = rng_data.uniform_int(static_cast<std::uint32_t>(m_order));

      Var q = detail::build_tx(t, indices, res.params, pre, grid, p_avg);
      q = detail::build_fiber(t, q, grid, cfg.topology.fiber, cfg.topology.l1_km,
                              ssfm, rng_noise);
      Var y1, y2;
      const cvec adc =
          ad::lowpass_response(grid, cfg.topology.adc_bandwidth_hz, false);
      if (cfg.topology.mode == LinkMode::Baseline) {
        y1 = t.spectral_mask(q, adc);
        y2 = y1;
      } else {
        Var tap = t.scale(q, 1.0 / std::numbers::sqrt2);
        y1 = t.spectral_mask(tap, adc);
        Var second = tap;
        if (cfg.topology.mode == LinkMode::SDA) {
          second = t.scale(second, std::sqrt(edfa.gain_linear()));
          const double sigma2 = edfa.nsp_edfa * kPlanck * edfa.f0_hz *
                                (edfa.gain_linear() - 1.0) * grid.sample_rate_hz;
          if (sigma2 > 0.0) {
            cvec n(grid.n_samples);
            for (auto& s : n) s = rng_noise.normal_complex(sigma2);
            second = t.add(second, t.constant(std::move(n)));
          }
        }
        second = detail::build_fiber(t, second, grid, cfg.topology.fiber,
                                     cfg.topology.l2_km, ssfm, rng_noise);
        y2 = t.spectral_mask(second, adc);
      }

      auto rx = detail::build_rx(t, y1, y2, res.params, comb, dem, grid,
                                 cfg.topology, p_avg);
      Var loss = t.softmax_xent(rx.logits, indices, m_order);
      total = t.add(total, loss);
    }
    total = t.scale(total, 1.0 / static_cast<double>(cfg.frames_per_batch));

    const double loss_val = t.val(total)[0].real();
    if (!std::isfinite(loss_val)) {
      std::ostringstream msg;
      msg << "train: diverged at step " << step << " (loss=" << loss_val
          << ", lr=" << cfg.adam.lr << ", P=" << cfg.p_avg_dbm << " dBm)";
      throw std::runtime_error(msg.str());
    }
    res.loss_history.push_back(loss_val);

    t.backward(total);
    std::vector<double> grads = real_grad(t, pre);
    if (!cfg.train_predistort) std::fill(grads.begin(), grads.end(), 0.0);
    auto gc = real_grad(t, comb);
    if (!cfg.train_combine) std::fill(gc.begin(), gc.end(), 0.0);
    auto gd = real_grad(t, dem);
    grads.insert(grads.end(), gc.begin(), gc.end());
    grads.insert(grads.end(), gd.begin(), gd.end());

    nn::adam_step(flat.values, grads, adam);
    flat.restore(res.params);
  }
  return res;
}

// ---------------------------------------------------------------- evaluation

MetricsResult evaluate(const TransceiverParams& p, const TrainConfig& cfg,
                       std::size_t n_frames) {
  cfg.validate();
  p.validate();
  const SamplingGrid grid = cfg.grid();
  const double p_avg = dbm_to_watt(cfg.p_avg_dbm);
  const std::size_t m_order = p.constellation.size();

  Rng master(cfg.seed);
  Rng rng_eval = master.fork(0x5eed);  // disjoint from the training streams

  std::vector<std::vector<LabeledSymbol>> frames;
  frames.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::vector<std::uint32_t> indices(cfg.symbols_per_frame);
    for (auto& s : indices)
      s = rng_eval.uniform_int(static_cast<std::uint32_t>(m_order));
    Signal x = tx_forward(indices, p, grid, p_avg);
    LinkOutput y = simulate_link(x, cfg.topology, rng_eval);
    RxResult rx = rx_forward(y, p, cfg.topology, p_avg);

    std::vector<LabeledSymbol> frame(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i)
      frame[i] = {indices[i], rx.shat.symbols[i]};
    frames.push_back(std::move(frame));
  }
  return evaluate_frames(frames, m_order, grid.symbol_rate_hz,
                         grid.symbol_rate_hz, rng_eval);
}

std::string evaluation_json(const MetricsResult& r, const TrainConfig& cfg) {
  nlohmann::json j;
  j["power_dbm"] = cfg.p_avg_dbm;
  j["l2_km"] = cfg.topology.l2_km;
  j["mode"] = to_string(cfg.topology.mode);
  j["mi_bits"] = r.mi_bits;
  j["eta"] = r.eta_bits_s_hz;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["seed"] = cfg.seed;
  return j.dump();
}

// ---------------------------------------------------------------- checkpoints

void save_transceiver(const TransceiverParams& p, const std::string& base_path,
                      std::uint64_t seed, std::uint64_t step_count,
                      const std::vector<double>& loss_history) {
  p.validate();
  nn::Checkpoint ck;
  nn::append_mlp(ck, "predistort", p.predistort);
  nn::append_mlp(ck, "combine", p.combine);
  nn::append_mlp(ck, "demapper", p.train_demapper);

  nn::Checkpoint::Array cst;
  cst.name = "constellation";
  cst.shape = {p.constellation.size(), 2};
  for (const auto& s : p.constellation.points) {
    cst.data.push_back(s.real());
    cst.data.push_back(s.imag());
  }
  ck.arrays.push_back(std::move(cst));
  if (!loss_history.empty())
    ck.arrays.push_back({"loss_history",
                         {loss_history.size()},
                         loss_history});

  nlohmann::json man;
  man["seed"] = seed;
  man["step_count"] = step_count;
  man["window_k"] = p.window_k;
  man["m"] = p.constellation.size();
  man["layers"]["predistort"] = p.predistort.layer_sizes();
  man["layers"]["combine"] = p.combine.layer_sizes();
  man["layers"]["demapper"] = p.train_demapper.layer_sizes();
  ck.manifest_json = man.dump(2);
  nn::save_checkpoint(ck, base_path);
}

TransceiverParams load_transceiver(const std::string& base_path) {
  nn::Checkpoint ck = nn::load_checkpoint(base_path);
  nlohmann::json man = nlohmann::json::parse(ck.manifest_json);

  TransceiverParams p;
  p.window_k = man.at("window_k").get<std::size_t>();
  const auto& cst = ck.find("constellation");
  for (std::size_t i = 0; i + 1 < cst.data.size(); i += 2)
    p.constellation.points.emplace_back(cst.data[i], cst.data[i + 1]);

  auto dims = [&](const char* key) {
    return man.at("layers").at(key).get<std::vector<std::size_t>>();
  };
  p.predistort = nn::extract_mlp(ck, "predistort", dims("predistort"),
                                 nn::Activation::Tanh);
  p.combine = nn::extract_mlp(ck, "combine", dims("combine"), nn::Activation::Tanh);
  p.train_demapper =
      nn::extract_mlp(ck, "demapper", dims("demapper"), nn::Activation::Tanh);
  p.validate();
  return p;
}

}  // namespace zdiv
