#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "test_util.hpp"
#include "zdiv/transceiver.hpp"

using namespace zdiv;
using test::rel_error;
using test::total_power;

namespace {

TransceiverParams small_params(std::size_t m, Rng& rng, double out_scale = 0.0,
                               std::size_t window_k = 2, std::size_t hidden = 8) {
  auto c = (m == 4) ? Constellation::rings(2, 2) : Constellation::rings(4, 4);
  return TransceiverParams::make(c, window_k, hidden, 8, rng, out_scale);
}

TrainConfig desk_cfg(LinkMode mode, std::size_t n_sym = 32) {
  TrainConfig cfg;
  cfg.symbols_per_frame = n_sym;
  cfg.sample_rate_hz = 80e9;
  cfg.symbol_rate_hz = 20e9;
  cfg.topology.mode = mode;
  cfg.topology.l1_km = 4.0;
  cfg.topology.l2_km = 2.0;
  cfg.topology.adc_bandwidth_hz = 20e9;
  cfg.topology.ssfm.step_km = 1.0;
  cfg.topology.ssfm.noise_enabled = false;
  return cfg;
}

std::vector<std::uint32_t> random_indices(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::uint32_t> idx(n);
  for (auto& v : idx) v = rng.uniform_int(static_cast<std::uint32_t>(m));
  return idx;
}

}  // namespace

TEST_CASE("tx: identity predistortion gives the classic shaped frame") {
  Rng rng(1);
  auto p = small_params(16, rng);
  auto cfg = desk_cfg(LinkMode::SD);
  auto grid = cfg.grid();
  auto idx = random_indices(grid.n_symbols(), 16, rng);

  auto x = tx_forward(idx, p, grid, 1e-3);
  CHECK(measure_power(x).watt == doctest::Approx(1e-3).epsilon(1e-9));

  // classic chain: map -> upsample -> shape -> normalize
  auto frame = map_symbols(idx, p.constellation);
  auto classic = normalize_power(
      pulse_shape_rrc0(upsample(frame, grid), grid.symbol_rate_hz), 1e-3);
  CHECK(rel_error(x.samples, classic.samples) < 1e-12);

  // out-of-band energy (strictly beyond R_S/2) is zero
  auto spec = fft(x.samples);
  double out_band = 0.0, total = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = std::abs(bin_frequency_hz(k, spec.size(), grid.sample_rate_hz));
    total += std::norm(spec[k]);
    if (f > grid.symbol_rate_hz / 2.0 * (1.0 + 1e-12)) out_band += std::norm(spec[k]);
  }
  CHECK(out_band / total < 1e-12);

  CHECK_THROWS(tx_forward(idx, p, grid, 0.0));
  CHECK_THROWS(tx_forward({0, 1}, p, grid, 1e-3));
}

TEST_CASE("tx: normalizer cancels the power gradient") {
  Rng rng(2);
  auto p = small_params(16, rng, 0.3);  // non-trivial predistortion
  auto cfg = desk_cfg(LinkMode::SD);
  auto grid = cfg.grid();
  auto idx = random_indices(grid.n_symbols(), 16, rng);

  ad::Tape t;
  auto pre = detail::mlp_to_tape(t, p.predistort, true);
  ad::Var x = detail::build_tx(t, idx, p, pre, grid, 1e-3);
  // 0.5 sum |x|^2 is pinned by the normalizer, so the gradient vanishes
  ad::Var loss = t.mse(x, cvec(grid.n_samples, cplx(0, 0)));
  t.backward(loss);
  double worst = 0.0;
  for (const auto& w : pre.ws)
    for (const auto& g : t.grad(w)) worst = std::max(worst, std::abs(g));
  const double scale = 0.5 * 1e-3 * static_cast<double>(grid.n_samples);
  CHECK(worst / scale < 1e-10);
}

TEST_CASE("rx: identity chain recovers the launched symbols on a linear channel") {
  Rng rng(3);
  auto p = small_params(16, rng);
  for (auto mode : {LinkMode::Baseline, LinkMode::SD, LinkMode::SDA}) {
    auto cfg = desk_cfg(mode);
    cfg.topology.fiber.gamma_per_w_km = 0.0;
    cfg.topology.edfa.nsp_edfa = 0.0;
    auto grid = cfg.grid();
    auto idx = random_indices(grid.n_symbols(), 16, rng);
    const double p_avg = 1e-3;

    auto x = tx_forward(idx, p, grid, p_avg);
    Rng lrng(99);
    auto y = simulate_link(x, cfg.topology, lrng);
    auto rx = rx_forward(y, p, cfg.topology, p_avg);

    // launched symbol amplitudes in the receiver's nominal units
    auto launched = downsample(x, 0);
    cvec expect(launched.symbols.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
      expect[i] = launched.symbols[i] / std::sqrt(p_avg);
    CHECK(rel_error(rx.shat.symbols, expect) < 1e-8);

    // and matches the constellation up to the per-frame power fluctuation
    auto frame = map_symbols(idx, p.constellation);
    CHECK(rel_error(rx.shat.symbols, frame.symbols) < 0.15);
  }
}

TEST_CASE("rx: baseline is symmetric under path permutation") {
  Rng rng(4);
  auto p = small_params(16, rng, 0.2);
  auto cfg = desk_cfg(LinkMode::Baseline);
  auto grid = cfg.grid();
  auto idx = random_indices(grid.n_symbols(), 16, rng);
  auto x = tx_forward(idx, p, grid, 2e-3);
  Rng lrng(5);
  auto y = simulate_link(x, cfg.topology, lrng);
  auto a = rx_forward(y, p, cfg.topology, 2e-3);
  LinkOutput swapped{y.y2, y.y1};
  auto b = rx_forward(swapped, p, cfg.topology, 2e-3);
  CHECK(rel_error(a.shat.symbols, b.shat.symbols) == 0.0);
}

TEST_CASE("differentiable channel mirrors the simulator sample for sample") {
  Rng rng(6);
  auto cfg = desk_cfg(LinkMode::SDA);
  cfg.topology.ssfm.noise_enabled = true;
  cfg.topology.ssfm.noise_bandwidth_hz = cfg.sample_rate_hz;
  auto grid = cfg.grid();
  auto p = small_params(16, rng);
  auto idx = random_indices(grid.n_symbols(), 16, rng);
  auto x = tx_forward(idx, p, grid, 3e-3);

  Rng sim_rng(123);
  auto y = simulate_link(x, cfg.topology, sim_rng);

  Rng tape_rng(123);
  ad::Tape t;
  ad::Var q = t.constant(x.samples);
  q = detail::build_fiber(t, q, grid, cfg.topology.fiber, cfg.topology.l1_km,
                          cfg.topology.ssfm, tape_rng);
  ad::Var tap = t.scale(q, 1.0 / std::numbers::sqrt2);
  const cvec adc = ad::lowpass_response(grid, cfg.topology.adc_bandwidth_hz, false);
  ad::Var y1 = t.spectral_mask(tap, adc);
  const double gain = cfg.topology.edfa.gain_linear();
  ad::Var second = t.scale(tap, std::sqrt(gain));
  const double sigma2 = cfg.topology.edfa.nsp_edfa * kPlanck *
                        cfg.topology.edfa.f0_hz * (gain - 1.0) *
                        grid.sample_rate_hz;
  cvec n(grid.n_samples);
  for (auto& s : n) s = tape_rng.normal_complex(sigma2);
  second = t.add(second, t.constant(std::move(n)));
  second = detail::build_fiber(t, second, grid, cfg.topology.fiber,
                               cfg.topology.l2_km, cfg.topology.ssfm, tape_rng);
  ad::Var y2 = t.spectral_mask(second, adc);

  CHECK(rel_error(t.val(y1), y.y1.samples) < 1e-13);
  CHECK(rel_error(t.val(y2), y.y2.samples) < 1e-13);
}

TEST_CASE("end-to-end gradient matches finite differences on a 16-symbol frame") {
  Rng rng(7);
  auto c = Constellation::rings(2, 2);
  auto p = TransceiverParams::make(c, 1, 4, 4, rng, 0.4);
  TrainConfig cfg = desk_cfg(LinkMode::SD, 16);
  cfg.topology.l1_km = 2.0;
  cfg.topology.l2_km = 1.0;
  auto grid = cfg.grid();
  auto idx = random_indices(16, 4, rng);
  const double p_avg = 3e-3;

  // leaves: per net, per layer, w then b
  std::vector<cvec> leaves;
  auto push_net = [&](const nn::MlpParams& m) {
    for (const auto& ly : m.layers) {
      cvec w(ly.w.size()), b(ly.b.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = cplx(ly.w[i], 0.0);
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = cplx(ly.b[i], 0.0);
      leaves.push_back(std::move(w));
      leaves.push_back(std::move(b));
    }
  };
  push_net(p.predistort);
  push_net(p.combine);
  push_net(p.train_demapper);

  auto build = [&](ad::Tape& t, const std::vector<ad::Var>& v) {
    std::size_t pos = 0;
    auto take = [&](const nn::MlpParams& m) {
      detail::MlpVars mv;
      for (std::size_t l = 0; l < m.layers.size(); ++l) {
        mv.ws.push_back(v[pos++]);
        mv.bs.push_back(v[pos++]);
      }
      return mv;
    };
    auto pre = take(p.predistort);
    auto comb = take(p.combine);
    auto dem = take(p.train_demapper);

    ad::Var q = detail::build_tx(t, idx, p, pre, grid, p_avg);
    Rng nrng(1);  // noise disabled; rng unused
    q = detail::build_fiber(t, q, grid, cfg.topology.fiber, cfg.topology.l1_km,
                            cfg.topology.ssfm, nrng);
    ad::Var tap = t.scale(q, 1.0 / std::numbers::sqrt2);
    const cvec adc = ad::lowpass_response(grid, cfg.topology.adc_bandwidth_hz, false);
    ad::Var y1 = t.spectral_mask(tap, adc);
    ad::Var second = detail::build_fiber(t, tap, grid, cfg.topology.fiber,
                                         cfg.topology.l2_km, cfg.topology.ssfm, nrng);
    ad::Var y2 = t.spectral_mask(second, adc);
    auto rx = detail::build_rx(t, y1, y2, p, comb, dem, grid, cfg.topology, p_avg);
    return t.softmax_xent(rx.logits, idx, 4);
  };

  CHECK(ad::gradient_check(build, leaves, 1e-5) < 1e-4);
}

TEST_CASE("training is deterministic per seed") {
  Rng rng(8);
  auto p0 = small_params(4, rng, 0.1);
  auto run = [&] {
    TrainConfig cfg = desk_cfg(LinkMode::SDA, 16);
    cfg.topology.ssfm.noise_enabled = true;
    cfg.topology.ssfm.noise_bandwidth_hz = cfg.sample_rate_hz;
    cfg.steps = 5;
    cfg.frames_per_batch = 2;
    cfg.seed = 77;
    return train(cfg, p0);
  };
  auto a = run();
  auto b = run();
  CHECK(a.loss_history == b.loss_history);
  CHECK(nn::flatten(a.params.combine) == nn::flatten(b.params.combine));
  CHECK(nn::flatten(a.params.predistort) == nn::flatten(b.params.predistort));
}

TEST_CASE("training converges on the noiseless linear channel") {
  Rng rng(9);
  auto c = Constellation::rings(2, 8);
  auto p0 = TransceiverParams::make(c, 2, 8, 32, rng, 0.0);
  TrainConfig cfg = desk_cfg(LinkMode::SD, 64);
  cfg.topology.fiber.gamma_per_w_km = 0.0;
  cfg.steps = 500;
  cfg.frames_per_batch = 4;
  cfg.adam.lr = 0.1;
  cfg.lr_final = 0.001;
  cfg.seed = 5;
  auto res = train(cfg, p0);
  CHECK(res.loss_history.front() > 0.5);
  CHECK(res.loss_history.back() < 1e-3);
}

TEST_CASE("training plateaus at ln M on a zero-capacity channel") {
  Rng rng(10);
  auto p0 = small_params(16, rng);
  TrainConfig cfg = desk_cfg(LinkMode::SDA, 32);
  cfg.p_avg_dbm = -80.0;  // signal buried far below the ASE floor
  cfg.topology.ssfm.noise_enabled = true;
  cfg.topology.ssfm.noise_bandwidth_hz = cfg.sample_rate_hz;
  cfg.topology.l1_km = 10.0;
  cfg.topology.l2_km = 0.0;
  cfg.steps = 120;
  cfg.frames_per_batch = 2;
  cfg.adam.lr = 0.02;
  cfg.seed = 6;
  auto res = train(cfg, p0);
  double tail = 0.0;
  for (std::size_t i = res.loss_history.size() - 5; i < res.loss_history.size(); ++i)
    tail += res.loss_history[i];
  tail /= 5.0;
  CHECK(tail == doctest::Approx(std::log(16.0)).epsilon(0.02));
}

TEST_CASE("evaluation: noiseless linear link saturates MI, pure noise kills it") {
  Rng rng(11);
  auto p = small_params(16, rng);
  TrainConfig cfg = desk_cfg(LinkMode::SD, 64);
  cfg.topology.fiber.gamma_per_w_km = 0.0;
  cfg.seed = 3;
  auto res = evaluate(p, cfg, 20);
  CHECK(res.mi_bits > 4.0 - 0.01);
  CHECK(res.mi_bits <= 4.0);
  CHECK(res.eta_bits_s_hz == doctest::Approx(res.mi_bits));

  TrainConfig noisy = cfg;
  noisy.p_avg_dbm = -80.0;
  noisy.topology.fiber.gamma_per_w_km = 1.27;
  noisy.topology.ssfm.noise_enabled = true;
  noisy.topology.ssfm.noise_bandwidth_hz = noisy.sample_rate_hz;
  noisy.topology.l1_km = 10.0;
  auto res2 = evaluate(p, noisy, 20);
  CHECK(res2.mi_bits < 0.05);
}

TEST_CASE("evaluation ignores the training demapper") {
  Rng rng(12);
  auto p = small_params(16, rng);
  TrainConfig cfg = desk_cfg(LinkMode::SD, 64);
  cfg.topology.fiber.gamma_per_w_km = 0.0;
  auto base = evaluate(p, cfg, 8);
  auto corrupted = p;
  for (auto& ly : corrupted.train_demapper.layers)
    for (auto& w : ly.w) w = -w;
  auto after = evaluate(corrupted, cfg, 8);
  CHECK(base.mi_bits == after.mi_bits);
}

TEST_CASE("parameter-count parity across modes") {
  Rng rng(13);
  auto p = small_params(16, rng);
  // the networks are mode-independent by construction; the count reported
  // for a baseline run equals the count for SD/SDA runs
  CHECK(p.n_params() ==
        small_params(16, rng).n_params());
  CHECK(p.combine.layers.front().n_in == 4 * (2 * p.window_k + 1));
}

TEST_CASE("transceiver checkpoint round trip") {
  Rng rng(14);
  auto p = small_params(16, rng, 0.5);
  save_transceiver(p, "tx_ckpt", 42, 17, {1.0, 0.5});
  auto q = load_transceiver("tx_ckpt");
  CHECK(q.window_k == p.window_k);
  CHECK(nn::flatten(q.predistort) == nn::flatten(p.predistort));
  CHECK(nn::flatten(q.combine) == nn::flatten(p.combine));
  CHECK(nn::flatten(q.train_demapper) == nn::flatten(p.train_demapper));
  CHECK(rel_error(q.constellation.points, p.constellation.points) == 0.0);

  TrainConfig cfg = desk_cfg(LinkMode::SDA);
  cfg.p_avg_dbm = 1.5;
  cfg.seed = 9;
  MetricsResult r;
  r.mi_bits = 3.5;
  r.eta_bits_s_hz = 3.5;
  r.ci_low = 3.4;
  r.ci_high = 3.6;
  auto js = evaluation_json(r, cfg);
  CHECK(js.find("\"mode\":\"sda\"") != std::string::npos);
  CHECK(js.find("\"power_dbm\":1.5") != std::string::npos);
}

// Cross-entropy is invariant to invertible embeddings of shat, so training
// freely rescales and warps the symbol cloud and raw MSE(shat, s) is not
// monotone under it. The scale-invariant form of the same claim is checked
// instead: the trained system strictly improves the GMM information rate
// over the identity-initialized one on a nonlinear noisy link.
TEST_CASE("training beats the identity transceiver on a nonlinear link") {
  Rng rng(15);
  auto p0 = small_params(16, rng, 0.0, 2, 16);
  TrainConfig cfg = desk_cfg(LinkMode::SD, 64);
  cfg.p_avg_dbm = 9.0;  // well inside the nonlinear regime
  cfg.topology.l1_km = 100.0;
  cfg.topology.l2_km = 0.0;
  cfg.topology.ssfm.noise_enabled = true;
  cfg.topology.ssfm.noise_bandwidth_hz = cfg.sample_rate_hz;
  cfg.steps = 300;
  cfg.frames_per_batch = 2;
  cfg.adam.lr = 0.005;
  cfg.seed = 21;

  auto before = evaluate(p0, cfg, 24);
  auto res = train(cfg, p0);
  auto after = evaluate(res.params, cfg, 24);
  CHECK(after.mi_bits > before.mi_bits + 0.5);
}
