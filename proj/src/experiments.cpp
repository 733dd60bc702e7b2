#include "zdiv/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "zdiv/dsp.hpp"

namespace zdiv {

namespace {

std::string fmt(double v, int prec) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

double round_to_step(double x_km, double step_km) {
  return std::round(x_km / step_km) * step_km;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p *= 2;
  return p;
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled) {
    if (enabled_) t0_ = std::chrono::steady_clock::now();
  }
  double seconds() const {
    if (!enabled_) return 0.0;
    const auto dt = std::chrono::steady_clock::now() - t0_;
    return std::chrono::duration<double>(dt).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point t0_;
};

Constellation make_constellation(const ExperimentConfig& cfg) {
  return Constellation::rings(cfg.n_rings, cfg.n_phases);
}

LinkTopology make_topology(const ExperimentConfig& cfg, LinkMode mode,
                           double l1_km, double l2_km) {
  LinkTopology topo;
  topo.mode = mode;
  topo.l1_km = l1_km;
  topo.l2_km = l2_km;
  topo.adc_bandwidth_hz = cfg.adc_bandwidth_hz;
  topo.fiber = cfg.fiber;
  topo.edfa = cfg.edfa;
  topo.ssfm = cfg.ssfm;
  return topo;
}

}  // namespace

// ------------------------------------------------------------------- CSV

std::string csv_header() {
  return "scenario,mode,power_dbm,l2_km,seed,mi_bits,eta,ci_low,ci_high,wall_s\n";
}

std::string csv_body(const std::vector<RunRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.scenario;
    out += ',';
    out += r.mode;
    out += ',';
    out += fmt(r.power_dbm, 2);
    out += ',';
    out += fmt(r.l2_km, 3);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += fmt(r.mi_bits, 6);
    out += ',';
    out += fmt(r.eta, 6);
    out += ',';
    out += fmt(r.ci_low, 6);
    out += ',';
    out += fmt(r.ci_high, 6);
    out += ',';
    out += fmt(r.wall_s, 3);
    out += '\n';
  }
  return out;
}

void write_run_csv(const std::string& path, const ExperimentConfig& cfg,
                   const std::vector<RunRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("experiments: cannot write " + path);
  os << "# config_hash=" << cfg.hash_hex() << "\n"
     << csv_header() << csv_body(rows);
}

// ------------------------------------------------------------- worker pool

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers == 0) throw std::invalid_argument("parallel_for: zero workers");
  if (n == 0) return;
  workers = std::min(workers, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ------------------------------------------------------------ soliton demo

namespace {

Signal make_soliton(const ExperimentConfig& cfg, const SamplingGrid& grid) {
  if (cfg.fiber.gamma_per_w_km <= 0.0) {
    // no Kerr scale to size the pulse against; use the nominal one
    ExperimentConfig scaled = cfg;
    scaled.fiber.gamma_per_w_km = 1.27;
    return make_soliton(scaled, grid);
  }
  if (cfg.etas.size() == 1) {
    // fundamental with eigenvalue j*eta: unit-order sech of width t0/eta
    return sech_soliton(1.0, cfg.t0_ps / cfg.etas[0], cfg.fiber, grid);
  }
  SolitonSpec spec{cfg.t0_ps, cfg.etas};
  return two_soliton_from_eigenvalues(spec, cfg.fiber, grid);
}

SamplingGrid soliton_grid(const ExperimentConfig& cfg) {
  // window of ~40 pulse widths; single "symbol" spanning the whole frame
  const double span_ps = 40.0 * cfg.t0_ps;
  const std::size_t n =
      next_pow2(static_cast<std::size_t>(span_ps * cfg.sample_rate_hz * 1e-12));
  return SamplingGrid::make(cfg.sample_rate_hz,
                            cfg.sample_rate_hz / static_cast<double>(n), 1);
}

}  // namespace

SolitonDemoResult run_soliton_demo(const ExperimentConfig& cfg) {
  cfg.validate();
  const SamplingGrid grid = soliton_grid(cfg);
  Signal x = make_soliton(cfg, grid);

  double length_km = 1000.0;
  SolitonDemoResult res;
  if (cfg.etas.size() >= 2) {
    SolitonSpec spec{cfg.t0_ps, cfg.etas};
    res.predicted_period_km = soliton_period_km(spec, cfg.fiber);
    length_km = 4.0 * res.predicted_period_km;
  }

  SsfmConfig ssfm = cfg.ssfm;
  ssfm.noise_enabled = false;  // the demo shows deterministic breathing

  // snapshot spacing snapped to whole propagation steps
  const std::size_t n_steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::round(length_km / ssfm.step_km)));
  length_km = static_cast<double>(n_steps) * ssfm.step_km;
  const std::size_t steps_per_snap = std::max<std::size_t>(1, n_steps / 400);
  const double dz = static_cast<double>(steps_per_snap) * ssfm.step_km;
  const std::size_t n_snapshots = n_steps / steps_per_snap;

  res.evolution = spectral_evolution(x, cfg.fiber, length_km, ssfm, n_snapshots);

  // second pass for the absolute in-band energy trace
  Rng rng(0);
  Signal cur = x;
  res.z_km.push_back(0.0);
  res.inband_fraction.push_back(inband_energy_fraction(cur, cfg.adc_bandwidth_hz));
  for (std::size_t i = 1; i <= n_snapshots; ++i) {
    cur = ssfm_propagate(cur, cfg.fiber, dz, ssfm, rng);
    res.z_km.push_back(static_cast<double>(i) * dz);
    res.inband_fraction.push_back(
        inband_energy_fraction(cur, cfg.adc_bandwidth_hz));
  }
  res.measured_period_km = dominant_period(res.z_km, res.inband_fraction);
  return res;
}

// -------------------------------------------------------- soliton l2 sweep

namespace {

cplx inner(const cvec& a, const cvec& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

/// w minimizing sum |w^H a - s|^2 over the given pairs (2x2 hermitian solve).
std::array<cplx, 2> mmse_weights(const std::vector<std::array<cplx, 2>>& taps,
                                 const cvec& symbols) {
  cplx r11 = 0, r12 = 0, r22 = 0, p1 = 0, p2 = 0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const cplx a1 = taps[i][0], a2 = taps[i][1];
    r11 += std::conj(a1) * a1;
    r12 += std::conj(a1) * a2;
    r22 += std::conj(a2) * a2;
    p1 += std::conj(a1) * symbols[i];
    p2 += std::conj(a2) * symbols[i];
  }
  const cplx det = r11 * r22 - r12 * std::conj(r12);
  if (std::abs(det) < 1e-30) return {cplx(0.5, 0), cplx(0.5, 0)};
  // solve [r11 r12; r12* r22] [w1; w2] = [p1; p2], shat = conj(w)^T a
  const cplx w1 = (r22 * p1 - r12 * p2) / det;
  const cplx w2 = (r11 * p2 - std::conj(r12) * p1) / det;
  return {std::conj(w1), std::conj(w2)};
}

}  // namespace

std::vector<RunRow> run_soliton_l2_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.etas.size() < 2)
    throw std::invalid_argument("soliton sweep: needs a breathing (2-eta) pulse");
  SolitonSpec spec{cfg.t0_ps, cfg.etas};
  const double zp = soliton_period_km(spec, cfg.fiber);
  const double step = cfg.ssfm.step_km;
  const double l1 = cfg.soliton_l1_km > 0.0 ? cfg.soliton_l1_km
                                            : round_to_step(zp / 2.0, step);

  std::vector<double> l2_grid = cfg.l2_km;
  if (l2_grid.empty()) {
    for (int k = 0; k <= 10; ++k)
      l2_grid.push_back(round_to_step(zp * k / 10.0, step));
  }

  const SamplingGrid grid = soliton_grid(cfg);
  const Signal pulse = make_soliton(cfg, grid);
  const Constellation constellation = make_constellation(cfg);
  const std::size_t m_order = constellation.size();

  struct Task {
    LinkMode mode;
    double l2;
    std::uint64_t seed;
    std::size_t index;
  };
  std::vector<Task> tasks;
  for (LinkMode mode : cfg.modes)
    for (double l2 : l2_grid)
      for (std::uint64_t seed : cfg.seeds)
        tasks.push_back({mode, l2, seed, tasks.size()});

  std::vector<RunRow> rows(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t ti) {
    const Task& task = tasks[ti];
    Stopwatch watch(cfg.record_timing);

    LinkTopology topo = make_topology(cfg, task.mode, l1, task.l2);
    LinkTopology clean = topo;
    clean.ssfm.noise_enabled = false;
    clean.fiber.nsp_raman = 0.0;
    clean.edfa.nsp_edfa = 0.0;

    Rng quiet(0);
    const LinkOutput templ = simulate_link(pulse, clean, quiet);
    const double e1 = std::max(inner(templ.y1.samples, templ.y1.samples).real(),
                               1e-300);
    const double e2 = std::max(inner(templ.y2.samples, templ.y2.samples).real(),
                               1e-300);

    Rng rng = Rng(task.seed).fork(1000 + task.index);
    const std::size_t n_frames = cfg.soliton_frames;
    std::vector<std::array<cplx, 2>> taps(n_frames);
    std::vector<std::uint32_t> labels(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
      labels[f] = rng.uniform_int(static_cast<std::uint32_t>(m_order));
      const cplx s = constellation.points[labels[f]];
      Signal x = pulse;
      for (auto& v : x.samples) v *= s;
      const LinkOutput y = simulate_link(x, topo, rng);
      taps[f] = {inner(templ.y1.samples, y.y1.samples) / e1,
                 inner(templ.y2.samples, y.y2.samples) / e2};
    }

    // amplitude-only constellations carry no phase information, so the taps
    // are detected noncoherently
    if (cfg.n_phases == 1)
      for (auto& t : taps) t = {std::abs(t[0]), std::abs(t[1])};

    // combiner fitted on the first half only; the GMM fit below uses the
    // same half, so the second half stays clean held-out data
    std::array<cplx, 2> w = {cplx(0.5, 0), cplx(0.5, 0)};
    if (cfg.mmse_combiner) {
      const std::size_t n_fit = n_frames / 2;
      std::vector<std::array<cplx, 2>> fit_taps(taps.begin(),
                                                taps.begin() + n_fit);
      cvec fit_syms(n_fit);
      for (std::size_t i = 0; i < n_fit; ++i)
        fit_syms[i] = constellation.points[labels[i]];
      w = mmse_weights(fit_taps, fit_syms);
    }

    std::vector<std::vector<LabeledSymbol>> frames(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
      const cplx shat = std::conj(w[0]) * taps[f][0] + std::conj(w[1]) * taps[f][1];
      frames[f] = {{labels[f], shat}};
    }
    Rng rng_boot = Rng(task.seed).fork(2000 + task.index);
    const MetricsResult m = evaluate_frames(frames, m_order, 1.0, 1.0, rng_boot);

    rows[task.index] = {"soliton-l2-sweep",
                        to_string(task.mode),
                        0.0,
                        task.l2,
                        task.seed,
                        m.mi_bits,
                        m.mi_bits,  // one soliton symbol per use of the band
                        m.ci_low,
                        m.ci_high,
                        watch.seconds()};
  });
  return rows;
}

// ------------------------------------------------------------- ae l2 sweep

TrainConfig train_config_from(const ExperimentConfig& cfg, LinkMode mode,
                              double l2_km, double power_dbm,
                              std::uint64_t seed) {
  TrainConfig tc;
  tc.symbols_per_frame = cfg.symbols_per_frame;
  tc.frames_per_batch = cfg.frames_per_batch;
  tc.steps = cfg.train_steps;
  tc.adam.lr = cfg.lr;
  tc.lr_final = cfg.lr_final;
  tc.p_avg_dbm = power_dbm;
  tc.sample_rate_hz = cfg.sample_rate_hz;
  tc.symbol_rate_hz = cfg.symbol_rate_hz;
  tc.topology = make_topology(cfg, mode, cfg.l1_km, l2_km);
  tc.seed = seed;
  return tc;
}

/// Identical parameter init per seed across modes: the pairing contract.
TransceiverParams initial_params(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng = Rng(seed).fork(7);
  return TransceiverParams::make(make_constellation(cfg), cfg.window_k,
                                 cfg.hidden, cfg.demapper_hidden, rng, 0.0);
}

namespace {

RunRow trained_row(const ExperimentConfig& cfg, const std::string& scenario,
                   const std::string& mode_name, const TrainConfig& tc,
                   const TransceiverParams& p0, MetricsResult* out = nullptr) {
  Stopwatch watch(cfg.record_timing);
  const TrainResult tr = train(tc, p0);
  const MetricsResult m = evaluate(tr.params, tc, cfg.eval_frames);
  if (out) *out = m;
  return {scenario,  mode_name, tc.p_avg_dbm, tc.topology.l2_km, tc.seed,
          m.mi_bits, m.eta_bits_s_hz, m.ci_low, m.ci_high, watch.seconds()};
}

}  // namespace

std::vector<RunRow> run_ae_l2_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<double> l2_grid = cfg.l2_km;
  if (l2_grid.empty()) l2_grid = {20.0, 60.0, 120.0, 180.0, 240.0};

  std::vector<LinkMode> modes;
  for (LinkMode m : cfg.modes)
    if (m != LinkMode::Baseline) modes.push_back(m);
  if (modes.empty())
    throw std::invalid_argument("ae-l2-sweep: needs sd and/or sda modes");

  struct Task {
    LinkMode mode;  // Baseline marks the reference run
    double l2;
    double power;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double power : cfg.power_dbm)
    for (std::uint64_t seed : cfg.seeds) {
      tasks.push_back({LinkMode::Baseline, 0.0, power, seed});
      for (LinkMode mode : modes)
        for (double l2 : l2_grid) tasks.push_back({mode, l2, power, seed});
    }

  std::vector<RunRow> raw(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t ti) {
    const Task& task = tasks[ti];
    const TransceiverParams p0 = initial_params(cfg, task.seed);
    const TrainConfig tc =
        train_config_from(cfg, task.mode, task.l2, task.power, task.seed);
    raw[ti] = trained_row(cfg, "ae-l2-sweep", to_string(task.mode), tc, p0);
  });

  // absolute rows, then paired-difference rows against the same-seed baseline
  std::vector<RunRow> rows = raw;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].mode == LinkMode::Baseline) continue;
    const RunRow* base = nullptr;
    for (std::size_t j = 0; j < tasks.size(); ++j)
      if (tasks[j].mode == LinkMode::Baseline &&
          tasks[j].seed == tasks[i].seed && tasks[j].power == tasks[i].power)
        base = &raw[j];
    if (!base) throw std::logic_error("ae-l2-sweep: missing baseline pair");
    RunRow d = raw[i];
    d.mode = std::string(to_string(tasks[i].mode)) + "-delta";
    d.mi_bits = raw[i].mi_bits - base->mi_bits;
    d.eta = raw[i].eta - base->eta;
    const double hw = 0.5 * (raw[i].ci_high - raw[i].ci_low) +
                      0.5 * (base->ci_high - base->ci_low);
    d.ci_low = d.eta - hw;
    d.ci_high = d.eta + hw;
    rows.push_back(d);
  }
  return rows;
}

// ------------------------------------------------------- baseline variants

MetricsResult baseline_variant_eval(const ExperimentConfig& cfg,
                                    const std::string& variant,
                                    double power_dbm, std::uint64_t seed) {
  cfg.validate();
  const SamplingGrid grid = SamplingGrid::make(
      cfg.sample_rate_hz, cfg.symbol_rate_hz, cfg.symbols_per_frame);
  const Constellation constellation = make_constellation(cfg);
  const std::size_t m_order = constellation.size();
  const double p_avg = dbm_to_watt(power_dbm);

  DbpConfig dbp_cfg;
  dbp_cfg.n_steps_per_km = 1.0 / cfg.ssfm.step_km;
  if (variant == "dbp-reduced") dbp_cfg.oversampling_hz = cfg.dbp_reduced_rate_hz;
  else if (variant != "dbp-full" && variant != "cdc")
    throw std::invalid_argument("unknown baseline variant '" + variant + "'");

  Rng rng = Rng(seed).fork(11);
  std::vector<std::vector<LabeledSymbol>> frames(cfg.eval_frames);
  for (std::size_t f = 0; f < cfg.eval_frames; ++f) {
    std::vector<std::uint32_t> indices(cfg.symbols_per_frame);
    for (auto& s : indices)
      s = rng.uniform_int(static_cast<std::uint32_t>(m_order));
    const SymbolFrame tx = map_symbols(indices, constellation);
    Signal x = normalize_power(
        pulse_shape_rrc0(upsample(tx, grid), cfg.symbol_rate_hz), p_avg);

    // full-band capture: the DBP variants differ only in their own
    // internal resampling, not in an external ADC cut
    Signal y = ssfm_propagate(x, cfg.fiber, cfg.l1_km, cfg.ssfm, rng);

    Signal r = variant == "cdc"
                   ? cdc(y, cfg.fiber.beta2_ps2_per_km, cfg.l1_km)
                   : dbp(y, cfg.fiber, cfg.l1_km, dbp_cfg);
    const SymbolFrame rx =
        downsample(pulse_shape_rrc0(r, cfg.symbol_rate_hz));

    std::vector<LabeledSymbol> frame(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i)
      frame[i] = {indices[i], rx.symbols[i] / std::sqrt(p_avg)};
    frames[f] = std::move(frame);
  }
  Rng rng_boot = Rng(seed).fork(12);
  return evaluate_frames(frames, m_order, cfg.symbol_rate_hz,
                         cfg.symbol_rate_hz, rng_boot);
}

std::vector<RunRow> run_baseline_curves(const ExperimentConfig& cfg) {
  cfg.validate();
  static const char* kVariants[] = {"cdc", "dbp-full", "dbp-reduced"};

  struct Task {
    std::string variant;
    double power;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const char* v : kVariants)
    for (double power : cfg.power_dbm)
      for (std::uint64_t seed : cfg.seeds) tasks.push_back({v, power, seed});

  std::vector<RunRow> rows(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t ti) {
    const Task& task = tasks[ti];
    Stopwatch watch(cfg.record_timing);
    const MetricsResult m =
        baseline_variant_eval(cfg, task.variant, task.power, task.seed);
    rows[ti] = {"baseline-curves", task.variant, task.power, 0.0,
                task.seed,         m.mi_bits,    m.eta_bits_s_hz,
                m.ci_low,          m.ci_high,    watch.seconds()};
  });
  return rows;
}

// ------------------------------------------------------------- power sweep

std::vector<RunRow> run_ae_power_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const double l2 = cfg.l2_km.empty() ? 120.0 : cfg.l2_km.front();

  struct Task {
    std::string name;
    bool trained;
    bool train_pre, train_comb;
    LinkMode mode;
    double power;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double power : cfg.power_dbm)
    for (std::uint64_t seed : cfg.seeds) {
      for (const char* v : {"cdc", "dbp-full", "dbp-reduced"})
        tasks.push_back({v, false, false, false, LinkMode::Baseline, power, seed});
      for (LinkMode mode : cfg.modes) {
        const std::string tag =
            mode == LinkMode::Baseline ? "" : std::string("-") + to_string(mode);
        tasks.push_back({"aec" + tag, true, false, true, mode, power, seed});
        tasks.push_back({"aepc" + tag, true, true, true, mode, power, seed});
        // predistortion-only has no receiver combining stage, so no
        // two-tap variants
        if (mode == LinkMode::Baseline)
          tasks.push_back({"aep", true, true, false, mode, power, seed});
      }
    }

  std::vector<RunRow> rows(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t ti) {
    const Task& task = tasks[ti];
    Stopwatch watch(cfg.record_timing);
    if (!task.trained) {
      const MetricsResult m =
          baseline_variant_eval(cfg, task.name, task.power, task.seed);
      rows[ti] = {"ae-power-sweep", task.name, task.power, 0.0,
                  task.seed,        m.mi_bits, m.eta_bits_s_hz,
                  m.ci_low,         m.ci_high, watch.seconds()};
      return;
    }
    const double run_l2 = task.mode == LinkMode::Baseline ? 0.0 : l2;
    TrainConfig tc =
        train_config_from(cfg, task.mode, run_l2, task.power, task.seed);
    tc.train_predistort = task.train_pre;
    tc.train_combine = task.train_comb;
    const TransceiverParams p0 = initial_params(cfg, task.seed);
    rows[ti] = trained_row(cfg, "ae-power-sweep", task.name, tc, p0);
  });
  return rows;
}

// --------------------------------------------------------------- dispatch

namespace {

void write_demo_files(const ExperimentConfig& cfg, const SolitonDemoResult& r) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);

  std::ofstream heat(dir / "soliton-demo-heatmap.csv", std::ios::binary);
  heat << "# config_hash=" << cfg.hash_hex() << "\n"
       << "z_km,f_ghz,intensity\n";
  for (std::size_t i = 0; i < r.evolution.z_km.size(); ++i)
    for (std::size_t k = 0; k < r.evolution.f_hz.size(); ++k)
      heat << fmt(r.evolution.z_km[i], 3) << ','
           << fmt(r.evolution.f_hz[k] * 1e-9, 4) << ','
           << fmt(r.evolution.intensity[i][k], 6) << '\n';

  std::ofstream energy(dir / "soliton-demo-energy.csv", std::ios::binary);
  energy << "# config_hash=" << cfg.hash_hex() << "\n"
         << "z_km,inband_fraction\n";
  for (std::size_t i = 0; i < r.z_km.size(); ++i)
    energy << fmt(r.z_km[i], 3) << ',' << fmt(r.inband_fraction[i], 8) << '\n';

  std::ofstream summary(dir / "soliton-demo-period.csv", std::ios::binary);
  summary << "# config_hash=" << cfg.hash_hex() << "\n"
          << "measured_period_km,predicted_period_km\n"
          << fmt(r.measured_period_km, 3) << ','
          << fmt(r.predicted_period_km, 3) << '\n';
}

}  // namespace

std::vector<RunRow> run_scenario(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);

  if (cfg.scenario == "soliton-demo") {
    write_demo_files(cfg, run_soliton_demo(cfg));
    return {};
  }

  std::vector<RunRow> rows;
  if (cfg.scenario == "soliton-l2-sweep") rows = run_soliton_l2_sweep(cfg);
  else if (cfg.scenario == "ae-l2-sweep") rows = run_ae_l2_sweep(cfg);
  else if (cfg.scenario == "ae-power-sweep") rows = run_ae_power_sweep(cfg);
  else if (cfg.scenario == "baseline-curves") rows = run_baseline_curves(cfg);
  else throw std::invalid_argument("unknown scenario " + cfg.scenario);

  const std::filesystem::path out =
      std::filesystem::path(cfg.out_dir) / (cfg.scenario + ".csv");
  write_run_csv(out.string(), cfg, rows);
  return rows;
}

}  // namespace zdiv
