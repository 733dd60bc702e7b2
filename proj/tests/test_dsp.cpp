#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "zdiv/dsp.hpp"

using namespace zdiv;
using test::rel_error;
using test::total_power;

namespace {

SamplingGrid grid() { return SamplingGrid::make(320e9, 20e9, 16); }

Signal shaped_frame(Rng& rng, double p_avg_w, const SamplingGrid& g) {
  SymbolFrame f;
  f.symbols.resize(g.n_symbols());
  for (auto& s : f.symbols) s = rng.normal_complex(1.0);
  auto x = pulse_shape_rrc0(upsample(f, g), g.symbol_rate_hz);
  return normalize_power(x, p_avg_w);
}

}  // namespace

TEST_CASE("cdc inverts linear propagation") {
  FiberSpec f;
  f.gamma_per_w_km = 0.0;
  SsfmConfig cfg;
  cfg.step_km = 1.0;
  Rng rng(3);
  auto x = shaped_frame(rng, 1e-3, grid());
  auto y = ssfm_propagate(x, f, 100.0, cfg, rng);
  auto back = cdc(y, f.beta2_ps2_per_km, 100.0);
  CHECK(rel_error(back.samples, x.samples) < 1e-10);
}

TEST_CASE("cdc group properties") {
  Rng rng(4);
  auto x = shaped_frame(rng, 1e-3, grid());
  auto id = cdc(x, -21.67, 0.0);
  CHECK(rel_error(id.samples, x.samples) == 0.0);
  auto fwd_back = cdc(cdc(x, -21.67, 250.0), -21.67, -250.0);
  CHECK(rel_error(fwd_back.samples, x.samples) < 1e-12);
  // unitary
  auto y = cdc(x, -21.67, 1234.0);
  CHECK(total_power(y.samples) == doctest::Approx(total_power(x.samples)).epsilon(1e-12));
}

TEST_CASE("dbp inverts noiseless propagation on the same grid") {
  FiberSpec f;
  SsfmConfig cfg;
  cfg.step_km = 0.5;
  Rng rng(5);
  auto x = shaped_frame(rng, 3.16e-3, grid());
  auto y = ssfm_propagate(x, f, 200.0, cfg, rng);
  DbpConfig d;
  d.n_steps_per_km = 2.0;
  auto back = dbp(y, f, 200.0, d);
  CHECK(rel_error(back.samples, x.samples) < 1e-9);
}

TEST_CASE("dbp on a linear channel reduces to cdc") {
  FiberSpec f;
  f.gamma_per_w_km = 0.0;
  Rng rng(6);
  auto x = shaped_frame(rng, 1e-3, grid());
  DbpConfig d;
  d.n_steps_per_km = 1.0;
  auto via_dbp = dbp(x, f, 120.0, d);
  auto via_cdc = cdc(x, f.beta2_ps2_per_km, 120.0);
  CHECK(rel_error(via_dbp.samples, via_cdc.samples) < 1e-12);
}

TEST_CASE("band-limited dbp is lossy, full-rate dbp is not") {
  FiberSpec f;
  SsfmConfig cfg;
  cfg.step_km = 0.5;
  Rng rng(7);
  auto g = grid();
  auto x = shaped_frame(rng, 3.16e-3, g);  // 5 dBm
  auto y = ssfm_propagate(x, f, 1000.0, cfg, rng);

  DbpConfig full;
  full.n_steps_per_km = 2.0;
  auto rec_full = dbp(y, f, 1000.0, full);

  DbpConfig reduced = full;
  reduced.oversampling_hz = 40e9;
  auto rec_reduced = dbp(y, f, 1000.0, reduced);
  auto x_reduced = resample_to(x, 40e9);

  const double err_full = rel_error(rec_full.samples, x.samples);
  const double err_reduced = rel_error(rec_reduced.samples, x_reduced.samples);
  CHECK(err_full < 1e-9);
  CHECK(err_reduced > err_full);

  // error decreases monotonically with DBP bandwidth
  DbpConfig mid = full;
  mid.oversampling_hz = 80e9;
  auto rec_mid = dbp(y, f, 1000.0, mid);
  auto x_mid = resample_to(x, 80e9);
  const double err_mid = rel_error(rec_mid.samples, x_mid.samples);
  CHECK(err_mid < err_reduced);
  CHECK(err_mid > err_full);
}

TEST_CASE("split predistortion composes to full dbp") {
  FiberSpec f;
  SsfmConfig cfg;
  cfg.step_km = 0.5;
  Rng rng(8);
  auto x = shaped_frame(rng, 2e-3, grid());

  DbpConfig half;
  half.n_steps_per_km = 2.0;
  half.split_fraction = 0.5;
  auto tx = split_dbp_predistort(x, f, 200.0, half);
  auto rx_in = ssfm_propagate(tx, f, 200.0, cfg, rng);
  DbpConfig rx_cfg;
  rx_cfg.n_steps_per_km = 2.0;
  auto rec = dbp(rx_in, f, 100.0, rx_cfg);
  CHECK(rel_error(rec.samples, x.samples) < 1e-9);

  DbpConfig zero = half;
  zero.split_fraction = 0.0;
  auto same = split_dbp_predistort(x, f, 200.0, zero);
  CHECK(rel_error(same.samples, x.samples) == 0.0);

  DbpConfig one = half;
  one.split_fraction = 1.0;
  auto pre = split_dbp_predistort(x, f, 200.0, one);
  auto arrived = ssfm_propagate(pre, f, 200.0, cfg, rng);
  CHECK(rel_error(arrived.samples, x.samples) < 1e-9);
}

TEST_CASE("resample_to validates ratios") {
  Rng rng(9);
  auto x = shaped_frame(rng, 1e-3, grid());
  CHECK_THROWS(resample_to(x, 333e8));        // non-integer ratio
  CHECK_THROWS(resample_to(x, 640e9));        // above the sample rate
  auto same = resample_to(x, x.grid.sample_rate_hz);
  CHECK(rel_error(same.samples, x.samples) == 0.0);
  auto down = resample_to(x, 40e9);
  CHECK(down.grid.samples_per_symbol == 2);
  CHECK(down.samples.size() == x.samples.size() / 8);
}
