#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "test_util.hpp"
#include "zdiv/signal.hpp"

using namespace zdiv;
using test::rel_error;
using test::total_power;

namespace {
SamplingGrid small_grid(std::size_t sps = 4, std::size_t n_sym = 8) {
  return SamplingGrid::make(20e9 * static_cast<double>(sps), 20e9, n_sym);
}
}  // namespace

TEST_CASE("grid invariants") {
  auto g = SamplingGrid::make(1e12, 20e9, 10);
  CHECK(g.samples_per_symbol == 50);
  CHECK(g.n_samples == 500);
  CHECK_THROWS(SamplingGrid::make(1e12, 21e9, 10));  // non-integer ratio
}

TEST_CASE("map_symbols") {
  Constellation c;
  c.points = {cplx(1, 0), cplx(-1, 0)};
  c.validate();
  auto f = map_symbols({0, 1}, c);
  CHECK(f.symbols[0] == cplx(1, 0));
  CHECK(f.symbols[1] == cplx(-1, 0));
  CHECK_THROWS(map_symbols({2}, c));

  auto f2 = map_symbols({0, 0}, c);
  CHECK(f2.symbols[0] == f2.symbols[1]);
}

TEST_CASE("ring constellation mean power") {
  for (auto [nr, np] : {std::pair<std::size_t, std::size_t>{4, 4}, {16, 16}}) {
    auto c = Constellation::rings(nr, np);
    CHECK(c.size() == nr * np);
    double p = 0.0;
    for (auto& s : c.points) p += std::norm(s);
    CHECK(p / static_cast<double>(c.size()) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Monte-Carlo: mean power of a uniform random frame close to 1
  auto c = Constellation::rings(16, 16);
  Rng rng(7);
  double p = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    p += std::norm(c.points[rng.uniform_int(static_cast<std::uint32_t>(c.size()))]);
  CHECK(p / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("upsample zero stuffing") {
  auto g2 = SamplingGrid::make(2.0, 1.0, 1);
  SymbolFrame f;
  f.symbols = {cplx(1, 0)};
  auto x = upsample(f, g2);
  CHECK(x.samples[0] == cplx(1, 0));
  CHECK(x.samples[1] == cplx(0, 0));

  auto g3 = SamplingGrid::make(3.0, 1.0, 2);
  SymbolFrame f2;
  f2.symbols = {cplx(1, 0), cplx(0, 1)};
  auto x2 = upsample(f2, g3);
  CHECK(x2.samples[0] == cplx(1, 0));
  CHECK(x2.samples[3] == cplx(0, 1));
  CHECK(total_power(x2.samples) == doctest::Approx(2.0));
}

TEST_CASE("brickwall idempotent, tone rejection, self-adjoint") {
  auto g = small_grid(8, 16);
  Rng rng(3);
  auto x = test::random_signal(g, rng);
  auto once = brickwall_filter(x, g.symbol_rate_hz);
  auto twice = brickwall_filter(once, g.symbol_rate_hz);
  CHECK(rel_error(twice.samples, once.samples) < 1e-13);

  // tone outside the passband
  Signal tone;
  tone.grid = g;
  tone.samples.resize(g.n_samples);
  // bin-aligned tone near 0.4 * fs
  const double df = g.sample_rate_hz / static_cast<double>(g.n_samples);
  const double f_tone = std::round(0.4 * static_cast<double>(g.n_samples)) * df;
  for (std::size_t i = 0; i < g.n_samples; ++i) {
    const double arg = 2.0 * std::numbers::pi * f_tone * static_cast<double>(i) / g.sample_rate_hz;
    tone.samples[i] = cplx(std::cos(arg), std::sin(arg));
  }
  auto gone = brickwall_filter(tone, 0.2 * g.sample_rate_hz);
  CHECK(total_power(gone.samples) < 1e-20);

  // <Fx, y> == <x, Fy>
  auto y = test::random_signal(g, rng);
  auto fx = brickwall_filter(x, g.symbol_rate_hz);
  auto fy = brickwall_filter(y, g.symbol_rate_hz);
  cplx ip1(0, 0), ip2(0, 0);
  for (std::size_t i = 0; i < g.n_samples; ++i) {
    ip1 += std::conj(fx.samples[i]) * y.samples[i];
    ip2 += std::conj(x.samples[i]) * fy.samples[i];
  }
  CHECK(std::abs(ip1 - ip2) / std::abs(ip2) < 1e-12);
}

TEST_CASE("downsample and perfect reconstruction") {
  auto g3 = SamplingGrid::make(3.0, 1.0, 2);
  Signal x;
  x.grid = g3;
  x.samples = {cplx(1, 0), 0, 0, cplx(0, 1), 0, 0};
  auto f0 = downsample(x, 0);
  CHECK(f0.symbols[0] == cplx(1, 0));
  CHECK(f0.symbols[1] == cplx(0, 1));
  auto f1 = downsample(x, 1);
  CHECK(f1.symbols[0] == cplx(0, 0));
  CHECK_THROWS(downsample(x, 3));

  // roll-off-0 shaping on a periodic frame is invertible up to the 1/sps gain
  auto g = small_grid(8, 32);
  Rng rng(11);
  SymbolFrame s;
  s.symbols.resize(g.n_symbols());
  for (auto& v : s.symbols) v = rng.normal_complex(1.0);
  auto shaped = pulse_shape_rrc0(upsample(s, g), g.symbol_rate_hz);
  auto back = downsample(shaped, 0);
  for (auto& v : back.symbols) v *= static_cast<double>(g.samples_per_symbol);
  CHECK(rel_error(back.symbols, s.symbols) < 1e-10);

  // the shaped signal is already inside the ADC band
  auto adc = brickwall_filter(shaped, g.symbol_rate_hz);
  CHECK(rel_error(adc.samples, shaped.samples) < 1e-13);
}

TEST_CASE("normalize and measure power") {
  auto g2 = SamplingGrid::make(2.0, 1.0, 1);
  Signal x;
  x.grid = g2;
  x.samples = {cplx(2, 0), cplx(0, 0)};
  auto y = normalize_power(x, 1.0);
  CHECK(std::abs(y.samples[0]) == doctest::Approx(std::sqrt(2.0)));
  CHECK(measure_power(y).watt == doctest::Approx(1.0));

  Signal ones;
  ones.grid = g2;
  ones.samples = {cplx(1, 0), cplx(1, 0)};
  auto z = normalize_power(ones, 1.0);
  CHECK(rel_error(z.samples, ones.samples) < 1e-14);
  CHECK(measure_power(ones).dbm == doctest::Approx(30.0));

  auto mw = normalize_power(ones, 1e-3);
  CHECK(measure_power(mw).watt == doctest::Approx(1e-3).epsilon(1e-12));
  auto m5 = normalize_power(ones, dbm_to_watt(-5.0));
  CHECK(measure_power(m5).watt == doctest::Approx(3.1622776601683794e-4).epsilon(1e-10));

  // idempotence at the same target
  Rng rng(5);
  auto r = test::random_signal(small_grid(), rng);
  auto n1 = normalize_power(r, 2.5e-3);
  auto n2 = normalize_power(n1, 2.5e-3);
  CHECK(rel_error(n2.samples, n1.samples) < 1e-14);

  Signal zero;
  zero.grid = g2;
  zero.samples = {cplx(0, 0), cplx(0, 0)};
  CHECK_THROWS(normalize_power(zero, 1.0));
  CHECK(measure_power(zero).watt == 0.0);
  CHECK(std::isinf(measure_power(zero).dbm));
}

TEST_CASE("parseval consistency") {
  auto g = small_grid(4, 64);
  Rng rng(2);
  auto x = test::random_signal(g, rng);
  const double e_time = total_power(x.samples);
  auto spec = fft(x.samples);
  const double e_freq = total_power(spec) / static_cast<double>(g.n_samples);
  CHECK(std::abs(e_time - e_freq) / e_time < 1e-10);
}

TEST_CASE("binary round trip and csv") {
  auto g = small_grid();
  Rng rng(9);
  auto x = test::random_signal(g, rng);
  x.z_km = 123.5;
  const std::string path = "signal_roundtrip.bin";
  save_signal(x, path);
  auto y = load_signal(path, g.symbol_rate_hz);
  CHECK(y.z_km == x.z_km);
  CHECK(y.grid.sample_rate_hz == x.grid.sample_rate_hz);
  REQUIRE(y.samples.size() == x.samples.size());
  CHECK(rel_error(y.samples, x.samples) == 0.0);

  std::ostringstream os;
  write_signal_csv(x, os);
  CHECK(os.str().substr(0, 12) == "index,re,im\n");
}
