#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "zdiv/gmm.hpp"
#include "zdiv/signal.hpp"

using namespace zdiv;

namespace {

std::vector<LabeledSymbol> awgn_set(const Constellation& c, double noise_var,
                                    std::size_t n, Rng& rng) {
  std::vector<LabeledSymbol> out(n);
  for (auto& p : out) {
    p.label = rng.uniform_int(static_cast<std::uint32_t>(c.size()));
    p.value = c.points[p.label] + rng.normal_complex(noise_var);
  }
  return out;
}

// Exact BPSK mutual information over a real AWGN channel with noise
// variance v, by trapezoidal integration of 1 - E[log2(1 + e^{-2y/v})].
double bpsk_mi_exact(double v) {
  const double sd = std::sqrt(v);
  const int n = 20000;
  const double lo = 1.0 - 10.0 * sd, hi = 1.0 + 10.0 * sd;
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = lo + h * i;
    const double pdf = std::exp(-(y - 1.0) * (y - 1.0) / (2.0 * v)) /
                       std::sqrt(2.0 * std::numbers::pi * v);
    const double val = pdf * std::log2(1.0 + std::exp(-2.0 * y / v));
    acc += (i == 0 || i == n) ? 0.5 * val : val;
  }
  return 1.0 - acc * h;
}

}  // namespace

TEST_CASE("fit recovers class statistics") {
  Rng rng(1);
  Constellation c;
  c.points = {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)};
  auto data = awgn_set(c, 0.04, 40000, rng);
  auto g = fit_gmm(data, 4);
  REQUIRE(g.n_classes() == 4);
  for (std::size_t m = 0; m < 4; ++m) {
    const auto& st = g.classes[m];
    CHECK(std::abs(st.mean_re - c.points[m].real()) < 0.01);
    CHECK(std::abs(st.mean_im - c.points[m].imag()) < 0.01);
    CHECK(st.c_rr == doctest::Approx(0.02).epsilon(0.1));
    CHECK(st.c_ii == doctest::Approx(0.02).epsilon(0.1));
    CHECK(std::abs(st.c_ri) < 0.002);
  }
}

TEST_CASE("fit rejects starved classes") {
  Rng rng(2);
  std::vector<LabeledSymbol> data;
  for (int i = 0; i < 100; ++i)
    data.push_back({0, rng.normal_complex(1.0)});
  data.push_back({1, cplx(1, 1)});
  CHECK_THROWS(fit_gmm(data, 2));
  CHECK_THROWS(fit_gmm(data, 0));
}

TEST_CASE("soft demap is a normalized posterior") {
  Rng rng(3);
  Constellation c;
  c.points = {cplx(1, 0), cplx(-1, 0)};
  auto g = fit_gmm(awgn_set(c, 0.1, 4000, rng), 2);
  auto p = soft_demap(g, cplx(0.9, 0.05));
  REQUIRE(p.size() == 2);
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[0] > 0.99);
  auto far = soft_demap(g, cplx(-40.0, 0.0));
  CHECK(far[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mi approaches log2 M at vanishing noise and 0 in pure noise") {
  Rng rng(4);
  auto c = Constellation::rings(4, 4);
  auto clean = awgn_set(c, 1e-6, 8000, rng);
  auto g = fit_gmm(clean, 16);
  CHECK(mutual_information_bits(g, awgn_set(c, 1e-6, 8000, rng)) ==
        doctest::Approx(4.0).epsilon(1e-3));

  // labels carry no information about the observation
  std::vector<LabeledSymbol> junk(20000);
  for (auto& p : junk) {
    p.label = rng.uniform_int(16);
    p.value = rng.normal_complex(1.0);
  }
  auto g0 = fit_gmm(junk, 16);
  const double mi0 = mutual_information_bits(g0, junk);
  CHECK(mi0 >= 0.0);
  CHECK(mi0 < 0.05);
}

TEST_CASE("bpsk awgn matches the integrated oracle") {
  Rng rng(5);
  Constellation c;
  c.points = {cplx(1, 0), cplx(-1, 0)};
  // complex noise variance 1.0 puts 0.5 in each quadrature; only the real
  // quadrature is informative for BPSK
  const double exact = bpsk_mi_exact(0.5);
  auto train = awgn_set(c, 1.0, 60000, rng);
  auto test = awgn_set(c, 1.0, 60000, rng);
  auto g = fit_gmm(train, 2);
  const double est = mutual_information_bits(g, test);
  CHECK(est == doctest::Approx(exact).epsilon(0.02));

  const double exact_3db = bpsk_mi_exact(0.25);
  auto train2 = awgn_set(c, 0.5, 60000, rng);
  auto test2 = awgn_set(c, 0.5, 60000, rng);
  const double est2 = mutual_information_bits(fit_gmm(train2, 2), test2);
  CHECK(est2 == doctest::Approx(exact_3db).epsilon(0.02));
  CHECK(est2 > est);
}

TEST_CASE("mi is invariant under rotation and scaling of the observations") {
  Rng rng(6);
  auto c = Constellation::rings(2, 8);
  auto train = awgn_set(c, 0.2, 30000, rng);
  auto test = awgn_set(c, 0.2, 30000, rng);
  const double base = mutual_information_bits(fit_gmm(train, 16), test);

  const cplx u = std::polar(3.7, 1.1);
  auto train_r = train;
  auto test_r = test;
  for (auto& p : train_r) p.value *= u;
  for (auto& p : test_r) p.value *= u;
  const double rotated = mutual_information_bits(fit_gmm(train_r, 16), test_r);
  CHECK(rotated == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("spectral efficiency") {
  CHECK(spectral_efficiency(4.0, 20e9, 20e9) == doctest::Approx(4.0));
  CHECK(spectral_efficiency(4.0, 20e9, 40e9) == doctest::Approx(2.0));
  CHECK_THROWS(spectral_efficiency(4.0, 20e9, 0.0));
}

TEST_CASE("evaluate_frames splits, bounds, and bootstrap") {
  Rng rng(7);
  Constellation c;
  c.points = {cplx(1, 0), cplx(-1, 0)};
  std::vector<std::vector<LabeledSymbol>> frames;
  for (int f = 0; f < 40; ++f) frames.push_back(awgn_set(c, 0.5, 512, rng));
  auto res = evaluate_frames(frames, 2, 20e9, 20e9, rng);
  CHECK(res.n_symbols == 20 * 512);
  CHECK(res.ci_low <= res.mi_bits);
  CHECK(res.mi_bits <= res.ci_high);
  CHECK(res.ci_high - res.ci_low < 0.1);
  CHECK(res.mi_bits == doctest::Approx(bpsk_mi_exact(0.25)).epsilon(0.03));
  CHECK(res.eta_bits_s_hz == doctest::Approx(res.mi_bits));

  // deterministic given the rng seed
  Rng ra(9), rb(9);
  auto r1 = evaluate_frames(frames, 2, 20e9, 20e9, ra);
  auto r2 = evaluate_frames(frames, 2, 20e9, 20e9, rb);
  CHECK(r1.ci_low == r2.ci_low);
  CHECK(r1.ci_high == r2.ci_high);

  CHECK_THROWS(evaluate_frames({frames[0]}, 2, 20e9, 20e9, rng));
}
