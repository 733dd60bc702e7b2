#include "zdiv/fiber.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace zdiv {

// ---------------------------------------------------------------- Rng

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

cplx Rng::normal_complex(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return cplx(s * re, s * im);
}

std::uint32_t Rng::uniform_int(std::uint32_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_int: zero bound");
  // rejection sampling to avoid modulo bias
  const std::uint64_t limit = (~0ULL / bound) * bound;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return static_cast<std::uint32_t>(v % bound);
}

Rng Rng::fork(std::uint64_t stream_id) const {
  std::uint64_t mix = seed_;
  mix ^= 0xd1b54a32d192ed03ULL + stream_id * 0x9e3779b97f4a7c15ULL;
  std::uint64_t sm = mix;
  return Rng(splitmix64(sm));
}

// ---------------------------------------------------------------- fiber

void FiberSpec::validate() const {
  // Negative gamma/beta2 are permitted so the same solver runs reversed
  // for digital backpropagation.
  if (alpha_db_per_km < 0.0 || f0_hz <= 0.0)
    throw std::invalid_argument("FiberSpec: invalid physical constants");
  if (nsp_raman != 0.0 && nsp_raman < 1.0)
    throw std::invalid_argument("FiberSpec: nsp must be 0 or >= 1");
}

double FiberSpec::alpha_linear_per_km() const {
  return alpha_db_per_km * std::numbers::ln10 / 10.0;
}

void SsfmConfig::validate() const {
  if (step_km <= 0.0) throw std::invalid_argument("SsfmConfig: step must be positive");
  if (noise_enabled && noise_bandwidth_hz <= 0.0)
    throw std::invalid_argument("SsfmConfig: noise bandwidth required when noise is on");
}

double EdfaSpec::gain_linear() const { return std::pow(10.0, gain_db / 10.0); }

void EdfaSpec::validate() const {
  if (gain_db < 0.0) throw std::invalid_argument("EdfaSpec: gain must be >= 0 dB");
}

double ase_sigma2_watt(const FiberSpec& fiber, double dz_km, double bandwidth_hz) {
  if (dz_km <= 0.0 || bandwidth_hz <= 0.0)
    throw std::invalid_argument("ase_sigma2: dz and B must be positive");
  return fiber.nsp_raman * kPlanck * fiber.f0_hz * fiber.alpha_linear_per_km() *
         dz_km * bandwidth_hz;
}

namespace {

// Frequency-domain phase of a linear step exp(-j (beta2/2) w^2 dz),
// w in rad/ps, beta2 in ps^2/km, dz in km.
cvec dispersion_phase(const SamplingGrid& grid, double beta2, double dz_km) {
  const std::size_t n = grid.n_samples;
  cvec phase(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f_thz = bin_frequency_hz(k, n, grid.sample_rate_hz) * 1e-12;
    const double w = 2.0 * std::numbers::pi * f_thz;
    const double arg = -0.5 * beta2 * w * w * dz_km;
    phase[k] = cplx(std::cos(arg), std::sin(arg));
  }
  return phase;
}

}  // namespace

Signal ssfm_propagate(const Signal& x, const FiberSpec& fiber, double length_km,
                      const SsfmConfig& cfg, Rng& rng, const StepObserver& observer) {
  fiber.validate();
  cfg.validate();
  if (length_km < 0.0) throw std::invalid_argument("ssfm: negative length");
  Signal out = x;
  if (length_km == 0.0) return out;

  const double steps_exact = length_km / cfg.step_km;
  const auto n_steps = static_cast<std::size_t>(std::llround(steps_exact));
  if (std::abs(steps_exact - static_cast<double>(n_steps)) > 1e-6)
    throw std::invalid_argument("ssfm: length must be an integer multiple of the step");

  const cvec half_phase = dispersion_phase(x.grid, fiber.beta2_ps2_per_km, cfg.step_km / 2.0);
  const double gamma_dz = fiber.gamma_per_w_km * cfg.step_km;
  const bool noise = cfg.noise_enabled && fiber.nsp_raman > 0.0;
  const double sigma2 =
      noise ? ase_sigma2_watt(fiber, cfg.step_km, cfg.noise_bandwidth_hz) : 0.0;

  cvec& q = out.samples;
  const std::size_t n = q.size();
  for (std::size_t step = 0; step < n_steps; ++step) {
    fft_inplace(q);
    for (std::size_t i = 0; i < n; ++i) q[i] *= half_phase[i];
    ifft_inplace(q);
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = -gamma_dz * std::norm(q[i]);
      q[i] *= cplx(std::cos(arg), std::sin(arg));
    }
    fft_inplace(q);
    for (std::size_t i = 0; i < n; ++i) q[i] *= half_phase[i];
    ifft_inplace(q);
    if (noise) {
      for (std::size_t i = 0; i < n; ++i) q[i] += rng.normal_complex(sigma2);
    }
    if (observer || (step + 1 == n_steps) || (step % 64 == 0)) {
      double power = 0.0, peak = 0.0;
      for (const cplx& s : q) {
        const double p = std::norm(s);
        power += p;
        if (p > peak) peak = p;
      }
      power /= static_cast<double>(n);
      const double z = out.z_km + static_cast<double>(step + 1) * cfg.step_km;
      if (!std::isfinite(power)) {
        std::ostringstream msg;
        msg << "ssfm: non-finite field at z=" << z << " km (step " << step + 1
            << "/" << n_steps << ", peak=" << peak << " W)";
        throw std::runtime_error(msg.str());
      }
      if (observer) observer(z, power, peak);
    }
  }
  out.z_km += length_km;
  return out;
}

std::pair<Signal, Signal> coupler_split(const Signal& x) {
  Signal a = x;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (cplx& s : a.samples) s *= inv_sqrt2;
  return {a, a};
}

Signal edfa_amplify(const Signal& x, const EdfaSpec& e, double bandwidth_hz, Rng& rng) {
  e.validate();
  Signal out = x;
  const double g = std::sqrt(e.gain_linear());
  const double sigma2 =
      e.nsp_edfa * kPlanck * e.f0_hz * (e.gain_linear() - 1.0) * bandwidth_hz;
  for (cplx& s : out.samples) s *= g;
  if (sigma2 > 0.0) {
    for (cplx& s : out.samples) s += rng.normal_complex(sigma2);
  }
  return out;
}

}  // namespace zdiv
