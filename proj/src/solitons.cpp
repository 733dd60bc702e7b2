#include "zdiv/solitons.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zdiv {

void SolitonSpec::validate() const {
  if (t0_ps <= 0.0) throw std::invalid_argument("SolitonSpec: t0 must be positive");
  if (etas.empty()) throw std::invalid_argument("SolitonSpec: no eigenvalues");
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (etas[i] <= 0.0) throw std::invalid_argument("SolitonSpec: etas must be positive");
    if (i > 0 && etas[i] <= etas[i - 1])
      throw std::invalid_argument("SolitonSpec: etas must be strictly increasing");
  }
}

double soliton_power_scale_watt(double t0_ps, const FiberSpec& fiber) {
  if (fiber.gamma_per_w_km <= 0.0)
    throw std::invalid_argument("soliton scale: gamma must be positive");
  return std::abs(fiber.beta2_ps2_per_km) / (fiber.gamma_per_w_km * t0_ps * t0_ps);
}

double dispersion_length_km(double t0_ps, const FiberSpec& fiber) {
  return t0_ps * t0_ps / std::abs(fiber.beta2_ps2_per_km);
}

Signal sech_soliton(double amplitude, double t0_ps, const FiberSpec& fiber,
                    const SamplingGrid& grid, double center_ps) {
  if (amplitude <= 0.0) throw std::invalid_argument("sech_soliton: amplitude must be positive");
  grid.validate();
  const double scale = amplitude * std::sqrt(soliton_power_scale_watt(t0_ps, fiber));
  Signal out;
  out.grid = grid;
  out.samples.resize(grid.n_samples);
  const double dt = grid.dt_ps();
  const double t_mid = 0.5 * static_cast<double>(grid.n_samples) * dt;
  for (std::size_t i = 0; i < grid.n_samples; ++i) {
    const double t = static_cast<double>(i) * dt - t_mid - center_ps;
    out.samples[i] = cplx(scale / std::cosh(t / t0_ps), 0.0);
  }
  return out;
}

namespace {

using mat2 = std::array<cplx, 4>;  // row-major [a b; c d]

// Iterated Darboux transformation from the zero seed. Produces the
// normalized bound-state profile q(tau) whose ZS spectrum is {j eta_k}.
cvec darboux_profile(const std::vector<double>& etas, const std::vector<double>& tau) {
  const std::size_t n = tau.size();
  cvec q(n, cplx(0.0, 0.0));
  // Dressing matrices S_j(tau) of the previous folds.
  std::vector<std::vector<mat2>> dressings;

  for (std::size_t fold = 0; fold < etas.size(); ++fold) {
    const double eta = etas[fold];
    const cplx lambda(0.0, eta);
    const cplx lambda_bar(0.0, -eta);
    // Unit-magnitude norming constants with alternating sign; this selects
    // the expanded (z = 0) state of the breathing cycle and reproduces
    // A*sech for the Satsuma-Yajima eigenvalue ladder.
    const double norming = (fold % 2 == 0) ? 1.0 : -1.0;
    std::vector<mat2> s_this(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Zero-seed solution at lambda, scaled by e^{-eta |tau|} for stability.
      const double t = tau[i];
      cplx p1(std::exp(eta * t - eta * std::abs(t)), 0.0);
      cplx p2(norming * std::exp(-eta * t - eta * std::abs(t)), 0.0);
      for (const auto& dressing : dressings) {
        const mat2& s = dressing[i];
        const cplx n1 = lambda * p1 - (s[0] * p1 + s[1] * p2);
        const cplx n2 = lambda * p2 - (s[2] * p1 + s[3] * p2);
        p1 = n1;
        p2 = n2;
      }
      const double det = std::norm(p1) + std::norm(p2);
      // S = H diag(lambda, conj(lambda)) H^{-1}, H = [p1 -conj(p2); p2 conj(p1)]
      mat2& s = s_this[i];
      s[0] = (lambda * std::norm(p1) + lambda_bar * std::norm(p2)) / det;
      s[1] = (lambda - lambda_bar) * p1 * std::conj(p2) / det;
      s[2] = (lambda - lambda_bar) * std::conj(p1) * p2 / det;
      s[3] = (lambda * std::norm(p2) + lambda_bar * std::norm(p1)) / det;
      q[i] += cplx(0.0, 2.0) * (lambda - lambda_bar) * p1 * std::conj(p2) / det;
    }
    dressings.push_back(std::move(s_this));
  }
  return q;
}

}  // namespace

Signal two_soliton_from_eigenvalues(const SolitonSpec& spec, const FiberSpec& fiber,
                                    const SamplingGrid& grid) {
  spec.validate();
  if (spec.etas.size() != 2)
    throw std::invalid_argument("two_soliton: exactly two eigenvalues required");
  if (std::abs(spec.etas[0] - spec.etas[1]) < 1e-12)
    throw std::invalid_argument("two_soliton: degenerate eigenvalues");
  grid.validate();

  const double dt = grid.dt_ps();
  const double t_mid = 0.5 * static_cast<double>(grid.n_samples) * dt;
  std::vector<double> tau(grid.n_samples);
  for (std::size_t i = 0; i < grid.n_samples; ++i)
    tau[i] = (static_cast<double>(i) * dt - t_mid) / spec.t0_ps;

  cvec q_norm = darboux_profile(spec.etas, tau);
  const double scale = std::sqrt(soliton_power_scale_watt(spec.t0_ps, fiber));
  Signal out;
  out.grid = grid;
  out.samples.resize(grid.n_samples);
  for (std::size_t i = 0; i < grid.n_samples; ++i) out.samples[i] = scale * q_norm[i];
  return out;
}

double soliton_period_km(const SolitonSpec& spec, const FiberSpec& fiber) {
  spec.validate();
  if (spec.etas.size() != 2)
    throw std::invalid_argument("soliton_period: exactly two eigenvalues required");
  const double d = spec.etas[1] * spec.etas[1] - spec.etas[0] * spec.etas[0];
  if (d <= 0.0) throw std::invalid_argument("soliton_period: degenerate eigenvalues");
  return std::numbers::pi * dispersion_length_km(spec.t0_ps, fiber) / d;
}

namespace {

// a(j eta) of the discretized ZS problem, piecewise-constant potential.
// The field is conjugated so that the spectrum matches the propagation
// sign convention (the printed NLSE is the conjugate of the standard form).
cplx scattering_a(const cvec& q_norm, double dtau, const cplx& lambda) {
  cplx v1(1.0, 0.0), v2(0.0, 0.0);
  double log_scale = 0.0;
  for (const cplx& qs : q_norm) {
    const cplx qq = std::conj(qs);
    const cplx m11 = cplx(0.0, -1.0) * lambda;
    const cplx mu2 = -(lambda * lambda + cplx(std::norm(qq), 0.0));
    const cplx mu = std::sqrt(mu2);
    cplx ch, shm;  // cosh(mu dt), sinh(mu dt)/mu
    if (std::abs(mu) * dtau < 1e-6) {
      const cplx x2 = mu2 * dtau * dtau;
      ch = 1.0 + x2 / 2.0;
      shm = dtau * (1.0 + x2 / 6.0);
    } else {
      ch = std::cosh(mu * dtau);
      shm = std::sinh(mu * dtau) / mu;
    }
    const cplx n1 = ch * v1 + shm * (m11 * v1 + qq * v2);
    const cplx n2 = ch * v2 + shm * (-std::conj(qq) * v1 - m11 * v2);
    v1 = n1;
    v2 = n2;
    const double mag = std::max(std::abs(v1), std::abs(v2));
    if (mag > 1e100) {
      v1 /= mag;
      v2 /= mag;
      log_scale += std::log(mag);
    }
  }
  const double total_t = dtau * static_cast<double>(q_norm.size());
  // a = v1 * e^{i lambda T}; on the imaginary axis this is a real decay.
  const cplx phase = std::exp(cplx(0.0, 1.0) * lambda * total_t + log_scale);
  return v1 * phase;
}

}  // namespace

std::vector<double> zs_eigenvalues(const Signal& x, double t0_ps, const FiberSpec& fiber) {
  double energy = 0.0;
  for (const cplx& s : x.samples) energy += std::norm(s);
  if (energy <= 0.0) return {};  // no discrete spectrum

  const double amp = 1.0 / std::sqrt(soliton_power_scale_watt(t0_ps, fiber));
  cvec q_norm(x.samples.size());
  double q_max = 0.0;
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    q_norm[i] = amp * x.samples[i];
    q_max = std::max(q_max, std::abs(q_norm[i]));
  }
  const double dtau = x.grid.dt_ps() / t0_ps;

  // Eigenvalues of the focusing problem satisfy eta <= max |q|.
  const double eta_hi = q_max + 0.25;
  const double eta_lo = 1e-3;
  const int n_grid = 400;
  std::vector<double> etas;
  auto a_of = [&](double eta) { return scattering_a(q_norm, dtau, cplx(0.0, eta)); };

  double prev_eta = eta_lo;
  cplx prev_a = a_of(prev_eta);
  double prev_abs = std::abs(prev_a);
  double prev_prev_abs = prev_abs;
  for (int k = 1; k <= n_grid; ++k) {
    const double eta = eta_lo + (eta_hi - eta_lo) * static_cast<double>(k) / n_grid;
    const cplx a = a_of(eta);
    const bool sign_change = (prev_a.real() * a.real() < 0.0);
    if (sign_change) {
      double lo = prev_eta, hi = eta;
      cplx a_lo = prev_a;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const cplx a_mid = a_of(mid);
        if (a_lo.real() * a_mid.real() <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          a_lo = a_mid;
        }
      }
      etas.push_back(0.5 * (lo + hi));
    } else {
      // local |a| minimum without sign change: near-double zero, refine by
      // golden section and accept when |a| collapses
      const double abs_a = std::abs(a);
      if (k >= 2 && prev_abs < prev_prev_abs && prev_abs < abs_a && prev_abs < 1e-3) {
        double lo = prev_eta - (eta - prev_eta), hi = eta;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        for (int it = 0; it < 60; ++it) {
          if (std::abs(a_of(c)) < std::abs(a_of(d))) {
            hi = d;
          } else {
            lo = c;
          }
          c = hi - gr * (hi - lo);
          d = lo + gr * (hi - lo);
        }
        const double cand = 0.5 * (lo + hi);
        if (std::abs(a_of(cand)) < 1e-6 &&
            (etas.empty() || std::abs(etas.back() - cand) > 1e-6))
          etas.push_back(cand);
      }
    }
    prev_prev_abs = prev_abs;
    prev_abs = std::abs(a);
    prev_eta = eta;
    prev_a = a;
  }
  std::sort(etas.begin(), etas.end());
  return etas;
}

SpectralEvolution spectral_evolution(const Signal& x, const FiberSpec& fiber,
                                     double length_km, const SsfmConfig& cfg,
                                     std::size_t n_snapshots) {
  if (n_snapshots < 2) throw std::invalid_argument("spectral_evolution: need >= 2 snapshots");
  SsfmConfig quiet = cfg;
  quiet.noise_enabled = false;
  SpectralEvolution ev;
  const std::size_t n = x.grid.n_samples;
  ev.f_hz.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    ev.f_hz[k] = bin_frequency_hz(k, n, x.grid.sample_rate_hz);

  const double seg = length_km / static_cast<double>(n_snapshots - 1);
  // snap segment length onto the step grid
  const double seg_km = std::max(quiet.step_km,
      quiet.step_km * std::round(seg / quiet.step_km));

  Rng rng(0);
  Signal cur = x;
  for (std::size_t s = 0; s < n_snapshots; ++s) {
    cvec spec = fft(cur.samples);
    std::vector<double> row(n);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      row[k] = std::norm(spec[k]);
      peak = std::max(peak, row[k]);
    }
    if (peak > 0.0)
      for (double& v : row) v /= peak;
    ev.intensity.push_back(std::move(row));
    ev.z_km.push_back(cur.z_km - x.z_km);
    if (s + 1 < n_snapshots) cur = ssfm_propagate(cur, fiber, seg_km, quiet, rng);
  }
  return ev;
}

double inband_energy_fraction(const Signal& x, double bandwidth_hz) {
  const cvec spec = fft(x.samples);
  const std::size_t n = spec.size();
  double total = 0.0, inband = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = std::norm(spec[k]);
    total += e;
    if (std::abs(bin_frequency_hz(k, n, x.grid.sample_rate_hz)) <=
        bandwidth_hz / 2.0 * (1.0 + 1e-12))
      inband += e;
  }
  return total > 0.0 ? inband / total : 0.0;
}

double dominant_period(const std::vector<double>& sample_positions,
                       const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 8 || sample_positions.size() != n)
    throw std::invalid_argument("dominant_period: need >= 8 samples");
  const double dz = (sample_positions.back() - sample_positions.front()) /
                    static_cast<double>(n - 1);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                             static_cast<double>(n - 1));
    w[i] = (values[i] - mean) * hann;
  }
  auto dtft_mag = [&](double freq) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = -2.0 * std::numbers::pi * freq * static_cast<double>(i) * dz;
      acc += w[i] * cplx(std::cos(arg), std::sin(arg));
    }
    return std::abs(acc);
  };

  // coarse scan over (0, Nyquist]
  const double f_nyq = 0.5 / dz;
  const int n_scan = 2048;
  double best_f = 0.0, best_m = 0.0;
  for (int k = 1; k <= n_scan; ++k) {
    const double f = f_nyq * static_cast<double>(k) / n_scan;
    const double m = dtft_mag(f);
    if (m > best_m) {
      best_m = m;
      best_f = f;
    }
  }
  if (best_m <= 0.0) return 0.0;
  double lo = best_f - f_nyq / n_scan, hi = best_f + f_nyq / n_scan;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  for (int it = 0; it < 80; ++it) {
    if (dtft_mag(c) > dtft_mag(d)) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
  }
  const double f_peak = 0.5 * (lo + hi);
  return f_peak > 0.0 ? 1.0 / f_peak : 0.0;
}

}  // namespace zdiv
