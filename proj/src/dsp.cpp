#include "zdiv/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zdiv {

void DbpConfig::validate() const {
  if (n_steps_per_km <= 0.0)
    throw std::invalid_argument("DbpConfig: step density must be positive");
  if (split_fraction < 0.0 || split_fraction > 1.0)
    throw std::invalid_argument("DbpConfig: split fraction outside [0,1]");
}

Signal cdc(const Signal& x, double beta2_ps2_per_km, double length_km) {
  Signal out = x;
  if (length_km == 0.0) return out;
  fft_inplace(out.samples);
  const std::size_t n = out.samples.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double f_thz = bin_frequency_hz(k, n, x.grid.sample_rate_hz) * 1e-12;
    const double w = 2.0 * std::numbers::pi * f_thz;
    const double arg = 0.5 * beta2_ps2_per_km * w * w * length_km;
    out.samples[k] *= cplx(std::cos(arg), std::sin(arg));
  }
  ifft_inplace(out.samples);
  return out;
}

Signal resample_to(const Signal& x, double new_rate_hz) {
  if (new_rate_hz <= 0.0 || new_rate_hz > x.grid.sample_rate_hz)
    throw std::invalid_argument("resample_to: rate outside (0, sample_rate]");
  const double ratio = x.grid.sample_rate_hz / new_rate_hz;
  const auto factor = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(factor)) > 1e-9)
    throw std::invalid_argument("resample_to: non-integer decimation ratio");
  if (factor == 1) return x;
  Signal filtered = brickwall_filter(x, new_rate_hz);
  Signal out;
  out.z_km = x.z_km;
  out.grid = x.grid;
  out.grid.sample_rate_hz = new_rate_hz;
  out.grid.samples_per_symbol = x.grid.samples_per_symbol / factor;
  out.grid.n_samples = x.grid.n_samples / factor;
  if (out.grid.samples_per_symbol * factor != x.grid.samples_per_symbol)
    throw std::invalid_argument("resample_to: samples_per_symbol not divisible by ratio");
  out.samples.resize(out.grid.n_samples);
  for (std::size_t i = 0; i < out.grid.n_samples; ++i)
    out.samples[i] = filtered.samples[i * factor];
  return out;
}

Signal dbp(const Signal& x, const FiberSpec& fiber, double length_km,
           const DbpConfig& cfg) {
  cfg.validate();
  Signal in = x;
  if (cfg.oversampling_hz > 0.0 && cfg.oversampling_hz < x.grid.sample_rate_hz)
    in = resample_to(x, cfg.oversampling_hz);

  FiberSpec reversed = fiber;
  reversed.beta2_ps2_per_km = -fiber.beta2_ps2_per_km;
  reversed.gamma_per_w_km = -fiber.gamma_per_w_km;
  reversed.nsp_raman = 0.0;

  SsfmConfig ssfm;
  ssfm.step_km = 1.0 / cfg.n_steps_per_km;
  ssfm.noise_enabled = false;
  Rng rng(0);
  Signal out = ssfm_propagate(in, reversed, length_km, ssfm, rng);
  out.z_km = in.z_km - length_km;
  return out;
}

Signal split_dbp_predistort(const Signal& x, const FiberSpec& fiber,
                            double length_km, const DbpConfig& cfg) {
  cfg.validate();
  if (cfg.split_fraction == 0.0) return x;
  DbpConfig full_rate = cfg;
  full_rate.oversampling_hz = 0.0;  // predistortion runs on the ideal waveform
  Signal out = dbp(x, fiber, cfg.split_fraction * length_km, full_rate);
  out.z_km = x.z_km;
  return out;
}

}  // namespace zdiv
