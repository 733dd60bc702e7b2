#pragma once

#include <vector>

#include "zdiv/fiber.hpp"
#include "zdiv/signal.hpp"

namespace zdiv {

struct SolitonSpec {
  double t0_ps = 50.0;
  std::vector<double> etas;  // strictly increasing, > 0; eigenvalue_k = j*eta_k

  void validate() const;
};

/// Soliton power scale |beta2| / (gamma * T0^2) in W.
double soliton_power_scale_watt(double t0_ps, const FiberSpec& fiber);

/// Dispersion length T0^2 / |beta2| in km.
double dispersion_length_km(double t0_ps, const FiberSpec& fiber);

/// q(t) = A * sqrt(P_norm) * sech((t - center) / T0).
Signal sech_soliton(double amplitude, double t0_ps, const FiberSpec& fiber,
                    const SamplingGrid& grid, double center_ps = 0.0);

/// Bound two-soliton with eigenvalues {j eta1, j eta2}, built by a two-fold
/// Darboux transformation from the zero seed with unit norming constants,
/// centered on the grid.
Signal two_soliton_from_eigenvalues(const SolitonSpec& spec, const FiberSpec& fiber,
                                    const SamplingGrid& grid);

/// Breathing period z_p = pi * L_D / (eta2^2 - eta1^2).
double soliton_period_km(const SolitonSpec& spec, const FiberSpec& fiber);

/// Discrete Zakharov-Shabat eigenvalues of the normalized profile
/// (piecewise-constant transfer matrices; imaginary-axis search with local
/// refinement). Returned as the imaginary parts eta, ascending.
std::vector<double> zs_eigenvalues(const Signal& x, double t0_ps,
                                   const FiberSpec& fiber);

struct SpectralEvolution {
  std::vector<double> z_km;
  std::vector<double> f_hz;
  std::vector<std::vector<double>> intensity;  // rows normalized to peak 1
};

SpectralEvolution spectral_evolution(const Signal& x, const FiberSpec& fiber,
                                     double length_km, const SsfmConfig& cfg,
                                     std::size_t n_snapshots);

/// Fraction of spectral energy within |f| <= bandwidth/2.
double inband_energy_fraction(const Signal& x, double bandwidth_hz);

/// Dominant oscillation period of a uniformly sampled series (Hann-windowed
/// DTFT peak with golden-section refinement). Returns 0 when no nonzero
/// peak exists.
double dominant_period(const std::vector<double>& sample_positions,
                       const std::vector<double>& values);

}  // namespace zdiv
