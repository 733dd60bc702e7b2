#pragma once

#include <functional>

#include "zdiv/rng.hpp"
#include "zdiv/signal.hpp"

namespace zdiv {

inline constexpr double kPlanck = 6.62607015e-34;  // J*s

/// Physical fiber constants. alpha enters only the IDRA noise formula;
/// propagation itself is lossless.
struct FiberSpec {
  double beta2_ps2_per_km = -21.67;
  double gamma_per_w_km = 1.27;
  double alpha_db_per_km = 0.2;
  double f0_hz = 193.55e12;
  double nsp_raman = 1.0;  // 0 disables distributed noise

  void validate() const;
  double alpha_linear_per_km() const;  // alpha_dB * ln(10) / 10
};

struct SsfmConfig {
  double step_km = 0.1;
  bool noise_enabled = false;
  double noise_bandwidth_hz = 0.0;  // variance reference bandwidth; the
                                    // caller normally passes f_sim so a
                                    // later brickwall of width B captures
                                    // exactly the per-step variance at B

  void validate() const;
};

struct EdfaSpec {
  // Defaults to the exact coupler-loss compensation (10 log10 2 dB).
  double gain_db = 3.0102999566398120;
  double nsp_edfa = 3.16;
  double f0_hz = 193.55e12;

  double gain_linear() const;
  void validate() const;
};

/// Per-step ASE variance: nsp * h * f0 * alpha_lin * dz * B.
double ase_sigma2_watt(const FiberSpec& fiber, double dz_km, double bandwidth_hz);

/// Optional per-step diagnostics (z in km, mean power, peak power).
using StepObserver = std::function<void(double z_km, double power_w, double peak_w)>;

/// Symmetric split-step solution of
///   dq/dz = j(beta2/2) q_tt - j gamma |q|^2 q + n
/// with per-step white ASE injection when enabled. Lossless otherwise.
Signal ssfm_propagate(const Signal& x, const FiberSpec& fiber, double length_km,
                      const SsfmConfig& cfg, Rng& rng,
                      const StepObserver& observer = nullptr);

/// 3 dB coupler: both outputs x / sqrt(2).
std::pair<Signal, Signal> coupler_split(const Signal& x);

/// y = sqrt(G) x + ASE with per-sample variance nsp * h * f0 * (G - 1) * B.
Signal edfa_amplify(const Signal& x, const EdfaSpec& e, double bandwidth_hz, Rng& rng);

}  // namespace zdiv
