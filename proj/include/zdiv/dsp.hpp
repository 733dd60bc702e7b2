#pragma once

#include "zdiv/fiber.hpp"
#include "zdiv/signal.hpp"

namespace zdiv {

struct DbpConfig {
  double n_steps_per_km = 1.0;
  double oversampling_hz = 0.0;  // 0 = run at the input sample rate
  double split_fraction = 0.0;   // fraction of the length pre-applied at TX

  void validate() const;
};

/// All-pass inverse of the linear propagation operator:
/// frequency-domain multiply by exp(+j (beta2/2) w^2 length).
Signal cdc(const Signal& x, double beta2_ps2_per_km, double length_km);

/// Integer-ratio decimation after brickwall anti-aliasing at new_rate_hz.
Signal resample_to(const Signal& x, double new_rate_hz);

/// Digital backpropagation: noiseless SSFM with negated (beta2, gamma).
/// With cfg.oversampling_hz below the input rate the signal is band-limited
/// and decimated first and returned at the reduced rate.
Signal dbp(const Signal& x, const FiberSpec& fiber, double length_km,
           const DbpConfig& cfg);

/// TX-side half of split DBP: back-propagates the ideal transmit waveform
/// by split_fraction * length_km.
Signal split_dbp_predistort(const Signal& x, const FiberSpec& fiber,
                            double length_km, const DbpConfig& cfg);

}  // namespace zdiv
