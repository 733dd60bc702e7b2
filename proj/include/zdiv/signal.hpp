#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "zdiv/fft.hpp"

namespace zdiv {

/// Uniform sampling grid with an integer samples-per-symbol ratio.
struct SamplingGrid {
  double sample_rate_hz = 0.0;
  std::size_t n_samples = 0;
  double symbol_rate_hz = 0.0;
  std::size_t samples_per_symbol = 0;

  static SamplingGrid make(double sample_rate_hz, double symbol_rate_hz,
                           std::size_t n_symbols);

  double dt_ps() const { return 1e12 / sample_rate_hz; }
  std::size_t n_symbols() const { return n_samples / samples_per_symbol; }
  void validate() const;
  bool operator==(const SamplingGrid&) const = default;
};

/// Uniformly sampled complex envelope q(t, z). Samples carry units of sqrt(W).
struct Signal {
  cvec samples;
  SamplingGrid grid;
  double z_km = 0.0;

  void validate() const;  // length matches grid, all samples finite
};

/// Fixed transmit alphabet, unit mean power.
struct Constellation {
  cvec points;

  std::size_t size() const { return points.size(); }
  void validate() const;

  // n_rings x n_phases layout, ring energies uniform in power
  // (r_i proportional to sqrt((i + 0.5) / n_rings)), normalized to unit
  // mean power.
  static Constellation rings(std::size_t n_rings, std::size_t n_phases);
};

struct SymbolFrame {
  std::vector<std::uint32_t> indices;
  cvec symbols;
};

SymbolFrame map_symbols(const std::vector<std::uint32_t>& indices,
                        const Constellation& c);

/// Zero-stuffing: symbol k at sample k*sps, zeros elsewhere.
Signal upsample(const SymbolFrame& frame, const SamplingGrid& grid);

/// Ideal lowpass: DFT bins with |f| <= B/2 kept (inclusive), others zeroed.
Signal brickwall_filter(const Signal& x, double bandwidth_hz);
void brickwall_mask_inplace(cvec& spectrum, double fs_hz, double bandwidth_hz);

/// Zero-roll-off shaping cascade (TX root-raised-cosine times its matched
/// half): unity inside |f| < B/2, exactly 1/2 at bins that land on the band
/// edge, zero outside. The half-weight edge makes
/// downsample(pulse_shape_rrc0(upsample(s), R_S)) * sps an exact identity
/// on periodic frames.
Signal pulse_shape_rrc0(const Signal& x, double bandwidth_hz);
void rrc0_mask_inplace(cvec& spectrum, double fs_hz, double bandwidth_hz);

SymbolFrame downsample(const Signal& x, std::size_t phase = 0);

/// Scales so mean sample power equals p_avg_watt exactly.
Signal normalize_power(const Signal& x, double p_avg_watt);

struct PowerReading {
  double watt = 0.0;
  double dbm = 0.0;  // -inf for the all-zero signal
};
PowerReading measure_power(const Signal& x);

double signal_energy(const Signal& x);  // sum |q|^2 * dt (ps*W)

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

// Binary container: little-endian header (sample_rate float64,
// n_samples uint64, z_position float64) then interleaved float64 re/im.
void save_signal(const Signal& x, const std::string& path);
Signal load_signal(const std::string& path, double symbol_rate_hz = 0.0);

// CSV export, columns index,re,im
void write_signal_csv(const Signal& x, std::ostream& os);

}  // namespace zdiv
