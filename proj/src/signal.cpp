#include "zdiv/signal.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace zdiv {

SamplingGrid SamplingGrid::make(double sample_rate_hz, double symbol_rate_hz,
                                std::size_t n_symbols) {
  SamplingGrid g;
  g.sample_rate_hz = sample_rate_hz;
  g.symbol_rate_hz = symbol_rate_hz;
  const double ratio = sample_rate_hz / symbol_rate_hz;
  g.samples_per_symbol = static_cast<std::size_t>(std::llround(ratio));
  g.n_samples = n_symbols * g.samples_per_symbol;
  g.validate();
  return g;
}

void SamplingGrid::validate() const {
  if (sample_rate_hz <= 0.0 || symbol_rate_hz <= 0.0 || samples_per_symbol == 0)
    throw std::invalid_argument("SamplingGrid: rates must be positive");
  const double exact = static_cast<double>(samples_per_symbol) * symbol_rate_hz;
  if (std::abs(exact - sample_rate_hz) > 1e-6 * sample_rate_hz)
    throw std::invalid_argument("SamplingGrid: sample rate is not an integer multiple of the symbol rate");
  if (n_samples == 0 || n_samples % samples_per_symbol != 0)
    throw std::invalid_argument("SamplingGrid: n_samples must be a multiple of samples_per_symbol");
}

void Signal::validate() const {
  grid.validate();
  if (samples.size() != grid.n_samples)
    throw std::invalid_argument("Signal: sample count does not match grid");
  for (const cplx& s : samples) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
      throw std::runtime_error("Signal: non-finite sample");
  }
}

void Constellation::validate() const {
  if (points.size() < 2) throw std::invalid_argument("Constellation: need at least two points");
  double power = 0.0;
  for (const cplx& p : points) power += std::norm(p);
  power /= static_cast<double>(points.size());
  if (std::abs(power - 1.0) > 1e-9)
    throw std::invalid_argument("Constellation: mean power must be 1");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (std::abs(points[i] - points[j]) < 1e-12)
        throw std::invalid_argument("Constellation: duplicate points");
}

Constellation Constellation::rings(std::size_t n_rings, std::size_t n_phases) {
  if (n_rings == 0 || n_phases == 0)
    throw std::invalid_argument("Constellation::rings: empty layout");
  Constellation c;
  c.points.reserve(n_rings * n_phases);
  double power_sum = 0.0;
  for (std::size_t r = 0; r < n_rings; ++r) {
    const double radius = std::sqrt((static_cast<double>(r) + 0.5) / static_cast<double>(n_rings));
    // Half-phase offset on odd rings increases minimum distance.
    const double phase0 = (r % 2 == 1) ? std::numbers::pi / static_cast<double>(n_phases) : 0.0;
    for (std::size_t p = 0; p < n_phases; ++p) {
      const double phi = phase0 + 2.0 * std::numbers::pi * static_cast<double>(p) / static_cast<double>(n_phases);
      c.points.emplace_back(radius * std::cos(phi), radius * std::sin(phi));
      power_sum += radius * radius;
    }
  }
  const double scale = std::sqrt(static_cast<double>(c.points.size()) / power_sum);
  for (cplx& p : c.points) p *= scale;
  c.validate();
  return c;
}

SymbolFrame map_symbols(const std::vector<std::uint32_t>& indices,
                        const Constellation& c) {
  SymbolFrame f;
  f.indices = indices;
  f.symbols.reserve(indices.size());
  for (std::uint32_t i : indices) {
    if (i >= c.size()) throw std::out_of_range("map_symbols: index out of range");
    f.symbols.push_back(c.points[i]);
  }
  return f;
}

Signal upsample(const SymbolFrame& frame, const SamplingGrid& grid) {
  grid.validate();
  if (frame.symbols.size() != grid.n_symbols())
    throw std::invalid_argument("upsample: frame length does not match grid");
  Signal out;
  out.grid = grid;
  out.samples.assign(grid.n_samples, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < frame.symbols.size(); ++k)
    out.samples[k * grid.samples_per_symbol] = frame.symbols[k];
  return out;
}

void brickwall_mask_inplace(cvec& spectrum, double fs_hz, double bandwidth_hz) {
  if (bandwidth_hz <= 0.0 || bandwidth_hz > fs_hz * (1.0 + 1e-12))
    throw std::invalid_argument("brickwall: bandwidth outside (0, sample_rate]");
  const std::size_t n = spectrum.size();
  const double half = bandwidth_hz / 2.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = std::abs(bin_frequency_hz(k, n, fs_hz));
    if (f > half * (1.0 + 1e-12)) spectrum[k] = cplx(0.0, 0.0);
  }
}

void rrc0_mask_inplace(cvec& spectrum, double fs_hz, double bandwidth_hz) {
  if (bandwidth_hz <= 0.0 || bandwidth_hz > fs_hz * (1.0 + 1e-12))
    throw std::invalid_argument("pulse_shape_rrc0: bandwidth outside (0, sample_rate]");
  const std::size_t n = spectrum.size();
  const double half = bandwidth_hz / 2.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = std::abs(bin_frequency_hz(k, n, fs_hz));
    if (f > half * (1.0 + 1e-12)) {
      spectrum[k] = cplx(0.0, 0.0);
    } else if (f > half * (1.0 - 1e-12)) {
      spectrum[k] *= 0.5;
    }
  }
}

Signal pulse_shape_rrc0(const Signal& x, double bandwidth_hz) {
  Signal out = x;
  fft_inplace(out.samples);
  rrc0_mask_inplace(out.samples, x.grid.sample_rate_hz, bandwidth_hz);
  ifft_inplace(out.samples);
  return out;
}

Signal brickwall_filter(const Signal& x, double bandwidth_hz) {
  Signal out = x;
  fft_inplace(out.samples);
  brickwall_mask_inplace(out.samples, x.grid.sample_rate_hz, bandwidth_hz);
  ifft_inplace(out.samples);
  return out;
}

SymbolFrame downsample(const Signal& x, std::size_t phase) {
  const std::size_t sps = x.grid.samples_per_symbol;
  if (phase >= sps) throw std::out_of_range("downsample: phase out of range");
  SymbolFrame f;
  const std::size_t n_sym = x.grid.n_symbols();
  f.symbols.reserve(n_sym);
  for (std::size_t k = 0; k < n_sym; ++k)
    f.symbols.push_back(x.samples[phase + k * sps]);
  return f;
}

Signal normalize_power(const Signal& x, double p_avg_watt) {
  double sum = 0.0;
  for (const cplx& s : x.samples) sum += std::norm(s);
  if (sum <= 0.0) throw std::invalid_argument("normalize_power: all-zero signal");
  const double scale = std::sqrt(p_avg_watt * static_cast<double>(x.samples.size()) / sum);
  Signal out = x;
  for (cplx& s : out.samples) s *= scale;
  return out;
}

PowerReading measure_power(const Signal& x) {
  double sum = 0.0;
  for (const cplx& s : x.samples) sum += std::norm(s);
  PowerReading r;
  r.watt = x.samples.empty() ? 0.0 : sum / static_cast<double>(x.samples.size());
  r.dbm = r.watt > 0.0 ? watt_to_dbm(r.watt) : -std::numeric_limits<double>::infinity();
  return r;
}

double signal_energy(const Signal& x) {
  double sum = 0.0;
  for (const cplx& s : x.samples) sum += std::norm(s);
  return sum * x.grid.dt_ps();
}

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

void save_signal(const Signal& x, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_signal: cannot open " + path);
  const double sr = x.grid.sample_rate_hz;
  const std::uint64_t n = x.samples.size();
  const double z = x.z_km;
  os.write(reinterpret_cast<const char*>(&sr), 8);
  os.write(reinterpret_cast<const char*>(&n), 8);
  os.write(reinterpret_cast<const char*>(&z), 8);
  for (const cplx& s : x.samples) {
    const double re = s.real(), im = s.imag();
    os.write(reinterpret_cast<const char*>(&re), 8);
    os.write(reinterpret_cast<const char*>(&im), 8);
  }
}

Signal load_signal(const std::string& path, double symbol_rate_hz) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_signal: cannot open " + path);
  double sr = 0.0, z = 0.0;
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&sr), 8);
  is.read(reinterpret_cast<char*>(&n), 8);
  is.read(reinterpret_cast<char*>(&z), 8);
  Signal x;
  x.grid.sample_rate_hz = sr;
  x.grid.symbol_rate_hz = symbol_rate_hz > 0.0 ? symbol_rate_hz : sr;
  x.grid.samples_per_symbol =
      static_cast<std::size_t>(std::llround(sr / x.grid.symbol_rate_hz));
  x.grid.n_samples = n;
  x.z_km = z;
  x.samples.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    double re = 0.0, im = 0.0;
    is.read(reinterpret_cast<char*>(&re), 8);
    is.read(reinterpret_cast<char*>(&im), 8);
    x.samples[i] = cplx(re, im);
  }
  if (!is) throw std::runtime_error("load_signal: truncated file " + path);
  return x;
}

void write_signal_csv(const Signal& x, std::ostream& os) {
  os << "index,re,im\n";
  os.precision(17);
  for (std::size_t i = 0; i < x.samples.size(); ++i)
    os << i << ',' << x.samples[i].real() << ',' << x.samples[i].imag() << '\n';
}

}  // namespace zdiv
