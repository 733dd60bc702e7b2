#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zdiv/link.hpp"

namespace zdiv {

/// Flat key = value configuration text. One key per line, sections by dotted
/// prefixes (link.l2_km = 120), '#' comments, blank lines ignored. Values are
/// kept as strings; typed accessors parse on demand.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // comma-separated lists
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<std::uint64_t> get_u64s(
      const std::string& key, const std::vector<std::uint64_t>& fallback) const;
  std::vector<std::string> get_strings(
      const std::string& key, const std::vector<std::string>& fallback) const;

  void set(const std::string& key, const std::string& value);

  /// Sorted key = value lines; the canonical form behind the config hash.
  std::string canonical_text() const;

 private:
  std::map<std::string, std::string> entries_;
};

/// FNV-1a over the canonical text.
std::uint64_t config_hash(const KeyValueConfig& kv);
std::string config_hash_hex(const KeyValueConfig& kv);

enum class ScalePreset { Desk, Paper };

/// Everything a scenario run needs, resolved from preset + overrides.
struct ExperimentConfig {
  std::string scenario = "soliton-demo";
  ScalePreset preset = ScalePreset::Desk;
  std::string out_dir = ".";
  std::size_t workers = 1;
  bool record_timing = true;  // off -> wall_s column written as 0

  std::vector<double> l2_km;
  std::vector<double> power_dbm;
  std::vector<LinkMode> modes;
  std::vector<std::uint64_t> seeds;

  // grid / constellation
  double sample_rate_hz = 0.0;
  double symbol_rate_hz = 20e9;
  std::size_t n_rings = 2, n_phases = 8;
  std::size_t symbols_per_frame = 64;

  // link
  double l1_km = 0.0;
  double adc_bandwidth_hz = 20e9;
  FiberSpec fiber;
  EdfaSpec edfa;
  SsfmConfig ssfm;

  // solitons
  double t0_ps = 50.0;
  std::vector<double> etas = {0.5, 1.0};
  std::size_t soliton_frames = 512;
  double soliton_l1_km = 0.0;  // 0 = auto: half the breathing period
  bool mmse_combiner = true;  // linear combiner for the soliton sweep

  // training budget
  std::size_t train_steps = 200;
  std::size_t frames_per_batch = 2;
  std::size_t eval_frames = 64;
  double lr = 0.02, lr_final = 0.001;
  std::size_t window_k = 2, hidden = 8, demapper_hidden = 32;
  double dbp_reduced_rate_hz = 40e9;

  KeyValueConfig source;  // resolved key set, hashed into every CSV header

  static ExperimentConfig from_kv(const KeyValueConfig& kv);
  void validate() const;
  std::uint64_t hash() const { return config_hash(source); }
  std::string hash_hex() const { return config_hash_hex(source); }
};

ScalePreset preset_from_string(const std::string& name);
const char* to_string(ScalePreset p);

}  // namespace zdiv
