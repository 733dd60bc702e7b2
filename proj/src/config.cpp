#include "zdiv/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace zdiv {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " has no '='");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " has an empty key");
    kv.entries_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool KeyValueConfig::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::size_t pos = 0;
  const double v = std::stod(it->second, &pos);
  if (pos != it->second.size())
    throw std::invalid_argument("config: " + key + " is not a number");
  return v;
}

std::size_t KeyValueConfig::get_size(const std::string& key,
                                     std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::size_t pos = 0;
  const unsigned long long v = std::stoull(it->second, &pos);
  if (pos != it->second.size())
    throw std::invalid_argument("config: " + key + " is not an integer");
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::invalid_argument("config: " + key + " is not a boolean");
}

std::vector<double> KeyValueConfig::get_doubles(
    const std::string& key, const std::vector<double>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (const auto& s : split_commas(it->second)) out.push_back(std::stod(s));
  return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_u64s(
    const std::string& key, const std::vector<std::uint64_t>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& s : split_commas(it->second)) out.push_back(std::stoull(s));
  return out;
}

std::vector<std::string> KeyValueConfig::get_strings(
    const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  return split_commas(it->second);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::string KeyValueConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

std::uint64_t config_hash(const KeyValueConfig& kv) {
  const std::string text = kv.canonical_text();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash_hex(const KeyValueConfig& kv) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(kv)));
  return buf;
}

ScalePreset preset_from_string(const std::string& name) {
  if (name == "desk") return ScalePreset::Desk;
  if (name == "paper") return ScalePreset::Paper;
  throw std::invalid_argument("config: unknown preset '" + name + "'");
}

const char* to_string(ScalePreset p) {
  return p == ScalePreset::Desk ? "desk" : "paper";
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt_double(v[i]);
  }
  return s;
}

std::string join_u64s(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.preset = preset_from_string(kv.get_string("preset", "desk"));
  const bool desk = c.preset == ScalePreset::Desk;

  // Scale presets. Desk keeps the exact integer samples-per-symbol grid
  // (320 GHz / 20 GBd = 16 sps) while shrinking bandwidth, length and
  // constellation order roughly 50x relative to the full-scale setup.
  if (desk) {
    c.sample_rate_hz = 320e9;
    c.n_rings = 2;
    c.n_phases = 8;
    c.l1_km = 250.0;
    c.symbols_per_frame = 64;
    c.ssfm.step_km = 1.0;
    c.train_steps = 600;
    c.eval_frames = 64;
    c.power_dbm = {0.0, 2.5, 5.0, 7.5};
    c.l2_km = {};
  } else {
    c.sample_rate_hz = 1e12;
    c.n_rings = 16;
    c.n_phases = 16;
    c.l1_km = 1000.0;
    c.symbols_per_frame = 256;
    c.ssfm.step_km = 0.1;
    c.train_steps = 2000;
    c.eval_frames = 256;
    c.power_dbm = {0.0, 2.5, 5.0};
    c.l2_km = {};
  }

  c.scenario = kv.get_string("scenario", c.scenario);
  c.out_dir = kv.get_string("out_dir", c.out_dir);
  c.workers = kv.get_size("workers", c.workers);
  c.record_timing = kv.get_bool("timing.record", c.record_timing);

  c.sample_rate_hz = kv.get_double("grid.sample_rate_hz", c.sample_rate_hz);
  c.symbol_rate_hz = kv.get_double("grid.symbol_rate_hz", c.symbol_rate_hz);
  c.symbols_per_frame = kv.get_size("grid.symbols_per_frame", c.symbols_per_frame);
  c.n_rings = kv.get_size("constellation.n_rings", c.n_rings);
  c.n_phases = kv.get_size("constellation.n_phases", c.n_phases);

  c.l1_km = kv.get_double("link.l1_km", c.l1_km);
  c.adc_bandwidth_hz = kv.get_double("link.adc_bandwidth_hz", c.adc_bandwidth_hz);
  c.fiber.beta2_ps2_per_km = kv.get_double("fiber.beta2_ps2_per_km",
                                           c.fiber.beta2_ps2_per_km);
  c.fiber.gamma_per_w_km = kv.get_double("fiber.gamma_per_w_km",
                                         c.fiber.gamma_per_w_km);
  c.fiber.alpha_db_per_km = kv.get_double("fiber.alpha_db_per_km",
                                          c.fiber.alpha_db_per_km);
  c.fiber.f0_hz = kv.get_double("fiber.f0_hz", c.fiber.f0_hz);
  c.fiber.nsp_raman = kv.get_double("fiber.nsp_raman", c.fiber.nsp_raman);
  c.edfa.gain_db = kv.get_double("edfa.gain_db", c.edfa.gain_db);
  c.edfa.nsp_edfa = kv.get_double("edfa.nsp_edfa", c.edfa.nsp_edfa);
  c.edfa.f0_hz = kv.get_double("edfa.f0_hz", c.fiber.f0_hz);
  c.ssfm.step_km = kv.get_double("ssfm.step_km", c.ssfm.step_km);
  c.ssfm.noise_enabled = kv.get_bool("ssfm.noise", true);
  c.ssfm.noise_bandwidth_hz =
      kv.get_double("ssfm.noise_bandwidth_hz", c.sample_rate_hz);

  c.l2_km = kv.get_doubles("sweep.l2_km", c.l2_km);
  c.power_dbm = kv.get_doubles("sweep.power_dbm", c.power_dbm);
  c.seeds = kv.get_u64s("seeds", {1, 2, 3, 4});
  c.modes.clear();
  for (const auto& m : kv.get_strings("sweep.modes", {"baseline", "sd", "sda"}))
    c.modes.push_back(link_mode_from_string(m));

  c.t0_ps = kv.get_double("soliton.t0_ps", c.t0_ps);
  c.etas = kv.get_doubles("soliton.etas", c.etas);
  c.soliton_frames = kv.get_size("soliton.frames", c.soliton_frames);
  c.soliton_l1_km = kv.get_double("soliton.l1_km", c.soliton_l1_km);
  c.mmse_combiner = kv.get_bool("soliton.mmse", c.mmse_combiner);

  c.train_steps = kv.get_size("train.steps", c.train_steps);
  c.frames_per_batch = kv.get_size("train.frames_per_batch", c.frames_per_batch);
  c.eval_frames = kv.get_size("eval.frames", c.eval_frames);
  c.lr = kv.get_double("train.lr", c.lr);
  c.lr_final = kv.get_double("train.lr_final", c.lr_final);
  c.window_k = kv.get_size("train.window_k", c.window_k);
  c.hidden = kv.get_size("train.hidden", c.hidden);
  c.demapper_hidden = kv.get_size("train.demapper_hidden", c.demapper_hidden);
  c.dbp_reduced_rate_hz =
      kv.get_double("dsp.dbp_reduced_rate_hz", c.dbp_reduced_rate_hz);

  // Resolved canonical key set. Hashing this (not the raw input file) makes
  // the config hash invariant to comments, ordering and implied defaults.
  KeyValueConfig& s = c.source;
  s.set("scenario", c.scenario);
  s.set("preset", to_string(c.preset));
  s.set("grid.sample_rate_hz", fmt_double(c.sample_rate_hz));
  s.set("grid.symbol_rate_hz", fmt_double(c.symbol_rate_hz));
  s.set("grid.symbols_per_frame", std::to_string(c.symbols_per_frame));
  s.set("constellation.n_rings", std::to_string(c.n_rings));
  s.set("constellation.n_phases", std::to_string(c.n_phases));
  s.set("link.l1_km", fmt_double(c.l1_km));
  s.set("link.adc_bandwidth_hz", fmt_double(c.adc_bandwidth_hz));
  s.set("fiber.beta2_ps2_per_km", fmt_double(c.fiber.beta2_ps2_per_km));
  s.set("fiber.gamma_per_w_km", fmt_double(c.fiber.gamma_per_w_km));
  s.set("fiber.alpha_db_per_km", fmt_double(c.fiber.alpha_db_per_km));
  s.set("fiber.f0_hz", fmt_double(c.fiber.f0_hz));
  s.set("fiber.nsp_raman", fmt_double(c.fiber.nsp_raman));
  s.set("edfa.gain_db", fmt_double(c.edfa.gain_db));
  s.set("edfa.nsp_edfa", fmt_double(c.edfa.nsp_edfa));
  s.set("ssfm.step_km", fmt_double(c.ssfm.step_km));
  s.set("ssfm.noise", c.ssfm.noise_enabled ? "true" : "false");
  s.set("ssfm.noise_bandwidth_hz", fmt_double(c.ssfm.noise_bandwidth_hz));
  s.set("sweep.l2_km", join_doubles(c.l2_km));
  s.set("sweep.power_dbm", join_doubles(c.power_dbm));
  {
    std::string m;
    for (std::size_t i = 0; i < c.modes.size(); ++i) {
      if (i) m += ",";
      m += to_string(c.modes[i]);
    }
    s.set("sweep.modes", m);
  }
  s.set("seeds", join_u64s(c.seeds));
  s.set("soliton.t0_ps", fmt_double(c.t0_ps));
  s.set("soliton.etas", join_doubles(c.etas));
  s.set("soliton.frames", std::to_string(c.soliton_frames));
  s.set("soliton.l1_km", fmt_double(c.soliton_l1_km));
  s.set("soliton.mmse", c.mmse_combiner ? "true" : "false");
  s.set("train.steps", std::to_string(c.train_steps));
  s.set("train.frames_per_batch", std::to_string(c.frames_per_batch));
  s.set("eval.frames", std::to_string(c.eval_frames));
  s.set("train.lr", fmt_double(c.lr));
  s.set("train.lr_final", fmt_double(c.lr_final));
  s.set("train.window_k", std::to_string(c.window_k));
  s.set("train.hidden", std::to_string(c.hidden));
  s.set("train.demapper_hidden", std::to_string(c.demapper_hidden));
  s.set("dsp.dbp_reduced_rate_hz", fmt_double(c.dbp_reduced_rate_hz));

  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  static const char* kScenarios[] = {"soliton-demo", "soliton-l2-sweep",
                                     "ae-l2-sweep", "ae-power-sweep",
                                     "baseline-curves"};
  bool known = false;
  for (const char* s : kScenarios) known = known || scenario == s;
  if (!known) throw std::invalid_argument("config: unknown scenario '" + scenario + "'");
  if (workers == 0) throw std::invalid_argument("config: workers must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: empty seed list");
  if (power_dbm.empty()) throw std::invalid_argument("config: empty power grid");
  if (n_rings * n_phases < 2)
    throw std::invalid_argument("config: constellation too small");
  fiber.validate();
  edfa.validate();
  ssfm.validate();
}

}  // namespace zdiv
