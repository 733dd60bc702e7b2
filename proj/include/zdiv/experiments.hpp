#pragma once

#include <functional>
#include <string>
#include <vector>

#include "zdiv/config.hpp"
#include "zdiv/gmm.hpp"
#include "zdiv/solitons.hpp"
#include "zdiv/transceiver.hpp"

namespace zdiv {

/// One CSV data row. The schema is fixed:
/// scenario,mode,power_dbm,l2_km,seed,mi_bits,eta,ci_low,ci_high,wall_s
struct RunRow {
  std::string scenario;
  std::string mode;
  double power_dbm = 0.0;
  double l2_km = 0.0;
  std::uint64_t seed = 0;
  double mi_bits = 0.0;
  double eta = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double wall_s = 0.0;
};

std::string csv_header();
std::string csv_body(const std::vector<RunRow>& rows);
/// "# config_hash=<hex>" comment, header, then rows.
void write_run_csv(const std::string& path, const ExperimentConfig& cfg,
                   const std::vector<RunRow>& rows);

/// Fixed-order parallel map: fn(i) for i in [0, n), at most `workers`
/// threads, exceptions rethrown. Each index must be self-contained.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

struct SolitonDemoResult {
  SpectralEvolution evolution;
  std::vector<double> z_km;
  std::vector<double> inband_fraction;
  double measured_period_km = 0.0;
  double predicted_period_km = 0.0;
};

/// Noiseless propagation of the configured (multi-)soliton; spectral heatmap,
/// in-band energy trace and the measured breathing period.
SolitonDemoResult run_soliton_demo(const ExperimentConfig& cfg);

/// MI of phase-modulated soliton frames through the two-tap link versus l2.
/// Matched-filter statistic per tap, linear MMSE combining (config-gated),
/// GMM demapping. Auto l2 grid spans one breathing period when unset.
std::vector<RunRow> run_soliton_l2_sweep(const ExperimentConfig& cfg);

/// Trained SD/SDA transceivers against the duplicated-baseline transceiver
/// with paired seeds and equal parameter counts. Emits absolute rows per mode
/// plus "<mode>-delta" rows carrying eta differences against the baseline.
std::vector<RunRow> run_ae_l2_sweep(const ExperimentConfig& cfg);

/// Spectral efficiency versus launch power for the classic receivers
/// (cdc, dbp-full, dbp-reduced) and the trained variants (aec, aep, aepc)
/// across the configured modes.
std::vector<RunRow> run_ae_power_sweep(const ExperimentConfig& cfg);

/// cdc / dbp-full / dbp-reduced over the power grid, no neural stage.
std::vector<RunRow> run_baseline_curves(const ExperimentConfig& cfg);

/// Dispatch on cfg.scenario, write <scenario>.csv (and the demo side files)
/// into cfg.out_dir, return the rows (empty for soliton-demo).
std::vector<RunRow> run_scenario(const ExperimentConfig& cfg);

/// Training setup shared by the sweep runners and the train/eval commands.
TrainConfig train_config_from(const ExperimentConfig& cfg, LinkMode mode,
                              double l2_km, double power_dbm,
                              std::uint64_t seed);
/// Seed-paired initial parameters: identical across modes for a given seed.
TransceiverParams initial_params(const ExperimentConfig& cfg, std::uint64_t seed);

/// Classic single-receiver chain used by the baseline variants: classic
/// shaped transmit frames, one fiber span, full-band capture, then
/// variant-specific equalization ("cdc", "dbp-full", "dbp-reduced").
MetricsResult baseline_variant_eval(const ExperimentConfig& cfg,
                                    const std::string& variant,
                                    double power_dbm, std::uint64_t seed);

}  // namespace zdiv
