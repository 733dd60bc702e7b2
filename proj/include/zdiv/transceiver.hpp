#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zdiv/autodiff.hpp"
#include "zdiv/gmm.hpp"
#include "zdiv/link.hpp"
#include "zdiv/nn.hpp"

namespace zdiv {

/// Trainable end-to-end transceiver. The predistortion and combining
/// networks are sliding-window residual MLPs at symbol rate; the training
/// demapper is used only to provide a differentiable loss and is replaced
/// by the GMM demapper for evaluation.
struct TransceiverParams {
  Constellation constellation;
  std::size_t window_k = 4;       // window spans 2k+1 symbols
  nn::MlpParams predistort;       // 2(2k+1) -> hidden -> 2, residual
  nn::MlpParams combine;          // 4(2k+1) -> hidden -> 2, residual on the
                                  // mean of the two path centers
  nn::MlpParams train_demapper;   // 2 -> hidden -> hidden -> M

  /// out_scale 0 initializes both residual nets to the exact identity.
  static TransceiverParams make(const Constellation& c, std::size_t window_k,
                                std::size_t hidden, std::size_t demapper_hidden,
                                Rng& rng, double out_scale = 0.0);

  std::size_t n_params() const;
  void validate() const;
};

struct TrainConfig {
  std::size_t symbols_per_frame = 64;
  std::size_t frames_per_batch = 2;
  std::size_t steps = 200;
  nn::AdamConfig adam;
  double lr_final = 0.0;  // >0 decays the rate exponentially to this value
  double p_avg_dbm = 0.0;
  double sample_rate_hz = 320e9;
  double symbol_rate_hz = 20e9;
  LinkTopology topology;
  std::uint64_t seed = 1;
  bool noise_during_training = true;
  bool train_predistort = true;  // frozen nets keep their (identity) init
  bool train_combine = true;

  SamplingGrid grid() const;
  void validate() const;
};

Signal tx_forward(const std::vector<std::uint32_t>& indices,
                  const TransceiverParams& p, const SamplingGrid& grid,
                  double p_avg_watt);

struct RxResult {
  SymbolFrame shat;            // combined symbols, nominal constellation units
  std::vector<double> logits;  // n_symbols x M, training demapper
};

RxResult rx_forward(const LinkOutput& y, const TransceiverParams& p,
                    const LinkTopology& topo, double p_avg_watt);

struct TrainResult {
  TransceiverParams params;
  std::vector<double> loss_history;  // mean cross-entropy per step, nats
};

/// Adam on the full differentiable chain tx -> link -> rx -> cross-entropy.
/// Deterministic per cfg.seed. Aborts with diagnostics on divergence.
TrainResult train(const TrainConfig& cfg, const TransceiverParams& params0);

/// Frozen-parameter evaluation on fresh frames with the GMM demapper.
MetricsResult evaluate(const TransceiverParams& p, const TrainConfig& cfg,
                       std::size_t n_frames);

std::string evaluation_json(const MetricsResult& r, const TrainConfig& cfg);

void save_transceiver(const TransceiverParams& p, const std::string& base_path,
                      std::uint64_t seed, std::uint64_t step_count,
                      const std::vector<double>& loss_history = {});
TransceiverParams load_transceiver(const std::string& base_path);

// --- differentiable chain builders, shared by train() and the plain
// forward passes so both always compute the same function ---
namespace detail {

struct MlpVars {
  std::vector<ad::Var> ws, bs;
};

MlpVars mlp_to_tape(ad::Tape& t, const nn::MlpParams& p, bool requires_grad);
ad::Var mlp_tape_apply(ad::Tape& t, const MlpVars& v, const nn::MlpParams& shape,
                       ad::Var input);

/// Symmetric split-step chain with straight-through noise constants. Draws
/// noise from rng in exactly the order ssfm_propagate does, so with the same
/// rng state the values match the simulator bit for bit.
ad::Var build_fiber(ad::Tape& t, ad::Var q, const SamplingGrid& grid,
                    const FiberSpec& fiber, double length_km,
                    const SsfmConfig& cfg, Rng& rng);

ad::Var build_tx(ad::Tape& t, const std::vector<std::uint32_t>& indices,
                 const TransceiverParams& p, const MlpVars& predistort,
                 const SamplingGrid& grid, double p_avg_watt);

struct RxVars {
  ad::Var shat;
  ad::Var logits;
};

RxVars build_rx(ad::Tape& t, ad::Var y1, ad::Var y2, const TransceiverParams& p,
                const MlpVars& combine, const MlpVars& demapper,
                const SamplingGrid& grid, const LinkTopology& topo,
                double p_avg_watt);

}  // namespace detail

}  // namespace zdiv
