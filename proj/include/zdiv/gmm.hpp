#pragma once

#include <cstdint>
#include <vector>

#include "zdiv/fft.hpp"
#include "zdiv/rng.hpp"

namespace zdiv {

struct LabeledSymbol {
  std::uint32_t label = 0;
  cplx value;
};

/// One full-covariance Gaussian per class, uniform priors.
struct GmmModel {
  struct ClassStat {
    double mean_re = 0.0, mean_im = 0.0;
    double c_rr = 0.0, c_ri = 0.0, c_ii = 0.0;  // 2x2 symmetric covariance
  };
  std::vector<ClassStat> classes;

  std::size_t n_classes() const { return classes.size(); }
};

/// Per-class maximum-likelihood fit with eps-regularized covariances.
/// Every class must be observed at least min_per_class times.
GmmModel fit_gmm(const std::vector<LabeledSymbol>& pairs, std::size_t n_classes,
                 std::size_t min_per_class = 8);

/// posterior(m) proportional to prior(m) N(y; mean_m, cov_m), normalized.
std::vector<double> soft_demap(const GmmModel& g, cplx y);

/// Mismatched-decoding AIR with the GMM as auxiliary channel:
/// I = log2 M + (1/N) sum log2 posterior(label | y), clipped at 0.
double mutual_information_bits(const GmmModel& g,
                               const std::vector<LabeledSymbol>& pairs);

double spectral_efficiency(double mi_bits, double symbol_rate_hz,
                           double occupied_bandwidth_hz);

struct MetricsResult {
  double mi_bits = 0.0;
  double eta_bits_s_hz = 0.0;
  std::size_t n_symbols = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Fit on the first half of the frames, estimate MI on the second half,
/// bootstrap the CI over held-out frames.
MetricsResult evaluate_frames(const std::vector<std::vector<LabeledSymbol>>& frames,
                              std::size_t n_classes, double symbol_rate_hz,
                              double occupied_bandwidth_hz, Rng& rng,
                              std::size_t n_bootstrap = 200);

}  // namespace zdiv
