#include "zdiv/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zdiv {

GmmModel fit_gmm(const std::vector<LabeledSymbol>& pairs, std::size_t n_classes,
                 std::size_t min_per_class) {
  if (n_classes == 0) throw std::invalid_argument("fit_gmm: no classes");
  std::vector<std::size_t> count(n_classes, 0);
  std::vector<double> sum_re(n_classes, 0.0), sum_im(n_classes, 0.0);
  for (const auto& p : pairs) {
    if (p.label >= n_classes) throw std::out_of_range("fit_gmm: label out of range");
    ++count[p.label];
    sum_re[p.label] += p.value.real();
    sum_im[p.label] += p.value.imag();
  }
  for (std::size_t m = 0; m < n_classes; ++m)
    if (count[m] < min_per_class)
      throw std::invalid_argument("fit_gmm: class observed too few times");

  GmmModel g;
  g.classes.resize(n_classes);
  for (std::size_t m = 0; m < n_classes; ++m) {
    g.classes[m].mean_re = sum_re[m] / static_cast<double>(count[m]);
    g.classes[m].mean_im = sum_im[m] / static_cast<double>(count[m]);
  }
  double var_sum = 0.0;
  for (const auto& p : pairs) {
    auto& c = g.classes[p.label];
    const double dr = p.value.real() - c.mean_re;
    const double di = p.value.imag() - c.mean_im;
    c.c_rr += dr * dr;
    c.c_ri += dr * di;
    c.c_ii += di * di;
  }
  for (std::size_t m = 0; m < n_classes; ++m) {
    auto& c = g.classes[m];
    const double inv = 1.0 / static_cast<double>(count[m]);
    c.c_rr *= inv;
    c.c_ri *= inv;
    c.c_ii *= inv;
    var_sum += c.c_rr + c.c_ii;
  }
  const double eps = std::max(1e-8 * var_sum / static_cast<double>(n_classes), 1e-300);
  for (auto& c : g.classes) {
    c.c_rr += eps;
    c.c_ii += eps;
  }
  return g;
}

namespace {

// log N(y; mean, cov) for the 2d Gaussian
double log_density(const GmmModel::ClassStat& c, cplx y) {
  const double det = c.c_rr * c.c_ii - c.c_ri * c.c_ri;
  const double dr = y.real() - c.mean_re;
  const double di = y.imag() - c.mean_im;
  const double quad = (c.c_ii * dr * dr - 2.0 * c.c_ri * dr * di + c.c_rr * di * di) / det;
  return -0.5 * quad - 0.5 * std::log(det) - std::log(2.0 * std::numbers::pi);
}

std::vector<double> log_posteriors(const GmmModel& g, cplx y) {
  const std::size_t m = g.n_classes();
  std::vector<double> lp(m);
  double mx = -1e308;
  for (std::size_t k = 0; k < m; ++k) {
    lp[k] = log_density(g.classes[k], y);  // uniform priors cancel
    mx = std::max(mx, lp[k]);
  }
  double z = 0.0;
  for (double v : lp) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);
  for (double& v : lp) v -= log_z;
  return lp;
}

}  // namespace

std::vector<double> soft_demap(const GmmModel& g, cplx y) {
  std::vector<double> lp = log_posteriors(g, y);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

double mutual_information_bits(const GmmModel& g,
                               const std::vector<LabeledSymbol>& pairs) {
  if (pairs.empty()) return 0.0;
  const double log2e = std::numbers::log2e;
  double acc = 0.0;
  for (const auto& p : pairs) {
    const std::vector<double> lp = log_posteriors(g, p.value);
    acc += lp[p.label] * log2e;
  }
  const double mi = std::log2(static_cast<double>(g.n_classes())) +
                    acc / static_cast<double>(pairs.size());
  return std::max(mi, 0.0);
}

double spectral_efficiency(double mi_bits, double symbol_rate_hz,
                           double occupied_bandwidth_hz) {
  if (occupied_bandwidth_hz <= 0.0)
    throw std::invalid_argument("spectral_efficiency: bandwidth must be positive");
  return mi_bits * symbol_rate_hz / occupied_bandwidth_hz;
}

MetricsResult evaluate_frames(const std::vector<std::vector<LabeledSymbol>>& frames,
                              std::size_t n_classes, double symbol_rate_hz,
                              double occupied_bandwidth_hz, Rng& rng,
                              std::size_t n_bootstrap) {
  if (frames.size() < 2)
    throw std::invalid_argument("evaluate_frames: need at least two frames");
  const std::size_t n_fit = frames.size() / 2;
  std::vector<LabeledSymbol> fit_set;
  for (std::size_t i = 0; i < n_fit; ++i)
    fit_set.insert(fit_set.end(), frames[i].begin(), frames[i].end());
  const GmmModel g = fit_gmm(fit_set, n_classes);

  std::vector<std::vector<LabeledSymbol>> held(frames.begin() + static_cast<long>(n_fit),
                                               frames.end());
  std::vector<LabeledSymbol> eval_set;
  for (const auto& f : held) eval_set.insert(eval_set.end(), f.begin(), f.end());

  MetricsResult r;
  r.mi_bits = mutual_information_bits(g, eval_set);
  r.eta_bits_s_hz = spectral_efficiency(r.mi_bits, symbol_rate_hz, occupied_bandwidth_hz);
  r.n_symbols = eval_set.size();

  std::vector<double> boot;
  boot.reserve(n_bootstrap);
  for (std::size_t b = 0; b < n_bootstrap; ++b) {
    std::vector<LabeledSymbol> sample;
    sample.reserve(eval_set.size());
    for (std::size_t i = 0; i < held.size(); ++i) {
      const auto& f = held[rng.uniform_int(static_cast<std::uint32_t>(held.size()))];
      sample.insert(sample.end(), f.begin(), f.end());
    }
    boot.push_back(mutual_information_bits(g, sample));
  }
  std::sort(boot.begin(), boot.end());
  r.ci_low = boot[static_cast<std::size_t>(0.025 * static_cast<double>(boot.size()))];
  r.ci_high = boot[std::min(boot.size() - 1,
                            static_cast<std::size_t>(0.975 * static_cast<double>(boot.size())))];
  return r;
}

}  // namespace zdiv
