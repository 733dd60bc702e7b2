#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zdiv/dsp.hpp"
#include "zdiv/experiments.hpp"
#include "zdiv/gmm.hpp"
#include "zdiv/link.hpp"
#include "zdiv/solitons.hpp"
#include "zdiv/transceiver.hpp"

namespace py = pybind11;
using namespace zdiv;

namespace {

using carray = py::array_t<std::complex<double>, py::array::forcecast>;

Signal to_signal(const carray& q, double sample_rate_hz) {
  if (q.ndim() != 1) throw std::invalid_argument("expected a 1-d complex array");
  auto r = q.unchecked<1>();
  Signal s;
  s.samples.resize(static_cast<std::size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i)
    s.samples[static_cast<std::size_t>(i)] = r(i);
  const auto n = static_cast<double>(s.samples.size());
  s.grid = SamplingGrid::make(sample_rate_hz, sample_rate_hz / n, 1);
  return s;
}

carray from_cvec(const cvec& v) {
  std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
  carray out(shape);
  auto r = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < v.size(); ++i)
    r(static_cast<py::ssize_t>(i)) = v[i];
  return out;
}

FiberSpec make_fiber(double beta2, double gamma, double alpha_db, double nsp) {
  FiberSpec f;
  f.beta2_ps2_per_km = beta2;
  f.gamma_per_w_km = gamma;
  f.alpha_db_per_km = alpha_db;
  f.nsp_raman = nsp;
  return f;
}

}  // namespace

PYBIND11_MODULE(_zdiv, m) {
  m.doc() = "split-step fiber simulation, z-diversity links and GMM metrics";

  m.def(
      "ssfm",
      [](const carray& q, double sample_rate_hz, double length_km, double beta2,
         double gamma, double alpha_db, double nsp, double step_km, bool noise,
         double noise_bandwidth_hz, std::uint64_t seed) {
        Signal x = to_signal(q, sample_rate_hz);
        SsfmConfig cfg;
        cfg.step_km = step_km;
        cfg.noise_enabled = noise;
        cfg.noise_bandwidth_hz =
            noise_bandwidth_hz > 0.0 ? noise_bandwidth_hz : sample_rate_hz;
        Rng rng(seed);
        return from_cvec(
            ssfm_propagate(x, make_fiber(beta2, gamma, alpha_db, nsp), length_km,
                           cfg, rng)
                .samples);
      },
      py::arg("q"), py::arg("sample_rate_hz"), py::arg("length_km"),
      py::arg("beta2") = -21.67, py::arg("gamma") = 1.27,
      py::arg("alpha_db") = 0.2, py::arg("nsp") = 1.0, py::arg("step_km") = 0.1,
      py::arg("noise") = false, py::arg("noise_bandwidth_hz") = 0.0,
      py::arg("seed") = 1,
      "Split-step propagation of a complex envelope (t in ps, z in km, W).");

  m.def(
      "cdc",
      [](const carray& q, double sample_rate_hz, double beta2, double length_km) {
        return from_cvec(cdc(to_signal(q, sample_rate_hz), beta2, length_km).samples);
      },
      py::arg("q"), py::arg("sample_rate_hz"), py::arg("beta2") = -21.67,
      py::arg("length_km") = 1000.0, "Chromatic dispersion compensation.");

  m.def(
      "dbp",
      [](const carray& q, double sample_rate_hz, double length_km, double beta2,
         double gamma, double steps_per_km, double oversampling_hz) {
        DbpConfig cfg;
        cfg.n_steps_per_km = steps_per_km;
        cfg.oversampling_hz = oversampling_hz;
        return from_cvec(dbp(to_signal(q, sample_rate_hz),
                             make_fiber(beta2, gamma, 0.2, 1.0), length_km, cfg)
                             .samples);
      },
      py::arg("q"), py::arg("sample_rate_hz"), py::arg("length_km"),
      py::arg("beta2") = -21.67, py::arg("gamma") = 1.27,
      py::arg("steps_per_km") = 1.0, py::arg("oversampling_hz") = 0.0,
      "Digital backpropagation, optionally at a reduced internal rate.");

  m.def(
      "two_soliton",
      [](double sample_rate_hz, std::size_t n_samples, double t0_ps,
         std::vector<double> etas, double beta2, double gamma) {
        SolitonSpec spec{t0_ps, std::move(etas)};
        const auto grid = SamplingGrid::make(
            sample_rate_hz, sample_rate_hz / static_cast<double>(n_samples), 1);
        return from_cvec(
            two_soliton_from_eigenvalues(spec, make_fiber(beta2, gamma, 0.2, 1.0),
                                         grid)
                .samples);
      },
      py::arg("sample_rate_hz"), py::arg("n_samples"), py::arg("t0_ps") = 50.0,
      py::arg("etas") = std::vector<double>{0.5, 1.0}, py::arg("beta2") = -21.67,
      py::arg("gamma") = 1.27, "Bound two-soliton from its eigenvalues.");

  m.def(
      "soliton_period_km",
      [](double t0_ps, std::vector<double> etas, double beta2) {
        SolitonSpec spec{t0_ps, std::move(etas)};
        return soliton_period_km(spec, make_fiber(beta2, 1.27, 0.2, 1.0));
      },
      py::arg("t0_ps") = 50.0, py::arg("etas") = std::vector<double>{0.5, 1.0},
      py::arg("beta2") = -21.67, "Breathing period of a bound soliton pair.");

  m.def(
      "zs_eigenvalues",
      [](const carray& q, double sample_rate_hz, double t0_ps, double beta2,
         double gamma) {
        return zs_eigenvalues(to_signal(q, sample_rate_hz), t0_ps,
                              make_fiber(beta2, gamma, 0.2, 1.0));
      },
      py::arg("q"), py::arg("sample_rate_hz"), py::arg("t0_ps") = 50.0,
      py::arg("beta2") = -21.67, py::arg("gamma") = 1.27,
      "Imaginary parts of the discrete Zakharov-Shabat spectrum.");

  m.def(
      "simulate_link",
      [](const carray& q, double sample_rate_hz, const std::string& mode,
         double l1_km, double l2_km, double adc_bandwidth_hz, double step_km,
         bool noise, std::uint64_t seed) {
        LinkTopology topo;
        topo.mode = link_mode_from_string(mode);
        topo.l1_km = l1_km;
        topo.l2_km = l2_km;
        topo.adc_bandwidth_hz = adc_bandwidth_hz;
        topo.ssfm.step_km = step_km;
        topo.ssfm.noise_enabled = noise;
        topo.ssfm.noise_bandwidth_hz = sample_rate_hz;
        Rng rng(seed);
        const LinkOutput y = simulate_link(to_signal(q, sample_rate_hz), topo, rng);
        return py::make_tuple(from_cvec(y.y1.samples), from_cvec(y.y2.samples));
      },
      py::arg("q"), py::arg("sample_rate_hz"), py::arg("mode") = "sd",
      py::arg("l1_km") = 1000.0, py::arg("l2_km") = 0.0,
      py::arg("adc_bandwidth_hz") = 20e9, py::arg("step_km") = 0.1,
      py::arg("noise") = false, py::arg("seed") = 1,
      "Two-tap z-diversity link; returns (y1, y2) after the receiver band cut.");

  m.def(
      "constellation_rings",
      [](std::size_t n_rings, std::size_t n_phases) {
        return from_cvec(Constellation::rings(n_rings, n_phases).points);
      },
      py::arg("n_rings"), py::arg("n_phases"),
      "Ring constellation points, unit mean power.");

  m.def(
      "gmm_mutual_information",
      [](const std::vector<std::uint32_t>& labels, const carray& symbols,
         std::size_t n_classes) {
        auto buf = symbols.request();
        if (buf.ndim != 1 ||
            static_cast<std::size_t>(buf.shape[0]) != labels.size())
          throw std::invalid_argument("labels and symbols must match");
        const auto* data = static_cast<const std::complex<double>*>(buf.ptr);
        std::vector<LabeledSymbol> pairs(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i)
          pairs[i] = {labels[i], data[i]};
        return mutual_information_bits(fit_gmm(pairs, n_classes), pairs);
      },
      py::arg("labels"), py::arg("symbols"), py::arg("n_classes"),
      "Fit the GMM demapper and return the achievable rate in bits/symbol.");

  m.def(
      "ase_sigma2",
      [](double alpha_db, double dz_km, double bandwidth_hz, double nsp,
         double f0_hz) {
        FiberSpec f = make_fiber(-21.67, 1.27, alpha_db, nsp);
        f.f0_hz = f0_hz;
        return ase_sigma2_watt(f, dz_km, bandwidth_hz);
      },
      py::arg("alpha_db") = 0.2, py::arg("dz_km") = 1.0,
      py::arg("bandwidth_hz") = 20e9, py::arg("nsp") = 1.0,
      py::arg("f0_hz") = 193.55e12, "Per-step distributed ASE variance in W.");

  m.def(
      "run_scenario",
      [](const std::string& config_text) {
        const auto cfg =
            ExperimentConfig::from_kv(KeyValueConfig::parse(config_text));
        const auto rows = run_scenario(cfg);
        return csv_header() + csv_body(rows);
      },
      py::arg("config_text"),
      "Run an experiment scenario from config text; returns the CSV.");
}
