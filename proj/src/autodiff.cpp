#include "zdiv/autodiff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace zdiv::ad {

namespace {

void accumulate(cvec& dst, const cvec& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Var Tape::push(cvec value, bool requires_grad, std::function<void()> pull) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.pull = std::move(pull);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::leaf(cvec v, bool requires_grad) {
  return push(std::move(v), requires_grad, nullptr);
}

const cvec& Tape::val(Var v) const { return nodes_.at(v.id).value; }
const cvec& Tape::grad(Var v) const { return nodes_.at(v.id).grad; }
cvec& Tape::grad_ref(std::size_t id) { return nodes_[id].grad; }

void Tape::clear() { nodes_.clear(); }

Var Tape::add(Var a, Var b) {
  const cvec& xa = val(a);
  const cvec& xb = val(b);
  if (xa.size() != xb.size()) throw std::invalid_argument("add: size mismatch");
  cvec y(xa.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xa[i] + xb[i];
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  Var out = push(std::move(y), rg, nullptr);
  const std::size_t io = out.id, ia = a.id, ib = b.id;
  nodes_[io].pull = [this, io, ia, ib] {
    const cvec& g = nodes_[io].grad;
    if (nodes_[ia].requires_grad) accumulate(grad_ref(ia), g);
    if (nodes_[ib].requires_grad) accumulate(grad_ref(ib), g);
  };
  return out;
}

Var Tape::sub(Var a, Var b) {
  const cvec& xa = val(a);
  const cvec& xb = val(b);
  if (xa.size() != xb.size()) throw std::invalid_argument("sub: size mismatch");
  cvec y(xa.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xa[i] - xb[i];
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  Var out = push(std::move(y), rg, nullptr);
  const std::size_t io = out.id, ia = a.id, ib = b.id;
  nodes_[io].pull = [this, io, ia, ib] {
    const cvec& g = nodes_[io].grad;
    if (nodes_[ia].requires_grad) accumulate(grad_ref(ia), g);
    if (nodes_[ib].requires_grad) {
      cvec& gb = grad_ref(ib);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
    }
  };
  return out;
}

Var Tape::scale(Var a, double s) {
  cvec y = val(a);
  for (auto& v : y) v *= s;
  Var out = push(std::move(y), nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia, s] {
    if (!nodes_[ia].requires_grad) return;
    const cvec& g = nodes_[io].grad;
    cvec& ga = grad_ref(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s * g[i];
  };
  return out;
}

Var Tape::spectral_mask(Var a, cvec h) {
  const cvec& x = val(a);
  if (h.size() != x.size())
    throw std::invalid_argument("spectral_mask: response size mismatch");
  cvec y = fft(x);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] *= h[k];
  ifft_inplace(y);
  Var out = push(std::move(y), nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia, h = std::move(h)] {
    if (!nodes_[ia].requires_grad) return;
    cvec g = fft(nodes_[io].grad);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] *= std::conj(h[k]);
    ifft_inplace(g);
    accumulate(grad_ref(ia), g);
  };
  return out;
}

Var Tape::kerr_phase(Var a, double gamma_dz) {
  const cvec& x = val(a);
  cvec y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = x[i] * std::polar(1.0, -gamma_dz * std::norm(x[i]));
  Var out = push(std::move(y), nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia, gamma_dz] {
    if (!nodes_[ia].requires_grad) return;
    const cvec& g = nodes_[io].grad;
    const cvec& x = nodes_[ia].value;
    cvec& ga = grad_ref(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double p = std::norm(x[i]);
      const cplx rot = std::polar(1.0, -gamma_dz * p);
      ga[i] += g[i] * std::conj(rot) * cplx(1.0, gamma_dz * p) -
               cplx(0.0, gamma_dz) * x[i] * x[i] * rot * std::conj(g[i]);
    }
  };
  return out;
}

Var Tape::gather(Var a, std::vector<std::size_t> idx) {
  const cvec& x = val(a);
  cvec y(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= x.size()) throw std::out_of_range("gather: index");
    y[i] = x[idx[i]];
  }
  Var out = push(std::move(y), nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia, idx = std::move(idx)] {
    if (!nodes_[ia].requires_grad) return;
    const cvec& g = nodes_[io].grad;
    cvec& ga = grad_ref(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) ga[idx[i]] += g[i];
  };
  return out;
}

Var Tape::scatter(Var a, std::vector<std::size_t> idx, std::size_t out_size) {
  const cvec& x = val(a);
  if (idx.size() != x.size()) throw std::invalid_argument("scatter: index count");
  cvec y(out_size, cplx(0, 0));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= out_size) throw std::out_of_range("scatter: index");
    y[idx[i]] += x[i];
  }
  Var out = push(std::move(y), nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia, idx = std::move(idx)] {
    if (!nodes_[ia].requires_grad) return;
    const cvec& g = nodes_[io].grad;
    cvec& ga = grad_ref(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) ga[i] += g[idx[i]];
  };
  return out;
}

Var Tape::concat(Var a, Var b) {
  cvec y = val(a);
  y.insert(y.end(), val(b).begin(), val(b).end());
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  Var out = push(std::move(y), rg, nullptr);
  const std::size_t io = out.id, ia = a.id, ib = b.id;
  const std::size_t na = val(a).size();
  nodes_[io].pull = [this, io, ia, ib, na] {
    const cvec& g = nodes_[io].grad;
    if (nodes_[ia].requires_grad) {
      cvec& ga = grad_ref(ia);
      for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
    }
    if (nodes_[ib].requires_grad) {
      cvec& gb = grad_ref(ib);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[na + i];
    }
  };
  return out;
}

Var Tape::split_reim(Var a) {
  const cvec& x = val(a);
  cvec y(2 * x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[2 * i] = cplx(x[i].real(), 0.0);
    y[2 * i + 1] = cplx(x[i].imag(), 0.0);
  }
  Var out = push(std::move(y), nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia] {
    if (!nodes_[ia].requires_grad) return;
    const cvec& g = nodes_[io].grad;
    cvec& ga = grad_ref(ia);
    for (std::size_t i = 0; i < ga.size(); ++i)
      ga[i] += cplx(g[2 * i].real(), g[2 * i + 1].real());
  };
  return out;
}

Var Tape::merge_reim(Var a) {
  const cvec& x = val(a);
  if (x.size() % 2 != 0)
    throw std::invalid_argument("merge_reim: odd input length");
  cvec y(x.size() / 2);
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = cplx(x[2 * i].real(), x[2 * i + 1].real());
  Var out = push(std::move(y), nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia] {
    if (!nodes_[ia].requires_grad) return;
    const cvec& g = nodes_[io].grad;
    cvec& ga = grad_ref(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[2 * i] += cplx(g[i].real(), 0.0);
      ga[2 * i + 1] += cplx(g[i].imag(), 0.0);
    }
  };
  return out;
}

Var Tape::normalize_sum_sq(Var a, double target_sum_sq) {
  const cvec& x = val(a);
  double ss = 0.0;
  for (const auto& v : x) ss += std::norm(v);
  if (ss <= 0.0)
    throw std::domain_error("normalize_sum_sq: zero input");
  const double c = std::sqrt(target_sum_sq / ss);
  cvec y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = c * x[i];
  Var out = push(std::move(y), nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia, c, ss] {
    if (!nodes_[ia].requires_grad) return;
    const cvec& g = nodes_[io].grad;
    const cvec& x = nodes_[ia].value;
    double r = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      r += (std::conj(g[i]) * x[i]).real();
    cvec& ga = grad_ref(ia);
    for (std::size_t i = 0; i < ga.size(); ++i)
      ga[i] += c * g[i] - (c * r / ss) * x[i];
  };
  return out;
}

Var Tape::dense(Var x, Var w, Var b, std::size_t n_in, std::size_t n_out) {
  const cvec& xv = val(x);
  const cvec& wv = val(w);
  const cvec& bv = val(b);
  if (n_in == 0 || n_out == 0 || xv.size() % n_in != 0)
    throw std::invalid_argument("dense: input not a multiple of n_in");
  if (wv.size() != n_in * n_out || bv.size() != n_out)
    throw std::invalid_argument("dense: parameter shape");
  const std::size_t batch = xv.size() / n_in;
  cvec y(batch * n_out);
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t k = 0; k < n_out; ++k) {
      cplx acc = bv[k];
      for (std::size_t j = 0; j < n_in; ++j)
        acc += wv[k * n_in + j] * xv[s * n_in + j];
      y[s * n_out + k] = acc;
    }
  const bool rg = nodes_[x.id].requires_grad || nodes_[w.id].requires_grad ||
                  nodes_[b.id].requires_grad;
  Var out = push(std::move(y), rg, nullptr);
  const std::size_t io = out.id, ix = x.id, iw = w.id, ib = b.id;
  nodes_[io].pull = [this, io, ix, iw, ib, n_in, n_out, batch] {
    const cvec& g = nodes_[io].grad;
    const cvec& xv = nodes_[ix].value;
    const cvec& wv = nodes_[iw].value;
    if (nodes_[ix].requires_grad) {
      cvec& gx = grad_ref(ix);
      for (std::size_t s = 0; s < batch; ++s)
        for (std::size_t j = 0; j < n_in; ++j) {
          cplx acc(0, 0);
          for (std::size_t k = 0; k < n_out; ++k)
            acc += std::conj(wv[k * n_in + j]) * g[s * n_out + k];
          gx[s * n_in + j] += acc;
        }
    }
    if (nodes_[iw].requires_grad) {
      cvec& gw = grad_ref(iw);
      for (std::size_t s = 0; s < batch; ++s)
        for (std::size_t k = 0; k < n_out; ++k)
          for (std::size_t j = 0; j < n_in; ++j)
            gw[k * n_in + j] += std::conj(xv[s * n_in + j]) * g[s * n_out + k];
    }
    if (nodes_[ib].requires_grad) {
      cvec& gb = grad_ref(ib);
      for (std::size_t s = 0; s < batch; ++s)
        for (std::size_t k = 0; k < n_out; ++k) gb[k] += g[s * n_out + k];
    }
  };
  return out;
}

Var Tape::tanh_real(Var a) {
  const cvec& x = val(a);
  cvec y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = cplx(std::tanh(x[i].real()), 0.0);
  Var out = push(std::move(y), nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia] {
    if (!nodes_[ia].requires_grad) return;
    const cvec& g = nodes_[io].grad;
    const cvec& y = nodes_[io].value;
    cvec& ga = grad_ref(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double t = y[i].real();
      ga[i] += cplx((1.0 - t * t) * g[i].real(), 0.0);
    }
  };
  return out;
}

Var Tape::softmax_xent(Var logits, const std::vector<std::uint32_t>& labels,
                       std::size_t n_classes) {
  const cvec& z = val(logits);
  if (n_classes == 0 || z.size() != labels.size() * n_classes)
    throw std::invalid_argument("softmax_xent: shape mismatch");
  const std::size_t batch = labels.size();
  std::vector<double> probs(z.size());
  double loss = 0.0;
  for (std::size_t s = 0; s < batch; ++s) {
    if (labels[s] >= n_classes) throw std::out_of_range("softmax_xent: label");
    double zmax = z[s * n_classes].real();
    for (std::size_t m = 1; m < n_classes; ++m)
      zmax = std::max(zmax, z[s * n_classes + m].real());
    double denom = 0.0;
    for (std::size_t m = 0; m < n_classes; ++m) {
      probs[s * n_classes + m] = std::exp(z[s * n_classes + m].real() - zmax);
      denom += probs[s * n_classes + m];
    }
    for (std::size_t m = 0; m < n_classes; ++m) probs[s * n_classes + m] /= denom;
    loss -= std::log(probs[s * n_classes + labels[s]]);
  }
  loss /= static_cast<double>(batch);
  Var out = push(cvec{cplx(loss, 0.0)}, nodes_[logits.id].requires_grad, nullptr);
  const std::size_t io = out.id, iz = logits.id;
  nodes_[io].pull = [this, io, iz, probs = std::move(probs), labels, n_classes] {
    if (!nodes_[iz].requires_grad) return;
    const double g0 = nodes_[io].grad[0].real();
    const double inv_b = 1.0 / static_cast<double>(labels.size());
    cvec& gz = grad_ref(iz);
    for (std::size_t s = 0; s < labels.size(); ++s)
      for (std::size_t m = 0; m < n_classes; ++m) {
        const double p = probs[s * n_classes + m];
        const double delta = (m == labels[s]) ? 1.0 : 0.0;
        gz[s * n_classes + m] += cplx(g0 * inv_b * (p - delta), 0.0);
      }
  };
  return out;
}

Var Tape::mse(Var a, const cvec& target) {
  const cvec& x = val(a);
  if (x.size() != target.size()) throw std::invalid_argument("mse: size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) loss += 0.5 * std::norm(x[i] - target[i]);
  Var out = push(cvec{cplx(loss, 0.0)}, nodes_[a.id].requires_grad, nullptr);
  const std::size_t io = out.id, ia = a.id;
  nodes_[io].pull = [this, io, ia, target] {
    if (!nodes_[ia].requires_grad) return;
    const double g0 = nodes_[io].grad[0].real();
    const cvec& x = nodes_[ia].value;
    cvec& ga = grad_ref(ia);
    for (std::size_t i = 0; i < ga.size(); ++i)
      ga[i] += g0 * (x[i] - target[i]);
  };
  return out;
}

void Tape::backward(Var loss) {
  if (loss.id >= nodes_.size()) throw std::out_of_range("backward: bad handle");
  if (nodes_[loss.id].value.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar");
  for (auto& n : nodes_) n.grad.assign(n.value.size(), cplx(0, 0));
  nodes_[loss.id].grad[0] = cplx(1.0, 0.0);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.pull) n.pull();
  }
}

cvec dispersion_response(const SamplingGrid& grid, double beta2_ps2_per_km,
                         double length_km) {
  cvec h(grid.n_samples);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double f_thz =
        bin_frequency_hz(k, grid.n_samples, grid.sample_rate_hz) * 1e-12;
    const double w = 2.0 * std::numbers::pi * f_thz;
    h[k] = std::polar(1.0, -0.5 * beta2_ps2_per_km * w * w * length_km);
  }
  return h;
}

cvec lowpass_response(const SamplingGrid& grid, double bandwidth_hz,
                      bool half_weight_edges) {
  cvec h(grid.n_samples, cplx(1.0, 0.0));
  if (half_weight_edges)
    rrc0_mask_inplace(h, grid.sample_rate_hz, bandwidth_hz);
  else
    brickwall_mask_inplace(h, grid.sample_rate_hz, bandwidth_hz);
  return h;
}

double gradient_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    const std::vector<cvec>& leaf_values, double eps) {
  auto eval = [&](const std::vector<cvec>& vals) {
    Tape t;
    std::vector<Var> leaves;
    leaves.reserve(vals.size());
    for (const auto& v : vals) leaves.push_back(t.leaf(v));
    return t.val(build(t, leaves))[0].real();
  };

  Tape t;
  std::vector<Var> leaves;
  for (const auto& v : leaf_values) leaves.push_back(t.leaf(v));
  Var loss = build(t, leaves);
  t.backward(loss);

  double worst = 0.0;
  for (std::size_t l = 0; l < leaf_values.size(); ++l) {
    const cvec& g = t.grad(leaves[l]);
    for (std::size_t i = 0; i < leaf_values[l].size(); ++i) {
      for (int comp = 0; comp < 2; ++comp) {
        auto perturbed = leaf_values;
        const cplx delta = (comp == 0) ? cplx(eps, 0) : cplx(0, eps);
        perturbed[l][i] += delta;
        const double hi = eval(perturbed);
        perturbed[l][i] -= 2.0 * delta;
        const double lo = eval(perturbed);
        const double fd = (hi - lo) / (2.0 * eps);
        const double an = (comp == 0) ? g[i].real() : g[i].imag();
        worst = std::max(worst,
                         std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)}));
      }
    }
  }
  return worst;
}

}  // namespace zdiv::ad
