#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "zdiv/fft.hpp"
#include "zdiv/signal.hpp"

namespace zdiv::ad {

/// Handle into a Tape. Valid until the tape is cleared.
struct Var {
  std::size_t id = 0;
};

/// Eager reverse-mode tape over complex vectors.
///
/// Gradient convention for a real scalar loss L: the gradient stored for a
/// complex vector x is g_i = dL/dRe(x_i) + j dL/dIm(x_i). For vectors that
/// carry real data (zero imaginary part) the real gradient is Re(g).
class Tape {
 public:
  Var leaf(cvec v, bool requires_grad = true);
  Var constant(cvec v) { return leaf(std::move(v), false); }

  const cvec& val(Var v) const;
  const cvec& grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  void clear();

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double s);

  /// y = ifft(h .* fft(x)); covers dispersion and band-limiting filters.
  Var spectral_mask(Var a, cvec h);
  /// y_i = x_i exp(-j g |x_i|^2), the per-step Kerr rotation with g=gamma*dz.
  Var kerr_phase(Var a, double gamma_dz);
  /// y_i = x[idx_i]; adjoint scatter-adds.
  Var gather(Var a, std::vector<std::size_t> idx);
  /// y[idx_i] = x_i into a zero vector of out_size; adjoint gathers.
  Var scatter(Var a, std::vector<std::size_t> idx, std::size_t out_size);
  Var concat(Var a, Var b);
  /// Complex length-n vector to interleaved (re, im) real storage, length 2n.
  Var split_reim(Var a);
  /// Inverse of split_reim: y_i = x[2i] + j x[2i+1] (real parts used).
  Var merge_reim(Var a);
  /// Rescales so that sum |y_i|^2 == target_sum_sq.
  Var normalize_sum_sq(Var a, double target_sum_sq);

  /// Batched affine map on real-valued storage: x is B x n_in flattened,
  /// w is n_out x n_in row-major, b is n_out. Result is B x n_out.
  Var dense(Var x, Var w, Var b, std::size_t n_in, std::size_t n_out);
  /// Elementwise tanh of the real part (imaginary part dropped).
  Var tanh_real(Var a);

  /// Mean cross-entropy of row-wise softmax over B x n_classes real logits.
  Var softmax_xent(Var logits, const std::vector<std::uint32_t>& labels,
                   std::size_t n_classes);
  /// 0.5 * sum |x_i - t_i|^2.
  Var mse(Var a, const cvec& target);

  /// Seeds d(loss)/d(loss)=1 and runs the closures in reverse order.
  /// loss must be a real scalar node.
  void backward(Var loss);

 private:
  struct Node {
    cvec value;
    cvec grad;
    bool requires_grad = false;
    std::function<void()> pull;  // accumulates this node's grad into parents
  };
  std::vector<Node> nodes_;

  Var push(cvec value, bool requires_grad, std::function<void()> pull);
  cvec& grad_ref(std::size_t id);
};

/// Frequency response of the half/full dispersion step on this grid:
/// exp(-j (beta2/2) w^2 L) with w in rad/ps and L in km.
cvec dispersion_response(const SamplingGrid& grid, double beta2_ps2_per_km,
                         double length_km);
/// Brickwall response with half-weight edge bins (matches pulse_shape_rrc0).
cvec lowpass_response(const SamplingGrid& grid, double bandwidth_hz,
                      bool half_weight_edges);

/// Max relative error between analytic and central-difference gradients of a
/// scalar-building function, probed on every re/im component of every leaf.
double gradient_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    const std::vector<cvec>& leaf_values, double eps = 1e-6);

}  // namespace zdiv::ad
