#ifndef HOPEWAVE_BACKWARD_HPP
#define HOPEWAVE_BACKWARD_HPP

#include "hopewave/equivariant.hpp"
#include "hopewave/error.hpp"
#include "hopewave/model.hpp"

namespace hopewave {

namespace detail {

/// Backward through y = relu?(x W^T + b). `grad_out` is dL/dy; `out` is y (used for
/// the ReLU mask when `relu`). Returns dL/dx and accumulates weight gradients.
inline Matrix dense_backward(const Matrix& x, const Matrix& out, Matrix grad_out, const DenseSlots& s,
                             const ModelParams& p, ParamGrads& g, bool relu) {
  if (relu) grad_out = grad_out.cwiseProduct((out.array() > 0.0).cast<double>().matrix());
  g.block(s.weight).noalias() += grad_out.transpose() * x;
  g.bias(s.bias) += grad_out.colwise().sum().transpose();
  return grad_out * p.block(s.weight);
}

inline Matrix relu_mask(const Matrix& grad, const Matrix& out) {
  return grad.cwiseProduct((out.array() > 0.0).cast<double>().matrix());
}

}  // namespace detail

/// Reverse-mode gradient of a loss w.r.t. every parameter, given
/// dL/d(symmetrized logits) (as produced by masked_bce).
///
/// The trace must come from forward_full on exactly these parameters; a
/// fingerprint mismatch throws InvariantError.
inline ParamGrads backward(const ForwardTrace& trace, const ModelParams& p, const Matrix& grad_sym_logits) {
  if (trace.params_fingerprint != fingerprint(p.values))
    throw InvariantError("stale forward trace: parameters changed since the forward pass");
  const int n = trace.n();
  const auto& dec = trace.decoder;
  const auto& enc = trace.encoder;
  if (grad_sym_logits.rows() != dec.logits.rows() || grad_sym_logits.cols() != dec.logits.cols())
    throw ShapeError("loss gradient shape does not match the prediction tensor");

  ParamGrads g(p);

  // Symmetrization: sym = (L + L^T) / 2.
  Matrix grad = 0.5 * (grad_sym_logits + detail::pair_transpose(grad_sym_logits, n));

  // Head, last layer first.
  const auto& head = p.layout.head;
  for (std::size_t i = head.size(); i-- > 0;) {
    const Matrix& x = i == 0 ? (dec.layers.empty() ? dec.lifted.data : dec.layers.back().data) : dec.head_hidden[i - 1];
    const bool is_last = i + 1 == head.size();
    const Matrix& out = is_last ? dec.logits : dec.head_hidden[i];
    grad = detail::dense_backward(x, out, std::move(grad), head[i], p, g, !is_last);
  }

  // Decoder second-order layers.
  for (std::size_t i = p.layout.decoder.size(); i-- > 0;) {
    const PairTensor& x = i == 0 ? dec.lifted : dec.layers[i - 1];
    auto gw = g.second_order(p.layout.decoder[i]);
    grad = second_order_backward(x, p.second_order(p.layout.decoder[i]), detail::relu_mask(grad, dec.layers[i].data), gw);
  }

  // Lifting F = [outer(Z) || diag(Z)].
  const int dl = p.config.latent_dim;
  const NodeTensor& z = dec.latent;
  NodeTensor grad_z(n, dl);
  for (int i = 0; i < dl; ++i) {
    Eigen::Map<const Matrix> go(grad.col(i).data(), n, n);
    Eigen::Map<const Matrix> gd(grad.col(dl + i).data(), n, n);
    grad_z.col(i) = (go + go.transpose()) * z.col(i) + gd.diagonal();
  }

  // Latent MLP.
  Matrix grad_hidden = detail::dense_backward(enc.hidden, enc.latent, grad_z, p.layout.latent_out, p, g, false);
  Matrix grad_pooled = detail::dense_backward(enc.pooled, enc.hidden, std::move(grad_hidden), p.layout.latent_in, p, g, true);

  // Pooling [diag || row sum / n].
  const PairTensor& top = enc.layers.back();
  const int c = top.channels();
  grad = Matrix::Zero(top.data.rows(), c);
  detail::add_diagonal(grad, grad_pooled.leftCols(c), n);
  detail::add_row_broadcast(grad, grad_pooled.rightCols(c) / static_cast<double>(n), n);

  for (std::size_t i = p.layout.encoder.size(); i-- > 0;) {
    const PairTensor& x = i == 0 ? enc.input : enc.layers[i - 1];
    auto gw = g.second_order(p.layout.encoder[i]);
    grad = second_order_backward(x, p.second_order(p.layout.encoder[i]), detail::relu_mask(grad, enc.layers[i].data), gw);
  }
  return g;
}

}  // namespace hopewave

#endif
