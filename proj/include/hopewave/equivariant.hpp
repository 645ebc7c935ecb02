#ifndef HOPEWAVE_EQUIVARIANT_HPP
#define HOPEWAVE_EQUIVARIANT_HPP

// Permutation-equivariant maps between first-order (n x c) and second-order
// (n x n x c) tensors, plus the reverse-mode rules for each of them.

#include "hopewave/error.hpp"
#include "hopewave/tensor.hpp"

namespace hopewave {

/// out[v, c] = x[v, v, c].
inline NodeTensor eq_diag_extract(const PairTensor& x) {
  NodeTensor out(x.n, x.channels());
  for (int c = 0; c < x.channels(); ++c) out.col(c) = x.channel(c).diagonal();
  return out;
}

/// out[u, c] = sum_v x[u, v, c] / n.
inline NodeTensor eq_row_sum(const PairTensor& x) {
  NodeTensor out(x.n, x.channels());
  const double inv_n = 1.0 / x.n;
  for (int c = 0; c < x.channels(); ++c) out.col(c) = x.channel(c).rowwise().sum() * inv_n;
  return out;
}

/// out[u, v, i] = z[u, i] * z[v, i].
inline PairTensor eq_outer_product(const NodeTensor& z) {
  PairTensor out(static_cast<int>(z.rows()), static_cast<int>(z.cols()));
  for (int i = 0; i < out.channels(); ++i) out.channel(i).noalias() = z.col(i) * z.col(i).transpose();
  return out;
}

/// out[u, u, i] = z[u, i], zero elsewhere.
inline PairTensor eq_diag_embed(const NodeTensor& z) {
  PairTensor out(static_cast<int>(z.rows()), static_cast<int>(z.cols()));
  for (int i = 0; i < out.channels(); ++i) out.channel(i).diagonal() = z.col(i);
  return out;
}

namespace detail {

/// Pair-transpose of an (n*n) x c matrix: row u + v*n <-> row v + u*n.
inline Matrix pair_transpose(const Matrix& y, int n) {
  Matrix out(y.rows(), y.cols());
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    Eigen::Map<const Matrix> src(y.col(c).data(), n, n);
    Eigen::Map<Matrix> dst(out.col(c).data(), n, n);
    dst = src.transpose();
  }
  return out;
}

/// Unnormalized row sums: out[u, c] = sum_v y[u + v*n, c].
inline Matrix pair_row_sums(const Matrix& y, int n) {
  Matrix out(n, y.cols());
  for (Eigen::Index c = 0; c < y.cols(); ++c) out.col(c) = Eigen::Map<const Matrix>(y.col(c).data(), n, n).rowwise().sum();
  return out;
}

/// Unnormalized column sums: out[v, c] = sum_u y[u + v*n, c].
inline Matrix pair_col_sums(const Matrix& y, int n) {
  Matrix out(n, y.cols());
  for (Eigen::Index c = 0; c < y.cols(); ++c)
    out.col(c) = Eigen::Map<const Matrix>(y.col(c).data(), n, n).colwise().sum().transpose();
  return out;
}

inline Matrix pair_diagonal(const Matrix& y, int n) {
  Matrix out(n, y.cols());
  for (Eigen::Index c = 0; c < y.cols(); ++c) out.col(c) = Eigen::Map<const Matrix>(y.col(c).data(), n, n).diagonal();
  return out;
}

/// y[u + v*n, c] += q[u, c].
inline void add_row_broadcast(Matrix& y, const Matrix& q, int n) {
  for (Eigen::Index c = 0; c < y.cols(); ++c) Eigen::Map<Matrix>(y.col(c).data(), n, n).colwise() += q.col(c);
}

/// y[u + v*n, c] += q[v, c].
inline void add_col_broadcast(Matrix& y, const Matrix& q, int n) {
  for (Eigen::Index c = 0; c < y.cols(); ++c)
    Eigen::Map<Matrix>(y.col(c).data(), n, n).rowwise() += q.col(c).transpose();
}

/// y[u + u*n, c] += q[u, c].
inline void add_diagonal(Matrix& y, const Matrix& q, int n) {
  for (Eigen::Index c = 0; c < y.cols(); ++c) Eigen::Map<Matrix>(y.col(c).data(), n, n).diagonal() += q.col(c);
}

}  // namespace detail

/// Weights of one second-order layer. Each w* is c_out x c_in, bias is c_out.
///
/// Basis: identity, transpose, row broadcast of normalized row sums, column
/// broadcast of normalized row sums, diagonal mask; plus a constant bias.
template <typename M, typename V>
struct SecondOrderWeights {
  M identity, transpose, row_bcast, col_bcast, diag;
  V bias;
};

/// Pre-activation of a second-order layer.
template <typename M, typename V>
Matrix second_order_linear(const PairTensor& x, const SecondOrderWeights<M, V>& w) {
  const int n = x.n;
  const auto c_in = x.channels();
  if (w.identity.cols() != c_in || w.bias.size() != w.identity.rows())
    throw ShapeError("second-order layer expects " + std::to_string(w.identity.cols()) + " input channels, got " +
                     std::to_string(c_in));
  Matrix pre = x.data * w.identity.transpose();
  pre += detail::pair_transpose(x.data * w.transpose.transpose(), n);
  const Matrix rs = detail::pair_row_sums(x.data, n) / static_cast<double>(n);
  detail::add_row_broadcast(pre, rs * w.row_bcast.transpose(), n);
  detail::add_col_broadcast(pre, rs * w.col_bcast.transpose(), n);
  detail::add_diagonal(pre, detail::pair_diagonal(x.data, n) * w.diag.transpose(), n);
  pre.rowwise() += w.bias.transpose();
  return pre;
}

/// ReLU(second_order_linear(x, w)).
template <typename M, typename V>
PairTensor second_order_layer(const PairTensor& x, const SecondOrderWeights<M, V>& w) {
  return PairTensor(x.n, second_order_linear(x, w).cwiseMax(0.0));
}

/// Reverse mode of second_order_linear. `grad_pre` is dL/d(pre-activation);
/// weight gradients are accumulated into `gw`, and dL/dx is returned.
template <typename M, typename V, typename GM, typename GV>
Matrix second_order_backward(const PairTensor& x, const SecondOrderWeights<M, V>& w, const Matrix& grad_pre,
                             SecondOrderWeights<GM, GV>& gw) {
  const int n = x.n;
  const double inv_n = 1.0 / n;
  const Matrix rs = detail::pair_row_sums(x.data, n) * inv_n;
  const Matrix dg = detail::pair_diagonal(x.data, n);

  gw.identity.noalias() += grad_pre.transpose() * x.data;
  Matrix dx = grad_pre * w.identity;

  const Matrix gt = detail::pair_transpose(grad_pre, n);
  gw.transpose.noalias() += gt.transpose() * x.data;
  dx.noalias() += gt * w.transpose;

  const Matrix h_row = detail::pair_row_sums(grad_pre, n);
  const Matrix h_col = detail::pair_col_sums(grad_pre, n);
  gw.row_bcast.noalias() += h_row.transpose() * rs;
  gw.col_bcast.noalias() += h_col.transpose() * rs;
  const Matrix d_rs = (h_row * w.row_bcast + h_col * w.col_bcast) * inv_n;
  detail::add_row_broadcast(dx, d_rs, n);

  const Matrix g_diag = detail::pair_diagonal(grad_pre, n);
  gw.diag.noalias() += g_diag.transpose() * dg;
  detail::add_diagonal(dx, g_diag * w.diag, n);

  gw.bias += grad_pre.colwise().sum().transpose();
  return dx;
}

}  // namespace hopewave

#endif
