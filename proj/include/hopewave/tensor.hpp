#ifndef HOPEWAVE_TENSOR_HPP
#define HOPEWAVE_TENSOR_HPP

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hopewave/error.hpp"

namespace hopewave {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// First-order tensor: one row per node, one column per channel.
using NodeTensor = Eigen::MatrixXd;

/// Second-order tensor of shape n x n x c.
///
/// Stored as an (n*n) x c matrix whose column c is channel c in column-major
/// order, so entry (u, v, c) lives at row u + v*n. A channel can be viewed as
/// an n x n matrix without copying.
struct PairTensor {
  int n = 0;
  Matrix data;

  PairTensor() = default;
  PairTensor(int nodes, int channels) : n(nodes), data(Matrix::Zero(nodes * nodes, channels)) {}
  PairTensor(int nodes, Matrix values) : n(nodes), data(std::move(values)) {
    if (data.rows() != static_cast<Eigen::Index>(n) * n)
      throw ShapeError("pair tensor rows " + std::to_string(data.rows()) + " != n*n for n=" +
                       std::to_string(n));
  }

  int channels() const { return static_cast<int>(data.cols()); }

  double& operator()(int u, int v, int c) { return data(u + v * n, c); }
  double operator()(int u, int v, int c) const { return data(u + v * n, c); }

  Eigen::Map<Matrix> channel(int c) { return {data.col(c).data(), n, n}; }
  Eigen::Map<const Matrix> channel(int c) const { return {data.col(c).data(), n, n}; }

  void set_channel(int c, const Matrix& m) {
    if (m.rows() != n || m.cols() != n) throw ShapeError("channel shape mismatch");
    channel(c) = m;
  }

  static PairTensor from_channels(const std::vector<Matrix>& chans) {
    if (chans.empty()) throw ShapeError("no channels");
    PairTensor t(static_cast<int>(chans.front().rows()), static_cast<int>(chans.size()));
    for (std::size_t c = 0; c < chans.size(); ++c) t.set_channel(static_cast<int>(c), chans[c]);
    return t;
  }
};

/// A node relabeling: node i of the input becomes node `image[i]`.
class Permutation {
public:
  Permutation() = default;
  explicit Permutation(std::vector<int> image) : image_(std::move(image)) {
    std::vector<char> seen(image_.size(), 0);
    for (int v : image_) {
      if (v < 0 || static_cast<std::size_t>(v) >= image_.size() || seen[static_cast<std::size_t>(v)])
        throw InputError("not a permutation");
      seen[static_cast<std::size_t>(v)] = 1;
    }
  }

  static Permutation identity(int n) {
    std::vector<int> img(static_cast<std::size_t>(n));
    std::iota(img.begin(), img.end(), 0);
    return Permutation(std::move(img));
  }

  int size() const { return static_cast<int>(image_.size()); }
  int operator()(int i) const { return image_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& image() const { return image_; }

  Permutation inverse() const {
    std::vector<int> inv(image_.size());
    for (std::size_t i = 0; i < image_.size(); ++i) inv[static_cast<std::size_t>(image_[i])] = static_cast<int>(i);
    return Permutation(std::move(inv));
  }

  /// (this ∘ other)(i) = this(other(i)).
  Permutation compose(const Permutation& other) const {
    if (other.size() != size()) throw ShapeError("permutation sizes differ");
    std::vector<int> img(image_.size());
    for (std::size_t i = 0; i < image_.size(); ++i) img[i] = (*this)(other(static_cast<int>(i)));
    return Permutation(std::move(img));
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

private:
  std::vector<int> image_;
};

/// sigma(Z) = P Z: row i moves to row sigma(i).
inline NodeTensor permute(const NodeTensor& z, const Permutation& sigma) {
  if (z.rows() != sigma.size()) throw ShapeError("permutation size does not match tensor");
  NodeTensor out(z.rows(), z.cols());
  for (int i = 0; i < sigma.size(); ++i) out.row(sigma(i)) = z.row(i);
  return out;
}

/// sigma(X) = P X P^T on every channel.
inline PairTensor permute(const PairTensor& x, const Permutation& sigma) {
  if (x.n != sigma.size()) throw ShapeError("permutation size does not match tensor");
  PairTensor out(x.n, x.channels());
  const int n = x.n;
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u) out.data.row(sigma(u) + sigma(v) * n) = x.data.row(u + v * n);
  return out;
}

/// Dense n x n matrix version of the pair action.
inline Matrix permute_matrix(const Matrix& a, const Permutation& sigma) {
  if (a.rows() != sigma.size() || a.cols() != sigma.size()) throw ShapeError("permutation size mismatch");
  Matrix out(a.rows(), a.cols());
  for (int v = 0; v < sigma.size(); ++v)
    for (int u = 0; u < sigma.size(); ++u) out(sigma(u), sigma(v)) = a(u, v);
  return out;
}

}  // namespace hopewave

#endif
