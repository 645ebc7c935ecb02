#ifndef HOPEWAVE_TESTS_ORACLES_HPP
#define HOPEWAVE_TESTS_ORACLES_HPP

// Independent reference computations for the tests. Nothing here calls the
// library routine it is used to check.

#include <Eigen/Eigenvalues>
#include <vector>

#include "hopewave/graph.hpp"
#include "hopewave/random.hpp"
#include "hopewave/tensor.hpp"

namespace oracle {

using hopewave::Graph;
using hopewave::Matrix;

/// reach[u][v] = 1 iff a walk of exactly `length` edges joins u to v.
/// Layered frontier propagation from every source.
inline Matrix walk_reachability(const Graph& g, int length) {
  const int n = g.n();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (auto [u, v] : g.edges()) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  Matrix out = Matrix::Zero(n, n);
  for (int src = 0; src < n; ++src) {
    std::vector<char> layer(static_cast<std::size_t>(n), 0);
    layer[static_cast<std::size_t>(src)] = 1;
    for (int step = 0; step < length; ++step) {
      std::vector<char> next(static_cast<std::size_t>(n), 0);
      for (int u = 0; u < n; ++u)
        if (layer[static_cast<std::size_t>(u)])
          for (int w : adj[static_cast<std::size_t>(u)]) next[static_cast<std::size_t>(w)] = 1;
      layer.swap(next);
    }
    for (int v = 0; v < n; ++v) out(src, v) = layer[static_cast<std::size_t>(v)];
  }
  return out;
}

/// G(n, p) by independent coin flips over all pairs.
inline Graph random_graph(hopewave::Rng& rng, int n, double p) {
  std::vector<hopewave::Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.emplace_back(u, v);
  return Graph(n, edges);
}

inline hopewave::Permutation random_permutation(hopewave::Rng& rng, int n) {
  std::vector<int> image(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) image[static_cast<std::size_t>(i)] = i;
  rng.shuffle(image);
  return hopewave::Permutation(image);
}

/// Normalized Laplacian built entry by entry from the definition.
inline Matrix laplacian(const Graph& g) {
  const Matrix a = g.adjacency();
  const int n = g.n();
  Matrix l = Matrix::Identity(n, n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      const double du = a.row(u).sum(), dv = a.row(v).sum();
      if (a(u, v) != 0.0) l(u, v) -= 1.0 / std::sqrt(du * dv);
    }
  return l;
}

/// exp(-s L) from Eigen's self-adjoint solver.
inline Matrix heat_kernel(const Matrix& l, double s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(l);
  return es.eigenvectors() * (-s * es.eigenvalues().array()).exp().matrix().asDiagonal() * es.eigenvectors().transpose();
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace oracle

#endif
