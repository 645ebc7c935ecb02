#ifndef HOPEWAVE_SPECTRAL_HPP
#define HOPEWAVE_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hopewave/error.hpp"
#include "hopewave/graph.hpp"
#include "hopewave/tensor.hpp"

namespace hopewave {

/// Ascending eigenvalues and orthonormal eigenvectors (as columns).
struct EigenDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;
};

/// Sweep limit and convergence threshold of the Jacobi eigensolver.
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kJacobiTolerance = 1e-12;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// kJacobiTolerance * max(1, |m|_F). Eigenvectors are signed so that their
/// first component with magnitude above 1e-12 is positive.
inline EigenDecomposition eigh_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("eigh_symmetric needs a square matrix");
  const Eigen::Index n = m.rows();
  if (n > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw InputError("eigh_symmetric: matrix is not symmetric");

  Matrix a = m;
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(1.0, m.norm());
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  bool converged = false;
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    if (off_norm() <= kJacobiTolerance * scale) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_norm() > kJacobiTolerance * scale)
    throw NumericError("Jacobi eigensolver did not converge in " + std::to_string(kJacobiMaxSweeps) + " sweeps");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    Vector col = v.col(src);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > 1e-12) {
        if (col(i) < 0) col = -col;
        break;
      }
    }
    out.eigenvectors.col(k) = col;
  }
  return out;
}

/// U f(Lambda) U^T.
template <typename F>
Matrix spectral_function(const EigenDecomposition& eig, F&& f) {
  Vector fl(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < fl.size(); ++i) fl(i) = f(eig.eigenvalues(i));
  return eig.eigenvectors * fl.asDiagonal() * eig.eigenvectors.transpose();
}

enum class WaveletMethod { exact, chebyshev };

inline const char* to_string(WaveletMethod m) { return m == WaveletMethod::exact ? "exact" : "chebyshev"; }

inline WaveletMethod parse_wavelet_method(const std::string& s) {
  if (s == "exact") return WaveletMethod::exact;
  if (s == "chebyshev") return WaveletMethod::chebyshev;
  throw InputError("unknown wavelet method '" + s + "' (expected exact or chebyshev)");
}

/// Heat-kernel wavelets psi_s = exp(-s L) at k scales, stacked as an n x n x k tensor.
struct WaveletTensor {
  std::vector<double> scales;
  PairTensor data;
  WaveletMethod method = WaveletMethod::exact;
  int order = 0;  ///< Chebyshev order; 0 for exact

  int n() const { return data.n; }
  int channels() const { return data.channels(); }
};

inline const std::vector<double>& default_scales() {
  static const std::vector<double> s{1.0, 2.0, 4.0, 16.0};
  return s;
}

inline void validate_scales(const std::vector<double>& scales) {
  if (scales.empty()) throw InputError("scale list is empty");
  for (double s : scales)
    if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("scales must be finite and non-negative");
}

inline WaveletTensor wavelet_exact(const NormalizedOperators& ops, const std::vector<double>& scales) {
  validate_scales(scales);
  const EigenDecomposition eig = eigh_symmetric(ops.laplacian);
  WaveletTensor w{scales, PairTensor(ops.n(), static_cast<int>(scales.size())), WaveletMethod::exact, 0};
  for (std::size_t j = 0; j < scales.size(); ++j) {
    const double s = scales[j];
    w.data.set_channel(static_cast<int>(j), spectral_function(eig, [s](double l) { return std::exp(-s * l); }));
  }
  return w;
}

/// Truncated Chebyshev series for exp(-s x) on [0, lambda_max].
///
/// coefficients[0] already carries the 1/2 factor, so the approximation is
/// sum_j c_j T_j(y) with y = 2x/lambda_max - 1.
struct ChebyshevExpansion {
  int order = 0;
  double scale = 0.0;
  double lambda_max = 2.0;
  std::vector<double> coefficients;
  double residual = 0.0;  ///< max |approx - exp| over 2M+1 Chebyshev nodes

  double operator()(double x) const {
    const double y = 2.0 * x / lambda_max - 1.0;
    // Clenshaw recurrence.
    double b1 = 0.0, b2 = 0.0;
    for (int j = order; j >= 1; --j) {
      const double b0 = 2.0 * y * b1 - b2 + coefficients[static_cast<std::size_t>(j)];
      b2 = b1;
      b1 = b0;
    }
    return y * b1 - b2 + coefficients[0];
  }
};

inline ChebyshevExpansion chebyshev_fit(double s, double lambda_max, int order) {
  if (order < 1) throw InputError("Chebyshev order must be >= 1");
  if (!(lambda_max > 0.0)) throw InputError("lambda_max must be positive");
  const double pi = std::numbers::pi;
  const int nq = 4 * (order + 1);
  std::vector<double> fvals(static_cast<std::size_t>(nq));
  for (int k = 0; k < nq; ++k) {
    const double y = std::cos(pi * (k + 0.5) / nq);
    fvals[static_cast<std::size_t>(k)] = std::exp(-s * 0.5 * lambda_max * (y + 1.0));
  }
  ChebyshevExpansion e{order, s, lambda_max, std::vector<double>(static_cast<std::size_t>(order) + 1, 0.0), 0.0};
  for (int j = 0; j <= order; ++j) {
    double acc = 0.0;
    for (int k = 0; k < nq; ++k) acc += fvals[static_cast<std::size_t>(k)] * std::cos(pi * j * (k + 0.5) / nq);
    e.coefficients[static_cast<std::size_t>(j)] = 2.0 * acc / nq;
  }
  e.coefficients[0] *= 0.5;
  const int nr = 2 * order + 1;
  for (int k = 0; k < nr; ++k) {
    const double x = 0.5 * lambda_max * (std::cos(pi * (k + 0.5) / nr) + 1.0);
    e.residual = std::max(e.residual, std::abs(e(x) - std::exp(-s * x)));
  }
  return e;
}

/// Fast wavelet transform: psi_s applied to every basis vector through the
/// Chebyshev three-term recurrence, using only edge-list products with the
/// shifted operator L - I = -D^{-1/2} A D^{-1/2} (lambda_max fixed at 2).
/// Cost O(n * |E| * M) for all scales together.
inline WaveletTensor wavelet_chebyshev(const Graph& g, const std::vector<double>& scales, int order) {
  validate_scales(scales);
  if (order < 1) throw InputError("Chebyshev order must be >= 1");
  constexpr double kLambdaMax = 2.0;
  const int n = g.n();
  const Vector inv_sqrt = inverse_sqrt_degrees(g);
  struct WEdge {
    int u, v;
    double w;
  };
  std::vector<WEdge> wedges;
  wedges.reserve(g.edge_count());
  for (auto [u, v] : g.edges()) wedges.push_back({u, v, inv_sqrt(u) * inv_sqrt(v)});

  // Rows index nodes, columns index the basis vector being transformed; every
  // column evolves independently.
  auto shifted = [&](const Matrix& x) {
    Matrix y = Matrix::Zero(n, n);
    for (const auto& e : wedges) {
      y.row(e.u) -= e.w * x.row(e.v);
      y.row(e.v) -= e.w * x.row(e.u);
    }
    return y;
  };

  std::vector<ChebyshevExpansion> fits;
  for (double s : scales) fits.push_back(chebyshev_fit(s, kLambdaMax, order));

  std::vector<Matrix> acc(scales.size());
  Matrix t_prev = Matrix::Identity(n, n);
  Matrix t_cur = shifted(t_prev);
  for (std::size_t j = 0; j < scales.size(); ++j)
    acc[j] = fits[j].coefficients[0] * t_prev + fits[j].coefficients[1] * t_cur;
  for (int k = 2; k <= order; ++k) {
    Matrix t_next = 2.0 * shifted(t_cur) - t_prev;
    for (std::size_t j = 0; j < scales.size(); ++j) acc[j] += fits[j].coefficients[static_cast<std::size_t>(k)] * t_next;
    t_prev = std::move(t_cur);
    t_cur = std::move(t_next);
  }

  WaveletTensor w{scales, PairTensor(n, static_cast<int>(scales.size())), WaveletMethod::chebyshev, order};
  for (std::size_t j = 0; j < scales.size(); ++j)
    w.data.set_channel(static_cast<int>(j), 0.5 * (acc[j] + acc[j].transpose()));
  return w;
}

inline WaveletTensor compute_wavelet(const Graph& g, const std::vector<double>& scales, WaveletMethod method,
                                     int order) {
  return method == WaveletMethod::exact ? wavelet_exact(normalized_operators(g), scales)
                                        : wavelet_chebyshev(g, scales, order);
}

/// Estimated powers (I - L)^j, j = 1..d, read off a wavelet ladder.
struct LaplacianPowerRecovery {
  PairTensor powers;     ///< channel j-1 estimates (I - L)^j
  Matrix coefficients;   ///< (d+1) x d map from [1, psi_s, ..., psi_ds] to the powers
  double residual = 0.0; ///< max spectral fit error over the eigenvalue samples
  int rank = 0;
  bool rank_deficient = false;
};

/// Recover (I - L)^j from wavelets at scales s, 2s, ..., ds.
///
/// Every channel is a function of the same eigenvalues, so a single linear map
/// sends {1, e^{-s l}, ..., e^{-ds l}} to {(1-l), ..., (1-l)^d}. It is fitted by
/// least squares over the distinct eigenvalues of the graph (read off the first
/// channel) and applied channel-wise. The constant column is needed because
/// e^{-js l} - 1 vanishes at l = 0 while (1-l)^j does not.
inline LaplacianPowerRecovery recover_laplacian_powers(const WaveletTensor& w) {
  if (w.method != WaveletMethod::exact) throw InputError("power recovery needs an exact wavelet tensor");
  const int d = w.channels();
  const double s = w.scales.front();
  if (!(s > 0.0)) throw InputError("power recovery needs a positive base scale");
  for (int j = 0; j < d; ++j)
    if (std::abs(w.scales[static_cast<std::size_t>(j)] - (j + 1) * s) > 1e-9 * (j + 1) * s)
      throw InputError("scales must form the ladder s, 2s, ..., ds");

  const EigenDecomposition eig = eigh_symmetric(Matrix(w.data.channel(0)));
  std::vector<double> lambdas;
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double mu = std::max(eig.eigenvalues(i), 1e-300);
    const double l = -std::log(mu) / s;
    if (lambdas.empty() || std::abs(l - lambdas.back()) > 1e-8) lambdas.push_back(l);
  }
  // eigenvalues of psi_s are ascending, so lambdas are descending and clustered.

  const auto m = static_cast<Eigen::Index>(lambdas.size());
  Matrix design(m, d + 1), target(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double l = lambdas[static_cast<std::size_t>(i)];
    const double mu = std::exp(-s * l);
    double p = 1.0, q = 1.0;
    for (int j = 0; j <= d; ++j) {
      design(i, j) = p;
      p *= mu;
    }
    for (int j = 0; j < d; ++j) {
      q *= (1.0 - l);
      target(i, j) = q;
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  cod.setThreshold(1e-12);
  LaplacianPowerRecovery out;
  out.coefficients = cod.solve(target);
  out.rank = static_cast<int>(cod.rank());
  out.rank_deficient = out.rank < d + 1;
  out.residual = m > 0 ? (design * out.coefficients - target).cwiseAbs().maxCoeff() : 0.0;

  const int n = w.n();
  out.powers = PairTensor(n, d);
  for (int k = 0; k < d; ++k) {
    Matrix est = out.coefficients(0, k) * Matrix::Identity(n, n);
    for (int j = 0; j < d; ++j) est += out.coefficients(j + 1, k) * w.data.channel(j);
    out.powers.set_channel(k, est);
  }
  return out;
}

/// Two-unit ReLU network relu(x/eps) - relu(x/eps - 1) = clamp(x/eps, 0, 1).
inline double step_surrogate(double x, double eps) {
  const double h = x / eps;
  return std::max(0.0, h) - std::max(0.0, h - 1.0);
}

/// (D^{-1/2} A D^{-1/2})^j by repeated multiplication. Nonnegative, so structural zeros stay exactly 0.
inline Matrix normalized_adjacency_power(const NormalizedOperators& ops, int j) {
  if (j < 1) throw InputError("hop must be >= 1");
  Matrix p = ops.normalized_adjacency;
  for (int k = 1; k < j; ++k) p = p * ops.normalized_adjacency;
  return p;
}

/// Binary j-hop matrix from the step surrogate applied to (I - L)^j, thresholded at 1/2.
inline Matrix step_hop_recovery(const NormalizedOperators& ops, int j, double eps) {
  if (!(eps > 0.0)) throw InputError("surrogate width must be positive");
  const Matrix p = normalized_adjacency_power(ops, j);
  return p.unaryExpr([eps](double x) { return step_surrogate(x, eps) >= 0.5 ? 1.0 : 0.0; });
}

/// Half the smallest positive entry of (I - L)^j: any eps at or below this makes
/// step_hop_recovery exact. Returns 1 when the power is identically zero.
inline double safe_step_width(const NormalizedOperators& ops, int j) {
  const Matrix p = normalized_adjacency_power(ops, j);
  double mn = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p.data()[i] > 0.0) mn = std::min(mn, p.data()[i]);
  return std::isfinite(mn) ? 0.5 * mn : 1.0;
}

/// Coefficients theta_1..theta_d of sum_j theta_j A_j.
struct PolynomialProbe {
  std::vector<double> coefficients;

  int degree() const { return static_cast<int>(coefficients.size()); }
};

inline Matrix polynomial_probe_apply(const PolynomialProbe& probe, const HopAdjacencyStack& stack) {
  if (probe.degree() < 1) throw InputError("probe degree must be >= 1");
  if (probe.degree() > stack.channels())
    throw ShapeError("probe degree " + std::to_string(probe.degree()) + " exceeds " +
                     std::to_string(stack.channels()) + " hop channels");
  Matrix out = Matrix::Zero(stack.n(), stack.n());
  for (int j = 0; j < probe.degree(); ++j) out += probe.coefficients[static_cast<std::size_t>(j)] * stack.data.channel(j);
  return out;
}

}  // namespace hopewave

#endif
