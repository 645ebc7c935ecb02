#ifndef HOPEWAVE_GRAPH_HPP
#define HOPEWAVE_GRAPH_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hopewave/error.hpp"
#include "hopewave/tensor.hpp"

namespace hopewave {

using Edge = std::pair<int, int>;

/// Undirected simple graph on nodes 0..n-1.
///
/// Edges are kept canonical: each pair stored once as (min, max), sorted
/// lexicographically, no self-loops, no duplicates.
class Graph {
public:
  Graph() = default;

  /// Validates and canonicalizes. Duplicates (in either orientation) are merged;
  /// self-loops and out-of-range endpoints throw InputError.
  Graph(int n, std::vector<Edge> edges, std::string id = {}) : n_(n), id_(std::move(id)) {
    if (n < 1) throw InputError("graph must have at least one node");
    for (auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw InputError("edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range for n=" +
                         std::to_string(n));
      if (u == v) throw InputError("self-loop at node " + std::to_string(u));
      if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
  }

  int n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  Matrix adjacency() const {
    Matrix a = Matrix::Zero(n_, n_);
    for (auto [u, v] : edges_) a(u, v) = a(v, u) = 1.0;
    return a;
  }

  std::vector<int> degrees() const {
    std::vector<int> d(static_cast<std::size_t>(n_), 0);
    for (auto [u, v] : edges_) {
      ++d[static_cast<std::size_t>(u)];
      ++d[static_cast<std::size_t>(v)];
    }
    return d;
  }

  std::vector<std::vector<int>> neighbors() const {
    std::vector<std::vector<int>> nb(static_cast<std::size_t>(n_));
    for (auto [u, v] : edges_) {
      nb[static_cast<std::size_t>(u)].push_back(v);
      nb[static_cast<std::size_t>(v)].push_back(u);
    }
    for (auto& l : nb) std::sort(l.begin(), l.end());
    return nb;
  }

  bool connected() const {
    auto nb = neighbors();
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : nb[static_cast<std::size_t>(u)])
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    return count == n_;
  }

  /// Relabel nodes: node i becomes sigma(i).
  Graph relabeled(const Permutation& sigma) const {
    if (sigma.size() != n_) throw ShapeError("permutation size does not match graph");
    std::vector<Edge> e;
    e.reserve(edges_.size());
    for (auto [u, v] : edges_) e.emplace_back(sigma(u), sigma(v));
    return Graph(n_, std::move(e), id_);
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_ && a.id_ == b.id_;
  }

private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::string id_;
};

namespace detail {

inline std::optional<std::vector<long long>> parse_ints(const std::string& line) {
  std::istringstream in(line);
  std::vector<long long> out;
  std::string tok;
  while (in >> tok) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (pos != tok.size()) return std::nullopt;
    out.push_back(v);
  }
  return out;
}

inline bool blank_or_comment(const std::string& line) {
  auto it = std::find_if(line.begin(), line.end(), [](unsigned char c) { return !std::isspace(c); });
  return it == line.end() || *it == '#';
}

}  // namespace detail

/// Parse the edge-list text format: a header "n m", then m lines "u v".
/// Lines starting with '#' and blank lines are ignored.
inline Graph parse_edge_list(std::istream& in, std::string id = {}) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::pair<long long, long long>> header;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::blank_or_comment(line)) continue;
    auto ints = detail::parse_ints(line);
    if (!ints || ints->size() != 2) throw ParseError(lineno, "expected two integers, got '" + line + "'");
    const long long a = (*ints)[0], b = (*ints)[1];
    if (!header) {
      if (a < 1 || b < 0) throw ParseError(lineno, "header needs n >= 1 and m >= 0");
      if (a > (1LL << 20)) throw ParseError(lineno, "node count too large");
      header.emplace(a, b);
      continue;
    }
    if (static_cast<long long>(edges.size()) >= header->second)
      throw ParseError(lineno, "more edge lines than the declared m=" + std::to_string(header->second));
    if (a < 0 || b < 0 || a >= header->first || b >= header->first)
      throw ParseError(lineno, "node index out of range [0, " + std::to_string(header->first) + ")");
    if (a == b) throw ParseError(lineno, "self-loop at node " + std::to_string(a));
    edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
  }
  if (!header) throw ParseError(lineno, "missing 'n m' header");
  if (static_cast<long long>(edges.size()) != header->second)
    throw ParseError(lineno, "declared m=" + std::to_string(header->second) + " but found " +
                                 std::to_string(edges.size()) + " edge lines");
  return Graph(static_cast<int>(header->first), std::move(edges), std::move(id));
}

inline Graph parse_edge_list(const std::string& text, std::string id = {}) {
  std::istringstream in(text);
  return parse_edge_list(in, std::move(id));
}

inline std::string format_edge_list(const Graph& g) {
  std::ostringstream out;
  out << g.n() << ' ' << g.edge_count() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

/// D^{-1/2} A D^{-1/2} and I - D^{-1/2} A D^{-1/2} for a graph.
/// Zero-degree nodes get D^{-1/2} = 0, so their Laplacian row is e_i.
struct NormalizedOperators {
  Matrix laplacian;
  Matrix normalized_adjacency;
  Vector degrees;

  int n() const { return static_cast<int>(laplacian.rows()); }
};

inline Vector inverse_sqrt_degrees(const Graph& g) {
  auto d = g.degrees();
  Vector s(g.n());
  for (int i = 0; i < g.n(); ++i) {
    const int di = d[static_cast<std::size_t>(i)];
    s(i) = di > 0 ? 1.0 / std::sqrt(static_cast<double>(di)) : 0.0;
  }
  return s;
}

inline NormalizedOperators normalized_operators(const Graph& g) {
  const int n = g.n();
  NormalizedOperators ops;
  ops.degrees = Vector::Zero(n);
  for (auto [u, v] : g.edges()) {
    ops.degrees(u) += 1.0;
    ops.degrees(v) += 1.0;
  }
  const Vector s = inverse_sqrt_degrees(g);
  ops.normalized_adjacency = Matrix::Zero(n, n);
  for (auto [u, v] : g.edges()) {
    const double w = s(u) * s(v);
    ops.normalized_adjacency(u, v) = w;
    ops.normalized_adjacency(v, u) = w;
  }
  ops.laplacian = Matrix::Identity(n, n) - ops.normalized_adjacency;
  return ops;
}

/// Dense square boolean matrix with 64-bit packed rows.
class BoolMatrix {
public:
  BoolMatrix() = default;
  explicit BoolMatrix(int n) : n_(n), words_((n + 63) / 64), bits_(static_cast<std::size_t>(n) * words_, 0) {}

  static BoolMatrix identity(int n) {
    BoolMatrix m(n);
    for (int i = 0; i < n; ++i) m.set(i, i);
    return m;
  }

  static BoolMatrix adjacency(const Graph& g) {
    BoolMatrix m(g.n());
    for (auto [u, v] : g.edges()) {
      m.set(u, v);
      m.set(v, u);
    }
    return m;
  }

  int n() const { return n_; }
  bool get(int i, int j) const {
    return (row(i)[static_cast<std::size_t>(j) / 64] >> (static_cast<unsigned>(j) % 64)) & 1u;
  }
  void set(int i, int j) { row(i)[static_cast<std::size_t>(j) / 64] |= std::uint64_t{1} << (static_cast<unsigned>(j) % 64); }

  /// Boolean product: (this * rhs)[i][j] = OR_k this[i][k] AND rhs[k][j].
  BoolMatrix operator*(const BoolMatrix& rhs) const {
    BoolMatrix out(n_);
    for (int i = 0; i < n_; ++i) {
      std::uint64_t* dst = out.row(i);
      const std::uint64_t* src = row(i);
      for (int k = 0; k < n_; ++k) {
        if (!((src[static_cast<std::size_t>(k) / 64] >> (static_cast<unsigned>(k) % 64)) & 1u)) continue;
        const std::uint64_t* r = rhs.row(k);
        for (std::size_t w = 0; w < words_; ++w) dst[w] |= r[w];
      }
    }
    return out;
  }

  BoolMatrix power(std::uint64_t e) const {
    BoolMatrix result = identity(n_);
    BoolMatrix base = *this;
    while (e > 0) {
      if (e & 1u) result = result * base;
      e >>= 1;
      if (e > 0) base = base * base;
    }
    return result;
  }

  Matrix to_dense() const {
    Matrix m = Matrix::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (get(i, j)) m(i, j) = 1.0;
    return m;
  }

  friend bool operator==(const BoolMatrix& a, const BoolMatrix& b) { return a.n_ == b.n_ && a.bits_ == b.bits_; }

private:
  std::uint64_t* row(int i) { return bits_.data() + static_cast<std::size_t>(i) * words_; }
  const std::uint64_t* row(int i) const { return bits_.data() + static_cast<std::size_t>(i) * words_; }

  int n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Binary multi-hop targets: channel i marks pairs joined by a walk of length exactly hops[i].
struct HopAdjacencyStack {
  std::vector<int> hops;
  PairTensor data;

  int n() const { return data.n; }
  int channels() const { return data.channels(); }
};

inline void validate_hops(const std::vector<int>& hops) {
  if (hops.empty()) throw InputError("hop list is empty");
  for (std::size_t i = 0; i < hops.size(); ++i) {
    if (hops[i] < 1) throw InputError("hop lengths must be positive, got " + std::to_string(hops[i]));
    if (i > 0 && hops[i] <= hops[i - 1]) throw InputError("hop lengths must be strictly ascending");
  }
}

inline HopAdjacencyStack hop_adjacency_stack(const Graph& g, const std::vector<int>& hops) {
  validate_hops(hops);
  const BoolMatrix a = BoolMatrix::adjacency(g);
  HopAdjacencyStack out{hops, PairTensor(g.n(), static_cast<int>(hops.size()))};
  BoolMatrix current = BoolMatrix::identity(g.n());
  int reached = 0;
  for (std::size_t c = 0; c < hops.size(); ++c) {
    current = current * a.power(static_cast<std::uint64_t>(hops[c] - reached));
    reached = hops[c];
    out.data.set_channel(static_cast<int>(c), current.to_dense());
  }
  return out;
}

/// Train/validation split over a list of graphs.
struct GraphCorpus {
  std::vector<Graph> graphs;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;

  std::size_t size() const { return graphs.size(); }
};

}  // namespace hopewave

#endif
