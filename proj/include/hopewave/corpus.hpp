#ifndef HOPEWAVE_CORPUS_HPP
#define HOPEWAVE_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopewave/error.hpp"
#include "hopewave/graph.hpp"
#include "hopewave/random.hpp"

namespace hopewave {

enum class GraphKind { erdos_renyi, cycle, path, grid, tree, barbell };

inline const char* to_string(GraphKind k) {
  switch (k) {
    case GraphKind::erdos_renyi: return "erdos_renyi";
    case GraphKind::cycle: return "cycle";
    case GraphKind::path: return "path";
    case GraphKind::grid: return "grid";
    case GraphKind::tree: return "tree";
    case GraphKind::barbell: return "barbell";
  }
  return "?";
}

inline GraphKind parse_graph_kind(const std::string& s) {
  if (s == "erdos_renyi" || s == "er") return GraphKind::erdos_renyi;
  if (s == "cycle") return GraphKind::cycle;
  if (s == "path") return GraphKind::path;
  if (s == "grid") return GraphKind::grid;
  if (s == "tree") return GraphKind::tree;
  if (s == "barbell") return GraphKind::barbell;
  throw InputError("unknown graph kind '" + s + "'");
}

/// Generator parameters. Which fields matter depends on the kind:
/// erdos_renyi uses n, p, connected; cycle/path/tree use n; grid uses rows, cols;
/// barbell uses n as the clique size and bridge as the number of path nodes between cliques.
struct GenParams {
  int n = 10;
  double p = 0.3;
  int rows = 0;
  int cols = 0;
  int bridge = 1;
  bool connected = false;
};

/// Attempts made before giving up on a connected Erdos-Renyi sample.
inline constexpr int kConnectedRetries = 100;

inline Graph gen_synthetic(GraphKind kind, const GenParams& prm, std::uint64_t seed) {
  std::vector<Edge> e;
  switch (kind) {
    case GraphKind::erdos_renyi: {
      if (prm.n < 1) throw InputError("erdos_renyi needs n >= 1");
      if (!(prm.p >= 0.0 && prm.p <= 1.0)) throw InputError("erdos_renyi probability must lie in [0, 1]");
      for (int attempt = 0; attempt < (prm.connected ? kConnectedRetries : 1); ++attempt) {
        Rng rng(seed, {0x4552, static_cast<std::uint64_t>(attempt)});
        e.clear();
        for (int u = 0; u < prm.n; ++u)
          for (int v = u + 1; v < prm.n; ++v)
            if (rng.bernoulli(prm.p)) e.emplace_back(u, v);
        Graph g(prm.n, e);
        if (!prm.connected || g.connected()) return g;
      }
      throw InputError("no connected erdos_renyi sample after " + std::to_string(kConnectedRetries) +
                       " attempts (n=" + std::to_string(prm.n) + ", p=" + std::to_string(prm.p) + ")");
    }
    case GraphKind::cycle:
      if (prm.n < 3) throw InputError("cycle needs n >= 3");
      for (int u = 0; u < prm.n; ++u) e.emplace_back(u, (u + 1) % prm.n);
      return Graph(prm.n, e);
    case GraphKind::path:
      if (prm.n < 1) throw InputError("path needs n >= 1");
      for (int u = 0; u + 1 < prm.n; ++u) e.emplace_back(u, u + 1);
      return Graph(prm.n, e);
    case GraphKind::grid: {
      if (prm.rows < 1 || prm.cols < 1) throw InputError("grid needs rows >= 1 and cols >= 1");
      auto id = [&](int r, int c) { return r * prm.cols + c; };
      for (int r = 0; r < prm.rows; ++r)
        for (int c = 0; c < prm.cols; ++c) {
          if (c + 1 < prm.cols) e.emplace_back(id(r, c), id(r, c + 1));
          if (r + 1 < prm.rows) e.emplace_back(id(r, c), id(r + 1, c));
        }
      return Graph(prm.rows * prm.cols, e);
    }
    case GraphKind::tree: {
      // Uniform labelled tree from a random Pruefer sequence.
      if (prm.n < 1) throw InputError("tree needs n >= 1");
      const int n = prm.n;
      if (n == 1) return Graph(1, {});
      if (n == 2) return Graph(2, {{0, 1}});
      Rng rng(seed, {0x5452});
      std::vector<int> code(static_cast<std::size_t>(n - 2));
      for (int& c : code) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      std::vector<int> degree(static_cast<std::size_t>(n), 1);
      for (int c : code) ++degree[static_cast<std::size_t>(c)];
      for (int c : code) {
        int leaf = 0;
        while (degree[static_cast<std::size_t>(leaf)] != 1) ++leaf;
        e.emplace_back(leaf, c);
        --degree[static_cast<std::size_t>(leaf)];
        --degree[static_cast<std::size_t>(c)];
      }
      int a = -1, b = -1;
      for (int v = 0; v < n; ++v)
        if (degree[static_cast<std::size_t>(v)] == 1) (a < 0 ? a : b) = v;
      e.emplace_back(a, b);
      return Graph(n, e);
    }
    case GraphKind::barbell: {
      if (prm.n < 2) throw InputError("barbell needs clique size n >= 2");
      if (prm.bridge < 0) throw InputError("barbell bridge length must be >= 0");
      const int m = prm.n;
      const int total = 2 * m + prm.bridge;
      for (int side = 0; side < 2; ++side) {
        const int base = side == 0 ? 0 : m + prm.bridge;
        for (int u = 0; u < m; ++u)
          for (int v = u + 1; v < m; ++v) e.emplace_back(base + u, base + v);
      }
      int prev = m - 1;
      for (int k = 0; k < prm.bridge; ++k) {
        e.emplace_back(prev, m + k);
        prev = m + k;
      }
      e.emplace_back(prev, m + prm.bridge);
      return Graph(total, e);
    }
  }
  throw InputError("unknown graph kind");
}

/// Random node relabeling, so generated corpora do not share a fixed node order.
inline Graph shuffled_labels(const Graph& g, std::uint64_t seed) {
  std::vector<int> img(static_cast<std::size_t>(g.n()));
  std::iota(img.begin(), img.end(), 0);
  Rng rng(seed, {0x5045524D});
  rng.shuffle(img);
  return g.relabeled(Permutation(std::move(img)));
}

/// Deterministic index split. The validation set has round(fraction * size) members.
inline GraphCorpus split_corpus(std::vector<Graph> graphs, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw InputError("validation fraction must lie in [0, 1)");
  GraphCorpus c;
  c.graphs = std::move(graphs);
  std::vector<std::size_t> idx(c.graphs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed, {0x53504C54});
  rng.shuffle(idx);
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(idx.size())));
  c.validation.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  c.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::sort(c.validation.begin(), c.validation.end());
  std::sort(c.train.begin(), c.train.end());
  return c;
}

// JSONL corpus format: one {"id": str, "n": int, "edges": [[u, v], ...]} object per line.

inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (auto [u, v] : g.edges()) edges.push_back({u, v});
  return {{"id", g.id()}, {"n", g.n()}, {"edges", std::move(edges)}};
}

inline Graph graph_from_json(const nlohmann::json& j, std::size_t lineno) {
  try {
    if (!j.is_object()) throw ParseError(lineno, "expected a JSON object");
    std::string id = j.contains("id") ? j.at("id").get<std::string>() : std::string{};
    const int n = j.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ParseError(lineno, "edge must be a [u, v] pair");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return Graph(n, std::move(edges), std::move(id));
  } catch (const ParseError&) {
    throw;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(lineno, ex.what());
  } catch (const InputError& ex) {
    throw ParseError(lineno, ex.what());
  }
}

inline std::vector<Graph> read_corpus(std::istream& in) {
  std::vector<Graph> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& ex) {
      throw ParseError(lineno, std::string("malformed JSON: ") + ex.what());
    }
    out.push_back(graph_from_json(j, lineno));
  }
  return out;
}

inline std::vector<Graph> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus '" + path + "'");
  return read_corpus(in);
}

inline void write_corpus(std::ostream& out, const std::vector<Graph>& graphs) {
  for (const auto& g : graphs) out << graph_to_json(g).dump() << '\n';
}

inline void write_corpus(const std::string& path, const std::vector<Graph>& graphs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write corpus '" + path + "'");
  write_corpus(out, graphs);
  if (!out) throw InputError("write failed for '" + path + "'");
}

/// A family of generated graphs with node counts drawn from [n_min, n_max].
struct FamilySpec {
  GraphKind kind = GraphKind::tree;
  int count = 0;
  int n_min = 8;
  int n_max = 32;
  double p = 0.3;      ///< erdos_renyi edge probability
  bool connected = true;
};

/// Generates every family in order; graph ids are "<kind>-<k>". Grid rows come
/// from a range of three starting near sqrt(n_min)/2, and cols = n / rows.
inline std::vector<Graph> generate_families(const std::vector<FamilySpec>& families, std::uint64_t seed) {
  std::vector<Graph> out;
  std::uint64_t serial = 0;
  for (std::size_t f = 0; f < families.size(); ++f) {
    const auto& fam = families[f];
    if (fam.n_min < 1 || fam.n_max < fam.n_min) throw InputError("bad node-count range");
    for (int k = 0; k < fam.count; ++k, ++serial) {
      Rng rng(seed, {0x47454E, serial});
      const int n = fam.n_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(fam.n_max - fam.n_min + 1)));
      GenParams prm;
      prm.n = n;
      prm.p = fam.p;
      prm.connected = fam.connected;
      if (fam.kind == GraphKind::grid) {
        const int rows_min = std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(fam.n_min)) * 0.5)));
        prm.rows = rows_min + static_cast<int>(rng.below(3));
        prm.cols = std::max(2, n / prm.rows);
        while (prm.rows * prm.cols > fam.n_max && prm.cols > 2) --prm.cols;
      } else if (fam.kind == GraphKind::barbell) {
        prm.n = std::max(2, n / 3);
        prm.bridge = std::max(0, n - 2 * prm.n);
      } else if (fam.kind == GraphKind::cycle) {
        prm.n = std::max(3, n);
      }
      Graph g = gen_synthetic(fam.kind, prm, rng.next());
      g = shuffled_labels(g, rng.next());
      g.set_id(std::string(to_string(fam.kind)) + "-" + std::to_string(k));
      out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace hopewave

#endif
