#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hopewave/corpus.hpp"
#include "hopewave/graph.hpp"
#include "support/oracles.hpp"

using namespace hopewave;

namespace {

Graph path3() { return Graph(3, {{0, 1}, {1, 2}}); }

Matrix dense(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace

TEST(EdgeListParser, ReadsHeaderAndEdges) {
  const Graph g = parse_edge_list("3 2\n0 1\n1 2");
  EXPECT_EQ(g.n(), 3);
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
}

TEST(EdgeListParser, RejectsSelfLoopWithLineNumber) {
  try {
    parse_edge_list("2 1\n0 0");
    FAIL() << "self-loop accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
  }
}

TEST(EdgeListParser, DeduplicatesRepeatedEdges) {
  const Graph g = parse_edge_list("4 3\n0 1\n0 1\n2 3");
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}, {2, 3}}));
}

TEST(EdgeListParser, SkipsCommentsAndBlankLines) {
  const Graph g = parse_edge_list("# header\n\n3 1\n# edge\n2 0\n");
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 2}}));
}

TEST(EdgeListParser, ErrorPaths) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_edge_list(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("3 2\n0 1\n1 x"), 3u);  // malformed
  EXPECT_EQ(line_of("3 1\n0 3"), 2u);       // index >= n
  EXPECT_EQ(line_of("3 1\n0 1\n1 2"), 3u);  // more lines than declared
  EXPECT_THROW(parse_edge_list("3 2\n0 1"), ParseError);  // fewer than declared
  EXPECT_THROW(parse_edge_list(""), ParseError);
}

TEST(EdgeListParser, FormatRoundTrip) {
  Rng rng(5);
  const Graph g = oracle::random_graph(rng, 9, 0.4);
  EXPECT_EQ(parse_edge_list(format_edge_list(g)), g);
}

TEST(GraphInvariants, CanonicalEdgesAndSymmetricAdjacency) {
  const Graph g(4, {{3, 1}, {1, 3}, {2, 0}});
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 2}, {1, 3}}));
  const Matrix a = g.adjacency();
  EXPECT_TRUE(a.isApprox(a.transpose()));
  EXPECT_EQ(a.diagonal().sum(), 0.0);
  EXPECT_THROW(Graph(2, {{0, 2}}), InputError);
  EXPECT_THROW(Graph(0, {}), InputError);
}

TEST(NormalizedOperators, SingleEdge) {
  const auto ops = normalized_operators(Graph(2, {{0, 1}}));
  EXPECT_LE(oracle::max_abs(ops.laplacian - dense({{1, -1}, {-1, 1}})), 1e-12);
}

TEST(NormalizedOperators, EmptyGraphIsIdentity) {
  const auto ops = normalized_operators(Graph(3, {}));
  EXPECT_LE(oracle::max_abs(ops.laplacian - Matrix::Identity(3, 3)), 0.0);
  EXPECT_LE(oracle::max_abs(ops.normalized_adjacency), 0.0);
}

TEST(NormalizedOperators, PathEntryAndIdentity) {
  const auto ops = normalized_operators(path3());
  EXPECT_NEAR(ops.laplacian(0, 1), -1.0 / std::sqrt(2.0), 1e-15);
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const Graph g = oracle::random_graph(rng, 3 + static_cast<int>(rng.below(15)), 0.3);
    const auto o = normalized_operators(g);
    EXPECT_LE(oracle::max_abs(o.laplacian - (Matrix::Identity(g.n(), g.n()) - o.normalized_adjacency)), 1e-12);
    EXPECT_LE(oracle::max_abs(o.laplacian - o.laplacian.transpose()), 1e-12);
    EXPECT_LE(oracle::max_abs(o.laplacian - oracle::laplacian(g)), 1e-12);
  }
}

TEST(NormalizedOperators, IsolatedNodeRow) {
  const auto ops = normalized_operators(Graph(3, {{0, 1}}));
  EXPECT_EQ(ops.laplacian(2, 2), 1.0);
  EXPECT_EQ(ops.normalized_adjacency.row(2).cwiseAbs().sum(), 0.0);
}

TEST(HopStack, PathSquare) {
  const auto s = hop_adjacency_stack(path3(), {2});
  EXPECT_EQ(Matrix(s.data.channel(0)), dense({{1, 0, 1}, {0, 1, 0}, {1, 0, 1}}));
}

TEST(HopStack, HopOneIsAdjacency) {
  Rng rng(3);
  const Graph g = oracle::random_graph(rng, 12, 0.3);
  EXPECT_EQ(Matrix(hop_adjacency_stack(g, {1}).data.channel(0)), g.adjacency());
}

TEST(HopStack, OddCycleClosesAtItsLength) {
  Graph c5 = gen_synthetic(GraphKind::cycle, {.n = 5}, 0);
  const Matrix ch = hop_adjacency_stack(c5, {5}).data.channel(0);
  EXPECT_EQ(ch.diagonal(), Vector::Ones(5));
  EXPECT_EQ(ch, oracle::walk_reachability(c5, 5));
}

TEST(HopStack, RejectsBadHops) {
  EXPECT_THROW(hop_adjacency_stack(path3(), {0}), InputError);
  EXPECT_THROW(hop_adjacency_stack(path3(), {2, 1}), InputError);
  EXPECT_THROW(hop_adjacency_stack(path3(), {}), InputError);
}

// Exhaustive over hops 1..16 against the layered-walk oracle.
TEST(HopStack, MatchesWalkOracle) {
  Rng rng(2024);
  std::vector<int> hops(16);
  for (int i = 0; i < 16; ++i) hops[static_cast<std::size_t>(i)] = i + 1;
  for (int t = 0; t < 25; ++t) {
    const int n = 1 + static_cast<int>(rng.below(30));
    const Graph g = oracle::random_graph(rng, n, rng.uniform(0.02, 0.4));
    const auto s = hop_adjacency_stack(g, hops);
    for (int c = 0; c < 16; ++c) {
      const Matrix ch = s.data.channel(c);
      ASSERT_EQ(ch, oracle::walk_reachability(g, c + 1)) << "n=" << n << " hop=" << c + 1;
      ASSERT_EQ(ch, ch.transpose());
    }
  }
}

TEST(HopStack, BipartiteOddHopsHaveEmptyDiagonal) {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const Graph tree = gen_synthetic(GraphKind::tree, {.n = 4 + static_cast<int>(rng.below(20))}, rng.next());
    const auto s = hop_adjacency_stack(tree, {1, 3, 5, 7, 9});
    for (int c = 0; c < s.channels(); ++c) EXPECT_EQ(Matrix(s.data.channel(c)).diagonal().sum(), 0.0);
  }
}

TEST(BoolMatrix, PowerMatchesRepeatedProduct) {
  Rng rng(4);
  const Graph g = oracle::random_graph(rng, 70, 0.05);  // spans two 64-bit words
  const auto a = BoolMatrix::adjacency(g);
  BoolMatrix p = BoolMatrix::identity(g.n());
  for (int k = 1; k <= 9; ++k) {
    p = p * a;
    EXPECT_TRUE(p == a.power(static_cast<std::uint64_t>(k))) << k;
  }
  EXPECT_EQ(p.to_dense(), oracle::walk_reachability(g, 9));
}

TEST(Generators, SmallCases) {
  EXPECT_EQ(gen_synthetic(GraphKind::cycle, {.n = 4}, 0).edges(),
            (std::vector<Edge>{{0, 1}, {0, 3}, {1, 2}, {2, 3}}));
  const Graph grid = gen_synthetic(GraphKind::grid, {.rows = 2, .cols = 3}, 0);
  EXPECT_EQ(grid.n(), 6);
  EXPECT_EQ(grid.edge_count(), 7u);
  EXPECT_EQ(gen_synthetic(GraphKind::erdos_renyi, {.n = 10, .p = 0.0}, 99).edge_count(), 0u);
}

TEST(Generators, TreesAndBarbells) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph t = gen_synthetic(GraphKind::tree, {.n = 17}, seed);
    EXPECT_EQ(t.edge_count(), 16u);
    EXPECT_TRUE(t.connected());
  }
  const Graph b = gen_synthetic(GraphKind::barbell, {.n = 4, .bridge = 2}, 0);
  EXPECT_EQ(b.n(), 10);
  EXPECT_EQ(b.edge_count(), 6u + 6u + 3u);
  EXPECT_TRUE(b.connected());
}

TEST(Generators, DeterministicAndConnectedOnRequest) {
  const GenParams prm{.n = 14, .p = 0.2, .connected = true};
  const Graph a = gen_synthetic(GraphKind::erdos_renyi, prm, 77);
  EXPECT_EQ(a, gen_synthetic(GraphKind::erdos_renyi, prm, 77));
  EXPECT_TRUE(a.connected());
  EXPECT_THROW(gen_synthetic(GraphKind::erdos_renyi, {.n = 30, .p = 0.0, .connected = true}, 1), InputError);
  EXPECT_THROW(gen_synthetic(GraphKind::erdos_renyi, {.n = 5, .p = 1.5}, 1), InputError);
  EXPECT_THROW(gen_synthetic(GraphKind::cycle, {.n = 2}, 1), InputError);
}

TEST(Generators, FamiliesStayInRange) {
  const auto graphs = generate_families({{GraphKind::cycle, 5, 8, 32},
                                         {GraphKind::grid, 5, 8, 32},
                                         {GraphKind::tree, 5, 8, 32},
                                         {GraphKind::erdos_renyi, 5, 8, 32, 0.3, true}},
                                        3);
  ASSERT_EQ(graphs.size(), 20u);
  for (const auto& g : graphs) {
    EXPECT_GE(g.n(), 8) << g.id();
    EXPECT_LE(g.n(), 32) << g.id();
    EXPECT_TRUE(g.connected()) << g.id();
  }
  EXPECT_EQ(graphs.front().id(), "cycle-0");
  EXPECT_EQ(graphs.back().id(), "erdos_renyi-4");
}

TEST(CorpusIo, ParsesOneLine) {
  std::istringstream in(R"({"id":"g0","n":2,"edges":[[0,1]]})");
  const auto graphs = read_corpus(in);
  ASSERT_EQ(graphs.size(), 1u);
  EXPECT_EQ(graphs[0], Graph(2, {{0, 1}}, "g0"));
}

TEST(CorpusIo, EmptyInputIsEmptyCorpus) {
  std::istringstream in("");
  EXPECT_TRUE(read_corpus(in).empty());
}

TEST(CorpusIo, RoundTripIsCanonical) {
  Rng rng(10);
  std::vector<Graph> graphs;
  for (int i = 0; i < 10; ++i) {
    const Graph g = oracle::random_graph(rng, 2 + static_cast<int>(rng.below(20)), 0.3);
    graphs.emplace_back(g.n(), g.edges(), "g" + std::to_string(i));
  }
  std::stringstream io;
  write_corpus(io, graphs);
  EXPECT_EQ(read_corpus(io), graphs);
}

TEST(CorpusIo, MalformedLineReportsLineNumber) {
  std::istringstream in("{\"id\":\"a\",\"n\":2,\"edges\":[[0,1]]}\n\n{\"id\":\"b\",\"n\":2,\"edges\":[[0,1]\n");
  try {
    read_corpus(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream bad_edge("{\"n\":2,\"edges\":[[0,5]]}\n");
  EXPECT_THROW(read_corpus(bad_edge), ParseError);
}

TEST(CorpusSplit, DisjointCover) {
  std::vector<Graph> graphs(50, Graph(1, {}));
  const auto c = split_corpus(graphs, 0.1, 4);
  EXPECT_EQ(c.validation.size(), 5u);
  EXPECT_EQ(c.train.size(), 45u);
  std::vector<int> seen(50, 0);
  for (auto i : c.train) ++seen[i];
  for (auto i : c.validation) ++seen[i];
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_THROW(split_corpus(graphs, 1.0, 0), InputError);
}

TEST(Permutations, ActionOnMatrices) {
  const Matrix m = dense({{1, 2}, {3, 4}});
  EXPECT_EQ(permute_matrix(m, Permutation({1, 0})), dense({{4, 3}, {2, 1}}));
  EXPECT_EQ(permute_matrix(m, Permutation::identity(2)), m);
  Rng rng(6);
  const auto sigma = oracle::random_permutation(rng, 9);
  EXPECT_EQ(sigma.compose(sigma.inverse()), Permutation::identity(9));
  EXPECT_THROW(Permutation({0, 0}), InputError);
}

TEST(Permutations, RelabelingCommutesWithAdjacency) {
  Rng rng(12);
  const Graph g = oracle::random_graph(rng, 10, 0.3);
  const auto sigma = oracle::random_permutation(rng, 10);
  EXPECT_EQ(g.relabeled(sigma).adjacency(), permute_matrix(g.adjacency(), sigma));
}
