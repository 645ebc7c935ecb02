#ifndef HOPEWAVE_EVALKIT_HPP
#define HOPEWAVE_EVALKIT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "hopewave/checkpoint.hpp"
#include "hopewave/csv.hpp"
#include "hopewave/error.hpp"
#include "hopewave/graph.hpp"
#include "hopewave/loss.hpp"
#include "hopewave/model.hpp"
#include "hopewave/parallel.hpp"
#include "hopewave/random.hpp"
#include "hopewave/spectral.hpp"
#include "hopewave/trainer.hpp"

namespace hopewave {

enum class MaskMode { masked, unmasked };

inline std::string to_string(MaskMode m) { return m == MaskMode::masked ? "masked" : "unmasked"; }

inline MaskMode parse_mask_mode(const std::string& s) {
  if (s == "masked") return MaskMode::masked;
  if (s == "unmasked") return MaskMode::unmasked;
  throw InputError("unknown mask mode '" + s + "' (expected masked or unmasked)");
}

/// Per-hop reconstruction accuracy over a set of graphs.
///
/// Masked accuracy scores freshly sampled balanced entries; a hop whose channel
/// saturates on every graph has no entries and is reported as skipped.
/// Unmasked accuracy scores every upper-triangle entry.
struct ReconReport {
  std::string corpus_id;
  std::string checkpoint_id;
  std::vector<int> hops;
  std::vector<std::optional<double>> masked_accuracy;
  std::vector<std::optional<double>> unmasked_accuracy;
  std::vector<long> kept_entries;   ///< masked-mode entries scored, summed over graphs
  std::vector<int> graphs_scored;   ///< graphs contributing to masked accuracy
  MaskMode mode = MaskMode::masked;

  /// Mean over hops of the accuracy for `mode`, skipping unavailable hops.
  double aggregate() const { return aggregate(mode); }
  double aggregate(MaskMode m) const {
    const auto& acc = m == MaskMode::masked ? masked_accuracy : unmasked_accuracy;
    double sum = 0.0;
    int count = 0;
    for (const auto& a : acc)
      if (a) {
        sum += *a;
        ++count;
      }
    return count > 0 ? sum / count : 0.0;
  }
  std::optional<double> accuracy(int hop) const {
    for (std::size_t i = 0; i < hops.size(); ++i)
      if (hops[i] == hop) return mode == MaskMode::masked ? masked_accuracy[i] : unmasked_accuracy[i];
    throw InputError("hop " + std::to_string(hop) + " is not in the report");
  }
};

struct EvalConfig {
  int threshold = 100;
  std::uint64_t seed = 0;
  int threads = 1;
};

inline constexpr std::uint64_t kTagEvalMask = 0x454D;

/// Score a predictor on graphs[indices]. `predict(graph)` returns an n x n x r
/// tensor of probabilities whose channels line up with `hops`.
template <typename Predictor>
ReconReport reconstruction_report(Predictor&& predict, const std::vector<Graph>& graphs,
                                  const std::vector<std::size_t>& indices, const std::vector<int>& hops,
                                  const EvalConfig& cfg) {
  validate_hops(hops);
  const auto r = hops.size();
  struct PerGraph {
    std::vector<ChannelScore> masked, unmasked;
  };
  std::vector<PerGraph> per(indices.size());
  parallel_for(indices.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t idx = indices[k];
    const Graph& g = graphs[idx];
    const HopAdjacencyStack targets = hop_adjacency_stack(g, hops);
    const PairTensor pred = predict(g);
    if (pred.n != g.n() || pred.channels() != static_cast<int>(r))
      throw ShapeError("predictor returned the wrong shape for graph '" + g.id() + "'");
    const MaskTensor mask = sample_mask(targets, cfg.threshold, substream_seed(cfg.seed, {kTagEvalMask, idx}));
    per[k] = {score_predictions(pred, targets, mask), score_predictions(pred, targets, full_mask(targets))};
  });

  ReconReport rep;
  rep.hops = hops;
  for (std::size_t c = 0; c < r; ++c) {
    double msum = 0.0, usum = 0.0;
    int mcount = 0, ucount = 0;
    long kept = 0;
    for (const auto& g : per) {
      if (g.masked[c].scored > 0) {
        msum += g.masked[c].accuracy();
        kept += g.masked[c].scored;
        ++mcount;
      }
      if (g.unmasked[c].scored > 0) {
        usum += g.unmasked[c].accuracy();
        ++ucount;
      }
    }
    rep.masked_accuracy.push_back(mcount > 0 ? std::optional<double>(msum / mcount) : std::nullopt);
    rep.unmasked_accuracy.push_back(ucount > 0 ? std::optional<double>(usum / ucount) : std::nullopt);
    rep.kept_entries.push_back(kept);
    rep.graphs_scored.push_back(mcount);
  }
  return rep;
}

/// Ground-truth stub: returns the hop targets themselves.
struct TargetPredictor {
  std::vector<int> hops;
  PairTensor operator()(const Graph& g) const { return hop_adjacency_stack(g, hops).data; }
};

/// Runs a checkpointed model and keeps the output channels for `hops`.
class ModelPredictor {
public:
  ModelPredictor(const Checkpoint& ck, const std::vector<int>& hops) : ck_(&ck) {
    const auto& have = ck.params.config.hops;
    for (int h : hops) {
      const auto it = std::find(have.begin(), have.end(), h);
      if (it == have.end()) throw InputError("hop " + std::to_string(h) + " is not predicted by the checkpoint");
      channels_.push_back(static_cast<int>(it - have.begin()));
    }
  }

  PairTensor operator()(const Graph& g) const {
    const auto& wc = ck_->wavelet;
    const PairTensor full =
        decoder_forward(encoder_forward(compute_wavelet(g, wc.scales, wc.method, wc.order), ck_->params), ck_->params);
    PairTensor out{full.n, Matrix(full.data.rows(), static_cast<Eigen::Index>(channels_.size()))};
    for (std::size_t i = 0; i < channels_.size(); ++i) out.data.col(static_cast<Eigen::Index>(i)) = full.data.col(channels_[i]);
    return out;
  }

private:
  const Checkpoint* ck_;
  std::vector<int> channels_;
};

inline std::string checkpoint_id(const Checkpoint& ck) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint(ck.params.values)));
  return buf;
}

/// Accuracy of a checkpoint on graphs[indices] (every graph when `indices` is empty).
inline ReconReport reconstruction_accuracy(const Checkpoint& ck, const std::vector<Graph>& graphs,
                                           std::vector<std::size_t> indices, const std::vector<int>& hops,
                                           MaskMode mode, const EvalConfig& cfg, const std::string& corpus_id = "") {
  if (indices.empty()) {
    indices.resize(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) indices[i] = i;
  }
  auto rep = reconstruction_report(ModelPredictor(ck, hops), graphs, indices, hops, cfg);
  rep.mode = mode;
  rep.corpus_id = corpus_id;
  rep.checkpoint_id = checkpoint_id(ck);
  return rep;
}

// ---------------------------------------------------------------------------
// CSV

inline csv::Table report_table(const ReconReport& rep) {
  csv::Table t{{"corpus", "checkpoint", "hop", "masked_accuracy", "unmasked_accuracy", "kept_entries", "graphs_scored"}, {}};
  for (std::size_t i = 0; i < rep.hops.size(); ++i)
    t.add_row({rep.corpus_id, rep.checkpoint_id, std::to_string(rep.hops[i]), csv::number(rep.masked_accuracy[i]),
               csv::number(rep.unmasked_accuracy[i]), std::to_string(rep.kept_entries[i]),
               std::to_string(rep.graphs_scored[i])});
  return t;
}

inline void report_csv(const ReconReport& rep, const std::string& path) { csv::write_file(report_table(rep), path); }

inline ReconReport report_from_table(const csv::Table& t) {
  ReconReport rep;
  const auto corpus = t.column("corpus"), ckpt = t.column("checkpoint"), hop = t.column("hop"),
             masked = t.column("masked_accuracy"), unmasked = t.column("unmasked_accuracy"),
             kept = t.column("kept_entries"), scored = t.column("graphs_scored");
  for (const auto& row : t.rows) {
    rep.corpus_id = row[corpus];
    rep.checkpoint_id = row[ckpt];
    rep.hops.push_back(std::stoi(row[hop]));
    rep.masked_accuracy.push_back(csv::parse_number(row[masked]));
    rep.unmasked_accuracy.push_back(csv::parse_number(row[unmasked]));
    rep.kept_entries.push_back(std::stol(row[kept]));
    rep.graphs_scored.push_back(std::stoi(row[scored]));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Ablations

/// Shared settings for ablation runs. Every run trains from `train.seed` and is
/// scored on the corpus's validation split (the whole corpus if there is none).
struct AblationConfig {
  ModelConfig model{};
  WaveletConfig wavelet{};
  TrainConfig train{};
  std::vector<int> eval_hops{1, 2, 4, 8};
  EvalConfig eval{};
};

inline const std::vector<std::size_t>& eval_indices(const GraphCorpus& c) {
  return c.validation.empty() ? c.train : c.validation;
}

inline Checkpoint train_run(const GraphCorpus& corpus, const AblationConfig& cfg, const WaveletConfig& wc) {
  ModelConfig m = cfg.model;
  m.wavelet_channels = static_cast<int>(wc.scales.size());
  return pretrain(corpus, m, wc, cfg.train);
}

/// k scales spaced geometrically over [lo, hi]; one scale sits at the geometric mean.
inline std::vector<double> geometric_scales(int k, double lo, double hi) {
  if (k < 1) throw InputError("channel count must be >= 1");
  if (!(lo > 0.0 && hi >= lo)) throw InputError("scale range must satisfy 0 < min <= max");
  if (k == 1) return {std::sqrt(lo * hi)};
  std::vector<double> s(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (k - 1));
  s.back() = hi;
  return s;
}

struct ChannelAblationRow {
  int channels = 0;
  std::vector<double> scales;
  ReconReport report;
};

inline std::vector<ChannelAblationRow> channel_ablation(const GraphCorpus& corpus, const std::vector<int>& counts,
                                                        const AblationConfig& cfg, double scale_min = 1.0,
                                                        double scale_max = 16.0) {
  std::vector<ChannelAblationRow> rows;
  for (int k : counts) {
    WaveletConfig wc = cfg.wavelet;
    wc.scales = geometric_scales(k, scale_min, scale_max);
    const Checkpoint ck = train_run(corpus, cfg, wc);
    rows.push_back({k, wc.scales,
                    reconstruction_accuracy(ck, corpus.graphs, eval_indices(corpus), cfg.eval_hops, MaskMode::masked,
                                            cfg.eval)});
  }
  return rows;
}

inline csv::Table channel_ablation_table(const std::vector<ChannelAblationRow>& rows, const std::vector<int>& hops) {
  csv::Table t;
  t.columns = {"channels"};
  for (int h : hops) t.columns.push_back("hop" + std::to_string(h));
  t.columns.push_back("aggregate");
  for (const auto& r : rows) {
    std::vector<std::string> cells{std::to_string(r.channels)};
    for (const auto& a : r.report.masked_accuracy) cells.push_back(csv::number(a));
    cells.push_back(csv::number(r.report.aggregate(MaskMode::masked)));
    t.add_row(std::move(cells));
  }
  return t;
}

/// Masked versus unmasked training on the same corpus and seeds.
///
/// A hop is saturated when its channel has no kept entries on any evaluated
/// graph. Non-saturated hops compare masked (balanced) accuracy; saturated hops
/// can only be scored unmasked.
struct MaskAblationResult {
  ReconReport masked_run;
  ReconReport unmasked_run;
  std::vector<bool> saturated;

  double nonsaturated_aggregate(const ReconReport& r) const {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < saturated.size(); ++i)
      if (!saturated[i] && r.masked_accuracy[i]) {
        sum += *r.masked_accuracy[i];
        ++count;
      }
    return count > 0 ? sum / count : 0.0;
  }
  double saturated_aggregate(const ReconReport& r) const {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < saturated.size(); ++i)
      if (saturated[i] && r.unmasked_accuracy[i]) {
        sum += *r.unmasked_accuracy[i];
        ++count;
      }
    return count > 0 ? sum / count : 0.0;
  }
};

inline MaskAblationResult mask_ablation(const GraphCorpus& corpus, const AblationConfig& cfg) {
  AblationConfig on = cfg, off = cfg;
  on.train.masked = true;
  off.train.masked = false;
  const Checkpoint ck_on = train_run(corpus, on, cfg.wavelet);
  const Checkpoint ck_off = train_run(corpus, off, cfg.wavelet);
  MaskAblationResult res;
  res.masked_run = reconstruction_accuracy(ck_on, corpus.graphs, eval_indices(corpus), cfg.eval_hops, MaskMode::masked,
                                           cfg.eval, "masked-training");
  res.unmasked_run = reconstruction_accuracy(ck_off, corpus.graphs, eval_indices(corpus), cfg.eval_hops,
                                             MaskMode::masked, cfg.eval, "unmasked-training");
  for (int g : res.masked_run.graphs_scored) res.saturated.push_back(g == 0);
  return res;
}

inline csv::Table mask_ablation_table(const MaskAblationResult& res) {
  csv::Table t{{"hop", "saturated", "masked_training", "unmasked_training", "masked_training_all_entries",
                "unmasked_training_all_entries"},
               {}};
  const auto& a = res.masked_run;
  const auto& b = res.unmasked_run;
  for (std::size_t i = 0; i < a.hops.size(); ++i)
    t.add_row({std::to_string(a.hops[i]), res.saturated[i] ? "yes" : "no", csv::number(a.masked_accuracy[i]),
               csv::number(b.masked_accuracy[i]), csv::number(a.unmasked_accuracy[i]),
               csv::number(b.unmasked_accuracy[i])});
  t.add_row({"nonsaturated", "no", csv::number(res.nonsaturated_aggregate(a)), csv::number(res.nonsaturated_aggregate(b)),
             csv::kSkipped, csv::kSkipped});
  t.add_row({"saturated", "yes", csv::kSkipped, csv::kSkipped, csv::number(res.saturated_aggregate(a)),
             csv::number(res.saturated_aggregate(b))});
  return t;
}

struct NamedCorpus {
  std::string name;
  GraphCorpus corpus;
};

/// accuracy[i][j]: hop-1 masked accuracy of the model trained on corpus i,
/// scored on the held-out split of corpus j.
struct CrossMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> accuracy;
};

inline CrossMatrix cross_corpus_matrix(const std::vector<NamedCorpus>& corpora, const AblationConfig& cfg) {
  if (corpora.empty()) throw InputError("cross-corpus evaluation needs at least one corpus");
  CrossMatrix m;
  for (const auto& c : corpora) m.names.push_back(c.name);
  for (const auto& train_on : corpora) {
    const Checkpoint ck = train_run(train_on.corpus, cfg, cfg.wavelet);
    std::vector<double> row;
    for (const auto& eval_on : corpora) {
      const auto rep = reconstruction_accuracy(ck, eval_on.corpus.graphs, eval_indices(eval_on.corpus), {1},
                                               MaskMode::masked, cfg.eval, eval_on.name);
      row.push_back(rep.masked_accuracy[0].value_or(0.0));
    }
    m.accuracy.push_back(std::move(row));
  }
  return m;
}

inline csv::Table cross_matrix_table(const CrossMatrix& m) {
  csv::Table t;
  t.columns = {"train\\eval"};
  for (const auto& n : m.names) t.columns.push_back(n);
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    std::vector<std::string> cells{m.names[i]};
    for (double a : m.accuracy[i]) cells.push_back(csv::number(a));
    t.add_row(std::move(cells));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Linear read-out probe

/// Affine map from the r predicted hop channels to one n x n target.
struct LinearReadout {
  Vector weights;  ///< one per channel
  double intercept = 0.0;

  Matrix operator()(const PairTensor& x) const {
    Matrix out = Matrix::Constant(x.n, x.n, intercept);
    for (int c = 0; c < x.channels(); ++c) out += weights(c) * x.channel(c);
    return out;
  }
};

/// Least-squares fit over every entry of every (features, target) pair.
inline LinearReadout fit_readout(const std::vector<PairTensor>& features, const std::vector<Matrix>& targets) {
  if (features.empty() || features.size() != targets.size()) throw InputError("read-out needs matching, non-empty data");
  const int r = features.front().channels();
  Eigen::Index rows = 0;
  for (const auto& f : features) rows += f.data.rows();
  Matrix design(rows, r + 1);
  Vector y(rows);
  Eigen::Index at = 0;
  for (std::size_t g = 0; g < features.size(); ++g) {
    const auto& f = features[g];
    if (f.channels() != r || targets[g].rows() != f.n) throw ShapeError("read-out inputs disagree in shape");
    design.block(at, 0, f.data.rows(), r) = f.data;
    design.block(at, r, f.data.rows(), 1).setOnes();
    y.segment(at, f.data.rows()) = targets[g].reshaped();
    at += f.data.rows();
  }
  const Vector beta = design.completeOrthogonalDecomposition().solve(y);
  return {beta.head(r), beta(r)};
}

/// Mean absolute entrywise error of `readout` on each pair, averaged over pairs.
inline double readout_mae(const LinearReadout& readout, const std::vector<PairTensor>& features,
                          const std::vector<Matrix>& targets) {
  if (features.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t g = 0; g < features.size(); ++g) sum += (readout(features[g]) - targets[g]).cwiseAbs().mean();
  return sum / static_cast<double>(features.size());
}

/// Random probe coefficients with unit L1 norm and random signs.
inline PolynomialProbe random_probe(int degree, std::uint64_t seed) {
  Rng rng(seed);
  PolynomialProbe p;
  double l1 = 0.0;
  for (int j = 0; j < degree; ++j) {
    const double v = rng.uniform(-1.0, 1.0);
    p.coefficients.push_back(v);
    l1 += std::abs(v);
  }
  for (auto& c : p.coefficients) c /= l1;
  return p;
}

}  // namespace hopewave

#endif
