#ifndef HOPEWAVE_TRAINER_HPP
#define HOPEWAVE_TRAINER_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "hopewave/backward.hpp"
#include "hopewave/checkpoint.hpp"
#include "hopewave/error.hpp"
#include "hopewave/graph.hpp"
#include "hopewave/loss.hpp"
#include "hopewave/model.hpp"
#include "hopewave/optimizer.hpp"
#include "hopewave/parallel.hpp"
#include "hopewave/random.hpp"
#include "hopewave/spectral.hpp"

namespace hopewave {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  int threshold = 100;  ///< per-class cap on kept mask entries
  std::uint64_t seed = 0;
  AdamConfig adam{};
  bool masked = true;          ///< false keeps every entry (the unmasked ablation)
  bool resample_masks = true;  ///< fresh masks every epoch; otherwise one mask per graph
  int threads = 1;

  void validate() const {
    if (epochs < 0) throw InputError("epochs must be >= 0");
    if (batch_size < 1) throw InputError("batch size must be >= 1");
    if (threshold < 1) throw InputError("threshold must be >= 1");
    if (!(adam.learning_rate >= 0.0)) throw InputError("learning rate must be non-negative");
  }
};

/// Model input and targets for one graph.
struct GraphSample {
  WaveletTensor wavelet;
  HopAdjacencyStack targets;
};

inline std::vector<GraphSample> prepare_samples(const std::vector<Graph>& graphs, const std::vector<int>& hops,
                                                const WaveletConfig& wc, int threads = 1) {
  std::vector<GraphSample> out(graphs.size());
  parallel_for(graphs.size(), threads, [&](std::size_t i) {
    out[i] = {compute_wavelet(graphs[i], wc.scales, wc.method, wc.order), hop_adjacency_stack(graphs[i], hops)};
  });
  return out;
}

// Substream tags.
inline constexpr std::uint64_t kTagShuffle = 0x5348;
inline constexpr std::uint64_t kTagTrainMask = 0x544D;
inline constexpr std::uint64_t kTagValidationMask = 0x564D;

inline MaskTensor training_mask(const GraphSample& s, const TrainConfig& cfg, int epoch, std::size_t graph_index) {
  if (!cfg.masked) return full_mask(s.targets);
  const auto e = static_cast<std::uint64_t>(cfg.resample_masks ? epoch : 0);
  return sample_mask(s.targets, cfg.threshold, substream_seed(cfg.seed, {kTagTrainMask, e, graph_index}));
}

/// Loss and per-hop accuracy of a model over a set of samples.
struct SampleEvaluation {
  double loss = 0.0;  ///< mean over graphs with at least one active channel
  std::vector<std::optional<double>> hop_accuracy;  ///< mean over graphs scoring that hop
  std::vector<int> graphs_scored;
  double aggregate = 0.0;  ///< mean of the available hop accuracies
};

/// Evaluate on `indices` with masks from `mask_for(sample, index)`.
template <typename MaskFn>
SampleEvaluation evaluate_samples(const ModelParams& p, const std::vector<GraphSample>& samples,
                                  const std::vector<std::size_t>& indices, MaskFn&& mask_for, int threads = 1) {
  const int r = p.config.hop_count();
  struct PerGraph {
    std::optional<double> loss;
    std::vector<ChannelScore> scores;
  };
  std::vector<PerGraph> per(indices.size());
  parallel_for(indices.size(), threads, [&](std::size_t k) {
    const auto& s = samples[indices[k]];
    const MaskTensor mask = mask_for(s, indices[k]);
    const PairTensor pred = decoder_forward(encoder_forward(s.wavelet, p), p);
    if (std::any_of(mask.per_channel.begin(), mask.per_channel.end(), [](const auto& c) { return c.kept() > 0; }))
      per[k].loss = masked_bce(pred, s.targets, mask).loss;
    per[k].scores = score_predictions(pred, s.targets, mask);
  });
  SampleEvaluation ev;
  std::vector<double> acc_sum(static_cast<std::size_t>(r), 0.0);
  ev.graphs_scored.assign(static_cast<std::size_t>(r), 0);
  int loss_count = 0;
  for (const auto& g : per) {
    if (g.loss) {
      ev.loss += *g.loss;
      ++loss_count;
    }
    for (int c = 0; c < r; ++c) {
      const auto& sc = g.scores[static_cast<std::size_t>(c)];
      if (sc.scored == 0) continue;
      acc_sum[static_cast<std::size_t>(c)] += sc.accuracy();
      ++ev.graphs_scored[static_cast<std::size_t>(c)];
    }
  }
  if (loss_count > 0) ev.loss /= loss_count;
  int avail = 0;
  for (int c = 0; c < r; ++c) {
    const int cnt = ev.graphs_scored[static_cast<std::size_t>(c)];
    if (cnt == 0) {
      ev.hop_accuracy.emplace_back();
      continue;
    }
    ev.hop_accuracy.emplace_back(acc_sum[static_cast<std::size_t>(c)] / cnt);
    ev.aggregate += *ev.hop_accuracy.back();
    ++avail;
  }
  if (avail > 0) ev.aggregate /= avail;
  return ev;
}

/// Loss and gradient for one graph.
struct GraphGradient {
  double loss = 0.0;
  Vector grad;
};

inline GraphGradient graph_gradient(const ModelParams& p, const GraphSample& s, const MaskTensor& mask) {
  const ForwardTrace trace = forward_full(s.wavelet, p);
  const BceResult bce = masked_bce(trace.predictions(), s.targets, mask);
  return {bce.loss, backward(trace, p, bce.grad_logits).values};
}

/// Called after every epoch with the record just appended to the history.
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Pretrain the autoencoder on the corpus's training split.
///
/// Per epoch: shuffle the training indices, then for each batch average the
/// per-graph gradients (each graph processed at its own size) and take one Adam
/// step. Validation uses one fixed mask per graph so epochs are comparable; the
/// returned checkpoint holds the parameters with the lowest validation loss
/// (earliest epoch on ties; training loss when there is no validation split).
inline Checkpoint pretrain(const GraphCorpus& corpus, const ModelConfig& mcfg, const WaveletConfig& wcfg,
                           const TrainConfig& tcfg, const EpochCallback& on_epoch = {}) {
  mcfg.validate();
  tcfg.validate();
  if (corpus.train.empty()) throw InputError("training split is empty");
  if (static_cast<int>(wcfg.scales.size()) != mcfg.wavelet_channels)
    throw InputError("model expects " + std::to_string(mcfg.wavelet_channels) + " wavelet channels but " +
                     std::to_string(wcfg.scales.size()) + " scales were given");

  const auto samples = prepare_samples(corpus.graphs, mcfg.hops, wcfg, tcfg.threads);
  Checkpoint ck{kCheckpointVersion, init_params(mcfg, tcfg.seed), wcfg, {}};
  ck.training.seed = tcfg.seed;
  ModelParams params = ck.params;
  OptimizerState opt = OptimizerState::for_params(params);

  auto validation_mask = [&](const GraphSample& s, std::size_t idx) {
    return tcfg.masked ? sample_mask(s.targets, tcfg.threshold, substream_seed(tcfg.seed, {kTagValidationMask, idx}))
                       : full_mask(s.targets);
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order = corpus.train;
  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    Rng shuffle_rng(tcfg.seed, {kTagShuffle, static_cast<std::uint64_t>(epoch)});
    std::sort(order.begin(), order.end());
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tcfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tcfg.batch_size));
      std::vector<std::optional<GraphGradient>> parts(end - start);
      parallel_for(end - start, tcfg.threads, [&](std::size_t k) {
        const std::size_t idx = order[start + k];
        const MaskTensor mask = training_mask(samples[idx], tcfg, epoch, idx);
        if (std::none_of(mask.per_channel.begin(), mask.per_channel.end(), [](const auto& c) { return c.kept() > 0; }))
          return;  // fully saturated graph: nothing to learn from
        parts[k] = graph_gradient(params, samples[idx], mask);
      });
      Vector grad = Vector::Zero(params.values.size());
      for (const auto& part : parts) {
        if (!part) continue;
        if (!std::isfinite(part->loss)) throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
        loss_sum += part->loss;
        grad += part->grad;
      }
      grad /= static_cast<double>(end - start);
      adam_step(params, std::move(grad), opt, tcfg.adam);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    if (!corpus.validation.empty()) {
      const auto ev = evaluate_samples(params, samples, corpus.validation, validation_mask, tcfg.threads);
      rec.validation_loss = ev.loss;
      rec.validation_hop_accuracy = ev.hop_accuracy;
      rec.validation_aggregate = ev.aggregate;
    } else {
      rec.validation_loss = rec.train_loss;
    }
    if (!std::isfinite(rec.validation_loss)) throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
    ck.training.history.push_back(rec);
    ck.training.epochs_run = epoch;
    if (rec.validation_loss < best) {
      best = rec.validation_loss;
      ck.params.values = params.values;
      ck.training.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(rec);
  }
  return ck;
}

}  // namespace hopewave

#endif
