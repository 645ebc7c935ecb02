#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "hopewave/checkpoint.hpp"
#include "hopewave/corpus.hpp"
#include "hopewave/trainer.hpp"
#include "support/finite_difference.hpp"

using namespace hopewave;

namespace {

Graph path3() { return Graph(3, {{0, 1}, {1, 2}}); }
Graph triangle() { return Graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

PairTensor constant_predictions(int n, int r, double p) {
  PairTensor x(n, r);
  x.data.setConstant(p);
  return x;
}

ModelConfig trainer_config() {
  ModelConfig c;
  c.wavelet_channels = 2;
  c.encoder_widths = {4, 4};
  c.latent_hidden = 8;
  c.latent_dim = 4;
  c.decoder_widths = {4, 4};
  c.head_widths = {8};
  c.hops = {1, 2};
  return c;
}

WaveletConfig trainer_wavelet() { return {{1.0, 4.0}, WaveletMethod::chebyshev, 30}; }

GraphCorpus small_corpus(std::size_t count = 12) {
  auto graphs = generate_families({{GraphKind::tree, static_cast<int>(count / 2), 6, 10},
                                   {GraphKind::cycle, static_cast<int>(count - count / 2), 6, 10}},
                                  5);
  return split_corpus(std::move(graphs), 0.25, 1);
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path(std::filesystem::temp_directory_path() / (name + "-" + std::to_string(::getpid()))) {}
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST(Mask, PathThreeKeepsTwoOfEachClass) {
  const auto targets = hop_adjacency_stack(path3(), {1});
  const auto m = sample_mask(targets, 100, 0);
  const auto& st = m.per_channel[0];
  EXPECT_EQ(st.edges_total, 2);
  EXPECT_EQ(st.nonedges_total, 4);
  EXPECT_EQ(st.edges_kept, 2);
  EXPECT_EQ(st.nonedges_kept, 2);
  EXPECT_TRUE(m.kept(0, 1, 0));
  EXPECT_TRUE(m.kept(1, 2, 0));
}

TEST(Mask, SaturatedChannelKeepsNothing) {
  // K3 at hop 2: every pair, diagonal included, is reachable.
  const auto targets = hop_adjacency_stack(triangle(), {1, 2});
  const auto m = sample_mask(targets, 100, 0);
  EXPECT_FALSE(m.per_channel[0].saturated);
  EXPECT_TRUE(m.per_channel[1].saturated);
  EXPECT_EQ(m.per_channel[1].edges_kept, 0);
  EXPECT_EQ(m.per_channel[1].nonedges_kept, 0);
}

TEST(Mask, ThresholdOne) {
  const auto targets = hop_adjacency_stack(gen_synthetic(GraphKind::cycle, {.n = 12}, 0), {1, 2, 3});
  const auto m = sample_mask(targets, 1, 4);
  for (const auto& st : m.per_channel) {
    EXPECT_EQ(st.edges_kept, 1);
    EXPECT_EQ(st.nonedges_kept, 1);
  }
  EXPECT_THROW(sample_mask(targets, 0, 4), InputError);
}

TEST(Mask, BalancedOverManyDraws) {
  Rng rng(3);
  for (int draw = 0; draw < 1000; ++draw) {
    const Graph g = gen_synthetic(GraphKind::erdos_renyi, {.n = 4 + static_cast<int>(rng.below(12)), .p = 0.3}, rng.next());
    const auto targets = hop_adjacency_stack(g, {1, 2, 4});
    const auto m = sample_mask(targets, 1 + static_cast<int>(rng.below(20)), rng.next());
    for (int c = 0; c < m.channels; ++c) {
      int ones = 0, zeros = 0;
      for (int v = 0; v < m.n; ++v)
        for (int u = 0; u < m.n; ++u) {
          ASSERT_EQ(m.kept(u, v, c), m.kept(v, u, c));
          if (u <= v && m.kept(u, v, c)) ++(targets.data(u, v, c) > 0.5 ? ones : zeros);
        }
      ASSERT_EQ(ones, zeros);
      ASSERT_EQ(ones, m.per_channel[static_cast<std::size_t>(c)].edges_kept);
    }
  }
}

TEST(Mask, EpochsDrawDifferentMasks) {
  const auto corpus = small_corpus();
  const auto samples = prepare_samples(corpus.graphs, {1, 2}, trainer_wavelet());
  TrainConfig cfg;
  cfg.threshold = 3;
  const auto a = training_mask(samples[0], cfg, 1, 0);
  EXPECT_EQ(a.data, training_mask(samples[0], cfg, 1, 0).data);
  EXPECT_NE(a.data, training_mask(samples[0], cfg, 2, 0).data);
  cfg.resample_masks = false;
  EXPECT_EQ(training_mask(samples[0], cfg, 1, 0).data, training_mask(samples[0], cfg, 7, 0).data);
}

TEST(Bce, KnownValues) {
  const auto targets = hop_adjacency_stack(path3(), {1});
  const auto mask = sample_mask(targets, 100, 0);
  EXPECT_NEAR(masked_bce(constant_predictions(3, 1, 0.5), targets, mask).loss, std::log(2.0), 1e-12);

  // A single kept edge predicted at 0.1.
  MaskTensor one = sample_mask(targets, 1, 0);
  std::fill(one.data.begin(), one.data.end(), std::uint8_t{0});
  one.keep(0, 1, 0);
  one.per_channel[0].edges_kept = 1;
  one.per_channel[0].nonedges_kept = 0;
  EXPECT_NEAR(masked_bce(constant_predictions(3, 1, 0.1), targets, one).loss, -std::log(0.1), 1e-12);
}

TEST(Bce, PerfectPredictionIsNearZero) {
  const auto targets = hop_adjacency_stack(gen_synthetic(GraphKind::tree, {.n = 9}, 1), {1, 2});
  const auto mask = sample_mask(targets, 100, 2);
  EXPECT_LE(masked_bce(targets.data, targets, mask).loss, 1e-6);
}

TEST(Bce, AllChannelsSaturatedThrows) {
  const auto targets = hop_adjacency_stack(triangle(), {2});
  const auto mask = sample_mask(targets, 100, 0);
  EXPECT_THROW(masked_bce(constant_predictions(3, 1, 0.5), targets, mask), InputError);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  auto p = init_params(oracle::tiny_config(), 1);
  const Vector before = p.values;
  auto state = OptimizerState::for_params(p);
  adam_step(p, Vector::Zero(p.values.size()), state, {});
  EXPECT_EQ(p.values, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto p = init_params(oracle::tiny_config(), 1);
  const Vector before = p.values;
  auto state = OptimizerState::for_params(p);
  Vector g = Vector::Zero(p.values.size());
  g(0) = 0.3;
  g(1) = -2.0;
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  adam_step(p, g, state, cfg);
  EXPECT_NEAR(p.values(0) - before(0), -1e-3, 1e-9);
  EXPECT_NEAR(p.values(1) - before(1), 1e-3, 1e-9);
  EXPECT_EQ(p.values(2), before(2));
}

TEST(Adam, ClipsToGlobalNorm) {
  auto p = init_params(oracle::tiny_config(), 1);
  auto state = OptimizerState::for_params(p);
  Vector g = Vector::Zero(p.values.size());
  g(0) = 6.0;
  g(1) = 8.0;
  EXPECT_DOUBLE_EQ(adam_step(p, g, state, {}), 10.0);
  EXPECT_NEAR(state.first_moment.norm(), 0.1 * 5.0, 1e-12);
}

TEST(Adam, NonFiniteGradientNamesBlock) {
  auto p = init_params(oracle::tiny_config(), 1);
  auto state = OptimizerState::for_params(p);
  const auto& block = p.layout.params.blocks()[3];
  Vector g = Vector::Zero(p.values.size());
  g(static_cast<Eigen::Index>(block.offset)) = std::nan("");
  try {
    adam_step(p, g, state, {});
    FAIL() << "NaN accepted";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find(block.name), std::string::npos) << e.what();
  }
}

TEST(Pretrain, ZeroLearningRateKeepsInitialization) {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 9;
  cfg.adam.learning_rate = 0.0;
  const auto ck = pretrain(small_corpus(), trainer_config(), trainer_wavelet(), cfg);
  EXPECT_EQ(ck.params.values, init_params(trainer_config(), 9).values);
  EXPECT_EQ(ck.training.epochs_run, 2);
}

TEST(Pretrain, DeterministicAndThreadInvariant) {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.seed = 17;
  const auto corpus = small_corpus();
  const auto a = pretrain(corpus, trainer_config(), trainer_wavelet(), cfg);
  const auto b = pretrain(corpus, trainer_config(), trainer_wavelet(), cfg);
  cfg.threads = 3;
  const auto c = pretrain(corpus, trainer_config(), trainer_wavelet(), cfg);
  EXPECT_EQ(a.params.values, b.params.values);
  EXPECT_EQ(a.params.values, c.params.values);
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(c));
}

TEST(Pretrain, LossDecreases) {
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 4;
  cfg.seed = 2;
  cfg.adam.learning_rate = 5e-3;
  std::vector<double> losses;
  pretrain(small_corpus(16), trainer_config(), trainer_wavelet(), cfg,
           [&](const EpochRecord& r) { losses.push_back(r.train_loss); });
  ASSERT_EQ(losses.size(), 20u);
  EXPECT_LT(losses.back(), losses.front());
}

TEST(Pretrain, BestEpochMatchesLowestValidationLoss) {
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.batch_size = 4;
  cfg.seed = 4;
  const auto ck = pretrain(small_corpus(), trainer_config(), trainer_wavelet(), cfg);
  ASSERT_GE(ck.training.best_epoch, 1);
  const double best = ck.training.history[static_cast<std::size_t>(ck.training.best_epoch - 1)].validation_loss;
  for (const auto& r : ck.training.history) EXPECT_GE(r.validation_loss, best);
}

TEST(Pretrain, RejectsBadInputs) {
  TrainConfig cfg;
  cfg.epochs = 1;
  GraphCorpus empty;
  EXPECT_THROW(pretrain(empty, trainer_config(), trainer_wavelet(), cfg), InputError);
  EXPECT_THROW(pretrain(small_corpus(), trainer_config(), WaveletConfig{}, cfg), InputError);
  cfg.batch_size = 0;
  EXPECT_THROW(pretrain(small_corpus(), trainer_config(), trainer_wavelet(), cfg), InputError);
}

TEST(Checkpoint, RoundTripReproducesForwardPass) {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 3;
  const auto ck = pretrain(small_corpus(), trainer_config(), trainer_wavelet(), cfg);
  TempFile file("hopewave-ck");
  save_checkpoint(ck, file.path.string());
  const auto back = load_checkpoint(file.path.string());
  EXPECT_EQ(back.params.values, ck.params.values);
  EXPECT_EQ(back.params.config.hops, ck.params.config.hops);
  EXPECT_EQ(back.wavelet.scales, ck.wavelet.scales);
  EXPECT_EQ(back.training.best_epoch, ck.training.best_epoch);
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(ck));
  const Graph g = gen_synthetic(GraphKind::tree, {.n = 11}, 8);
  EXPECT_EQ(extract_pe(g, back.params, back.wavelet), extract_pe(g, ck.params, ck.wavelet));
}

TEST(Checkpoint, TruncatedFileIsParseError) {
  const Checkpoint ck{kCheckpointVersion, init_params(trainer_config(), 1), trainer_wavelet(), {}};
  const std::string text = serialize_checkpoint(ck);
  EXPECT_THROW(parse_checkpoint(text.substr(0, text.size() / 2)), ParseError);
  EXPECT_THROW(load_checkpoint("/nonexistent/hopewave.ckpt"), InputError);
}

TEST(Checkpoint, VersionMismatchNamesBothVersions) {
  const Checkpoint ck{kCheckpointVersion, init_params(trainer_config(), 1), trainer_wavelet(), {}};
  auto j = checkpoint_to_json(ck);
  j["version"] = kCheckpointVersion + 1;
  try {
    checkpoint_from_json(j);
    FAIL() << "future version accepted";
  } catch (const VersionError& e) {
    EXPECT_EQ(e.found(), kCheckpointVersion + 1);
    const std::string msg = e.what();
    EXPECT_NE(msg.find(std::to_string(kCheckpointVersion + 1)), std::string::npos);
    EXPECT_NE(msg.find(std::to_string(kCheckpointVersion)), std::string::npos);
  }
}

TEST(Checkpoint, CorruptParameterDataIsRejected) {
  const Checkpoint ck{kCheckpointVersion, init_params(trainer_config(), 1), trainer_wavelet(), {}};
  auto j = checkpoint_to_json(ck);
  j["params"]["blocks"][0]["data"] = "not*base64!";
  EXPECT_THROW(checkpoint_from_json(j), ParseError);
  j = checkpoint_to_json(ck);
  j["params"]["blocks"][0]["data"] = base64::encode_doubles(std::vector<double>{1.0}.data(), 1);
  EXPECT_THROW(checkpoint_from_json(j), ParseError);
}
