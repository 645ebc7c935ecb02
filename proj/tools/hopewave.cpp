// hopewave: corpus generation, wavelet dumps, pretraining, evaluation,
// ablations and node-encoding export.
//
// Exit codes: 0 success, 1 user error (flags, files, formats), 2 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hopewave/hopewave.hpp"
#include "hopewave/selftest.hpp"

namespace hw = hopewave;

namespace {

struct WaveletFlags {
  std::vector<double> scales = hw::default_scales();
  std::string method = "chebyshev";
  int order = 50;

  hw::WaveletConfig config() const {
    hw::validate_scales(scales);
    if (order < 1) throw hw::InputError("--order must be >= 1");
    return {scales, hw::parse_wavelet_method(method), order};
  }
};

struct TrainFlags {
  std::vector<int> hops{1, 2, 4, 8};
  int latent = 20;
  int threshold = 100;
  int epochs = 100;
  int batch = 32;
  double lr = 5e-4;
  double clip = 5.0;
  double val_fraction = 0.1;
  bool unmasked = false;
  bool fixed_masks = false;

  hw::ModelConfig model(int channels) const {
    hw::ModelConfig m;
    m.wavelet_channels = channels;
    m.latent_dim = latent;
    m.hops = hops;
    m.validate();
    return m;
  }

  hw::TrainConfig train(std::uint64_t seed, int threads) const {
    hw::TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch;
    t.threshold = threshold;
    t.seed = seed;
    t.adam.learning_rate = lr;
    t.adam.clip_norm = clip;
    t.masked = !unmasked;
    t.resample_masks = !fixed_masks;
    t.threads = threads;
    t.validate();
    return t;
  }
};

void add_wavelet_flags(CLI::App* app, WaveletFlags& w) {
  app->add_option("--scales", w.scales, "Wavelet scales, comma separated")->delimiter(',');
  app->add_option("--method", w.method, "Wavelet method")->check(CLI::IsMember({"exact", "chebyshev"}));
  app->add_option("--order", w.order, "Chebyshev expansion order");
}

void add_train_flags(CLI::App* app, TrainFlags& t) {
  app->add_option("--hops", t.hops, "Hop lengths to reconstruct, comma separated")->delimiter(',');
  app->add_option("--latent", t.latent, "Latent (encoding) dimension");
  app->add_option("--threshold", t.threshold, "Per-class cap on kept mask entries");
  app->add_option("--epochs", t.epochs, "Training epochs");
  app->add_option("--batch", t.batch, "Graphs per optimizer step");
  app->add_option("--lr", t.lr, "Adam learning rate");
  app->add_option("--clip", t.clip, "Global gradient-norm clip (<= 0 disables)");
  app->add_option("--val-fraction", t.val_fraction, "Validation share of the corpus");
  app->add_flag("--unmasked", t.unmasked, "Train on every entry instead of balanced masks");
  app->add_flag("--fixed-masks", t.fixed_masks, "Draw one mask per graph instead of one per epoch");
}

hw::GraphCorpus load_split(const std::string& path, double val_fraction, std::uint64_t seed) {
  auto graphs = hw::read_corpus(path);
  if (graphs.empty()) throw hw::InputError("corpus '" + path + "' is empty");
  if (val_fraction <= 0.0) {
    hw::GraphCorpus c{std::move(graphs), {}, {}};
    for (std::size_t i = 0; i < c.graphs.size(); ++i) c.train.push_back(i);
    return c;
  }
  return hw::split_corpus(std::move(graphs), val_fraction, seed);
}

hw::Graph load_graph(const std::string& graph_path, const std::string& corpus_path, std::size_t index) {
  if (!graph_path.empty() == !corpus_path.empty()) throw hw::InputError("give exactly one of --graph or --corpus");
  if (!graph_path.empty()) {
    std::ifstream in(graph_path);
    if (!in) throw hw::InputError("cannot open '" + graph_path + "'");
    return hw::parse_edge_list(in, graph_path);
  }
  auto graphs = hw::read_corpus(corpus_path);
  if (index >= graphs.size())
    throw hw::InputError("--index " + std::to_string(index) + " out of range for " + std::to_string(graphs.size()) +
                         " graphs");
  return graphs[index];
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hw::InputError("cannot write '" + path + "'");
  return out;
}

std::string fixed(double v) { return hw::csv::number(v); }

int resolve_threads(int flag) { return flag > 0 ? flag : hw::threads_from_env(1); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HOPE-WavePE: wavelet positional encodings from a pretrained equivariant autoencoder"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Read flag values from a TOML/INI file (explicit flags win)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: HOPEWAVE_THREADS, else 1)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic JSONL corpus");
  std::string gen_kind = "erdos_renyi", gen_out;
  int gen_n = 16, gen_n_max = 0, gen_count = 1;
  double gen_p = 0.3;
  bool gen_any = false;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", gen_kind, "Generator")
      ->check(CLI::IsMember({"erdos_renyi", "cycle", "path", "grid", "tree", "barbell"}));
  gen->add_option("--n", gen_n, "Node count (lower bound when --n-max is set)");
  gen->add_option("--n-max", gen_n_max, "Upper bound on node count (0: same as --n)");
  gen->add_option("--count", gen_count, "Number of graphs");
  gen->add_option("--p", gen_p, "Edge probability (erdos_renyi)");
  gen->add_flag("--allow-disconnected", gen_any, "Do not resample disconnected erdos_renyi graphs");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", gen_out, "Output JSONL path")->required();

  // wavelet
  auto* wav = app.add_subcommand("wavelet", "Dump the wavelet tensor of one graph");
  WaveletFlags wav_w;
  std::string wav_graph, wav_corpus, wav_out, wav_format = "csv";
  std::size_t wav_index = 0;
  wav->add_option("--graph", wav_graph, "Edge-list file");
  wav->add_option("--corpus", wav_corpus, "JSONL corpus (with --index)");
  wav->add_option("--index", wav_index, "Graph index within --corpus");
  add_wavelet_flags(wav, wav_w);
  wav->add_option("--format", wav_format, "csv: one file per channel (<out>.s<k>.csv); json: one document")
      ->check(CLI::IsMember({"csv", "json"}));
  wav->add_option("--out", wav_out, "Output path (csv: file prefix)")->required();

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Pretrain the autoencoder on a corpus");
  WaveletFlags pre_w;
  TrainFlags pre_t;
  std::string pre_corpus, pre_out;
  std::uint64_t pre_seed = 0;
  bool pre_verbose = false;
  pre->add_option("--corpus", pre_corpus, "JSONL corpus")->required();
  add_wavelet_flags(pre, pre_w);
  add_train_flags(pre, pre_t);
  pre->add_option("--seed", pre_seed, "Random seed (required)")->required();
  pre->add_option("--out", pre_out, "Checkpoint path")->required();
  pre->add_flag("--verbose", pre_verbose, "Print one line per epoch to standard error");

  // eval
  auto* ev = app.add_subcommand("eval", "Reconstruction accuracy of a checkpoint on a corpus");
  std::string ev_ckpt, ev_corpus, ev_out, ev_mode = "masked", ev_split = "all";
  std::vector<int> ev_hops;
  int ev_threshold = 100;
  double ev_val_fraction = 0.1;
  std::uint64_t ev_seed = 0;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint JSON")->required();
  ev->add_option("--corpus", ev_corpus, "JSONL corpus")->required();
  ev->add_option("--hops", ev_hops, "Hops to score (empty: every checkpoint hop)")->delimiter(',');
  ev->add_option("--mode", ev_mode, "Aggregate reported on standard output")->check(CLI::IsMember({"masked", "unmasked"}));
  ev->add_option("--threshold", ev_threshold, "Per-class cap on scored mask entries");
  ev->add_option("--split", ev_split, "all, or the validation split pretrain held out")
      ->check(CLI::IsMember({"all", "validation"}));
  ev->add_option("--val-fraction", ev_val_fraction, "Validation share used at pretraining (with --split validation)");
  ev->add_option("--seed", ev_seed, "Evaluation-mask seed");
  ev->add_option("--out", ev_out, "Report CSV path")->required();

  // encode
  auto* enc = app.add_subcommand("encode", "Export node encodings for one graph");
  std::string enc_ckpt, enc_graph, enc_corpus, enc_out;
  std::size_t enc_index = 0;
  enc->add_option("--checkpoint", enc_ckpt, "Checkpoint JSON")->required();
  enc->add_option("--graph", enc_graph, "Edge-list file");
  enc->add_option("--corpus", enc_corpus, "JSONL corpus (with --index)");
  enc->add_option("--index", enc_index, "Graph index within --corpus");
  enc->add_option("--out", enc_out, "Encoding CSV path")->required();

  // ablations
  WaveletFlags abl_w;
  TrainFlags abl_t;
  std::uint64_t abl_seed = 0;
  std::vector<int> abl_eval_hops{1, 2, 4, 8};
  std::string abl_out;
  auto add_ablation_flags = [&](CLI::App* sub) {
    add_wavelet_flags(sub, abl_w);
    add_train_flags(sub, abl_t);
    sub->add_option("--eval-hops", abl_eval_hops, "Hops scored after training")->delimiter(',');
    sub->add_option("--seed", abl_seed, "Random seed shared by every run");
    sub->add_option("--out", abl_out, "CSV path")->required();
  };

  auto* ach = app.add_subcommand("ablate-channels", "Accuracy versus number of wavelet channels");
  std::string ach_corpus;
  std::vector<int> ach_counts{1, 2, 4, 8};
  double ach_min = 1.0, ach_max = 16.0;
  ach->add_option("--corpus", ach_corpus, "JSONL corpus")->required();
  ach->add_option("--counts", ach_counts, "Channel counts, comma separated")->delimiter(',');
  ach->add_option("--scale-min", ach_min, "Smallest scale");
  ach->add_option("--scale-max", ach_max, "Largest scale");
  add_ablation_flags(ach);

  auto* amk = app.add_subcommand("ablate-mask", "Masked versus unmasked training");
  std::string amk_corpus;
  amk->add_option("--corpus", amk_corpus, "JSONL corpus")->required();
  add_ablation_flags(amk);

  auto* crs = app.add_subcommand("cross-eval", "Train on each corpus, evaluate hop-1 accuracy on every corpus");
  std::vector<std::string> crs_corpora;
  crs->add_option("--corpus", crs_corpora, "name=path, repeatable")->required();
  add_ablation_flags(crs);

  auto* self = app.add_subcommand("selftest", "Run the fast property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const int nthreads = resolve_threads(threads);

    if (*gen) {
      if (gen_count < 0) throw hw::InputError("--count must be >= 0");
      hw::FamilySpec fam;
      fam.kind = hw::parse_graph_kind(gen_kind);
      fam.count = gen_count;
      fam.n_min = gen_n;
      fam.n_max = gen_n_max > 0 ? gen_n_max : gen_n;
      fam.p = gen_p;
      fam.connected = !gen_any;
      hw::write_corpus(gen_out, hw::generate_families({fam}, gen_seed));
    } else if (*wav) {
      const hw::Graph g = load_graph(wav_graph, wav_corpus, wav_index);
      const auto wc = wav_w.config();
      const auto w = hw::compute_wavelet(g, wc.scales, wc.method, wc.order);
      if (wav_format == "json") {
        nlohmann::json j{{"graph", g.id()}, {"n", g.n()}, {"scales", w.scales},
                         {"method", hw::to_string(w.method)}, {"order", w.order}};
        auto& channels = j["channels"] = nlohmann::json::array();
        for (int c = 0; c < w.channels(); ++c) {
          const hw::Matrix m = w.data.channel(c);
          nlohmann::json rows = nlohmann::json::array();
          for (int u = 0; u < g.n(); ++u) {
            std::vector<double> row(static_cast<std::size_t>(g.n()));
            for (int v = 0; v < g.n(); ++v) row[static_cast<std::size_t>(v)] = m(u, v);
            rows.push_back(row);
          }
          channels.push_back(rows);
        }
        open_out(wav_out) << j.dump() << '\n';
      } else {
        for (int c = 0; c < w.channels(); ++c) {
          const hw::Matrix m = w.data.channel(c);
          auto out = open_out(wav_out + ".s" + std::to_string(c) + ".csv");
          char buf[40];
          for (int u = 0; u < g.n(); ++u) {
            for (int v = 0; v < g.n(); ++v) {
              std::snprintf(buf, sizeof buf, "%.17g", m(u, v));
              out << (v ? "," : "") << buf;
            }
            out << '\n';
          }
        }
      }
    } else if (*pre) {
      const auto corpus = load_split(pre_corpus, pre_t.val_fraction, pre_seed);
      const auto wc = pre_w.config();
      auto on_epoch = [&](const hw::EpochRecord& r) {
        if (!pre_verbose) return;
        std::fprintf(stderr, "epoch %d train_loss %.6f val_loss %.6f val_aggregate %.6f\n", r.epoch, r.train_loss,
                     r.validation_loss, r.validation_aggregate);
      };
      const auto ck = hw::pretrain(corpus, pre_t.model(static_cast<int>(wc.scales.size())), wc,
                                   pre_t.train(pre_seed, nthreads), on_epoch);
      hw::save_checkpoint(ck, pre_out);
    } else if (*ev) {
      const auto ck = hw::load_checkpoint(ev_ckpt);
      const auto hops = ev_hops.empty() ? ck.params.config.hops : ev_hops;
      auto graphs = hw::read_corpus(ev_corpus);
      std::vector<std::size_t> indices;
      if (ev_split == "validation") {
        const auto split = hw::split_corpus(graphs, ev_val_fraction, ck.training.seed);
        indices = split.validation;
        if (indices.empty()) throw hw::InputError("validation split is empty");
      }
      const hw::EvalConfig cfg{ev_threshold, ev_seed, nthreads};
      const auto rep = hw::reconstruction_accuracy(ck, graphs, indices, hops, hw::parse_mask_mode(ev_mode), cfg,
                                                   ev_corpus);
      hw::report_csv(rep, ev_out);
      std::printf("%s aggregate %s\n", ev_mode.c_str(), fixed(rep.aggregate()).c_str());
    } else if (*enc) {
      const auto ck = hw::load_checkpoint(enc_ckpt);
      const hw::Graph g = load_graph(enc_graph, enc_corpus, enc_index);
      const hw::NodeTensor z = hw::extract_pe(g, ck.params, ck.wavelet);
      hw::csv::Table t;
      t.columns.push_back("node");
      for (Eigen::Index k = 0; k < z.cols(); ++k) t.columns.push_back("z" + std::to_string(k));
      for (Eigen::Index u = 0; u < z.rows(); ++u) {
        std::vector<std::string> row{std::to_string(u)};
        for (Eigen::Index k = 0; k < z.cols(); ++k) row.push_back(fixed(z(u, k)));
        t.add_row(std::move(row));
      }
      hw::csv::write_file(t, enc_out);
    } else if (*ach || *amk || *crs) {
      hw::AblationConfig cfg;
      cfg.wavelet = abl_w.config();
      cfg.model = abl_t.model(static_cast<int>(cfg.wavelet.scales.size()));
      cfg.train = abl_t.train(abl_seed, nthreads);
      cfg.eval_hops = abl_eval_hops;
      cfg.eval = {abl_t.threshold, abl_seed, nthreads};
      for (int h : cfg.eval_hops)
        if (std::find(cfg.model.hops.begin(), cfg.model.hops.end(), h) == cfg.model.hops.end())
          throw hw::InputError("--eval-hops entry " + std::to_string(h) + " is not among --hops");
      if (*ach) {
        const auto corpus = load_split(ach_corpus, abl_t.val_fraction, abl_seed);
        const auto rows = hw::channel_ablation(corpus, ach_counts, cfg, ach_min, ach_max);
        hw::csv::write_file(hw::channel_ablation_table(rows, cfg.eval_hops), abl_out);
      } else if (*amk) {
        const auto corpus = load_split(amk_corpus, abl_t.val_fraction, abl_seed);
        hw::csv::write_file(hw::mask_ablation_table(hw::mask_ablation(corpus, cfg)), abl_out);
      } else {
        std::vector<hw::NamedCorpus> corpora;
        for (const auto& spec : crs_corpora) {
          const auto eq = spec.find('=');
          const std::string name = eq == std::string::npos ? spec : spec.substr(0, eq);
          const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
          corpora.push_back({name, load_split(path, abl_t.val_fraction, abl_seed)});
        }
        hw::csv::write_file(hw::cross_matrix_table(hw::cross_corpus_matrix(corpora, cfg)), abl_out);
      }
    } else if (*self) {
      bool ok = true;
      for (const auto& r : hw::run_selftest()) {
        std::printf("%s %s (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        ok = ok && r.passed;
      }
      return ok ? 0 : 2;
    }
    return 0;
  } catch (const hw::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
}
