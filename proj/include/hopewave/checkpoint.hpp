#ifndef HOPEWAVE_CHECKPOINT_HPP
#define HOPEWAVE_CHECKPOINT_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopewave/base64.hpp"
#include "hopewave/error.hpp"
#include "hopewave/model.hpp"

namespace hopewave {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "hopewave-checkpoint";

/// Metrics recorded at the end of one training epoch.
struct EpochRecord {
  int epoch = 0;  ///< 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
  std::vector<std::optional<double>> validation_hop_accuracy;  ///< empty when every graph saturates that hop
  double validation_aggregate = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainingMetadata {
  std::uint64_t seed = 0;
  int best_epoch = 0;  ///< 0 means untrained initialization
  int epochs_run = 0;
  std::vector<EpochRecord> history;

  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

struct Checkpoint {
  int version = kCheckpointVersion;
  ModelParams params;
  WaveletConfig wavelet;
  TrainingMetadata training;
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"wavelet_channels", c.wavelet_channels}, {"encoder_widths", c.encoder_widths},
          {"latent_hidden", c.latent_hidden},       {"latent_dim", c.latent_dim},
          {"decoder_widths", c.decoder_widths},     {"head_widths", c.head_widths},
          {"hops", c.hops}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.wavelet_channels = j.at("wavelet_channels").get<int>();
  c.encoder_widths = j.at("encoder_widths").get<std::vector<int>>();
  c.latent_hidden = j.at("latent_hidden").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.decoder_widths = j.at("decoder_widths").get<std::vector<int>>();
  c.head_widths = j.at("head_widths").get<std::vector<int>>();
  c.hops = j.at("hops").get<std::vector<int>>();
  c.validate();
  return c;
}

inline nlohmann::json checkpoint_to_json(const Checkpoint& ck) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : ck.params.layout.params.blocks())
    blocks.push_back({{"name", b.name},
                      {"rows", b.rows},
                      {"cols", b.cols},
                      {"data", base64::encode_doubles(ck.params.values.data() + b.offset, b.size())}});
  nlohmann::json history = nlohmann::json::array();
  for (const auto& r : ck.training.history) {
    nlohmann::json acc = nlohmann::json::array();
    for (const auto& a : r.validation_hop_accuracy) acc.push_back(a ? nlohmann::json(*a) : nlohmann::json(nullptr));
    history.push_back({{"epoch", r.epoch},
                       {"train_loss", r.train_loss},
                       {"validation_loss", r.validation_loss},
                       {"validation_hop_accuracy", acc},
                       {"validation_aggregate", r.validation_aggregate}});
  }
  return {{"format", kCheckpointFormat},
          {"version", ck.version},
          {"model", to_json(ck.params.config)},
          {"wavelet", {{"scales", ck.wavelet.scales}, {"method", to_string(ck.wavelet.method)}, {"order", ck.wavelet.order}}},
          {"params", {{"init_seed", ck.params.init_seed}, {"count", ck.params.values.size()}, {"blocks", blocks}}},
          {"training",
           {{"seed", ck.training.seed},
            {"best_epoch", ck.training.best_epoch},
            {"epochs_run", ck.training.epochs_run},
            {"history", history}}}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", std::string{}) != kCheckpointFormat)
      throw ParseError(0, "not a hopewave checkpoint (missing or wrong 'format')");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) throw VersionError(version, kCheckpointVersion);

    Checkpoint ck;
    const ModelConfig cfg = model_config_from_json(j.at("model"));
    const auto& jp = j.at("params");
    ck.params = ModelParams{cfg, make_layout(cfg), Vector(), jp.at("init_seed").get<std::uint64_t>()};
    ck.params.values = Vector::Zero(static_cast<Eigen::Index>(ck.params.layout.params.total()));
    const auto& jblocks = jp.at("blocks");
    const auto& blocks = ck.params.layout.params.blocks();
    if (jblocks.size() != blocks.size()) throw ParseError(0, "parameter block count does not match the model config");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& jb = jblocks[i];
      const auto& b = blocks[i];
      if (jb.at("name").get<std::string>() != b.name || jb.at("rows").get<int>() != b.rows ||
          jb.at("cols").get<int>() != b.cols)
        throw ParseError(0, "parameter block '" + b.name + "' does not match the model config");
      std::vector<double> vals;
      try {
        vals = base64::decode_doubles(jb.at("data").get<std::string>());
      } catch (const InputError& ex) {
        throw ParseError(0, "parameter block '" + b.name + "': " + ex.what());
      }
      if (vals.size() != b.size()) throw ParseError(0, "parameter block '" + b.name + "' has the wrong length");
      std::copy(vals.begin(), vals.end(), ck.params.values.data() + b.offset);
    }

    const auto& jw = j.at("wavelet");
    ck.wavelet.scales = jw.at("scales").get<std::vector<double>>();
    ck.wavelet.method = parse_wavelet_method(jw.at("method").get<std::string>());
    ck.wavelet.order = jw.at("order").get<int>();

    const auto& jt = j.at("training");
    ck.training.seed = jt.at("seed").get<std::uint64_t>();
    ck.training.best_epoch = jt.at("best_epoch").get<int>();
    ck.training.epochs_run = jt.at("epochs_run").get<int>();
    for (const auto& jr : jt.at("history")) {
      EpochRecord r;
      r.epoch = jr.at("epoch").get<int>();
      r.train_loss = jr.at("train_loss").get<double>();
      r.validation_loss = jr.at("validation_loss").get<double>();
      for (const auto& a : jr.at("validation_hop_accuracy"))
        r.validation_hop_accuracy.push_back(a.is_null() ? std::nullopt : std::optional<double>(a.get<double>()));
      r.validation_aggregate = jr.at("validation_aggregate").get<double>();
      ck.training.history.push_back(std::move(r));
    }
    return ck;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(0, std::string("malformed checkpoint: ") + ex.what());
  }
}

inline std::string serialize_checkpoint(const Checkpoint& ck) { return checkpoint_to_json(ck).dump(1) + "\n"; }

inline Checkpoint parse_checkpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError(0, std::string("malformed checkpoint JSON: ") + ex.what());
  }
  return checkpoint_from_json(j);
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint '" + path + "'");
  out << serialize_checkpoint(ck);
  if (!out) throw InputError("write failed for '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace hopewave

#endif
