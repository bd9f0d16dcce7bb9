#include "dualview/checkpoint.hpp"

#include <fstream>

#include "dualview/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dualview::enc {

void save_tensors(const fs::path& bin_file, const fs::path& manifest_file,
                  const std::vector<std::pair<std::string, grad::Var>>& tensors,
                  const json& extra) {
  json manifest;
  manifest["extra"] = extra;
  json list = json::array();
  std::ofstream bin(bin_file, std::ios::binary);
  if (!bin) throw IntegrityError("cannot open for writing: " + bin_file.string());
  for (const auto& [name, var] : tensors) {
    list.push_back({{"name", name}, {"shape", var->shape}});
    std::vector<float> row(var->value.begin(), var->value.end());
    bin.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  manifest["tensors"] = list;
  std::ofstream out(manifest_file, std::ios::binary);
  if (!out) throw IntegrityError("cannot open for writing: " + manifest_file.string());
  out << manifest.dump(2) << '\n';
}

std::pair<std::map<std::string, grad::Var>, json> load_tensors(const fs::path& bin_file,
                                                               const fs::path& manifest_file) {
  json manifest;
  {
    std::ifstream in(manifest_file, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + manifest_file.string());
    try {
      in >> manifest;
    } catch (const json::exception& e) {
      throw ParseError(manifest_file.string() + ": " + e.what());
    }
  }
  std::map<std::string, grad::Var> tensors;
  std::ifstream bin(bin_file, std::ios::binary);
  if (!bin) throw ParseError("cannot open: " + bin_file.string());

  std::uintmax_t expected_bytes = 0;
  try {
    for (const auto& entry : manifest.at("tensors")) {
      const auto shape = entry.at("shape").get<grad::Shape>();
      expected_bytes += grad::shape_numel(shape) * sizeof(float);
    }
  } catch (const json::exception& e) {
    throw ParseError(manifest_file.string() + ": " + e.what());
  }
  std::error_code ec;
  const auto actual = fs::file_size(bin_file, ec);
  if (ec || actual != expected_bytes) {
    throw IntegrityError(bin_file.string() + ": expected " + std::to_string(expected_bytes) +
                         " bytes, got " + std::to_string(actual));
  }

  for (const auto& entry : manifest.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<grad::Shape>();
    const auto count = grad::shape_numel(shape);
    std::vector<float> raw(count);
    bin.read(reinterpret_cast<char*>(raw.data()),
             static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(bin.gcount()) != count * sizeof(float)) {
      throw IntegrityError(bin_file.string() + ": short read for tensor " + name);
    }
    std::vector<double> values(raw.begin(), raw.end());
    tensors[name] = grad::make_tensor(shape, std::move(values), false, name);
  }
  return {std::move(tensors), manifest.at("extra")};
}

json hyper_to_json(const HyperConfig& h) {
  return json{{"token_len", h.token_len},
              {"frames_per_clip", h.frames_per_clip},
              {"latent_dim", h.latent_dim},
              {"temperature", h.temperature},
              {"loss_weight", h.loss_weight},
              {"w_per_pair", h.w_per_pair},
              {"batch_size", h.batch_size},
              {"embed_dim", h.embed_dim},
              {"hidden_dim", h.hidden_dim},
              {"masked_mean", h.masked_mean}};
}

HyperConfig hyper_from_json(const json& j) {
  HyperConfig h;
  h.token_len = j.value("token_len", h.token_len);
  h.frames_per_clip = j.value("frames_per_clip", h.frames_per_clip);
  h.latent_dim = j.value("latent_dim", h.latent_dim);
  h.temperature = j.value("temperature", h.temperature);
  h.loss_weight = j.value("loss_weight", h.loss_weight);
  h.w_per_pair = j.value("w_per_pair", h.w_per_pair);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.embed_dim = j.value("embed_dim", h.embed_dim);
  h.hidden_dim = j.value("hidden_dim", h.hidden_dim);
  h.masked_mean = j.value("masked_mean", h.masked_mean);
  h.validate();
  return h;
}

void save_checkpoint(const fs::path& dir, const EncoderParams& params,
                     const SubwordVocab& vocab) {
  fs::create_directories(dir);
  json extra{{"hyper", hyper_to_json(params.hyper)},
             {"feature_dim", params.feature_dim},
             {"vocab_size", params.vocab_size}};
  save_tensors(dir / "weights.f32", dir / "weights.json", params.named(), extra);
  save_vocab(dir / "vocab.json", vocab);
}

std::pair<EncoderParams, SubwordVocab> load_checkpoint(const fs::path& dir, bool trainable) {
  auto [tensors, extra] = load_tensors(dir / "weights.f32", dir / "weights.json");
  EncoderParams p;
  try {
    p.hyper = hyper_from_json(extra.at("hyper"));
    p.feature_dim = extra.at("feature_dim").get<int>();
    p.vocab_size = extra.at("vocab_size").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(dir.string() + "/weights.json: " + e.what());
  }
  auto take = [&](const char* name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw IntegrityError(dir.string() + ": checkpoint is missing tensor " +
                           std::string(name));
    }
    return it->second;
  };
  p.tok_embed = take("tok_embed");
  p.text_w1 = take("text_w1");
  p.text_b1 = take("text_b1");
  p.text_w2 = take("text_w2");
  p.text_b2 = take("text_b2");
  p.text_proj_w = take("text_proj_w");
  p.text_proj_b = take("text_proj_b");
  p.frame_w1 = take("frame_w1");
  p.frame_b1 = take("frame_b1");
  p.frame_w2 = take("frame_w2");
  p.frame_b2 = take("frame_b2");
  p.frame_proj_w = take("frame_proj_w");
  p.frame_proj_b = take("frame_proj_b");
  p.set_requires_grad(trainable);
  auto vocab = load_vocab(dir / "vocab.json");
  if (vocab.size() != p.vocab_size) {
    throw IntegrityError(dir.string() + ": vocab size " + std::to_string(vocab.size()) +
                         " does not match checkpoint " + std::to_string(p.vocab_size));
  }
  return {std::move(p), std::move(vocab)};
}

}  // namespace dualview::enc
