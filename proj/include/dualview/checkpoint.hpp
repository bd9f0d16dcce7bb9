#pragma once

// Parameter serialization: a raw little-endian float32 blob plus a JSON
// manifest listing tensor names and shapes in storage order. Encoder
// checkpoints live in a directory together with their vocab and hyper
// settings so evaluation commands can rebuild the frozen model.

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dualview/autodiff.hpp"
#include "dualview/encoder.hpp"
#include "json.hpp"

namespace dualview::enc {

void save_tensors(const std::filesystem::path& bin_file,
                  const std::filesystem::path& manifest_file,
                  const std::vector<std::pair<std::string, grad::Var>>& tensors,
                  const nlohmann::json& extra);

// returns name -> tensor plus the manifest's extra payload
std::pair<std::map<std::string, grad::Var>, nlohmann::json> load_tensors(
    const std::filesystem::path& bin_file, const std::filesystem::path& manifest_file);

void save_checkpoint(const std::filesystem::path& dir, const EncoderParams& params,
                     const SubwordVocab& vocab);
std::pair<EncoderParams, SubwordVocab> load_checkpoint(const std::filesystem::path& dir,
                                                       bool trainable = false);

nlohmann::json hyper_to_json(const HyperConfig& hyper);
HyperConfig hyper_from_json(const nlohmann::json& j);

}  // namespace dualview::enc
