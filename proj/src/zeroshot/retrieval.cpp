#include "dualview/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dualview/errors.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dualview::zeroshot {

namespace {

std::vector<double> unit(const std::vector<double>& v, const char* what) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm <= 1e-12) throw DegenerateVectorError(std::string(what) + ": zero-norm latent");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
  return out;
}

}  // namespace

RetrievalIndex RetrievalIndex::build(std::vector<std::string> ids,
                                     const std::vector<std::vector<double>>& raw_latents) {
  if (ids.size() != raw_latents.size()) {
    throw ContractError("retrieval index: ids and latents differ in length");
  }
  RetrievalIndex index;
  index.ids = std::move(ids);
  {
    std::vector<std::string> sorted = index.ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ContractError("retrieval index: duplicate gallery id");
    }
  }
  if (!raw_latents.empty()) index.dim = static_cast<int>(raw_latents.front().size());
  index.latents.reserve(raw_latents.size() * static_cast<std::size_t>(index.dim));
  for (const auto& row : raw_latents) {
    if (static_cast<int>(row.size()) != index.dim) {
      throw ShapeError("retrieval index: inconsistent latent dims");
    }
    const auto u = unit(row, "retrieval index");
    index.latents.insert(index.latents.end(), u.begin(), u.end());
  }
  return index;
}

RankedResult rank_gallery(const std::vector<double>& query_latent, const RetrievalIndex& index,
                          const std::string& query_id) {
  if (index.size() == 0) throw ContractError("rank_gallery: empty gallery");
  if (static_cast<int>(query_latent.size()) != index.dim) {
    throw ShapeError("rank_gallery: query dim " + std::to_string(query_latent.size()) +
                     " vs gallery dim " + std::to_string(index.dim));
  }
  const auto q = unit(query_latent, "rank_gallery");
  RankedResult result;
  result.query_id = query_id;
  result.ranking.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const double* row = index.latents.data() + i * static_cast<std::size_t>(index.dim);
    double dot = 0.0;
    for (int j = 0; j < index.dim; ++j) dot += q[static_cast<std::size_t>(j)] * row[j];
    result.ranking.emplace_back(index.ids[i], dot);
  }
  std::sort(result.ranking.begin(), result.ranking.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return result;
}

double interval_iou(double a_start, double a_end, double b_start, double b_end) {
  const double inter = std::min(a_end, b_end) - std::max(a_start, b_start);
  if (inter <= 0.0) return 0.0;
  const double uni = std::max(a_end, b_end) - std::min(a_start, b_start);
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<double> encode_clip_frozen(const corpus::VideoRecord& video, double start_s,
                                       double end_s, const enc::EncoderParams& params) {
  grad::Tape tape;
  const int t = params.hyper.frames_per_clip;
  const auto idx = enc::sample_frames(start_s, end_s, video.fps, video.n_frames(), t);
  std::vector<double> rows;
  rows.reserve(idx.size() * static_cast<std::size_t>(video.feature_dim));
  for (int frame : idx) {
    const float* src =
        video.frame_features.data() + static_cast<std::size_t>(frame) * video.feature_dim;
    for (int j = 0; j < video.feature_dim; ++j) rows.push_back(static_cast<double>(src[j]));
  }
  auto latent = enc::encode_clip(tape, grad::make_tensor({t, video.feature_dim}, std::move(rows)),
                                 t, params);
  tape.clear();
  return latent->value;
}

std::vector<std::vector<double>> encode_texts_frozen(const std::vector<std::string>& texts,
                                                     const enc::EncoderParams& params,
                                                     const enc::SubwordVocab& vocab) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  const int n = params.hyper.token_len;
  const int d = params.hyper.latent_dim;
  // encoded in slabs to keep one matmul per trunk layer
  const std::size_t slab = 64;
  grad::Tape tape;
  for (std::size_t at = 0; at < texts.size(); at += slab) {
    const auto count = std::min(slab, texts.size() - at);
    std::vector<int> ids;
    ids.reserve(count * static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < count; ++i) {
      const auto row = enc::tokenize(texts[at + i], vocab, n);
      ids.insert(ids.end(), row.begin(), row.end());
    }
    auto latents = enc::encode_text(tape, ids, static_cast<int>(count), params);
    tape.clear();
    for (std::size_t i = 0; i < count; ++i) {
      out.emplace_back(latents->value.begin() + static_cast<long>(i) * d,
                       latents->value.begin() + static_cast<long>(i + 1) * d);
    }
  }
  return out;
}

std::vector<GroundedSegment> ground_query(const corpus::VideoRecord& video,
                                          const std::vector<double>& query_latent,
                                          double window_s, double stride_s,
                                          const enc::EncoderParams& params) {
  if (window_s > video.duration_s) {
    throw ContractError("ground_query: window " + std::to_string(window_s) +
                        "s exceeds video duration " + std::to_string(video.duration_s) + "s");
  }
  if (!(stride_s > 0.0)) throw ContractError("ground_query: stride must be positive");
  const auto q = unit(query_latent, "ground_query");
  std::vector<GroundedSegment> segments;
  for (double start = 0.0; start + window_s <= video.duration_s + 1e-9; start += stride_s) {
    const double end = std::min(start + window_s, video.duration_s);
    auto latent = encode_clip_frozen(video, start, end, params);
    const auto u = unit(latent, "ground_query");
    double dot = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) dot += u[j] * q[j];
    segments.push_back({start, end, dot});
  }
  std::stable_sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.start_s < b.start_s;
  });
  return segments;
}

std::vector<double> classify(const std::vector<double>& latent,
                             const std::vector<std::vector<double>>& prompt_latents) {
  const auto q = unit(latent, "classify");
  std::vector<double> scores;
  scores.reserve(prompt_latents.size());
  for (const auto& p : prompt_latents) {
    const auto u = unit(p, "classify");
    double dot = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) dot += u[j] * q[j];
    scores.push_back(dot);
  }
  return scores;
}

std::vector<double> activation_map(const corpus::VideoRecord& video,
                                   const std::vector<double>& query_latent,
                                   const enc::EncoderParams& params) {
  const auto q = unit(query_latent, "activation_map");
  // every frame encoded as its own single-frame clip, one trunk pass total
  grad::Tape tape;
  const int n = video.n_frames();
  std::vector<double> rows(video.frame_features.begin(), video.frame_features.end());
  auto latents =
      enc::encode_clip(tape, grad::make_tensor({n, video.feature_dim}, std::move(rows)), 1, params);
  tape.clear();
  const int d = params.hyper.latent_dim;
  std::vector<double> series(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<double> latent(latents->value.begin() + static_cast<long>(i) * d,
                               latents->value.begin() + static_cast<long>(i + 1) * d);
    const auto u = unit(latent, "activation_map");
    double dot = 0.0;
    for (int j = 0; j < d; ++j) dot += u[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(j)];
    series[static_cast<std::size_t>(i)] = dot;
  }
  return series;
}

void write_activation_csv(const fs::path& file, const corpus::VideoRecord& video,
                          const std::vector<double>& series) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IntegrityError("cannot open for writing: " + file.string());
  out << "frame_index,time_s,similarity\n";
  char buf[96];
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.9f\n", i, (static_cast<double>(i) + 0.5) / video.fps,
                  series[i]);
    out << buf;
  }
}

void save_prompts(const fs::path& file, const PromptClassSet& set) {
  json classes = json::array();
  for (const auto& c : set.classes) {
    json entry{{"id", c.id}, {"name", c.name}, {"prompt", c.prompt}};
    if (set.task == "triplet") {
      entry["components"] = {{"instrument", c.components.instrument},
                             {"verb", c.components.verb},
                             {"target", c.components.target}};
    }
    classes.push_back(entry);
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IntegrityError("cannot open for writing: " + file.string());
  out << json{{"task", set.task}, {"classes", classes}}.dump(2) << '\n';
}

PromptClassSet load_prompts(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + file.string());
  json j;
  try {
    in >> j;
    PromptClassSet set;
    set.task = j.at("task").get<std::string>();
    for (const auto& entry : j.at("classes")) {
      PromptClass c;
      c.id = entry.at("id").get<int>();
      c.name = entry.at("name").get<std::string>();
      c.prompt = entry.at("prompt").get<std::string>();
      if (c.prompt.empty()) throw ParseError(file.string() + ": empty prompt for " + c.name);
      if (entry.contains("components")) {
        c.components.instrument = entry["components"].at("instrument").get<int>();
        c.components.verb = entry["components"].at("verb").get<int>();
        c.components.target = entry["components"].at("target").get<int>();
      }
      set.classes.push_back(std::move(c));
    }
    return set;
  } catch (const json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

}  // namespace dualview::zeroshot
