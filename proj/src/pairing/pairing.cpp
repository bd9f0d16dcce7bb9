#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "dualview/corpus_io.hpp"
#include "dualview/errors.hpp"
#include "dualview/pairing.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dualview::pairing {

namespace {

double mean_confidence(const corpus::TranscriptSentence& s) {
  if (s.word_confidences.empty()) return 0.0;
  const double sum = std::accumulate(s.word_confidences.begin(), s.word_confidences.end(), 0.0);
  return sum / static_cast<double>(s.word_confidences.size());
}

bool contains_keyword(const std::string& text, const std::set<std::string>& keywords) {
  for (const auto& w : split_whitespace(text)) {
    if (keywords.count(strip_punctuation(w))) return true;
  }
  return false;
}

bool has_content_word(const std::string& text) {
  for (const auto& w : split_whitespace(text)) {
    const auto stripped = strip_punctuation(w);
    if (!stripped.empty() && !is_stop_word(stripped)) return true;
  }
  return false;
}

}  // namespace

void ClipTextPair::validate(double video_duration_s, double max_clip_s) const {
  const double len = clip_end_s - clip_start_s;
  if (!(len > 0.0 && len <= max_clip_s + 1e-9)) {
    throw ContractError("pair: clip length " + std::to_string(len) + " outside (0, " +
                        std::to_string(max_clip_s) + "]");
  }
  if (clip_start_s < -1e-9 || clip_end_s > video_duration_s + 1e-9) {
    throw ContractError("pair: clip outside video bounds");
  }
  if (w_sentences.empty()) throw ContractError("pair: no W sentences");
  double lo = w_sentences.front().start_s, hi = w_sentences.front().end_s;
  for (const auto& w : w_sentences) {
    lo = std::min(lo, w.start_s);
    hi = std::max(hi, w.end_s);
    const double inter = std::min(w.end_s, a_sentence.end_s) - std::max(w.start_s, a_sentence.start_s);
    if (!(inter > 0.0)) throw ContractError("pair: W sentence does not overlap A sentence");
  }
  if (center_s < lo - 1e-9 || center_s > hi + 1e-9) {
    throw ContractError("pair: center outside merged W boundary");
  }
}

std::vector<corpus::TranscriptSentence> filter_a(
    const std::vector<corpus::TranscriptSentence>& sentences, const FilterConfig& cfg) {
  std::vector<corpus::TranscriptSentence> kept;
  for (const auto& s : sentences) {
    if (s.source != 'A') throw ContractError("filter_a: got a W-source sentence");
    const auto n_words = split_whitespace(s.text).size();
    if (static_cast<int>(n_words) < cfg.min_words) continue;
    if (mean_confidence(s) < cfg.confidence_threshold) continue;
    if (!contains_keyword(s.text, cfg.keyword_list)) continue;
    kept.push_back(s);
  }
  return kept;
}

std::vector<corpus::TranscriptSentence> filter_w(
    const std::vector<corpus::TranscriptSentence>& sentences, const FilterConfig& cfg) {
  std::vector<corpus::TranscriptSentence> kept;
  for (const auto& s : sentences) {
    if (s.source != 'W') throw ContractError("filter_w: got an A-source sentence");
    const auto n_words = split_whitespace(s.text).size();
    if (static_cast<int>(n_words) < cfg.min_words) continue;
    if (!has_content_word(s.text)) continue;
    kept.push_back(s);
  }
  return kept;
}

std::vector<corpus::TranscriptSentence> find_overlaps(
    const corpus::TranscriptSentence& a,
    const std::vector<corpus::TranscriptSentence>& w_pool) {
  std::vector<corpus::TranscriptSentence> out;
  for (const auto& w : w_pool) {
    if (w.video_id != a.video_id) continue;
    const double inter = std::min(w.end_s, a.end_s) - std::max(w.start_s, a.start_s);
    if (inter > 0.0) out.push_back(w);
  }
  return out;
}

ClipTextPair sample_clip(const corpus::TranscriptSentence& a,
                         const std::vector<corpus::TranscriptSentence>& w_overlaps, Rng& rng,
                         const ClipLengthConfig& len, double video_duration_s) {
  if (w_overlaps.empty()) {
    throw ContractError("sample_clip: empty W overlap set for A sentence at " +
                        std::to_string(a.start_s));
  }
  double lo = w_overlaps.front().start_s, hi = w_overlaps.front().end_s;
  for (const auto& w : w_overlaps) {
    lo = std::min(lo, w.start_s);
    hi = std::max(hi, w.end_s);
  }
  ClipTextPair pair;
  pair.video_id = a.video_id;
  pair.center_s = rng.uniform(lo, hi);
  // length drawn from (min, max]; clip is clamped to the video bounds
  const double length =
      len.fixed ? len.fixed_s : len.max_s - rng.uniform() * (len.max_s - len.min_s);
  pair.clip_start_s = std::max(0.0, pair.center_s - length / 2.0);
  pair.clip_end_s = std::min(video_duration_s, pair.center_s + length / 2.0);
  pair.a_sentence = a;
  pair.w_sentences = w_overlaps;
  return pair;
}

std::vector<ClipTextPair> build_pairs(const corpus::World& world, const FilterConfig& cfg,
                                      std::uint64_t seed, const ClipLengthConfig& len,
                                      int pairs_per_a, PairStats* stats) {
  cfg.validate();
  PairStats local;
  std::vector<ClipTextPair> pairs;

  // per-video sentence pools, videos processed in id order
  std::map<std::string, std::vector<corpus::TranscriptSentence>> a_by_video, w_by_video;
  for (const auto& s : world.transcripts) {
    (s.source == 'A' ? a_by_video : w_by_video)[s.video_id].push_back(s);
    (s.source == 'A' ? local.a_in : local.w_in)++;
  }
  std::map<std::string, const corpus::VideoRecord*> videos;
  for (const auto& v : world.videos) videos[v.video_id] = &v;

  std::uint64_t video_index = 0;
  for (const auto& v : world.videos) {
    Rng rng(Rng::mix(seed, video_index++));
    auto a_segments = segment_sentences(a_by_video[v.video_id], cfg);
    auto w_segments = segment_sentences(w_by_video[v.video_id], cfg);
    local.a_segments += static_cast<long>(a_segments.size());
    local.w_segments += static_cast<long>(w_segments.size());
    auto a_kept = filter_a(a_segments, cfg);
    auto w_kept = filter_w(w_segments, cfg);
    local.a_kept += static_cast<long>(a_kept.size());
    local.w_kept += static_cast<long>(w_kept.size());

    for (const auto& a : a_kept) {
      auto overlaps = find_overlaps(a, w_kept);
      if (overlaps.empty()) {
        local.a_no_overlap++;
        continue;
      }
      for (int k = 0; k < pairs_per_a; ++k) {
        pairs.push_back(sample_clip(a, overlaps, rng, len, v.duration_s));
        local.pairs++;
      }
    }
  }
  if (stats) *stats = local;
  return pairs;
}

namespace {

json sentence_to_json(const corpus::TranscriptSentence& s) {
  json j{{"video_id", s.video_id},
         {"source", std::string(1, s.source)},
         {"start_s", s.start_s},
         {"end_s", s.end_s},
         {"text", s.text}};
  if (s.source == 'A') j["word_confidences"] = s.word_confidences;
  return j;
}

corpus::TranscriptSentence sentence_from_json(const json& j) {
  corpus::TranscriptSentence s;
  s.video_id = j.at("video_id").get<std::string>();
  s.source = j.at("source").get<std::string>().at(0);
  s.start_s = j.at("start_s").get<double>();
  s.end_s = j.at("end_s").get<double>();
  s.text = j.at("text").get<std::string>();
  if (j.contains("word_confidences"))
    s.word_confidences = j.at("word_confidences").get<std::vector<double>>();
  return s;
}

}  // namespace

void write_pairs(const fs::path& file, const std::vector<ClipTextPair>& pairs) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IntegrityError("cannot open for writing: " + file.string());
  for (const auto& p : pairs) {
    json ws = json::array();
    for (const auto& w : p.w_sentences) ws.push_back(sentence_to_json(w));
    out << json{{"video_id", p.video_id},
                {"clip_start_s", p.clip_start_s},
                {"clip_end_s", p.clip_end_s},
                {"center_s", p.center_s},
                {"a_sentence", sentence_to_json(p.a_sentence)},
                {"w_sentences", ws}}
               .dump()
        << '\n';
  }
}

std::vector<ClipTextPair> read_pairs(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + file.string());
  std::vector<ClipTextPair> pairs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ClipTextPair p;
      p.video_id = j.at("video_id").get<std::string>();
      p.clip_start_s = j.at("clip_start_s").get<double>();
      p.clip_end_s = j.at("clip_end_s").get<double>();
      p.center_s = j.at("center_s").get<double>();
      p.a_sentence = sentence_from_json(j.at("a_sentence"));
      for (const auto& w : j.at("w_sentences")) p.w_sentences.push_back(sentence_from_json(w));
      pairs.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace dualview::pairing
