#include "dualview/corpus_io.hpp"

#include <fstream>
#include <set>

#include "dualview/errors.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dualview::corpus {

namespace {

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IntegrityError("cannot open for writing: " + file.string());
  return out;
}

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + file.string());
  return in;
}

json parse_line(const std::string& line, const fs::path& file, long line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

template <class Fn>
void for_each_line(const fs::path& file, Fn fn) {
  auto in = open_in(file);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    fn(parse_line(line, file, line_no), line_no);
  }
}

}  // namespace

std::atomic<long long>& feature_read_count() {
  static std::atomic<long long> count{0};
  return count;
}

void write_transcripts(const fs::path& file, const std::vector<TranscriptSentence>& sentences) {
  auto out = open_out(file);
  for (const auto& s : sentences) {
    json j{{"video_id", s.video_id},
           {"source", std::string(1, s.source)},
           {"start_s", s.start_s},
           {"end_s", s.end_s},
           {"text", s.text}};
    if (s.source == 'A') j["word_confidences"] = s.word_confidences;
    out << j.dump() << '\n';
  }
}

std::vector<TranscriptSentence> read_transcripts(const fs::path& file) {
  std::vector<TranscriptSentence> sentences;
  for_each_line(file, [&](const json& j, long line_no) {
    TranscriptSentence s;
    try {
      s.video_id = j.at("video_id").get<std::string>();
      const auto source = j.at("source").get<std::string>();
      if (source != "A" && source != "W") {
        throw ParseError(file.string() + ":" + std::to_string(line_no) +
                         ": unknown source '" + source + "'");
      }
      s.source = source[0];
      s.start_s = j.at("start_s").get<double>();
      s.end_s = j.at("end_s").get<double>();
      s.text = j.at("text").get<std::string>();
      if (j.contains("word_confidences"))
        s.word_confidences = j.at("word_confidences").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    sentences.push_back(std::move(s));
  });
  return sentences;
}

void write_labels(const fs::path& file, const std::vector<FrameLabel>& labels) {
  auto out = open_out(file);
  for (const auto& l : labels) {
    out << json{{"video_id", l.video_id}, {"frame_index", l.frame_index}, {"class_id", l.class_id}}
               .dump()
        << '\n';
  }
}

std::vector<FrameLabel> read_labels(const fs::path& file) {
  std::vector<FrameLabel> labels;
  for_each_line(file, [&](const json& j, long line_no) {
    try {
      labels.push_back({j.at("video_id").get<std::string>(), j.at("frame_index").get<int>(),
                        j.at("class_id").get<int>()});
    } catch (const json::exception& e) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return labels;
}

void write_captions(const fs::path& file, const std::vector<CaptionRow>& rows) {
  auto out = open_out(file);
  for (const auto& r : rows) {
    json clip{{"video_id", r.video_id}, {"start_s", r.start_s}, {"end_s", r.end_s}};
    out << json{{"clip_ref", clip}, {"reference", r.text}}.dump() << '\n';
  }
}

std::vector<CaptionRow> read_captions(const fs::path& file) {
  std::vector<CaptionRow> rows;
  for_each_line(file, [&](const json& j, long line_no) {
    try {
      const auto& clip = j.at("clip_ref");
      rows.push_back({clip.at("video_id").get<std::string>(), clip.at("start_s").get<double>(),
                      clip.at("end_s").get<double>(), j.at("reference").get<std::string>()});
    } catch (const json::exception& e) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return rows;
}

void write_features(const fs::path& dir, const VideoRecord& video) {
  {
    auto out = open_out(dir / (video.video_id + ".f32"));
    out.write(reinterpret_cast<const char*>(video.frame_features.data()),
              static_cast<std::streamsize>(video.frame_features.size() * sizeof(float)));
  }
  json events = json::array();
  for (const auto& ev : video.event_timeline) {
    events.push_back(
        {{"class_id", ev.class_id}, {"start_s", ev.start_s}, {"end_s", ev.end_s}});
  }
  json meta{{"video_id", video.video_id},
            {"n_frames", video.n_frames()},
            {"feature_dim", video.feature_dim},
            {"fps", video.fps},
            {"duration_s", video.duration_s},
            {"events", events}};
  auto out = open_out(dir / (video.video_id + ".meta.json"));
  out << meta.dump(2) << '\n';
}

VideoRecord read_features(const fs::path& dir, const std::string& video_id) {
  feature_read_count()++;
  const fs::path meta_file = dir / (video_id + ".meta.json");
  json meta;
  try {
    auto in = open_in(meta_file);
    in >> meta;
  } catch (const json::exception& e) {
    throw ParseError(meta_file.string() + ": " + e.what());
  }
  VideoRecord video;
  try {
    video.video_id = meta.at("video_id").get<std::string>();
    video.feature_dim = meta.at("feature_dim").get<int>();
    video.fps = meta.at("fps").get<double>();
    video.duration_s = meta.at("duration_s").get<double>();
    const int n_frames = meta.at("n_frames").get<int>();
    for (const auto& ev : meta.at("events")) {
      video.event_timeline.push_back({ev.at("class_id").get<int>(),
                                      ev.at("start_s").get<double>(),
                                      ev.at("end_s").get<double>()});
    }
    const fs::path bin_file = dir / (video_id + ".f32");
    const auto expected =
        static_cast<std::uintmax_t>(n_frames) * static_cast<std::uintmax_t>(video.feature_dim) *
        sizeof(float);
    std::error_code ec;
    const auto actual = fs::file_size(bin_file, ec);
    if (ec) throw ParseError("cannot stat: " + bin_file.string());
    if (actual != expected) {
      throw IntegrityError(bin_file.string() + ": expected " + std::to_string(expected) +
                           " bytes, got " + std::to_string(actual));
    }
    video.frame_features.resize(static_cast<std::size_t>(n_frames) * video.feature_dim);
    auto in = open_in(bin_file);
    in.read(reinterpret_cast<char*>(video.frame_features.data()),
            static_cast<std::streamsize>(expected));
    if (static_cast<std::uintmax_t>(in.gcount()) != expected) {
      throw IntegrityError(bin_file.string() + ": short read");
    }
  } catch (const json::exception& e) {
    throw ParseError(meta_file.string() + ": " + e.what());
  }
  return video;
}

void write_corpus(const fs::path& dir, const std::string& split, const World& world) {
  fs::create_directories(dir);
  write_transcripts(dir / (split + ".transcripts.jsonl"), world.transcripts);
  write_labels(dir / (split + ".labels.jsonl"), world.labels);
  write_captions(dir / (split + ".captions.jsonl"), world.captions);
  for (const auto& video : world.videos) write_features(dir, video);
}

World read_corpus(const fs::path& dir, const std::string& split) {
  World world;
  world.transcripts = read_transcripts(dir / (split + ".transcripts.jsonl"));
  world.labels = read_labels(dir / (split + ".labels.jsonl"));
  world.captions = read_captions(dir / (split + ".captions.jsonl"));
  std::set<std::string> ids;
  for (const auto& l : world.labels) ids.insert(l.video_id);
  for (const auto& id : ids) world.videos.push_back(read_features(dir, id));
  return world;
}

}  // namespace dualview::corpus
