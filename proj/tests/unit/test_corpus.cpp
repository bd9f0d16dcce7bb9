#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "dualview/corpus_io.hpp"
#include "dualview/errors.hpp"
#include "dualview/world.hpp"

using namespace dualview;
using namespace dualview::corpus;
namespace fs = std::filesystem;

namespace {

WorldConfig small_config() {
  WorldConfig cfg;
  cfg.seed = 11;
  cfg.n_videos = 2;
  cfg.duration_s = 40.0;
  cfg.fps = 8.0;
  cfg.feature_dim = 12;
  cfg.n_event_classes = 6;
  cfg.keyword_vocab = {"clamp", "stapler", "forceps", "trocar", "scope", "catheter"};
  return cfg;
}

fs::path temp_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("dualview_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int event_class_at(const VideoRecord& video, double t) {
  for (const auto& ev : video.event_timeline) {
    if (t >= ev.start_s && t < ev.end_s) return ev.class_id;
  }
  return video.event_timeline.back().class_id;
}

}  // namespace

TEST_CASE("world generation is deterministic down to serialized bytes") {
  const auto cfg = small_config();
  const auto w1 = generate_world(cfg);
  const auto w2 = generate_world(cfg);
  CHECK(w1.videos == w2.videos);
  CHECK(w1.transcripts == w2.transcripts);
  CHECK(w1.labels == w2.labels);
  CHECK(w1.captions == w2.captions);

  const auto d1 = temp_dir("det1");
  const auto d2 = temp_dir("det2");
  write_corpus(d1, "train", w1);
  write_corpus(d2, "train", w2);
  for (const auto& entry : fs::directory_iterator(d1)) {
    std::ifstream a(entry.path(), std::ios::binary), b(d2 / entry.path().filename(), std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
}

TEST_CASE("zero corruption keeps every W keyword intact") {
  auto cfg = small_config();
  cfg.w_keyword_corruption = 0.0;
  cfg.narration_offset_s = 0.0;
  const auto world = generate_world(cfg);
  std::map<std::string, const VideoRecord*> videos;
  for (const auto& v : world.videos) videos[v.video_id] = &v;
  int checked = 0;
  for (const auto& s : world.transcripts) {
    if (s.source != 'W') continue;
    const double mid = 0.5 * (s.start_s + s.end_s);
    const int cls = event_class_at(*videos.at(s.video_id), mid);
    const auto kw = cfg.keyword_vocab[static_cast<std::size_t>(cls)];
    CHECK(s.text.find(kw) != std::string::npos);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("corruption rate matches the configured probability") {
  // counting oracle over ~10k emitted W sentences
  auto cfg = small_config();
  cfg.n_videos = 1000;
  cfg.w_keyword_corruption = 0.3;
  cfg.narration_offset_s = 0.0;
  const auto world = generate_world(cfg);
  std::map<std::string, const VideoRecord*> videos;
  for (const auto& v : world.videos) videos[v.video_id] = &v;
  long total = 0, corrupted = 0;
  for (const auto& s : world.transcripts) {
    if (s.source != 'W') continue;
    const double mid = 0.5 * (s.start_s + s.end_s);
    const int cls = event_class_at(*videos.at(s.video_id), mid);
    const auto kw = cfg.keyword_vocab[static_cast<std::size_t>(cls)];
    ++total;
    if (s.text.find(kw) == std::string::npos) ++corrupted;
  }
  const double rate = static_cast<double>(corrupted) / static_cast<double>(total);
  CHECK(total > 9000);
  CHECK(rate > 0.27);
  CHECK(rate < 0.33);
}

TEST_CASE("A sentences are shorter than W sentences on average") {
  const auto world = generate_world(small_config());
  double a_sum = 0, w_sum = 0;
  long a_n = 0, w_n = 0;
  for (const auto& s : world.transcripts) {
    if (s.source == 'A') {
      a_sum += s.end_s - s.start_s;
      ++a_n;
    } else {
      w_sum += s.end_s - s.start_s;
      ++w_n;
    }
  }
  REQUIRE(a_n > 0);
  REQUIRE(w_n > 0);
  CHECK(a_sum / a_n < w_sum / w_n);
}

TEST_CASE("A sentences carry one confidence per word, W none") {
  const auto world = generate_world(small_config());
  for (const auto& s : world.transcripts) {
    if (s.source == 'A') {
      long words = 0;
      std::istringstream is(s.text);
      std::string w;
      while (is >> w) ++words;
      CHECK(static_cast<long>(s.word_confidences.size()) == words);
      for (double c : s.word_confidences) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
      }
    } else {
      CHECK(s.word_confidences.empty());
    }
  }
}

TEST_CASE("noise-free event means stay near the class signature") {
  auto cfg = small_config();
  cfg.a_fragmentation = 0.0;
  cfg.w_keyword_corruption = 0.0;
  cfg.narration_offset_s = 0.0;
  const auto world = generate_world(cfg);
  const double bound = std::sqrt(static_cast<double>(cfg.feature_dim)) * frame_noise_std();
  for (const auto& video : world.videos) {
    for (const auto& ev : video.event_timeline) {
      const int lo = static_cast<int>(ev.start_s * cfg.fps);
      const int hi = std::min(video.n_frames(), static_cast<int>(ev.end_s * cfg.fps));
      std::vector<double> mean(static_cast<std::size_t>(cfg.feature_dim), 0.0);
      for (int f = lo; f < hi; ++f) {
        for (int j = 0; j < cfg.feature_dim; ++j) {
          mean[static_cast<std::size_t>(j)] +=
              video.frame_features[static_cast<std::size_t>(f) * cfg.feature_dim + j];
        }
      }
      for (auto& x : mean) x /= static_cast<double>(hi - lo);
      const auto sig = class_signature(cfg, ev.class_id);
      double dist = 0;
      for (int j = 0; j < cfg.feature_dim; ++j) {
        const double d = mean[static_cast<std::size_t>(j)] - sig[static_cast<std::size_t>(j)];
        dist += d * d;
      }
      CHECK(std::sqrt(dist) <= bound);
    }
  }
}

TEST_CASE("invalid world configs list their offenders") {
  auto cfg = small_config();
  cfg.a_fragmentation = 1.5;
  cfg.n_event_classes = 1;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("a_fragmentation") != std::string::npos);
    CHECK(what.find("n_event_classes") != std::string::npos);
  }
}

TEST_CASE("corpus round-trips field for field") {
  const auto world = generate_world(small_config());
  const auto dir = temp_dir("roundtrip");
  write_corpus(dir, "train", world);
  const auto back = read_corpus(dir, "train");
  CHECK(back.videos == world.videos);
  CHECK(back.transcripts == world.transcripts);
  CHECK(back.labels == world.labels);
  CHECK(back.captions == world.captions);
}

TEST_CASE("empty corpus round-trips") {
  const auto dir = temp_dir("empty");
  write_corpus(dir, "val", World{});
  const auto back = read_corpus(dir, "val");
  CHECK(back.videos.empty());
  CHECK(back.transcripts.empty());
  CHECK(back.labels.empty());
}

TEST_CASE("truncated feature binary raises an integrity error naming byte counts") {
  const auto world = generate_world(small_config());
  const auto dir = temp_dir("trunc");
  write_corpus(dir, "train", world);
  const auto bin = dir / (world.videos[0].video_id + ".f32");
  fs::resize_file(bin, fs::file_size(bin) - 10);
  try {
    read_corpus(dir, "train");
    FAIL("expected IntegrityError");
  } catch (const IntegrityError& e) {
    const std::string what = e.what();
    CHECK(what.find("expected") != std::string::npos);
    CHECK(what.find("got") != std::string::npos);
  }
}

TEST_CASE("malformed transcript line reports its line number") {
  const auto dir = temp_dir("badline");
  std::ofstream out(dir / "x.transcripts.jsonl");
  out << R"({"video_id":"v0","source":"A","start_s":0,"end_s":1,"text":"a","word_confidences":[0.5]})" << "\n";
  out << "{not json}\n";
  out.close();
  try {
    read_transcripts(dir / "x.transcripts.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("event timelines are sorted, disjoint and cover the video") {
  const auto world = generate_world(small_config());
  for (const auto& v : world.videos) {
    REQUIRE(!v.event_timeline.empty());
    CHECK(v.event_timeline.front().start_s == 0.0);
    CHECK(v.event_timeline.back().end_s == doctest::Approx(v.duration_s));
    for (std::size_t i = 0; i < v.event_timeline.size(); ++i) {
      CHECK(v.event_timeline[i].start_s < v.event_timeline[i].end_s);
      if (i) CHECK(v.event_timeline[i].start_s == doctest::Approx(v.event_timeline[i - 1].end_s));
    }
    CHECK(v.n_frames() == static_cast<int>(std::llround(v.fps * v.duration_s)));
  }
}
