#include "dualview/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "dualview/errors.hpp"
#include "dualview/rng.hpp"

namespace dualview::corpus {

namespace {

constexpr double kWhiteNoiseStd = 0.65;
constexpr double kDriftStd = 0.90;
constexpr int kDriftWaves = 3;

// fine events alternate action bursts with breaks; a break is either an idle
// lull (class-independent signature) or a brief foreign-class flash, so very
// short windows can be uninformative or outright misleading
constexpr double kBurstMinS = 1.5, kBurstMaxS = 2.5;
constexpr double kBreakMinS = 0.6, kBreakMaxS = 1.2;
constexpr double kFlashProb = 0.3;

// coarse events cycle between two signature phases drawn from a shared
// alphabet; one phase alone is ambiguous across the coarse classes that share
// it, so identification needs a window long enough to catch both
constexpr int kPhaseAlphabet = 5;
constexpr double kPhaseBlockMinS = 3.5, kPhaseBlockMaxS = 4.5;
const std::array<std::pair<int, int>, 10> kCoarsePairs = {
    {{0, 1}, {2, 3}, {0, 4}, {1, 2}, {3, 4}, {0, 2}, {1, 3}, {2, 4}, {0, 3}, {1, 4}}};

constexpr double kFineEventMinS = 3.0, kFineEventMaxS = 5.0;
constexpr double kCoarseEventMinS = 9.0, kCoarseEventMaxS = 14.0;
constexpr double kASentMin = 1.0, kASentMax = 2.5;
constexpr double kWSentMin = 3.0, kWSentMax = 6.0;
constexpr double kAEmitProb = 0.85;

// action bank is deliberately smaller than the class count so verbs are
// shared across classes; objects cycle through eight distinct nouns
const std::array<const char*, 4> kActions = {"clip", "grasp", "flush", "probe"};
const std::array<const char*, 8> kObjects = {"duct",    "vessel", "membrane", "lobe",
                                             "pouch",   "channel", "node",     "flap"};

// W view: fluent sentences with terminal punctuation
std::string w_template(int pick, const ClassPhrases& p, const std::string& kw) {
  switch (pick % 6) {
    case 0: return "now we " + p.action + " the " + p.object + " with the " + kw + ".";
    case 1: return "here you can see the " + kw + " as we " + p.action + " the " + p.object + ".";
    case 2: return "next we " + p.action + " the " + p.object + " using the " + kw + ".";
    case 3: return "the " + kw + " helps us " + p.action + " the " + p.object + " here.";
    case 4: return "we continue, and " + p.action + " the " + p.object + " with the " + kw + ".";
    default: return "at this point the " + kw + " is used on the " + p.object + ".";
  }
}

// A view: keyword-accurate fragments, no terminal punctuation, filler words
// mostly disjoint from the W templates
std::string a_template(int pick, const ClassPhrases& p) {
  switch (pick % 5) {
    case 0: return p.keyword + " " + p.action + " " + p.object + " site ready";
    case 1: return "apply " + p.keyword + " to " + p.object + " margin area";
    case 2: return p.keyword + " on " + p.object + " tissue, hold steady";
    case 3: return "take " + p.keyword + " " + p.action + " along " + p.object + " line";
    default: return p.keyword + " set, " + p.action + " " + p.object + " edge";
  }
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream is(text);
  std::string w;
  while (is >> w) words.push_back(w);
  return words;
}

std::string join_words(const std::vector<std::string>& words, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count && i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::string corrupt_word(const std::string& word, Rng& rng) {
  if (word.size() < 3) return word + "x";
  std::string out = word;
  const int mode = rng.uniform_int(0, 2);
  const int pos = rng.uniform_int(1, static_cast<int>(word.size()) - 2);
  switch (mode) {
    case 0:  // drop a letter
      out.erase(static_cast<std::size_t>(pos), 1);
      break;
    case 1:  // swap neighbours
      std::swap(out[static_cast<std::size_t>(pos)], out[static_cast<std::size_t>(pos) + 1]);
      break;
    default:  // replace a letter
      out[static_cast<std::size_t>(pos)] = static_cast<char>('a' + rng.uniform_int(0, 25));
      break;
  }
  if (out == word) out.erase(static_cast<std::size_t>(pos), 1);
  return out;
}

struct Drift {
  // smooth per-video curve: a few random sinusoids with random directions
  std::vector<double> omega, phase;     // per wave
  std::vector<double> dirs;             // [waves x dim]
  int dim = 0;

  void init(Rng& rng, int feature_dim) {
    dim = feature_dim;
    omega.resize(kDriftWaves);
    phase.resize(kDriftWaves);
    dirs.assign(static_cast<std::size_t>(kDriftWaves) * dim, 0.0);
    for (int k = 0; k < kDriftWaves; ++k) {
      const double period = rng.uniform(4.0, 12.0);
      omega[static_cast<std::size_t>(k)] = 2.0 * 3.141592653589793 / period;
      phase[static_cast<std::size_t>(k)] = rng.uniform(0.0, 2.0 * 3.141592653589793);
      double sq = 0.0;
      for (int j = 0; j < dim; ++j) {
        const double g = rng.gauss(0.0, 1.0);
        dirs[static_cast<std::size_t>(k) * dim + j] = g;
        sq += g * g;
      }
      const double inv = 1.0 / std::max(std::sqrt(sq), 1e-9);
      for (int j = 0; j < dim; ++j) dirs[static_cast<std::size_t>(k) * dim + j] *= inv;
    }
  }

  void add(double t, std::vector<double>& out) const {
    const double scale = kDriftStd / std::sqrt(kDriftWaves / 2.0);
    for (int k = 0; k < kDriftWaves; ++k) {
      const double s = scale * std::sin(omega[static_cast<std::size_t>(k)] * t +
                                        phase[static_cast<std::size_t>(k)]);
      for (int j = 0; j < dim; ++j) out[static_cast<std::size_t>(j)] += s * dirs[static_cast<std::size_t>(k) * dim + j];
    }
  }
};

bool is_classword(const std::string& word, const ClassPhrases& p) {
  // strip trailing punctuation before comparing
  std::string w = word;
  while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.back()))) w.pop_back();
  return w == p.keyword || w == p.action || w == p.object;
}

}  // namespace

double frame_noise_std() {
  return std::sqrt(kWhiteNoiseStd * kWhiteNoiseStd + kDriftStd * kDriftStd);
}

void WorldConfig::validate() const {
  std::vector<std::string> bad;
  auto prob = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) bad.push_back(std::string(name) + "=" + std::to_string(v));
  };
  prob(a_fragmentation, "a_fragmentation");
  prob(w_keyword_corruption, "w_keyword_corruption");
  prob(a_confidence_noise, "a_confidence_noise");
  if (narration_offset_s < 0.0)
    bad.push_back("narration_offset_s=" + std::to_string(narration_offset_s));
  if (n_videos < 0) bad.push_back("n_videos=" + std::to_string(n_videos));
  if (fps * duration_s < 16.0) bad.push_back("fps*duration_s < 16");
  if (n_event_classes < 2) bad.push_back("n_event_classes=" + std::to_string(n_event_classes));
  if (feature_dim < 1) bad.push_back("feature_dim=" + std::to_string(feature_dim));
  if (static_cast<int>(keyword_vocab.size()) != n_event_classes) {
    bad.push_back("keyword_vocab size " + std::to_string(keyword_vocab.size()) +
                  " != n_event_classes " + std::to_string(n_event_classes));
  }
  std::set<std::string> uniq(keyword_vocab.begin(), keyword_vocab.end());
  if (uniq.size() != keyword_vocab.size()) bad.push_back("keyword_vocab has duplicates");
  if (!bad.empty()) {
    std::string msg = "invalid world config:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
  }
}

bool class_is_coarse(int class_id) { return class_id % 2 == 1; }

ClassPhrases class_phrases(const WorldConfig& cfg, int class_id) {
  ClassPhrases p;
  p.keyword = cfg.keyword_vocab.at(static_cast<std::size_t>(class_id));
  p.action = kActions[static_cast<std::size_t>(class_id % static_cast<int>(kActions.size()))];
  p.object = kObjects[static_cast<std::size_t>(class_id % static_cast<int>(kObjects.size()))];
  return p;
}

std::string class_caption(const WorldConfig& cfg, int class_id) {
  const auto p = class_phrases(cfg, class_id);
  return p.keyword + " " + p.action + " " + p.object;
}

namespace {

std::vector<double> seeded_vector(std::uint64_t class_seed, std::uint64_t salt, int dim) {
  Rng rng(Rng::mix(class_seed, salt));
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (auto& x : v) x = rng.gauss(0.0, 1.0);
  return v;
}

std::vector<double> fine_mean(std::uint64_t class_seed, int class_id, int dim) {
  return seeded_vector(class_seed, 0xC1A5500ULL + static_cast<std::uint64_t>(class_id), dim);
}

std::vector<double> phase_vector(std::uint64_t class_seed, int letter, int dim) {
  return seeded_vector(class_seed, 0xF0A5E00ULL + static_cast<std::uint64_t>(letter), dim);
}

std::pair<int, int> coarse_pair(int class_id) {
  return kCoarsePairs[static_cast<std::size_t>((class_id / 2) % static_cast<int>(kCoarsePairs.size()))];
}

}  // namespace

std::vector<double> class_signature(const WorldConfig& cfg, int class_id) {
  const std::uint64_t class_seed = cfg.class_seed != 0 ? cfg.class_seed : cfg.seed;
  if (!class_is_coarse(class_id)) return fine_mean(class_seed, class_id, cfg.feature_dim);
  const auto [ga, gb] = coarse_pair(class_id);
  auto a = phase_vector(class_seed, ga, cfg.feature_dim);
  const auto b = phase_vector(class_seed, gb, cfg.feature_dim);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = 0.5 * (a[j] + b[j]);
  return a;
}

World generate_world(const WorldConfig& cfg) {
  cfg.validate();
  World world;

  // class signatures, shared across videos and across splits
  const std::uint64_t class_seed = cfg.class_seed != 0 ? cfg.class_seed : cfg.seed;
  std::vector<std::vector<double>> means(static_cast<std::size_t>(cfg.n_event_classes));
  for (int c = 0; c < cfg.n_event_classes; ++c) {
    means[static_cast<std::size_t>(c)] = fine_mean(class_seed, c, cfg.feature_dim);
  }
  std::vector<std::vector<double>> psi(kPhaseAlphabet);
  for (int g = 0; g < kPhaseAlphabet; ++g) psi[static_cast<std::size_t>(g)] = phase_vector(class_seed, g, cfg.feature_dim);
  const auto idle = seeded_vector(class_seed, 0x1d1eULL, cfg.feature_dim);

  const int n_frames = static_cast<int>(std::llround(cfg.fps * cfg.duration_s));

  for (int v = 0; v < cfg.n_videos; ++v) {
    const std::uint64_t base = Rng::mix(cfg.seed, static_cast<std::uint64_t>(v));
    Rng rng_timeline(Rng::mix(base, 1));
    Rng rng_feat(Rng::mix(base, 2));
    Rng rng_a(Rng::mix(base, 3));
    Rng rng_w(Rng::mix(base, 4));

    VideoRecord video;
    {
      std::ostringstream id;
      id << cfg.video_id_prefix << (v < 10 ? "00" : v < 100 ? "0" : "") << v;
      video.video_id = id.str();
    }
    video.duration_s = cfg.duration_s;
    video.fps = cfg.fps;
    video.feature_dim = cfg.feature_dim;

    // event timeline covering the full duration; coarse classes take long
    // events, fine classes short ones; neighbouring classes distinct
    double t = 0.0;
    int prev = -1;
    while (t < cfg.duration_s - 1e-9) {
      int cls = rng_timeline.uniform_int(0, cfg.n_event_classes - 1);
      if (cls == prev) cls = (cls + 1) % cfg.n_event_classes;
      const double len = class_is_coarse(cls)
                             ? rng_timeline.uniform(kCoarseEventMinS, kCoarseEventMaxS)
                             : rng_timeline.uniform(kFineEventMinS, kFineEventMaxS);
      double end = std::min(t + len, cfg.duration_s);
      if (cfg.duration_s - end < 2.0) end = cfg.duration_s;  // absorb the tail
      video.event_timeline.push_back({cls, t, end});
      prev = cls;
      t = end;
    }

    Drift drift;
    drift.init(rng_feat, cfg.feature_dim);

    // sub-event structure: fine events alternate class bursts with idle or
    // foreign flashes; coarse events cycle between their two phase letters
    struct Span {
      double start, end;
      int kind;  // >= 0: fine class id; -1: idle; -(2+g): phase letter g
    };
    std::vector<Span> spans;
    {
      Rng rng_span(Rng::mix(base, 5));
      for (const auto& ev : video.event_timeline) {
        double ts = ev.start_s;
        if (class_is_coarse(ev.class_id)) {
          const auto [ga, gb] = coarse_pair(ev.class_id);
          bool first = rng_span.uniform() < 0.5;
          while (ts < ev.end_s) {
            const double end =
                std::min(ts + rng_span.uniform(kPhaseBlockMinS, kPhaseBlockMaxS), ev.end_s);
            spans.push_back({ts, end, -(2 + (first ? ga : gb))});
            ts = end;
            first = !first;
          }
        } else {
          bool in_burst = true;
          while (ts < ev.end_s) {
            const double len = in_burst ? rng_span.uniform(kBurstMinS, kBurstMaxS)
                                        : rng_span.uniform(kBreakMinS, kBreakMaxS);
            const double end = std::min(ts + len, ev.end_s);
            int kind = ev.class_id;
            if (!in_burst) {
              kind = -1;
              if (rng_span.uniform() < kFlashProb) {
                int foreign = rng_span.uniform_int(0, cfg.n_event_classes - 1);
                if (foreign == ev.class_id) foreign = (foreign + 1) % cfg.n_event_classes;
                kind = foreign;
              }
            }
            spans.push_back({ts, end, kind});
            ts = end;
            in_burst = !in_burst;
          }
        }
      }
    }
    auto span_kind = [&](double time) {
      for (const auto& s : spans) {
        if (time >= s.start && time < s.end) return s.kind;
        if (s.start > time) break;
      }
      return spans.empty() ? -1 : spans.back().kind;
    };

    auto event_class_at = [&](double time) {
      for (const auto& ev : video.event_timeline) {
        if (time >= ev.start_s && time < ev.end_s) return ev.class_id;
      }
      return video.event_timeline.back().class_id;
    };

    video.frame_features.resize(static_cast<std::size_t>(n_frames) * cfg.feature_dim);
    std::vector<double> row(static_cast<std::size_t>(cfg.feature_dim));
    for (int i = 0; i < n_frames; ++i) {
      const double ti = (i + 0.5) / cfg.fps;
      const int kind = span_kind(ti);
      const std::vector<double>* base_vec = &idle;
      if (kind >= 0) {
        base_vec = &means[static_cast<std::size_t>(kind)];
      } else if (kind <= -2) {
        base_vec = &psi[static_cast<std::size_t>(-(kind + 2))];
      }
      row = *base_vec;
      drift.add(ti, row);
      for (int j = 0; j < cfg.feature_dim; ++j) {
        row[static_cast<std::size_t>(j)] += rng_feat.gauss(0.0, kWhiteNoiseStd);
        video.frame_features[static_cast<std::size_t>(i) * cfg.feature_dim + j] =
            static_cast<float>(row[static_cast<std::size_t>(j)]);
      }
      world.labels.push_back({video.video_id, i, event_class_at(ti)});
    }

    // narration lags or leads the visuals by a bounded random offset
    // heavy-tailed: half the narration is well aligned, the rest lags or
    // leads, occasionally by several seconds
    auto jitter = [&](double& s0, double& s1, Rng& rng) {
      if (cfg.narration_offset_s <= 0.0) return;
      const double u = rng.uniform();
      double d = 0.0;
      if (u < 0.25) {
        d = 0.0;
      } else if (u < 0.8) {
        d = rng.uniform(-cfg.narration_offset_s, cfg.narration_offset_s);
      } else {
        d = rng.uniform(-2.5 * cfg.narration_offset_s, 2.5 * cfg.narration_offset_s);
      }
      d = std::max(d, -s0);
      d = std::min(d, cfg.duration_s - s1);
      s0 += d;
      s1 += d;
    };

    // transcripts and captions per event
    for (const auto& ev : video.event_timeline) {
      const auto phrases = class_phrases(cfg, ev.class_id);

      // sparse A view: at most one keyword-accurate fragment per event
      if (rng_a.uniform() < kAEmitProb && ev.end_s - ev.start_s > kASentMin + 0.2) {
        const double max_len = std::min(kASentMax, ev.end_s - ev.start_s - 0.1);
        const double len = rng_a.uniform(kASentMin, max_len);
        const double start = rng_a.uniform(ev.start_s, ev.end_s - len);
        std::string text = a_template(rng_a.uniform_int(0, 4), phrases);
        auto words = split_words(text);
        if (rng_a.uniform() < cfg.a_fragmentation && words.size() > 2) {
          const auto keep = static_cast<std::size_t>(
              rng_a.uniform_int(2, static_cast<int>(words.size()) - 1));
          text = join_words(words, keep);
          words.resize(keep);
        }
        TranscriptSentence s;
        s.video_id = video.video_id;
        s.source = 'A';
        s.start_s = start;
        s.end_s = start + len;
        jitter(s.start_s, s.end_s, rng_a);
        s.text = text;
        for (const auto& w : words) {
          const double center = is_classword(w, phrases) ? 0.85 : 0.5;
          s.word_confidences.push_back(
              rng_a.clipped_gauss(center, cfg.a_confidence_noise, 0.02, 1.0));
        }
        world.transcripts.push_back(std::move(s));
      }

      // dense W view: fluent sentences tiling the event
      double wt = ev.start_s;
      while (wt < ev.end_s - 0.8) {
        double wend = std::min(wt + rng_w.uniform(kWSentMin, kWSentMax), ev.end_s);
        if (ev.end_s - wend < 1.2) wend = ev.end_s;
        std::string kw = phrases.keyword;
        if (rng_w.uniform() < cfg.w_keyword_corruption) kw = corrupt_word(kw, rng_w);
        TranscriptSentence s;
        s.video_id = video.video_id;
        s.source = 'W';
        s.start_s = wt;
        s.end_s = wend;
        jitter(s.start_s, s.end_s, rng_w);
        s.text = w_template(rng_w.uniform_int(0, 5), phrases, kw);
        world.transcripts.push_back(std::move(s));
        wt = wend;
      }

      world.captions.push_back(
          {video.video_id, ev.start_s, ev.end_s, class_caption(cfg, ev.class_id)});
    }

    world.videos.push_back(std::move(video));
  }

  std::stable_sort(world.transcripts.begin(), world.transcripts.end(),
                   [](const TranscriptSentence& a, const TranscriptSentence& b) {
                     if (a.video_id != b.video_id) return a.video_id < b.video_id;
                     if (a.start_s != b.start_s) return a.start_s < b.start_s;
                     return a.source < b.source;
                   });
  return world;
}

}  // namespace dualview::corpus
