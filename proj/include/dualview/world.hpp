#pragma once

// Synthetic "procedure world": per-video frame-feature tracks, two
// complementary noisy transcript streams, frame-level class labels, and
// clip-aligned reference captions. Generation is a pure function of
// WorldConfig; per-video streams are derived from the seed so videos can be
// produced independently.

#include <cstdint>
#include <string>
#include <vector>

namespace dualview::corpus {

struct WorldConfig {
  std::uint64_t seed = 1;
  std::uint64_t class_seed = 0;  // 0: derive from seed; splits sharing class
                                 // semantics must set the same value
  int n_videos = 8;
  double duration_s = 60.0;
  double fps = 8.0;
  int feature_dim = 16;
  int n_event_classes = 8;
  std::vector<std::string> keyword_vocab;  // one keyword per event class
  double a_fragmentation = 0.5;       // chance an A sentence is cut mid-clause
  double w_keyword_corruption = 0.35; // chance a W keyword is misspelled
  double a_confidence_noise = 0.25;   // spread of per-word confidences
  double narration_offset_s = 0.0;    // max |shift| of sentence timing vs visuals
  std::string video_id_prefix = "v";  // keeps ids of different splits apart

  void validate() const;  // throws ConfigError listing every offender
};

struct EventSpan {
  int class_id = 0;
  double start_s = 0;
  double end_s = 0;
  bool operator==(const EventSpan&) const = default;
};

struct VideoRecord {
  std::string video_id;
  double duration_s = 0;
  double fps = 0;
  int feature_dim = 0;
  std::vector<float> frame_features;  // row-major [n_frames x feature_dim]
  std::vector<EventSpan> event_timeline;

  int n_frames() const {
    return feature_dim == 0 ? 0 : static_cast<int>(frame_features.size()) / feature_dim;
  }
  bool operator==(const VideoRecord&) const = default;
};

struct TranscriptSentence {
  std::string video_id;
  char source = 'A';  // 'A' or 'W'
  double start_s = 0;
  double end_s = 0;
  std::string text;
  std::vector<double> word_confidences;  // A source only, one per word
  bool operator==(const TranscriptSentence&) const = default;
};

struct FrameLabel {
  std::string video_id;
  int frame_index = 0;
  int class_id = 0;
  bool operator==(const FrameLabel&) const = default;
};

struct CaptionRow {
  std::string video_id;
  double start_s = 0;
  double end_s = 0;
  std::string text;
  bool operator==(const CaptionRow&) const = default;
};

struct World {
  std::vector<VideoRecord> videos;
  std::vector<TranscriptSentence> transcripts;  // sorted by video, start, source
  std::vector<FrameLabel> labels;
  std::vector<CaptionRow> captions;  // one clip-aligned reference per event
};

// Phrase triple attached to an event class; prompts and captions reuse it.
struct ClassPhrases {
  std::string keyword;
  std::string action;
  std::string object;
};

ClassPhrases class_phrases(const WorldConfig& cfg, int class_id);

// Caption text used for every event of a class.
std::string class_caption(const WorldConfig& cfg, int class_id);

// Odd class ids are "coarse": long events identified by a two-phase cycle.
// Even ids are "fine": short events identified by a single signature.
bool class_is_coarse(int class_id);

// Time-averaged feature signature of a class (fine mean, or the midpoint of
// the two coarse phases); exposed for tests.
std::vector<double> class_signature(const WorldConfig& cfg, int class_id);

World generate_world(const WorldConfig& cfg);

// Total per-dimension noise scale of frame features (white + drift).
double frame_noise_std();

}  // namespace dualview::corpus
