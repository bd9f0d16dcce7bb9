#pragma once

// On-disk corpus formats:
//   <split>.transcripts.jsonl  {video_id, source, start_s, end_s, text, word_confidences?}
//   <split>.labels.jsonl       {video_id, frame_index, class_id}
//   <split>.captions.jsonl     {clip_ref: {video_id, start_s, end_s}, reference}
//   <video_id>.f32             little-endian float32, row-major frames
//   <video_id>.meta.json       {video_id, n_frames, feature_dim, fps, duration_s, events}

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "dualview/world.hpp"

namespace dualview::corpus {

// Counts feature binary reads; lets tests assert that text-only paths never
// touch frame data.
std::atomic<long long>& feature_read_count();

void write_corpus(const std::filesystem::path& dir, const std::string& split,
                  const World& world);
World read_corpus(const std::filesystem::path& dir, const std::string& split);

void write_features(const std::filesystem::path& dir, const VideoRecord& video);
VideoRecord read_features(const std::filesystem::path& dir, const std::string& video_id);

void write_transcripts(const std::filesystem::path& file,
                       const std::vector<TranscriptSentence>& sentences);
std::vector<TranscriptSentence> read_transcripts(const std::filesystem::path& file);

void write_labels(const std::filesystem::path& file, const std::vector<FrameLabel>& labels);
std::vector<FrameLabel> read_labels(const std::filesystem::path& file);

void write_captions(const std::filesystem::path& file, const std::vector<CaptionRow>& rows);
std::vector<CaptionRow> read_captions(const std::filesystem::path& file);

}  // namespace dualview::corpus
