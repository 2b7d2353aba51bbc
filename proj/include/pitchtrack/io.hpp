// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pitchtrack/ball.hpp"
#include "pitchtrack/kalman.hpp"

namespace pitchtrack::io {

/// One MOT line: "frame,id,x,y,w,h,conf,...". Detections carry id = -1.
/// Frames are 1-based in files and 0-based in memory; the conversion happens
/// here and nowhere else.
struct MotEntry {
    int id = -1;
    BBox box;
    double confidence = 0.0;
};

struct MotData {
    std::map<int, std::vector<MotEntry>> frames;
    int warnings = 0;  // lines rejected for non-positive box size
};

/// Structurally malformed lines raise std::invalid_argument with the line
/// number; lines with non-positive width/height are dropped and counted.
MotData parse_mot_file(const std::filesystem::path& path);

void write_mot_file(const std::vector<Tracklet>& tracklets,
                    const std::filesystem::path& path);
void write_mot_file(const ball::BallTrack& track,
                    const std::filesystem::path& path, int track_id = 1);

/// Embedding sidecar, one line per vector: "frame,index,v1,...,vD". The index
/// is the detection's position within its frame for detector output, or the
/// track id for tracker output.
struct EmbeddingData {
    std::map<std::pair<int, int>, EmbeddingVector> by_key;
    int warnings = 0;  // renormalized or rejected vectors
};

/// Norms within 1e-6 of 1 pass; deviations below 10% are renormalized with a
/// warning; anything further (zero included) rejects the line with a warning.
/// A wrong component count is an error with the line number.
EmbeddingData parse_embeddings(const std::filesystem::path& path, int dim);

void write_embeddings(const std::vector<Tracklet>& tracklets,
                      const std::filesystem::path& path);
void write_embeddings(const EmbeddingData& data, const std::filesystem::path& path);

/// Detector-output writer (id = -1) that preserves the in-frame order, so
/// sidecar indices stay aligned.
void write_detections(const std::map<int, std::vector<Detection>>& detections,
                      const std::filesystem::path& path);

/// CMC sidecar: "frame,a11,a12,tx,a21,a22,ty"; missing frames mean identity.
std::map<int, motion::AffineMotion> parse_cmc(const std::filesystem::path& path);
void write_cmc(const std::map<int, motion::AffineMotion>& cmc,
               const std::filesystem::path& path);

/// key=value lines; '#' starts a comment. Unknown keys are an error.
std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& path);
void apply_config(const std::map<std::string, std::string>& kv,
                  PipelineConfig& cfg);

/// Detection view of parsed MOT data, with sidecar embeddings attached by
/// (frame, index-within-frame).
std::map<int, std::vector<Detection>> detections_from_mot(
    const MotData& mot, ObjectClass cls,
    const EmbeddingData* embeddings = nullptr);

/// GT/prediction view for the evaluator (entries with id >= 0).
std::map<int, std::vector<std::pair<int, BBox>>> annotations_from_mot(
    const MotData& mot);

/// Tracklet view of a parsed track file (one tracklet per id), with optional
/// per-frame embeddings keyed by (frame, track id).
std::vector<Tracklet> tracklets_from_mot(
    const MotData& mot, const EmbeddingData* embeddings = nullptr);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pitchtrack::io
