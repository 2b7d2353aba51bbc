// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include <cstdint>

#include "pitchtrack/io.hpp"

namespace pitchtrack::synth {

/// Deterministic random stream: splitmix64 with hand-rolled samplers, so
/// identical seeds reproduce byte-identical bundles on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double uniform();  // [0, 1)
    double uniform(double lo, double hi);
    double normal();   // standard, Box-Muller
    int poisson(double lambda);

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// A synthetic soccer scene: players on piecewise-constant-velocity paths
/// with reflective bounds, an optional piecewise-parabolic ball, jittered
/// detections, dropout, clutter, noisy per-identity embeddings and an
/// optional camera pan delivered through the CMC sidecar.
struct SynthScenario {
    int num_players = 10;
    bool ball = false;
    int duration = 600;
    double detection_dropout = 0.0;
    double clutter_rate = 0.0;              // expected false positives per frame
    double embedding_noise_sigma = 0.1;
    double camera_pan = 0.0;                // px per frame, horizontal
    std::vector<std::pair<int, int>> split_events;  // (player id, start frame)
    std::uint64_t seed = 1;

    // generator plumbing
    int image_width = 1920;
    int image_height = 1080;
    int embedding_dim = 64;
    double det_noise_px = 1.0;     // detection center jitter std
    double size_noise_frac = 0.02;
    double ball_det_noise_px = 0.4;
    double clutter_min_dist = 0.0;  // ball clutter ring, 0 disables
    double clutter_max_dist = 0.0;  // 0 = unbounded
    int split_gap = 40;             // forced detection gap per split event

    void validate() const;
};

struct GeneratedSequence {
    std::vector<Tracklet> gt_players;
    std::map<int, std::vector<Detection>> detections;
    io::EmbeddingData embeddings;  // keyed (frame, index within frame)
    std::map<int, motion::AffineMotion> cmc;
    ball::BallTrack gt_ball;
    std::map<int, std::vector<Detection>> ball_detections;
    int image_width = 0;
    int image_height = 0;
    int embedding_dim = 0;
};

GeneratedSequence generate(const SynthScenario& scenario);

/// Writes det.txt, emb.txt, gt.txt, seqinfo.txt, plus cmc.txt when panning
/// and det_ball.txt/gt_ball.txt when the scenario has a ball.
void write_bundle(const GeneratedSequence& seq, const std::filesystem::path& dir);

SynthScenario scenario_from_kv(const std::map<std::string, std::string>& kv);

}  // namespace pitchtrack::synth
