// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include <vector>

#include "pitchtrack/core.hpp"

namespace pitchtrack::post {

/// Constants of the offline refinement. Pixel-valued fields are specified at
/// 1080p and rescaled for other resolutions by scaled_from.
struct MergeConfig {
    double boundary_margin = 50.0;
    int max_gap_frames = 60;
    double sim_threshold = 0.6;
    double sim_fraction = 0.7;
    int link_max_gap = 30;
    double link_max_dist = 75.0;
    double gsi_tau = 10.0;
    int gsi_max_gap = 20;
    double gsi_noise_var = 1.0;

    static MergeConfig scaled_from(const PipelineConfig& cfg);
};

/// Warning and event counters for one post-processing run.
struct PostStats {
    int gsi_fallbacks = 0;   // singular kernel, linear fill kept
    int splits = 0;
    int links = 0;
    int boundary_merges = 0;
    int skipped_pairs = 0;   // no embeddings on either side
};

/// Fill gaps of <= max_gap frames: linear prefill, then each of
/// (cx, cy, w, h) regressed over frame index by a Gaussian process with RBF
/// kernel of length-scale tau; the posterior replaces the filled frames, so
/// observed boxes are untouched and the operation is idempotent. Gaps larger
/// than max_gap split the tracklet; the longest piece keeps the id, the
/// others draw fresh ids from next_id.
std::vector<Tracklet> gsi_smooth(const Tracklet& t, double tau, int max_gap,
                                 double noise_var, int& next_id,
                                 PostStats* stats = nullptr);

/// gsi_smooth over a whole set; fresh ids start past the current maximum.
std::vector<Tracklet> gsi_smooth_all(const std::vector<Tracklet>& ts,
                                     const MergeConfig& cfg,
                                     PostStats* stats = nullptr);

/// Appearance-free linking: merge pairs (A ends, B starts within
/// link_max_gap) whose constant-velocity extrapolation of A's last 10 frames
/// lands within link_max_dist of B's first center. Greedy in ascending
/// distance, one merge per tracklet per pass, repeated to fixed point; the
/// merged tracklet keeps the earlier tracklet's id and bridges the gap.
std::vector<Tracklet> link_tracklets(const std::vector<Tracklet>& ts,
                                     const MergeConfig& cfg,
                                     PostStats* stats = nullptr);

/// Appearance-based recovery of identities that died away from the image
/// boundary: an interior death may absorb an interior birth that follows
/// within max_gap_frames when the dead track's EMA embedding stays similar
/// (>= sim_threshold) to the candidate's per-frame embeddings on at least a
/// sim_fraction of them. Iterates to a fixed point; a margin of 0 disables
/// the stage. The merged tracklet keeps the dead tracklet's id.
std::vector<Tracklet> boundary_merge(const std::vector<Tracklet>& ts,
                                     int image_width, int image_height,
                                     const MergeConfig& cfg,
                                     PostStats* stats = nullptr);

}  // namespace pitchtrack::post
