// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include <map>
#include <span>
#include <vector>

#include "pitchtrack/core.hpp"

namespace pitchtrack::ball {

enum class BallSource { Detected, Interpolated };

struct BallEntry {
    int frame = 0;
    BBox box;
    BallSource source = BallSource::Detected;
};

/// Single-object ball trajectory: one box per frame between the first and
/// last retained detection.
struct BallTrack {
    std::vector<BallEntry> entries;
    bool empty() const { return entries.empty(); }
};

struct CenterPoint {
    int frame = 0;
    double cx = 0.0;
    double cy = 0.0;
};

/// Per frame, the single highest-confidence detection at or above min_conf.
/// Confidence ties break by detection order within the frame.
std::vector<Detection> select_candidates(
    const std::map<int, std::vector<Detection>>& frames, double min_conf);

/// Centered sliding least-squares polynomial smoothing: for every point, fit
/// cx and cy independently over the points within +-(window-1)/2 frames and
/// evaluate at that frame. Windows with fewer than order+1 points reduce the
/// order. Throws std::invalid_argument for fewer than 2 points.
std::vector<CenterPoint> smooth_centers(std::span<const CenterPoint> points,
                                        int window, int order);

/// Keep a candidate iff its center is strictly closer than max_dist to the
/// smoothed point at its frame.
std::vector<Detection> gate_detections(std::span<const Detection> candidates,
                                       std::span<const CenterPoint> smoothed,
                                       double max_dist);

/// Linear interpolation of center, width and height across gaps between
/// retained detections; no extrapolation beyond the first or last one.
BallTrack interpolate_track(std::span<const Detection> retained);

/// select -> smooth -> gate -> interpolate with the configured constants.
BallTrack ball_pipeline(const std::map<int, std::vector<Detection>>& frames,
                        const PipelineConfig& cfg);

}  // namespace pitchtrack::ball
