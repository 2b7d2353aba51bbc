// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pitchtrack/observation.hpp"

namespace pitchtrack::assoc {

/// rows = tracks, cols = detections; +infinity marks gated pairs.
using CostMatrix = Eigen::MatrixXd;

struct AssociationWeights {
    double w_iou = 1.0;
    double w_app = 1.0;
    double w_vel = 0.2;
};

/// What the cost builder needs from a track, decoupled from the tracker's
/// internal representation.
struct TrackView {
    BBox predicted_box;
    const motion::KalmanState* state = nullptr;
    const EmbeddingVector* embedding = nullptr;  // nullptr when never seen
    const motion::ObservationHistory* history = nullptr;
};

/// Fused motion + appearance + velocity-direction cost. Pairs failing the
/// Mahalanobis gate, or with zero IoU while w_iou > 0, are set to +infinity.
/// A missing embedding on either side contributes the neutral 0.5 * w_app.
CostMatrix build_cost_matrix(std::span<const TrackView> tracks,
                             std::span<const Detection> detections,
                             const AssociationWeights& weights,
                             double gating_threshold = motion::kGatingThreshold95,
                             int velocity_delta_t = 3);

struct Assignment {
    std::vector<std::pair<int, int>> matches;  // sorted by row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
};

/// Exact minimum-cost one-to-one assignment (Jonker-Volgenant style shortest
/// augmenting paths on the padded square matrix). Matches whose entry exceeds
/// max_cost, or is +infinity, are dissolved into the unmatched lists.
Assignment solve_assignment(const CostMatrix& cost, double max_cost);

}  // namespace pitchtrack::assoc
