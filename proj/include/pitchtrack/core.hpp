// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pitchtrack {

/// Appearance vector. Unit L2 norm is enforced at ingest, not per operation.
using EmbeddingVector = Eigen::VectorXd;

/// Axis-aligned box in image coordinates, origin top-left, corner + size form.
struct BBox {
    double x = 0.0;  // left
    double y = 0.0;  // top
    double w = 0.0;
    double h = 0.0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double cx() const { return x + 0.5 * w; }
    double cy() const { return y + 0.5 * h; }
    double area() const { return w * h; }

    bool valid() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
               std::isfinite(h) && w > 0.0 && h > 0.0;
    }
};

enum class ObjectClass { Player, Ball };

/// One detector output for one frame. Frame indices are 0-based internally;
/// the MOT file layer converts from the 1-based external convention.
struct Detection {
    int frame = 0;
    BBox bbox;
    double confidence = 0.0;
    ObjectClass cls = ObjectClass::Player;
    std::optional<EmbeddingVector> embedding;
};

/// Kalman measurement space: box center, width/height ratio, height.
struct Measurement {
    double cx = 0.0;
    double cy = 0.0;
    double aspect = 0.0;
    double h = 0.0;
};

/// One per-frame record of a tracklet.
struct TrackletEntry {
    int frame = 0;
    BBox box;
    double confidence = 0.0;
    std::optional<EmbeddingVector> embedding;
    bool backfilled = false;    // emitted retroactively after confirmation
    bool interpolated = false;  // produced by gap filling, not a detection
};

/// A contiguous (up to gaps) fragment of one identity's trajectory.
struct Tracklet {
    int id = 0;
    std::vector<TrackletEntry> entries;  // frames strictly increasing
    std::optional<EmbeddingVector> ema_embedding;

    int first_frame() const { return entries.front().frame; }
    int last_frame() const { return entries.back().frame; }
};

/// Every tunable of the pipeline. Defaults reproduce the reference setup at
/// 1920x1080; length-valued post-processing constants are rescaled for other
/// resolutions (see post::MergeConfig::scaled_for).
struct PipelineConfig {
    // run-wide
    int image_width = 1920;
    int image_height = 1080;
    int embedding_dim = 512;

    // ball pipeline
    double ball_min_conf = 0.05;
    int ball_window = 51;
    int ball_poly_order = 3;
    double ball_max_dist = 100.0;

    // motion model
    double kf_std_weight_position = 1.0 / 20.0;
    double kf_std_weight_velocity = 1.0 / 160.0;
    bool adaptive_noise = true;     // NSA-style (1 - confidence) measurement noise
    double gating_threshold = 9.4877;  // chi-square 0.95 quantile, 4 dof
    int velocity_delta_t = 3;
    int history_size = 30;

    // association
    double w_iou = 1.0;
    double w_app = 1.0;
    double w_vel = 0.2;
    double match_threshold = 0.7;
    double ocr_min_iou = 0.3;  // second-stage recovery on last-observation IoU

    // tracker lifecycle
    int n_init = 3;
    int max_age = 30;
    double ema_alpha_base = 0.9;
    double player_min_conf = 0.1;
    bool backfill = true;
    double lost_cov_cap = 10.0;

    // offline refinement
    double boundary_margin = 50.0;
    int merge_max_gap = 60;
    double sim_threshold = 0.6;
    double sim_fraction = 0.7;
    int link_max_gap = 30;
    double link_max_dist = 75.0;
    double gsi_tau = 10.0;
    int gsi_max_gap = 20;
    double gsi_noise_var = 1.0;

    void validate() const;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

Measurement bbox_to_measurement(const BBox& b);
BBox measurement_to_bbox(const Measurement& m);

/// Dot product of two unit vectors. Throws std::invalid_argument on
/// dimension mismatch.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// |norm - 1| <= tol check used at ingest boundaries.
bool is_unit_norm(const EmbeddingVector& v, double tol = 1e-6);

}  // namespace pitchtrack
