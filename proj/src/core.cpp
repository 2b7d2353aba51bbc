// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/core.hpp"

#include <algorithm>

namespace pitchtrack {

void PipelineConfig::validate() const {
    if (ball_min_conf < 0.0 || ball_min_conf > 1.0)
        throw std::invalid_argument("ball_min_conf must be in [0,1]");
    if (ball_window % 2 == 0 || ball_window < ball_poly_order + 1)
        throw std::invalid_argument("ball_window must be odd and >= ball_poly_order+1");
    if (ball_max_dist <= 0.0)
        throw std::invalid_argument("ball_max_dist must be positive");
    if (image_width <= 0 || image_height <= 0)
        throw std::invalid_argument("image dimensions must be positive");
    if (embedding_dim <= 0)
        throw std::invalid_argument("embedding_dim must be positive");
    if (n_init < 1 || max_age < 1)
        throw std::invalid_argument("n_init and max_age must be >= 1");
    if (ema_alpha_base < 0.0 || ema_alpha_base > 1.0)
        throw std::invalid_argument("ema_alpha_base must be in [0,1]");
    if (w_iou < 0.0 || w_app < 0.0 || w_vel < 0.0 || w_iou + w_app + w_vel <= 0.0)
        throw std::invalid_argument("association weights must be non-negative, at least one positive");
    if (sim_fraction <= 0.0 || sim_fraction > 1.0)
        throw std::invalid_argument("sim_fraction must be in (0,1]");
    if (sim_threshold <= -1.0 || sim_threshold >= 1.0)
        throw std::invalid_argument("sim_threshold must be in (-1,1)");
}

double iou(const BBox& a, const BBox& b) {
    const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

Measurement bbox_to_measurement(const BBox& b) {
    return Measurement{b.cx(), b.cy(), b.w / b.h, b.h};
}

BBox measurement_to_bbox(const Measurement& m) {
    const double w = m.aspect * m.h;
    return BBox{m.cx - 0.5 * w, m.cy - 0.5 * m.h, w, m.h};
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.size() != v.size())
        throw std::invalid_argument("embedding dimension mismatch");
    return u.dot(v);
}

bool is_unit_norm(const EmbeddingVector& v, double tol) {
    return std::abs(v.norm() - 1.0) <= tol;
}

}  // namespace pitchtrack
