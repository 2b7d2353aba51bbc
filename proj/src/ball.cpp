// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/ball.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>

namespace pitchtrack::ball {

std::vector<Detection> select_candidates(
    const std::map<int, std::vector<Detection>>& frames, double min_conf) {
    std::vector<Detection> out;
    for (const auto& [frame, dets] : frames) {
        const Detection* best = nullptr;
        for (const Detection& d : dets) {
            if (d.confidence < min_conf) continue;
            if (best == nullptr || d.confidence > best->confidence) best = &d;
        }
        if (best != nullptr) out.push_back(*best);
    }
    return out;
}

std::vector<CenterPoint> smooth_centers(std::span<const CenterPoint> points,
                                        int window, int order) {
    if (points.size() < 2)
        throw std::invalid_argument("smooth_centers needs at least 2 points");
    if (window % 2 == 0 || window < 1)
        throw std::invalid_argument("window must be odd and positive");

    const int half = (window - 1) / 2;
    std::vector<CenterPoint> out;
    out.reserve(points.size());

    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int f = points[i].frame;
        while (lo < points.size() && points[lo].frame < f - half) ++lo;
        while (hi < points.size() && points[hi].frame <= f + half) ++hi;
        const int n = static_cast<int>(hi - lo);
        const int fit_order = std::min(order, n - 1);

        // Frames shifted to the query and scaled into [-1,1] keep the
        // Vandermonde system well conditioned.
        Eigen::MatrixXd a(n, fit_order + 1);
        Eigen::MatrixXd y(n, 2);
        const double scale = std::max(half, 1);
        for (int r = 0; r < n; ++r) {
            const CenterPoint& p = points[lo + r];
            const double x = (p.frame - f) / scale;
            double pw = 1.0;
            for (int c = 0; c <= fit_order; ++c) {
                a(r, c) = pw;
                pw *= x;
            }
            y(r, 0) = p.cx;
            y(r, 1) = p.cy;
        }
        // Evaluating the fit at x = 0 leaves just the constant coefficient.
        const Eigen::MatrixXd coef = a.colPivHouseholderQr().solve(y);
        out.push_back(CenterPoint{f, coef(0, 0), coef(0, 1)});
    }
    return out;
}

std::vector<Detection> gate_detections(std::span<const Detection> candidates,
                                       std::span<const CenterPoint> smoothed,
                                       double max_dist) {
    std::vector<Detection> out;
    std::size_t s = 0;
    for (const Detection& d : candidates) {
        while (s < smoothed.size() && smoothed[s].frame < d.frame) ++s;
        if (s >= smoothed.size() || smoothed[s].frame != d.frame)
            throw std::invalid_argument("smoothed trajectory misses a candidate frame");
        const double dx = d.bbox.cx() - smoothed[s].cx;
        const double dy = d.bbox.cy() - smoothed[s].cy;
        if (std::sqrt(dx * dx + dy * dy) < max_dist) out.push_back(d);
    }
    return out;
}

BallTrack interpolate_track(std::span<const Detection> retained) {
    BallTrack track;
    for (std::size_t i = 0; i < retained.size(); ++i) {
        const Detection& d = retained[i];
        track.entries.push_back(BallEntry{d.frame, d.bbox, BallSource::Detected});
        if (i + 1 >= retained.size()) break;
        const Detection& next = retained[i + 1];
        const int gap = next.frame - d.frame;
        for (int k = 1; k < gap; ++k) {
            const double t = static_cast<double>(k) / gap;
            const double cx = d.bbox.cx() + t * (next.bbox.cx() - d.bbox.cx());
            const double cy = d.bbox.cy() + t * (next.bbox.cy() - d.bbox.cy());
            const double w = d.bbox.w + t * (next.bbox.w - d.bbox.w);
            const double h = d.bbox.h + t * (next.bbox.h - d.bbox.h);
            track.entries.push_back(
                BallEntry{d.frame + k, BBox{cx - 0.5 * w, cy - 0.5 * h, w, h},
                          BallSource::Interpolated});
        }
    }
    return track;
}

BallTrack ball_pipeline(const std::map<int, std::vector<Detection>>& frames,
                        const PipelineConfig& cfg) {
    cfg.validate();
    const auto candidates = select_candidates(frames, cfg.ball_min_conf);
    if (candidates.empty()) return BallTrack{};
    if (candidates.size() == 1)
        return interpolate_track(candidates);

    std::vector<CenterPoint> centers;
    centers.reserve(candidates.size());
    for (const Detection& d : candidates)
        centers.push_back(CenterPoint{d.frame, d.bbox.cx(), d.bbox.cy()});
    const auto smoothed =
        smooth_centers(centers, cfg.ball_window, cfg.ball_poly_order);
    const auto retained = gate_detections(candidates, smoothed, cfg.ball_max_dist);
    return interpolate_track(retained);
}

}  // namespace pitchtrack::ball
