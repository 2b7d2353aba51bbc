// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/observation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pitchtrack::motion {

void ObservationHistory::push(int frame, const Measurement& m) {
    if (!entries_.empty() && frame <= entries_.back().first)
        throw std::invalid_argument("observation frames must be strictly increasing");
    entries_.emplace_back(frame, m);
    while (entries_.size() > capacity_) entries_.pop_front();
}

void ObservationHistory::apply_cmc(const AffineMotion& a) {
    for (auto& [frame, m] : entries_) m = motion::apply_cmc(m, a);
}

double velocity_direction_cost(const ObservationHistory& hist,
                               const Measurement& candidate, int delta_t) {
    constexpr double kNeutral = 0.5;
    if (hist.size() < 2) return kNeutral;

    const auto& [newest_frame, newest] = hist.newest();
    if (newest_frame - hist.oldest().first < delta_t) return kNeutral;

    // Newest entry at least delta_t frames older than the latest observation.
    const Measurement* ref = nullptr;
    for (const auto& [frame, m] : hist.entries()) {
        if (newest_frame - frame >= delta_t) ref = &m;
    }
    if (ref == nullptr) return kNeutral;

    const Eigen::Vector2d track_dir(newest.cx - ref->cx, newest.cy - ref->cy);
    const Eigen::Vector2d cand_dir(candidate.cx - newest.cx, candidate.cy - newest.cy);
    if (track_dir.norm() < 1e-12 || cand_dir.norm() < 1e-12) return kNeutral;

    const double cosine = std::clamp(
        track_dir.normalized().dot(cand_dir.normalized()), -1.0, 1.0);
    return std::acos(cosine) / std::numbers::pi;
}

std::vector<Measurement> interpolate_gap(const Measurement& from,
                                         const Measurement& to, int gap_len) {
    std::vector<Measurement> out;
    out.reserve(std::max(gap_len, 0));
    for (int k = 1; k <= gap_len; ++k) {
        const double t = static_cast<double>(k) / (gap_len + 1);
        out.push_back(Measurement{from.cx + t * (to.cx - from.cx),
                                  from.cy + t * (to.cy - from.cy),
                                  from.aspect + t * (to.aspect - from.aspect),
                                  from.h + t * (to.h - from.h)});
    }
    return out;
}

KalmanState oru_reupdate(const KalmanState& at_last_observation,
                         std::span<const Measurement> gap,
                         const KalmanParams& p) {
    KalmanState s = at_last_observation;
    for (const Measurement& m : gap) s = kf_update(kf_predict(s, p), m, 1.0, p);
    return s;
}

}  // namespace pitchtrack::motion
