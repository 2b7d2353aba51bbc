// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include <deque>
#include <span>
#include <utility>

#include "pitchtrack/kalman.hpp"

namespace pitchtrack::motion {

/// Ring buffer of the last K accepted observations of one track, frames
/// strictly increasing.
class ObservationHistory {
public:
    explicit ObservationHistory(std::size_t capacity = 30) : capacity_(capacity) {}

    void push(int frame, const Measurement& m);
    void apply_cmc(const AffineMotion& a);

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    const std::pair<int, Measurement>& oldest() const { return entries_.front(); }
    const std::pair<int, Measurement>& newest() const { return entries_.back(); }
    const std::deque<std::pair<int, Measurement>>& entries() const { return entries_; }

private:
    std::size_t capacity_;
    std::deque<std::pair<int, Measurement>> entries_;
};

/// OC-SORT velocity consistency term in [0,1]: angle between the track's
/// historical direction over a delta_t-frame span and the direction from the
/// newest observation to the candidate, divided by pi. Returns the neutral
/// 0.5 when the history is too short or a direction degenerates.
double velocity_direction_cost(const ObservationHistory& hist,
                               const Measurement& candidate, int delta_t = 3);

/// Linearly interpolated virtual measurements strictly between two real
/// observations gap_len frames apart (excludes both endpoints).
std::vector<Measurement> interpolate_gap(const Measurement& from,
                                         const Measurement& to, int gap_len);

/// Observation-centric re-update: replay predict+update over virtual
/// measurements from the state at the last real observation, replacing the
/// prediction-only drift across an occlusion gap.
KalmanState oru_reupdate(const KalmanState& at_last_observation,
                         std::span<const Measurement> gap,
                         const KalmanParams& p = {});

}  // namespace pitchtrack::motion
