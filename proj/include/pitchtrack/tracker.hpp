// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include <map>
#include <optional>
#include <span>

#include "pitchtrack/assoc.hpp"

namespace pitchtrack {

enum class TrackState { Tentative, Confirmed, Lost, Removed };

/// Confidence-adaptive EMA: alpha = base + (1-base)*(1-conf). A track with no
/// embedding adopts the detection's directly. Result is renormalized.
EmbeddingVector update_embedding_ema(const std::optional<EmbeddingVector>& current,
                                     const EmbeddingVector& e, double conf,
                                     double alpha_base);

/// One tracked identity and its full lifecycle.
class Track {
public:
    Track(int id, int frame, const Detection& det, const motion::KalmanParams& kp,
          std::size_t history_size, bool tentative);

    int id() const { return id_; }
    TrackState state() const { return state_; }
    int hits() const { return hits_; }
    int time_since_update() const { return time_since_update_; }
    const motion::KalmanState& kf() const { return kf_; }
    const std::optional<EmbeddingVector>& ema_embedding() const { return ema_; }
    const motion::ObservationHistory& history() const { return history_; }
    const BBox& last_observation_box() const { return last_box_; }
    int last_observation_frame() const { return last_frame_; }
    double last_confidence() const { return last_conf_; }
    bool ever_confirmed() const { return ever_confirmed_; }
    const std::vector<TrackletEntry>& entries() const { return entries_; }

private:
    friend class PlayerTracker;

    void apply_cmc(const motion::AffineMotion& a);
    void predict(const motion::KalmanParams& kp, double lost_cov_cap);
    void mark_matched(int frame, const Detection& det,
                      const motion::KalmanParams& kp, double noise_scale,
                      double ema_alpha_base, int n_init);
    void mark_missed(int max_age);

    int id_;
    TrackState state_;
    motion::KalmanState kf_;
    motion::KalmanState kf_at_last_update_;  // replay base for re-updates
    std::optional<EmbeddingVector> ema_;
    motion::ObservationHistory history_;
    int hits_ = 1;
    int time_since_update_ = 0;
    bool ever_confirmed_ = false;
    int last_frame_;
    Measurement last_meas_;
    BBox last_box_;
    double last_conf_;
    std::vector<TrackletEntry> entries_;
};

struct TrackOutput {
    int id;
    BBox box;
    double confidence;
};

/// Online player tracker: per-frame predict, CMC, two-stage association
/// (fused cost for active tracks, last-observation IoU recovery for lost
/// ones), re-update across occlusion gaps, lifecycle and embedding upkeep.
/// Stateful and single-threaded per sequence.
class PlayerTracker {
public:
    explicit PlayerTracker(const PipelineConfig& cfg = {});

    /// Advance one frame. Frame indices must be strictly increasing across
    /// calls. Returns the confirmed tracks matched at this frame.
    std::vector<TrackOutput> step(int frame, std::span<const Detection> detections,
                                  const std::optional<motion::AffineMotion>& cmc = {});

    /// Confirmed-era trajectories of all tracks seen so far, sorted by id.
    /// Tentative-era boxes are included (flagged) when backfill is enabled.
    std::vector<Tracklet> tracklets() const;

    const std::vector<Track>& tracks() const { return tracks_; }

private:
    Tracklet finalize(const Track& t) const;

    PipelineConfig cfg_;
    motion::KalmanParams kp_;
    assoc::AssociationWeights weights_;
    std::vector<Track> tracks_;
    std::vector<Tracklet> finished_;
    int next_id_ = 1;
    std::optional<int> last_step_frame_;
};

/// Replay the tracker over a whole sequence (frames contiguous between the
/// first and last key; missing keys are empty frames) and return the
/// tracklets for post-processing. Deterministic for identical inputs.
std::vector<Tracklet> run_sequence(
    const std::map<int, std::vector<Detection>>& frames,
    const std::map<int, motion::AffineMotion>& cmc, const PipelineConfig& cfg);

}  // namespace pitchtrack
