// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/tracker.hpp"

#include <algorithm>
#include <limits>

namespace pitchtrack {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

EmbeddingVector update_embedding_ema(const std::optional<EmbeddingVector>& current,
                                     const EmbeddingVector& e, double conf,
                                     double alpha_base) {
    if (!current.has_value()) return e;
    if (current->size() != e.size())
        throw std::invalid_argument("embedding dimension mismatch");
    const double alpha = alpha_base + (1.0 - alpha_base) * (1.0 - conf);
    EmbeddingVector blended = alpha * (*current) + (1.0 - alpha) * e;
    const double norm = blended.norm();
    if (norm < 1e-12) return *current;  // degenerate cancellation, keep old
    return blended / norm;
}

Track::Track(int id, int frame, const Detection& det,
             const motion::KalmanParams& kp, std::size_t history_size,
             bool tentative)
    : id_(id),
      state_(tentative ? TrackState::Tentative : TrackState::Confirmed),
      history_(history_size),
      last_frame_(frame),
      last_meas_(bbox_to_measurement(det.bbox)),
      last_box_(det.bbox),
      last_conf_(det.confidence) {
    kf_ = motion::kf_initiate(last_meas_, kp);
    kf_at_last_update_ = kf_;
    history_.push(frame, last_meas_);
    if (det.embedding.has_value()) ema_ = *det.embedding;
    ever_confirmed_ = !tentative;
    entries_.push_back(TrackletEntry{frame, det.bbox, det.confidence,
                                     det.embedding, tentative, false});
}

void Track::apply_cmc(const motion::AffineMotion& a) {
    kf_ = motion::apply_cmc(kf_, a);
    kf_at_last_update_ = motion::apply_cmc(kf_at_last_update_, a);
    history_.apply_cmc(a);
    last_meas_ = motion::apply_cmc(last_meas_, a);
    last_box_ = measurement_to_bbox(last_meas_);
}

void Track::predict(const motion::KalmanParams& kp, double lost_cov_cap) {
    kf_ = motion::kf_predict(kf_, kp);
    if (state_ == TrackState::Lost && lost_cov_cap > 0.0) {
        const double cap = lost_cov_cap * kf_at_last_update_.covariance.trace();
        const double tr = kf_.covariance.trace();
        if (tr > cap && tr > 0.0) kf_.covariance *= cap / tr;
    }
}

void Track::mark_matched(int frame, const Detection& det,
                         const motion::KalmanParams& kp, double noise_scale,
                         double ema_alpha_base, int n_init) {
    const Measurement m = bbox_to_measurement(det.bbox);
    if (state_ == TrackState::Lost) {
        // Re-associated after a gap: replay virtual observations over the
        // gap from the state at the last real one, then predict into now.
        const int gap = frame - last_frame_ - 1;
        if (gap > 0) {
            const auto virtual_meas = motion::interpolate_gap(last_meas_, m, gap);
            kf_ = motion::kf_predict(
                motion::oru_reupdate(kf_at_last_update_, virtual_meas, kp), kp);
        }
    }
    kf_ = motion::kf_update(kf_, m, noise_scale, kp);
    kf_at_last_update_ = kf_;
    history_.push(frame, m);
    last_frame_ = frame;
    last_meas_ = m;
    last_box_ = det.bbox;
    last_conf_ = det.confidence;
    ++hits_;
    time_since_update_ = 0;
    if (det.embedding.has_value())
        ema_ = update_embedding_ema(ema_, *det.embedding, det.confidence,
                                    ema_alpha_base);

    if (state_ == TrackState::Tentative && hits_ >= n_init)
        state_ = TrackState::Confirmed;
    else if (state_ == TrackState::Lost)
        state_ = TrackState::Confirmed;
    ever_confirmed_ = ever_confirmed_ || state_ == TrackState::Confirmed;
    entries_.push_back(TrackletEntry{frame, det.bbox, det.confidence,
                                     det.embedding,
                                     state_ != TrackState::Confirmed, false});
}

void Track::mark_missed(int max_age) {
    ++time_since_update_;
    if (state_ == TrackState::Tentative)
        state_ = TrackState::Removed;
    else if (state_ == TrackState::Confirmed)
        state_ = TrackState::Lost;
    if (state_ == TrackState::Lost && time_since_update_ > max_age)
        state_ = TrackState::Removed;
}

PlayerTracker::PlayerTracker(const PipelineConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    kp_ = motion::KalmanParams{cfg_.kf_std_weight_position,
                               cfg_.kf_std_weight_velocity};
    weights_ = assoc::AssociationWeights{cfg_.w_iou, cfg_.w_app, cfg_.w_vel};
}

std::vector<TrackOutput> PlayerTracker::step(
    int frame, std::span<const Detection> detections,
    const std::optional<motion::AffineMotion>& cmc) {
    if (last_step_frame_.has_value() && frame <= *last_step_frame_)
        throw std::invalid_argument("frame indices must be strictly increasing");
    last_step_frame_ = frame;

    std::vector<Detection> dets;
    dets.reserve(detections.size());
    for (const Detection& d : detections)
        if (d.confidence >= cfg_.player_min_conf) dets.push_back(d);

    if (cmc.has_value())
        for (Track& t : tracks_)
            if (t.state_ != TrackState::Removed) t.apply_cmc(*cmc);

    for (Track& t : tracks_)
        if (t.state_ != TrackState::Removed) t.predict(kp_, cfg_.lost_cov_cap);

    std::vector<char> det_matched(dets.size(), 0);
    std::vector<char> track_matched(tracks_.size(), 0);

    auto do_match = [&](int track_idx, int det_idx) {
        const Detection& d = dets[det_idx];
        const double noise_scale =
            cfg_.adaptive_noise ? std::clamp(1.0 - d.confidence, 0.01, 1.0) : 1.0;
        tracks_[track_idx].mark_matched(frame, d, kp_, noise_scale,
                                        cfg_.ema_alpha_base, cfg_.n_init);
        det_matched[det_idx] = 1;
        track_matched[track_idx] = 1;
    };

    auto indices_in_state = [&](TrackState state) {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(tracks_.size()); ++i)
            if (tracks_[i].state_ == state && !track_matched[i]) out.push_back(i);
        return out;
    };

    auto free_detections = [&] {
        std::vector<int> out;
        for (int j = 0; j < static_cast<int>(dets.size()); ++j)
            if (!det_matched[j]) out.push_back(j);
        return out;
    };

    // Fused motion+appearance association over one group of tracks.
    auto fused_stage = [&](const std::vector<int>& group) {
        const auto cands = free_detections();
        if (group.empty() || cands.empty()) return;
        std::vector<assoc::TrackView> views;
        views.reserve(group.size());
        for (int i : group) {
            const Track& t = tracks_[i];
            views.push_back(assoc::TrackView{
                t.kf_.box(), &t.kf_,
                t.ema_.has_value() ? &*t.ema_ : nullptr, &t.history_});
        }
        std::vector<Detection> sub;
        sub.reserve(cands.size());
        for (int j : cands) sub.push_back(dets[j]);
        const auto cost = assoc::build_cost_matrix(
            views, sub, weights_, cfg_.gating_threshold, cfg_.velocity_delta_t);
        const auto solved = assoc::solve_assignment(cost, cfg_.match_threshold);
        for (const auto& [r, c] : solved.matches) do_match(group[r], cands[c]);
    };

    // Stage 1: confirmed tracks.
    fused_stage(indices_in_state(TrackState::Confirmed));

    // Stage 2: observation-centric recovery on last-observation IoU for lost
    // tracks and for confirmed tracks the first stage left unmatched.
    std::vector<int> recovery = indices_in_state(TrackState::Lost);
    for (int i : indices_in_state(TrackState::Confirmed)) recovery.push_back(i);
    std::sort(recovery.begin(), recovery.end());
    const auto ocr_dets = free_detections();
    if (!recovery.empty() && !ocr_dets.empty()) {
        assoc::CostMatrix ocr(recovery.size(), ocr_dets.size());
        for (std::size_t i = 0; i < recovery.size(); ++i) {
            for (std::size_t j = 0; j < ocr_dets.size(); ++j) {
                const double overlap = iou(tracks_[recovery[i]].last_box_,
                                           dets[ocr_dets[j]].bbox);
                ocr(i, j) = overlap > 0.0 ? 1.0 - overlap : kInf;
            }
        }
        const auto solved = assoc::solve_assignment(ocr, 1.0 - cfg_.ocr_min_iou);
        for (const auto& [r, c] : solved.matches)
            do_match(recovery[r], ocr_dets[c]);
    }

    // Stage 3: tentative tracks compete only for what is left.
    fused_stage(indices_in_state(TrackState::Tentative));

    for (int j = 0; j < static_cast<int>(dets.size()); ++j) {
        if (det_matched[j]) continue;
        tracks_.emplace_back(next_id_++, frame, dets[j], kp_, cfg_.history_size,
                             cfg_.n_init > 1);
    }
    track_matched.resize(tracks_.size(), 0);

    for (int i = 0; i < static_cast<int>(tracks_.size()); ++i) {
        Track& t = tracks_[i];
        if (track_matched[i] || t.state_ == TrackState::Removed) continue;
        if (t.last_frame_ == frame) continue;  // spawned this frame
        t.mark_missed(cfg_.max_age);
        if (t.state_ == TrackState::Removed && t.ever_confirmed_)
            finished_.push_back(finalize(t));
    }
    std::erase_if(tracks_,
                  [](const Track& t) { return t.state_ == TrackState::Removed; });

    std::vector<TrackOutput> out;
    for (const Track& t : tracks_)
        if (t.state_ == TrackState::Confirmed && t.time_since_update_ == 0)
            out.push_back(TrackOutput{t.id_, t.last_box_, t.last_conf_});
    return out;
}

Tracklet PlayerTracker::finalize(const Track& t) const {
    Tracklet tl;
    tl.id = t.id_;
    tl.ema_embedding = t.ema_;
    for (const TrackletEntry& e : t.entries_) {
        if (e.backfilled && !cfg_.backfill) continue;
        tl.entries.push_back(e);
    }
    return tl;
}

std::vector<Tracklet> PlayerTracker::tracklets() const {
    std::vector<Tracklet> out = finished_;
    for (const Track& t : tracks_)
        if (t.ever_confirmed_) out.push_back(finalize(t));
    std::erase_if(out, [](const Tracklet& t) { return t.entries.empty(); });
    std::sort(out.begin(), out.end(),
              [](const Tracklet& a, const Tracklet& b) { return a.id < b.id; });
    return out;
}

std::vector<Tracklet> run_sequence(
    const std::map<int, std::vector<Detection>>& frames,
    const std::map<int, motion::AffineMotion>& cmc, const PipelineConfig& cfg) {
    PlayerTracker tracker(cfg);
    if (frames.empty()) return {};
    const int first = frames.begin()->first;
    const int last = frames.rbegin()->first;
    static const std::vector<Detection> kNoDetections;
    for (int f = first; f <= last; ++f) {
        const auto it = frames.find(f);
        const auto& dets = it != frames.end() ? it->second : kNoDetections;
        std::optional<motion::AffineMotion> warp;
        if (const auto cit = cmc.find(f); cit != cmc.end()) warp = cit->second;
        tracker.step(f, dets, warp);
    }
    return tracker.tracklets();
}

}  // namespace pitchtrack
