// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/postprocess.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <tuple>

namespace pitchtrack::post {

namespace {

// RBF signal variance; large against gsi_noise_var so observed structure is
// preserved and only the bridge shape is shrunk toward the local trend.
constexpr double kGsiKernelVariance = 1e4;

struct Series {
    std::vector<double> frames;          // all frames, first..last, step 1
    std::vector<Eigen::Vector4d> values; // cx, cy, w, h per frame
    std::vector<double> confidence;
    std::vector<int> filled;             // indices produced by prefill
};

Eigen::Vector4d entry_values(const TrackletEntry& e) {
    return Eigen::Vector4d(e.box.cx(), e.box.cy(), e.box.w, e.box.h);
}

BBox values_to_box(const Eigen::Vector4d& v) {
    const double w = std::max(v(2), 1e-6);
    const double h = std::max(v(3), 1e-6);
    return BBox{v(0) - 0.5 * w, v(1) - 0.5 * h, w, h};
}

// Linear prefill of every interior gap of one contiguous piece.
Series prefill(const std::vector<TrackletEntry>& entries) {
    Series s;
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        const TrackletEntry& a = entries[i];
        const TrackletEntry& b = entries[i + 1];
        const int gap = b.frame - a.frame;
        s.frames.push_back(a.frame);
        s.values.push_back(entry_values(a));
        s.confidence.push_back(a.confidence);
        const Eigen::Vector4d va = entry_values(a);
        const Eigen::Vector4d vb = entry_values(b);
        for (int k = 1; k < gap; ++k) {
            const double t = static_cast<double>(k) / gap;
            s.frames.push_back(a.frame + k);
            s.values.push_back(va + t * (vb - va));
            s.confidence.push_back(a.confidence + t * (b.confidence - a.confidence));
            s.filled.push_back(static_cast<int>(s.frames.size()) - 1);
        }
    }
    s.frames.push_back(entries.back().frame);
    s.values.push_back(entry_values(entries.back()));
    s.confidence.push_back(entries.back().confidence);
    return s;
}

// GP posterior at the filled frames, one shared factorization per piece.
// Each coordinate is detrended by its least-squares line first so straight
// trajectories are reproduced exactly.
void gp_refine(Series& s, double tau, double noise_var, PostStats* stats) {
    if (s.filled.empty() || s.frames.size() < 3) return;

    const int n = static_cast<int>(s.frames.size());
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double d = s.frames[i] - s.frames[j];
            const double v = kGsiKernelVariance * std::exp(-d * d / (2.0 * tau * tau));
            k(i, j) = v;
            k(j, i) = v;
        }
        k(i, i) += noise_var;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
        if (stats != nullptr) ++stats->gsi_fallbacks;
        return;  // keep the linear prefill
    }

    // Line fit over frame index, per coordinate.
    double sx = 0.0, sxx = 0.0;
    for (double f : s.frames) {
        sx += f;
        sxx += f * f;
    }
    const double det = n * sxx - sx * sx;
    Eigen::Vector4d sy = Eigen::Vector4d::Zero(), sxy = Eigen::Vector4d::Zero();
    for (int i = 0; i < n; ++i) {
        sy += s.values[i];
        sxy += s.frames[i] * s.values[i];
    }
    Eigen::Vector4d slope = Eigen::Vector4d::Zero();
    if (std::abs(det) > 1e-12) slope = (n * sxy - sx * sy) / det;
    const Eigen::Vector4d intercept = (sy - slope * sx) / n;

    Eigen::MatrixXd residuals(n, 4);
    for (int i = 0; i < n; ++i)
        residuals.row(i) =
            (s.values[i] - intercept - slope * s.frames[i]).transpose();
    const Eigen::MatrixXd alpha = llt.solve(residuals);

    for (int idx : s.filled) {
        Eigen::RowVectorXd kstar(n);
        for (int j = 0; j < n; ++j) {
            const double d = s.frames[idx] - s.frames[j];
            kstar(j) = kGsiKernelVariance * std::exp(-d * d / (2.0 * tau * tau));
        }
        const Eigen::Vector4d posterior = (kstar * alpha).transpose();
        s.values[idx] = intercept + slope * s.frames[idx] + posterior;
    }
}

Tracklet series_to_tracklet(const Series& s, int id,
                            const std::vector<TrackletEntry>& original,
                            const std::optional<EmbeddingVector>& ema) {
    Tracklet out;
    out.id = id;
    out.ema_embedding = ema;
    std::size_t orig = 0;
    std::vector<char> is_filled(s.frames.size(), 0);
    for (int idx : s.filled) is_filled[idx] = 1;
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
        TrackletEntry e;
        e.frame = static_cast<int>(s.frames[i]);
        e.box = values_to_box(s.values[i]);
        e.confidence = s.confidence[i];
        if (is_filled[i]) {
            e.interpolated = true;
        } else {
            // carry the original record (embedding, flags, exact box)
            while (orig < original.size() && original[orig].frame < e.frame) ++orig;
            if (orig < original.size() && original[orig].frame == e.frame)
                e = original[orig];
        }
        out.entries.push_back(std::move(e));
    }
    return out;
}

std::optional<EmbeddingVector> recompute_ema(const Tracklet& a, const Tracklet& b) {
    EmbeddingVector sum;
    int count = 0;
    for (const Tracklet* t : {&a, &b}) {
        for (const TrackletEntry& e : t->entries) {
            if (!e.embedding.has_value()) continue;
            if (count == 0)
                sum = *e.embedding;
            else
                sum += *e.embedding;
            ++count;
        }
    }
    if (count > 0) {
        const double norm = sum.norm();
        if (norm > 1e-12) return EmbeddingVector(sum / norm);
    }
    if (a.ema_embedding.has_value()) return a.ema_embedding;
    return b.ema_embedding;
}

Eigen::Vector2d center_of(const TrackletEntry& e) {
    return Eigen::Vector2d(e.box.cx(), e.box.cy());
}

// Constant-velocity forecast from the last <=10-frame window of t.
Eigen::Vector2d extrapolate_center(const Tracklet& t, int to_frame) {
    const TrackletEntry& last = t.entries.back();
    const TrackletEntry* first = &last;
    for (auto it = t.entries.rbegin(); it != t.entries.rend(); ++it) {
        if (last.frame - it->frame > 9) break;
        first = &*it;
    }
    Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
    if (last.frame > first->frame)
        velocity = (center_of(last) - center_of(*first)) / (last.frame - first->frame);
    return center_of(last) + velocity * (to_frame - last.frame);
}

Tracklet merge_pair(const Tracklet& a, const Tracklet& b, int keep_id,
                    const MergeConfig& cfg, PostStats* stats) {
    Tracklet m;
    m.id = keep_id;
    m.entries = a.entries;
    m.entries.insert(m.entries.end(), b.entries.begin(), b.entries.end());
    m.ema_embedding = recompute_ema(a, b);
    // A merge must never re-split, so the fill threshold covers the widest
    // gap of the combined tracklet (interior ones included when the GSI
    // stage was skipped upstream).
    int max_gap = cfg.gsi_max_gap;
    for (std::size_t i = 1; i < m.entries.size(); ++i)
        max_gap = std::max(max_gap, m.entries[i].frame - m.entries[i - 1].frame);
    int unused_next_id = 0;
    auto pieces = gsi_smooth(m, cfg.gsi_tau, max_gap, cfg.gsi_noise_var,
                             unused_next_id, stats);
    return pieces.front();
}

void sort_by_id(std::vector<Tracklet>& ts) {
    std::sort(ts.begin(), ts.end(),
              [](const Tracklet& a, const Tracklet& b) { return a.id < b.id; });
}

}  // namespace

MergeConfig MergeConfig::scaled_from(const PipelineConfig& cfg) {
    MergeConfig m{cfg.boundary_margin, cfg.merge_max_gap, cfg.sim_threshold,
                  cfg.sim_fraction,    cfg.link_max_gap,  cfg.link_max_dist,
                  cfg.gsi_tau,         cfg.gsi_max_gap,   cfg.gsi_noise_var};
    const double scale = cfg.image_height / 1080.0;
    m.boundary_margin *= scale;
    m.link_max_dist *= scale;
    return m;
}

std::vector<Tracklet> gsi_smooth(const Tracklet& t, double tau, int max_gap,
                                 double noise_var, int& next_id,
                                 PostStats* stats) {
    if (t.entries.empty()) throw std::invalid_argument("empty tracklet");

    // Split wherever the gap exceeds max_gap.
    std::vector<std::vector<TrackletEntry>> pieces(1);
    for (const TrackletEntry& e : t.entries) {
        if (!pieces.back().empty() && e.frame - pieces.back().back().frame > max_gap)
            pieces.emplace_back();
        pieces.back().push_back(e);
    }
    if (pieces.size() > 1 && stats != nullptr)
        stats->splits += static_cast<int>(pieces.size()) - 1;

    std::size_t longest = 0;
    for (std::size_t i = 1; i < pieces.size(); ++i)
        if (pieces[i].size() > pieces[longest].size()) longest = i;

    std::vector<Tracklet> out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const int id = i == longest ? t.id : next_id++;
        if (pieces[i].size() < 2) {
            Tracklet single;
            single.id = id;
            single.entries = pieces[i];
            single.ema_embedding = t.ema_embedding;
            out.push_back(std::move(single));
            continue;
        }
        Series s = prefill(pieces[i]);
        gp_refine(s, tau, noise_var, stats);
        out.push_back(series_to_tracklet(s, id, pieces[i], t.ema_embedding));
    }
    return out;
}

std::vector<Tracklet> gsi_smooth_all(const std::vector<Tracklet>& ts,
                                     const MergeConfig& cfg, PostStats* stats) {
    int next_id = 1;
    for (const Tracklet& t : ts) next_id = std::max(next_id, t.id + 1);
    std::vector<Tracklet> out;
    for (const Tracklet& t : ts) {
        auto pieces =
            gsi_smooth(t, cfg.gsi_tau, cfg.gsi_max_gap, cfg.gsi_noise_var,
                       next_id, stats);
        out.insert(out.end(), std::make_move_iterator(pieces.begin()),
                   std::make_move_iterator(pieces.end()));
    }
    sort_by_id(out);
    return out;
}

std::vector<Tracklet> link_tracklets(const std::vector<Tracklet>& ts,
                                     const MergeConfig& cfg, PostStats* stats) {
    std::vector<Tracklet> cur = ts;
    sort_by_id(cur);

    bool merged_any = true;
    while (merged_any) {
        merged_any = false;
        // (distance, earlier id, later id, earlier index, later index)
        std::vector<std::tuple<double, int, int, std::size_t, std::size_t>> cands;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            for (std::size_t j = 0; j < cur.size(); ++j) {
                if (i == j) continue;
                const int gap = cur[j].first_frame() - cur[i].last_frame();
                if (gap <= 0 || gap > cfg.link_max_gap) continue;
                const Eigen::Vector2d forecast =
                    extrapolate_center(cur[i], cur[j].first_frame());
                const double dist =
                    (forecast - center_of(cur[j].entries.front())).norm();
                if (dist <= cfg.link_max_dist)
                    cands.emplace_back(dist, cur[i].id, cur[j].id, i, j);
            }
        }
        std::sort(cands.begin(), cands.end());

        std::vector<char> used(cur.size(), 0);
        std::vector<Tracklet> next;
        std::vector<std::pair<std::size_t, std::size_t>> chosen;
        for (const auto& [dist, ida, idb, i, j] : cands) {
            if (used[i] || used[j]) continue;
            used[i] = used[j] = 1;
            chosen.emplace_back(i, j);
        }
        for (const auto& [i, j] : chosen) {
            next.push_back(merge_pair(cur[i], cur[j], cur[i].id, cfg, stats));
            if (stats != nullptr) ++stats->links;
            merged_any = true;
        }
        for (std::size_t i = 0; i < cur.size(); ++i)
            if (!used[i]) next.push_back(std::move(cur[i]));
        cur = std::move(next);
        sort_by_id(cur);
    }
    return cur;
}

std::vector<Tracklet> boundary_merge(const std::vector<Tracklet>& ts,
                                     int image_width, int image_height,
                                     const MergeConfig& cfg, PostStats* stats) {
    std::vector<Tracklet> cur = ts;
    sort_by_id(cur);
    if (cfg.boundary_margin <= 0.0) return cur;  // stage disabled

    const auto interior = [&](const BBox& b) {
        const double d = std::min(std::min(b.x, b.y),
                                  std::min(image_width - b.right(),
                                           image_height - b.bottom()));
        return d >= cfg.boundary_margin;
    };

    const auto dead_embedding =
        [](const Tracklet& t) -> std::optional<EmbeddingVector> {
        if (t.ema_embedding.has_value()) return t.ema_embedding;
        EmbeddingVector sum;
        int count = 0;
        for (const TrackletEntry& e : t.entries) {
            if (!e.embedding.has_value()) continue;
            if (count == 0)
                sum = *e.embedding;
            else
                sum += *e.embedding;
            ++count;
        }
        if (count == 0) return std::nullopt;
        const double norm = sum.norm();
        if (norm < 1e-12) return std::nullopt;
        return EmbeddingVector(sum / norm);
    };

    bool merged_any = true;
    while (merged_any) {
        merged_any = false;
        // (negated mean similarity, dead id, candidate id, indices)
        std::vector<std::tuple<double, int, int, std::size_t, std::size_t>> cands;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (!interior(cur[i].entries.back().box)) continue;  // edge death
            const auto dead_emb = dead_embedding(cur[i]);
            for (std::size_t j = 0; j < cur.size(); ++j) {
                if (i == j) continue;
                const int gap = cur[j].first_frame() - cur[i].last_frame();
                if (gap <= 0 || gap > cfg.max_gap_frames) continue;
                if (!interior(cur[j].entries.front().box)) continue;  // edge birth

                if (!dead_emb.has_value()) {
                    if (stats != nullptr) ++stats->skipped_pairs;
                    continue;
                }
                double sim_sum = 0.0;
                int n_frames = 0, n_above = 0;
                for (const TrackletEntry& e : cur[j].entries) {
                    const EmbeddingVector* emb = nullptr;
                    if (e.embedding.has_value())
                        emb = &*e.embedding;
                    else if (cur[j].ema_embedding.has_value())
                        emb = &*cur[j].ema_embedding;  // snapshot fallback
                    if (emb == nullptr) continue;
                    const double sim = cosine_similarity(*dead_emb, *emb);
                    sim_sum += sim;
                    ++n_frames;
                    if (sim >= cfg.sim_threshold) ++n_above;
                }
                if (n_frames == 0) {
                    if (stats != nullptr) ++stats->skipped_pairs;
                    continue;
                }
                if (static_cast<double>(n_above) / n_frames < cfg.sim_fraction)
                    continue;
                cands.emplace_back(-sim_sum / n_frames, cur[i].id, cur[j].id, i, j);
            }
        }
        std::sort(cands.begin(), cands.end());

        std::vector<char> used(cur.size(), 0);
        std::vector<std::pair<std::size_t, std::size_t>> chosen;
        for (const auto& [neg_sim, ida, idb, i, j] : cands) {
            if (used[i] || used[j]) continue;
            used[i] = used[j] = 1;
            chosen.emplace_back(i, j);
        }
        std::vector<Tracklet> next;
        for (const auto& [i, j] : chosen) {
            next.push_back(merge_pair(cur[i], cur[j], cur[i].id, cfg, stats));
            if (stats != nullptr) ++stats->boundary_merges;
            merged_any = true;
        }
        for (std::size_t i = 0; i < cur.size(); ++i)
            if (!used[i]) next.push_back(std::move(cur[i]));
        cur = std::move(next);
        sort_by_id(cur);
    }
    return cur;
}

}  // namespace pitchtrack::post
