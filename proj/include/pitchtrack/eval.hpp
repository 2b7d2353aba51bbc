// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include <map>
#include <string>
#include <vector>

#include "pitchtrack/core.hpp"

namespace pitchtrack::eval {

/// Ground truth and predictions of one frame; ids unique per side.
struct FrameAnnotations {
    int frame = 0;
    std::vector<std::pair<int, BBox>> gt;
    std::vector<std::pair<int, BBox>> pred;
};

/// Global gt-id x pred-id association affinity accumulated in the first
/// pass: Jaccard-normalized potential-match mass over the whole sequence.
class AssociationScores {
public:
    AssociationScores() = default;
    AssociationScores(std::map<int, int> gt_index, std::map<int, int> pred_index,
                      Eigen::MatrixXd affinity);

    double operator()(int gt_id, int pred_id) const;

private:
    std::map<int, int> gt_index_, pred_index_;
    Eigen::MatrixXd affinity_;
};

/// Pass 1 over a sequence.
AssociationScores accumulate_scores(const std::vector<FrameAnnotations>& seq);

/// Per-frame bijective matching for one alpha: maximizes the number of pairs
/// with iou >= alpha, then the summed association affinity; remaining ties
/// resolve toward lower (gt id, pred id). Returns only pairs at or above
/// alpha. One assignment solve over a lexicographic score.
std::vector<std::pair<int, int>> match_frame(const FrameAnnotations& fa,
                                             double alpha,
                                             const AssociationScores& scores);

struct AlphaStats {
    double alpha = 0.0;
    long long tp = 0, fn = 0, fp = 0;
    double deta = 0.0, assa = 0.0, hota = 0.0, loca = 0.0;
};

struct EvalReport {
    double hota = 0.0, deta = 0.0, assa = 0.0, loca = 0.0;
    std::vector<AlphaStats> per_alpha;  // 19 thresholds, 0.05 .. 0.95
};

/// The 19 reference thresholds.
std::vector<double> hota_alphas();

/// Two-pass HOTA/DetA/AssA over one sequence (LocA as a bonus column).
EvalReport compute_hota(const std::vector<FrameAnnotations>& seq);

/// Multi-sequence evaluation: counts pool per alpha, association accuracy is
/// TP-weighted, detection accuracy recomputed from pooled counts.
EvalReport compute_hota(const std::vector<std::vector<FrameAnnotations>>& seqs);

/// Pair GT and prediction frame maps into per-frame annotations. Predictions
/// outside the ground-truth frame range are an input error.
std::vector<FrameAnnotations> build_frames(
    const std::map<int, std::vector<std::pair<int, BBox>>>& gt,
    const std::map<int, std::vector<std::pair<int, BBox>>>& pred);

/// Aligned plain-text table with one row per alpha.
std::string format_report(const EvalReport& report);

/// key=value form: HOTA, DetA, AssA, LocA, HOTA_alpha_05 .. HOTA_alpha_95.
std::string format_report_kv(const EvalReport& report);

}  // namespace pitchtrack::eval
