// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pitchtrack/assoc.hpp"

namespace pitchtrack::eval {

namespace {

// Guard so an iou exactly at the threshold counts as a match despite
// floating-point representation of the alphas.
constexpr double kAlphaEps = 1e-12;

void check_unique_ids(const std::vector<std::pair<int, BBox>>& side, int frame,
                      const char* name) {
    std::set<int> seen;
    for (const auto& [id, box] : side)
        if (!seen.insert(id).second)
            throw std::invalid_argument("duplicate " + std::string(name) +
                                        " id in frame " + std::to_string(frame));
}

struct GlobalPass {
    std::map<int, int> gt_index, pred_index;
    Eigen::VectorXd gt_count, pred_count;  // detections per id
    Eigen::MatrixXd affinity;              // Jaccard-normalized alignment
    std::vector<Eigen::MatrixXd> frame_iou;
};

// Pass 1: index ids, count per-id detections, accumulate Jaccard-weighted
// potential matches and turn them into the global alignment score.
GlobalPass global_pass(const std::vector<FrameAnnotations>& seq) {
    GlobalPass gp;
    for (const FrameAnnotations& fa : seq) {
        check_unique_ids(fa.gt, fa.frame, "gt");
        check_unique_ids(fa.pred, fa.frame, "pred");
        for (const auto& [id, box] : fa.gt) gp.gt_index.emplace(id, 0);
        for (const auto& [id, box] : fa.pred) gp.pred_index.emplace(id, 0);
    }
    int g = 0;
    for (auto& [id, slot] : gp.gt_index) slot = g++;
    int p = 0;
    for (auto& [id, slot] : gp.pred_index) slot = p++;

    const int num_gt = static_cast<int>(gp.gt_index.size());
    const int num_pred = static_cast<int>(gp.pred_index.size());
    gp.gt_count = Eigen::VectorXd::Zero(num_gt);
    gp.pred_count = Eigen::VectorXd::Zero(num_pred);
    Eigen::MatrixXd potential = Eigen::MatrixXd::Zero(num_gt, num_pred);

    gp.frame_iou.resize(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        const FrameAnnotations& fa = seq[t];
        Eigen::MatrixXd sim(fa.gt.size(), fa.pred.size());
        for (std::size_t i = 0; i < fa.gt.size(); ++i)
            for (std::size_t j = 0; j < fa.pred.size(); ++j)
                sim(i, j) = iou(fa.gt[i].second, fa.pred[j].second);
        gp.frame_iou[t] = sim;

        const Eigen::VectorXd row_sum = sim.rowwise().sum();
        const Eigen::VectorXd col_sum = sim.colwise().sum();
        for (std::size_t i = 0; i < fa.gt.size(); ++i) {
            gp.gt_count(gp.gt_index.at(fa.gt[i].first)) += 1.0;
            for (std::size_t j = 0; j < fa.pred.size(); ++j) {
                const double denom = row_sum(i) + col_sum(j) - sim(i, j);
                if (denom > 1e-12)
                    potential(gp.gt_index.at(fa.gt[i].first),
                              gp.pred_index.at(fa.pred[j].first)) +=
                        sim(i, j) / denom;
            }
        }
        for (const auto& [id, box] : fa.pred)
            gp.pred_count(gp.pred_index.at(id)) += 1.0;
    }

    gp.affinity = Eigen::MatrixXd::Zero(num_gt, num_pred);
    for (int gi = 0; gi < num_gt; ++gi)
        for (int pj = 0; pj < num_pred; ++pj) {
            const double denom =
                gp.gt_count(gi) + gp.pred_count(pj) - potential(gi, pj);
            if (denom > 1e-12) gp.affinity(gi, pj) = potential(gi, pj) / denom;
        }
    return gp;
}

// Per-alpha accumulators of one sequence.
struct AlphaAccum {
    long long tp = 0, fn = 0, fp = 0;
    double assa_sum = 0.0;  // sum of A(c) over TPs
    double loca_sum = 0.0;  // sum of iou over TPs
};

struct SequenceAccum {
    std::vector<AlphaAccum> alphas;
};

SequenceAccum evaluate_sequence(const std::vector<FrameAnnotations>& seq) {
    const auto alphas = hota_alphas();
    SequenceAccum acc;
    acc.alphas.resize(alphas.size());
    if (seq.empty()) return acc;

    const GlobalPass gp = global_pass(seq);
    const AssociationScores scores(gp.gt_index, gp.pred_index, gp.affinity);

    for (std::size_t a = 0; a < alphas.size(); ++a) {
        AlphaAccum& acc_a = acc.alphas[a];
        Eigen::MatrixXd matches_count =
            Eigen::MatrixXd::Zero(gp.gt_index.size(), gp.pred_index.size());
        for (std::size_t t = 0; t < seq.size(); ++t) {
            const FrameAnnotations& fa = seq[t];
            const auto matched = match_frame(fa, alphas[a], scores);
            const long long m = static_cast<long long>(matched.size());
            acc_a.tp += m;
            acc_a.fn += static_cast<long long>(fa.gt.size()) - m;
            acc_a.fp += static_cast<long long>(fa.pred.size()) - m;
            for (const auto& [gt_id, pred_id] : matched) {
                matches_count(gp.gt_index.at(gt_id), gp.pred_index.at(pred_id)) +=
                    1.0;
                const auto gi = std::find_if(
                    fa.gt.begin(), fa.gt.end(),
                    [id = gt_id](const auto& e) { return e.first == id; });
                const auto pj = std::find_if(
                    fa.pred.begin(), fa.pred.end(),
                    [id = pred_id](const auto& e) { return e.first == id; });
                acc_a.loca_sum +=
                    gp.frame_iou[t](gi - fa.gt.begin(), pj - fa.pred.begin());
            }
        }
        for (int gi = 0; gi < matches_count.rows(); ++gi)
            for (int pj = 0; pj < matches_count.cols(); ++pj) {
                const double mc = matches_count(gi, pj);
                if (mc <= 0.0) continue;
                acc_a.assa_sum +=
                    mc * (mc / (gp.gt_count(gi) + gp.pred_count(pj) - mc));
            }
    }
    return acc;
}

EvalReport finalize(const std::vector<SequenceAccum>& accs) {
    const auto alphas = hota_alphas();
    EvalReport report;
    report.per_alpha.resize(alphas.size());
    double hota_sum = 0.0, deta_sum = 0.0, assa_sum = 0.0, loca_sum = 0.0;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        long long tp = 0, fn = 0, fp = 0;
        double assa_mass = 0.0, loca_mass = 0.0;
        for (const SequenceAccum& acc : accs) {
            tp += acc.alphas[a].tp;
            fn += acc.alphas[a].fn;
            fp += acc.alphas[a].fp;
            assa_mass += acc.alphas[a].assa_sum;
            loca_mass += acc.alphas[a].loca_sum;
        }
        AlphaStats& st = report.per_alpha[a];
        st.alpha = alphas[a];
        st.tp = tp;
        st.fn = fn;
        st.fp = fp;
        const long long det_denom = tp + fn + fp;
        st.deta = det_denom > 0 ? static_cast<double>(tp) / det_denom : 0.0;
        st.assa = tp > 0 ? assa_mass / tp : 0.0;
        st.loca = tp > 0 ? loca_mass / tp : 0.0;
        st.hota = std::sqrt(st.deta * st.assa);
        hota_sum += st.hota;
        deta_sum += st.deta;
        assa_sum += st.assa;
        loca_sum += st.loca;
    }
    const double n = static_cast<double>(alphas.size());
    report.hota = hota_sum / n;
    report.deta = deta_sum / n;
    report.assa = assa_sum / n;
    report.loca = loca_sum / n;
    return report;
}

}  // namespace

AssociationScores::AssociationScores(std::map<int, int> gt_index,
                                     std::map<int, int> pred_index,
                                     Eigen::MatrixXd affinity)
    : gt_index_(std::move(gt_index)),
      pred_index_(std::move(pred_index)),
      affinity_(std::move(affinity)) {}

double AssociationScores::operator()(int gt_id, int pred_id) const {
    const auto g = gt_index_.find(gt_id);
    const auto p = pred_index_.find(pred_id);
    if (g == gt_index_.end() || p == pred_index_.end()) return 0.0;
    return affinity_(g->second, p->second);
}

AssociationScores accumulate_scores(const std::vector<FrameAnnotations>& seq) {
    GlobalPass gp = global_pass(seq);
    return AssociationScores(std::move(gp.gt_index), std::move(gp.pred_index),
                             std::move(gp.affinity));
}

std::vector<std::pair<int, int>> match_frame(const FrameAnnotations& fa,
                                             double alpha,
                                             const AssociationScores& scores) {
    std::vector<std::pair<int, BBox>> gt = fa.gt;
    std::vector<std::pair<int, BBox>> pred = fa.pred;
    std::sort(gt.begin(), gt.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::sort(pred.begin(), pred.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    if (gt.empty() || pred.empty()) return {};

    // A single valid pair outweighs every possible affinity total, making
    // the valid-match count the primary objective.
    const double big = std::min(gt.size(), pred.size()) + 2.0;
    assoc::CostMatrix cost(gt.size(), pred.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
        for (std::size_t j = 0; j < pred.size(); ++j) {
            const double overlap = iou(gt[i].second, pred[j].second);
            if (overlap >= alpha - kAlphaEps)
                cost(i, j) = -(big + scores(gt[i].first, pred[j].first));
            else
                cost(i, j) = 0.0;
        }
    }
    const auto assignment = assoc::solve_assignment(cost, -1.0);

    std::vector<std::pair<int, int>> out;
    out.reserve(assignment.matches.size());
    for (const auto& [r, c] : assignment.matches)
        out.emplace_back(gt[r].first, pred[c].first);
    return out;
}

std::vector<double> hota_alphas() {
    std::vector<double> alphas;
    for (int k = 1; k <= 19; ++k) alphas.push_back(k / 20.0);
    return alphas;
}

EvalReport compute_hota(const std::vector<FrameAnnotations>& seq) {
    return finalize({evaluate_sequence(seq)});
}

EvalReport compute_hota(const std::vector<std::vector<FrameAnnotations>>& seqs) {
    std::vector<SequenceAccum> accs;
    accs.reserve(seqs.size());
    for (const auto& seq : seqs) accs.push_back(evaluate_sequence(seq));
    return finalize(accs);
}

std::vector<FrameAnnotations> build_frames(
    const std::map<int, std::vector<std::pair<int, BBox>>>& gt,
    const std::map<int, std::vector<std::pair<int, BBox>>>& pred) {
    if (gt.empty())
        throw std::invalid_argument("ground truth is empty");
    const int first = gt.begin()->first;
    const int last = gt.rbegin()->first;
    if (!pred.empty() &&
        (pred.begin()->first < first || pred.rbegin()->first > last))
        throw std::invalid_argument(
            "prediction frames fall outside the ground-truth range");

    std::vector<FrameAnnotations> out;
    for (int f = first; f <= last; ++f) {
        FrameAnnotations fa;
        fa.frame = f;
        if (const auto it = gt.find(f); it != gt.end()) fa.gt = it->second;
        if (const auto it = pred.find(f); it != pred.end()) fa.pred = it->second;
        if (!fa.gt.empty() || !fa.pred.empty()) out.push_back(std::move(fa));
    }
    return out;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof(line), "%-7s %10s %10s %10s %10s %8s %8s %8s\n",
                  "alpha", "HOTA", "DetA", "AssA", "LocA", "TP", "FN", "FP");
    os << line;
    for (const AlphaStats& st : report.per_alpha) {
        std::snprintf(line, sizeof(line),
                      "%-7.2f %10.6f %10.6f %10.6f %10.6f %8lld %8lld %8lld\n",
                      st.alpha, st.hota, st.deta, st.assa, st.loca, st.tp, st.fn,
                      st.fp);
        os << line;
    }
    std::snprintf(line, sizeof(line), "%-7s %10.6f %10.6f %10.6f %10.6f\n",
                  "mean", report.hota, report.deta, report.assa, report.loca);
    os << line;
    return os.str();
}

std::string format_report_kv(const EvalReport& report) {
    std::ostringstream os;
    char line[80];
    std::snprintf(line, sizeof(line), "HOTA=%.6f\n", report.hota);
    os << line;
    std::snprintf(line, sizeof(line), "DetA=%.6f\n", report.deta);
    os << line;
    std::snprintf(line, sizeof(line), "AssA=%.6f\n", report.assa);
    os << line;
    std::snprintf(line, sizeof(line), "LocA=%.6f\n", report.loca);
    os << line;
    for (const AlphaStats& st : report.per_alpha) {
        std::snprintf(line, sizeof(line), "HOTA_alpha_%02d=%.6f\n",
                      static_cast<int>(std::lround(st.alpha * 100)), st.hota);
        os << line;
    }
    return os.str();
}

}  // namespace pitchtrack::eval
