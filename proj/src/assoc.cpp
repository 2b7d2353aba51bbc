// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/assoc.hpp"

#include <algorithm>
#include <limits>

namespace pitchtrack::assoc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CostMatrix build_cost_matrix(std::span<const TrackView> tracks,
                             std::span<const Detection> detections,
                             const AssociationWeights& weights,
                             double gating_threshold, int velocity_delta_t) {
    CostMatrix cost(tracks.size(), detections.size());
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
        const TrackView& track = tracks[i];
        for (Eigen::Index j = 0; j < cost.cols(); ++j) {
            const Detection& det = detections[j];
            const double overlap = iou(track.predicted_box, det.bbox);
            if (weights.w_iou > 0.0 && overlap <= 0.0) {
                cost(i, j) = kInf;
                continue;
            }

            const Measurement m = bbox_to_measurement(det.bbox);
            double maha;
            try {
                maha = gating_distance(*track.state, m);
            } catch (const std::runtime_error&) {
                cost(i, j) = kInf;  // singular innovation: treat as gated
                continue;
            }
            if (maha > gating_threshold) {
                cost(i, j) = kInf;
                continue;
            }

            double appearance = 0.5;  // neutral when either side lacks an embedding
            if (track.embedding != nullptr && det.embedding.has_value())
                appearance =
                    0.5 * (1.0 - cosine_similarity(*track.embedding, *det.embedding));

            const double velocity =
                velocity_direction_cost(*track.history, m, velocity_delta_t);

            cost(i, j) = weights.w_iou * (1.0 - overlap) +
                         weights.w_app * appearance + weights.w_vel * velocity;
        }
    }
    return cost;
}

Assignment solve_assignment(const CostMatrix& cost, double max_cost) {
    Assignment out;
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (rows == 0 || cols == 0) {
        for (int i = 0; i < rows; ++i) out.unmatched_rows.push_back(i);
        for (int j = 0; j < cols; ++j) out.unmatched_cols.push_back(j);
        return out;
    }

    // Forbidden pairs become a uniform surrogate larger than any feasible
    // assignment total, so the solver only uses them when forced; such
    // matches are dissolved below.
    double max_finite = 0.0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (std::isfinite(cost(i, j)))
                max_finite = std::max(max_finite, std::abs(cost(i, j)));
    const double big = (max_finite + 1.0) * (std::min(rows, cols) + 1);

    const int n = std::max(rows, cols);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);  // zero-padded square
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            c(i, j) = std::isfinite(cost(i, j)) ? cost(i, j) : big;

    // Shortest augmenting path assignment with dual potentials (1-indexed).
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> row_of_col(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        row_of_col[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = row_of_col[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[j0] != 0);
        do {
            const int j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> col_of_row(rows, -1);
    for (int j = 1; j <= n; ++j) {
        const int i = row_of_col[j] - 1;
        if (i >= 0 && i < rows && j - 1 < cols) col_of_row[i] = j - 1;
    }

    std::vector<char> col_matched(cols, 0);
    for (int i = 0; i < rows; ++i) {
        const int j = col_of_row[i];
        if (j >= 0 && std::isfinite(cost(i, j)) && cost(i, j) <= max_cost) {
            out.matches.emplace_back(i, j);
            col_matched[j] = 1;
        } else {
            out.unmatched_rows.push_back(i);
        }
    }
    for (int j = 0; j < cols; ++j)
        if (!col_matched[j]) out.unmatched_cols.push_back(j);
    return out;
}

}  // namespace pitchtrack::assoc
