// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#pragma once

#include "pitchtrack/core.hpp"

namespace pitchtrack::motion {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;
using MeasVector = Eigen::Matrix<double, 4, 1>;
using MeasMatrix = Eigen::Matrix<double, 4, 4>;

/// Constant-velocity state over (cx, cy, aspect, h) and their velocities.
struct KalmanState {
    StateVector mean = StateVector::Zero();
    StateMatrix covariance = StateMatrix::Zero();

    Measurement projected() const {
        return Measurement{mean(0), mean(1), mean(2), mean(3)};
    }
    BBox box() const { return measurement_to_bbox(projected()); }
};

/// Noise parameterization, DeepSORT convention: stds proportional to the
/// box height.
struct KalmanParams {
    double std_weight_position = 1.0 / 20.0;
    double std_weight_velocity = 1.0 / 160.0;
};

/// Inter-frame camera transform; maps coordinates of frame-1 into frame.
struct AffineMotion {
    Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();
    int frame = 0;

    bool degenerate() const { return std::abs(linear.determinant()) <= 1e-6; }
    AffineMotion inverse() const;
};

KalmanState kf_initiate(const Measurement& m, const KalmanParams& p = {});

KalmanState kf_predict(const KalmanState& s, const KalmanParams& p = {});

/// Standard correction in measurement space. noise_scale multiplies the
/// measurement stds (NSA-style confidence adaptation); 1 disables it.
KalmanState kf_update(const KalmanState& s, const Measurement& m,
                      double noise_scale = 1.0, const KalmanParams& p = {});

/// Squared Mahalanobis distance of m from the projected state, 4 dof.
/// Throws std::runtime_error when the innovation covariance is singular.
double gating_distance(const KalmanState& s, const Measurement& m,
                       const KalmanParams& p = {});

/// Warp state into the next frame's camera coordinates: position and velocity
/// through the affine (velocity by the linear part), h and v_h scaled by
/// sqrt|det|, aspect unchanged.
KalmanState apply_cmc(const KalmanState& s, const AffineMotion& a);

/// Same warp for a raw measurement (used for stored observations).
Measurement apply_cmc(const Measurement& m, const AffineMotion& a);

/// Chi-square 0.95 quantile at 4 degrees of freedom.
inline constexpr double kGatingThreshold95 = 9.4877;

}  // namespace pitchtrack::motion
