// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/kalman.hpp"

#include <Eigen/Cholesky>

namespace pitchtrack::motion {

namespace {

Eigen::Matrix<double, 8, 8> motion_matrix() {
    Eigen::Matrix<double, 8, 8> f = Eigen::Matrix<double, 8, 8>::Identity();
    for (int i = 0; i < 4; ++i) f(i, 4 + i) = 1.0;
    return f;
}

// Measurement model picks the first four state components.
Eigen::Matrix<double, 4, 8> observation_matrix() {
    Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
    for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
    return h;
}

MeasVector to_vector(const Measurement& m) {
    return MeasVector(m.cx, m.cy, m.aspect, m.h);
}

MeasMatrix measurement_noise(double h, double noise_scale, const KalmanParams& p) {
    Eigen::Array4d std;
    std << p.std_weight_position * h, p.std_weight_position * h, 1e-1,
        p.std_weight_position * h;
    std *= noise_scale;
    return std.square().matrix().asDiagonal();
}

void symmetrize(StateMatrix& m) { m = 0.5 * (m + m.transpose()); }

}  // namespace

AffineMotion AffineMotion::inverse() const {
    AffineMotion inv;
    inv.linear = linear.inverse();
    inv.translation = -inv.linear * translation;
    inv.frame = frame;
    return inv;
}

KalmanState kf_initiate(const Measurement& m, const KalmanParams& p) {
    KalmanState s;
    s.mean << m.cx, m.cy, m.aspect, m.h, 0.0, 0.0, 0.0, 0.0;

    Eigen::Array<double, 8, 1> std;
    std << 2 * p.std_weight_position * m.h, 2 * p.std_weight_position * m.h,
        1e-2, 2 * p.std_weight_position * m.h,
        10 * p.std_weight_velocity * m.h, 10 * p.std_weight_velocity * m.h,
        1e-5, 10 * p.std_weight_velocity * m.h;
    s.covariance = std.square().matrix().asDiagonal();
    return s;
}

KalmanState kf_predict(const KalmanState& s, const KalmanParams& p) {
    static const auto f = motion_matrix();
    const double h = s.mean(3);

    Eigen::Array<double, 8, 1> std;
    std << p.std_weight_position * h, p.std_weight_position * h, 1e-2,
        p.std_weight_position * h, p.std_weight_velocity * h,
        p.std_weight_velocity * h, 1e-5, p.std_weight_velocity * h;
    const StateMatrix q = std.square().matrix().asDiagonal();

    KalmanState out;
    out.mean = f * s.mean;
    out.covariance = f * s.covariance * f.transpose() + q;
    symmetrize(out.covariance);
    return out;
}

KalmanState kf_update(const KalmanState& s, const Measurement& m,
                      double noise_scale, const KalmanParams& p) {
    if (!std::isfinite(m.cx) || !std::isfinite(m.cy) || !std::isfinite(m.aspect) ||
        !std::isfinite(m.h))
        throw std::invalid_argument("non-finite measurement");
    if (noise_scale <= 0.0)
        throw std::invalid_argument("noise_scale must be positive");

    static const auto hm = observation_matrix();
    const MeasMatrix r = measurement_noise(s.mean(3), noise_scale, p);
    const MeasMatrix innovation_cov = hm * s.covariance * hm.transpose() + r;

    const Eigen::Matrix<double, 8, 4> gain =
        innovation_cov.ldlt().solve(hm * s.covariance).transpose();
    const MeasVector innovation = to_vector(m) - hm * s.mean;

    KalmanState out;
    out.mean = s.mean + gain * innovation;
    // Joseph form keeps the covariance PSD under long random sequences.
    const StateMatrix ikh = StateMatrix::Identity() - gain * hm;
    out.covariance =
        ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
    symmetrize(out.covariance);
    return out;
}

double gating_distance(const KalmanState& s, const Measurement& m,
                       const KalmanParams& p) {
    static const auto hm = observation_matrix();
    const MeasMatrix r = measurement_noise(s.mean(3), 1.0, p);
    const MeasMatrix innovation_cov = hm * s.covariance * hm.transpose() + r;

    Eigen::LLT<MeasMatrix> llt(innovation_cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("singular innovation covariance");

    const MeasVector d = to_vector(m) - hm * s.mean;
    return llt.matrixL().solve(d).squaredNorm();
}

KalmanState apply_cmc(const KalmanState& s, const AffineMotion& a) {
    if (a.degenerate())
        throw std::invalid_argument("degenerate CMC linear part");
    const double scale = std::sqrt(std::abs(a.linear.determinant()));

    StateMatrix t = StateMatrix::Identity();
    t.block<2, 2>(0, 0) = a.linear;
    t(3, 3) = scale;
    t.block<2, 2>(4, 4) = a.linear;
    t(7, 7) = scale;

    KalmanState out;
    out.mean = t * s.mean;
    out.mean(0) += a.translation(0);
    out.mean(1) += a.translation(1);
    out.covariance = t * s.covariance * t.transpose();
    symmetrize(out.covariance);
    return out;
}

Measurement apply_cmc(const Measurement& m, const AffineMotion& a) {
    if (a.degenerate())
        throw std::invalid_argument("degenerate CMC linear part");
    const double scale = std::sqrt(std::abs(a.linear.determinant()));
    const Eigen::Vector2d c =
        a.linear * Eigen::Vector2d(m.cx, m.cy) + a.translation;
    return Measurement{c(0), c(1), m.aspect, m.h * scale};
}

}  // namespace pitchtrack::motion
