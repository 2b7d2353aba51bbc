#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "pitchtrack/observation.hpp"
#include "pitchtrack/synth.hpp"

using namespace pitchtrack;
using namespace pitchtrack::motion;

namespace {

Measurement random_measurement(synth::Rng& rng) {
    return Measurement{rng.uniform(50, 1800), rng.uniform(50, 1000),
                       rng.uniform(0.2, 1.2), rng.uniform(20, 200)};
}

double min_eigenvalue(const StateMatrix& m) {
    Eigen::SelfAdjointEigenSolver<StateMatrix> es(m);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("kf_initiate contract") {
    const KalmanState s = kf_initiate(Measurement{5, 10, 0.5, 20});
    for (int i = 4; i < 8; ++i) CHECK(s.mean(i) == 0.0);
    for (int i = 0; i < 8; ++i) CHECK(s.covariance(i, i) > 0.0);

    // position std 2*(1/20)*100 = 10 -> variance 100
    const KalmanState tall = kf_initiate(Measurement{0, 0, 0.5, 100});
    CHECK(tall.covariance(0, 0) == doctest::Approx(100.0));
    CHECK(tall.covariance(1, 1) == doctest::Approx(100.0));
}

TEST_CASE("kf_predict moves by velocity") {
    KalmanState s = kf_initiate(Measurement{10, 20, 0.5, 40});
    const KalmanState still = kf_predict(s);
    CHECK(still.mean(0) == doctest::Approx(10.0));
    CHECK(still.mean(1) == doctest::Approx(20.0));

    s.mean(4) = 2.0;
    const KalmanState moved = kf_predict(s);
    CHECK(moved.mean(0) == doctest::Approx(12.0));
}

TEST_CASE("kf_predict trace grows, against dense oracle") {
    synth::Rng rng(17);
    Eigen::Matrix<double, 8, 8> f = Eigen::Matrix<double, 8, 8>::Identity();
    for (int i = 0; i < 4; ++i) f(i, 4 + i) = 1.0;

    for (int trial = 0; trial < 100; ++trial) {
        // filter-reachable state: initiate, then a few random steps
        KalmanState s = kf_initiate(random_measurement(rng));
        const int steps = static_cast<int>(rng.uniform(0, 6));
        for (int k = 0; k < steps; ++k) {
            s = kf_predict(s);
            if (rng.uniform() < 0.7) s = kf_update(s, random_measurement(rng));
        }
        const KalmanState next = kf_predict(s);
        CHECK(next.covariance.trace() > s.covariance.trace());

        const auto fpf = oracles::dense_fpf(f, s.covariance);
        // predicted covariance equals F P F^T + Q; Q has positive diagonal
        const StateMatrix q = next.covariance - fpf;
        for (int i = 0; i < 8; ++i) CHECK(q(i, i) > 0.0);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                if (i != j) CHECK(std::abs(q(i, j)) < 1e-9);
    }
}

TEST_CASE("kf_update zero innovation leaves the mean") {
    KalmanState s = kf_initiate(Measurement{100, 50, 0.6, 80});
    s = kf_predict(s);
    const KalmanState u = kf_update(s, s.projected());
    for (int i = 0; i < 8; ++i) CHECK(std::abs(u.mean(i) - s.mean(i)) < 1e-9);
    CHECK(u.covariance(0, 0) < s.covariance(0, 0));
    CHECK(u.covariance(1, 1) < s.covariance(1, 1));
}

TEST_CASE("kf_update matches scalar Bayesian fusion on decoupled cx") {
    // Diagonal covariance decouples cx from every other component, so the
    // update must equal the textbook 1-D fusion.
    KalmanState s = kf_initiate(Measurement{100, 50, 0.6, 80});
    s.covariance = StateMatrix::Identity() * 25.0;

    const double noise_scale = 0.7;
    const Measurement m{130, 50, 0.6, 80};
    const KalmanState u = kf_update(s, m, noise_scale);

    const double meas_std = noise_scale * (1.0 / 20.0) * 80.0;
    const double expect =
        oracles::scalar_fusion_mean(100.0, 25.0, 130.0, meas_std * meas_std);
    CHECK(std::abs(u.mean(0) - expect) < 1e-9);
    const double expect_var =
        oracles::scalar_fusion_var(25.0, meas_std * meas_std);
    CHECK(std::abs(u.covariance(0, 0) - expect_var) < 1e-9);
}

TEST_CASE("kf_update rejects bad input") {
    KalmanState s = kf_initiate(Measurement{1, 1, 1, 1});
    CHECK_THROWS_AS(
        kf_update(s, Measurement{std::nan(""), 0, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(kf_update(s, Measurement{1, 1, 1, 1}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("gating distance") {
    KalmanState s = kf_initiate(Measurement{0, 0, 0.5, 1.0});
    CHECK(gating_distance(s, s.projected()) == doctest::Approx(0.0));

    // Craft S = I: project() adds R with stds (h/20, h/20, 0.1, h/20); choose
    // P diagonal so HPH^T + R is the identity.
    KalmanState crafted;
    crafted.mean << 0, 0, 0.5, 1.0, 0, 0, 0, 0;
    Eigen::Array<double, 8, 1> d;
    const double pos_var = 1.0 - 0.0025;  // 1 - (h/20)^2 with h=1
    d << pos_var, pos_var, 1.0 - 0.01, pos_var, 1, 1, 1, 1;
    crafted.covariance = d.matrix().asDiagonal();
    const double one =
        gating_distance(crafted, Measurement{1.0, 0, 0.5, 1.0});
    CHECK(one == doctest::Approx(1.0));
    const double four =
        gating_distance(crafted, Measurement{2.0, 0, 0.5, 1.0});
    CHECK(four == doctest::Approx(4.0 * one));
}

TEST_CASE("apply_cmc") {
    KalmanState s = kf_initiate(Measurement{100, 200, 0.5, 50});
    s.mean(4) = 3.0;
    s.mean(5) = -1.0;

    AffineMotion identity;
    const KalmanState same = apply_cmc(s, identity);
    CHECK((same.mean - s.mean).norm() < 1e-12);

    AffineMotion shift;
    shift.translation << 3.0, -2.0;
    const KalmanState moved = apply_cmc(s, shift);
    CHECK(moved.mean(0) == doctest::Approx(103.0));
    CHECK(moved.mean(1) == doctest::Approx(198.0));
    CHECK(moved.mean(4) == doctest::Approx(3.0));
    CHECK(moved.mean(5) == doctest::Approx(-1.0));
    CHECK(moved.mean(3) == doctest::Approx(50.0));

    AffineMotion zoom;
    zoom.linear = 2.0 * Eigen::Matrix2d::Identity();
    zoom.translation << 10.0, 0.0;
    const KalmanState scaled = apply_cmc(s, zoom);
    CHECK(scaled.mean(0) == doctest::Approx(210.0));
    CHECK(scaled.mean(3) == doctest::Approx(100.0));
    CHECK(scaled.mean(2) == doctest::Approx(0.5));

    AffineMotion degenerate;
    degenerate.linear.setZero();
    CHECK_THROWS_AS(apply_cmc(s, degenerate), std::invalid_argument);
}

TEST_CASE("apply_cmc inverse restores the state") {
    synth::Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        KalmanState s = kf_initiate(random_measurement(rng));
        s.mean(4) = rng.uniform(-5, 5);
        s.mean(5) = rng.uniform(-5, 5);
        AffineMotion a;
        a.linear << rng.uniform(0.8, 1.2), rng.uniform(-0.1, 0.1),
            rng.uniform(-0.1, 0.1), rng.uniform(0.8, 1.2);
        a.translation << rng.uniform(-20, 20), rng.uniform(-20, 20);
        const KalmanState back = apply_cmc(apply_cmc(s, a), a.inverse());
        CHECK((back.mean - s.mean).norm() < 1e-6);
        CHECK((back.covariance - s.covariance).norm() < 1e-6);
    }
}

TEST_CASE("velocity_direction_cost") {
    ObservationHistory hist;
    const Measurement candidate{20, 0, 0.5, 10};
    CHECK(velocity_direction_cost(hist, candidate) == doctest::Approx(0.5));

    hist.push(0, Measurement{0, 0, 0.5, 10});
    hist.push(1, Measurement{2, 0, 0.5, 10});
    // spans only 1 frame < delta_t=3
    CHECK(velocity_direction_cost(hist, candidate) == doctest::Approx(0.5));

    hist.push(4, Measurement{8, 0, 0.5, 10});
    // history direction +x; candidate straight ahead
    CHECK(velocity_direction_cost(hist, Measurement{12, 0, 0.5, 10}) ==
          doctest::Approx(0.0));
    // opposite
    CHECK(velocity_direction_cost(hist, Measurement{4, 0, 0.5, 10}) ==
          doctest::Approx(1.0));
    // perpendicular
    CHECK(velocity_direction_cost(hist, Measurement{8, 5, 0.5, 10}) ==
          doctest::Approx(0.5));
    // zero-length candidate direction
    CHECK(velocity_direction_cost(hist, Measurement{8, 0, 0.5, 10}) ==
          doctest::Approx(0.5));
}

TEST_CASE("velocity_direction_cost is scale invariant") {
    synth::Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        ObservationHistory a, b;
        const double scale = rng.uniform(0.1, 50.0);
        double x = rng.uniform(-10, 10), y = rng.uniform(-10, 10);
        for (int f = 0; f <= 5; ++f) {
            x += rng.uniform(-3, 3);
            y += rng.uniform(-3, 3);
            a.push(f, Measurement{x, y, 0.5, 10});
            b.push(f, Measurement{scale * x, scale * y, 0.5, 10});
        }
        const Measurement cand{x + rng.uniform(-5, 5), y + rng.uniform(-5, 5),
                               0.5, 10};
        const Measurement cand_scaled{scale * cand.cx, scale * cand.cy, 0.5, 10};
        CHECK(velocity_direction_cost(a, cand) ==
              doctest::Approx(velocity_direction_cost(b, cand_scaled)));
    }
}

TEST_CASE("observation history rejects out-of-order frames") {
    ObservationHistory hist;
    hist.push(3, Measurement{0, 0, 1, 1});
    CHECK_THROWS_AS(hist.push(3, Measurement{1, 1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(hist.push(2, Measurement{1, 1, 1, 1}), std::invalid_argument);
}

TEST_CASE("oru_reupdate") {
    KalmanState s = kf_initiate(Measurement{0, 0, 0.5, 40});
    const KalmanState same = oru_reupdate(s, {});
    CHECK((same.mean - s.mean).norm() == 0.0);

    // Linear motion with a converged filter; one virtual measurement
    // bridges the single missing frame.
    KalmanState track = kf_initiate(Measurement{0, 0, 0.5, 40});
    for (int f = 1; f <= 30; ++f)
        track = kf_update(kf_predict(track), Measurement{f * 4.0, 0, 0.5, 40});

    const Measurement last{30 * 4.0, 0, 0.5, 40};
    const Measurement reassoc{32 * 4.0, 0, 0.5, 40};
    const auto gap = interpolate_gap(last, reassoc, 1);
    REQUIRE(gap.size() == 1);
    CHECK(gap[0].cx == doctest::Approx(124.0));

    const KalmanState replayed = oru_reupdate(track, gap);
    CHECK(std::abs(replayed.mean(0) - 124.0) < 0.1);

    // Re-update shrinks the gating distance to the re-associating box.
    synth::Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const double v = rng.uniform(-6, 6);
        KalmanState live = kf_initiate(Measurement{0, 0, 0.5, 60});
        for (int f = 1; f <= 6; ++f)
            live = kf_update(kf_predict(live), Measurement{f * v, 0, 0.5, 60});
        const KalmanState at_last = live;
        const int gap_len = 2 + static_cast<int>(rng.uniform(0, 4));
        for (int k = 0; k < gap_len + 1; ++k) live = kf_predict(live);

        const Measurement re{(7.0 + gap_len) * v, 0, 0.5, 60};
        const double before = gating_distance(live, re);
        const auto virt =
            interpolate_gap(Measurement{6 * v, 0, 0.5, 60}, re, gap_len);
        const KalmanState after = kf_predict(oru_reupdate(at_last, virt));
        CHECK(gating_distance(after, re) <= before);
    }
}

TEST_CASE("covariance stays symmetric PSD through random sequences") {
    synth::Rng rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        KalmanState s = kf_initiate(random_measurement(rng));
        for (int step = 0; step < 200; ++step) {
            const double roll = rng.uniform();
            if (roll < 0.45) {
                s = kf_predict(s);
            } else if (roll < 0.8) {
                s = kf_update(s, random_measurement(rng), rng.uniform(0.05, 1.0));
            } else {
                AffineMotion a;
                a.linear << rng.uniform(0.9, 1.1), rng.uniform(-0.05, 0.05),
                    rng.uniform(-0.05, 0.05), rng.uniform(0.9, 1.1);
                a.translation << rng.uniform(-10, 10), rng.uniform(-10, 10);
                s = apply_cmc(s, a);
            }
            CHECK((s.covariance - s.covariance.transpose()).norm() < 1e-9);
            CHECK(min_eigenvalue(s.covariance) >= -1e-8);
        }
    }
}

TEST_CASE("repeated identical measurements converge") {
    const Measurement target{300, 200, 0.5, 80};
    KalmanState s = kf_initiate(Measurement{295, 195, 0.6, 70});
    for (int i = 0; i < 50; ++i) s = kf_update(kf_predict(s), target);
    CHECK(std::abs(s.mean(0) - target.cx) < 1e-3);
    CHECK(std::abs(s.mean(1) - target.cy) < 1e-3);
}
