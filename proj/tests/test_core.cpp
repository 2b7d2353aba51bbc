#include <doctest.h>

#include "pitchtrack/core.hpp"
#include "pitchtrack/synth.hpp"

using namespace pitchtrack;

TEST_CASE("iou basic values") {
    const BBox a{0, 0, 10, 10};
    CHECK(iou(a, a) == doctest::Approx(1.0));
    CHECK(iou(BBox{0, 0, 10, 10}, BBox{20, 20, 5, 5}) == 0.0);
    // intersection 1, union 7
    CHECK(iou(BBox{0, 0, 2, 2}, BBox{1, 1, 2, 2}) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("iou symmetry and range over random boxes") {
    synth::Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const BBox a{rng.uniform(0, 100), rng.uniform(0, 100),
                     rng.uniform(0.1, 50), rng.uniform(0.1, 50)};
        const BBox b{rng.uniform(0, 100), rng.uniform(0, 100),
                     rng.uniform(0.1, 50), rng.uniform(0.1, 50)};
        const double ab = iou(a, b);
        CHECK(ab == iou(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(iou(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("bbox/measurement conversion") {
    const Measurement m = bbox_to_measurement(BBox{0, 0, 10, 20});
    CHECK(m.cx == doctest::Approx(5.0));
    CHECK(m.cy == doctest::Approx(10.0));
    CHECK(m.aspect == doctest::Approx(0.5));
    CHECK(m.h == doctest::Approx(20.0));

    const BBox back = measurement_to_bbox(Measurement{5, 10, 0.5, 20});
    CHECK(back.x == doctest::Approx(0.0));
    CHECK(back.y == doctest::Approx(0.0));
    CHECK(back.w == doctest::Approx(10.0));
    CHECK(back.h == doctest::Approx(20.0));
}

TEST_CASE("conversion round trip is a bijection") {
    synth::Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const BBox b{rng.uniform(-500, 500), rng.uniform(-500, 500),
                     rng.uniform(0.01, 300), rng.uniform(0.01, 300)};
        const BBox r = measurement_to_bbox(bbox_to_measurement(b));
        CHECK(std::abs(r.x - b.x) < 1e-9);
        CHECK(std::abs(r.y - b.y) < 1e-9);
        CHECK(std::abs(r.w - b.w) < 1e-9);
        CHECK(std::abs(r.h - b.h) < 1e-9);
    }
}

TEST_CASE("cosine similarity") {
    EmbeddingVector u(2), v(2);
    u << 1, 0;
    v << 0, 1;
    CHECK(cosine_similarity(u, u) == doctest::Approx(1.0));
    CHECK(cosine_similarity(u, v) == doctest::Approx(0.0));

    EmbeddingVector w(2);
    w << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    CHECK(cosine_similarity(w, u) == doctest::Approx(std::sqrt(2.0) / 2.0));

    EmbeddingVector d3(3);
    d3 << 1, 0, 0;
    CHECK_THROWS_AS(cosine_similarity(u, d3), std::invalid_argument);
}

TEST_CASE("cosine of any unit vector with itself is 1") {
    synth::Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        EmbeddingVector v(16);
        for (int k = 0; k < 16; ++k) v(k) = rng.normal();
        v.normalize();
        CHECK(std::abs(cosine_similarity(v, v) - 1.0) < 1e-6);
    }
}

TEST_CASE("config invariants") {
    PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    PipelineConfig even_window = cfg;
    even_window.ball_window = 50;
    CHECK_THROWS_AS(even_window.validate(), std::invalid_argument);

    PipelineConfig tiny_window = cfg;
    tiny_window.ball_window = 3;
    tiny_window.ball_poly_order = 3;
    CHECK_THROWS_AS(tiny_window.validate(), std::invalid_argument);

    PipelineConfig bad_conf = cfg;
    bad_conf.ball_min_conf = 1.5;
    CHECK_THROWS_AS(bad_conf.validate(), std::invalid_argument);

    PipelineConfig bad_dist = cfg;
    bad_dist.ball_max_dist = 0.0;
    CHECK_THROWS_AS(bad_dist.validate(), std::invalid_argument);

    PipelineConfig no_weights = cfg;
    no_weights.w_iou = no_weights.w_app = no_weights.w_vel = 0.0;
    CHECK_THROWS_AS(no_weights.validate(), std::invalid_argument);
}
