// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pitchtrack::synth {

std::uint64_t Rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

int Rng::poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform();
    } while (p > limit);
    return k - 1;
}

void SynthScenario::validate() const {
    if (duration < 1) throw std::invalid_argument("duration must be >= 1");
    if (num_players < 0) throw std::invalid_argument("num_players must be >= 0");
    if (detection_dropout < 0.0 || detection_dropout > 1.0)
        throw std::invalid_argument("detection_dropout must be in [0,1]");
    if (clutter_rate < 0.0) throw std::invalid_argument("clutter_rate must be >= 0");
    if (image_width <= 0 || image_height <= 0)
        throw std::invalid_argument("image dimensions must be positive");
    if (embedding_dim <= 0) throw std::invalid_argument("embedding_dim must be positive");
    if (split_gap < 1) throw std::invalid_argument("split_gap must be >= 1");
    for (const auto& [id, frame] : split_events) {
        if (id < 1 || id > num_players)
            throw std::invalid_argument("split event references unknown player");
        if (frame < 0 || frame >= duration)
            throw std::invalid_argument("split event frame out of range");
    }
}

namespace {

EmbeddingVector random_unit(Rng& rng, int dim) {
    EmbeddingVector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.normal();
    const double n = v.norm();
    return n > 1e-12 ? EmbeddingVector(v / n) : random_unit(rng, dim);
}

EmbeddingVector noisy_embedding(Rng& rng, const EmbeddingVector& identity,
                                double sigma) {
    EmbeddingVector v = identity;
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += sigma * rng.normal();
    const double n = v.norm();
    return n > 1e-12 ? EmbeddingVector(v / n) : identity;
}

struct PlayerSim {
    double w, h;
    Eigen::Vector2d pos, vel;
    int next_turn;
    EmbeddingVector identity;
};

void reflect(double& x, double& v, double lo, double hi) {
    if (x < lo) {
        x = 2.0 * lo - x;
        v = -v;
    } else if (x > hi) {
        x = 2.0 * hi - x;
        v = -v;
    }
}

Eigen::Vector2d random_velocity(Rng& rng, double lo, double hi) {
    const double speed = rng.uniform(lo, hi);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return Eigen::Vector2d(speed * std::cos(angle), speed * std::sin(angle));
}

}  // namespace

GeneratedSequence generate(const SynthScenario& sc) {
    sc.validate();
    // Paths and observation noise draw from separate streams so that
    // toggling dropout, clutter or split events never changes the ground
    // truth (split_events must be GT-preserving).
    Rng path_rng(sc.seed);
    Rng noise_rng(sc.seed ^ 0x6A09E667F3BCC909ULL);
    GeneratedSequence out;
    out.image_width = sc.image_width;
    out.image_height = sc.image_height;
    out.embedding_dim = sc.embedding_dim;

    const double w = sc.image_width, h = sc.image_height;

    std::vector<PlayerSim> players;
    players.reserve(sc.num_players);
    for (int k = 0; k < sc.num_players; ++k) {
        PlayerSim p;
        p.w = path_rng.uniform(26.0, 40.0);
        p.h = path_rng.uniform(62.0, 92.0);
        const double mx = 0.5 * p.w + 2.0, my = 0.5 * p.h + 2.0;
        p.pos = Eigen::Vector2d(path_rng.uniform(mx, w - mx), path_rng.uniform(my, h - my));
        p.vel = random_velocity(path_rng, 1.5, 4.5);
        p.next_turn = static_cast<int>(path_rng.uniform(80.0, 160.0));
        p.identity = random_unit(noise_rng, sc.embedding_dim);
        players.push_back(std::move(p));
        out.gt_players.push_back(Tracklet{k + 1, {}, players.back().identity});
    }

    // Ball state
    Eigen::Vector2d ball_pos(0, 0), ball_vel(0, 0);
    int next_kick = 0;
    const double ball_size = 14.0, gravity = 0.25;
    if (sc.ball) {
        ball_pos = Eigen::Vector2d(path_rng.uniform(0.3 * w, 0.7 * w),
                                   path_rng.uniform(0.3 * h, 0.6 * h));
        ball_vel = Eigen::Vector2d(path_rng.uniform(-8.0, 8.0),
                                   path_rng.uniform(-10.0, 0.0));
        next_kick = static_cast<int>(path_rng.uniform(50.0, 120.0));
    }

    const auto in_split = [&](int player_id, int frame) {
        for (const auto& [id, f0] : sc.split_events)
            if (id == player_id && frame >= f0 && frame < f0 + sc.split_gap)
                return true;
        return false;
    };

    for (int frame = 0; frame < sc.duration; ++frame) {
        auto& frame_dets = out.detections[frame];

        for (int k = 0; k < sc.num_players; ++k) {
            PlayerSim& p = players[k];
            const BBox gt_box{p.pos.x() - 0.5 * p.w, p.pos.y() - 0.5 * p.h, p.w, p.h};
            out.gt_players[k].entries.push_back(
                TrackletEntry{frame, gt_box, 1.0, std::nullopt, false, false});

            const bool dropped = noise_rng.uniform() < sc.detection_dropout;
            if (!dropped && !in_split(k + 1, frame)) {
                const double cx = p.pos.x() + sc.det_noise_px * noise_rng.normal();
                const double cy = p.pos.y() + sc.det_noise_px * noise_rng.normal();
                const double dw = std::max(
                    4.0, p.w * (1.0 + sc.size_noise_frac * noise_rng.normal()));
                const double dh = std::max(
                    4.0, p.h * (1.0 + sc.size_noise_frac * noise_rng.normal()));
                Detection d;
                d.frame = frame;
                d.bbox = BBox{cx - 0.5 * dw, cy - 0.5 * dh, dw, dh};
                d.confidence = noise_rng.uniform(0.55, 0.99);
                d.cls = ObjectClass::Player;
                d.embedding = noisy_embedding(noise_rng, p.identity,
                                              sc.embedding_noise_sigma);
                frame_dets.push_back(std::move(d));
            }

            // advance path
            if (frame == p.next_turn) {
                p.vel = random_velocity(path_rng, 1.5, 4.5);
                p.next_turn += static_cast<int>(path_rng.uniform(80.0, 160.0));
            }
            p.pos += p.vel;
            const double mx = 0.5 * p.w + 2.0, my = 0.5 * p.h + 2.0;
            reflect(p.pos.x(), p.vel.x(), mx, w - mx);
            reflect(p.pos.y(), p.vel.y(), my, h - my);
        }

        const int n_clutter = noise_rng.poisson(sc.clutter_rate);
        for (int c = 0; c < n_clutter; ++c) {
            Detection d;
            d.frame = frame;
            const double cw = noise_rng.uniform(22.0, 42.0);
            const double ch = noise_rng.uniform(55.0, 90.0);
            const double cx = noise_rng.uniform(30.0, w - 30.0);
            const double cy = noise_rng.uniform(40.0, h - 40.0);
            d.bbox = BBox{cx - 0.5 * cw, cy - 0.5 * ch, cw, ch};
            d.confidence = noise_rng.uniform(0.15, 0.5);
            d.cls = ObjectClass::Player;
            d.embedding = random_unit(noise_rng, sc.embedding_dim);
            frame_dets.push_back(std::move(d));
        }

        for (std::size_t i = 0; i < frame_dets.size(); ++i)
            out.embeddings.by_key[{frame, static_cast<int>(i)}] =
                *frame_dets[i].embedding;

        if (sc.ball) {
            const BBox gt_box{ball_pos.x() - 0.5 * ball_size,
                              ball_pos.y() - 0.5 * ball_size, ball_size, ball_size};
            out.gt_ball.entries.push_back(
                ball::BallEntry{frame, gt_box, ball::BallSource::Detected});

            auto& ball_frame = out.ball_detections[frame];
            if (noise_rng.uniform() >= sc.detection_dropout) {
                const double cx =
                    ball_pos.x() + sc.ball_det_noise_px * noise_rng.normal();
                const double cy =
                    ball_pos.y() + sc.ball_det_noise_px * noise_rng.normal();
                Detection d;
                d.frame = frame;
                d.bbox = BBox{cx - 0.5 * ball_size, cy - 0.5 * ball_size, ball_size,
                              ball_size};
                d.confidence = noise_rng.uniform(0.5, 0.95);
                d.cls = ObjectClass::Ball;
                ball_frame.push_back(std::move(d));
            }
            const int n_ball_clutter = noise_rng.poisson(sc.clutter_rate);
            for (int c = 0; c < n_ball_clutter; ++c) {
                double cx = 0.0, cy = 0.0;
                bool placed = false;
                for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
                    cx = noise_rng.uniform(20.0, w - 20.0);
                    cy = noise_rng.uniform(20.0, h - 20.0);
                    const double dist = std::hypot(cx - ball_pos.x(), cy - ball_pos.y());
                    placed = dist >= sc.clutter_min_dist &&
                             (sc.clutter_max_dist <= 0.0 || dist <= sc.clutter_max_dist);
                }
                if (!placed) continue;
                Detection d;
                d.frame = frame;
                d.bbox = BBox{cx - 0.5 * ball_size, cy - 0.5 * ball_size, ball_size,
                              ball_size};
                d.confidence = noise_rng.uniform(0.05, 0.45);
                d.cls = ObjectClass::Ball;
                ball_frame.push_back(std::move(d));
            }

            // piecewise-parabolic flight
            if (frame == next_kick) {
                ball_vel = Eigen::Vector2d(path_rng.uniform(-8.0, 8.0),
                                           path_rng.uniform(-12.0, -2.0));
                next_kick += static_cast<int>(path_rng.uniform(50.0, 120.0));
            }
            ball_vel.y() += gravity;
            ball_pos += ball_vel;
            reflect(ball_pos.x(), ball_vel.x(), 30.0, w - 30.0);
            if (ball_pos.y() > h - 40.0) {
                ball_pos.y() = 2.0 * (h - 40.0) - ball_pos.y();
                ball_vel.y() = -std::abs(ball_vel.y()) * 0.75;
            } else if (ball_pos.y() < 20.0) {
                ball_pos.y() = 40.0 - ball_pos.y();
                ball_vel.y() = std::abs(ball_vel.y());
            }
        }
    }

    if (sc.camera_pan != 0.0) {
        for (int frame = 1; frame < sc.duration; ++frame) {
            motion::AffineMotion a;
            a.translation = Eigen::Vector2d(-sc.camera_pan, 0.0);
            a.frame = frame;
            out.cmc[frame] = a;
        }
    }
    return out;
}

void write_bundle(const GeneratedSequence& seq, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    io::write_detections(seq.detections, dir / "det.txt");
    io::write_embeddings(seq.embeddings, dir / "emb.txt");
    io::write_mot_file(seq.gt_players, dir / "gt.txt");
    if (!seq.cmc.empty()) io::write_cmc(seq.cmc, dir / "cmc.txt");
    if (!seq.gt_ball.entries.empty()) {
        io::write_detections(seq.ball_detections, dir / "det_ball.txt");
        io::write_mot_file(seq.gt_ball, dir / "gt_ball.txt");
    }
    std::string info;
    info += "image_width=" + std::to_string(seq.image_width) + "\n";
    info += "image_height=" + std::to_string(seq.image_height) + "\n";
    info += "embedding_dim=" + std::to_string(seq.embedding_dim) + "\n";
    info += "frame_rate=25\n";
    io::write_text_file(dir / "seqinfo.txt", info);
}

SynthScenario scenario_from_kv(const std::map<std::string, std::string>& kv) {
    SynthScenario sc;
    const auto as_double = [](const std::string& s) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
        return v;
    };
    const auto as_int = [&](const std::string& s) {
        return static_cast<int>(as_double(s));
    };
    const auto as_bool = [](const std::string& s) {
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        throw std::invalid_argument("expected boolean, got '" + s + "'");
    };

    for (const auto& [key, value] : kv) {
        if (key == "num_players") sc.num_players = as_int(value);
        else if (key == "ball") sc.ball = as_bool(value);
        else if (key == "duration") sc.duration = as_int(value);
        else if (key == "detection_dropout") sc.detection_dropout = as_double(value);
        else if (key == "clutter_rate") sc.clutter_rate = as_double(value);
        else if (key == "embedding_noise_sigma") sc.embedding_noise_sigma = as_double(value);
        else if (key == "camera_pan") sc.camera_pan = as_double(value);
        else if (key == "seed") sc.seed = static_cast<std::uint64_t>(as_double(value));
        else if (key == "image_width") sc.image_width = as_int(value);
        else if (key == "image_height") sc.image_height = as_int(value);
        else if (key == "embedding_dim") sc.embedding_dim = as_int(value);
        else if (key == "det_noise_px") sc.det_noise_px = as_double(value);
        else if (key == "size_noise_frac") sc.size_noise_frac = as_double(value);
        else if (key == "ball_det_noise_px") sc.ball_det_noise_px = as_double(value);
        else if (key == "clutter_min_dist") sc.clutter_min_dist = as_double(value);
        else if (key == "clutter_max_dist") sc.clutter_max_dist = as_double(value);
        else if (key == "split_gap") sc.split_gap = as_int(value);
        else if (key == "split_events") {
            // "id:frame,id:frame", frames 1-based as everywhere on disk
            std::string cur;
            std::vector<std::string> items;
            for (char c : value) {
                if (c == ',') {
                    items.push_back(cur);
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
            if (!cur.empty()) items.push_back(cur);
            for (const std::string& item : items) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw std::invalid_argument("split_events expects id:frame pairs");
                sc.split_events.emplace_back(
                    as_int(item.substr(0, colon)),
                    as_int(item.substr(colon + 1)) - 1);
            }
        }
        else throw std::invalid_argument("unknown scenario key '" + key + "'");
    }
    sc.validate();
    return sc;
}

}  // namespace pitchtrack::synth
