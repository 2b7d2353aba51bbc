// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include "pitchtrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pitchtrack::io {

namespace {

[[noreturn]] void line_error(const std::filesystem::path& path, std::size_t line_no,
                             const std::string& what) {
    throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                ": " + what);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::filesystem::path& path,
                    std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v))
            line_error(path, line_no, "bad numeric field '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        line_error(path, line_no, "bad numeric field '" + s + "'");
    } catch (const std::out_of_range&) {
        line_error(path, line_no, "numeric field out of range '" + s + "'");
    }
}

int parse_int(const std::string& s, const std::filesystem::path& path,
              std::size_t line_no) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        line_error(path, line_no, "bad integer field '" + s + "'");
    return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_mot_lines(
    std::vector<std::tuple<int, int, BBox, double>> rows,  // frame, id, box, conf
    const std::filesystem::path& path) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) <
               std::tie(std::get<0>(b), std::get<1>(b));
    });
    auto out = open_output(path);
    char line[256];
    for (const auto& [frame, id, box, conf] : rows) {
        std::snprintf(line, sizeof(line), "%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,-1,-1,-1\n",
                      frame + 1, id, box.x, box.y, box.w, box.h, conf);
        out << line;
    }
}

}  // namespace

MotData parse_mot_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    MotData data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() < 7)
            line_error(path, line_no, "expected at least 7 comma-separated fields");
        const int frame = parse_int(fields[0], path, line_no);
        if (frame < 1) line_error(path, line_no, "frame index must be >= 1");
        MotEntry e;
        e.id = parse_int(fields[1], path, line_no);
        e.box.x = parse_double(fields[2], path, line_no);
        e.box.y = parse_double(fields[3], path, line_no);
        e.box.w = parse_double(fields[4], path, line_no);
        e.box.h = parse_double(fields[5], path, line_no);
        e.confidence = parse_double(fields[6], path, line_no);
        if (e.box.w <= 0.0 || e.box.h <= 0.0) {
            ++data.warnings;  // rejected, not repaired
            continue;
        }
        data.frames[frame - 1].push_back(e);
    }
    return data;
}

void write_mot_file(const std::vector<Tracklet>& tracklets,
                    const std::filesystem::path& path) {
    std::vector<std::tuple<int, int, BBox, double>> rows;
    for (const Tracklet& t : tracklets)
        for (const TrackletEntry& e : t.entries)
            rows.emplace_back(e.frame, t.id, e.box, e.confidence);
    write_mot_lines(std::move(rows), path);
}

void write_mot_file(const ball::BallTrack& track,
                    const std::filesystem::path& path, int track_id) {
    std::vector<std::tuple<int, int, BBox, double>> rows;
    for (const ball::BallEntry& e : track.entries)
        rows.emplace_back(e.frame, track_id, e.box, 1.0);
    write_mot_lines(std::move(rows), path);
}

EmbeddingData parse_embeddings(const std::filesystem::path& path, int dim) {
    auto in = open_input(path);
    EmbeddingData data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != dim + 2)
            line_error(path, line_no,
                       "expected " + std::to_string(dim + 2) + " fields, got " +
                           std::to_string(fields.size()));
        const int frame = parse_int(fields[0], path, line_no);
        if (frame < 1) line_error(path, line_no, "frame index must be >= 1");
        const int index = parse_int(fields[1], path, line_no);
        EmbeddingVector v(dim);
        for (int i = 0; i < dim; ++i)
            v(i) = parse_double(fields[2 + i], path, line_no);
        const double norm = v.norm();
        const double dev = std::abs(norm - 1.0);
        if (dev > 0.1) {
            ++data.warnings;  // corrupt vector, rejected
            continue;
        }
        if (dev > 1e-6) {
            v /= norm;
            ++data.warnings;
        }
        data.by_key[{frame - 1, index}] = std::move(v);
    }
    return data;
}

void write_embeddings(const std::vector<Tracklet>& tracklets,
                      const std::filesystem::path& path) {
    std::vector<std::tuple<int, int, const EmbeddingVector*>> rows;
    for (const Tracklet& t : tracklets)
        for (const TrackletEntry& e : t.entries)
            if (e.embedding.has_value()) rows.emplace_back(e.frame, t.id, &*e.embedding);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) <
               std::tie(std::get<0>(b), std::get<1>(b));
    });
    auto out = open_output(path);
    char buf[64];
    for (const auto& [frame, id, emb] : rows) {
        out << frame + 1 << ',' << id;
        for (Eigen::Index i = 0; i < emb->size(); ++i) {
            std::snprintf(buf, sizeof(buf), ",%.9f", (*emb)(i));
            out << buf;
        }
        out << '\n';
    }
}

void write_embeddings(const EmbeddingData& data, const std::filesystem::path& path) {
    auto out = open_output(path);
    char buf[64];
    for (const auto& [key, emb] : data.by_key) {
        out << key.first + 1 << ',' << key.second;
        for (Eigen::Index i = 0; i < emb.size(); ++i) {
            std::snprintf(buf, sizeof(buf), ",%.9f", emb(i));
            out << buf;
        }
        out << '\n';
    }
}

void write_detections(const std::map<int, std::vector<Detection>>& detections,
                      const std::filesystem::path& path) {
    auto out = open_output(path);
    char line[256];
    for (const auto& [frame, dets] : detections) {
        for (const Detection& d : dets) {
            std::snprintf(line, sizeof(line),
                          "%d,-1,%.6f,%.6f,%.6f,%.6f,%.6f,-1,-1,-1\n", frame + 1,
                          d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h, d.confidence);
            out << line;
        }
    }
}

std::map<int, motion::AffineMotion> parse_cmc(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::map<int, motion::AffineMotion> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 7)
            line_error(path, line_no, "expected 7 fields frame,a11,a12,tx,a21,a22,ty");
        const int frame = parse_int(fields[0], path, line_no);
        if (frame < 1) line_error(path, line_no, "frame index must be >= 1");
        motion::AffineMotion a;
        a.linear(0, 0) = parse_double(fields[1], path, line_no);
        a.linear(0, 1) = parse_double(fields[2], path, line_no);
        a.translation(0) = parse_double(fields[3], path, line_no);
        a.linear(1, 0) = parse_double(fields[4], path, line_no);
        a.linear(1, 1) = parse_double(fields[5], path, line_no);
        a.translation(1) = parse_double(fields[6], path, line_no);
        a.frame = frame - 1;
        if (a.degenerate()) line_error(path, line_no, "degenerate affine");
        out[frame - 1] = a;
    }
    return out;
}

void write_cmc(const std::map<int, motion::AffineMotion>& cmc,
               const std::filesystem::path& path) {
    auto out = open_output(path);
    char line[256];
    for (const auto& [frame, a] : cmc) {
        std::snprintf(line, sizeof(line), "%d,%.9f,%.9f,%.6f,%.9f,%.9f,%.6f\n",
                      frame + 1, a.linear(0, 0), a.linear(0, 1), a.translation(0),
                      a.linear(1, 0), a.linear(1, 1), a.translation(1));
        out << line;
    }
}

std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::string stripped;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) stripped.push_back(c);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos || eq == 0)
            line_error(path, line_no, "expected key=value");
        kv[stripped.substr(0, eq)] = stripped.substr(eq + 1);
    }
    return kv;
}

void apply_config(const std::map<std::string, std::string>& kv,
                  PipelineConfig& cfg) {
    const auto as_double = [](const std::string& s) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
        return v;
    };
    const auto as_int = [&](const std::string& s) {
        const double v = as_double(s);
        if (v != static_cast<int>(v))
            throw std::invalid_argument("expected integer, got '" + s + "'");
        return static_cast<int>(v);
    };
    const auto as_bool = [](const std::string& s) {
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        throw std::invalid_argument("expected boolean, got '" + s + "'");
    };

    for (const auto& [key, value] : kv) {
        if (key == "image_width") cfg.image_width = as_int(value);
        else if (key == "image_height") cfg.image_height = as_int(value);
        else if (key == "embedding_dim") cfg.embedding_dim = as_int(value);
        else if (key == "ball_min_conf") cfg.ball_min_conf = as_double(value);
        else if (key == "ball_window") cfg.ball_window = as_int(value);
        else if (key == "ball_poly_order") cfg.ball_poly_order = as_int(value);
        else if (key == "ball_max_dist") cfg.ball_max_dist = as_double(value);
        else if (key == "kf_std_weight_position") cfg.kf_std_weight_position = as_double(value);
        else if (key == "kf_std_weight_velocity") cfg.kf_std_weight_velocity = as_double(value);
        else if (key == "adaptive_noise") cfg.adaptive_noise = as_bool(value);
        else if (key == "gating_threshold") cfg.gating_threshold = as_double(value);
        else if (key == "velocity_delta_t") cfg.velocity_delta_t = as_int(value);
        else if (key == "history_size") cfg.history_size = as_int(value);
        else if (key == "w_iou") cfg.w_iou = as_double(value);
        else if (key == "w_app") cfg.w_app = as_double(value);
        else if (key == "w_vel") cfg.w_vel = as_double(value);
        else if (key == "match_threshold") cfg.match_threshold = as_double(value);
        else if (key == "ocr_min_iou") cfg.ocr_min_iou = as_double(value);
        else if (key == "n_init") cfg.n_init = as_int(value);
        else if (key == "max_age") cfg.max_age = as_int(value);
        else if (key == "ema_alpha_base") cfg.ema_alpha_base = as_double(value);
        else if (key == "player_min_conf") cfg.player_min_conf = as_double(value);
        else if (key == "backfill") cfg.backfill = as_bool(value);
        else if (key == "lost_cov_cap") cfg.lost_cov_cap = as_double(value);
        else if (key == "boundary_margin") cfg.boundary_margin = as_double(value);
        else if (key == "merge_max_gap") cfg.merge_max_gap = as_int(value);
        else if (key == "sim_threshold") cfg.sim_threshold = as_double(value);
        else if (key == "sim_fraction") cfg.sim_fraction = as_double(value);
        else if (key == "link_max_gap") cfg.link_max_gap = as_int(value);
        else if (key == "link_max_dist") cfg.link_max_dist = as_double(value);
        else if (key == "gsi_tau") cfg.gsi_tau = as_double(value);
        else if (key == "gsi_max_gap") cfg.gsi_max_gap = as_int(value);
        else if (key == "gsi_noise_var") cfg.gsi_noise_var = as_double(value);
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
    cfg.validate();
}

std::map<int, std::vector<Detection>> detections_from_mot(
    const MotData& mot, ObjectClass cls, const EmbeddingData* embeddings) {
    std::map<int, std::vector<Detection>> out;
    for (const auto& [frame, entries] : mot.frames) {
        auto& dets = out[frame];
        for (std::size_t i = 0; i < entries.size(); ++i) {
            Detection d;
            d.frame = frame;
            d.bbox = entries[i].box;
            d.confidence = entries[i].confidence;
            d.cls = cls;
            if (embeddings != nullptr) {
                const auto it =
                    embeddings->by_key.find({frame, static_cast<int>(i)});
                if (it != embeddings->by_key.end()) d.embedding = it->second;
            }
            dets.push_back(std::move(d));
        }
    }
    return out;
}

std::map<int, std::vector<std::pair<int, BBox>>> annotations_from_mot(
    const MotData& mot) {
    std::map<int, std::vector<std::pair<int, BBox>>> out;
    for (const auto& [frame, entries] : mot.frames)
        for (const MotEntry& e : entries)
            if (e.id >= 0) out[frame].emplace_back(e.id, e.box);
    return out;
}

std::vector<Tracklet> tracklets_from_mot(const MotData& mot,
                                         const EmbeddingData* embeddings) {
    std::map<int, Tracklet> by_id;
    for (const auto& [frame, entries] : mot.frames) {
        for (const MotEntry& e : entries) {
            if (e.id < 0) continue;
            Tracklet& t = by_id[e.id];
            t.id = e.id;
            TrackletEntry te;
            te.frame = frame;
            te.box = e.box;
            te.confidence = e.confidence;
            if (embeddings != nullptr) {
                const auto it = embeddings->by_key.find({frame, e.id});
                if (it != embeddings->by_key.end()) te.embedding = it->second;
            }
            t.entries.push_back(std::move(te));
        }
    }
    std::vector<Tracklet> out;
    out.reserve(by_id.size());
    for (auto& [id, t] : by_id) {
        std::sort(t.entries.begin(), t.entries.end(),
                  [](const TrackletEntry& a, const TrackletEntry& b) {
                      return a.frame < b.frame;
                  });
        // EMA snapshot rebuilt from the per-frame embeddings when present.
        EmbeddingVector sum;
        int count = 0;
        for (const TrackletEntry& e : t.entries) {
            if (!e.embedding.has_value()) continue;
            if (count == 0) sum = *e.embedding;
            else sum += *e.embedding;
            ++count;
        }
        if (count > 0 && sum.norm() > 1e-12) t.ema_embedding = sum / sum.norm();
        out.push_back(std::move(t));
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
}

}  // namespace pitchtrack::io
