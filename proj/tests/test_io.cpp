#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pitchtrack/io.hpp"

using namespace pitchtrack;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pitchtrack_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int counter() {
        static int n = 0;
        return n++;
    }
    fs::path file(const std::string& name) const { return path / name; }
};

void put(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("parse_mot_file") {
    TempDir dir;
    const auto p = dir.file("det.txt");

    SUBCASE("detection and gt lines") {
        put(p,
            "1,-1,100,200,30,60,0.9,-1,-1,-1\n"
            "1,7,0,0,10,10,1,-1,-1,-1\n");
        const io::MotData d = io::parse_mot_file(p);
        REQUIRE(d.frames.size() == 1);
        REQUIRE(d.frames.at(0).size() == 2);  // frame 1 -> internal 0
        CHECK(d.frames.at(0)[0].id == -1);
        CHECK(d.frames.at(0)[0].box.x == doctest::Approx(100));
        CHECK(d.frames.at(0)[0].box.h == doctest::Approx(60));
        CHECK(d.frames.at(0)[0].confidence == doctest::Approx(0.9));
        CHECK(d.frames.at(0)[1].id == 7);
        CHECK(d.warnings == 0);
    }

    SUBCASE("non-positive box is rejected with a warning") {
        put(p, "1,-1,0,0,-5,10,0.9,-1,-1,-1\n");
        const io::MotData d = io::parse_mot_file(p);
        CHECK(d.frames.empty());
        CHECK(d.warnings == 1);
    }

    SUBCASE("malformed line errors with its number") {
        put(p, "1,-1,100,200,30,60,0.9,-1,-1,-1\nnot,a,line\n");
        try {
            io::parse_mot_file(p);
            FAIL("expected throw");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }

    SUBCASE("frame zero is malformed") {
        put(p, "0,-1,1,1,1,1,0.5,-1,-1,-1\n");
        CHECK_THROWS_AS(io::parse_mot_file(p), std::invalid_argument);
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(io::parse_mot_file(dir.file("nope.txt")),
                        std::invalid_argument);
    }
}

TEST_CASE("mot write/parse round trip") {
    TempDir dir;
    Tracklet t1, t2;
    t1.id = 2;
    t1.entries.push_back(TrackletEntry{0, BBox{10.5, 20.25, 30, 60}, 0.875});
    t1.entries.push_back(TrackletEntry{1, BBox{12, 21, 30, 60}, 0.75});
    t2.id = 1;
    t2.entries.push_back(TrackletEntry{0, BBox{500, 300, 25, 55}, 1.0});

    const auto p1 = dir.file("a.txt");
    io::write_mot_file({t1, t2}, p1);

    // lower id first within a frame
    std::ifstream in(p1);
    std::string first_line;
    std::getline(in, first_line);
    CHECK(first_line.rfind("1,1,", 0) == 0);

    // write o parse o write is a fixed point
    const io::MotData parsed = io::parse_mot_file(p1);
    const auto p2 = dir.file("b.txt");
    io::write_mot_file(io::tracklets_from_mot(parsed), p2);
    CHECK(slurp(p1) == slurp(p2));

    // empty set -> empty file
    const auto p3 = dir.file("c.txt");
    io::write_mot_file(std::vector<Tracklet>{}, p3);
    CHECK(slurp(p3).empty());
}

TEST_CASE("parse_embeddings") {
    TempDir dir;
    const auto p = dir.file("emb.txt");

    SUBCASE("unit vector is stored as-is") {
        put(p, "1,0,1,0,0,0\n");
        const io::EmbeddingData d = io::parse_embeddings(p, 4);
        REQUIRE(d.by_key.size() == 1);
        CHECK(d.warnings == 0);
        CHECK(d.by_key.at({0, 0})(0) == 1.0);
    }

    SUBCASE("norm 1.05 is renormalized with a warning") {
        put(p, "1,0,1.05,0,0,0\n");
        const io::EmbeddingData d = io::parse_embeddings(p, 4);
        REQUIRE(d.by_key.size() == 1);
        CHECK(d.warnings == 1);
        CHECK(d.by_key.at({0, 0}).norm() == doctest::Approx(1.0));
    }

    SUBCASE("zero norm is rejected") {
        put(p, "1,0,0,0,0,0\n1,1,0,1,0,0\n");
        const io::EmbeddingData d = io::parse_embeddings(p, 4);
        CHECK(d.by_key.size() == 1);
        CHECK(d.warnings == 1);
        CHECK(d.by_key.contains({0, 1}));
    }

    SUBCASE("wrong component count errors with the line number") {
        put(p, "1,0,1,0,0\n");
        try {
            io::parse_embeddings(p, 4);
            FAIL("expected throw");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(":1") != std::string::npos);
        }
    }
}

TEST_CASE("cmc parse and write") {
    TempDir dir;
    const auto p = dir.file("cmc.txt");
    put(p, "2,1,0,-2.5,0,1,0\n");
    const auto cmc = io::parse_cmc(p);
    REQUIRE(cmc.size() == 1);
    CHECK(cmc.at(1).translation(0) == doctest::Approx(-2.5));
    CHECK(cmc.at(1).linear.isIdentity(1e-12));

    const auto p2 = dir.file("cmc2.txt");
    io::write_cmc(cmc, p2);
    const auto again = io::parse_cmc(p2);
    CHECK(again.at(1).translation(0) == doctest::Approx(-2.5));

    put(p, "1,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(io::parse_cmc(p), std::invalid_argument);
}

TEST_CASE("config file") {
    TempDir dir;
    const auto p = dir.file("cfg.txt");
    put(p,
        "# comment\n"
        "ball_window = 31\n"
        "w_app=2.0\n"
        "backfill=false\n");
    PipelineConfig cfg;
    io::apply_config(io::parse_kv_file(p), cfg);
    CHECK(cfg.ball_window == 31);
    CHECK(cfg.w_app == doctest::Approx(2.0));
    CHECK_FALSE(cfg.backfill);

    put(p, "no_such_key=1\n");
    PipelineConfig other;
    CHECK_THROWS_AS(io::apply_config(io::parse_kv_file(p), other),
                    std::invalid_argument);

    put(p, "ball_window=50\n");
    PipelineConfig invalid;
    CHECK_THROWS_AS(io::apply_config(io::parse_kv_file(p), invalid),
                    std::invalid_argument);
}

TEST_CASE("detections and annotations views") {
    TempDir dir;
    const auto p = dir.file("mixed.txt");
    put(p,
        "1,-1,10,10,5,5,0.7,-1,-1,-1\n"
        "1,-1,50,50,5,5,0.8,-1,-1,-1\n"
        "2,3,70,70,5,5,1,-1,-1,-1\n");
    const io::MotData mot = io::parse_mot_file(p);

    const auto embp = dir.file("emb.txt");
    put(embp, "1,1,0,1,0\n");
    const io::EmbeddingData embs = io::parse_embeddings(embp, 3);

    const auto dets = io::detections_from_mot(mot, ObjectClass::Player, &embs);
    REQUIRE(dets.at(0).size() == 2);
    CHECK_FALSE(dets.at(0)[0].embedding.has_value());
    REQUIRE(dets.at(0)[1].embedding.has_value());
    CHECK((*dets.at(0)[1].embedding)(1) == 1.0);

    const auto anns = io::annotations_from_mot(mot);
    CHECK(anns.size() == 1);  // only the id>=0 line
    CHECK(anns.at(1)[0].first == 3);
}
