// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 pitchtrack contributors

#include <CLI11.hpp>
#include <future>
#include <iostream>
#include <optional>

#include "pitchtrack/eval.hpp"
#include "pitchtrack/postprocess.hpp"
#include "pitchtrack/synth.hpp"
#include "pitchtrack/tracker.hpp"

namespace {

using namespace pitchtrack;

struct ConfigBinding {
    std::string config_path;
    std::vector<std::function<void(PipelineConfig&)>> overrides;

    // File first, then explicitly set flags on top.
    PipelineConfig resolve() const {
        PipelineConfig cfg;
        if (!config_path.empty())
            io::apply_config(io::parse_kv_file(config_path), cfg);
        for (const auto& apply : overrides) apply(cfg);
        cfg.validate();
        return cfg;
    }
};

void add_config_flag(CLI::App* cmd, ConfigBinding& binding) {
    cmd->add_option("--config", binding.config_path,
                    "key=value config file (flags take precedence)");
}

template <typename T>
void bind(CLI::App* cmd, ConfigBinding& binding, const std::string& flag,
          T PipelineConfig::*field, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = cmd->add_option(flag, *value, help);
    binding.overrides.push_back([value, opt, field](PipelineConfig& cfg) {
        if (opt->count() > 0) cfg.*field = *value;
    });
}

void bind_toggle(CLI::App* cmd, ConfigBinding& binding, const std::string& flag,
                 bool PipelineConfig::*field, const std::string& help) {
    auto value = std::make_shared<bool>();
    CLI::Option* opt = cmd->add_flag(flag, *value, help);
    binding.overrides.push_back([value, opt, field](PipelineConfig& cfg) {
        if (opt->count() > 0) cfg.*field = *value;
    });
}

int run_track(const std::string& det_path, const std::string& emb_path,
              const std::string& cmc_path, const std::string& out_path,
              const std::string& out_emb_path, const PipelineConfig& cfg) {
    const io::MotData mot = io::parse_mot_file(det_path);
    io::EmbeddingData embs;
    if (!emb_path.empty()) embs = io::parse_embeddings(emb_path, cfg.embedding_dim);
    std::map<int, motion::AffineMotion> cmc;
    if (!cmc_path.empty()) cmc = io::parse_cmc(cmc_path);

    const auto detections = io::detections_from_mot(
        mot, ObjectClass::Player, emb_path.empty() ? nullptr : &embs);
    const auto tracklets = run_sequence(detections, cmc, cfg);
    io::write_mot_file(tracklets, out_path);
    if (!out_emb_path.empty()) io::write_embeddings(tracklets, out_emb_path);

    std::size_t boxes = 0;
    for (const Tracklet& t : tracklets) boxes += t.entries.size();
    std::cout << "tracked " << tracklets.size() << " identities, " << boxes
              << " boxes";
    if (mot.warnings > 0) std::cout << " (" << mot.warnings << " lines rejected)";
    std::cout << "\n";
    return 0;
}

int run_post(const std::string& in_path, const std::string& emb_path,
             const std::string& out_path, const std::string& out_emb_path,
             bool gsi, bool link, bool boundary, const PipelineConfig& cfg) {
    const io::MotData mot = io::parse_mot_file(in_path);
    io::EmbeddingData embs;
    if (!emb_path.empty()) embs = io::parse_embeddings(emb_path, cfg.embedding_dim);
    std::vector<Tracklet> tracklets =
        io::tracklets_from_mot(mot, emb_path.empty() ? nullptr : &embs);

    const post::MergeConfig merge_cfg = post::MergeConfig::scaled_from(cfg);
    post::PostStats stats;
    // Stage order is fixed; the flags only disable stages.
    if (gsi) tracklets = post::gsi_smooth_all(tracklets, merge_cfg, &stats);
    if (link) tracklets = post::link_tracklets(tracklets, merge_cfg, &stats);
    if (boundary)
        tracklets = post::boundary_merge(tracklets, cfg.image_width,
                                         cfg.image_height, merge_cfg, &stats);

    io::write_mot_file(tracklets, out_path);
    if (!out_emb_path.empty()) io::write_embeddings(tracklets, out_emb_path);
    std::cout << "post: " << tracklets.size() << " tracklets out, "
              << stats.splits << " splits, " << stats.links << " links, "
              << stats.boundary_merges << " boundary merges";
    if (stats.gsi_fallbacks > 0 || stats.skipped_pairs > 0)
        std::cout << " (" << stats.gsi_fallbacks << " GP fallbacks, "
                  << stats.skipped_pairs << " pairs without embeddings)";
    std::cout << "\n";
    return 0;
}

int run_ball(const std::string& det_path, const std::string& out_path,
             const PipelineConfig& cfg) {
    const io::MotData mot = io::parse_mot_file(det_path);
    const auto detections = io::detections_from_mot(mot, ObjectClass::Ball);
    const ball::BallTrack track = ball::ball_pipeline(detections, cfg);
    io::write_mot_file(track, out_path);
    std::cout << "ball: " << track.entries.size() << " boxes\n";
    return 0;
}

int run_eval(const std::vector<std::string>& gt_paths,
             const std::vector<std::string>& pred_paths,
             const std::string& out_path) {
    if (gt_paths.size() != pred_paths.size())
        throw std::invalid_argument("--gt and --pred must be paired");
    if (gt_paths.empty()) throw std::invalid_argument("no sequences given");

    std::vector<std::vector<eval::FrameAnnotations>> sequences(gt_paths.size());
    std::vector<std::future<std::vector<eval::FrameAnnotations>>> jobs;
    for (std::size_t i = 0; i < gt_paths.size(); ++i)
        jobs.push_back(std::async(std::launch::async, [&, i] {
            return eval::build_frames(
                io::annotations_from_mot(io::parse_mot_file(gt_paths[i])),
                io::annotations_from_mot(io::parse_mot_file(pred_paths[i])));
        }));
    for (std::size_t i = 0; i < jobs.size(); ++i) sequences[i] = jobs[i].get();

    const eval::EvalReport report = eval::compute_hota(sequences);
    std::cout << eval::format_report(report);
    if (!out_path.empty())
        io::write_text_file(out_path, eval::format_report_kv(report));
    return 0;
}

int run_synth(const std::string& scenario_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed) {
    synth::SynthScenario sc =
        synth::scenario_from_kv(io::parse_kv_file(scenario_path));
    if (seed.has_value()) sc.seed = *seed;
    const auto seq = synth::generate(sc);
    synth::write_bundle(seq, out_dir);
    std::cout << "synth: wrote bundle to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pitchtrack - file-based soccer player and ball tracking toolkit"};
    app.require_subcommand(1);

    // track
    auto* track = app.add_subcommand("track", "online player tracking");
    std::string det_path, emb_path, cmc_path, out_path, out_emb_path;
    ConfigBinding track_cfg;
    track->add_option("--det", det_path, "detections (MOT, id=-1)")->required();
    track->add_option("--emb", emb_path, "embedding sidecar keyed frame,det_index");
    track->add_option("--cmc", cmc_path, "camera motion sidecar");
    track->add_option("--out", out_path, "output track file (MOT)")->required();
    track->add_option("--out-emb", out_emb_path,
                      "write per-track embeddings keyed frame,track_id");
    add_config_flag(track, track_cfg);
    bind(track, track_cfg, "--image-width", &PipelineConfig::image_width, "");
    bind(track, track_cfg, "--image-height", &PipelineConfig::image_height, "");
    bind(track, track_cfg, "--embedding-dim", &PipelineConfig::embedding_dim, "");
    bind(track, track_cfg, "--n-init", &PipelineConfig::n_init,
         "frames to confirm a track");
    bind(track, track_cfg, "--max-age", &PipelineConfig::max_age,
         "frames a lost track survives");
    bind(track, track_cfg, "--match-threshold", &PipelineConfig::match_threshold,
         "maximum association cost");
    bind(track, track_cfg, "--ema-alpha-base", &PipelineConfig::ema_alpha_base,
         "embedding EMA retention");
    bind(track, track_cfg, "--w-iou", &PipelineConfig::w_iou, "IoU cost weight");
    bind(track, track_cfg, "--w-app", &PipelineConfig::w_app,
         "appearance cost weight");
    bind(track, track_cfg, "--w-vel", &PipelineConfig::w_vel,
         "velocity-direction cost weight");
    bind(track, track_cfg, "--player-min-conf", &PipelineConfig::player_min_conf,
         "detection confidence floor");
    bind(track, track_cfg, "--gating-threshold", &PipelineConfig::gating_threshold,
         "Mahalanobis gate");
    bind(track, track_cfg, "--ocr-min-iou", &PipelineConfig::ocr_min_iou,
         "second-stage recovery IoU");
    bind(track, track_cfg, "--velocity-delta-t", &PipelineConfig::velocity_delta_t,
         "frames spanned by the velocity direction");
    bind_toggle(track, track_cfg, "--backfill,!--no-backfill",
                &PipelineConfig::backfill,
                "emit tentative-era boxes retroactively");
    bind_toggle(track, track_cfg, "--adaptive-noise,!--no-adaptive-noise",
                &PipelineConfig::adaptive_noise,
                "confidence-scaled measurement noise");

    // post
    auto* post_cmd = app.add_subcommand("post", "offline refinement");
    std::string post_in, post_emb, post_out, post_out_emb;
    bool gsi_on = true, link_on = true, boundary_on = true;
    ConfigBinding post_cfg;
    post_cmd->add_option("--in", post_in, "track file (MOT)")->required();
    post_cmd->add_option("--emb", post_emb, "embeddings keyed frame,track_id");
    post_cmd->add_option("--out", post_out, "refined track file")->required();
    post_cmd->add_option("--out-emb", post_out_emb, "refined embedding sidecar");
    post_cmd->add_flag("--gsi,!--no-gsi", gsi_on, "gap interpolation stage");
    post_cmd->add_flag("--link,!--no-link", link_on, "tracklet linking stage");
    post_cmd->add_flag("--boundary-merge,!--no-boundary-merge", boundary_on,
                       "appearance merging of interior death/birth pairs");
    add_config_flag(post_cmd, post_cfg);
    bind(post_cmd, post_cfg, "--image-width", &PipelineConfig::image_width, "");
    bind(post_cmd, post_cfg, "--image-height", &PipelineConfig::image_height, "");
    bind(post_cmd, post_cfg, "--embedding-dim", &PipelineConfig::embedding_dim, "");
    bind(post_cmd, post_cfg, "--boundary-margin", &PipelineConfig::boundary_margin,
         "interior distance from image edges (at 1080p)");
    bind(post_cmd, post_cfg, "--merge-max-gap", &PipelineConfig::merge_max_gap,
         "max frames between death and birth");
    bind(post_cmd, post_cfg, "--sim-threshold", &PipelineConfig::sim_threshold,
         "per-frame similarity threshold");
    bind(post_cmd, post_cfg, "--sim-fraction", &PipelineConfig::sim_fraction,
         "required fraction of similar frames");
    bind(post_cmd, post_cfg, "--link-max-gap", &PipelineConfig::link_max_gap,
         "max frames bridged by linking");
    bind(post_cmd, post_cfg, "--link-max-dist", &PipelineConfig::link_max_dist,
         "max extrapolation distance (at 1080p)");
    bind(post_cmd, post_cfg, "--gsi-tau", &PipelineConfig::gsi_tau,
         "GP length-scale in frames");
    bind(post_cmd, post_cfg, "--gsi-max-gap", &PipelineConfig::gsi_max_gap,
         "gaps beyond this split the tracklet");
    bind(post_cmd, post_cfg, "--gsi-noise-var", &PipelineConfig::gsi_noise_var,
         "GP observation noise variance");

    // ball
    auto* ball_cmd = app.add_subcommand("ball", "single-object ball pipeline");
    std::string ball_det, ball_out;
    ConfigBinding ball_cfg;
    ball_cmd->add_option("--det", ball_det, "ball detections (MOT)")->required();
    ball_cmd->add_option("--out", ball_out, "output ball track")->required();
    add_config_flag(ball_cmd, ball_cfg);
    bind(ball_cmd, ball_cfg, "--min-conf", &PipelineConfig::ball_min_conf,
         "candidate confidence floor");
    bind(ball_cmd, ball_cfg, "--window", &PipelineConfig::ball_window,
         "smoothing window in frames (odd)");
    bind(ball_cmd, ball_cfg, "--order", &PipelineConfig::ball_poly_order,
         "smoothing polynomial order");
    bind(ball_cmd, ball_cfg, "--max-dist", &PipelineConfig::ball_max_dist,
         "gate distance in pixels");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "HOTA/DetA/AssA evaluation");
    std::vector<std::string> gt_paths, pred_paths;
    std::string eval_out;
    eval_cmd->add_option("--gt", gt_paths, "ground-truth file (repeatable)")
        ->required();
    eval_cmd->add_option("--pred", pred_paths, "prediction file (repeatable)")
        ->required();
    eval_cmd->add_option("--out", eval_out, "write key=value report");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "synthetic scenario generator");
    std::string scenario_path, synth_out;
    std::optional<std::uint64_t> synth_seed;
    synth_cmd->add_option("--scenario", scenario_path, "scenario key=value file")
        ->required();
    synth_cmd->add_option("--out", synth_out, "output bundle directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "override the scenario seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (track->parsed())
            return run_track(det_path, emb_path, cmc_path, out_path, out_emb_path,
                             track_cfg.resolve());
        if (post_cmd->parsed())
            return run_post(post_in, post_emb, post_out, post_out_emb, gsi_on,
                            link_on, boundary_on, post_cfg.resolve());
        if (ball_cmd->parsed())
            return run_ball(ball_det, ball_out, ball_cfg.resolve());
        if (eval_cmd->parsed()) return run_eval(gt_paths, pred_paths, eval_out);
        if (synth_cmd->parsed())
            return run_synth(scenario_path, synth_out, synth_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
