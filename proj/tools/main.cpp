// jetvo command line: synthetic scenes, batch experiments, metric evaluation,
// prior fitting and throughput measurement.

#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "jetvo/io.hpp"
#include "jetvo/random.hpp"

namespace {

using namespace jetvo;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

ExperimentConfig preset_by_name(const std::string& name) {
    if (name == "driving") return driving_preset();
    if (name == "handheld") return handheld_preset();
    throw ConfigError("unknown preset '" + name + "' (want driving or handheld)");
}

int cmd_synth(const std::string& preset, std::uint64_t seed, int features, const std::string& out_dir) {
    ExperimentConfig cfg = preset_by_name(preset);
    cfg.scene.feature_count = features;
    Rng rng(splitmix64(seed + 2));
    const double r = cfg.gt_rot_deg * M_PI / 180.0;
    cfg.scene.gt_pose = {rng.uniform(-r, r), rng.uniform(-r, r), rng.uniform(-r, r),
                         rng.uniform(-cfg.gt_alpha_deg * M_PI / 180.0, cfg.gt_alpha_deg * M_PI / 180.0),
                         rng.uniform(-cfg.gt_beta_deg * M_PI / 180.0, cfg.gt_beta_deg * M_PI / 180.0)};
    const SyntheticScene scene = render_scene(cfg.scene, splitmix64(seed + 1));

    std::filesystem::create_directories(out_dir);
    save_pgm(scene.frames.first, out_dir + "/frame_i.pgm");
    save_pgm(scene.frames.second, out_dir + "/frame_j.pgm");
    save_motion_params(scene.gt_pose, out_dir + "/gt_pose.txt");
    save_correspondences(scene.gt_correspondences, out_dir + "/gt_corrs.csv");
    save_experiment_config(cfg, out_dir + "/config.txt");
    std::cout << "scene written to " << out_dir << " (" << scene.gt_correspondences.size()
              << " features)\n";
    return kExitOk;
}

int cmd_run(ExperimentConfig cfg, const std::string& out_csv, bool quiet) {
    const ExperimentResult result = run_experiment(cfg);
    if (!out_csv.empty()) save_trials(result.records, out_csv);
    if (!quiet) std::cout << format_summary_table(result.summaries);
    int failures = 0;
    for (const auto& r : result.records) failures += r.failed ? 1 : 0;
    if (failures == static_cast<int>(result.records.size()) && !result.records.empty()) return kExitNumeric;
    return kExitOk;
}

int cmd_eval(const std::string& gt_pose_path, const std::string& gt_corrs_path,
             const std::string& est_pose_path, const std::string& est_corrs_path,
             const std::string& image_i, const std::string& image_j, int patch, double sigma) {
    FramePair frames;
    frames.first = load_image(image_i);
    frames.second = load_image(image_j);
    const MotionParams gt = load_motion_params(gt_pose_path);
    const MotionParams est = load_motion_params(est_pose_path);
    const auto gt_corrs = load_correspondences(gt_corrs_path);
    const auto est_corrs = load_correspondences(est_corrs_path);
    if (gt_corrs.size() != est_corrs.size())
        throw DataError("correspondence counts differ between ground truth and estimate");
    const WeightKernel kernel = gaussian_kernel(patch, sigma);
    const MetricSet m = compute_metrics(est, est_corrs, gt, gt_corrs, frames, kernel);
    std::cout << "rho_deg=" << format_double(m.rho_deg) << "\n"
              << "omega_deg=" << format_double(m.omega_deg) << "\n"
              << "rms_px=" << format_double(m.rms_px) << "\n"
              << "ssd=" << format_double(m.ssd) << "\n"
              << "active=" << m.active << "\n";
    return kExitOk;
}

int cmd_prior_fit(const std::vector<std::string>& pose_files, double ridge, const std::string& out) {
    std::vector<PoseSequence> sequences;
    int degenerate = 0;
    for (const auto& f : pose_files) {
        KittiLoadResult r = load_kitti_poses(f);
        degenerate += r.degenerate_steps;
        sequences.push_back(std::move(r.sequence));
    }
    const PriorModel model = fit_predictor(sequences, ridge);
    save_prior_model(model, out);
    std::cout << "fitted on " << model.sample_count << " transitions (" << degenerate
              << " degenerate steps skipped), model written to " << out << "\n";
    return kExitOk;
}

int cmd_bench(int features, int patch, int pairs, std::uint64_t seed) {
    ExperimentConfig cfg = driving_preset();
    cfg.scene.feature_count = features;
    cfg.kernel_side = patch;
    cfg.scene.kernel_radius = patch / 2;
    cfg.scene.gt_pose = {0.001, 0.002, -0.001, 0.02, 0.005};
    const SyntheticScene scene = render_scene(cfg.scene, splitmix64(seed));
    const WeightKernel kernel = gaussian_kernel(cfg.kernel_side, cfg.kernel_sigma);
    (void)kernel;

    JetConfig jc;
    jc.kernel_side = cfg.kernel_side;
    jc.kernel_sigma = cfg.kernel_sigma;

    // warm-up run, then timed runs over fresh noise realizations
    MotionParams p0;
    std::vector<Correspondence> corrs0;
    inject_noise(scene.gt_pose, scene.gt_correspondences, cfg.noise, splitmix64(seed + 1), p0, corrs0);
    (void)jet_optimize(scene.frames, corrs0, p0, jc);

    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < pairs; ++i) {
        inject_noise(scene.gt_pose, scene.gt_correspondences, cfg.noise, splitmix64(seed + 2 + i), p0, corrs0);
        (void)jet_optimize(scene.frames, corrs0, p0, jc);
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double fps = pairs / dt;
    std::cout << "processed " << pairs << " frame pairs with " << features << " features (patch " << patch
              << "x" << patch << ") in " << dt << " s: " << fps << " pairs/s\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-view pose refinement by joint epipolar tracking"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "render a synthetic scene with ground truth files");
    std::string synth_preset = "driving", synth_out = "scene";
    std::uint64_t synth_seed = 1;
    int synth_features = 400;
    synth->add_option("--preset", synth_preset, "driving|handheld");
    synth->add_option("--seed", synth_seed, "scene seed");
    synth->add_option("--features", synth_features, "ground-truth feature count");
    synth->add_option("--out", synth_out, "output directory");

    // run
    auto* run = app.add_subcommand("run", "run one trial or a batch of seeded trials");
    std::string run_preset = "driving", run_method = "both", run_prior = "off", run_out, run_config;
    std::uint64_t run_seed = 1;
    int run_trials = 1, run_features = -1, run_patch = -1;
    double run_xi_q = -1.0, run_xi_r = -1.0;
    bool run_quiet = false;
    run->add_option("--preset", run_preset, "driving|handheld");
    run->add_option("--config", run_config, "key=value config file (preset applied first)");
    run->add_option("--method", run_method, "jet|rpe|both");
    run->add_option("--prior", run_prior, "on|off");
    run->add_option("--xi-q", run_xi_q, "prior coupling for the joint method");
    run->add_option("--xi-r", run_xi_r, "prior coupling for the baseline");
    run->add_option("--features", run_features, "features per trial");
    run->add_option("--patch", run_patch, "odd patch side length");
    run->add_option("--seed", run_seed, "master seed");
    run->add_option("--trials", run_trials, "number of seeded trials");
    run->add_option("--out", run_out, "result CSV path");
    run->add_flag("--quiet", run_quiet, "suppress the summary table");

    // eval
    auto* eval = app.add_subcommand("eval", "compute the four measures from result and ground-truth files");
    std::string ev_gt_pose, ev_gt_corrs, ev_pose, ev_corrs, ev_i, ev_j;
    int ev_patch = 9;
    double ev_sigma = 2.0;
    eval->add_option("--gt-pose", ev_gt_pose)->required();
    eval->add_option("--gt-corrs", ev_gt_corrs)->required();
    eval->add_option("--est-pose", ev_pose)->required();
    eval->add_option("--est-corrs", ev_corrs)->required();
    eval->add_option("--image-i", ev_i)->required();
    eval->add_option("--image-j", ev_j)->required();
    eval->add_option("--patch", ev_patch);
    eval->add_option("--sigma", ev_sigma);

    // prior-fit
    auto* fit = app.add_subcommand("prior-fit", "fit the motion predictor from KITTI-format pose files");
    std::vector<std::string> fit_files;
    std::string fit_out = "prior_model.txt";
    double fit_ridge = 1e-8;
    fit->add_option("--poses", fit_files, "pose files (12 floats per line)")->required();
    fit->add_option("--ridge", fit_ridge);
    fit->add_option("--out", fit_out);

    // bench
    auto* bench = app.add_subcommand("bench", "throughput of the joint optimizer");
    int bench_features = 400, bench_patch = 9, bench_pairs = 30;
    std::uint64_t bench_seed = 7;
    bench->add_option("--features", bench_features);
    bench->add_option("--patch", bench_patch);
    bench->add_option("--pairs", bench_pairs);
    bench->add_option("--seed", bench_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*synth) return cmd_synth(synth_preset, synth_seed, synth_features, synth_out);
        if (*run) {
            ExperimentConfig cfg = preset_by_name(run_preset);
            if (!run_config.empty()) cfg = parse_experiment_config(run_config);
            cfg.master_seed = run_seed;
            cfg.trials = run_trials;
            if (run_method == "jet") cfg.methods = MethodSelect::Jet;
            else if (run_method == "rpe") cfg.methods = MethodSelect::Rpe;
            else if (run_method == "both") cfg.methods = MethodSelect::Both;
            else throw ConfigError("bad --method '" + run_method + "'");
            if (run_prior == "on") cfg.prior_on = true;
            else if (run_prior == "off") cfg.prior_on = false;
            else throw ConfigError("bad --prior '" + run_prior + "'");
            if (run_xi_q >= 0.0) cfg.xi_q = run_xi_q;
            if (run_xi_r >= 0.0) cfg.xi_r = run_xi_r;
            if (run_features > 0) cfg.scene.feature_count = run_features;
            if (run_patch > 0) {
                cfg.kernel_side = run_patch;
                cfg.scene.kernel_radius = run_patch / 2;
            }
            return cmd_run(cfg, run_out, run_quiet);
        }
        if (*eval) return cmd_eval(ev_gt_pose, ev_gt_corrs, ev_pose, ev_corrs, ev_i, ev_j, ev_patch, ev_sigma);
        if (*fit) return cmd_prior_fit(fit_files, fit_ridge, fit_out);
        if (*bench) return cmd_bench(bench_features, bench_patch, bench_pairs, bench_seed);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const BadKernelSpec& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
