#pragma once

#include <string>
#include <vector>

#include "jetvo/experiment.hpp"
#include "jetvo/prior.hpp"

namespace jetvo {

struct KittiLoadResult {
    PoseSequence sequence;
    int degenerate_steps = 0;  // transitions skipped for vanishing baselines
};

/// KITTI odometry format: one line of 12 floats per absolute camera-to-world
/// 3x4 pose. Consecutive poses become relative motions; the translation is
/// normalized away into its polar angles. Throws ParseError with the line
/// number; zero-baseline transitions are skipped and counted.
KittiLoadResult load_kitti_poses(const std::string& path);

/// Writes absolute 3x4 poses in the same format (for round trips and for
/// emitting synthetic sequences). Poses are integrated from relative motions
/// with the given per-step baseline.
void save_kitti_poses(const PoseSequence& sequence, double step_length, const std::string& path);

// ---- pose (5-parameter) files ----
void save_motion_params(const MotionParams& p, const std::string& path);
MotionParams load_motion_params(const std::string& path);

// ---- correspondence CSV: k,x0,x1,y0,y1,status ----
void save_correspondences(const std::vector<Correspondence>& corrs, const std::string& path);
std::vector<Correspondence> load_correspondences(const std::string& path);

// ---- trial records CSV (fixed header, exact round trip) ----
std::string trial_csv_header();
std::string trial_csv_line(const TrialRecord& r);
void save_trials(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> load_trials(const std::string& path);

// ---- flat key=value experiment configuration ----
ExperimentConfig parse_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& config, const std::string& path);

std::string format_double(double v);   // shortest round-trip representation
double parse_double(const std::string& s);

}  // namespace jetvo
