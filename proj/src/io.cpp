#include "jetvo/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace jetvo {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc()) throw ParseError("bad number '" + s + "'");
    return v;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

}  // namespace

// ------------------------------------------------------------------- KITTI

KittiLoadResult load_kitti_poses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    KittiLoadResult result;
    result.sequence.source = path;

    std::vector<Mat3> rotations;
    std::vector<Vec3> centers;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        double v[12];
        for (int i = 0; i < 12; ++i) {
            if (!(ss >> v[i]))
                throw ParseError(path + ":" + std::to_string(line_no) + ": expected 12 floats per pose line");
        }
        double extra;
        if (ss >> extra)
            throw ParseError(path + ":" + std::to_string(line_no) + ": more than 12 values on pose line");
        Mat3 R;
        R << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
        rotations.push_back(R);
        centers.emplace_back(v[3], v[7], v[11]);
    }

    for (size_t i = 0; i + 1 < rotations.size(); ++i) {
        const Vec3 step_world = centers[i + 1] - centers[i];
        if (step_world.norm() < 1e-9) {
            ++result.degenerate_steps;
            continue;
        }
        const Mat3 R_rel = rotations[i + 1].transpose() * rotations[i];
        const Vec3 dir = rotations[i + 1].transpose() * step_world;  // camera displacement, second frame
        MotionParams p;
        angles_from_rotation(R_rel, p.theta, p.psi, p.phi);
        polar_from_translation(dir, p.alpha, p.beta);
        result.sequence.poses.push_back(p.wrapped());
    }
    return result;
}

void save_kitti_poses(const PoseSequence& sequence, double step_length, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    Mat3 R = Mat3::Identity();
    Vec3 c = Vec3::Zero();
    auto emit = [&out](const Mat3& Rm, const Vec3& cm) {
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) out << format_double(Rm(r, k)) << " ";
            out << format_double(cm[r]) << (r == 2 ? "" : " ");
        }
        out << "\n";
    };
    emit(R, c);
    for (const auto& p : sequence.poses) {
        const Mat3 R_rel = rotation_from_angles(p);
        const Vec3 dir = translation_from_polar(p.alpha, p.beta);
        R = R * R_rel.transpose();
        c = c + R * (step_length * dir);
        emit(R, c);
    }
}

// ------------------------------------------------------- 5-parameter poses

void save_motion_params(const MotionParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "# jetvo-pose v1: theta psi phi alpha beta (radians)\n";
    out << format_double(p.theta) << " " << format_double(p.psi) << " " << format_double(p.phi) << " "
        << format_double(p.alpha) << " " << format_double(p.beta) << "\n";
}

MotionParams load_motion_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        MotionParams p;
        if (ss >> p.theta >> p.psi >> p.phi >> p.alpha >> p.beta) return p;
        throw ParseError(path + ": expected 5 numbers on the pose line");
    }
    throw ParseError(path + ": no pose line found");
}

// ------------------------------------------------------ correspondence CSV

void save_correspondences(const std::vector<Correspondence>& corrs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "k,x0,x1,y0,y1,status\n";
    for (size_t k = 0; k < corrs.size(); ++k) {
        const auto& c = corrs[k];
        out << k << "," << format_double(c.x.x()) << "," << format_double(c.x.y()) << ","
            << format_double(c.y.x()) << "," << format_double(c.y.y()) << "," << to_string(c.status) << "\n";
    }
}

std::vector<Correspondence> load_correspondences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "k,x0,x1,y0,y1,status")
        throw ParseError(path + ": bad correspondence CSV header");
    std::vector<Correspondence> corrs;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 6) throw ParseError(path + ":" + std::to_string(line_no) + ": expected 6 fields");
        Correspondence c;
        c.x = {parse_double(f[1]), parse_double(f[2])};
        c.y = {parse_double(f[3]), parse_double(f[4])};
        c.status = feature_status_from_string(f[5]);
        corrs.push_back(c);
    }
    return corrs;
}

// ------------------------------------------------------------- trial CSV

std::string trial_csv_header() {
    return "seed,method,prior,rho_in,omega_in,rms_in,ssd_in,active_in,rho,omega,rms,ssd,active,"
           "ssd_gt,time_s,iters,max_line_dist,loss_monotone,failed,failure";
}

std::string trial_csv_line(const TrialRecord& r) {
    std::ostringstream out;
    out << r.seed << "," << r.method << "," << (r.prior_used ? 1 : 0) << ","
        << format_double(r.initial.rho_deg) << "," << format_double(r.initial.omega_deg) << ","
        << format_double(r.initial.rms_px) << "," << format_double(r.initial.ssd) << ","
        << r.initial.active << "," << format_double(r.final.rho_deg) << ","
        << format_double(r.final.omega_deg) << "," << format_double(r.final.rms_px) << ","
        << format_double(r.final.ssd) << "," << r.final.active << "," << format_double(r.ssd_gt) << ","
        << format_double(r.wall_time_s) << "," << r.iterations << "," << format_double(r.max_line_dist)
        << "," << (r.loss_monotone ? 1 : 0) << "," << (r.failed ? 1 : 0) << "," << sanitize(r.failure);
    return out.str();
}

void save_trials(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << trial_csv_header() << "\n";
    for (const auto& r : records) out << trial_csv_line(r) << "\n";
}

std::vector<TrialRecord> load_trials(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != trial_csv_header())
        throw ParseError(path + ": bad trial CSV header");
    std::vector<TrialRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 20) throw ParseError(path + ":" + std::to_string(line_no) + ": expected 20 fields");
        TrialRecord r;
        r.seed = std::stoull(f[0]);
        r.method = f[1];
        r.prior_used = f[2] == "1";
        r.initial.rho_deg = parse_double(f[3]);
        r.initial.omega_deg = parse_double(f[4]);
        r.initial.rms_px = parse_double(f[5]);
        r.initial.ssd = parse_double(f[6]);
        r.initial.active = std::stoi(f[7]);
        r.final.rho_deg = parse_double(f[8]);
        r.final.omega_deg = parse_double(f[9]);
        r.final.rms_px = parse_double(f[10]);
        r.final.ssd = parse_double(f[11]);
        r.final.active = std::stoi(f[12]);
        r.ssd_gt = parse_double(f[13]);
        r.wall_time_s = parse_double(f[14]);
        r.iterations = std::stoi(f[15]);
        r.max_line_dist = parse_double(f[16]);
        r.loss_monotone = f[17] == "1";
        r.failed = f[18] == "1";
        r.failure = f[19];
        records.push_back(std::move(r));
    }
    return records;
}

// ----------------------------------------------------- experiment config kv

namespace {

SceneLayout layout_from_string(const std::string& s) {
    if (s == "driving") return SceneLayout::Driving;
    if (s == "room") return SceneLayout::Room;
    throw ConfigError("unknown scene layout '" + s + "'");
}

MethodSelect methods_from_string(const std::string& s) {
    if (s == "jet") return MethodSelect::Jet;
    if (s == "rpe") return MethodSelect::Rpe;
    if (s == "both") return MethodSelect::Both;
    throw ConfigError("unknown method selection '" + s + "'");
}

bool bool_from_string(const std::string& s) {
    if (s == "1" || s == "true" || s == "on") return true;
    if (s == "0" || s == "false" || s == "off") return false;
    throw ConfigError("bad boolean value '" + s + "'");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "scene.width") cfg.scene.width = std::stoi(val);
        else if (key == "scene.height") cfg.scene.height = std::stoi(val);
        else if (key == "scene.fx") cfg.scene.intrinsics.fx = parse_double(val);
        else if (key == "scene.fy") cfg.scene.intrinsics.fy = parse_double(val);
        else if (key == "scene.cx") cfg.scene.intrinsics.cx = parse_double(val);
        else if (key == "scene.cy") cfg.scene.intrinsics.cy = parse_double(val);
        else if (key == "scene.baseline") cfg.scene.baseline = parse_double(val);
        else if (key == "scene.layout") cfg.scene.layout = layout_from_string(val);
        else if (key == "scene.texture_octaves") cfg.scene.texture_octaves = std::stoi(val);
        else if (key == "scene.contrast") cfg.scene.contrast = parse_double(val);
        else if (key == "scene.min_wavelength_px") cfg.scene.min_wavelength_px = parse_double(val);
        else if (key == "scene.spectrum_exponent") cfg.scene.spectrum_exponent = parse_double(val);
        else if (key == "scene.psf_sigma_px") cfg.scene.psf_sigma_px = parse_double(val);
        else if (key == "scene.sensor_noise_sigma") cfg.scene.sensor_noise_sigma = parse_double(val);
        else if (key == "scene.exposure_gain_range") cfg.scene.exposure_gain_range = parse_double(val);
        else if (key == "scene.exposure_offset_range") cfg.scene.exposure_offset_range = parse_double(val);
        else if (key == "scene.feature_count") cfg.scene.feature_count = std::stoi(val);
        else if (key == "scene.feature_min_distance") cfg.scene.feature_min_distance = parse_double(val);
        else if (key == "scene.feature_margin_pad") cfg.scene.feature_margin_pad = parse_double(val);
        else if (key == "scene.single_plane_patches") cfg.scene.single_plane_patches = bool_from_string(val);
        else if (key == "trials") cfg.trials = std::stoi(val);
        else if (key == "master_seed") cfg.master_seed = std::stoull(val);
        else if (key == "noise.rot_deg") cfg.noise.rot_deg = parse_double(val);
        else if (key == "noise.trans_deg") cfg.noise.trans_deg = parse_double(val);
        else if (key == "noise.px") cfg.noise.px = parse_double(val);
        else if (key == "methods") cfg.methods = methods_from_string(val);
        else if (key == "kernel_side") cfg.kernel_side = std::stoi(val);
        else if (key == "kernel_sigma") cfg.kernel_sigma = parse_double(val);
        else if (key == "max_outer_iters") cfg.max_outer_iters = std::stoi(val);
        else if (key == "rpe_lk_prestep") cfg.rpe_lk_prestep = bool_from_string(val);
        else if (key == "lk_iters") cfg.lk_iters = std::stoi(val);
        else if (key == "prior_on") cfg.prior_on = bool_from_string(val);
        else if (key == "xi_q") cfg.xi_q = parse_double(val);
        else if (key == "xi_r") cfg.xi_r = parse_double(val);
        else if (key == "gt_rot_deg") cfg.gt_rot_deg = parse_double(val);
        else if (key == "gt_alpha_deg") cfg.gt_alpha_deg = parse_double(val);
        else if (key == "gt_beta_deg") cfg.gt_beta_deg = parse_double(val);
        else throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    return cfg;
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "scene.width=" << cfg.scene.width << "\n";
    out << "scene.height=" << cfg.scene.height << "\n";
    out << "scene.fx=" << format_double(cfg.scene.intrinsics.fx) << "\n";
    out << "scene.fy=" << format_double(cfg.scene.intrinsics.fy) << "\n";
    out << "scene.cx=" << format_double(cfg.scene.intrinsics.cx) << "\n";
    out << "scene.cy=" << format_double(cfg.scene.intrinsics.cy) << "\n";
    out << "scene.baseline=" << format_double(cfg.scene.baseline) << "\n";
    out << "scene.layout=" << (cfg.scene.layout == SceneLayout::Driving ? "driving" : "room") << "\n";
    out << "scene.texture_octaves=" << cfg.scene.texture_octaves << "\n";
    out << "scene.contrast=" << format_double(cfg.scene.contrast) << "\n";
    out << "scene.min_wavelength_px=" << format_double(cfg.scene.min_wavelength_px) << "\n";
    out << "scene.spectrum_exponent=" << format_double(cfg.scene.spectrum_exponent) << "\n";
    out << "scene.psf_sigma_px=" << format_double(cfg.scene.psf_sigma_px) << "\n";
    out << "scene.sensor_noise_sigma=" << format_double(cfg.scene.sensor_noise_sigma) << "\n";
    out << "scene.exposure_gain_range=" << format_double(cfg.scene.exposure_gain_range) << "\n";
    out << "scene.exposure_offset_range=" << format_double(cfg.scene.exposure_offset_range) << "\n";
    out << "scene.feature_count=" << cfg.scene.feature_count << "\n";
    out << "scene.feature_min_distance=" << format_double(cfg.scene.feature_min_distance) << "\n";
    out << "scene.feature_margin_pad=" << format_double(cfg.scene.feature_margin_pad) << "\n";
    out << "scene.single_plane_patches=" << (cfg.scene.single_plane_patches ? 1 : 0) << "\n";
    out << "trials=" << cfg.trials << "\n";
    out << "master_seed=" << cfg.master_seed << "\n";
    out << "noise.rot_deg=" << format_double(cfg.noise.rot_deg) << "\n";
    out << "noise.trans_deg=" << format_double(cfg.noise.trans_deg) << "\n";
    out << "noise.px=" << format_double(cfg.noise.px) << "\n";
    out << "methods="
        << (cfg.methods == MethodSelect::Both ? "both" : (cfg.methods == MethodSelect::Jet ? "jet" : "rpe"))
        << "\n";
    out << "kernel_side=" << cfg.kernel_side << "\n";
    out << "kernel_sigma=" << format_double(cfg.kernel_sigma) << "\n";
    out << "max_outer_iters=" << cfg.max_outer_iters << "\n";
    out << "rpe_lk_prestep=" << (cfg.rpe_lk_prestep ? 1 : 0) << "\n";
    out << "lk_iters=" << cfg.lk_iters << "\n";
    out << "prior_on=" << (cfg.prior_on ? 1 : 0) << "\n";
    out << "xi_q=" << format_double(cfg.xi_q) << "\n";
    out << "xi_r=" << format_double(cfg.xi_r) << "\n";
    out << "gt_rot_deg=" << format_double(cfg.gt_rot_deg) << "\n";
    out << "gt_alpha_deg=" << format_double(cfg.gt_alpha_deg) << "\n";
    out << "gt_beta_deg=" << format_double(cfg.gt_beta_deg) << "\n";
}

}  // namespace jetvo
