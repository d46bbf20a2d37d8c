#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "posemetric/dataset.hpp"
#include "posemetric/geometry.hpp"
#include "posemetric/skeleton.hpp"
#include "posemetric/tinynn.hpp"

namespace posemetric::synthetic {

struct Options {
    std::size_t clips = 400;
    std::size_t frames_per_clip = 120;
    double frame_rate = 30.0;
    std::uint64_t seed = 7;
    double facing_range = 0.5;  // initial facing drawn from [-range, range] radians
};

namespace detail {

// Smoothed random walk confined to [lo, hi]: the velocity decays by `inertia` each
// frame and receives a uniform kick in [-kick, kick]; the value reflects off the bounds.
struct Walk {
    double lo, hi, kick, inertia;
    double value = 0.0, velocity = 0.0;

    Walk(nn::SeededRng& rng, double lo_, double hi_, double kick_, double inertia_ = 0.95)
        : lo(lo_), hi(hi_), kick(kick_), inertia(inertia_), value(rng.uniform(lo_, hi_)) {}

    double step(nn::SeededRng& rng) {
        const double current = value;
        velocity = inertia * velocity + rng.uniform(-kick, kick);
        value += velocity;
        if (value > hi) {
            value = 2.0 * hi - value;
            velocity = -velocity;
        } else if (value < lo) {
            value = 2.0 * lo - value;
            velocity = -velocity;
        }
        value = std::clamp(value, lo, hi);
        return current;
    }
};

inline Mat3 rx(double a) { return Mat3::rotation(Axis::X, a); }
inline Mat3 ry(double a) { return Mat3::rotation(Axis::Y, a); }
inline Mat3 rz(double a) { return Mat3::rotation(Axis::Z, a); }

}  // namespace detail

// One procedural clip on the default humanoid: a slow gait cycle combined with
// random walks of stride, leg abduction, crouch, spine bend, shoulder shrug and
// protraction, arm pose, head and facing direction. Legs, spine or shoulders are
// picked per clip as the region that moves most.
inline AnimationClip generate_clip(const Skeleton& skeleton, const std::string& id, const Options& opt,
                                   nn::SeededRng& rng) {
    using namespace detail;
    const double gait_hz = rng.uniform(0.15, 0.4);
    const double gait_phase = rng.uniform(0.0, 2.0 * kPi);
    const double yaw0 = rng.uniform(-opt.facing_range, opt.facing_range);
    // Each clip concentrates on one body region; the other regions move slowly.
    const std::size_t focus = rng.index(3);
    const auto kick = [focus](std::size_t region, double k) { return region == focus ? k : 0.25 * k; };
    Walk stride(rng, 0.0, 0.3, 0.002);
    Walk abduct(rng, 0.0, 0.5, kick(0, 0.012));
    Walk crouch(rng, 0.0, 0.5, 0.004);
    Walk spine_bend(rng, -0.15, 0.7, kick(1, 0.02));
    Walk spine_side(rng, -0.15, 0.15, kick(1, 0.004));
    Walk shrug(rng, -0.2, 0.5, kick(2, 0.01));
    Walk protract(rng, -0.6, 0.6, kick(2, 0.014));
    Walk arm_lower(rng, 0.8, 1.5, 0.003);
    Walk elbow(rng, 0.1, 1.0, 0.004);
    Walk head(rng, -0.2, 0.3, 0.003);
    Walk yaw(rng, -0.4, 0.4, 0.002);

    AnimationClip clip;
    clip.id = id;
    clip.frame_rate = opt.frame_rate;
    const std::size_t n = skeleton.joint_count();
    const std::size_t pelvis = skeleton.role(role::kPelvis);
    double forward = 0.0;
    for (std::size_t f = 0; f < opt.frames_per_clip; ++f) {
        const double t = static_cast<double>(f);
        const double phase = 2.0 * kPi * gait_hz * t / opt.frame_rate + gait_phase;
        const double s = stride.step(rng);
        const double ab = abduct.step(rng);
        const double cr = crouch.step(rng);
        const double bend = spine_bend.step(rng);
        const double side = spine_side.step(rng);
        const double sh = shrug.step(rng);
        const double pr = protract.step(rng);
        const double lower = arm_lower.step(rng);
        const double el = elbow.step(rng);
        const double hd = head.step(rng);
        const double turn = yaw.step(rng);
        const double hip_l = s * std::sin(phase) - 0.5 * cr;
        const double hip_r = -s * std::sin(phase) - 0.5 * cr;
        const double knee_l = cr + 0.6 * s * std::max(0.0, std::sin(phase + 1.2));
        const double knee_r = cr + 0.6 * s * std::max(0.0, std::sin(phase + kPi + 1.2));
        const double swing = 0.8 * s * std::sin(phase);

        std::vector<Mat3> r(n);
        r[0] = ry(yaw0 + turn) * rx(0.1 * bend);
        r[1] = rx(0.45 * bend) * rz(0.5 * side);
        r[2] = rx(0.45 * bend) * rz(0.5 * side);
        r[3] = rx(hd);
        r[5] = ry(-pr) * rz(sh);
        r[9] = ry(pr) * rz(-sh);
        r[6] = rx(-swing) * rz(-lower);
        r[10] = rx(swing) * rz(lower);
        r[7] = ry(el);
        r[11] = ry(-el);
        r[13] = rx(-hip_l) * rz(ab);
        r[17] = rx(-hip_r) * rz(-ab);
        r[14] = rx(knee_l);
        r[18] = rx(knee_r);
        r[15] = rx(-0.3 * knee_l);
        r[19] = rx(-0.3 * knee_r);

        forward += 1.2 * s * gait_hz / opt.frame_rate;
        const double height = 0.95 - 0.35 * cr + 0.02 * s * std::cos(2.0 * phase);
        const Vec3 root{std::sin(yaw0) * forward, height, std::cos(yaw0) * forward};
        const auto world = forward_kinematics(skeleton, r, root);
        clip.poses.push_back(to_root_relative(world, pelvis));
    }
    return clip;
}

// Procedural dataset on the default humanoid, with stats, already in the exact
// form a write/read round trip through the dataset file would produce.
inline Dataset generate(const Options& opt = {}) {
    if (opt.clips == 0 || opt.frames_per_clip == 0) throw InvalidArgument("synthetic: empty dataset requested");
    if (!(opt.facing_range >= 0.0 && opt.facing_range <= kPi)) throw InvalidArgument("synthetic: facing_range must be in [0, pi]");
    nn::SeededRng rng(opt.seed);
    Dataset d;
    d.skeleton = default_humanoid();
    for (std::size_t c = 0; c < opt.clips; ++c) {
        d.clips.push_back(generate_clip(d.skeleton, "synth_" + std::to_string(c), opt, rng));
    }
    d.stats = compute_stats(std::span<const AnimationClip>(d.clips));
    return dataset_from_json(to_json(d));
}

}  // namespace posemetric::synthetic
