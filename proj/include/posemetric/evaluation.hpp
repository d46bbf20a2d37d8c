#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "posemetric/latent.hpp"
#include "posemetric/metrics.hpp"
#include "posemetric/skeleton.hpp"
#include "posemetric/tinynn.hpp"

namespace posemetric {

// Deterministic clip split by index: every tenth clip (index % 10 == 9) is held
// out for testing, the one before it (index % 10 == 8) for validation.
struct ClipSplit {
    std::vector<AnimationClip> train;
    std::vector<AnimationClip> validation;
    std::vector<AnimationClip> test;
};

inline ClipSplit split_clips(std::span<const AnimationClip> clips) {
    ClipSplit s;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        switch (i % 10) {
            case 8: s.validation.push_back(clips[i]); break;
            case 9: s.test.push_back(clips[i]); break;
            default: s.train.push_back(clips[i]); break;
        }
    }
    if (s.train.empty()) {
        s.train.assign(clips.begin(), clips.end());
    }
    if (s.test.empty()) s.test = s.train;
    return s;
}

inline std::vector<Pose> all_poses(std::span<const AnimationClip> clips) {
    std::vector<Pose> out;
    for (const auto& c : clips) out.insert(out.end(), c.poses.begin(), c.poses.end());
    return out;
}

inline nn::Matrix<float> normalized_rows(const NormalizationStats& stats, std::span<const AnimationClip> clips) {
    std::size_t n = 0;
    for (const auto& c : clips) n += c.frame_count();
    nn::Matrix<float> m(n, stats.size());
    std::size_t r = 0;
    for (const auto& c : clips) {
        for (const auto& p : c.poses) {
            const auto row = normalize(flatten(p), stats);
            std::copy(row.begin(), row.end(), m.row(r++).begin());
        }
    }
    return m;
}

// Mean per-joint distance (meters) between poses and their reconstructions.
inline double reconstruction_error(const EncoderDecoder& model, std::span<const Pose> poses) {
    if (poses.empty()) throw InvalidArgument("reconstruction_error: no poses");
    double sum = 0.0;
    for (const auto& p : poses) sum += mean_joint_distance(p, model.reconstruct(p));
    return sum / static_cast<double>(poses.size());
}

struct MetricMoveResult {
    std::size_t trials = 0;
    std::size_t successes = 0;
    double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials); }
};

// Draws a held-out pose p and a target within +-max_delta of M(p); a trial
// succeeds when the edited pose is strictly closer to the target than p was.
inline MetricMoveResult metric_move_success(const EncoderDecoder& model, const MetricNetwork& network,
                                            const MetricRegistry& registry, const Skeleton& skeleton,
                                            std::span<const Pose> poses, std::size_t trials, std::uint64_t seed,
                                            double max_delta = 0.2) {
    if (poses.empty()) throw InvalidArgument("metric_move_success: no poses");
    const MetricDef& def = registry.get(network.metric);
    nn::SeededRng rng(seed);
    MetricMoveResult r;
    while (r.trials < trials) {
        const Pose& p = poses[rng.index(poses.size())];
        const double delta = rng.uniform(-max_delta, max_delta);
        double before;
        try {
            before = def.evaluate(p, skeleton);
        } catch (const DegenerateVector&) {
            continue;
        }
        const double target = before + delta;
        ++r.trials;
        const MetricTarget module(network, target);
        const LatentModule* mods[] = {&module};
        try {
            const double after = def.evaluate(edit_pose(model, mods, p), skeleton);
            if (std::abs(after - target) < std::abs(before - target)) ++r.successes;
        } catch (const DegenerateVector&) {
        }
    }
    return r;
}

// Mean per-joint distance between p and its edit toward its own metric value.
inline double noop_drift(const EncoderDecoder& model, const MetricNetwork& network, const MetricRegistry& registry,
                         const Skeleton& skeleton, std::span<const Pose> poses) {
    if (poses.empty()) throw InvalidArgument("noop_drift: no poses");
    const MetricDef& def = registry.get(network.metric);
    double sum = 0.0;
    for (const auto& p : poses) {
        const MetricTarget module(network, def.evaluate(p, skeleton));
        const LatentModule* mods[] = {&module};
        sum += mean_joint_distance(p, edit_pose(model, mods, p));
    }
    return sum / static_cast<double>(poses.size());
}

// Evenly spaced subset of at most `count` poses.
inline std::vector<Pose> subsample(std::span<const Pose> poses, std::size_t count) {
    if (poses.size() <= count) return {poses.begin(), poses.end()};
    std::vector<Pose> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(poses[i * poses.size() / count]);
    return out;
}

}  // namespace posemetric
