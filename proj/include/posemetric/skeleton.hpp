#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posemetric/error.hpp"
#include "posemetric/geometry.hpp"

namespace posemetric {

// Role names used by the built-in metrics.
namespace role {
inline constexpr const char* kPelvis = "pelvis";
inline constexpr const char* kNeck = "neck";
inline constexpr const char* kSpine1 = "spine1";
inline constexpr const char* kLShoulder = "lshoulder";
inline constexpr const char* kRShoulder = "rshoulder";
inline constexpr const char* kLKnee = "lknee";
inline constexpr const char* kRKnee = "rknee";
}  // namespace role

struct Joint {
    std::string name;
    std::optional<std::size_t> parent;
    Vec3 offset;

    bool operator==(const Joint&) const = default;
};

// Joint hierarchy, topologically sorted (parent index < child index), single root at 0.
class Skeleton {
public:
    Skeleton() = default;

    Skeleton(std::vector<Joint> joints, std::map<std::string, std::size_t> roles)
        : joints_(std::move(joints)), roles_(std::move(roles)) {
        if (joints_.empty()) throw InvalidArgument("skeleton has no joints");
        for (std::size_t i = 0; i < joints_.size(); ++i) {
            const auto& parent = joints_[i].parent;
            if (i == 0 && parent) throw InvalidArgument("joint 0 must be the root");
            if (i > 0 && !parent) {
                throw InvalidArgument("joint '" + joints_[i].name + "' is a second root");
            }
            if (parent && *parent >= i) {
                throw InvalidArgument("joint '" + joints_[i].name + "' precedes its parent");
            }
            if (!joints_[i].offset.finite()) {
                throw InvalidArgument("joint '" + joints_[i].name + "' has a non-finite offset");
            }
        }
        for (const auto& [name, index] : roles_) {
            if (index >= joints_.size()) {
                throw InvalidArgument("role '" + name + "' maps outside the skeleton");
            }
        }
    }

    std::size_t joint_count() const { return joints_.size(); }
    const std::vector<Joint>& joints() const { return joints_; }
    const std::map<std::string, std::size_t>& roles() const { return roles_; }

    bool has_role(const std::string& name) const { return roles_.contains(name); }

    std::size_t role(const std::string& name) const {
        auto it = roles_.find(name);
        if (it == roles_.end()) throw NotFound("skeleton has no joint for role '" + name + "'");
        return it->second;
    }

    std::optional<std::size_t> find_joint(const std::string& name) const {
        for (std::size_t i = 0; i < joints_.size(); ++i) {
            if (joints_[i].name == name) return i;
        }
        return std::nullopt;
    }

    bool operator==(const Skeleton&) const = default;

private:
    std::vector<Joint> joints_;
    std::map<std::string, std::size_t> roles_;
};

// Joint positions in meters, one per skeleton joint, y up.
struct Pose {
    std::vector<Vec3> positions;

    std::size_t joint_count() const { return positions.size(); }
    const Vec3& operator[](std::size_t j) const { return positions[j]; }
    Vec3& operator[](std::size_t j) { return positions[j]; }

    bool finite() const {
        return std::all_of(positions.begin(), positions.end(), [](const Vec3& p) { return p.finite(); });
    }

    bool operator==(const Pose&) const = default;
};

struct AnimationClip {
    std::string id;
    double frame_rate = 30.0;
    std::vector<Pose> poses;

    std::size_t frame_count() const { return poses.size(); }
    std::size_t joint_count() const { return poses.empty() ? 0 : poses.front().joint_count(); }

    void validate() const {
        if (poses.empty()) throw InvalidArgument("clip '" + id + "' has no frames");
        if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
            throw InvalidArgument("clip '" + id + "' has a non-positive frame rate");
        }
        const std::size_t j = poses.front().joint_count();
        for (const auto& p : poses) {
            if (p.joint_count() != j) {
                throw DimensionMismatch("clip '" + id + "' mixes joint counts");
            }
        }
    }
};

inline constexpr double kStdFloor = 1e-8;

// Per-component mean and population std of flattened poses.
struct NormalizationStats {
    std::vector<double> mean;
    std::vector<double> std;

    std::size_t size() const { return mean.size(); }
    bool operator==(const NormalizationStats&) const = default;
};

// World positions from per-joint local rotations and per-joint translations that
// are added to the skeleton offsets. The root sits at offset + translation; each
// child sits at parent + parent_world_rotation * (offset + translation).
inline std::vector<Vec3> forward_kinematics(const Skeleton& skeleton, std::span<const Mat3> local_rotations,
                                            std::span<const Vec3> local_translations) {
    const std::size_t n = skeleton.joint_count();
    if (local_rotations.size() != n || local_translations.size() != n) {
        throw DimensionMismatch("forward_kinematics: " + std::to_string(local_rotations.size()) +
                                " rotations for " + std::to_string(n) + " joints");
    }
    for (const auto& r : local_rotations) {
        if (!r.finite()) throw InvalidArgument("forward_kinematics: non-finite rotation");
    }
    for (const auto& t : local_translations) {
        if (!t.finite()) throw InvalidArgument("forward_kinematics: non-finite translation");
    }

    std::vector<Vec3> positions(n);
    std::vector<Mat3> world(n);
    const auto& joints = skeleton.joints();
    for (std::size_t j = 0; j < n; ++j) {
        const Vec3 local = joints[j].offset + local_translations[j];
        if (!joints[j].parent) {
            world[j] = local_rotations[j];
            positions[j] = local;
        } else {
            const std::size_t p = *joints[j].parent;
            world[j] = world[p] * local_rotations[j];
            positions[j] = positions[p] + world[p] * local;
        }
    }
    return positions;
}

inline std::vector<Vec3> forward_kinematics(const Skeleton& skeleton, std::span<const Mat3> local_rotations,
                                            const Vec3& root_translation) {
    std::vector<Vec3> translations(skeleton.joint_count());
    if (!translations.empty()) translations[0] = root_translation;
    return forward_kinematics(skeleton, local_rotations, std::span<const Vec3>(translations));
}

// Subtracts the pelvis' floor projection (x, z) from every joint.
inline Pose to_root_relative(std::span<const Vec3> world, std::size_t pelvis) {
    if (pelvis >= world.size()) throw InvalidArgument("to_root_relative: pelvis index out of range");
    for (const auto& p : world) {
        if (!p.finite()) throw InvalidArgument("to_root_relative: non-finite position");
    }
    const Vec3 shift{world[pelvis].x, 0.0, world[pelvis].z};
    Pose pose;
    pose.positions.reserve(world.size());
    for (const auto& p : world) pose.positions.push_back(p - shift);
    pose.positions[pelvis].x = 0.0;
    pose.positions[pelvis].z = 0.0;
    return pose;
}

inline Pose to_root_relative(const Pose& pose, std::size_t pelvis) {
    return to_root_relative(std::span<const Vec3>(pose.positions), pelvis);
}

// Joint-major layout: x, y, z of joint 0, then joint 1, ...
inline std::vector<double> flatten(const Pose& pose) {
    std::vector<double> out;
    out.reserve(pose.positions.size() * 3);
    for (const auto& p : pose.positions) {
        out.push_back(p.x);
        out.push_back(p.y);
        out.push_back(p.z);
    }
    return out;
}

template <typename T>
Pose unflatten(std::span<const T> values, std::size_t joint_count) {
    if (values.size() != joint_count * 3) {
        throw DimensionMismatch("unflatten: " + std::to_string(values.size()) + " values for " +
                                std::to_string(joint_count) + " joints");
    }
    Pose pose;
    pose.positions.resize(joint_count);
    for (std::size_t j = 0; j < joint_count; ++j) {
        pose.positions[j] = {static_cast<double>(values[3 * j]), static_cast<double>(values[3 * j + 1]),
                             static_cast<double>(values[3 * j + 2])};
    }
    return pose;
}

inline Pose unflatten(const std::vector<double>& values, std::size_t joint_count) {
    return unflatten(std::span<const double>(values), joint_count);
}

inline Pose unflatten(const std::vector<double>& values) {
    if (values.size() % 3 != 0) throw DimensionMismatch("unflatten: length not divisible by 3");
    return unflatten(values, values.size() / 3);
}

inline NormalizationStats compute_stats(std::span<const std::vector<double>> dataset) {
    if (dataset.empty()) throw InvalidArgument("compute_stats: empty dataset");
    const std::size_t d = dataset.front().size();
    std::vector<double> mean(d, 0.0);
    for (const auto& row : dataset) {
        if (row.size() != d) throw DimensionMismatch("compute_stats: rows differ in length");
        for (std::size_t i = 0; i < d; ++i) mean[i] += row[i];
    }
    const double n = static_cast<double>(dataset.size());
    for (auto& m : mean) m /= n;

    std::vector<double> var(d, 0.0);
    for (const auto& row : dataset) {
        for (std::size_t i = 0; i < d; ++i) {
            const double r = row[i] - mean[i];
            var[i] += r * r;
        }
    }
    std::vector<double> sd(d);
    for (std::size_t i = 0; i < d; ++i) sd[i] = std::max(std::sqrt(var[i] / n), kStdFloor);
    return {std::move(mean), std::move(sd)};
}

inline NormalizationStats compute_stats(std::span<const AnimationClip> clips) {
    std::vector<std::vector<double>> rows;
    for (const auto& c : clips) {
        for (const auto& p : c.poses) rows.push_back(flatten(p));
    }
    return compute_stats(std::span<const std::vector<double>>(rows));
}

inline std::vector<double> normalize(std::span<const double> x, const NormalizationStats& stats) {
    if (x.size() != stats.size()) throw DimensionMismatch("normalize: length differs from stats");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - stats.mean[i]) / stats.std[i];
    return out;
}

inline std::vector<double> denormalize(std::span<const double> x, const NormalizationStats& stats) {
    if (x.size() != stats.size()) throw DimensionMismatch("denormalize: length differs from stats");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * stats.std[i] + stats.mean[i];
    return out;
}

// Mean Euclidean distance between corresponding joints.
inline double mean_joint_distance(const Pose& a, const Pose& b) {
    if (a.joint_count() != b.joint_count() || a.joint_count() == 0) {
        throw DimensionMismatch("mean_joint_distance: joint counts differ");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < a.joint_count(); ++j) sum += (a[j] - b[j]).norm();
    return sum / static_cast<double>(a.joint_count());
}

// 21-joint humanoid in meters, pelvis at the root, rest pose standing upright facing +z.
inline Skeleton default_humanoid() {
    std::vector<Joint> j{
        {"Hips", std::nullopt, {0.0, 0.0, 0.0}},   // 0
        {"Spine", 0, {0.0, 0.12, 0.0}},             // 1
        {"Spine1", 1, {0.0, 0.24, 0.0}},            // 2
        {"Neck", 2, {0.0, 0.16, 0.0}},              // 3
        {"Head", 3, {0.0, 0.12, 0.0}},              // 4
        {"LeftShoulder", 2, {0.03, 0.09, 0.0}},     // 5
        {"LeftArm", 5, {0.15, 0.0, 0.0}},           // 6
        {"LeftForeArm", 6, {0.28, 0.0, 0.0}},       // 7
        {"LeftHand", 7, {0.25, 0.0, 0.0}},          // 8
        {"RightShoulder", 2, {-0.03, 0.09, 0.0}},   // 9
        {"RightArm", 9, {-0.15, 0.0, 0.0}},         // 10
        {"RightForeArm", 10, {-0.28, 0.0, 0.0}},    // 11
        {"RightHand", 11, {-0.25, 0.0, 0.0}},       // 12
        {"LeftUpLeg", 0, {0.1, -0.05, 0.0}},        // 13
        {"LeftLeg", 13, {0.0, -0.43, 0.0}},         // 14
        {"LeftFoot", 14, {0.0, -0.42, 0.0}},        // 15
        {"LeftToeBase", 15, {0.0, -0.05, 0.13}},    // 16
        {"RightUpLeg", 0, {-0.1, -0.05, 0.0}},      // 17
        {"RightLeg", 17, {0.0, -0.43, 0.0}},        // 18
        {"RightFoot", 18, {0.0, -0.42, 0.0}},       // 19
        {"RightToeBase", 19, {0.0, -0.05, 0.13}},   // 20
    };
    std::map<std::string, std::size_t> roles{
        {role::kPelvis, 0},     {role::kSpine1, 2}, {role::kNeck, 3},  {role::kLShoulder, 6},
        {role::kRShoulder, 10}, {role::kLKnee, 14}, {role::kRKnee, 18},
    };
    return Skeleton(std::move(j), std::move(roles));
}

}  // namespace posemetric
