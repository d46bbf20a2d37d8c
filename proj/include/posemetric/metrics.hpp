#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posemetric/error.hpp"
#include "posemetric/geometry.hpp"
#include "posemetric/skeleton.hpp"

namespace posemetric {

inline constexpr double kMinVectorLength = 1e-9;

// Angle between u and v in [0, pi]. The cosine is clamped before acos so that
// nearly parallel inputs cannot produce NaN.
inline double vector_angle(const Vec3& u, const Vec3& v) {
    const double nu = u.norm();
    const double nv = v.norm();
    if (!(nu > kMinVectorLength) || !(nv > kMinVectorLength)) {
        throw DegenerateVector("vector_angle: zero-length vector");
    }
    const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
    return std::acos(c);
}

// Named scalar function of a single pose, in radians.
struct MetricDef {
    std::string name;
    std::vector<std::string> required_roles;
    std::function<double(const Pose&, const Skeleton&)> evaluate;
};

struct MetricStats {
    double mean = 0.0;
    double std = kStdFloor;

    double standardize(double value) const { return (value - mean) / std; }
    bool operator==(const MetricStats&) const = default;
};

namespace detail {

inline const Vec3& joint_for(const Pose& pose, const Skeleton& skeleton, const char* role_name) {
    const std::size_t j = skeleton.role(role_name);
    if (j >= pose.joint_count()) throw DimensionMismatch("pose has fewer joints than the skeleton");
    return pose[j];
}

}  // namespace detail

// Angle between the spine axis (pelvis to neck) and world up.
inline double spine_flexion(const Pose& pose, const Skeleton& skeleton) {
    const Vec3& neck = detail::joint_for(pose, skeleton, role::kNeck);
    const Vec3& pelvis = detail::joint_for(pose, skeleton, role::kPelvis);
    return vector_angle(neck - pelvis, kWorldUp);
}

inline double shoulders_openness(const Pose& pose, const Skeleton& skeleton) {
    const Vec3& spine1 = detail::joint_for(pose, skeleton, role::kSpine1);
    const Vec3& rs = detail::joint_for(pose, skeleton, role::kRShoulder);
    const Vec3& ls = detail::joint_for(pose, skeleton, role::kLShoulder);
    return vector_angle(spine1 - rs, ls - spine1);
}

inline double legs_spread(const Pose& pose, const Skeleton& skeleton) {
    const Vec3& pelvis = detail::joint_for(pose, skeleton, role::kPelvis);
    const Vec3& rk = detail::joint_for(pose, skeleton, role::kRKnee);
    const Vec3& lk = detail::joint_for(pose, skeleton, role::kLKnee);
    return vector_angle(pelvis - rk, lk - pelvis);
}

// Lookup table of metrics by exact name. Configure once at startup, then share
// by const reference; all const members are safe to call concurrently.
class MetricRegistry {
public:
    MetricRegistry() = default;

    static MetricRegistry with_builtins() {
        MetricRegistry r;
        r.register_metric({"spine_flexion", {role::kNeck, role::kPelvis}, spine_flexion});
        r.register_metric(
            {"shoulders_openness", {role::kSpine1, role::kRShoulder, role::kLShoulder}, shoulders_openness});
        r.register_metric({"legs_spread", {role::kPelvis, role::kRKnee, role::kLKnee}, legs_spread});
        return r;
    }

    void register_metric(MetricDef def) {
        if (def.name.empty()) throw InvalidArgument("metric name must not be empty");
        if (!def.evaluate) throw InvalidArgument("metric '" + def.name + "' has no evaluator");
        if (contains(def.name)) throw InvalidArgument("metric '" + def.name + "' is already registered");
        auto pos = std::lower_bound(defs_.begin(), defs_.end(), def.name,
                                    [](const MetricDef& d, const std::string& n) { return d.name < n; });
        defs_.insert(pos, std::move(def));
    }

    bool contains(const std::string& name) const { return find(name) != nullptr; }

    const MetricDef& get(const std::string& name) const {
        if (const MetricDef* d = find(name)) return *d;
        throw NotFound("unknown metric '" + name + "' (registered: " + names_joined() + ")");
    }

    // Sorted by name.
    const std::vector<MetricDef>& list() const { return defs_; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& d : defs_) out.push_back(d.name);
        return out;
    }

    std::string names_joined() const {
        std::string s;
        for (const auto& d : defs_) {
            if (!s.empty()) s += ", ";
            s += d.name;
        }
        return s;
    }

    // Checks that every role the metric needs exists in the skeleton.
    void check_roles(const std::string& name, const Skeleton& skeleton) const {
        for (const auto& r : get(name).required_roles) {
            if (!skeleton.has_role(r)) {
                throw NotFound("metric '" + name + "' needs role '" + r + "' which the skeleton lacks");
            }
        }
    }

    double evaluate(const std::string& name, const Pose& pose, const Skeleton& skeleton) const {
        return get(name).evaluate(pose, skeleton);
    }

    // Mean and population std over every pose; std floored at 1e-8.
    MetricStats metric_stats(const std::string& name, std::span<const Pose> poses,
                             const Skeleton& skeleton) const {
        if (poses.empty()) throw InvalidArgument("metric_stats: empty dataset");
        const MetricDef& def = get(name);
        std::vector<double> values;
        values.reserve(poses.size());
        for (const auto& p : poses) values.push_back(def.evaluate(p, skeleton));
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        return {mean, std::max(std::sqrt(var), kStdFloor)};
    }

    MetricStats metric_stats(const std::string& name, std::span<const AnimationClip> clips,
                             const Skeleton& skeleton) const {
        std::vector<Pose> all;
        for (const auto& c : clips) all.insert(all.end(), c.poses.begin(), c.poses.end());
        return metric_stats(name, std::span<const Pose>(all), skeleton);
    }

private:
    const MetricDef* find(const std::string& name) const {
        for (const auto& d : defs_) {
            if (d.name == name) return &d;
        }
        return nullptr;
    }

    std::vector<MetricDef> defs_;
};

}  // namespace posemetric
