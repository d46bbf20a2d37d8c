#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "posemetric/error.hpp"
#include "posemetric/skeleton.hpp"

namespace posemetric {

using Json = nlohmann::json;

// A skeleton, its normalization statistics and root-relative clips.
struct Dataset {
    Skeleton skeleton;
    NormalizationStats stats;
    std::vector<AnimationClip> clips;

    std::size_t pose_count() const {
        std::size_t n = 0;
        for (const auto& c : clips) n += c.frame_count();
        return n;
    }

    const AnimationClip& clip(const std::string& id) const {
        for (const auto& c : clips) {
            if (c.id == id) return c;
        }
        throw NotFound("no clip with id '" + id + "'");
    }
};

// Rounds to 32-bit and back through a 9-significant-digit decimal, which is the
// exact textual form written to disk.
inline double float9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v)));
    return std::strtod(buf, nullptr);
}

inline Json float9_array(const std::vector<double>& values) {
    Json a = Json::array();
    for (double v : values) a.push_back(float9(v));
    return a;
}

inline Json to_json(const Skeleton& s) {
    Json joints = Json::array();
    for (const auto& j : s.joints()) {
        Json e{{"name", j.name}, {"offset", {float9(j.offset.x), float9(j.offset.y), float9(j.offset.z)}}};
        e["parent"] = j.parent ? Json(*j.parent) : Json(nullptr);
        joints.push_back(std::move(e));
    }
    Json roles = Json::object();
    for (const auto& [name, idx] : s.roles()) roles[name] = idx;
    return {{"joints", std::move(joints)}, {"roles", std::move(roles)}};
}

inline Json to_json(const NormalizationStats& s) {
    return {{"mean", float9_array(s.mean)}, {"std", float9_array(s.std)}};
}

inline Json pose_to_json(const Pose& p) { return float9_array(flatten(p)); }

inline Json to_json(const AnimationClip& c) {
    Json frames = Json::array();
    for (const auto& p : c.poses) frames.push_back(pose_to_json(p));
    return {{"id", c.id}, {"frame_rate", float9(c.frame_rate)}, {"frames", std::move(frames)}};
}

inline Json to_json(const Dataset& d) {
    const std::size_t j = d.skeleton.joint_count();
    Json clips = Json::array();
    for (const auto& c : d.clips) {
        c.validate();
        if (c.joint_count() != j) {
            throw DimensionMismatch("clip '" + c.id + "' has " + std::to_string(c.joint_count()) +
                                    " joints, skeleton has " + std::to_string(j));
        }
        clips.push_back(to_json(c));
    }
    return {{"skeleton", to_json(d.skeleton)}, {"stats", to_json(d.stats)}, {"clips", std::move(clips)}};
}

namespace detail {

inline std::vector<double> number_array(const Json& a, const std::string& what) {
    if (!a.is_array()) throw FormatError(what + " must be an array");
    std::vector<double> out;
    out.reserve(a.size());
    for (const auto& v : a) {
        if (!v.is_number()) throw FormatError(what + " must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace detail

inline Skeleton skeleton_from_json(const Json& j) {
    try {
        std::vector<Joint> joints;
        for (const auto& e : j.at("joints")) {
            auto off = detail::number_array(e.at("offset"), "joint offset");
            if (off.size() != 3) throw FormatError("joint offset must have 3 components");
            Joint jt{e.at("name").get<std::string>(), std::nullopt, {off[0], off[1], off[2]}};
            if (!e.at("parent").is_null()) jt.parent = e.at("parent").get<std::size_t>();
            joints.push_back(std::move(jt));
        }
        std::map<std::string, std::size_t> roles;
        if (j.contains("roles")) {
            for (const auto& [k, v] : j.at("roles").items()) roles[k] = v.get<std::size_t>();
        }
        return Skeleton(std::move(joints), std::move(roles));
    } catch (const Json::exception& e) {
        throw FormatError(std::string("skeleton: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("skeleton: ") + e.what());
    }
}

inline NormalizationStats stats_from_json(const Json& j) {
    try {
        NormalizationStats s{detail::number_array(j.at("mean"), "stats.mean"),
                             detail::number_array(j.at("std"), "stats.std")};
        if (s.mean.size() != s.std.size()) throw FormatError("stats mean and std differ in length");
        for (double v : s.std) {
            if (!(v > 0.0)) throw FormatError("stats std entries must be positive");
        }
        return s;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("stats: ") + e.what());
    }
}

inline AnimationClip clip_from_json(const Json& j, std::size_t joint_count) {
    try {
        AnimationClip c;
        c.id = j.at("id").get<std::string>();
        c.frame_rate = j.at("frame_rate").get<double>();
        for (const auto& f : j.at("frames")) {
            auto values = detail::number_array(f, "frame");
            if (values.size() != joint_count * 3) {
                throw DimensionMismatch("clip '" + c.id + "' has a frame of " + std::to_string(values.size()) +
                                        " values, expected " + std::to_string(joint_count * 3));
            }
            c.poses.push_back(unflatten(values, joint_count));
        }
        c.validate();
        return c;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("clip: ") + e.what());
    }
}

inline Dataset dataset_from_json(const Json& j) {
    try {
        Dataset d;
        d.skeleton = skeleton_from_json(j.at("skeleton"));
        d.stats = stats_from_json(j.at("stats"));
        const std::size_t joints = d.skeleton.joint_count();
        if (!d.stats.mean.empty() && d.stats.size() != joints * 3) {
            throw DimensionMismatch("stats length " + std::to_string(d.stats.size()) + " does not match 3J = " +
                                    std::to_string(joints * 3));
        }
        for (const auto& c : j.at("clips")) d.clips.push_back(clip_from_json(c, joints));
        return d;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("dataset: ") + e.what());
    }
}

namespace detail {

inline void dump9_into(const Json& j, std::string& out) {
    switch (j.type()) {
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += Json(it.key()).dump();
                out += ':';
                dump9_into(it.value(), out);
            }
            out += '}';
            break;
        }
        case Json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                dump9_into(v, out);
            }
            out += ']';
            break;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                break;
            }
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.9g", v);
            out += buf;
            break;
        }
        default: out += j.dump();
    }
}

}  // namespace detail

// Compact JSON with every float written at 9 significant digits.
inline std::string dump9(const Json& j) {
    std::string out;
    detail::dump9_into(j, out);
    return out;
}

inline std::string dump_json(const Json& j) { return dump9(j) + "\n"; }

inline Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw FormatError(origin + ": malformed JSON: " + e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error("failed writing '" + path + "'");
}

inline void write_dataset(const Dataset& d, const std::string& path) { write_text_file(path, dump_json(to_json(d))); }

inline Dataset read_dataset(const std::string& path) {
    return dataset_from_json(parse_json_text(read_text_file(path), path));
}

}  // namespace posemetric
