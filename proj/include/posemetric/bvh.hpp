#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "posemetric/dataset.hpp"
#include "posemetric/error.hpp"
#include "posemetric/geometry.hpp"
#include "posemetric/skeleton.hpp"

namespace posemetric::bvh {

enum class Channel { Xposition, Yposition, Zposition, Xrotation, Yrotation, Zrotation };

inline std::optional<Channel> channel_from_name(std::string_view s) {
    if (s == "Xposition") return Channel::Xposition;
    if (s == "Yposition") return Channel::Yposition;
    if (s == "Zposition") return Channel::Zposition;
    if (s == "Xrotation") return Channel::Xrotation;
    if (s == "Yrotation") return Channel::Yrotation;
    if (s == "Zrotation") return Channel::Zrotation;
    return std::nullopt;
}

inline bool is_rotation(Channel c) { return c >= Channel::Xrotation; }

struct Document {
    Skeleton skeleton;  // joints in depth-first document order, no roles, End Sites omitted
    std::vector<std::vector<Channel>> channels;  // per joint, in declaration order
    std::vector<std::vector<double>> frames;     // one row of channel values per frame
    double frame_time = 0.0;

    std::size_t channel_count() const {
        std::size_t n = 0;
        for (const auto& c : channels) n += c.size();
        return n;
    }

    bool operator==(const Document&) const = default;
};

namespace detail {

struct Token {
    std::string text;
    std::size_t line;
};

inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '{' || c == '}') {
            out.push_back({std::string(1, c), line});
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '{' &&
                   text[j] != '}') {
                ++j;
            }
            out.push_back({std::string(text.substr(i, j - i)), line});
            i = j;
        }
    }
    return out;
}

inline double to_number(const Token& t) {
    double v = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ParseError(t.line, "expected a number, found '" + t.text + "'");
    }
    return v;
}

class HierarchyParser {
public:
    explicit HierarchyParser(const std::vector<Token>& tokens) : tokens_(tokens) {}

    std::size_t parse(std::vector<Joint>& joints, std::vector<std::vector<Channel>>& channels) {
        expect("HIERARCHY");
        const Token& root = next("ROOT");
        if (root.text != "ROOT") throw ParseError(root.line, "expected ROOT, found '" + root.text + "'");
        joint(std::nullopt, joints, channels);
        return pos_;
    }

private:
    const Token& next(const char* context) {
        if (pos_ >= tokens_.size()) {
            const std::size_t line = tokens_.empty() ? 1 : tokens_.back().line;
            throw ParseError(line, std::string("unexpected end of file, expected ") + context);
        }
        return tokens_[pos_++];
    }

    void expect(const char* word) {
        const Token& t = next(word);
        if (t.text != word) throw ParseError(t.line, std::string("expected '") + word + "', found '" + t.text + "'");
    }

    Vec3 offset() {
        expect("OFFSET");
        const double x = to_number(next("offset x"));
        const double y = to_number(next("offset y"));
        const double z = to_number(next("offset z"));
        return {x, y, z};
    }

    void joint(std::optional<std::size_t> parent, std::vector<Joint>& joints,
               std::vector<std::vector<Channel>>& channels) {
        const Token& name = next("joint name");
        if (name.text == "{" || name.text == "}") throw ParseError(name.line, "joint is missing a name");
        const Token& open = next("'{'");
        if (open.text != "{") throw ParseError(open.line, "expected '{' after joint '" + name.text + "'");
        const std::size_t index = joints.size();
        joints.push_back({name.text, parent, offset()});
        channels.emplace_back();

        const Token& kw = next("CHANNELS");
        if (kw.text != "CHANNELS") throw ParseError(kw.line, "expected CHANNELS, found '" + kw.text + "'");
        const Token& count_tok = next("channel count");
        const double count = to_number(count_tok);
        if (count < 0 || count > 6 || count != std::floor(count)) {
            throw ParseError(count_tok.line, "invalid channel count '" + count_tok.text + "'");
        }
        for (int c = 0; c < static_cast<int>(count); ++c) {
            const Token& ch = next("channel name");
            auto parsed = channel_from_name(ch.text);
            if (!parsed) throw ParseError(ch.line, "unknown channel '" + ch.text + "'");
            channels[index].push_back(*parsed);
        }

        while (true) {
            const Token& t = next("'}'");
            if (t.text == "}") return;
            if (t.text == "JOINT") {
                joint(index, joints, channels);
            } else if (t.text == "End") {
                expect("Site");
                const Token& o = next("'{'");
                if (o.text != "{") throw ParseError(o.line, "expected '{' after End Site");
                offset();
                const Token& c = next("'}'");
                if (c.text != "}") throw ParseError(c.line, "expected '}' closing End Site, found '" + c.text + "'");
            } else if (t.text == "MOTION" || t.text == "{") {
                throw ParseError(t.line, "unbalanced braces: joint '" + name.text + "' is not closed");
            } else {
                throw ParseError(t.line, "unexpected token '" + t.text + "' in joint '" + name.text + "'");
            }
        }
    }

    const std::vector<Token>& tokens_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// Parses a BVH document. Errors carry the 1-based line number.
inline Document parse_bvh(std::string_view text) {
    const auto tokens = detail::tokenize(text);
    std::vector<Joint> joints;
    std::vector<std::vector<Channel>> channels;
    std::size_t pos = detail::HierarchyParser(tokens).parse(joints, channels);

    auto take = [&](const char* what) -> const detail::Token& {
        if (pos >= tokens.size()) {
            throw ParseError(tokens.empty() ? 1 : tokens.back().line,
                             std::string("MOTION section: unexpected end of file, expected ") + what);
        }
        return tokens[pos++];
    };
    auto expect = [&](const char* word) {
        const auto& t = take(word);
        if (t.text != word) {
            if (t.text == "}") throw ParseError(t.line, "unbalanced braces: extra '}'");
            throw ParseError(t.line, std::string("expected '") + word + "', found '" + t.text + "'");
        }
    };

    expect("MOTION");
    expect("Frames:");
    const auto& count_tok = take("frame count");
    const double declared = detail::to_number(count_tok);
    if (declared < 0 || declared != std::floor(declared)) {
        throw ParseError(count_tok.line, "MOTION section: invalid frame count '" + count_tok.text + "'");
    }
    expect("Frame");
    expect("Time:");
    const auto& time_tok = take("frame time");
    const double frame_time = detail::to_number(time_tok);
    if (!(frame_time > 0.0)) throw ParseError(time_tok.line, "MOTION section: frame time must be positive");

    std::size_t width = 0;
    for (const auto& c : channels) width += c.size();

    std::vector<std::vector<double>> frames;
    while (pos < tokens.size()) {
        const std::size_t line = tokens[pos].line;
        std::vector<double> row;
        while (pos < tokens.size() && tokens[pos].line == line) row.push_back(detail::to_number(tokens[pos++]));
        if (row.size() != width) {
            throw ParseError(line, "MOTION section: frame has " + std::to_string(row.size()) + " values, expected " +
                                       std::to_string(width));
        }
        frames.push_back(std::move(row));
    }
    if (frames.size() != static_cast<std::size_t>(declared)) {
        throw ParseError(count_tok.line, "MOTION section: header declares " + count_tok.text + " frames but " +
                                             std::to_string(frames.size()) + " rows follow");
    }

    Document doc;
    try {
        doc.skeleton = Skeleton(std::move(joints), {});
    } catch (const InvalidArgument& e) {
        throw ParseError(1, e.what());
    }
    doc.channels = std::move(channels);
    doc.frames = std::move(frames);
    doc.frame_time = frame_time;
    return doc;
}

// Candidate joint names per role; the first name present in a skeleton wins.
using RoleTable = std::map<std::string, std::vector<std::string>>;

inline RoleTable default_role_table() {
    return {
        {role::kPelvis, {"Hips", "hip", "Hip", "Pelvis", "pelvis", "Root"}},
        {role::kNeck, {"Neck", "neck", "Neck1"}},
        {role::kSpine1, {"Spine1", "spine1", "Chest", "chest", "Spine2"}},
        {role::kLShoulder, {"LeftArm", "lShldr", "LeftUpArm", "LeftShoulder"}},
        {role::kRShoulder, {"RightArm", "rShldr", "RightUpArm", "RightShoulder"}},
        {role::kLKnee, {"LeftLeg", "LeftKnee", "lShin", "LeftLowLeg"}},
        {role::kRKnee, {"RightLeg", "RightKnee", "rShin", "RightLowLeg"}},
    };
}

// Override file: {"pelvis": "Hips", "neck": ["Neck", "Neck1"], ...}; listed roles
// replace the default candidates.
inline RoleTable role_table_from_json(const Json& j, RoleTable base = default_role_table()) {
    if (!j.is_object()) throw FormatError("role mapping must be a JSON object");
    for (const auto& [role_name, v] : j.items()) {
        if (v.is_string()) {
            base[role_name] = {v.get<std::string>()};
        } else if (v.is_array()) {
            std::vector<std::string> names;
            for (const auto& n : v) {
                if (!n.is_string()) throw FormatError("role '" + role_name + "' candidates must be strings");
                names.push_back(n.get<std::string>());
            }
            base[role_name] = std::move(names);
        } else {
            throw FormatError("role '" + role_name + "' must map to a joint name or list of names");
        }
    }
    return base;
}

// Resolves roles by name; roles without a matching joint are left unmapped, except
// the pelvis, which is required.
inline Skeleton with_roles(const Skeleton& skeleton, const RoleTable& table) {
    std::map<std::string, std::size_t> roles;
    for (const auto& [role_name, candidates] : table) {
        for (const auto& c : candidates) {
            if (auto j = skeleton.find_joint(c)) {
                roles[role_name] = *j;
                break;
            }
        }
    }
    if (!roles.contains(role::kPelvis)) throw NotFound("no joint matches the pelvis role");
    return Skeleton(skeleton.joints(), std::move(roles));
}

// Scales offsets (e.g. 0.01 for centimeter files).
inline Skeleton scaled(const Skeleton& s, double scale) {
    std::vector<Joint> joints = s.joints();
    for (auto& j : joints) j.offset = j.offset * scale;
    return Skeleton(std::move(joints), s.roles());
}

// Euler channels compose in declaration order: R = R(c1) * R(c2) * R(c3).
inline std::vector<Vec3> frame_world_positions(const Document& doc, const Skeleton& skeleton, std::size_t frame,
                                               double scale = 1.0) {
    const std::size_t n = skeleton.joint_count();
    const auto& row = doc.frames.at(frame);
    std::vector<Mat3> rotations(n);
    std::vector<Vec3> translations(n);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
        for (Channel c : doc.channels[j]) {
            const double v = row[k++];
            switch (c) {
                case Channel::Xposition: translations[j].x = v * scale; break;
                case Channel::Yposition: translations[j].y = v * scale; break;
                case Channel::Zposition: translations[j].z = v * scale; break;
                case Channel::Xrotation: rotations[j] = rotations[j] * Mat3::rotation(Axis::X, deg_to_rad(v)); break;
                case Channel::Yrotation: rotations[j] = rotations[j] * Mat3::rotation(Axis::Y, deg_to_rad(v)); break;
                case Channel::Zrotation: rotations[j] = rotations[j] * Mat3::rotation(Axis::Z, deg_to_rad(v)); break;
            }
        }
    }
    return forward_kinematics(skeleton, rotations, std::span<const Vec3>(translations));
}

// Converts every frame to a root-relative pose.
inline AnimationClip clip_from_bvh(const Document& doc, const std::string& id, const RoleTable& table = default_role_table(),
                                   double scale = 1.0) {
    if (!(doc.frame_time > 0.0) || !std::isfinite(doc.frame_time)) {
        throw InvalidArgument("clip_from_bvh: frame time must be positive");
    }
    if (!(scale > 0.0)) throw InvalidArgument("clip_from_bvh: scale must be positive");
    if (doc.channels.size() != doc.skeleton.joint_count()) {
        throw DimensionMismatch("clip_from_bvh: channel layout does not match the skeleton");
    }
    const Skeleton skeleton = scaled(with_roles(doc.skeleton, table), scale);
    const std::size_t pelvis = skeleton.role(role::kPelvis);
    const std::size_t width = doc.channel_count();

    AnimationClip clip;
    clip.id = id;
    clip.frame_rate = 1.0 / doc.frame_time;
    clip.poses.reserve(doc.frames.size());
    for (std::size_t f = 0; f < doc.frames.size(); ++f) {
        if (doc.frames[f].size() != width) throw DimensionMismatch("clip_from_bvh: frame row width mismatch");
        const auto world = frame_world_positions(doc, skeleton, f, scale);
        clip.poses.push_back(to_root_relative(world, pelvis));
    }
    return clip;
}

}  // namespace posemetric::bvh
