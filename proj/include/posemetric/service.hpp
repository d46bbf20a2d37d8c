#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "posemetric/bundle.hpp"
#include "posemetric/dataset.hpp"
#include "posemetric/latent.hpp"
#include "posemetric/metrics.hpp"

namespace posemetric::service {

struct Response {
    int status = 200;
    std::string body;
};

// Thrown inside handlers and turned into an {code, message} body.
class HttpError : public Error {
public:
    HttpError(int status, std::string code, const std::string& what)
        : Error(what), status_(status), code_(std::move(code)) {}
    int status() const { return status_; }
    const std::string& code() const { return code_; }

private:
    int status_;
    std::string code_;
};

namespace detail {

inline Response json_response(int status, const Json& j) { return {status, dump9(j)}; }

inline Response error_response(int status, const std::string& code, const std::string& message) {
    return json_response(status, Json{{"code", code}, {"message", message}});
}

inline HttpError unprocessable(const std::string& what) { return HttpError(422, "invalid_request", what); }

inline std::optional<double> try_evaluate(const MetricDef& def, const Pose& pose, const Skeleton& skeleton) {
    try {
        const double v = def.evaluate(pose, skeleton);
        if (std::isfinite(v)) return v;
    } catch (const DegenerateVector&) {
    }
    return std::nullopt;
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(float9(*v)) : Json(nullptr); }

// Values as they will appear on the wire.
inline Pose wire_pose(const Pose& p) {
    Pose out = p;
    for (auto& v : out.positions) v = {float9(v.x), float9(v.y), float9(v.z)};
    return out;
}

struct Target {
    std::string metric;
    double value;
};

}  // namespace detail

// Stateless JSON API over a loaded bundle and dataset. Requests never modify the
// loaded state, so any sequence of requests can be replayed with identical bodies.
class EditService {
public:
    struct Options {
        std::size_t threads = 1;  // per-frame workers for clip edits
    };

    EditService() = default;

    void load(ModelBundle bundle, Dataset dataset, MetricRegistry registry, Options options) {
        auto s = std::make_shared<State>();
        s->bundle = std::move(bundle);
        s->dataset = std::move(dataset);
        s->registry = std::move(registry);
        s->options = options;
        if (s->bundle.model.joint_count() != s->dataset.skeleton.joint_count()) {
            throw DimensionMismatch("bundle expects " + std::to_string(s->bundle.model.joint_count()) +
                                    " joints, dataset skeleton has " +
                                    std::to_string(s->dataset.skeleton.joint_count()));
        }
        for (const auto& def : s->registry.list()) {
            bool usable = !s->dataset.clips.empty();
            for (const auto& r : def.required_roles) usable = usable && s->dataset.skeleton.has_role(r);
            if (!usable) continue;
            try {
                s->metric_stats.emplace_back(
                    def.name, s->registry.metric_stats(def.name, s->dataset.clips, s->dataset.skeleton));
            } catch (const DegenerateVector&) {
                // undefined on some dataset pose; not offered
            }
        }
        std::lock_guard lock(mutex_);
        state_ = std::move(s);
    }

    bool loaded() const { return snapshot() != nullptr; }

    Response handle(const std::string& method, const std::string& path, const std::string& body) const {
        try {
            const auto s = snapshot();
            if (method == "GET" && path == "/api/health") return health(s.get());
            if (!s) throw HttpError(503, "not_ready", "model bundle is not loaded yet");
            if (method == "GET" && path == "/api/metrics") return metrics(*s);
            if (method == "GET" && path == "/api/clips") return clips(*s);
            const std::string clip_prefix = "/api/clips/";
            if (method == "GET" && path.starts_with(clip_prefix) && path.size() > clip_prefix.size()) {
                return clip(*s, path.substr(clip_prefix.size()));
            }
            if (method == "POST" && path == "/api/edit/pose") return edit_pose(*s, parse(body));
            if (method == "POST" && path == "/api/edit/clip") return edit_clip(*s, parse(body));
            throw HttpError(404, "not_found", "no route for " + method + " " + path);
        } catch (const HttpError& e) {
            return detail::error_response(e.status(), e.code(), e.what());
        } catch (const std::exception& e) {
            return detail::error_response(500, "internal", e.what());
        }
    }

private:
    struct State {
        ModelBundle bundle;
        Dataset dataset;
        MetricRegistry registry;
        Options options;
        std::vector<std::pair<std::string, MetricStats>> metric_stats;  // sorted by name
    };

    std::shared_ptr<const State> snapshot() const {
        std::lock_guard lock(mutex_);
        return state_;
    }

    static Json parse(const std::string& body) {
        Json j = Json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw detail::unprocessable("request body must be a JSON object");
        return j;
    }

    static Response health(const State* s) {
        if (!s) throw HttpError(503, "not_ready", "model bundle is not loaded yet");
        return detail::json_response(200, Json{{"status", "ok"},
                                               {"bundle_version", kBundleFormatVersion},
                                               {"joint_count", s->bundle.model.joint_count()},
                                               {"latent_dim", s->bundle.model.latent_dim()}});
    }

    static Response metrics(const State& s) {
        Json list = Json::array();
        for (const auto& [name, st] : s.metric_stats) {
            list.push_back({{"name", name},
                            {"required_roles", s.registry.get(name).required_roles},
                            {"mean", float9(st.mean)},
                            {"std", float9(st.std)},
                            {"editable", s.bundle.metrics.count(name) > 0}});
        }
        return detail::json_response(200, Json{{"metrics", std::move(list)}});
    }

    static Response clips(const State& s) {
        Json list = Json::array();
        for (const auto& c : s.dataset.clips) {
            list.push_back({{"id", c.id}, {"frame_rate", float9(c.frame_rate)}, {"frame_count", c.frame_count()}});
        }
        return detail::json_response(200, Json{{"clips", std::move(list)}});
    }

    static const AnimationClip& find_clip(const State& s, const std::string& id) {
        for (const auto& c : s.dataset.clips) {
            if (c.id == id) return c;
        }
        throw HttpError(404, "not_found", "no clip with id '" + id + "'");
    }

    static Response clip(const State& s, const std::string& id) {
        const AnimationClip& c = find_clip(s, id);
        Json frames = Json::array();
        for (const auto& p : c.poses) frames.push_back(pose_to_json(p));
        Json values = Json::object();
        for (const auto& [name, st] : s.metric_stats) {
            Json per = Json::array();
            const MetricDef& def = s.registry.get(name);
            for (const auto& p : c.poses) per.push_back(detail::optional_number(detail::try_evaluate(def, p, s.dataset.skeleton)));
            values[name] = std::move(per);
        }
        return detail::json_response(200, Json{{"id", c.id},
                                               {"frame_rate", float9(c.frame_rate)},
                                               {"frame_count", c.frame_count()},
                                               {"joint_count", s.dataset.skeleton.joint_count()},
                                               {"frames", std::move(frames)},
                                               {"metrics", std::move(values)}});
    }

    static std::vector<detail::Target> targets(const State& s, const Json& req) {
        if (!req.contains("targets") || !req["targets"].is_array()) {
            throw detail::unprocessable("'targets' must be a list of {metric, value}");
        }
        std::vector<detail::Target> out;
        for (const auto& t : req["targets"]) {
            if (!t.is_object() || !t.contains("metric") || !t["metric"].is_string() || !t.contains("value") ||
                !t["value"].is_number()) {
                throw detail::unprocessable("each target needs a string 'metric' and a numeric 'value'");
            }
            const auto name = t["metric"].get<std::string>();
            const double value = t["value"].get<double>();
            if (!std::isfinite(value)) throw detail::unprocessable("target for '" + name + "' is not finite");
            if (!s.bundle.metrics.count(name)) {
                std::string have;
                for (const auto& [k, v] : s.bundle.metrics) have += (have.empty() ? "" : ", ") + k;
                throw detail::unprocessable("no trained network for metric '" + name + "' (available: " +
                                            (have.empty() ? std::string("none") : have) + ")");
            }
            out.push_back({name, value});
        }
        if (out.empty()) throw detail::unprocessable("at least one target is required");
        return out;
    }

    static std::vector<std::unique_ptr<MetricTarget>> modules(const State& s,
                                                              const std::vector<detail::Target>& ts) {
        std::vector<std::unique_ptr<MetricTarget>> out;
        for (const auto& t : ts) out.push_back(std::make_unique<MetricTarget>(s.bundle.metric(t.metric), t.value));
        return out;
    }

    static std::vector<const LatentModule*> pointers(const std::vector<std::unique_ptr<MetricTarget>>& ms) {
        std::vector<const LatentModule*> out;
        for (const auto& m : ms) out.push_back(m.get());
        return out;
    }

    static Response edit_pose(const State& s, const Json& req) {
        const auto ts = targets(s, req);
        const std::size_t j = s.dataset.skeleton.joint_count();
        if (!req.contains("pose") || !req["pose"].is_array()) throw detail::unprocessable("'pose' must be a list");
        std::vector<double> flat;
        for (const auto& v : req["pose"]) {
            if (!v.is_number()) throw detail::unprocessable("'pose' must contain numbers only");
            flat.push_back(v.get<double>());
        }
        if (flat.size() != 3 * j) {
            throw detail::unprocessable("'pose' has " + std::to_string(flat.size()) + " values, expected " +
                                        std::to_string(3 * j));
        }
        Pose pose = unflatten(flat, j);
        if (!pose.finite()) throw detail::unprocessable("'pose' contains non-finite values");
        pose = to_root_relative(pose, s.dataset.skeleton.role(role::kPelvis));

        const auto mods = modules(s, ts);
        const auto ptrs = pointers(mods);
        const Pose edited = detail::wire_pose(posemetric::edit_pose(s.bundle.model, ptrs, pose));
        Json readouts = Json::array();
        for (const auto& [name, st] : s.metric_stats) {
            const MetricDef& def = s.registry.get(name);
            readouts.push_back({{"name", name},
                                {"before", detail::optional_number(detail::try_evaluate(def, pose, s.dataset.skeleton))},
                                {"after", detail::optional_number(detail::try_evaluate(def, edited, s.dataset.skeleton))}});
        }
        return detail::json_response(200, Json{{"pose", pose_to_json(edited)}, {"readouts", std::move(readouts)}});
    }

    static Response edit_clip(const State& s, const Json& req) {
        if (!req.contains("clip_id") || !req["clip_id"].is_string()) {
            throw detail::unprocessable("'clip_id' must be a string");
        }
        const AnimationClip& c = find_clip(s, req["clip_id"].get<std::string>());
        const auto ts = targets(s, req);
        const auto integer = [&](const char* key, std::int64_t fallback) -> std::int64_t {
            if (!req.contains(key)) return fallback;
            if (!req[key].is_number_integer()) throw detail::unprocessable(std::string("'") + key + "' must be an integer");
            return req[key].get<std::int64_t>();
        };
        const std::int64_t frame = integer("frame", -1);
        const std::int64_t radius = integer("radius", 3);
        if (frame < 0 || static_cast<std::size_t>(frame) >= c.frame_count()) {
            throw detail::unprocessable("'frame' must be in [0, " + std::to_string(c.frame_count() - 1) + "]");
        }
        if (radius < 1) throw detail::unprocessable("'radius' must be >= 1");
        const std::string shape_name = req.value("shape", std::string("hat"));
        CurveShape shape;
        if (shape_name == "hat") {
            shape = CurveShape::Hat;
        } else if (shape_name == "sine") {
            shape = CurveShape::Sine;
        } else {
            throw detail::unprocessable("'shape' must be \"hat\" or \"sine\"");
        }

        const auto curve = make_curve(shape, c.frame_count(), static_cast<std::size_t>(frame),
                                      static_cast<std::size_t>(radius));
        const auto mods = modules(s, ts);
        const auto ptrs = pointers(mods);
        const ClipEdit edit = edit_animation(s.bundle.model, ptrs, c, curve, s.options.threads);

        Json frames = Json::array();
        std::vector<Pose> edited;
        for (const auto& p : edit.clip.poses) {
            edited.push_back(detail::wire_pose(p));
            frames.push_back(pose_to_json(edited.back()));
        }
        Json readouts = Json::array();
        for (const auto& [name, st] : s.metric_stats) {
            const MetricDef& def = s.registry.get(name);
            Json before = Json::array(), after = Json::array();
            for (std::size_t t = 0; t < c.frame_count(); ++t) {
                before.push_back(detail::optional_number(detail::try_evaluate(def, c.poses[t], s.dataset.skeleton)));
                after.push_back(detail::optional_number(detail::try_evaluate(def, edited[t], s.dataset.skeleton)));
            }
            readouts.push_back({{"name", name}, {"before", std::move(before)}, {"after", std::move(after)}});
        }
        return detail::json_response(200, Json{{"clip_id", c.id},
                                               {"frame_rate", float9(c.frame_rate)},
                                               {"weights", float9_array(curve.weights)},
                                               {"frames", std::move(frames)},
                                               {"readouts", std::move(readouts)}});
    }

    mutable std::mutex mutex_;
    std::shared_ptr<const State> state_;
};

// HTTP front end for EditService. Binds to localhost unless told otherwise.
class HttpServer {
public:
    explicit HttpServer(const EditService& service) : service_(service) {
        const auto route = [this](const httplib::Request& req, httplib::Response& res) {
            const Response r = service_.handle(req.method, req.path, req.body);
            res.status = r.status;
            res.set_content(r.body, "application/json");
        };
        server_.Get(R"(/api/.*)", route);
        server_.Post(R"(/api/.*)", route);
    }

    ~HttpServer() { stop(); }

    // Binds and starts serving on a background thread; returns the bound port
    // (pass port 0 for any free port).
    int start(const std::string& host = "127.0.0.1", int port = 0) {
        const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
        if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return bound;
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    void wait() {
        if (thread_.joinable()) thread_.join();
    }

private:
    const EditService& service_;
    httplib::Server server_;
    std::thread thread_;
};

}  // namespace posemetric::service
