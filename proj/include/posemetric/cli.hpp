#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "posemetric/bundle.hpp"
#include "posemetric/bvh.hpp"
#include "posemetric/dataset.hpp"
#include "posemetric/evaluation.hpp"
#include "posemetric/latent.hpp"
#include "posemetric/metrics.hpp"
#include "posemetric/service.hpp"
#include "posemetric/synthetic.hpp"

namespace posemetric::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

// Bad flags, missing paths or unusable input files.
class UsageError : public Error {
public:
    using Error::Error;
};

struct Context {
    std::ostream& out;
    std::ostream& err;
    // serve: called once the socket is bound.
    std::function<void(int port)> on_listening = {};
    // serve: returns when this becomes true; null serves until killed.
    const std::atomic<bool>* stop = nullptr;
};

namespace detail {

namespace fs = std::filesystem;

inline std::uint64_t default_seed(std::uint64_t fallback) {
    const char* env = std::getenv("POSEMETRIC_SEED");
    if (!env || !*env) return fallback;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || env[0] == '-') {
        throw UsageError(std::string("POSEMETRIC_SEED must be an unsigned integer, got '") + env + "'");
    }
    return v;
}

inline void require_file(const std::string& path, const char* what) {
    if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " '" + path + "' does not exist");
}

inline void require_dir(const std::string& path, const char* what) {
    if (!fs::is_directory(path)) throw UsageError(std::string(what) + " '" + path + "' is not a directory");
}

inline void require_bundle(const std::string& dir) {
    require_dir(dir, "bundle");
    if (!fs::is_regular_file(fs::path(dir) / "bundle.json")) throw UsageError("no bundle.json in '" + dir + "'");
}

inline void require_parent(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty() && !fs::is_directory(parent)) {
        throw UsageError("output directory '" + parent.string() + "' does not exist");
    }
}

struct Overrides {
    double lr = TrainingConfig{}.learning_rate;
    std::size_t batch = TrainingConfig{}.batch_size;
    std::size_t steps = TrainingConfig{}.steps;
    std::uint64_t seed = TrainingConfig{}.seed;
    std::size_t patience = TrainingConfig{}.patience;
    std::size_t eval_every = TrainingConfig{}.eval_every;
    std::size_t threads = 1;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--lr", lr, "Adam learning rate")->capture_default_str();
        cmd.add_option("--batch", batch, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
        cmd.add_option("--steps", steps, "Maximum optimizer steps")->capture_default_str();
        cmd.add_option("--seed", seed, "Seed (default: $POSEMETRIC_SEED or 1)");
        cmd.add_option("--patience", patience, "Validation checks without improvement before stopping (0 = never)")
            ->capture_default_str();
        cmd.add_option("--eval-every", eval_every, "Steps between validation checks")->capture_default_str();
        cmd.add_option("--threads", threads, "Worker threads (1 = deterministic reference mode)")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
    }

    TrainingConfig config() const {
        TrainingConfig c;
        c.learning_rate = lr;
        c.batch_size = batch;
        c.steps = steps;
        c.seed = seed;
        c.patience = patience;
        c.eval_every = eval_every;
        c.threads = threads;
        c.validate();
        return c;
    }
};

inline void print_report(std::ostream& out, const TrainingReport& r) {
    if (r.losses.empty()) {
        out << "no training steps run\n";
        return;
    }
    out << std::setprecision(6) << "steps " << r.losses.size() << ", initial loss " << r.losses.front().loss
        << ", final loss " << r.losses.back().loss;
    if (r.stopped_early) out << " (stopped early on validation loss)";
    out << '\n';
}

inline std::vector<std::string> bvh_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".bvh") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline bool same_joints(const Skeleton& a, const Skeleton& b) {
    if (a.joint_count() != b.joint_count()) return false;
    for (std::size_t j = 0; j < a.joint_count(); ++j) {
        if (a.joints()[j].name != b.joints()[j].name || a.joints()[j].parent != b.joints()[j].parent) return false;
    }
    return true;
}

struct Ingested {
    std::optional<Skeleton> skeleton;
    std::optional<AnimationClip> clip;
    std::string error;
};

inline Ingested ingest_file(const std::string& path, const bvh::RoleTable& roles, double scale) {
    Ingested r;
    try {
        const bvh::Document doc = bvh::parse_bvh(read_text_file(path));
        r.skeleton = bvh::scaled(bvh::with_roles(doc.skeleton, roles), scale);
        r.clip = bvh::clip_from_bvh(doc, fs::path(path).stem().string(), roles, scale);
        r.clip->validate();
    } catch (const std::exception& e) {
        r.skeleton.reset();
        r.clip.reset();
        r.error = e.what();
    }
    return r;
}

inline std::map<std::string, std::pair<std::string, double>> parse_targets(const std::vector<std::string>& sets) {
    std::map<std::string, std::pair<std::string, double>> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--set expects metric=value, got '" + s + "'");
        const std::string name = s.substr(0, eq);
        const std::string text = s.substr(eq + 1);
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (text.empty() || *end != '\0' || !std::isfinite(v)) {
            throw UsageError("--set " + name + ": '" + text + "' is not a finite number");
        }
        out[name] = {s, v};
    }
    return out;
}

// Commands. Each takes its parsed options and writes to ctx.

struct SynthArgs {
    std::string out;
    synthetic::Options options;
};

inline int cmd_synth(const SynthArgs& a, Context& ctx) {
    require_parent(a.out);
    const Dataset d = synthetic::generate(a.options);
    write_dataset(d, a.out);
    ctx.out << "wrote " << d.clips.size() << " clips (" << d.pose_count() << " poses) to " << a.out << '\n';
    return kExitOk;
}

struct IngestArgs {
    std::string dir;
    std::string out;
    std::string roles;
    double scale = 1.0;
    std::size_t threads = 1;
};

inline int cmd_ingest(const IngestArgs& a, Context& ctx) {
    require_dir(a.dir, "input");
    require_parent(a.out);
    bvh::RoleTable roles = bvh::default_role_table();
    if (!a.roles.empty()) {
        require_file(a.roles, "role mapping");
        roles = bvh::role_table_from_json(parse_json_text(read_text_file(a.roles), a.roles));
    }
    const auto files = bvh_files(a.dir);
    std::vector<Ingested> results(files.size());
    posemetric::detail::for_chunks(files.size(), std::max<std::size_t>(1, std::min(a.threads, files.size())),
                                   [&](std::size_t, std::size_t b, std::size_t e) {
                                       for (std::size_t i = b; i < e; ++i) results[i] = ingest_file(files[i], roles, a.scale);
                                   });

    Dataset d;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        auto& r = results[i];
        if (r.clip && d.clips.empty()) d.skeleton = *r.skeleton;
        if (r.clip && !same_joints(d.skeleton, *r.skeleton)) r.error = "skeleton differs from the first ingested file";
        if (!r.error.empty() || !r.clip) {
            ctx.err << "warning: skipping " << files[i] << ": " << r.error << '\n';
            ++skipped;
            continue;
        }
        d.clips.push_back(std::move(*r.clip));
    }
    if (d.clips.empty()) {
        throw UsageError("no parseable BVH files in '" + a.dir + "' (" + std::to_string(files.size()) + " candidates)");
    }
    d.stats = compute_stats(std::span<const AnimationClip>(d.clips));
    write_dataset(d, a.out);
    ctx.out << "ingested " << d.clips.size() << " clips (" << d.pose_count() << " poses, " << d.skeleton.joint_count()
            << " joints); skipped " << skipped << " file(s); wrote " << a.out << '\n';
    return kExitOk;
}

inline int cmd_stats(const std::string& data, Context& ctx) {
    require_file(data, "dataset");
    const Dataset d = read_dataset(data);
    const auto registry = MetricRegistry::with_builtins();
    ctx.out << "clips " << d.clips.size() << "\nposes " << d.pose_count() << "\njoints " << d.skeleton.joint_count()
            << '\n';
    ctx.out << std::setprecision(6);
    for (const auto& def : registry.list()) {
        bool usable = true;
        for (const auto& r : def.required_roles) usable = usable && d.skeleton.has_role(r);
        if (!usable) {
            ctx.out << def.name << ": missing roles\n";
            continue;
        }
        try {
            const MetricStats s = registry.metric_stats(def.name, d.clips, d.skeleton);
            ctx.out << def.name << ": mean " << s.mean << " std " << s.std << '\n';
        } catch (const DegenerateVector& e) {
            ctx.out << def.name << ": undefined on some poses (" << e.what() << ")\n";
        }
    }
    return kExitOk;
}

struct TrainAeArgs {
    std::string data;
    std::string out;
    std::string loss_csv;
    Overrides overrides;
};

inline int cmd_train_ae(const TrainAeArgs& a, Context& ctx) {
    require_file(a.data, "dataset");
    const TrainingConfig config = a.overrides.config();
    const Dataset d = read_dataset(a.data);
    const ClipSplit split = split_clips(d.clips);
    const auto train = normalized_rows(d.stats, split.train);
    const auto validation = normalized_rows(d.stats, split.validation);
    auto trained = train_autoencoder(train, d.stats, config, split.validation.empty() ? nullptr : &validation);
    ModelBundle bundle{std::move(trained.model), {}};
    save_bundle(bundle, a.out);
    const std::string csv = a.loss_csv.empty() ? (fs::path(a.out) / "ae_loss.csv").string() : a.loss_csv;
    write_text_file(csv, trained.report.loss_csv());
    print_report(ctx.out, trained.report);
    ctx.out << "wrote bundle " << a.out << " and loss report " << csv << '\n';
    return kExitOk;
}

struct TrainMetricArgs {
    std::string data;
    std::string bundle;
    std::string metric;
    std::string loss_csv;
    Overrides overrides;
};

inline int cmd_train_metric(const TrainMetricArgs& a, Context& ctx) {
    const auto registry = MetricRegistry::with_builtins();
    if (!registry.contains(a.metric)) {
        throw UsageError("unknown metric '" + a.metric + "'; registered: " + registry.names_joined());
    }
    require_file(a.data, "dataset");
    require_bundle(a.bundle);
    const TrainingConfig config = a.overrides.config();
    const Dataset d = read_dataset(a.data);
    registry.check_roles(a.metric, d.skeleton);
    ModelBundle bundle = load_bundle(a.bundle);
    const ClipSplit split = split_clips(d.clips);
    auto trained = train_metric_network(bundle.model, registry, a.metric, d.skeleton, split.train, config,
                                        split.validation);
    bundle.metrics.insert_or_assign(a.metric, std::move(trained.network));
    save_bundle(bundle, a.bundle);
    const std::string csv =
        a.loss_csv.empty() ? (fs::path(a.bundle) / ("metric_" + a.metric + "_loss.csv")).string() : a.loss_csv;
    write_text_file(csv, trained.report.loss_csv());
    print_report(ctx.out, trained.report);
    if (trained.report.skipped_samples > 0) {
        ctx.out << "skipped " << trained.report.skipped_samples << " pairs with an undefined metric\n";
    }
    ctx.out << "wrote " << (fs::path(a.bundle) / metric_weight_file(a.metric)).string() << " and loss report " << csv
            << '\n';
    return kExitOk;
}

struct EditArgs {
    std::string bundle;
    std::string data;
    std::string clip;
    std::size_t frame = 0;
    std::vector<std::string> sets;
    std::size_t radius = 3;
    std::string shape = "hat";
    std::string out;
    std::size_t threads = 1;
};

// Writes a one-clip dataset file. Frames with zero weight are copied from the input.
inline int cmd_edit(const EditArgs& a, Context& ctx) {
    if (a.radius < 1) throw UsageError("--radius must be >= 1");
    const auto targets = parse_targets(a.sets);
    if (targets.empty()) throw UsageError("at least one --set metric=value is required");
    require_bundle(a.bundle);
    require_file(a.data, "dataset");
    require_parent(a.out);
    const Dataset d = read_dataset(a.data);
    const ModelBundle bundle = load_bundle(a.bundle);
    if (bundle.model.joint_count() != d.skeleton.joint_count()) {
        throw UsageError("bundle and dataset disagree on the joint count");
    }
    const AnimationClip* clip = nullptr;
    for (const auto& c : d.clips) {
        if (c.id == a.clip) clip = &c;
    }
    if (!clip) throw UsageError("no clip with id '" + a.clip + "'");
    if (a.frame >= clip->frame_count()) {
        throw UsageError("--frame must be in [0, " + std::to_string(clip->frame_count() - 1) + "]");
    }
    std::vector<MetricTarget> modules;
    modules.reserve(targets.size());
    for (const auto& [name, t] : targets) {
        modules.emplace_back(bundle.metric(name), t.second);
    }
    std::vector<const LatentModule*> ptrs;
    for (const auto& m : modules) ptrs.push_back(&m);

    const CurveShape shape = a.shape == "sine" ? CurveShape::Sine : CurveShape::Hat;
    const WeightCurve curve = make_curve(shape, clip->frame_count(), a.frame, a.radius);
    ClipEdit edit = edit_animation(bundle.model, ptrs, *clip, curve, a.threads);
    std::size_t changed = 0;
    for (std::size_t t = 0; t < clip->frame_count(); ++t) {
        if (curve[t] == 0.0) {
            edit.clip.poses[t] = clip->poses[t];
        } else {
            ++changed;
        }
    }
    Dataset result;
    result.skeleton = d.skeleton;
    result.stats = d.stats;
    result.clips.push_back(std::move(edit.clip));
    write_dataset(result, a.out);
    ctx.out << "edited " << changed << " frame(s) of clip " << a.clip << "; wrote " << a.out << '\n';
    return kExitOk;
}

struct EvalArgs {
    std::string bundle;
    std::string data;
    std::string metric;
    std::size_t trials = 1000;
    std::size_t drift_poses = 2000;
    std::uint64_t seed = 1;
};

// Read-only report over the held-out clips.
inline int cmd_eval(const EvalArgs& a, Context& ctx) {
    require_bundle(a.bundle);
    require_file(a.data, "dataset");
    const auto registry = MetricRegistry::with_builtins();
    const Dataset d = read_dataset(a.data);
    const ModelBundle bundle = load_bundle(a.bundle);
    if (bundle.model.joint_count() != d.skeleton.joint_count()) {
        throw UsageError("bundle and dataset disagree on the joint count");
    }
    std::vector<std::string> metrics;
    if (!a.metric.empty()) {
        bundle.metric(a.metric);
        metrics.push_back(a.metric);
    } else {
        for (const auto& [name, n] : bundle.metrics) metrics.push_back(name);
    }
    const ClipSplit split = split_clips(d.clips);
    const auto poses = all_poses(split.test);
    const auto sample = subsample(poses, a.drift_poses);

    ctx.out << std::setprecision(6);
    ctx.out << "[reconstruction]\nmean_joint_distance " << reconstruction_error(bundle.model, poses) << '\n';
    ctx.out << "\n[metric_move_success]\n";
    if (metrics.empty()) ctx.out << "no metric networks in bundle\n";
    for (const auto& m : metrics) {
        const auto r = metric_move_success(bundle.model, bundle.metric(m), registry, d.skeleton, poses, a.trials, a.seed);
        ctx.out << m << ' ' << r.rate() << " (" << r.successes << '/' << r.trials << ")\n";
    }
    ctx.out << "\n[noop_drift]\n";
    if (metrics.empty()) ctx.out << "no metric networks in bundle\n";
    for (const auto& m : metrics) {
        ctx.out << m << ' ' << noop_drift(bundle.model, bundle.metric(m), registry, d.skeleton, sample) << '\n';
    }
    return kExitOk;
}

struct ServeArgs {
    std::string bundle;
    std::string data;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t threads = 1;
};

inline int cmd_serve(const ServeArgs& a, Context& ctx) {
    require_bundle(a.bundle);
    require_file(a.data, "dataset");
    service::EditService svc;
    service::HttpServer server(svc);
    svc.load(load_bundle(a.bundle), read_dataset(a.data), MetricRegistry::with_builtins(), {a.threads});
    const int port = server.start(a.host, a.port);
    ctx.out << "serving on http://" << a.host << ':' << port << std::endl;
    if (ctx.on_listening) ctx.on_listening(port);
    if (ctx.stop) {
        while (!ctx.stop->load()) std::this_thread::sleep_for(std::chrono::milliseconds(20));
        server.stop();
    } else {
        server.wait();
    }
    return kExitOk;
}

inline int cmd_metrics_list(Context& ctx) {
    const auto registry = MetricRegistry::with_builtins();
    for (const auto& def : registry.list()) {
        ctx.out << def.name;
        for (const auto& r : def.required_roles) ctx.out << ' ' << r;
        ctx.out << '\n';
    }
    return kExitOk;
}

}  // namespace detail

// Entry point; args[0] is the program name. Returns the process exit code.
inline int run(const std::vector<std::string>& args, Context& ctx) {
    using namespace detail;
    CLI::App app{"Learned pose-metric editing: datasets, training, evaluation and the edit service"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a procedural dataset on the default humanoid");
    c_synth->add_option("--out", synth.out, "Dataset file to write")->required();
    c_synth->add_option("--clips", synth.options.clips, "Clip count")->capture_default_str();
    c_synth->add_option("--frames", synth.options.frames_per_clip, "Frames per clip")->capture_default_str();
    c_synth->add_option("--seed", synth.options.seed, "Generator seed")->capture_default_str();
    c_synth->add_option("--facing-range", synth.options.facing_range, "Initial facing range in radians")
        ->capture_default_str();

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Convert a directory of BVH files into a dataset");
    c_ingest->add_option("--dir", ingest.dir, "Directory of .bvh files")->required();
    c_ingest->add_option("--out", ingest.out, "Dataset file to write")->required();
    c_ingest->add_option("--roles", ingest.roles, "JSON role mapping overriding the default joint names");
    c_ingest->add_option("--scale", ingest.scale, "Unit scale applied to offsets (0.01 for centimeters)")
        ->capture_default_str();
    c_ingest->add_option("--threads", ingest.threads, "Parse files concurrently")->check(CLI::PositiveNumber);

    std::string stats_data;
    auto* c_stats = app.add_subcommand("stats", "Print dataset sizes and metric statistics");
    c_stats->add_option("--data", stats_data, "Dataset file")->required();

    TrainAeArgs ae;
    auto* c_ae = app.add_subcommand("train-ae", "Train the encoder/decoder and write a new bundle");
    c_ae->add_option("--data", ae.data, "Dataset file")->required();
    c_ae->add_option("--out", ae.out, "Bundle directory")->required();
    c_ae->add_option("--loss-csv", ae.loss_csv, "Loss report path (default <out>/ae_loss.csv)");
    ae.overrides.add_to(*c_ae);

    TrainMetricArgs tm;
    auto* c_tm = app.add_subcommand("train-metric", "Train one metric network into an existing bundle");
    c_tm->add_option("--data", tm.data, "Dataset file")->required();
    c_tm->add_option("--bundle", tm.bundle, "Bundle directory")->required();
    c_tm->add_option("--metric", tm.metric, "Metric name")->required();
    c_tm->add_option("--loss-csv", tm.loss_csv, "Loss report path (default <bundle>/metric_<name>_loss.csv)");
    tm.overrides.add_to(*c_tm);

    EditArgs edit;
    auto* c_edit = app.add_subcommand("edit", "Edit one clip around a frame and write it as a dataset file");
    c_edit->add_option("--bundle", edit.bundle, "Bundle directory")->required();
    c_edit->add_option("--data", edit.data, "Dataset file")->required();
    c_edit->add_option("--clip", edit.clip, "Clip id")->required();
    c_edit->add_option("--frame", edit.frame, "Peak frame")->required();
    c_edit->add_option("--set", edit.sets, "metric=value target in radians (repeatable)")->required();
    c_edit->add_option("--radius", edit.radius, "Weight curve radius in frames (>= 1)")->capture_default_str();
    c_edit->add_option("--shape", edit.shape, "Weight curve shape")
        ->capture_default_str()
        ->check(CLI::IsMember({"hat", "sine"}));
    c_edit->add_option("--out", edit.out, "Output file")->required();
    c_edit->add_option("--threads", edit.threads, "Per-frame workers")->check(CLI::PositiveNumber);

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Report reconstruction error, metric-move success and no-op drift");
    c_eval->add_option("--bundle", ev.bundle, "Bundle directory")->required();
    c_eval->add_option("--data", ev.data, "Dataset file")->required();
    c_eval->add_option("--metric", ev.metric, "Only this metric (default: every trained one)");
    c_eval->add_option("--trials", ev.trials, "Metric-move trials per metric")->capture_default_str();
    c_eval->add_option("--seed", ev.seed, "Trial seed (default: $POSEMETRIC_SEED or 1)");

    ServeArgs serve;
    auto* c_serve = app.add_subcommand("serve", "Run the HTTP edit service");
    c_serve->add_option("--bundle", serve.bundle, "Bundle directory")->required();
    c_serve->add_option("--data", serve.data, "Dataset file")->required();
    c_serve->add_option("--host", serve.host, "Bind address")->capture_default_str();
    c_serve->add_option("--port", serve.port, "Port (0 picks a free one)")->capture_default_str()->check(CLI::Range(0, 65535));
    c_serve->add_option("--threads", serve.threads, "Per-frame workers for clip edits")->check(CLI::PositiveNumber);

    auto* c_metrics = app.add_subcommand("metrics", "Metric registry");
    c_metrics->require_subcommand(1);
    auto* c_metrics_list = c_metrics->add_subcommand("list", "List registered metrics and their roles");

    try {
        const std::uint64_t seed = default_seed(1);
        ae.overrides.seed = seed;
        tm.overrides.seed = seed;
        ev.seed = seed;
        std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
        std::reverse(reversed.begin(), reversed.end());
        app.parse(reversed);

        if (c_synth->parsed()) return cmd_synth(synth, ctx);
        if (c_ingest->parsed()) return cmd_ingest(ingest, ctx);
        if (c_stats->parsed()) return cmd_stats(stats_data, ctx);
        if (c_ae->parsed()) return cmd_train_ae(ae, ctx);
        if (c_tm->parsed()) return cmd_train_metric(tm, ctx);
        if (c_edit->parsed()) return cmd_edit(edit, ctx);
        if (c_eval->parsed()) return cmd_eval(ev, ctx);
        if (c_serve->parsed()) return cmd_serve(serve, ctx);
        if (c_metrics_list->parsed()) return cmd_metrics_list(ctx);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, ctx.out, ctx.err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const TrainingDiverged& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const InvalidArgument& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NotFound& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace posemetric::cli
