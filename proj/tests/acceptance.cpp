// End-to-end acceptance run. Prints one PASS/FAIL line per criterion, with
// indented detail lines, and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "posemetric/bundle.hpp"
#include "posemetric/bvh.hpp"
#include "posemetric/cli.hpp"
#include "posemetric/dataset.hpp"
#include "posemetric/evaluation.hpp"
#include "posemetric/latent.hpp"
#include "posemetric/metrics.hpp"
#include "posemetric/synthetic.hpp"
#include "support.hpp"

using namespace posemetric;
using testing_support::angle_oracle;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Criterion {
    int id;
    std::string title;
    bool pass = true;
    std::vector<std::string> details;

    Criterion(int id_, std::string title_) : id(id_), title(std::move(title_)) {}

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void note(const std::string& what) { details.push_back("     " + what); }
    // Measured expectation outside the criterion itself: reported, never gating.
    void observe(bool ok, const std::string& what) { details.push_back(std::string(ok ? "ok   " : "MISS ") + what); }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void report(const Criterion& c) {
    std::cout << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << '\n';
    for (const auto& d : c.details) std::cout << "       " << d << '\n';
    std::cout.flush();
}

bool bitwise_equal(std::span<const float> a, std::span<const float> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

// 1. Metric values against independent oracles and invariance properties.
Criterion metric_correctness() {
    Criterion c{1, "metric correctness"};
    const auto t0 = Clock::now();
    const auto registry = MetricRegistry::with_builtins();
    const Skeleton s({{"pelvis", std::nullopt, {}},
                      {"spine1", 0, {}},
                      {"neck", 1, {}},
                      {"lshoulder", 1, {}},
                      {"rshoulder", 1, {}},
                      {"lknee", 0, {}},
                      {"rknee", 0, {}}},
                     {{role::kPelvis, 0},
                      {role::kSpine1, 1},
                      {role::kNeck, 2},
                      {role::kLShoulder, 3},
                      {role::kRShoulder, 4},
                      {role::kLKnee, 5},
                      {role::kRKnee, 6}});
    auto pose = [](Vec3 pelvis, Vec3 spine1, Vec3 neck, Vec3 lsh, Vec3 rsh, Vec3 lknee, Vec3 rknee) {
        return Pose{{pelvis, spine1, neck, lsh, rsh, lknee, rknee}};
    };
    double worst = 0.0;
    auto expect = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };

    expect(vector_angle({1, 0, 0}, {0, 1, 0}), kPi / 2);
    expect(vector_angle({2, 0, 0}, {5, 0, 0}), 0.0);
    expect(vector_angle({-0.2, 0.5, 0}, {-0.2, -0.5, 0}), angle_oracle({-0.2, 0.5, 0}, {-0.2, -0.5, 0}));

    const Pose upright = pose({0, 1, 0}, {0, 1.35, 0}, {0, 1.5, 0}, {-0.2, 1.4, 0}, {0.2, 1.4, 0}, {-0.1, 0.5, 0},
                              {0.1, 0.5, 0});
    Pose p = upright;
    expect(spine_flexion(p, s), 0.0);
    p[2] = p[0] + Vec3{1, 1, 0};
    expect(spine_flexion(p, s), kPi / 4);
    p[2] = p[0] + Vec3{0, -1, 0};
    expect(spine_flexion(p, s), kPi);

    p = upright;
    p[4] = {0.2, 1.35, 0}, p[1] = {0, 1.35, 0}, p[3] = {-0.2, 1.35, 0};
    expect(shoulders_openness(p, s), 0.0);
    p[4] = {1, 0, 0}, p[1] = {0, 0, 0}, p[3] = {0, 1, 0};
    expect(shoulders_openness(p, s), kPi / 2);
    p[4] = {0.2, 1.4, 0}, p[1] = {0, 1.35, 0}, p[3] = {-0.2, 1.4, 0};
    expect(shoulders_openness(p, s), angle_oracle({-0.2, -0.05, 0}, {-0.2, 0.05, 0}));

    p = upright;
    p[0] = {0, 1, 0}, p[6] = {0.2, 0.5, 0}, p[5] = {-0.2, 0.5, 0};
    expect(legs_spread(p, s), angle_oracle({-0.2, 0.5, 0}, {-0.2, -0.5, 0}));
    expect(registry.evaluate("legs_spread", p, s), angle_oracle({-0.2, 0.5, 0}, {-0.2, -0.5, 0}));
    Pose swapped = p;
    std::swap(swapped[5], swapped[6]);
    expect(legs_spread(swapped, s), legs_spread(p, s));
    p[6] = {0.5, 1, 0}, p[5] = {-0.5, 1, 0};
    expect(legs_spread(p, s), 0.0);
    c.require(worst < 1e-4, "examples: worst deviation from oracle " + fmt("%.3g", worst) + " rad (< 1e-4)");

    nn::SeededRng rng(99);
    double drift = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Pose q = testing_support::random_pose(rng, 7);
        const Vec3 shift = testing_support::random_vec(rng, -10, 10);
        const Pose moved = testing_support::transformed(q, Mat3::identity(), shift);
        const Pose yawed = testing_support::transformed(q, Mat3::rotation(Axis::Y, rng.uniform(-kPi, kPi)), shift);
        const Pose rotated = testing_support::transformed(
            q, testing_support::axis_angle(testing_support::random_vec(rng), rng.uniform(-kPi, kPi)), shift);
        for (const auto& name : registry.names()) {
            const double base = registry.evaluate(name, q, s);
            drift = std::max(drift, std::abs(registry.evaluate(name, moved, s) - base));
            drift = std::max(drift, std::abs(registry.evaluate(name, yawed, s) - base));
            if (name != "spine_flexion") drift = std::max(drift, std::abs(registry.evaluate(name, rotated, s) - base));
        }
    }
    c.require(drift < 1e-9, "invariance over 1000 random poses: max change " + fmt("%.3g", drift) + " (< 1e-9)");
    const double t = seconds_since(t0);
    c.require(t < 5.0, "runtime " + fmt("%.2f", t) + " s (< 5 s)");
    return c;
}

// 2. Backward pass against central finite differences.
Criterion gradient_oracle() {
    Criterion c{2, "gradient oracle"};
    const auto t0 = Clock::now();
    using namespace nn;
    SeededRng rng(7);
    const double h = 1e-3;
    double worst = 0.0;
    std::size_t checked = 0, skipped = 0;
    auto loss_of = [](const Mlp<double>& m, const std::vector<double>& x, const std::vector<double>& target) {
        const auto y = testing_support::reference_forward(m, x);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - target[i]) * (y[i] - target[i]);
        return s / static_cast<double>(y.size());
    };
    auto pattern = [](const Mlp<double>& m, std::vector<double> a) {
        std::vector<bool> out;
        for (const auto& l : m.layers) {
            std::vector<double> y(l.out());
            for (std::size_t o = 0; o < l.out(); ++o) {
                double s = l.bias[o];
                for (std::size_t i = 0; i < l.in(); ++i) s += l.weight(o, i) * a[i];
                if (l.activation == Activation::Relu) out.push_back(s > 0.0);
                y[o] = l.activation == Activation::Relu ? std::max(0.0, s) : s;
            }
            a = std::move(y);
        }
        return out;
    };
    for (int net = 0; net < 100; ++net) {
        const std::size_t depth = 1 + rng.index(3);
        std::vector<std::size_t> sizes{1 + rng.index(16)};
        std::vector<Activation> acts;
        for (std::size_t k = 0; k < depth; ++k) {
            sizes.push_back(1 + rng.index(16));
            acts.push_back(k + 1 == depth ? Activation::Linear : Activation::Relu);
        }
        auto m = init_mlp<double>(std::span<const std::size_t>(sizes), std::span<const Activation>(acts), rng);
        for (auto& l : m.layers) {
            for (auto& b : l.bias) b = rng.uniform(-0.5, 0.5);
        }
        std::vector<double> x(sizes.front()), target(sizes.back());
        for (auto& v : x) v = rng.uniform(-1, 1);
        for (auto& v : target) v = rng.uniform(-1, 1);
        const auto [y, cache] = forward(m, std::span<const double>(x));
        const auto [loss, grad] = mse_loss<double>(y, target);
        const auto r = backward(m, cache, std::span<const double>(grad));
        const auto base = pattern(m, x);
        auto check = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + h;
            const bool same_plus = pattern(m, x) == base;
            const double lp = loss_of(m, x, target);
            param = saved - h;
            const bool same_minus = pattern(m, x) == base;
            const double lm = loss_of(m, x, target);
            param = saved;
            if (!same_plus || !same_minus) {
                ++skipped;
                return;
            }
            const double numeric = (lp - lm) / (2.0 * h);
            worst = std::max(worst, std::abs(analytic - numeric) /
                                        std::max({std::abs(analytic), std::abs(numeric), 1e-6}));
            ++checked;
        };
        for (std::size_t k = 0; k < m.layers.size(); ++k) {
            for (std::size_t i = 0; i < m.layers[k].weight.data.size(); ++i) {
                check(m.layers[k].weight.data[i], r.grads.weight[k].data[i]);
            }
            for (std::size_t i = 0; i < m.layers[k].bias.size(); ++i) check(m.layers[k].bias[i], r.grads.bias[k][i]);
        }
    }
    c.require(worst < 1e-4, "100 random nets, " + std::to_string(checked) + " parameters: max relative error " +
                                fmt("%.3g", worst) + " (< 1e-4)");
    c.note(std::to_string(skipped) + " parameters skipped where the step flips a relu");
    const double t = seconds_since(t0);
    c.require(t < 30.0, "runtime " + fmt("%.2f", t) + " s (< 30 s)");
    return c;
}

std::optional<double> read_baseline(const std::string& path) {
    if (!fs::exists(path)) return std::nullopt;
    const Json j = parse_json_text(read_text_file(path), path);
    return j.at("ae_2000_steps_mean_joint_error").get<double>();
}

// 3. Autoencoder: 2000 steps at the default hyperparameters.
Criterion autoencoder_training(const Dataset& data, const ClipSplit& split) {
    Criterion c{3, "autoencoder training"};
    const auto t0 = Clock::now();
    TrainingConfig cfg;  // lr 1e-4, batch 1024, 2000 steps
    cfg.patience = 0;
    const auto rows = normalized_rows(data.stats, split.train);
    const auto trained = train_autoencoder(rows, data.stats, cfg);
    const auto& losses = trained.report.losses;
    const double ratio = losses.back().loss / losses.front().loss;
    c.require(losses.size() == 2000, "ran " + std::to_string(losses.size()) + " steps (lr " +
                                         fmt("%g", cfg.learning_rate) + ", batch " + std::to_string(cfg.batch_size) +
                                         ", latent " + std::to_string(trained.model.latent_dim()) + ")");
    c.require(ratio < 0.1, "final/initial MSE " + fmt("%.4f", ratio) + " (" + fmt("%.5g", losses.back().loss) + " / " +
                               fmt("%.5g", losses.front().loss) + ", < 0.1)");
    const auto test = all_poses(split.test);
    const double err = reconstruction_error(trained.model, test);
    const auto baseline = read_baseline(std::string(POSEMETRIC_REFERENCE_DIR) + "/baseline.json");
    if (baseline) {
        c.require(err < *baseline * 1.1, "held-out mean per-joint error " + fmt("%.6f", err) + " m (baseline " +
                                             fmt("%.6f", *baseline) + " x 1.1 = " + fmt("%.6f", *baseline * 1.1) + ")");
    } else {
        c.require(false, "no committed baseline; measured mean per-joint error " + fmt("%.9g", err));
    }
    const double t = seconds_since(t0);
    c.require(t < 600.0, "runtime " + fmt("%.1f", t) + " s (< 600 s)");
    return c;
}

struct ReferenceRun {
    ModelBundle bundle;
    double training_seconds = 0.0;
};

// The reference run: 10000 autoencoder steps, then 10000 steps per metric network.
ReferenceRun reference_run(const Dataset& data, const ClipSplit& split) {
    const auto t0 = Clock::now();
    const auto registry = MetricRegistry::with_builtins();
    TrainingConfig cfg;
    cfg.steps = 10000;
    cfg.patience = 0;
    ReferenceRun r;
    r.bundle.model = train_autoencoder(normalized_rows(data.stats, split.train), data.stats, cfg).model;
    for (const auto& name : registry.names()) {
        r.bundle.metrics.emplace(
            name, train_metric_network(r.bundle.model, registry, name, data.skeleton, split.train, cfg).network);
    }
    r.training_seconds = seconds_since(t0);
    return r;
}

// Two metrics edited at once; both must move toward their targets.
double joint_success(const ModelBundle& b, const MetricRegistry& registry, const Skeleton& s,
                     std::span<const Pose> poses, const std::string& m1, const std::string& m2, std::size_t trials) {
    nn::SeededRng rng(11);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        const Pose& p = poses[rng.index(poses.size())];
        const double b1 = registry.evaluate(m1, p, s), b2 = registry.evaluate(m2, p, s);
        const double t1 = b1 + rng.uniform(-0.2, 0.2), t2 = b2 + rng.uniform(-0.2, 0.2);
        const MetricTarget a(b.metric(m1), t1), c(b.metric(m2), t2);
        const LatentModule* mods[] = {&a, &c};
        const Pose e = edit_pose(b.model, mods, p);
        if (std::abs(registry.evaluate(m1, e, s) - t1) < std::abs(b1 - t1) &&
            std::abs(registry.evaluate(m2, e, s) - t2) < std::abs(b2 - t2)) {
            ++ok;
        }
    }
    return static_cast<double>(ok) / static_cast<double>(trials);
}

// 4. Metric editing on held-out poses.
Criterion metric_editing(const ReferenceRun& ref, const Dataset& data, const ClipSplit& split) {
    Criterion c{4, "metric editing"};
    c.note("reference run trained in " + fmt("%.0f", ref.training_seconds) + " s");
    const auto t0 = Clock::now();
    const auto registry = MetricRegistry::with_builtins();
    const auto test = all_poses(split.test);
    const auto sample = subsample(test, 2000);
    const double recon = reconstruction_error(ref.bundle.model, sample);
    c.note("held-out reconstruction error " + fmt("%.5f", recon) + " m");
    for (const auto& [name, net] : ref.bundle.metrics) {
        const auto r = metric_move_success(ref.bundle.model, net, registry, data.skeleton, test, 1000, 5);
        c.require(r.rate() >= 0.8, name + ": moved toward target in " + std::to_string(r.successes) + "/" +
                                       std::to_string(r.trials) + " trials (>= 80%)");
        const double drift = noop_drift(ref.bundle.model, net, registry, data.skeleton, sample);
        c.require(drift < 2.0 * recon,
                  name + ": no-op drift " + fmt("%.5f", drift) + " m (< 2 x " + fmt("%.5f", recon) + ")");
    }
    const double both =
        joint_success(ref.bundle, registry, data.skeleton, test, "spine_flexion", "shoulders_openness", 1000);
    c.observe(both >= 0.7, "spine_flexion + shoulders_openness together: both moved toward target in " +
                               fmt("%.1f", 100 * both) + "% of 1000 trials (>= 70%)");
    const double t = seconds_since(t0);
    c.require(t < 60.0, "runtime after training " + fmt("%.1f", t) + " s (< 60 s)");
    return c;
}

// 5. Averaging of module outputs.
Criterion module_algebra(const ReferenceRun& ref, const ClipSplit& split) {
    Criterion c{5, "multi-module averaging algebra"};
    const auto& model = ref.bundle.model;
    const auto poses = subsample(all_poses(split.test), 200);
    bool identity = true, permutation = true, duplicate = true;
    nn::SeededRng rng(21);
    for (const auto& p : poses) {
        const Latent z = model.encode(p);
        std::vector<MetricTarget> targets;
        for (const auto& [name, net] : ref.bundle.metrics) targets.emplace_back(net, rng.uniform(0.2, 2.5));
        const IdentityModule id;
        std::vector<const LatentModule*> mods{&targets[0], &targets[1], &targets[2], &id};

        const LatentModule* single[] = {mods[0]};
        identity = identity && bitwise_equal(edit_latent(single, z), targets[0].apply(z));

        const Latent base = edit_latent(mods, z);
        for (int k = 0; k < 4; ++k) {
            for (std::size_t i = mods.size() - 1; i > 0; --i) std::swap(mods[i], mods[rng.index(i + 1)]);
            permutation = permutation && bitwise_equal(edit_latent(mods, z), base);
        }
        const LatentModule* twice[] = {&targets[1], &targets[1]};
        const LatentModule* once[] = {&targets[1]};
        duplicate = duplicate && bitwise_equal(edit_latent(twice, z), edit_latent(once, z));
    }
    c.require(identity, "single module: average equals the module output bitwise");
    c.require(permutation, "permuted module lists: identical bits (200 poses x 4 permutations)");
    c.require(duplicate, "duplicated module: identical bits to a single copy");
    return c;
}

// 6. Per-frame blending and the weight curve.
Criterion blending(const ReferenceRun& ref, const Dataset& data, const ClipSplit& split) {
    Criterion c{6, "animation blending"};
    const auto& model = ref.bundle.model;
    const auto registry = MetricRegistry::with_builtins();
    const AnimationClip& clip = split.test.front();
    const MetricTarget legs(ref.bundle.metric("legs_spread"), 1.0);
    const LatentModule* mods[] = {&legs};
    const std::size_t n = clip.frame_count();
    const auto e0 = edit_animation(model, mods, clip, WeightCurve{std::vector<double>(n, 0.0)});
    const auto e1 = edit_animation(model, mods, clip, WeightCurve{std::vector<double>(n, 1.0)});
    bool zero = true, one = true;
    for (std::size_t t = 0; t < n; ++t) {
        zero = zero && bitwise_equal(e0.blended[t], e0.source[t]);
        one = one && bitwise_equal(e1.blended[t], e1.edited[t]);
    }
    c.require(zero, "W = 0: blended latent equals z_t bitwise on every frame");
    c.require(one, "W = 1: blended latent equals the edited latent bitwise on every frame");

    const auto w = hat_curve(n, 60, 3);
    bool hat = w[60] == 1.0 && w[57] == 0.0 && w[63] == 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (t <= 57 || t >= 63) hat = hat && w[t] == 0.0;
    }
    c.require(hat, "hat curve: W(n) = 1, W(n +- 3) = 0, zero on every other frame outside the window");

    // Metric displacement relative to D(E(A_t)) over every held-out clip.
    std::size_t monotone = 0;
    double worst_violation = 0.0;
    for (const auto& tc : split.test) {
        const std::size_t peak = tc.frame_count() / 2;
        const double target = registry.evaluate("legs_spread", tc.poses[peak], data.skeleton) + 0.2;
        const MetricTarget m(ref.bundle.metric("legs_spread"), target);
        const LatentModule* one_mod[] = {&m};
        const auto edit = edit_animation(model, one_mod, tc, hat_curve(tc.frame_count(), peak, 3));
        std::vector<double> disp(tc.frame_count());
        for (std::size_t t = 0; t < tc.frame_count(); ++t) {
            const Pose recon = model.reconstruct(tc.poses[t]);
            disp[t] = std::abs(registry.evaluate("legs_spread", edit.clip.poses[t], data.skeleton) -
                               registry.evaluate("legs_spread", recon, data.skeleton));
        }
        bool ok = true;
        for (std::size_t t = peak; t + 1 < tc.frame_count(); ++t) {
            worst_violation = std::max(worst_violation, disp[t + 1] - disp[t]);
            ok = ok && disp[t + 1] <= disp[t];
        }
        for (std::size_t t = peak; t > 0; --t) {
            worst_violation = std::max(worst_violation, disp[t - 1] - disp[t]);
            ok = ok && disp[t - 1] <= disp[t];
        }
        if (ok) ++monotone;
    }
    c.require(monotone == split.test.size(),
              "metric displacement non-increasing away from the peak in " + std::to_string(monotone) + "/" +
                  std::to_string(split.test.size()) + " held-out clips (largest increase " +
                  fmt("%.3g", worst_violation) + " rad)");
    return c;
}

// 7. Two identical single-threaded runs through the command line.
Criterion determinism() {
    Criterion c{7, "determinism"};
    testing_support::TempDir dir;
    std::ostringstream out, err;
    cli::Context ctx{out, err};
    auto run = [&](std::vector<std::string> args) {
        args.insert(args.begin(), "posemetric");
        return cli::run(args, ctx);
    };
    const std::string data = dir / "data.json";
    bool ok = run({"synth", "--out", data, "--clips", "40", "--frames", "60"}) == 0;
    for (const char* tag : {"a", "b"}) {
        const std::string bundle = dir / tag;
        ok = ok && run({"train-ae", "--data", data, "--out", bundle, "--steps", "200", "--batch", "256", "--seed", "3"}) == 0;
        ok = ok && run({"train-metric", "--data", data, "--bundle", bundle, "--metric", "spine_flexion", "--steps",
                        "100", "--batch", "256", "--seed", "3"}) == 0;
    }
    c.require(ok, "both runs completed" + (ok ? std::string() : ": " + err.str()));
    std::size_t compared = 0, differing = 0;
    for (const auto& e : fs::directory_iterator(dir.path() / "a")) {
        const auto other = dir.path() / "b" / e.path().filename();
        ++compared;
        if (!fs::exists(other) || testing_support::slurp(e.path().string()) != testing_support::slurp(other.string())) {
            ++differing;
            c.note("differs: " + e.path().filename().string());
        }
    }
    c.require(ok && compared >= 6 && differing == 0,
              std::to_string(compared) + " weight/CSV/manifest files compared byte for byte, " +
                  std::to_string(differing) + " differ");
    return c;
}

// 8. BVH fixtures and the dataset file format.
Criterion parser() {
    Criterion c{8, "BVH parser and dataset files"};
    bool finite = true;
    for (const char* name : {"minimal.bvh", "three_joint.bvh", "chain_z.bvh"}) {
        const auto doc = bvh::parse_bvh(read_text_file(testing_support::fixture(name)));
        const auto clip = bvh::clip_from_bvh(doc, name);
        for (const auto& p : clip.poses) finite = finite && p.finite();
    }
    c.require(finite, "well-formed fixtures pass through forward kinematics without NaN");
    const std::map<std::string, std::size_t> expected{{"bad_frame_count.bvh", 8},
                                                      {"bad_token.bvh", 8},
                                                      {"bad_channel.bvh", 5},
                                                      {"zero_frame_time.bvh", 9},
                                                      {"bad_braces.bvh", 0}};
    for (const auto& [name, line] : expected) {
        std::string got = "no error";
        bool ok = false;
        try {
            bvh::parse_bvh(read_text_file(testing_support::fixture(name)));
        } catch (const ParseError& e) {
            got = e.what();
            ok = got.rfind("line ", 0) == 0 && (line == 0 ? e.line() > 0 : e.line() == line);
        }
        c.require(ok, name + ": " + got);
    }
    synthetic::Options o;
    o.clips = 20;
    const Dataset d = synthetic::generate(o);
    testing_support::TempDir dir;
    write_dataset(d, dir / "d.json");
    const Dataset back = read_dataset(dir / "d.json");
    double worst = 0.0;
    for (std::size_t i = 0; i < d.clips.size(); ++i) {
        for (std::size_t t = 0; t < d.clips[i].frame_count(); ++t) {
            const auto a = flatten(d.clips[i].poses[t]), b = flatten(back.clips[i].poses[t]);
            for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
        }
    }
    c.require(back.clips.size() == d.clips.size() && worst < 1e-6,
              "dataset JSON round trip: max coordinate change " + fmt("%.3g", worst) + " (< 1e-6)");
    return c;
}

}  // namespace

int main() {
    std::vector<Criterion> results;
    auto record = [&](Criterion c) {
        report(c);
        results.push_back(std::move(c));
    };
    record(metric_correctness());
    record(gradient_oracle());

    const Dataset data = synthetic::generate();
    const ClipSplit split = split_clips(data.clips);
    std::cout << "dataset: " << data.clips.size() << " synthetic clips, " << data.pose_count() << " poses ("
              << split.train.size() << " train / " << split.validation.size() << " validation / "
              << split.test.size() << " test clips)\n";

    record(autoencoder_training(data, split));
    const ReferenceRun ref = reference_run(data, split);
    record(metric_editing(ref, data, split));
    record(module_algebra(ref, split));
    record(blending(ref, data, split));
    record(determinism());
    record(parser());

    std::size_t passed = 0;
    for (const auto& c : results) passed += c.pass ? 1 : 0;
    std::cout << "\n";
    for (const auto& c : results) std::cout << (c.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.title << "\n";
    std::cout << passed << "/" << results.size() << " criteria passed\n";
    return passed == results.size() ? 0 : 1;
}
