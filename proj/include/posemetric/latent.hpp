#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "posemetric/error.hpp"
#include "posemetric/metrics.hpp"
#include "posemetric/skeleton.hpp"
#include "posemetric/tinynn.hpp"

namespace posemetric {

using Latent = std::vector<float>;

inline constexpr std::size_t kLatentDim = 64;
inline constexpr std::size_t kAutoencoderHidden = 512;
inline constexpr std::size_t kMetricHidden = 126;

struct TrainingConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 1024;
    int max_offset = 10;  // target frame offset drawn from [-max_offset, max_offset]
    std::size_t steps = 2000;
    std::uint64_t seed = 1;
    // Early stop: validation loss evaluated every `eval_every` steps; training stops
    // once it has not improved by `min_improvement` for `patience` evaluations.
    std::size_t eval_every = 50;
    std::size_t patience = 10;
    double min_improvement = 1e-5;
    std::size_t threads = 1;

    void validate() const {
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
            throw InvalidArgument("learning rate must be finite and >= 0");
        }
        if (batch_size == 0) throw InvalidArgument("batch size must be >= 1");
        if (max_offset <= 0) throw InvalidArgument("frame offset range must be nonzero");
        if (threads == 0) throw InvalidArgument("threads must be >= 1");
    }
};

struct LossRecord {
    std::size_t step;
    double loss;
};

struct TrainingReport {
    std::vector<LossRecord> losses;      // training batch loss, before each update
    std::vector<LossRecord> validation;  // validation loss at evaluation points
    bool stopped_early = false;
    std::size_t skipped_samples = 0;

    std::string loss_csv() const {
        std::ostringstream out;
        out << "step,loss\n";
        out.precision(9);
        for (const auto& r : losses) out << r.step << ',' << r.loss << '\n';
        return out.str();
    }
};

namespace detail {

// Runs fn(chunk, begin, end) over `threads` contiguous chunks of [0, n).
// The first exception thrown by any chunk is rethrown after all have finished.
inline void for_chunks(std::size_t n, std::size_t threads,
                       const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    const std::size_t chunks = std::max<std::size_t>(1, std::min(threads, n));
    if (chunks == 1) {
        fn(0, 0, n);
        return;
    }
    std::vector<std::exception_ptr> failures(chunks);
    std::vector<std::thread> workers;
    workers.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = n * c / chunks;
        const std::size_t end = n * (c + 1) / chunks;
        workers.emplace_back([&fn, &failures, c, begin, end] {
            try {
                fn(c, begin, end);
            } catch (...) {
                failures[c] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

inline nn::Matrix<float> gather_rows(const nn::Matrix<float>& m, std::span<const std::size_t> rows) {
    nn::Matrix<float> out(rows.size(), m.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy_n(m.data.begin() + static_cast<std::ptrdiff_t>(rows[r] * m.cols), m.cols,
                    out.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
    }
    return out;
}

inline void check_loss(double loss, std::size_t step, const char* what) {
    if (!std::isfinite(loss)) {
        throw TrainingDiverged(std::string(what) + ": loss became non-finite at step " + std::to_string(step) +
                               "; try a lower learning rate");
    }
}

// Tracks the early-stopping rule.
struct EarlyStop {
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    bool update(double loss, const TrainingConfig& cfg) {
        if (loss < best - cfg.min_improvement) {
            best = loss;
            since_best = 0;
        } else {
            ++since_best;
        }
        return cfg.patience > 0 && since_best >= cfg.patience;
    }
};

}  // namespace detail

// Encoder 3J -> 512 -> 64 and decoder 64 -> 512 -> 3J (relu hidden, linear out),
// operating on poses normalized with `stats`.
class EncoderDecoder {
public:
    nn::Mlp<float> encoder;
    nn::Mlp<float> decoder;
    NormalizationStats stats;

    std::size_t joint_count() const { return stats.size() / 3; }
    std::size_t latent_dim() const { return encoder.output_size(); }

    void validate() const {
        encoder.validate();
        decoder.validate();
        if (encoder.output_size() != decoder.input_size()) {
            throw DimensionMismatch("encoder output and decoder input sizes differ");
        }
        if (encoder.input_size() != stats.size() || decoder.output_size() != stats.size()) {
            throw DimensionMismatch("encoder/decoder pose size differs from normalization stats");
        }
    }

    std::vector<float> normalized(const Pose& pose) const {
        if (pose.joint_count() * 3 != stats.size()) {
            throw DimensionMismatch("pose has " + std::to_string(pose.joint_count()) + " joints, model expects " +
                                    std::to_string(joint_count()));
        }
        const auto n = normalize(flatten(pose), stats);
        return {n.begin(), n.end()};
    }

    Pose denormalized(std::span<const float> values) const {
        std::vector<double> d(values.begin(), values.end());
        return unflatten(denormalize(d, stats), joint_count());
    }

    Latent encode(const Pose& pose) const {
        const auto x = normalized(pose);
        return nn::predict(encoder, std::span<const float>(x));
    }

    Pose decode(std::span<const float> latent) const {
        if (latent.size() != latent_dim()) {
            throw DimensionMismatch("latent has " + std::to_string(latent.size()) + " components, expected " +
                                    std::to_string(latent_dim()));
        }
        return denormalized(nn::predict(decoder, latent));
    }

    Pose reconstruct(const Pose& pose) const { return decode(encode(pose)); }

    // Normalized rows, one per pose.
    nn::Matrix<float> normalized_rows(std::span<const Pose> poses) const {
        nn::Matrix<float> m(poses.size(), stats.size());
        for (std::size_t r = 0; r < poses.size(); ++r) {
            const auto row = normalized(poses[r]);
            std::copy(row.begin(), row.end(), m.row(r).begin());
        }
        return m;
    }

    nn::Matrix<float> encode_rows(const nn::Matrix<float>& rows, std::size_t chunk = 1024) const {
        nn::Matrix<float> out(rows.rows, latent_dim());
        for (std::size_t b = 0; b < rows.rows; b += chunk) {
            const std::size_t e = std::min(rows.rows, b + chunk);
            nn::Matrix<float> part(e - b, rows.cols);
            std::copy(rows.data.begin() + static_cast<std::ptrdiff_t>(b * rows.cols),
                      rows.data.begin() + static_cast<std::ptrdiff_t>(e * rows.cols), part.data.begin());
            auto cache = nn::forward(encoder, std::move(part));
            std::copy(cache.output.data.begin(), cache.output.data.end(),
                      out.data.begin() + static_cast<std::ptrdiff_t>(b * out.cols));
        }
        return out;
    }
};

// Mean per-sample MSE of the autoencoder over normalized rows.
inline double reconstruction_mse(const EncoderDecoder& model, const nn::Matrix<float>& rows,
                                 std::size_t chunk = 1024) {
    if (rows.rows == 0) throw InvalidArgument("reconstruction_mse: no rows");
    double total = 0.0;
    for (std::size_t b = 0; b < rows.rows; b += chunk) {
        const std::size_t e = std::min(rows.rows, b + chunk);
        nn::Matrix<float> part(e - b, rows.cols);
        std::copy(rows.data.begin() + static_cast<std::ptrdiff_t>(b * rows.cols),
                  rows.data.begin() + static_cast<std::ptrdiff_t>(e * rows.cols), part.data.begin());
        auto enc = nn::forward(model.encoder, part);
        auto dec = nn::forward(model.decoder, std::move(enc.output));
        nn::Matrix<float> grad;
        total += nn::mse_batch_sum(dec.output, part, part.rows, grad);
    }
    return total / static_cast<double>(rows.rows);
}

struct AutoencoderTraining {
    EncoderDecoder model;
    TrainingReport report;
};

inline EncoderDecoder init_autoencoder(const NormalizationStats& stats, nn::SeededRng& rng) {
    using nn::Activation;
    const std::size_t d = stats.size();
    if (d == 0 || d % 3 != 0) throw InvalidArgument("normalization stats must cover 3J components");
    EncoderDecoder m;
    m.stats = stats;
    m.encoder = nn::init_mlp<float>({d, kAutoencoderHidden, kLatentDim}, {Activation::Relu, Activation::Linear}, rng);
    m.decoder = nn::init_mlp<float>({kLatentDim, kAutoencoderHidden, d}, {Activation::Relu, Activation::Linear}, rng);
    return m;
}

// Trains encoder and decoder jointly to minimize the squared reconstruction
// error of normalized poses. `validation` (optional) drives early stopping.
inline AutoencoderTraining train_autoencoder(const nn::Matrix<float>& train_rows, const NormalizationStats& stats,
                                             const TrainingConfig& config,
                                             const nn::Matrix<float>* validation = nullptr) {
    config.validate();
    if (train_rows.rows == 0) throw InvalidArgument("train_autoencoder: empty dataset");
    if (train_rows.cols != stats.size()) throw DimensionMismatch("train_autoencoder: rows differ from stats length");

    nn::SeededRng rng(config.seed);
    AutoencoderTraining out{init_autoencoder(stats, rng), {}};
    EncoderDecoder& m = out.model;
    auto enc_adam = nn::AdamState<float>::for_network(m.encoder, config.learning_rate);
    auto dec_adam = nn::AdamState<float>::for_network(m.decoder, config.learning_rate);
    detail::EarlyStop early;

    const std::size_t batch = config.batch_size;
    std::vector<std::size_t> idx(batch);
    for (std::size_t step = 0; step < config.steps; ++step) {
        for (auto& i : idx) i = rng.index(train_rows.rows);

        const std::size_t chunks = std::max<std::size_t>(1, std::min(config.threads, batch));
        std::vector<nn::Gradients<float>> enc_g(chunks, nn::Gradients<float>::zeros_like(m.encoder));
        std::vector<nn::Gradients<float>> dec_g(chunks, nn::Gradients<float>::zeros_like(m.decoder));
        std::vector<double> chunk_loss(chunks, 0.0);
        detail::for_chunks(batch, chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
            try {
                auto x = detail::gather_rows(train_rows, std::span<const std::size_t>(idx).subspan(b, e - b));
                auto enc = nn::forward(m.encoder, x);
                auto dec = nn::forward(m.decoder, enc.output);
                nn::Matrix<float> grad;
                chunk_loss[c] = nn::mse_batch_sum(dec.output, x, batch, grad);
                auto dz = nn::backward_into(m.decoder, dec, std::move(grad), &dec_g[c]);
                nn::backward_into(m.encoder, enc, std::move(dz), &enc_g[c], false);
            } catch (const NonFiniteValue&) {
                chunk_loss[c] = std::numeric_limits<double>::quiet_NaN();
            }
        });
        double loss = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) loss += chunk_loss[c];
        for (std::size_t c = 1; c < chunks; ++c) {
            enc_g[0].add(enc_g[c]);
            dec_g[0].add(dec_g[c]);
        }
        loss /= static_cast<double>(batch);
        detail::check_loss(loss, step, "train_autoencoder");
        out.report.losses.push_back({step, loss});
        nn::adam_step(m.encoder, enc_adam, enc_g[0]);
        nn::adam_step(m.decoder, dec_adam, dec_g[0]);

        if (validation && validation->rows > 0 && config.eval_every > 0 && (step + 1) % config.eval_every == 0) {
            const double v = reconstruction_mse(m, *validation);
            detail::check_loss(v, step, "train_autoencoder (validation)");
            out.report.validation.push_back({step + 1, v});
            if (early.update(v, config)) {
                out.report.stopped_early = true;
                break;
            }
        }
    }
    return out;
}

// N_m: (latent, standardized target metric) -> edited latent.
class MetricNetwork {
public:
    std::string metric;
    nn::Mlp<float> net;
    MetricStats standardization;

    std::size_t latent_dim() const { return net.output_size(); }

    void validate() const {
        net.validate();
        if (net.input_size() != net.output_size() + 1) {
            throw DimensionMismatch("metric network '" + metric + "' must map latent+1 inputs to latent outputs");
        }
    }

    // Input is the latent followed by the standardized target.
    std::vector<float> input(std::span<const float> latent, double target) const {
        if (!std::isfinite(target)) throw InvalidArgument("metric target must be finite");
        if (latent.size() != latent_dim()) {
            throw DimensionMismatch("metric network '" + metric + "' expects a " + std::to_string(latent_dim()) +
                                    "-dimensional latent, got " + std::to_string(latent.size()));
        }
        std::vector<float> x(latent.begin(), latent.end());
        x.push_back(static_cast<float>(standardization.standardize(target)));
        return x;
    }

    Latent apply(std::span<const float> latent, double target) const {
        const auto x = input(latent, target);
        return nn::predict(net, std::span<const float>(x));
    }
};

inline Latent apply_metric(const MetricNetwork& network, std::span<const float> latent, double target) {
    return network.apply(latent, target);
}

// With `pass_through_shift` set, the first latent_dim hidden units start as
// relu(z_i + shift) and the output layer subtracts the shift again, so the fresh
// network returns its input latent unchanged for every z_i > -shift. The other
// hidden units keep their random input weights and start with zero output weights.
inline MetricNetwork init_metric_network(const std::string& metric, const MetricStats& standardization,
                                         nn::SeededRng& rng, std::size_t latent_dim = kLatentDim,
                                         std::optional<float> pass_through_shift = std::nullopt) {
    using nn::Activation;
    MetricNetwork n;
    n.metric = metric;
    n.standardization = standardization;
    n.net = nn::init_mlp<float>({latent_dim + 1, kMetricHidden, latent_dim}, {Activation::Relu, Activation::Linear},
                                rng);
    if (pass_through_shift) {
        if (kMetricHidden < latent_dim) throw InvalidArgument("init_metric_network: hidden layer narrower than latent");
        const float shift = *pass_through_shift;
        auto& hidden = n.net.layers[0];
        auto& out = n.net.layers[1];
        std::fill(out.weight.data.begin(), out.weight.data.end(), 0.0f);
        for (std::size_t i = 0; i < latent_dim; ++i) {
            auto row = hidden.weight.row(i);
            std::fill(row.begin(), row.end(), 0.0f);
            row[i] = 1.0f;
            hidden.bias[i] = shift;
            out.weight(i, i) = 1.0f;
            out.bias[i] = -shift;
        }
    }
    return n;
}

struct MetricTraining {
    MetricNetwork network;
    TrainingReport report;
};

namespace detail {

// Per-clip tensors used to draw (source, target) training pairs.
struct PairSource {
    std::vector<nn::Matrix<float>> latents;     // per clip, frames x latent
    std::vector<nn::Matrix<float>> targets;     // per clip, frames x 3J normalized
    std::vector<std::vector<std::optional<double>>> metric;  // per clip, per frame
    std::vector<std::pair<std::size_t, std::size_t>> frames;  // flat (clip, frame)
    std::size_t invalid_metric_frames = 0;

    PairSource(const EncoderDecoder& model, const MetricRegistry& registry, const std::string& metric_name,
               const Skeleton& skeleton, std::span<const AnimationClip> clips) {
        const MetricDef& def = registry.get(metric_name);
        for (std::size_t c = 0; c < clips.size(); ++c) {
            const auto& clip = clips[c];
            if (clip.frame_count() < 2) {
                throw InvalidArgument("clip '" + clip.id + "' has fewer than 2 frames; cannot sample pairs");
            }
            auto rows = model.normalized_rows(clip.poses);
            latents.push_back(model.encode_rows(rows));
            targets.push_back(std::move(rows));
            std::vector<std::optional<double>> values;
            for (const auto& p : clip.poses) {
                try {
                    const double v = def.evaluate(p, skeleton);
                    values.push_back(std::isfinite(v) ? std::optional<double>(v) : std::nullopt);
                } catch (const DegenerateVector&) {
                    values.push_back(std::nullopt);
                }
                if (!values.back()) ++invalid_metric_frames;
            }
            metric.push_back(std::move(values));
            for (std::size_t f = 0; f < clip.frame_count(); ++f) frames.emplace_back(c, f);
        }
        if (frames.empty()) throw InvalidArgument("train_metric_network: no clips");
    }

    struct Pair {
        std::size_t clip, source, target;
    };

    // Mean and population std over the frames where the metric is defined.
    MetricStats stats() const {
        std::size_t count = 0;
        double mean = 0.0;
        for (const auto& clip : metric) {
            for (const auto& v : clip) {
                if (v) {
                    mean += *v;
                    ++count;
                }
            }
        }
        if (count == 0) throw InvalidArgument("train_metric_network: metric is undefined on every training pose");
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (const auto& clip : metric) {
            for (const auto& v : clip) {
                if (v) var += (*v - mean) * (*v - mean);
            }
        }
        var /= static_cast<double>(count);
        return {mean, std::max(std::sqrt(var), kStdFloor)};
    }

    // One unit above the most negative latent component seen in training.
    float pass_through_shift() const {
        float lo = 0.0f;
        for (const auto& m : latents) {
            for (float v : m.data) lo = std::min(lo, v);
        }
        return 1.0f - lo;
    }

    // Offsets that leave the clip are re-drawn; pairs whose target metric cannot
    // be evaluated are skipped (counted in `skipped`).
    Pair draw(nn::SeededRng& rng, int max_offset, std::size_t& skipped) const {
        for (std::size_t attempt = 0; attempt < 100000; ++attempt) {
            const auto [c, t] = frames[rng.index(frames.size())];
            const auto len = static_cast<std::int64_t>(metric[c].size());
            std::int64_t target;
            do {
                target = static_cast<std::int64_t>(t) + rng.uniform_int(-max_offset, max_offset);
            } while (target < 0 || target >= len);
            if (!metric[c][static_cast<std::size_t>(target)]) {
                ++skipped;
                continue;
            }
            return {c, t, static_cast<std::size_t>(target)};
        }
        throw InvalidArgument("train_metric_network: metric cannot be evaluated on the sampled poses");
    }

    void fill(std::span<const Pair> pairs, const MetricStats& ms, nn::Matrix<float>& input,
              nn::Matrix<float>& target) const {
        const std::size_t ld = latents.front().cols;
        const std::size_t pd = targets.front().cols;
        input = nn::Matrix<float>(pairs.size(), ld + 1);
        target = nn::Matrix<float>(pairs.size(), pd);
        for (std::size_t r = 0; r < pairs.size(); ++r) {
            const auto& p = pairs[r];
            auto z = latents[p.clip].row(p.source);
            std::copy(z.begin(), z.end(), input.row(r).begin());
            input(r, ld) = static_cast<float>(ms.standardize(*metric[p.clip][p.target]));
            auto y = targets[p.clip].row(p.target);
            std::copy(y.begin(), y.end(), target.row(r).begin());
        }
    }
};

inline double metric_pairs_loss(const MetricNetwork& n, const EncoderDecoder& model, const nn::Matrix<float>& input,
                                const nn::Matrix<float>& target) {
    auto z = nn::forward(n.net, input);
    auto dec = nn::forward(model.decoder, std::move(z.output));
    nn::Matrix<float> grad;
    return nn::mse_batch_sum(dec.output, target, target.rows, grad) / static_cast<double>(target.rows);
}

}  // namespace detail

// Trains N_m on pairs (A_t, A_{t+n}) from the same clip: input E(A_t) with the
// target's metric value, loss MSE between D(N_m(...)) and A_{t+n}. The encoder and
// decoder are frozen. `validation_clips` (optional) drives early stopping.
inline MetricTraining train_metric_network(const EncoderDecoder& model, const MetricRegistry& registry,
                                           const std::string& metric_name, const Skeleton& skeleton,
                                           std::span<const AnimationClip> clips, const TrainingConfig& config,
                                           std::span<const AnimationClip> validation_clips = {}) {
    config.validate();
    model.validate();
    registry.check_roles(metric_name, skeleton);
    const detail::PairSource source(model, registry, metric_name, skeleton, clips);

    const MetricStats ms = source.stats();
    nn::SeededRng rng(config.seed);
    MetricTraining out{init_metric_network(metric_name, ms, rng, model.latent_dim(), source.pass_through_shift()), {}};
    MetricNetwork& n = out.network;
    auto adam = nn::AdamState<float>::for_network(n.net, config.learning_rate);
    detail::EarlyStop early;

    nn::Matrix<float> val_in, val_target;
    if (!validation_clips.empty() && config.eval_every > 0) {
        const detail::PairSource vsource(model, registry, metric_name, skeleton, validation_clips);
        nn::SeededRng vrng(config.seed ^ 0x9e3779b97f4a7c15ULL);
        std::vector<detail::PairSource::Pair> pairs(std::min<std::size_t>(2048, vsource.frames.size()));
        std::size_t ignored = 0;
        for (auto& p : pairs) p = vsource.draw(vrng, config.max_offset, ignored);
        vsource.fill(pairs, ms, val_in, val_target);
    }

    const std::size_t batch = config.batch_size;
    std::vector<detail::PairSource::Pair> pairs(batch);
    for (std::size_t step = 0; step < config.steps; ++step) {
        for (auto& p : pairs) p = source.draw(rng, config.max_offset, out.report.skipped_samples);
        nn::Matrix<float> input, target;
        source.fill(pairs, ms, input, target);

        const std::size_t chunks = std::max<std::size_t>(1, std::min(config.threads, batch));
        std::vector<nn::Gradients<float>> grads(chunks, nn::Gradients<float>::zeros_like(n.net));
        std::vector<double> chunk_loss(chunks, 0.0);
        detail::for_chunks(batch, chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
            nn::Matrix<float> in(e - b, input.cols), tg(e - b, target.cols);
            std::copy(input.data.begin() + static_cast<std::ptrdiff_t>(b * input.cols),
                      input.data.begin() + static_cast<std::ptrdiff_t>(e * input.cols), in.data.begin());
            std::copy(target.data.begin() + static_cast<std::ptrdiff_t>(b * target.cols),
                      target.data.begin() + static_cast<std::ptrdiff_t>(e * target.cols), tg.data.begin());
            try {
                auto zc = nn::forward(n.net, std::move(in));
                auto dec = nn::forward(model.decoder, zc.output);
                nn::Matrix<float> grad;
                chunk_loss[c] = nn::mse_batch_sum(dec.output, tg, batch, grad);
                auto dz = nn::backward_into(model.decoder, dec, std::move(grad), nullptr);
                nn::backward_into(n.net, zc, std::move(dz), &grads[c], false);
            } catch (const NonFiniteValue&) {
                chunk_loss[c] = std::numeric_limits<double>::quiet_NaN();
            }
        });
        double loss = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) loss += chunk_loss[c];
        for (std::size_t c = 1; c < chunks; ++c) grads[0].add(grads[c]);
        loss /= static_cast<double>(batch);
        detail::check_loss(loss, step, "train_metric_network");
        out.report.losses.push_back({step, loss});
        nn::adam_step(n.net, adam, grads[0]);

        if (val_in.rows > 0 && (step + 1) % config.eval_every == 0) {
            const double v = detail::metric_pairs_loss(n, model, val_in, val_target);
            detail::check_loss(v, step, "train_metric_network (validation)");
            out.report.validation.push_back({step + 1, v});
            if (early.update(v, config)) {
                out.report.stopped_early = true;
                break;
            }
        }
    }
    return out;
}

// A module operating on the shared latent pose space. Metric networks (with
// their target) and external solvers both plug in through this interface.
class LatentModule {
public:
    virtual ~LatentModule() = default;
    virtual std::string name() const = 0;
    virtual std::size_t latent_dim() const = 0;
    virtual Latent apply(std::span<const float> latent) const = 0;
};

// A metric network bound to a target value (radians).
class MetricTarget final : public LatentModule {
public:
    MetricTarget(const MetricNetwork& network, double target) : network_(&network), target_(target) {
        if (!std::isfinite(target)) throw InvalidArgument("metric target must be finite");
    }

    std::string name() const override { return network_->metric; }
    std::size_t latent_dim() const override { return network_->latent_dim(); }
    Latent apply(std::span<const float> latent) const override { return network_->apply(latent, target_); }

    double target() const { return target_; }

private:
    const MetricNetwork* network_;
    double target_;
};

// Returns its input; stands in for an external latent solver.
class IdentityModule final : public LatentModule {
public:
    explicit IdentityModule(std::size_t dim = kLatentDim) : dim_(dim) {}
    std::string name() const override { return "identity"; }
    std::size_t latent_dim() const override { return dim_; }
    Latent apply(std::span<const float> latent) const override { return {latent.begin(), latent.end()}; }

private:
    std::size_t dim_;
};

// Component-wise arithmetic mean. Each component's values are sorted before
// summing in double, so the result does not depend on input order.
inline Latent average_latents(std::span<const Latent> latents) {
    if (latents.empty()) throw InvalidArgument("average_latents: no latents");
    const std::size_t d = latents.front().size();
    for (const auto& z : latents) {
        if (z.size() != d) throw DimensionMismatch("average_latents: latents differ in dimension");
    }
    Latent out(d);
    std::vector<float> column(latents.size());
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < latents.size(); ++k) column[k] = latents[k][i];
        std::sort(column.begin(), column.end());
        double sum = 0.0;
        for (float v : column) sum += v;
        out[i] = static_cast<float>(sum / static_cast<double>(latents.size()));
    }
    return out;
}

using ModuleList = std::span<const LatentModule* const>;

// Runs every module on the same latent and averages the results.
inline Latent edit_latent(ModuleList modules, std::span<const float> latent) {
    if (modules.empty()) throw InvalidArgument("edit: at least one module is required");
    std::vector<Latent> outs;
    outs.reserve(modules.size());
    for (const LatentModule* m : modules) {
        if (m->latent_dim() != latent.size()) {
            throw DimensionMismatch("module '" + m->name() + "' works on " + std::to_string(m->latent_dim()) +
                                    "-dimensional latents, model has " + std::to_string(latent.size()));
        }
        outs.push_back(m->apply(latent));
        if (outs.back().size() != latent.size()) {
            throw DimensionMismatch("module '" + m->name() + "' returned a latent of the wrong size");
        }
    }
    return average_latents(outs);
}

// D(mean_i M_i(E(p))).
inline Pose edit_pose(const EncoderDecoder& model, ModuleList modules, const Pose& pose) {
    const Latent z = model.encode(pose);
    return model.decode(edit_latent(modules, z));
}

// Per-frame blend factors in [0, 1].
struct WeightCurve {
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    double operator[](std::size_t t) const { return weights[t]; }
};

enum class CurveShape { Hat, Sine };

namespace detail {

inline void check_curve_args(std::size_t frames, std::size_t peak, std::size_t radius) {
    if (frames == 0) throw InvalidArgument("weight curve: clip has no frames");
    if (peak >= frames) {
        throw InvalidArgument("weight curve: peak frame " + std::to_string(peak) + " outside [0, " +
                              std::to_string(frames - 1) + "]");
    }
    if (radius < 1) throw InvalidArgument("weight curve: radius must be >= 1");
}

}  // namespace detail

// 1 at `peak`, falling linearly to 0 at distance `radius`, 0 beyond.
inline WeightCurve hat_curve(std::size_t frames, std::size_t peak, std::size_t radius) {
    detail::check_curve_args(frames, peak, radius);
    WeightCurve c;
    c.weights.resize(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        const double k = static_cast<double>(t > peak ? t - peak : peak - t);
        c.weights[t] = std::max(0.0, 1.0 - k / static_cast<double>(radius));
    }
    return c;
}

// Raised cosine with the same support and endpoints as the hat.
inline WeightCurve sine_curve(std::size_t frames, std::size_t peak, std::size_t radius) {
    detail::check_curve_args(frames, peak, radius);
    WeightCurve c;
    c.weights.resize(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        const std::size_t k = t > peak ? t - peak : peak - t;
        c.weights[t] = k >= radius ? 0.0
                                   : 0.5 * (1.0 + std::cos(kPi * static_cast<double>(k) / static_cast<double>(radius)));
    }
    return c;
}

inline WeightCurve make_curve(CurveShape shape, std::size_t frames, std::size_t peak, std::size_t radius) {
    return shape == CurveShape::Hat ? hat_curve(frames, peak, radius) : sine_curve(frames, peak, radius);
}

// (1 - w) * source + w * edited, evaluated in double and rounded once, so w = 0
// and w = 1 reproduce the endpoints exactly.
inline Latent blend_latents(std::span<const float> source, std::span<const float> edited, double w) {
    if (source.size() != edited.size()) throw DimensionMismatch("blend_latents: dimensions differ");
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("blend_latents: weight outside [0, 1]");
    Latent out(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        out[i] = static_cast<float>((1.0 - w) * static_cast<double>(source[i]) + w * static_cast<double>(edited[i]));
    }
    return out;
}

struct ClipEdit {
    AnimationClip clip;
    std::vector<Latent> source;   // z_t
    std::vector<Latent> edited;   // module output per frame
    std::vector<Latent> blended;  // decoded to produce `clip`
};

// Edits every frame independently and blends in latent space by the curve.
// Frames may be processed on several threads; results are written by index.
inline ClipEdit edit_animation(const EncoderDecoder& model, ModuleList modules, const AnimationClip& clip,
                               const WeightCurve& curve, std::size_t threads = 1) {
    clip.validate();
    if (curve.size() != clip.frame_count()) {
        throw DimensionMismatch("weight curve has " + std::to_string(curve.size()) + " samples for " +
                                std::to_string(clip.frame_count()) + " frames");
    }
    if (modules.empty()) throw InvalidArgument("edit: at least one module is required");
    const std::size_t n = clip.frame_count();
    ClipEdit out;
    out.clip.id = clip.id;
    out.clip.frame_rate = clip.frame_rate;
    out.clip.poses.resize(n);
    out.source.resize(n);
    out.edited.resize(n);
    out.blended.resize(n);

    detail::for_chunks(n, std::max<std::size_t>(1, threads), [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            out.source[t] = model.encode(clip.poses[t]);
            out.edited[t] = edit_latent(modules, out.source[t]);
            out.blended[t] = blend_latents(out.source[t], out.edited[t], curve[t]);
            out.clip.poses[t] = model.decode(out.blended[t]);
        }
    });
    return out;
}

}  // namespace posemetric
