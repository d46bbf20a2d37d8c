#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "posemetric/dataset.hpp"
#include "posemetric/error.hpp"
#include "posemetric/latent.hpp"
#include "posemetric/tinynn.hpp"

namespace posemetric {

inline constexpr int kBundleFormatVersion = 1;

// A trained encoder/decoder plus any metric networks trained on its latent space.
// Directory layout: encoder.tnn, decoder.tnn, metric_<name>.tnn, bundle.json.
struct ModelBundle {
    EncoderDecoder model;
    std::map<std::string, MetricNetwork> metrics;

    const MetricNetwork& metric(const std::string& name) const {
        auto it = metrics.find(name);
        if (it == metrics.end()) {
            std::string have;
            for (const auto& [k, v] : metrics) have += (have.empty() ? "" : ", ") + k;
            throw NotFound("bundle has no network for metric '" + name + "' (trained: " +
                           (have.empty() ? std::string("none") : have) + ")");
        }
        return it->second;
    }
};

namespace detail {

inline std::filesystem::path bundle_file(const std::string& dir, const std::string& name) {
    return std::filesystem::path(dir) / name;
}

inline Json bundle_manifest(const ModelBundle& b) {
    Json metrics = Json::object();
    for (const auto& [name, n] : b.metrics) {
        metrics[name] = {{"mean", float9(n.standardization.mean)}, {"std", float9(n.standardization.std)}};
    }
    return {{"format_version", kBundleFormatVersion},
            {"joint_count", b.model.joint_count()},
            {"latent_dim", b.model.latent_dim()},
            {"stats", to_json(b.model.stats)},
            {"metrics", std::move(metrics)}};
}

}  // namespace detail

inline std::string metric_weight_file(const std::string& metric) { return "metric_" + metric + ".tnn"; }

// Writes every file of the bundle; metric standardizations are rounded to the
// on-disk precision first so the in-memory bundle equals what load_bundle returns.
inline void save_bundle(ModelBundle& b, const std::string& dir) {
    b.model.validate();
    std::filesystem::create_directories(dir);
    b.model.stats = stats_from_json(to_json(b.model.stats));
    for (auto& [name, n] : b.metrics) {
        n.validate();
        n.standardization = {float9(n.standardization.mean), float9(n.standardization.std)};
        nn::save_weights(n.net, detail::bundle_file(dir, metric_weight_file(name)).string());
    }
    nn::save_weights(b.model.encoder, detail::bundle_file(dir, "encoder.tnn").string());
    nn::save_weights(b.model.decoder, detail::bundle_file(dir, "decoder.tnn").string());
    write_text_file(detail::bundle_file(dir, "bundle.json").string(), dump_json(detail::bundle_manifest(b)));
}

inline ModelBundle load_bundle(const std::string& dir) {
    const auto manifest_path = detail::bundle_file(dir, "bundle.json");
    if (!std::filesystem::exists(manifest_path)) throw NotFound("no bundle.json in '" + dir + "'");
    const Json j = parse_json_text(read_text_file(manifest_path.string()), manifest_path.string());
    ModelBundle b;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kBundleFormatVersion) {
            throw FormatError("bundle format version " + std::to_string(version) + " is not supported");
        }
        b.model.stats = stats_from_json(j.at("stats"));
        b.model.encoder = nn::load_weights(detail::bundle_file(dir, "encoder.tnn").string());
        b.model.decoder = nn::load_weights(detail::bundle_file(dir, "decoder.tnn").string());
        b.model.validate();
        if (j.at("joint_count").get<std::size_t>() != b.model.joint_count() ||
            j.at("latent_dim").get<std::size_t>() != b.model.latent_dim()) {
            throw FormatError("bundle.json shape disagrees with the weight files");
        }
        for (const auto& [name, s] : j.at("metrics").items()) {
            MetricNetwork n;
            n.metric = name;
            n.standardization = {s.at("mean").get<double>(), s.at("std").get<double>()};
            n.net = nn::load_weights(detail::bundle_file(dir, metric_weight_file(name)).string());
            n.validate();
            if (n.latent_dim() != b.model.latent_dim()) {
                throw FormatError("metric network '" + name + "' does not match the bundle latent size");
            }
            b.metrics.emplace(name, std::move(n));
        }
    } catch (const Json::exception& e) {
        throw FormatError(std::string("bundle.json: ") + e.what());
    } catch (const DimensionMismatch& e) {
        throw FormatError(std::string("bundle: ") + e.what());
    }
    return b;
}

}  // namespace posemetric
