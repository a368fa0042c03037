#include "facesynth/eval/benchmark.hpp"

#include "facesynth/error.hpp"
#include "facesynth/util/hash.hpp"
#include "facesynth/util/parallel.hpp"

#include "json.hpp"

#include <cstdio>
#include <set>

namespace facesynth::eval {

namespace {

std::set<std::string> evaluated_templates(const Protocol& p)
{
    std::set<std::string> ids(p.gallery.begin(), p.gallery.end());
    ids.insert(p.probes.begin(), p.probes.end());
    for (const auto& pair : p.pairs) {
        ids.insert(pair.template_a);
        ids.insert(pair.template_b);
    }
    return ids;
}

features::FeatureVector prepare(features::FeatureVector f, const features::PCAModel* pca, double c)
{
    return pca ? features::condition(*pca, f, c) : f;
}

features::FeatureVector mean_of(const std::vector<features::FeatureVector>& frames, const std::string& media_id)
{
    std::vector<features::TaggedFeature> tagged;
    for (const auto& f : frames) {
        tagged.push_back({f, media_id, features::MediaType::video});
    }
    return features::video_pool(tagged).front().feature;
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

} // namespace

std::string rendered_id(const std::string& item_id, int view)
{
    return item_id + "@" + std::to_string(view);
}

void check_leakage(const Protocol& protocol)
{
    const std::set<std::string> train(protocol.train_items.begin(), protocol.train_items.end());
    for (const auto& id : evaluated_templates(protocol)) {
        for (const auto& item : protocol.find(id).items) {
            if (train.count(item.item_id)) {
                throw Error(ErrorCode::leakage, "training item '" + item.item_id + "' is used by evaluated template '" +
                                                    id + "'");
            }
        }
    }
}

features::PCAModel fit_conditioning(const Protocol& protocol, const features::EmbeddingTable& table)
{
    std::vector<features::FeatureVector> samples;
    for (const auto& item : protocol.train_items) {
        if (table.vectors.count(item)) {
            samples.push_back(table.lookup(item));
        }
        for (int v : rendered_views) {
            const auto id = rendered_id(item, v);
            if (table.vectors.count(id)) {
                samples.push_back(table.lookup(id));
            }
        }
    }
    if (samples.empty()) {
        throw Error(ErrorCode::protocol_error, "no embeddings for the training items");
    }
    return features::pca_fit(samples);
}

matching::TemplateFeatures build_template_features(const ProtocolTemplate& tpl, const Protocol& protocol,
                                                   const features::EmbeddingTable& table,
                                                   const features::PCAModel* pca, const BenchmarkConfig& config)
{
    struct Frame
    {
        matching::ItemFeatures features;
        const MediaItem* media;
    };
    std::vector<Frame> frames;
    for (const auto& item : tpl.items) {
        matching::ItemFeatures f;
        f.item_id = item.item_id;
        const auto yaw = protocol.yaws.find(item.item_id);
        f.yaw = yaw == protocol.yaws.end() ? 0.0 : yaw->second;
        if (table.vectors.count(item.item_id)) {
            f.in_plane = prepare(table.lookup(item.item_id), pca, config.root_exponent);
        }
        for (int v : rendered_views) {
            const auto id = rendered_id(item.item_id, v);
            if (table.vectors.count(id)) {
                f.rendered.emplace(v, prepare(table.lookup(id), pca, config.root_exponent));
            }
        }
        if (!f.in_plane && f.rendered.empty()) {
            throw Error(ErrorCode::embedding_not_found,
                        "no embedding for item '" + item.item_id + "' of template '" + tpl.template_id + "'");
        }
        frames.push_back({std::move(f), &item});
    }

    matching::TemplateFeatures out;
    out.template_id = tpl.template_id;
    out.subject = tpl.subject_id;
    if (!config.video_pooling) {
        for (auto& f : frames) {
            out.items.push_back(std::move(f.features));
        }
        return out;
    }
    std::set<std::string> done;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const MediaItem& media = *frames[i].media;
        if (media.type == features::MediaType::image) {
            out.items.push_back(frames[i].features);
            continue;
        }
        if (!done.insert(media.media_id).second) {
            continue;
        }
        std::vector<features::FeatureVector> in_plane;
        std::map<int, std::vector<features::FeatureVector>> views;
        double yaw_sum = 0.0;
        int count = 0;
        for (std::size_t j = i; j < frames.size(); ++j) {
            if (frames[j].media->type != features::MediaType::video || frames[j].media->media_id != media.media_id) {
                continue;
            }
            const auto& f = frames[j].features;
            if (f.in_plane) {
                in_plane.push_back(*f.in_plane);
            }
            for (const auto& [v, feature] : f.rendered) {
                views[v].push_back(feature);
            }
            yaw_sum += f.yaw;
            ++count;
        }
        matching::ItemFeatures pooled;
        pooled.item_id = media.media_id;
        pooled.yaw = yaw_sum / count;
        if (!in_plane.empty()) {
            pooled.in_plane = mean_of(in_plane, media.media_id);
        }
        for (const auto& [v, list] : views) {
            pooled.rendered.emplace(v, mean_of(list, media.media_id));
        }
        out.items.push_back(std::move(pooled));
    }
    return out;
}

MetricsReport run_benchmark(const Protocol& protocol, const features::EmbeddingTable& table,
                            const BenchmarkConfig& config)
{
    check_leakage(protocol);
    config.matcher.fusion.validate();
    MetricsReport report;
    report.strategy = matching::to_string(config.matcher.fusion.strategy);

    std::optional<features::PCAModel> pca;
    if (config.use_pca) {
        pca = fit_conditioning(protocol, table);
        report.pca_hash = util::to_hex(features::pca_hash(*pca));
    }

    const auto used = evaluated_templates(protocol);
    std::vector<std::string> ids(used.begin(), used.end());
    std::vector<matching::TemplateFeatures> feats(ids.size());
    const unsigned workers = config.workers == 0 ? util::default_workers() : config.workers;
    util::parallel_for(ids.size(), workers, [&](std::size_t i) {
        feats[i] = build_template_features(protocol.find(ids[i]), protocol, table, pca ? &*pca : nullptr, config);
    });
    std::map<std::string, const matching::TemplateFeatures*> by_id;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        by_id[ids[i]] = &feats[i];
    }

    std::vector<matching::SimilarityResult> pair_results(protocol.pairs.size());
    util::parallel_for(protocol.pairs.size(), workers, [&](std::size_t i) {
        const auto& pair = protocol.pairs[i];
        pair_results[i] = matching::template_similarity(*by_id.at(pair.template_a), *by_id.at(pair.template_b),
                                                        config.matcher);
    });
    auto tally = [&](const matching::SimilarityResult& r) {
        report.degenerate_comparisons += r.degenerate ? 1 : 0;
        report.single_variant_comparisons += r.single_variant ? 1 : 0;
    };

    if (!protocol.pairs.empty()) {
        std::vector<double> genuine;
        std::vector<double> impostor;
        std::vector<LabelledScore> labelled;
        std::set<int> folds;
        for (std::size_t i = 0; i < protocol.pairs.size(); ++i) {
            const double s = pair_results[i].score;
            tally(pair_results[i]);
            report.pair_scores.push_back(s);
            (protocol.pairs[i].same_subject ? genuine : impostor).push_back(s);
            labelled.push_back({s, protocol.pairs[i].same_subject, protocol.pairs[i].fold});
            folds.insert(protocol.pairs[i].fold);
        }
        report.pairs = static_cast<int>(protocol.pairs.size());
        report.genuine = static_cast<int>(genuine.size());
        report.impostor = static_cast<int>(impostor.size());
        const auto curve = roc(genuine, impostor);
        for (double far : config.fars) {
            report.tar_at_far[far] = tar_at_far(curve, far);
        }
        report.eer_complement = 1.0 - equal_error_rate(genuine, impostor).eer;
        if (folds.size() >= 2) {
            report.accuracy = fold_accuracy(labelled);
        }
    }

    if (!protocol.probes.empty()) {
        const auto np = static_cast<Eigen::Index>(protocol.probes.size());
        const auto ng = static_cast<Eigen::Index>(protocol.gallery.size());
        report.identification_scores.resize(np, ng);
        std::vector<std::vector<matching::SimilarityResult>> rows(protocol.probes.size());
        util::parallel_for(protocol.probes.size(), workers, [&](std::size_t p) {
            for (const auto& g : protocol.gallery) {
                rows[p].push_back(
                    matching::template_similarity(*by_id.at(protocol.probes[p]), *by_id.at(g), config.matcher));
            }
        });
        std::vector<std::string> probe_subjects;
        std::vector<std::string> gallery_subjects;
        for (Eigen::Index p = 0; p < np; ++p) {
            probe_subjects.push_back(by_id.at(protocol.probes[static_cast<std::size_t>(p)])->subject);
            for (Eigen::Index g = 0; g < ng; ++g) {
                const auto& r = rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(g)];
                tally(r);
                report.identification_scores(p, g) = r.score;
            }
        }
        for (const auto& g : protocol.gallery) {
            gallery_subjects.push_back(by_id.at(g)->subject);
        }
        report.cmc = cmc(report.identification_scores, probe_subjects, gallery_subjects).rates;
        report.probes = static_cast<int>(np);
        report.gallery = static_cast<int>(ng);
    }
    return report;
}

std::string report_json(const MetricsReport& r)
{
    nlohmann::ordered_json j;
    nlohmann::ordered_json tar = nlohmann::ordered_json::object();
    for (auto it = r.tar_at_far.rbegin(); it != r.tar_at_far.rend(); ++it) {
        char key[32];
        std::snprintf(key, sizeof key, "%g", it->first);
        tar[key] = it->second;
    }
    nlohmann::ordered_json cmc_json = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.cmc) {
        cmc_json[std::to_string(k)] = v;
    }
    j["tar_at_far"] = tar;
    j["cmc"] = cmc_json;
    j["accuracy"] = r.accuracy ? nlohmann::ordered_json(*r.accuracy) : nlohmann::ordered_json(nullptr);
    j["eer_complement"] = r.eer_complement ? nlohmann::ordered_json(*r.eer_complement) : nlohmann::ordered_json(nullptr);
    j["strategy"] = r.strategy;
    j["pairs"] = r.pairs;
    j["genuine"] = r.genuine;
    j["impostor"] = r.impostor;
    j["probes"] = r.probes;
    j["gallery"] = r.gallery;
    j["degenerate_comparisons"] = r.degenerate_comparisons;
    j["single_variant_comparisons"] = r.single_variant_comparisons;
    j["pca_hash"] = r.pca_hash ? nlohmann::ordered_json(*r.pca_hash) : nlohmann::ordered_json(nullptr);
    return j.dump(2) + "\n";
}

std::string report_table(const MetricsReport& r)
{
    std::string out;
    auto line = [&](const std::string& k, const std::string& v) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-22s %s\n", k.c_str(), v.c_str());
        out += buf;
    };
    line("strategy", r.strategy);
    for (auto it = r.tar_at_far.rbegin(); it != r.tar_at_far.rend(); ++it) {
        char key[40];
        std::snprintf(key, sizeof key, "TAR@FAR=%g", it->first);
        line(key, format_double(it->second));
    }
    for (const auto& [k, v] : r.cmc) {
        line("rank-" + std::to_string(k), format_double(v));
    }
    line("accuracy", r.accuracy ? format_double(*r.accuracy) : "n/a");
    line("100%-EER", r.eer_complement ? format_double(*r.eer_complement) : "n/a");
    line("pairs (gen/imp)", std::to_string(r.pairs) + " (" + std::to_string(r.genuine) + "/" +
                                std::to_string(r.impostor) + ")");
    line("probes x gallery", std::to_string(r.probes) + " x " + std::to_string(r.gallery));
    return out;
}

} // namespace facesynth::eval
