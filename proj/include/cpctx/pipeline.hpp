#pragma once

// End-to-end wiring: deployment labelling, knowledge setup, ingest,
// feature extraction and next-location test-case preparation.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cpctx/classify.hpp"
#include "cpctx/core.hpp"
#include "cpctx/ctxsim.hpp"
#include "cpctx/evalkit.hpp"
#include "cpctx/features.hpp"
#include "cpctx/ingest.hpp"
#include "cpctx/locpred.hpp"
#include "cpctx/semex.hpp"
#include "cpctx/spatial.hpp"
#include "cpctx/synthgen.hpp"

namespace cpctx::pipeline {

struct Deployment {
    Floorplan floorplan;
    spatial::CategoryMap category_map;
    spatial::Assignment assignment;
    spatial::ApLabels labels;
    std::set<std::string> ap_ids;
    std::set<std::string> entry_exit;
};

inline std::string join_lines(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
    return out;
}

/// Validates the floorplan and category map, then labels every AP.
inline Deployment make_deployment(Floorplan fp, spatial::CategoryMap map) {
    auto report = validate_deployment(fp);
    if (!report.ok()) throw ValidationError("invalid deployment: " + join_lines(report.violations));
    auto problems = map.problems();
    if (!problems.empty()) throw ValidationError("invalid category map: " + join_lines(problems));
    Deployment d;
    d.labels = spatial::label_floorplan(fp, map, &d.assignment);
    d.ap_ids = fp.ap_ids();
    d.entry_exit = {fp.entry_exit_aps.begin(), fp.entry_exit_aps.end()};
    d.floorplan = std::move(fp);
    d.category_map = std::move(map);
    return d;
}

struct Knowledge {
    semex::TripleStore store;
    std::vector<semex::CategoryDocument> corpus;
    ctxsim::TfIdfModel model;
    std::optional<semex::TermBag> store_doc;
    std::optional<semex::TermBag> crowd_doc;
    int query_hops = 2;
};

inline Knowledge make_knowledge(semex::TripleStore store, const spatial::CategoryMap& map, int lambda = 5) {
    Knowledge k;
    k.corpus = semex::build_category_corpus(store, map.registry(), lambda);
    k.model = ctxsim::TfIdfModel::fit(std::span<const semex::CategoryDocument>(k.corpus));
    k.store = std::move(store);
    return k;
}

/// Parses both logs, sessionizes against the deployment's APs and marks
/// complete trajectories.
inline ingest::SessionizeResult ingest_logs(std::string_view al_text, std::string_view ql_text, const Deployment& d,
                                            const ingest::SessionizationConfig& cfg = {}) {
    auto al = ingest::parse_association_log_text(al_text);
    auto ql = ingest::parse_query_log_text(ql_text);
    ingest::SessionizeInput in{al.records, ql.records, al.line_nos, ql.line_nos};
    auto res = ingest::sessionize(in, cfg, &d.ap_ids);
    for (auto& t : res.trajectories) t = ingest::mark_complete(std::move(t), d.entry_exit);
    for (auto& r : al.rejects) r.reason = "association log: " + r.reason;
    for (auto& r : ql.rejects) r.reason = "query log: " + r.reason;
    res.rejects.insert(res.rejects.begin(), al.rejects.begin(), al.rejects.end());
    res.rejects.insert(res.rejects.end(), ql.rejects.begin(), ql.rejects.end());
    return res;
}

inline std::vector<std::string> query_texts(std::span<const QueryRecord> qs) {
    std::vector<std::string> out;
    for (const auto& q : qs) out.push_back(q.text);
    return out;
}

inline ctxsim::SimilarityProfile profile_for(const Trajectory& t, const Deployment& d, const Knowledge& k,
                                             semex::QueryContext* qc_out = nullptr) {
    auto qc = semex::query_context(k.store, query_texts(t.queries), k.query_hops);
    auto p = ctxsim::make_profile(k.model, qc.document, t.hops, d.labels);
    if (qc_out) *qc_out = std::move(qc);
    return p;
}

/// One feature row per trajectory, labelled from `labels` when present.
inline std::vector<features::FeatureVector> compute_features(std::span<const Trajectory> trajectories, const Deployment& d,
                                                             const Knowledge& k,
                                                             const std::map<std::string, IntentLabel>* labels = nullptr,
                                                             std::vector<std::string>* warnings = nullptr) {
    std::vector<features::FeatureVector> out;
    std::set<std::string> seen_warnings;
    for (const auto& t : trajectories) {
        semex::QueryContext qc;
        auto profile = profile_for(t, d, k, &qc);
        auto ex = features::extract_features(t, profile, qc.document, k.model, k.store_doc ? &*k.store_doc : nullptr,
                                             k.crowd_doc ? &*k.crowd_doc : nullptr);
        if (labels) {
            auto it = labels->find(t.id());
            if (it != labels->end()) ex.features.label = it->second;
        }
        if (warnings)
            for (auto& w : ex.warnings)
                if (seen_warnings.insert(w).second) warnings->push_back(w);
        out.push_back(ex.features);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Next-location prediction setup

struct LocpredSetup {
    std::vector<Trajectory> training;  // full trajectories
    std::vector<locpred::TestCase> tests;
};

/// SS per AP from the prefix only: hops up to the partition point and the
/// queries issued at those APs.
inline std::map<std::string, double> prefix_semantic_weights(const Trajectory& t, const locpred::Partition& p,
                                                             const Deployment& d, const Knowledge& k) {
    std::set<std::string> prefix(p.prefix.begin(), p.prefix.end());
    std::vector<Hop> hops;
    for (const auto& h : t.hops)
        if (prefix.count(h.ap_id)) hops.push_back(h);
    std::vector<std::string> texts;
    for (const auto& q : t.queries)
        if (prefix.count(q.ap_id)) texts.push_back(q.text);
    auto qc = semex::query_context(k.store, texts, k.query_hops);
    auto profile = ctxsim::make_profile(k.model, qc.document, hops, d.labels);
    return ctxsim::semantic_weight_vector(d.labels, profile.cs);
}

/// Picks up to `n_test` partitionable trajectories (non-empty suffix) as
/// test cases by seeded shuffle; everything else is training.
inline LocpredSetup make_locpred_setup(std::span<const Trajectory> trajectories, const Deployment& d,
                                       const Knowledge& k, std::size_t n_test, std::uint64_t seed) {
    std::vector<std::size_t> eligible;
    std::vector<std::optional<locpred::Partition>> parts;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        parts.push_back(locpred::partition_at_first_query(trajectories[i]));
        if (parts.back() && !parts.back()->suffix.empty()) eligible.push_back(i);
    }
    std::shuffle(eligible.begin(), eligible.end(), std::mt19937_64(seed));
    eligible.resize(std::min(n_test, eligible.size()));
    std::sort(eligible.begin(), eligible.end());
    std::set<std::size_t> test(eligible.begin(), eligible.end());
    LocpredSetup s;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        if (!test.count(i)) {
            s.training.push_back(trajectories[i]);
            continue;
        }
        const auto& t = trajectories[i];
        s.tests.push_back({t.id(), *parts[i], prefix_semantic_weights(t, *parts[i], d, k)});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Synthetic end-to-end datasets

struct SynthData {
    synthgen::World world;
    synthgen::Logs logs;
    Deployment deployment;
    Knowledge knowledge;
    std::vector<Trajectory> trajectories;
    std::map<std::string, IntentLabel> labels;
};

inline SynthData synthesize(std::uint64_t seed, std::size_t n, const synthgen::PersonaMix& mix,
                            const synthgen::VisitConfig& vcfg = {}, const synthgen::WorldConfig& wcfg = {},
                            int lambda = 5) {
    SynthData s;
    s.world = synthgen::generate_world(seed, wcfg);
    s.logs = synthgen::generate_logs(seed, n, s.world, mix, vcfg);
    s.deployment = make_deployment(s.world.floorplan, s.world.category_map);
    s.knowledge = make_knowledge(semex::TripleStore(s.world.kg), s.world.category_map, lambda);
    s.knowledge.store_doc = s.world.store_doc.terms;
    s.knowledge.crowd_doc = s.world.crowd_doc.terms;
    ingest::SessionizeInput in{s.logs.associations, s.logs.queries};
    auto res = ingest::sessionize(in, {}, &s.deployment.ap_ids);
    if (!res.rejects.empty()) throw ValidationError("synthetic logs produced rejects");
    for (auto& t : res.trajectories) s.trajectories.push_back(ingest::mark_complete(std::move(t), s.deployment.entry_exit));
    for (const auto& l : s.logs.labels) s.labels[l.trajectory_id] = l.label;
    return s;
}

}  // namespace cpctx::pipeline
