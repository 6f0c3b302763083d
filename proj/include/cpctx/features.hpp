#pragma once

// The 43-dimensional cyber-physical-contextual feature vector.
//
//   F1        number of APs in the trajectory
//   F2        total dwell, seconds
//   F3..F20   dwell fraction per semantic category
//   F21       number of queries
//   F22..F39  contextual similarity CS per semantic category
//   F40       max CS
//   F41       sum CS
//   F42       cosine(Q_c, store-name document)
//   F43       cosine(Q_c, crowdsourced keyword document)

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cpctx/core.hpp"
#include "cpctx/csv.hpp"
#include "cpctx/ctxsim.hpp"
#include "cpctx/semex.hpp"

namespace cpctx::features {

inline constexpr std::size_t kNumFeatures = 43;

inline std::string feature_name(std::size_t i) { return "F" + std::to_string(i + 1); }

inline std::vector<std::string> feature_names(std::span<const std::size_t> indices) {
    std::vector<std::string> out;
    for (auto i : indices) out.push_back(feature_name(i));
    return out;
}

struct FeatureVector {
    std::array<double, kNumFeatures> f{};
    std::optional<IntentLabel> label;

    double operator[](std::size_t i) const { return f[i]; }
};

struct Extraction {
    FeatureVector features;
    std::vector<std::string> warnings;
};

/// F42/F43 fall back to 0 (with a warning) when their document is absent.
inline Extraction extract_features(const Trajectory& t, const ctxsim::SimilarityProfile& profile,
                                   const semex::TermBag& query_context, const ctxsim::TfIdfModel& model,
                                   const semex::TermBag* store_doc, const semex::TermBag* crowd_doc) {
    Extraction out;
    auto& f = out.features.f;
    f[0] = static_cast<double>(t.hops.size());
    f[1] = static_cast<double>(t.total_dwell());
    for (std::size_t c = 0; c < kNumCategories; ++c) f[2 + c] = profile.dwell_fractions[c];
    f[20] = static_cast<double>(t.queries.size());
    for (std::size_t c = 0; c < kNumCategories; ++c) f[21 + c] = profile.cs[c];
    f[39] = *std::max_element(profile.cs.begin(), profile.cs.end());
    f[40] = std::accumulate(profile.cs.begin(), profile.cs.end(), 0.0);
    auto qv = model.vectorize(query_context);
    if (store_doc) f[41] = ctxsim::cosine(qv, model.vectorize(*store_doc));
    else out.warnings.push_back("store-name document missing; F42 = 0");
    if (crowd_doc) f[42] = ctxsim::cosine(qv, model.vectorize(*crowd_doc));
    else out.warnings.push_back("crowdsourced keyword document missing; F43 = 0");
    return out;
}

/// Parses a feature-set expression such as "phy+cyb+cont" into sorted
/// 0-based feature indices. phy = F1..F20, cyb = F21, cont = F22..F43.
inline std::vector<std::size_t> parse_feature_set(std::string_view expr) {
    std::set<std::size_t> idx;
    for (const auto& part : split(expr, '+')) {
        std::string p(trim(part));
        if (p == "phy") for (std::size_t i = 0; i < 20; ++i) idx.insert(i);
        else if (p == "cyb") idx.insert(20);
        else if (p == "cont") for (std::size_t i = 21; i < kNumFeatures; ++i) idx.insert(i);
        else if (p == "all") for (std::size_t i = 0; i < kNumFeatures; ++i) idx.insert(i);
        else throw ValidationError("unknown feature group '" + p + "' (expected phy, cyb, cont)");
    }
    return {idx.begin(), idx.end()};
}

inline std::string serialize_feature_matrix(std::span<const FeatureVector> rows) {
    std::string out;
    for (std::size_t i = 0; i < kNumFeatures; ++i) out += feature_name(i) + ",";
    out += "label\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < kNumFeatures; ++i) out += format_double(r.f[i]) + ",";
        out += r.label ? std::string(to_string(*r.label)) : "?";
        out += "\n";
    }
    return out;
}

inline std::vector<FeatureVector> parse_feature_matrix(std::string_view text) {
    auto rows = csv::parse(text);
    if (rows.empty()) throw ValidationError("feature matrix: missing header");
    std::vector<std::string> header;
    for (std::size_t i = 0; i < kNumFeatures; ++i) header.push_back(feature_name(i));
    header.push_back("label");
    if (rows.front().fields != header) throw ValidationError("feature matrix: header mismatch");
    std::vector<FeatureVector> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& fields = rows[r].fields;
        if (fields.size() != kNumFeatures + 1)
            throw ValidationError("feature matrix: wrong field count on line " + std::to_string(rows[r].line_no));
        FeatureVector fv;
        for (std::size_t i = 0; i < kNumFeatures; ++i)
            if (!parse_double(fields[i], fv.f[i]))
                throw ValidationError("feature matrix: bad number on line " + std::to_string(rows[r].line_no));
        if (fields.back() != "?") {
            fv.label = parse_intent_label(fields.back());
            if (!fv.label) throw ValidationError("feature matrix: bad label on line " + std::to_string(rows[r].line_no));
        }
        out.push_back(fv);
    }
    return out;
}

}  // namespace cpctx::features
