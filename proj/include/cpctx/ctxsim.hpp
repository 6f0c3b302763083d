#pragma once

// TF-IDF space over the category corpus, cyber/physical cosine similarity,
// dwell-boosted contextual similarity and per-AP semantic weights.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cpctx/core.hpp"
#include "cpctx/csv.hpp"
#include "cpctx/semex.hpp"
#include "cpctx/spatial.hpp"

namespace cpctx::ctxsim {

using semex::TermBag;

/// Sparse vector: (term index, weight) pairs sorted by index, zeros omitted.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

inline double dot(const SparseVector& a, const SparseVector& b) {
    double s = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (i->first < j->first) ++i;
        else if (j->first < i->first) ++j;
        else {
            s += i->second * j->second;
            ++i;
            ++j;
        }
    }
    return s;
}

inline double norm(const SparseVector& v) {
    double s = 0;
    for (const auto& [_, w] : v) s += w * w;
    return std::sqrt(s);
}

/// cos = a.b / (|a||b|), 0 when either vector is zero.
inline double cosine(const SparseVector& a, const SparseVector& b) {
    double na = norm(a), nb = norm(b);
    if (na == 0 || nb == 0) return 0;
    double c = dot(a, b) / (na * nb);
    return std::clamp(c, 0.0, 1.0);
}

/// Raw term frequency times idf(t) = ln(N / df_t). Immutable after fit.
class TfIdfModel {
public:
    static TfIdfModel fit(std::span<const TermBag> docs) {
        if (docs.empty()) throw ValidationError("cannot fit TF-IDF on an empty corpus");
        TfIdfModel m;
        std::map<std::string, std::size_t> df;
        for (const auto& d : docs)
            for (const auto& [t, c] : d)
                if (c > 0) ++df[t];
        const double n = static_cast<double>(docs.size());
        for (const auto& [t, f] : df) {
            m.vocab_.emplace(t, m.idf_.size());
            m.idf_.push_back(std::log(n / static_cast<double>(f)));
        }
        for (const auto& d : docs) m.docs_.push_back(m.vectorize(d));
        return m;
    }

    static TfIdfModel fit(std::span<const semex::CategoryDocument> corpus) {
        std::vector<TermBag> bags;
        for (const auto& d : corpus) bags.push_back(d.terms);
        return fit(std::span<const TermBag>(bags));
    }

    /// Out-of-vocabulary terms are ignored.
    SparseVector vectorize(const TermBag& bag) const {
        SparseVector v;
        for (const auto& [t, c] : bag) {
            auto it = vocab_.find(t);
            if (it == vocab_.end() || c == 0) continue;
            double w = static_cast<double>(c) * idf_[it->second];
            if (w != 0) v.emplace_back(it->second, w);
        }
        std::sort(v.begin(), v.end());
        return v;
    }

    double idf(const std::string& term) const {
        auto it = vocab_.find(term);
        return it == vocab_.end() ? 0.0 : idf_[it->second];
    }

    std::size_t num_documents() const { return docs_.size(); }
    std::size_t vocabulary_size() const { return idf_.size(); }
    const SparseVector& document_vector(std::size_t i) const { return docs_.at(i); }

    double cosine_to(std::size_t doc, const TermBag& query) const { return cosine(docs_.at(doc), vectorize(query)); }

    std::vector<double> cosines(const TermBag& query) const {
        auto q = vectorize(query);
        std::vector<double> out;
        out.reserve(docs_.size());
        for (const auto& d : docs_) out.push_back(cosine(d, q));
        return out;
    }

private:
    std::map<std::string, std::size_t> vocab_;
    std::vector<double> idf_;
    std::vector<SparseVector> docs_;
};

/// t_{c_i}: share of the visit's total dwell spent at APs labelled c_i.
/// Shares may sum above 1 because APs carry several labels.
inline PerCategory<double> dwell_fractions(std::span<const Hop> hops, const spatial::ApLabels& labels) {
    PerCategory<double> out{};
    double total = 0;
    for (const auto& h : hops) total += static_cast<double>(h.dwell);
    if (total <= 0) return out;
    for (const auto& h : hops) {
        auto it = labels.find(h.ap_id);
        if (it == labels.end()) continue;
        for (std::size_t c = 0; c < kNumCategories; ++c)
            if (it->second.test(c)) out[c] += static_cast<double>(h.dwell);
    }
    for (auto& v : out) v /= total;
    return out;
}

/// CS_i = t_i * cos_i when both are strictly positive, else 0.
inline PerCategory<double> contextual_similarity(const PerCategory<double>& cosines,
                                                 const PerCategory<double>& dwell) {
    PerCategory<double> cs{};
    for (std::size_t i = 0; i < kNumCategories; ++i)
        cs[i] = (dwell[i] > 0 && cosines[i] > 0) ? dwell[i] * cosines[i] : 0.0;
    return cs;
}

/// SS(a) = sum_j P_{a,j} * CS_j.
inline double semantic_weight(const CategorySet& labels, const PerCategory<double>& cs) {
    double s = 0;
    for (std::size_t j = 0; j < kNumCategories; ++j)
        if (labels.test(j)) s += cs[j];
    return s;
}

inline std::map<std::string, double> semantic_weight_vector(const spatial::ApLabels& labels,
                                                            const PerCategory<double>& cs) {
    std::map<std::string, double> out;
    for (const auto& [ap, set] : labels) out[ap] = semantic_weight(set, cs);
    return out;
}

/// Category slots by descending cosine, ties by slot; k is clamped to 18.
inline std::vector<std::size_t> top_k_categories(const PerCategory<double>& cosines, std::size_t k) {
    std::vector<std::size_t> idx(kNumCategories);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return cosines[a] > cosines[b]; });
    idx.resize(std::min(k, kNumCategories));
    return idx;
}

inline PerCategory<double> to_per_category(const std::vector<double>& v) {
    if (v.size() != kNumCategories) throw ValidationError("expected 18 category values");
    PerCategory<double> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

struct SimilarityProfile {
    PerCategory<double> cosines{};
    PerCategory<double> dwell_fractions{};
    PerCategory<double> cs{};
};

inline SimilarityProfile make_profile(const TfIdfModel& model, const TermBag& query_context,
                                      std::span<const Hop> hops, const spatial::ApLabels& labels) {
    SimilarityProfile p;
    p.cosines = to_per_category(model.cosines(query_context));
    p.dwell_fractions = dwell_fractions(hops, labels);
    p.cs = contextual_similarity(p.cosines, p.dwell_fractions);
    return p;
}

inline std::string profile_to_csv(const SimilarityProfile& p) {
    std::string out = "category,cosine,dwell_fraction,cs\n";
    for (std::size_t i = 0; i < kNumCategories; ++i)
        out += csv::quote(kSemanticCategoryNames[i]) + "," + format_double(p.cosines[i]) + "," +
               format_double(p.dwell_fractions[i]) + "," + format_double(p.cs[i]) + "\n";
    return out;
}

}  // namespace cpctx::ctxsim
