#pragma once

// Ranking metrics, popularity sensitivity and correlation.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "cpctx/core.hpp"
#include "cpctx/csv.hpp"
#include "cpctx/locpred.hpp"

namespace cpctx::evalkit {

using ApSet = std::set<std::string>;

/// Number of the first k predictions found in `actual`.
inline std::size_t hits_at_k(std::span<const std::string> predicted, const ApSet& actual, std::size_t k) {
    std::size_t h = 0;
    for (std::size_t i = 0; i < std::min(k, predicted.size()); ++i) h += actual.count(predicted[i]);
    return h;
}

/// hits / k, always divided by k even if fewer APs were predicted or visited.
inline double accuracy_at_k(std::span<const std::string> predicted, const ApSet& actual, int k) {
    if (k <= 0) throw ValidationError("accuracy@k needs k > 0");
    return static_cast<double>(hits_at_k(predicted, actual, static_cast<std::size_t>(k))) / k;
}

/// 1/R for the first correct prediction within the first `k` (all when k is
/// 0), else 0.
inline double reciprocal_rank(std::span<const std::string> predicted, const ApSet& actual, std::size_t k = 0) {
    std::size_t lim = k == 0 ? predicted.size() : std::min(k, predicted.size());
    for (std::size_t i = 0; i < lim; ++i)
        if (actual.count(predicted[i])) return 1.0 / static_cast<double>(i + 1);
    return 0.0;
}

inline double mrr(std::span<const std::vector<std::string>> ranked_lists, std::span<const ApSet> actual_sets,
                  std::size_t k = 0) {
    if (ranked_lists.empty()) throw ValidationError("mrr: empty input");
    if (ranked_lists.size() != actual_sets.size()) throw ValidationError("mrr: length mismatch");
    double s = 0;
    for (std::size_t i = 0; i < ranked_lists.size(); ++i) s += reciprocal_rank(ranked_lists[i], actual_sets[i], k);
    return s / static_cast<double>(ranked_lists.size());
}

/// MRR straight from 1-based ranks; 0 stands for "never correct".
inline double mrr_from_ranks(std::span<const std::size_t> ranks) {
    if (ranks.empty()) throw ValidationError("mrr: empty input");
    double s = 0;
    for (auto r : ranks) s += r == 0 ? 0.0 : 1.0 / static_cast<double>(r);
    return s / static_cast<double>(ranks.size());
}

/// AP visit counts over training trajectories; every AP in `ap_ids` appears.
inline std::map<std::string, std::size_t> popularity(std::span<const Trajectory> training,
                                                     std::span<const std::string> ap_ids) {
    std::map<std::string, std::size_t> pop;
    for (const auto& ap : ap_ids) pop[ap] = 0;
    for (const auto& t : training)
        for (const auto& h : t.hops) ++pop[h.ap_id];
    return pop;
}

/// The n most visited APs; ties go to the smaller ap_id.
inline ApSet most_popular(const std::map<std::string, std::size_t>& pop, std::size_t n) {
    std::vector<std::pair<std::string, std::size_t>> v(pop.begin(), pop.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    ApSet out;
    for (std::size_t i = 0; i < std::min(n, v.size()); ++i) out.insert(v[i].first);
    return out;
}

/// Rankings with `removed` APs dropped from both the ranked list and the
/// actual set. Cases whose actual set becomes empty are left out.
inline std::vector<locpred::Ranking> remove_aps(std::span<const locpred::Ranking> rankings, const ApSet& removed) {
    std::vector<locpred::Ranking> out;
    for (const auto& r : rankings) {
        locpred::Ranking c = r;
        std::erase_if(c.ranked, [&](const std::string& ap) { return removed.count(ap) > 0; });
        std::erase_if(c.actual, [&](const std::string& ap) { return removed.count(ap) > 0; });
        if (!c.actual.empty()) out.push_back(std::move(c));
    }
    return out;
}

struct MethodSummary {
    std::size_t cases = 0;
    double accuracy_at_k = 0;  // mean over cases
    double mrr = 0;            // first hit within the top k
};

inline MethodSummary summarize(std::span<const locpred::Ranking> rankings, std::size_t k) {
    MethodSummary s;
    s.cases = rankings.size();
    if (rankings.empty()) return s;
    for (const auto& r : rankings) {
        ApSet actual(r.actual.begin(), r.actual.end());
        s.accuracy_at_k += accuracy_at_k(r.ranked, actual, static_cast<int>(k));
        s.mrr += reciprocal_rank(r.ranked, actual, k);
    }
    s.accuracy_at_k /= static_cast<double>(rankings.size());
    s.mrr /= static_cast<double>(rankings.size());
    return s;
}

struct SensitivityPoint {
    std::size_t n = 0;
    double accuracy = 0;
    std::size_t cases = 0;
};

/// Accuracy@k after removing the n most popular APs, for each n in `ns`.
inline std::vector<SensitivityPoint> sensitivity_remove_top_n(std::span<const locpred::Ranking> rankings,
                                                              const std::map<std::string, std::size_t>& pop,
                                                              std::span<const std::size_t> ns, std::size_t k = 10) {
    std::vector<SensitivityPoint> out;
    for (auto n : ns) {
        if (n >= pop.size()) throw ValidationError("cannot remove " + std::to_string(n) + " of " + std::to_string(pop.size()) + " APs");
        auto kept = remove_aps(rankings, most_popular(pop, n));
        out.push_back({n, summarize(kept, k).accuracy_at_k, kept.size()});
    }
    return out;
}

struct Correlation {
    double r = 0;
    double p = 1;
};

/// Pearson r with a two-tailed p from t = r sqrt((n-2)/(1-r^2)).
inline Correlation pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ValidationError("pearson: length mismatch");
    const std::size_t n = xs.size();
    if (n < 3) throw ValidationError("pearson: need at least 3 points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0 || syy == 0) throw ValidationError("pearson: zero variance");
    Correlation c;
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    double df = static_cast<double>(n - 2);
    if (std::fabs(c.r) >= 1.0) {
        c.p = 0.0;
        return c;
    }
    double t = c.r * std::sqrt(df / (1 - c.r * c.r));
    boost::math::students_t dist(df);
    c.p = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    return c;
}

// ---------------------------------------------------------------------------
// Reports

struct MethodReport {
    locpred::Method method = locpred::Method::ItemItem;
    std::size_t k = 10;
    MethodSummary summary;
    std::vector<SensitivityPoint> sensitivity;
};

inline std::vector<MethodReport> build_reports(std::span<const locpred::Ranking> rankings,
                                               const std::map<std::string, std::size_t>& pop, std::size_t k,
                                               std::span<const std::size_t> ns) {
    std::map<locpred::Method, std::vector<locpred::Ranking>> by_method;
    for (const auto& r : rankings) by_method[r.method].push_back(r);
    std::vector<MethodReport> out;
    for (const auto& [m, rs] : by_method)
        out.push_back({m, k, summarize(rs, k), ns.empty() ? std::vector<SensitivityPoint>{} : sensitivity_remove_top_n(rs, pop, ns, k)});
    return out;
}

inline json to_json(const MethodReport& r) {
    json sens = json::array();
    for (const auto& p : r.sensitivity) sens.push_back({{"n", p.n}, {"acc", p.accuracy}, {"cases", p.cases}});
    return {{"method", locpred::to_string(r.method)},
            {"k", r.k},
            {"cases", r.summary.cases},
            {"accuracy_at_k", r.summary.accuracy_at_k},
            {"mrr", r.summary.mrr},
            {"sensitivity", std::move(sens)}};
}

inline std::string serialize_reports(std::span<const MethodReport> reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr.dump(2) + "\n";
}

/// Long-format table for plotting: one row per method and removed-n (n = 0
/// row is the unfiltered result).
inline std::string reports_to_csv(std::span<const MethodReport> reports) {
    std::string out = "method,k,n,accuracy_at_k,mrr\n";
    for (const auto& r : reports) {
        std::string m(locpred::to_string(r.method));
        out += m + "," + std::to_string(r.k) + ",0," + format_double(r.summary.accuracy_at_k) + "," +
               format_double(r.summary.mrr) + "\n";
        for (const auto& p : r.sensitivity)
            if (p.n != 0) out += m + "," + std::to_string(r.k) + "," + std::to_string(p.n) + "," + format_double(p.accuracy) + ",\n";
    }
    return out;
}

}  // namespace cpctx::evalkit
