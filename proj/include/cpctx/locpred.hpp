#pragma once

// Next-location prediction with item-based and user-based collaborative
// filtering over binary visit vectors, optionally reweighted by per-AP
// semantic weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cpctx/core.hpp"

namespace cpctx::locpred {

using BitRow = std::vector<std::uint8_t>;
using Scores = std::map<std::string, double>;

/// |I n J| / |I u J|; two empty vectors give 0.
inline double jaccard(std::span<const std::uint8_t> u, std::span<const std::uint8_t> v) {
    if (u.size() != v.size()) throw ValidationError("jaccard: length mismatch");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        bool a = u[i] != 0, b = v[i] != 0;
        inter += a && b;
        uni += a || b;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Rows are trajectories, columns are APs (sorted ap_id order).
class VisitMatrix {
public:
    explicit VisitMatrix(std::vector<std::string> ap_ids) : aps_(std::move(ap_ids)) {
        std::sort(aps_.begin(), aps_.end());
        aps_.erase(std::unique(aps_.begin(), aps_.end()), aps_.end());
        for (std::size_t i = 0; i < aps_.size(); ++i) index_.emplace(aps_[i], i);
    }

    /// Adds one row. Unknown APs are an error; so is a row with no visits.
    void add_row(std::span<const std::string> visited) {
        BitRow row(aps_.size(), 0);
        for (const auto& ap : visited) row[column_of(ap)] = 1;
        if (std::find(row.begin(), row.end(), 1) == row.end()) throw ValidationError("visit matrix row has no visits");
        rows_.push_back(std::move(row));
        item_sim_.clear();
    }

    std::size_t num_rows() const { return rows_.size(); }
    std::size_t num_columns() const { return aps_.size(); }
    const std::vector<std::string>& ap_ids() const { return aps_; }
    const BitRow& row(std::size_t r) const { return rows_.at(r); }

    std::size_t column_of(const std::string& ap) const {
        auto it = index_.find(ap);
        if (it == index_.end()) throw ValidationError("ap '" + ap + "' is not a matrix column");
        return it->second;
    }

    BitRow column(std::size_t c) const {
        BitRow col(rows_.size());
        for (std::size_t r = 0; r < rows_.size(); ++r) col[r] = rows_[r][c];
        return col;
    }

    BitRow indicator(std::span<const std::string> visited) const {
        BitRow row(aps_.size(), 0);
        for (const auto& ap : visited) row[column_of(ap)] = 1;
        return row;
    }

    /// Column-column Jaccard, computed once per matrix state.
    double item_similarity(std::size_t a, std::size_t b) const {
        if (item_sim_.empty()) {
            const std::size_t n = aps_.size();
            std::vector<BitRow> cols;
            for (std::size_t c = 0; c < n; ++c) cols.push_back(column(c));
            item_sim_.assign(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i; j < n; ++j) item_sim_[i * n + j] = item_sim_[j * n + i] = jaccard(cols[i], cols[j]);
        }
        return item_sim_[a * aps_.size() + b];
    }

private:
    std::vector<std::string> aps_;
    std::map<std::string, std::size_t> index_;
    std::vector<BitRow> rows_;
    mutable std::vector<double> item_sim_;
};

inline std::vector<std::size_t> candidate_columns(const VisitMatrix& m, std::span<const std::string> prefix) {
    BitRow in_prefix = m.indicator(prefix);
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < m.num_columns(); ++c)
        if (!in_prefix[c]) out.push_back(c);
    return out;
}

/// Mean Jaccard of each unvisited AP's column against the prefix APs'
/// columns. An empty prefix scores everything 0.
inline Scores item_item_scores(const VisitMatrix& m, std::span<const std::string> prefix) {
    std::vector<std::size_t> pcols;
    for (const auto& ap : std::set<std::string>(prefix.begin(), prefix.end())) pcols.push_back(m.column_of(ap));
    Scores out;
    for (auto c : candidate_columns(m, prefix)) {
        double s = 0;
        for (auto p : pcols) s += m.item_similarity(p, c);
        out[m.ap_ids()[c]] = pcols.empty() ? 0.0 : s / static_cast<double>(pcols.size());
    }
    return out;
}

/// Similarity-weighted vote of the k most similar training rows, normalized
/// by their total similarity. Neighbor ties go to the lower row index.
/// `exclude_row` keeps a request's own prefix row out of its neighborhood.
inline Scores user_user_scores(const VisitMatrix& m, std::span<const std::string> prefix, std::size_t k_neighbors,
                               std::optional<std::size_t> exclude_row = std::nullopt) {
    if (k_neighbors < 1) throw ValidationError("k_neighbors must be >= 1");
    BitRow target = m.indicator(prefix);
    std::vector<std::pair<double, std::size_t>> sims;
    for (std::size_t r = 0; r < m.num_rows(); ++r)
        if (r != exclude_row) sims.emplace_back(jaccard(target, m.row(r)), r);
    std::stable_sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    sims.resize(std::min(k_neighbors, sims.size()));
    double mass = 0;
    for (const auto& [s, _] : sims) mass += s;
    Scores out;
    for (auto c : candidate_columns(m, prefix)) {
        double v = 0;
        if (mass > 0)
            for (const auto& [s, r] : sims)
                if (m.row(r)[c]) v += s;
        out[m.ap_ids()[c]] = mass > 0 ? v / mass : 0.0;
    }
    return out;
}

/// JS_i * SS_i; APs without an SS entry score 0.
inline Scores weighted_scores(const Scores& scores, const std::map<std::string, double>& ss) {
    Scores out;
    for (const auto& [ap, s] : scores) {
        auto it = ss.find(ap);
        out[ap] = it == ss.end() ? 0.0 : s * it->second;
    }
    return out;
}

/// Ranking key: scores are compared at 1e-12 resolution so sums that are
/// equal up to rounding order count as ties.
inline std::int64_t score_key(double s) { return std::llround(s * 1e12); }

/// Descending score, ties by ap_id; at most k entries.
inline std::vector<std::string> top_k(const Scores& scores, std::size_t k) {
    std::vector<std::pair<std::string, std::int64_t>> v;
    v.reserve(scores.size());
    for (const auto& [ap, s] : scores) v.emplace_back(ap, score_key(s));
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, v.size()); ++i) out.push_back(v[i].first);
    return out;
}

inline std::vector<std::string> rank_all(const Scores& scores) { return top_k(scores, scores.size()); }

// ---------------------------------------------------------------------------
// Train/test partition

struct Partition {
    std::vector<std::string> prefix;
    std::vector<std::string> suffix;
    std::size_t first_query = 0;  // index into Trajectory::queries
    bool fallback = false;        // query AP not on the trajectory
};

/// Splits after the hop where the earliest query was issued. If that AP is
/// not among the hops, the hop whose time span is nearest the query time is
/// used instead and the partition is flagged. Hop spans are laid end to end
/// from the visit start. No queries gives nullopt.
inline std::optional<Partition> partition_at_first_query(const Trajectory& t) {
    if (t.queries.empty() || t.hops.empty()) return std::nullopt;
    std::size_t q = 0;
    for (std::size_t i = 1; i < t.queries.size(); ++i)
        if (t.queries[i].at < t.queries[q].at) q = i;
    const auto& query = t.queries[q];
    std::size_t cut = t.hops.size();
    for (std::size_t h = 0; h < t.hops.size(); ++h)
        if (t.hops[h].ap_id == query.ap_id) {
            cut = h;
            break;
        }
    Partition p;
    p.first_query = q;
    if (cut == t.hops.size()) {
        p.fallback = true;
        std::int64_t best = -1;
        Timestamp start = t.visit_start;
        for (std::size_t h = 0; h < t.hops.size(); ++h) {
            Timestamp end = start + t.hops[h].dwell;
            std::int64_t dist = query.at < start ? start - query.at : (end < query.at ? query.at - end : 0);
            if (best < 0 || dist < best) {
                best = dist;
                cut = h;
            }
            start = end;
        }
    }
    for (std::size_t h = 0; h < t.hops.size(); ++h) (h <= cut ? p.prefix : p.suffix).push_back(t.hops[h].ap_id);
    return p;
}

// ---------------------------------------------------------------------------
// Batch prediction

enum class Method { ItemItem, ItemItemWeighted, UserUser };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::ItemItem: return "i-i";
        case Method::ItemItemWeighted: return "i-i-w";
        case Method::UserUser: return "u-u";
    }
    return "";
}

inline std::optional<Method> parse_method(std::string_view s) {
    if (s == "i-i") return Method::ItemItem;
    if (s == "i-i-w") return Method::ItemItemWeighted;
    if (s == "u-u") return Method::UserUser;
    return std::nullopt;
}

struct Ranking {
    std::string trajectory_id;
    Method method = Method::ItemItem;
    std::vector<std::string> ranked;  // every candidate AP, best first
    std::vector<std::string> actual;  // test suffix
    bool fallback = false;
};

struct TestCase {
    std::string trajectory_id;
    Partition partition;
    std::map<std::string, double> ss;  // per-AP semantic weight from the prefix context
};

struct PredictOptions {
    std::size_t k_neighbors = 10;
};

/// Builds the collaborative matrix from full training trajectories plus the
/// test prefixes, then ranks every candidate AP for each test case.
/// i-i-w with an all-zero SS vector carries no semantic evidence and keeps
/// the unweighted order.
inline std::vector<Ranking> rank_test_cases(const std::vector<std::string>& ap_ids,
                                            std::span<const Trajectory> training, std::span<const TestCase> tests,
                                            std::span<const Method> methods, const PredictOptions& opt = {}) {
    VisitMatrix m(ap_ids);
    for (const auto& t : training) {
        std::vector<std::string> aps;
        for (const auto& h : t.hops) aps.push_back(h.ap_id);
        m.add_row(aps);
    }
    const std::size_t first_prefix_row = m.num_rows();
    for (const auto& tc : tests) m.add_row(tc.partition.prefix);
    std::vector<Ranking> out;
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const auto& tc = tests[i];
        std::optional<Scores> ii;
        auto item_item = [&]() -> const Scores& {
            if (!ii) ii = item_item_scores(m, tc.partition.prefix);
            return *ii;
        };
        for (auto method : methods) {
            Scores s;
            switch (method) {
                case Method::ItemItem: s = item_item(); break;
                case Method::ItemItemWeighted: {
                    bool any = std::any_of(tc.ss.begin(), tc.ss.end(), [](const auto& e) { return e.second > 0; });
                    s = any ? weighted_scores(item_item(), tc.ss) : item_item();
                    break;
                }
                case Method::UserUser: s = user_user_scores(m, tc.partition.prefix, opt.k_neighbors, first_prefix_row + i); break;
            }
            out.push_back({tc.trajectory_id, method, rank_all(s), tc.partition.suffix, tc.partition.fallback});
        }
    }
    return out;
}

inline json prediction_record(const Ranking& r, std::size_t k) {
    std::vector<std::string> predicted(r.ranked.begin(), r.ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, r.ranked.size())));
    json j{{"trajectory_id", r.trajectory_id},
           {"method", to_string(r.method)},
           {"k", k},
           {"predicted", predicted},
           {"actual", r.actual}};
    if (r.fallback) j["partition_fallback"] = true;
    return j;
}

inline std::string serialize_prediction_report(std::span<const Ranking> rankings, std::size_t k) {
    std::string out;
    for (const auto& r : rankings) out += prediction_record(r, k).dump() + "\n";
    return out;
}

/// Reads a prediction report back; `ranked` holds the top-k list.
inline std::vector<Ranking> parse_prediction_report(std::string_view text) {
    std::vector<Ranking> out;
    std::size_t line_no = 0;
    for (const auto& line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ValidationError("prediction report: bad JSON on line " + std::to_string(line_no));
        try {
            auto method = parse_method(j.at("method").get<std::string>());
            if (!method) throw ValidationError("prediction report: unknown method on line " + std::to_string(line_no));
            out.push_back({j.at("trajectory_id").get<std::string>(), *method,
                           j.at("predicted").get<std::vector<std::string>>(),
                           j.at("actual").get<std::vector<std::string>>(), j.value("partition_fallback", false)});
        } catch (const json::exception& e) {
            throw ValidationError("prediction report line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace cpctx::locpred
