#pragma once

// Association/query log parsing, sessionization into visits, dwell
// filtering, completeness marking and the association-duration CDF.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cpctx/core.hpp"
#include "cpctx/csv.hpp"

namespace cpctx::ingest {

inline constexpr std::string_view kAssociationHeader =
    "device_id,ap_id,start_ts,duration_s,bytes_down,bytes_up";
inline constexpr std::string_view kQueryHeader = "device_id,ap_id,ts,query";

struct SessionizationConfig {
    std::int64_t dwell_threshold = 600;
    std::int64_t session_gap = 1800;
    std::int64_t sampling_interval = 300;
    /// Apply the dwell threshold to the per-visit sum at an AP (true) or to
    /// each association individually before summing (false).
    bool filter_on_aggregate = true;

    void validate() const {
        if (session_gap <= 0) throw ValidationError("session_gap must be positive");
        if (dwell_threshold < sampling_interval)
            throw ValidationError("dwell_threshold must be at least sampling_interval");
    }
};

struct Reject {
    std::size_t line_no = 0;
    std::string reason;
};

inline std::string rejects_to_jsonl(const std::vector<Reject>& rejects) {
    std::string out;
    for (const auto& r : rejects) out += json{{"line_no", r.line_no}, {"reason", r.reason}}.dump() + "\n";
    return out;
}

template <typename Record>
struct ParsedLog {
    std::vector<Record> records;
    std::vector<std::size_t> line_nos;  // parallel to records
    std::vector<Reject> rejects;
};

namespace detail {

inline std::vector<csv::Row> rows_after_header(std::string_view content, std::string_view header,
                                               const char* what) {
    auto rows = csv::parse(content);
    if (rows.empty() || csv::join(rows.front().fields) != header)
        throw ValidationError(std::string(what) + ": header mismatch, expected '" +
                              std::string(header) + "'");
    rows.erase(rows.begin());
    return rows;
}

inline bool parse_count(const std::string& s, std::int64_t& out) { return parse_int(s, out) && out >= 0; }

}  // namespace detail

inline ParsedLog<AssociationRecord> parse_association_log_text(std::string_view content) {
    ParsedLog<AssociationRecord> out;
    for (auto& row : detail::rows_after_header(content, kAssociationHeader, "association log")) {
        auto reject = [&](std::string reason) { out.rejects.push_back({row.line_no, std::move(reason)}); };
        if (row.malformed) {
            reject("malformed quoting");
            continue;
        }
        if (row.fields.size() != 6) {
            reject("expected 6 fields, got " + std::to_string(row.fields.size()));
            continue;
        }
        AssociationRecord r;
        r.device_id = row.fields[0];
        r.ap_id = row.fields[1];
        if (r.device_id.empty() || r.ap_id.empty()) {
            reject("empty device_id or ap_id");
            continue;
        }
        auto ts = Timestamp::parse(row.fields[2]);
        if (!ts) {
            reject("bad timestamp '" + row.fields[2] + "'");
            continue;
        }
        r.start = *ts;
        if (!parse_int(row.fields[3], r.duration)) {
            reject("bad duration '" + row.fields[3] + "'");
            continue;
        }
        if (r.duration < 0) {
            reject("negative duration");
            continue;
        }
        if (!detail::parse_count(row.fields[4], r.bytes_down) ||
            !detail::parse_count(row.fields[5], r.bytes_up)) {
            reject("bad byte counts");
            continue;
        }
        out.records.push_back(std::move(r));
        out.line_nos.push_back(row.line_no);
    }
    return out;
}

inline ParsedLog<AssociationRecord> parse_association_log(const std::string& path) {
    return parse_association_log_text(read_file(path));
}

inline ParsedLog<QueryRecord> parse_query_log_text(std::string_view content) {
    ParsedLog<QueryRecord> out;
    for (auto& row : detail::rows_after_header(content, kQueryHeader, "query log")) {
        auto reject = [&](std::string reason) { out.rejects.push_back({row.line_no, std::move(reason)}); };
        if (row.malformed) {
            reject("malformed quoting");
            continue;
        }
        if (row.fields.size() != 4) {
            reject("expected 4 fields, got " + std::to_string(row.fields.size()));
            continue;
        }
        QueryRecord q;
        q.device_id = row.fields[0];
        q.ap_id = row.fields[1];
        if (q.device_id.empty() || q.ap_id.empty()) {
            reject("empty device_id or ap_id");
            continue;
        }
        auto ts = Timestamp::parse(row.fields[2]);
        if (!ts) {
            reject("bad timestamp '" + row.fields[2] + "'");
            continue;
        }
        q.at = *ts;
        if (trim(row.fields[3]).empty()) {
            reject("empty query text");
            continue;
        }
        q.text = row.fields[3];
        out.records.push_back(std::move(q));
        out.line_nos.push_back(row.line_no);
    }
    return out;
}

inline ParsedLog<QueryRecord> parse_query_log(const std::string& path) {
    return parse_query_log_text(read_file(path));
}

inline std::string association_row(const AssociationRecord& r) {
    return csv::join({r.device_id, r.ap_id, r.start.to_string(), std::to_string(r.duration),
                      std::to_string(r.bytes_down), std::to_string(r.bytes_up)});
}

/// The query field is always quoted.
inline std::string query_row(const QueryRecord& q) {
    std::string text = "\"";
    for (char c : q.text) {
        if (c == '"') text.push_back('"');
        text.push_back(c);
    }
    text.push_back('"');
    return csv::join({q.device_id, q.ap_id, q.at.to_string()}) + "," + text;
}

inline std::string serialize_association_log(std::span<const AssociationRecord> records) {
    std::string out(kAssociationHeader);
    out += "\n";
    for (const auto& r : records) out += association_row(r) + "\n";
    return out;
}

inline std::string serialize_query_log(std::span<const QueryRecord> queries) {
    std::string out(kQueryHeader);
    out += "\n";
    for (const auto& q : queries) out += query_row(q) + "\n";
    return out;
}

// ---------------------------------------------------------------------------

struct SessionizeResult {
    std::vector<Trajectory> trajectories;  // sorted by (device_id, visit_start)
    std::vector<Reject> rejects;
    std::size_t discarded_visits = 0;      // every hop fell below the threshold
    std::size_t unattached_queries = 0;    // outside every visit span
};

struct SessionizeInput {
    std::span<const AssociationRecord> associations;
    std::span<const QueryRecord> queries;
    /// Optional source line numbers for reject reporting; ordinal+1 otherwise.
    std::span<const std::size_t> association_lines = {};
    std::span<const std::size_t> query_lines = {};
};

/// Splits each device's associations into visits, aggregates dwell per AP,
/// drops hops under the dwell threshold and attaches queries by time span.
///
/// A new visit starts when the next association begins more than
/// `session_gap` seconds after the latest end seen so far. Overlapping
/// association intervals are credited once, to the earlier association,
/// so the summed dwell never exceeds the visit span. Output is independent
/// of input order.
inline SessionizeResult sessionize(const SessionizeInput& in, const SessionizationConfig& cfg,
                                   const std::set<std::string>* known_aps = nullptr) {
    cfg.validate();
    SessionizeResult out;
    auto line_of = [](std::span<const std::size_t> lines, std::size_t i) {
        return i < lines.size() ? lines[i] : i + 1;
    };

    std::map<std::string, std::vector<const AssociationRecord*>> by_device;
    for (std::size_t i = 0; i < in.associations.size(); ++i) {
        const auto& r = in.associations[i];
        if (known_aps && !known_aps->count(r.ap_id)) {
            out.rejects.push_back({line_of(in.association_lines, i),
                                   "association references unknown ap '" + r.ap_id + "'"});
            continue;
        }
        by_device[r.device_id].push_back(&r);
    }

    struct Visit {
        Trajectory traj;
        Timestamp end;
        bool kept = false;
    };
    std::map<std::string, std::vector<Visit>> visits_by_device;

    for (auto& [device, recs] : by_device) {
        std::sort(recs.begin(), recs.end(), [](const AssociationRecord* a, const AssociationRecord* b) {
            return std::tie(a->start, a->ap_id, a->duration, a->bytes_down, a->bytes_up) <
                   std::tie(b->start, b->ap_id, b->duration, b->bytes_down, b->bytes_up);
        });
        auto& visits = visits_by_device[device];
        std::size_t i = 0;
        while (i < recs.size()) {
            Timestamp start = recs[i]->start;
            Timestamp covered = start;
            // ap -> (first seen order, dwell)
            std::map<std::string, std::pair<std::size_t, std::int64_t>> dwell;
            std::size_t order = 0;
            std::size_t j = i;
            for (; j < recs.size(); ++j) {
                const auto* r = recs[j];
                if (j > i && r->start - covered > cfg.session_gap) break;
                std::int64_t effective = std::max<std::int64_t>(0, r->end() - std::max(r->start, covered));
                covered = std::max(covered, r->end());
                if (!cfg.filter_on_aggregate && r->duration < cfg.dwell_threshold) continue;
                auto [it, inserted] = dwell.try_emplace(r->ap_id, order, 0);
                if (inserted) ++order;
                it->second.second += effective;
            }
            std::vector<std::pair<std::size_t, Hop>> ordered;
            for (const auto& [ap, od] : dwell)
                if (od.second >= cfg.dwell_threshold) ordered.push_back({od.first, Hop{ap, od.second}});
            std::sort(ordered.begin(), ordered.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            Visit v;
            v.traj.device_id = device;
            v.traj.visit_start = start;
            v.end = covered;
            for (auto& [_, hop] : ordered) v.traj.hops.push_back(std::move(hop));
            v.kept = !v.traj.hops.empty();
            if (!v.kept) ++out.discarded_visits;
            visits.push_back(std::move(v));
            i = j;
        }
    }

    std::vector<std::size_t> qidx(in.queries.size());
    for (std::size_t i = 0; i < qidx.size(); ++i) qidx[i] = i;
    std::sort(qidx.begin(), qidx.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = in.queries[a];
        const auto& y = in.queries[b];
        return std::tie(x.device_id, x.at, x.ap_id, x.text) < std::tie(y.device_id, y.at, y.ap_id, y.text);
    });
    for (std::size_t qi : qidx) {
        const auto& q = in.queries[qi];
        if (known_aps && !known_aps->count(q.ap_id)) {
            out.rejects.push_back({line_of(in.query_lines, qi), "query references unknown ap '" + q.ap_id + "'"});
            continue;
        }
        auto it = visits_by_device.find(q.device_id);
        bool attached = false;
        if (it != visits_by_device.end()) {
            for (auto& v : it->second) {
                if (q.at >= v.traj.visit_start && q.at <= v.end) {
                    if (v.kept) v.traj.queries.push_back(q);
                    attached = true;
                    break;
                }
            }
        }
        if (!attached) ++out.unattached_queries;
    }

    for (auto& [_, visits] : visits_by_device)
        for (auto& v : visits)
            if (v.kept) out.trajectories.push_back(std::move(v.traj));
    std::sort(out.trajectories.begin(), out.trajectories.end(), [](const Trajectory& a, const Trajectory& b) {
        return std::tie(a.device_id, a.visit_start) < std::tie(b.device_id, b.visit_start);
    });
    std::sort(out.rejects.begin(), out.rejects.end(),
              [](const Reject& a, const Reject& b) { return a.line_no < b.line_no; });
    return out;
}

/// complete = at least three hops, starting and ending at entry/exit APs.
inline Trajectory mark_complete(Trajectory t, const std::set<std::string>& entry_exit_aps) {
    t.complete = t.hops.size() >= 3 && entry_exit_aps.count(t.hops.front().ap_id) &&
                 entry_exit_aps.count(t.hops.back().ap_id);
    return t;
}

struct CdfPoint {
    std::int64_t duration_bound = 0;
    double cumulative_fraction = 0;
};

/// Empirical P(duration <= bound) at bound = bin_width, 2*bin_width, ...
/// up to the first multiple covering the longest association.
inline std::vector<CdfPoint> association_cdf(std::span<const AssociationRecord> records,
                                             std::int64_t bin_width) {
    if (bin_width <= 0) throw ValidationError("bin_width must be positive");
    if (records.empty()) return {};
    std::vector<std::int64_t> d;
    d.reserve(records.size());
    for (const auto& r : records) d.push_back(r.duration);
    std::sort(d.begin(), d.end());
    std::int64_t bins = std::max<std::int64_t>(1, (d.back() + bin_width - 1) / bin_width);
    std::vector<CdfPoint> out;
    out.reserve(static_cast<std::size_t>(bins));
    const double n = static_cast<double>(d.size());
    for (std::int64_t b = 1; b <= bins; ++b) {
        std::int64_t bound = b * bin_width;
        auto cnt = std::upper_bound(d.begin(), d.end(), bound) - d.begin();
        out.push_back({bound, static_cast<double>(cnt) / n});
    }
    out.back().cumulative_fraction = 1.0;
    return out;
}

inline std::string cdf_to_csv(const std::vector<CdfPoint>& cdf) {
    std::string out = "duration_bound_s,cumulative_fraction\n";
    for (const auto& p : cdf) out += std::to_string(p.duration_bound) + "," + format_double(p.cumulative_fraction) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory file (JSON lines)

inline json to_json(const Trajectory& t) {
    json hops = json::array();
    for (const auto& h : t.hops) hops.push_back({{"ap_id", h.ap_id}, {"dwell", h.dwell}});
    json queries = json::array();
    for (const auto& q : t.queries)
        queries.push_back({{"ap_id", q.ap_id}, {"ts", q.at.to_string()}, {"query", q.text}});
    return {{"id", t.id()},
            {"device_id", t.device_id},
            {"visit_start", t.visit_start.to_string()},
            {"complete", t.complete},
            {"hops", std::move(hops)},
            {"queries", std::move(queries)}};
}

inline Trajectory trajectory_from_json(const json& j) {
    try {
        Trajectory t;
        t.device_id = j.at("device_id").get<std::string>();
        auto ts = Timestamp::parse(j.at("visit_start").get<std::string>());
        if (!ts) throw ValidationError("trajectory: bad visit_start");
        t.visit_start = *ts;
        t.complete = j.at("complete").get<bool>();
        for (const auto& h : j.at("hops")) t.hops.push_back({h.at("ap_id").get<std::string>(), h.at("dwell").get<std::int64_t>()});
        for (const auto& q : j.at("queries")) {
            auto at = Timestamp::parse(q.at("ts").get<std::string>());
            if (!at) throw ValidationError("trajectory: bad query ts");
            t.queries.push_back({t.device_id, q.at("ap_id").get<std::string>(), *at, q.at("query").get<std::string>()});
        }
        return t;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("trajectory: ") + e.what());
    }
}

inline std::string serialize_trajectories(std::span<const Trajectory> ts) {
    std::string out;
    for (const auto& t : ts) out += to_json(t).dump() + "\n";
    return out;
}

inline std::vector<Trajectory> parse_trajectories(std::string_view text) {
    std::vector<Trajectory> out;
    std::size_t line_no = 0;
    for (const auto& line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ValidationError("trajectories: invalid JSON on line " + std::to_string(line_no));
        out.push_back(trajectory_from_json(j));
    }
    return out;
}

}  // namespace cpctx::ingest
