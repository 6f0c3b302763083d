#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cpctx/util.hpp"

namespace cpctx {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

/// UTC instant at second resolution, stored as seconds since the Unix epoch.
/// Text form is `YYYY-MM-DDTHH:MM:SSZ`.
class Timestamp {
public:
    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t epoch_seconds) : secs_(epoch_seconds) {}

    constexpr std::int64_t epoch_seconds() const { return secs_; }

    static std::optional<Timestamp> parse(std::string_view s) {
        // 2013-03-01T10:00:00Z
        if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
            s[16] != ':' || s[19] != 'Z')
            return std::nullopt;
        int y = 0;
        unsigned mo = 0, d = 0, h = 0, mi = 0, se = 0;
        if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) ||
            !parse_int(s.substr(8, 2), d) || !parse_int(s.substr(11, 2), h) ||
            !parse_int(s.substr(14, 2), mi) || !parse_int(s.substr(17, 2), se))
            return std::nullopt;
        using namespace std::chrono;
        year_month_day ymd{year{y}, month{mo}, day{d}};
        if (!ymd.ok() || h > 23 || mi > 59 || se > 59) return std::nullopt;
        auto days = sys_days{ymd}.time_since_epoch().count();
        return Timestamp{static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + se};
    }

    std::string to_string() const {
        using namespace std::chrono;
        std::int64_t days = secs_ / 86400;
        std::int64_t rem = secs_ % 86400;
        if (rem < 0) {
            rem += 86400;
            --days;
        }
        year_month_day ymd{sys_days{std::chrono::days{days}}};
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()), int(rem / 3600),
                      int(rem % 3600 / 60), int(rem % 60));
        return buf;
    }

    friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
    friend constexpr Timestamp operator+(Timestamp t, std::int64_t s) { return Timestamp{t.secs_ + s}; }
    friend constexpr std::int64_t operator-(Timestamp a, Timestamp b) { return a.secs_ - b.secs_; }

private:
    std::int64_t secs_ = 0;
};

// ---------------------------------------------------------------------------
// Categories
// ---------------------------------------------------------------------------

inline constexpr std::size_t kNumCategories = 18;

/// The semantic categories, in registry order (index 1..18).
inline constexpr std::array<std::string_view, kNumCategories> kSemanticCategoryNames = {
    "Bags",        "Bakeries",      "Clothing",        "Coffee",        "Consumer Electronics",
    "Cosmetics",   "Decor",         "Fashion",         "Fashion Accessories",
    "Food Retail", "Footwear",      "Home Appliances", "Jewellery",     "Mobile Phones",
    "Restaurants", "Retail",        "Sports",          "Watches"};

/// Shop categories defined by the mall operator.
inline constexpr std::array<std::string_view, 29> kOperatorCategories = {
    "Bakeries",
    "Cafe",
    "Cosmetics",
    "Costume Jewellery",
    "Delicatessen",
    "Discount Cosmetics",
    "Fashion Accessories",
    "Fine Jewellery",
    "General Footwear",
    "Gifts/Souvenirs",
    "Groceries",
    "Gymnasiums",
    "Hair & Beauty",
    "Home Decor",
    "Men's Fashion",
    "Mobile Phones & Accessories",
    "Music/Videos/DVDs",
    "Newsagent/Stationery",
    "Pad Sites",
    "Repairs & Maintenance",
    "Restaurant",
    "Small/Major Appliances",
    "Sport",
    "Takeaway",
    "Travel",
    "Unisex Fashion",
    "Watches",
    "Women's Fashion",
    "Women's Footwear"};

/// 0-based registry slot of a semantic category name.
inline std::optional<std::size_t> category_slot(std::string_view name) {
    for (std::size_t i = 0; i < kNumCategories; ++i)
        if (kSemanticCategoryNames[i] == name) return i;
    return std::nullopt;
}

struct SemanticCategoryId {
    int index = 0;  // 1..18
    std::string name;
    std::string kg_root;

    std::size_t slot() const { return static_cast<std::size_t>(index - 1); }
};

/// P_a: the semantic categories attached to an AP. Bit i is category index i+1.
using CategorySet = std::bitset<kNumCategories>;

template <typename T>
using PerCategory = std::array<T, kNumCategories>;

inline std::vector<std::string> category_names(const CategorySet& set) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < kNumCategories; ++i)
        if (set.test(i)) out.emplace_back(kSemanticCategoryNames[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Deployment
// ---------------------------------------------------------------------------

struct Position {
    double x = 0;
    double y = 0;
    int floor = 0;

    friend bool operator==(const Position&, const Position&) = default;
};

struct AccessPoint {
    std::string ap_id;
    Position position;
    CategorySet labels;

    friend bool operator==(const AccessPoint&, const AccessPoint&) = default;
};

struct Shop {
    std::string shop_id;
    std::string name;
    std::string mall_category;
    Position frontage;

    friend bool operator==(const Shop&, const Shop&) = default;
};

struct RectificationOverride {
    std::string shop_id;
    std::string ap_id;

    friend bool operator==(const RectificationOverride&, const RectificationOverride&) = default;
};

struct Floorplan {
    std::vector<AccessPoint> aps;
    std::vector<Shop> shops;
    std::vector<std::string> entry_exit_aps;
    std::vector<RectificationOverride> rectification_overrides;

    const AccessPoint* find_ap(std::string_view id) const {
        for (const auto& ap : aps)
            if (ap.ap_id == id) return &ap;
        return nullptr;
    }

    std::set<std::string> ap_ids() const {
        std::set<std::string> ids;
        for (const auto& ap : aps) ids.insert(ap.ap_id);
        return ids;
    }

    friend bool operator==(const Floorplan&, const Floorplan&) = default;
};

inline json to_json(const Floorplan& fp) {
    json aps = json::array();
    for (const auto& ap : fp.aps)
        aps.push_back({{"id", ap.ap_id},
                       {"x", ap.position.x},
                       {"y", ap.position.y},
                       {"floor", ap.position.floor}});
    json shops = json::array();
    for (const auto& s : fp.shops)
        shops.push_back({{"id", s.shop_id},
                         {"name", s.name},
                         {"category", s.mall_category},
                         {"x", s.frontage.x},
                         {"y", s.frontage.y},
                         {"floor", s.frontage.floor}});
    json overrides = json::array();
    for (const auto& o : fp.rectification_overrides)
        overrides.push_back({{"shop_id", o.shop_id}, {"ap_id", o.ap_id}});
    json j = json::object();
    j["aps"] = std::move(aps);
    j["shops"] = std::move(shops);
    j["entry_exit_aps"] = fp.entry_exit_aps;
    j["rectification_overrides"] = std::move(overrides);
    return j;
}

/// Parses the floorplan file format. Structural problems throw
/// ValidationError; semantic problems are left to validate_deployment.
inline Floorplan floorplan_from_json(const json& j) {
    try {
        Floorplan fp;
        for (const auto& a : j.at("aps"))
            fp.aps.push_back({a.at("id").get<std::string>(),
                              {a.at("x").get<double>(), a.at("y").get<double>(),
                               a.at("floor").get<int>()},
                              {}});
        for (const auto& s : j.at("shops"))
            fp.shops.push_back({s.at("id").get<std::string>(), s.at("name").get<std::string>(),
                                s.at("category").get<std::string>(),
                                {s.at("x").get<double>(), s.at("y").get<double>(),
                                 s.at("floor").get<int>()}});
        fp.entry_exit_aps = j.at("entry_exit_aps").get<std::vector<std::string>>();
        if (j.contains("rectification_overrides"))
            for (const auto& o : j.at("rectification_overrides"))
                fp.rectification_overrides.push_back(
                    {o.at("shop_id").get<std::string>(), o.at("ap_id").get<std::string>()});
        return fp;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("floorplan: ") + e.what());
    }
}

inline std::string serialize_floorplan(const Floorplan& fp) { return to_json(fp).dump(2) + "\n"; }

inline Floorplan parse_floorplan(std::string_view text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError("floorplan: not valid JSON");
    return floorplan_from_json(j);
}

inline Floorplan load_floorplan(const std::string& path) { return parse_floorplan(read_file(path)); }

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Lists every invariant violation in a deployment; never throws.
inline ValidationReport validate_deployment(
    const Floorplan& fp,
    const std::vector<std::string>& operator_categories = {kOperatorCategories.begin(),
                                                           kOperatorCategories.end()}) {
    ValidationReport r;
    std::set<std::string> seen;
    std::set<int> floors;
    for (const auto& ap : fp.aps) {
        if (!seen.insert(ap.ap_id).second) r.violations.push_back("duplicate ap id '" + ap.ap_id + "'");
        if (ap.position.floor < 0)
            r.violations.push_back("ap '" + ap.ap_id + "' has negative floor");
        floors.insert(ap.position.floor);
    }
    std::set<std::string> cats(operator_categories.begin(), operator_categories.end());
    std::set<std::string> shop_ids;
    for (const auto& s : fp.shops) {
        if (!shop_ids.insert(s.shop_id).second)
            r.violations.push_back("duplicate shop id '" + s.shop_id + "'");
        if (!floors.count(s.frontage.floor))
            r.violations.push_back("shop '" + s.shop_id + "' is on floor " +
                                   std::to_string(s.frontage.floor) + " which has no AP");
        if (!cats.count(s.mall_category))
            r.violations.push_back("shop '" + s.shop_id + "' has unknown mall category '" +
                                   s.mall_category + "'");
    }
    if (fp.entry_exit_aps.empty()) r.violations.push_back("entry/exit AP set is empty");
    for (const auto& id : fp.entry_exit_aps)
        if (!seen.count(id)) r.violations.push_back("entry/exit AP '" + id + "' is not in the floorplan");
    for (const auto& o : fp.rectification_overrides) {
        if (!shop_ids.count(o.shop_id))
            r.violations.push_back("override names unknown shop '" + o.shop_id + "'");
        if (!seen.count(o.ap_id))
            r.violations.push_back("override names unknown ap '" + o.ap_id + "'");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Logs and visits
// ---------------------------------------------------------------------------

struct AssociationRecord {
    std::string device_id;
    std::string ap_id;
    Timestamp start;
    std::int64_t duration = 0;  // seconds
    std::int64_t bytes_down = 0;
    std::int64_t bytes_up = 0;

    Timestamp end() const { return start + duration; }

    friend bool operator==(const AssociationRecord&, const AssociationRecord&) = default;
};

struct QueryRecord {
    std::string device_id;
    std::string ap_id;
    Timestamp at;
    std::string text;

    friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

struct Hop {
    std::string ap_id;
    std::int64_t dwell = 0;  // seconds, aggregated over the visit

    friend bool operator==(const Hop&, const Hop&) = default;
};

enum class IntentLabel { Intentless = 0, Intentful = 1 };

inline std::string_view to_string(IntentLabel l) { return l == IntentLabel::Intentful ? "IF" : "IL"; }

inline std::optional<IntentLabel> parse_intent_label(std::string_view s) {
    if (s == "IF") return IntentLabel::Intentful;
    if (s == "IL") return IntentLabel::Intentless;
    return std::nullopt;
}

/// One visit: T = ((a_1,t_1),...,(a_n,t_n)) plus the queries issued during it.
struct Trajectory {
    std::string device_id;
    Timestamp visit_start;
    std::vector<Hop> hops;
    std::vector<QueryRecord> queries;
    bool complete = false;

    /// Stable identifier used by label files and reports.
    std::string id() const { return device_id + "@" + visit_start.to_string(); }

    std::int64_t total_dwell() const {
        std::int64_t s = 0;
        for (const auto& h : hops) s += h.dwell;
        return s;
    }

    /// Validating factory: hops non-empty, ap ids unique, every dwell at or
    /// above `dwell_threshold`.
    static Trajectory make(std::string device_id, Timestamp visit_start, std::vector<Hop> hops,
                           std::vector<QueryRecord> queries, std::int64_t dwell_threshold) {
        if (hops.empty()) throw ValidationError("trajectory has no hops");
        std::set<std::string> ids;
        for (const auto& h : hops) {
            if (!ids.insert(h.ap_id).second)
                throw ValidationError("trajectory repeats ap '" + h.ap_id + "'");
            if (h.dwell < dwell_threshold)
                throw ValidationError("hop at '" + h.ap_id + "' has dwell " + std::to_string(h.dwell) +
                                      "s below threshold " + std::to_string(dwell_threshold) + "s");
        }
        return Trajectory{std::move(device_id), visit_start, std::move(hops), std::move(queries), false};
    }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

}  // namespace cpctx
