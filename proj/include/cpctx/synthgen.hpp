#pragma once

// Seeded generator for synthetic malls: floorplan, category map, knowledge
// graph, association/query logs and ground-truth intent labels.
//
// Layout: APs on a jittered grid per floor, joined by the Gabriel graph of
// each floor (a subgraph of the Voronoi neighbour graph) plus escalator
// links between floors. Contiguous runs of APs share a semantic theme so
// that categories form spatial clusters. AP popularity follows a Zipf law.
//
// Visits are walks over the AP graph. Intentful visitors favour APs
// labelled with their target category and query brands from that
// category's subtree; intentless visitors walk by popularity alone and
// issue tourist-style queries that match nothing in the graph.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cpctx/core.hpp"
#include "cpctx/csv.hpp"
#include "cpctx/ingest.hpp"
#include "cpctx/semex.hpp"
#include "cpctx/spatial.hpp"

namespace cpctx::synthgen {

using Rng = std::mt19937_64;

/// Sub-category counts per semantic category, registry order.
inline constexpr PerCategory<int> kCategoryTermCounts = {104, 48, 183, 74, 381, 173, 188, 292, 203,
                                                         91,  94, 174, 153, 229, 127, 214, 141, 123};

inline std::string kg_root_id(std::string_view category) {
    std::string id = "kg:Category:";
    for (char c : category) id.push_back(c == ' ' ? '_' : c);
    return id;
}

/// Operator categories folded onto the 18 semantic categories.
inline spatial::CategoryMap default_category_map() {
    spatial::CategoryMap m;
    m.mall_to_semantic = {
        {"Bakeries", "Bakeries"},
        {"Cafe", "Coffee"},
        {"Cosmetics", "Cosmetics"},
        {"Costume Jewellery", "Jewellery"},
        {"Delicatessen", "Food Retail"},
        {"Discount Cosmetics", "Cosmetics"},
        {"Fashion Accessories", "Fashion Accessories"},
        {"Fine Jewellery", "Jewellery"},
        {"General Footwear", "Footwear"},
        {"Gifts/Souvenirs", "Retail"},
        {"Groceries", "Food Retail"},
        {"Gymnasiums", "Sports"},
        {"Hair & Beauty", "Cosmetics"},
        {"Home Decor", "Decor"},
        {"Men's Fashion", "Clothing"},
        {"Mobile Phones & Accessories", "Mobile Phones"},
        {"Music/Videos/DVDs", "Consumer Electronics"},
        {"Newsagent/Stationery", "Retail"},
        {"Pad Sites", "Retail"},
        {"Repairs & Maintenance", "Retail"},
        {"Restaurant", "Restaurants"},
        {"Small/Major Appliances", "Home Appliances"},
        {"Sport", "Sports"},
        {"Takeaway", "Restaurants"},
        {"Travel", "Bags"},
        {"Unisex Fashion", "Fashion"},
        {"Watches", "Watches"},
        {"Women's Fashion", "Fashion"},
        {"Women's Footwear", "Footwear"},
    };
    for (auto name : kSemanticCategoryNames) m.semantic_roots[std::string(name)] = kg_root_id(name);
    return m;
}

// ---------------------------------------------------------------------------
// Vocabulary

/// Words used by filler and off-topic queries; generated names avoid them.
inline const std::vector<std::string>& reserved_words() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> w = {
            "reviews", "review", "sale", "price", "prices", "near", "me", "size", "chart", "opening", "hours",
            "best", "cheap", "discount", "online", "store", "new", "buy", "deals", "catalogue", "the",
            "flights", "to", "weather", "tomorrow", "hotels", "how", "get", "train", "timetable", "currency",
            "exchange", "rate", "bus", "route", "museum", "tickets", "ferry", "beach", "tours", "map", "of",
            "airport", "shuttle", "news", "today", "football", "scores", "translate", "english", "visa",
            "sydney", "melbourne", "brisbane", "perth", "harbour", "bridge", "opera", "house", "bondi",
            "manly", "darling", "zoo", "aquarium", "tower", "observatory", "in", "for", "and", "a"};
        for (auto name : kSemanticCategoryNames)
            for (const auto& t : split(semex::normalize_term(name), ' ')) w.push_back(t);
        std::sort(w.begin(), w.end());
        return w;
    }();
    return words;
}

/// Pronounceable nonsense words drawn from a fixed syllable inventory.
class NameGen {
public:
    explicit NameGen(Rng& rng) : rng_(rng) {
        for (const auto& w : reserved_words()) used_.insert(w);
    }

    /// A fresh single word never returned before.
    std::string word() {
        static constexpr std::array<std::string_view, 24> onset = {"b", "d",  "f",  "g",  "k",  "l",  "m",  "n",
                                                                   "p", "r",  "s",  "t",  "v",  "z",  "br", "dr",
                                                                   "kl", "tr", "st", "zh", "ph", "qu", "sk", "gl"};
        static constexpr std::array<std::string_view, 8> nucleus = {"a", "e", "i", "o", "u", "ai", "ou", "ei"};
        static constexpr std::array<std::string_view, 6> coda = {"", "", "n", "r", "x", "l"};
        std::uniform_int_distribution<int> syl(2, 3);
        for (;;) {
            std::string w;
            int n = syl(rng_);
            for (int i = 0; i < n; ++i) {
                w += onset[pick(onset.size())];
                w += nucleus[pick(nucleus.size())];
                if (i + 1 == n) w += coda[pick(coda.size())];
            }
            if (used_.insert(w).second) return w;
        }
    }

    /// One word, or two with probability `two_word_prob`.
    std::string name(double two_word_prob) {
        std::bernoulli_distribution two(two_word_prob);
        return two(rng_) ? word() + " " + word() : word();
    }

private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    Rng& rng_;
    std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// World: floorplan + knowledge graph

struct WorldConfig {
    std::size_t num_aps = 70;
    int floors = 6;
    std::size_t entry_exit_aps = 3;
    double spacing = 20.0;          // metres between grid APs
    double zipf_exponent = 1.0;
    double off_theme_shop_prob = 0.25;
    double four_shop_prob = 0.67;   // otherwise three shops per AP
    std::size_t brands_per_category = 25;
    double cross_link_prob = 0.05;
    int kg_depth = 5;

    void validate() const {
        if (floors < 1 || num_aps < static_cast<std::size_t>(floors) * 2) throw ValidationError("need at least 2 APs per floor");
        if (entry_exit_aps < 2) throw ValidationError("need at least 2 entry/exit APs");
        if (kg_depth < 1) throw ValidationError("kg depth must be >= 1");
    }
};

struct World {
    Floorplan floorplan;
    spatial::CategoryMap category_map;
    std::vector<semex::Triple> kg;
    semex::NamedDocument store_doc;
    semex::NamedDocument crowd_doc;
    std::map<std::string, double> popularity;  // Zipf weight per AP
    std::map<std::string, std::vector<std::string>> adjacency;
    PerCategory<std::vector<std::string>> brand_labels;  // entity labels per category
    std::map<std::string, std::size_t> theme;            // AP -> semantic slot
};

namespace detail {

inline double dist2(const Position& a, const Position& b) {
    return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
}

inline std::string ap_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "wap%03zu", i + 1);
    return buf;
}

struct KgBuild {
    std::vector<semex::Triple> triples;
    PerCategory<std::vector<std::string>> brand_labels;
    PerCategory<std::vector<std::vector<std::string>>> brand_subject_labels;
};

inline KgBuild build_kg(Rng& rng, NameGen& names, const WorldConfig& cfg) {
    using semex::Predicate;
    KgBuild kb;
    struct Node {
        std::string id;
        std::string label;
        int depth;
        std::size_t slot;
    };
    std::vector<std::vector<Node>> trees(kNumCategories);
    for (std::size_t s = 0; s < kNumCategories; ++s) {
        std::string cat(kSemanticCategoryNames[s]);
        std::string root = kg_root_id(cat);
        trees[s].push_back({root, cat, 0, s});
        kb.triples.push_back({root, Predicate::Label, cat});
        for (int i = 1; i < kCategoryTermCounts[s]; ++i) {
            const Node* parent = nullptr;
            while (!parent) {
                const auto& cand = trees[s][std::uniform_int_distribution<std::size_t>(0, trees[s].size() - 1)(rng)];
                if (cand.depth < cfg.kg_depth) parent = &cand;
            }
            Node n{root + "_" + std::to_string(i), names.name(0.2), parent->depth + 1, s};
            kb.triples.push_back({n.id, Predicate::Broader, parent->id});
            kb.triples.push_back({n.id, Predicate::Label, n.label});
            trees[s].push_back(std::move(n));
        }
    }
    std::bernoulli_distribution cross(cfg.cross_link_prob);
    for (std::size_t s = 0; s < kNumCategories; ++s)
        for (std::size_t i = 1; i < trees[s].size(); ++i) {
            if (!cross(rng)) continue;
            std::size_t other = std::uniform_int_distribution<std::size_t>(0, kNumCategories - 2)(rng);
            if (other >= s) ++other;
            const auto& tgt = trees[other][std::uniform_int_distribution<std::size_t>(0, trees[other].size() - 1)(rng)];
            if (tgt.depth + 1 <= cfg.kg_depth - 1) kb.triples.push_back({trees[s][i].id, Predicate::Broader, tgt.id});
        }
    std::bernoulli_distribution two_subjects(0.3);
    for (std::size_t s = 0; s < kNumCategories; ++s) {
        std::vector<const Node*> deep;
        for (const auto& n : trees[s])
            if (n.depth >= 2) deep.push_back(&n);
        if (deep.empty())
            for (const auto& n : trees[s])
                if (n.depth >= 1) deep.push_back(&n);
        for (std::size_t b = 0; b < cfg.brands_per_category; ++b) {
            std::string label = names.name(0.3);
            std::string id = "kg:Resource:";
            for (char c : label) id.push_back(c == ' ' ? '_' : c);
            kb.triples.push_back({id, Predicate::Label, label});
            std::vector<std::string> subject_labels;
            int k = two_subjects(rng) ? 2 : 1;
            for (int j = 0; j < k; ++j) {
                const Node* n = deep[std::uniform_int_distribution<std::size_t>(0, deep.size() - 1)(rng)];
                kb.triples.push_back({id, Predicate::Subject, n->id});
                subject_labels.push_back(n->label);
            }
            kb.brand_labels[s].push_back(label);
            kb.brand_subject_labels[s].push_back(std::move(subject_labels));
        }
    }
    return kb;
}

}  // namespace detail

inline World generate_world(std::uint64_t seed, const WorldConfig& cfg = {}) {
    cfg.validate();
    Rng rng(seed);
    NameGen names(rng);
    World w;
    w.category_map = default_category_map();

    auto kb = detail::build_kg(rng, names, cfg);
    w.kg = std::move(kb.triples);
    w.brand_labels = kb.brand_labels;

    // APs: floor-major, snake order within a floor so consecutive ids are neighbours.
    const std::size_t per_floor = cfg.num_aps / static_cast<std::size_t>(cfg.floors);
    const std::size_t extra = cfg.num_aps % static_cast<std::size_t>(cfg.floors);
    const std::size_t cols = 4;
    std::uniform_real_distribution<double> jitter(-0.2 * cfg.spacing, 0.2 * cfg.spacing);
    std::vector<std::vector<std::size_t>> floor_aps(static_cast<std::size_t>(cfg.floors));
    for (int f = 0; f < cfg.floors; ++f) {
        std::size_t count = per_floor + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t row = i / cols, col = i % cols;
            if (row % 2 == 1) col = cols - 1 - col;
            AccessPoint ap;
            ap.ap_id = detail::ap_name(w.floorplan.aps.size());
            ap.position = {static_cast<double>(col) * cfg.spacing + jitter(rng),
                           static_cast<double>(row) * cfg.spacing + jitter(rng), f};
            floor_aps[static_cast<std::size_t>(f)].push_back(w.floorplan.aps.size());
            w.floorplan.aps.push_back(std::move(ap));
        }
    }
    const auto& aps = w.floorplan.aps;
    for (const auto& ap : aps) w.adjacency[ap.ap_id];
    auto link = [&](std::size_t a, std::size_t b) {
        w.adjacency[aps[a].ap_id].push_back(aps[b].ap_id);
        w.adjacency[aps[b].ap_id].push_back(aps[a].ap_id);
    };
    for (const auto& fl : floor_aps)
        for (std::size_t i = 0; i < fl.size(); ++i)
            for (std::size_t j = i + 1; j < fl.size(); ++j) {
                double dij = detail::dist2(aps[fl[i]].position, aps[fl[j]].position);
                bool gabriel = true;
                for (std::size_t k = 0; k < fl.size() && gabriel; ++k)
                    if (k != i && k != j &&
                        detail::dist2(aps[fl[i]].position, aps[fl[k]].position) +
                                detail::dist2(aps[fl[j]].position, aps[fl[k]].position) <=
                            dij)
                        gabriel = false;
                if (gabriel) link(fl[i], fl[j]);
            }
    for (std::size_t f = 0; f + 1 < floor_aps.size(); ++f) {
        link(floor_aps[f].front(), floor_aps[f + 1].front());
        link(floor_aps[f].back(), floor_aps[f + 1].back());
    }
    for (auto& [_, v] : w.adjacency) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    // Entry/exit APs spread along the ground floor.
    const auto& ground = floor_aps.front();
    std::size_t n_entry = std::min(cfg.entry_exit_aps, ground.size());
    for (std::size_t e = 0; e < n_entry; ++e)
        w.floorplan.entry_exit_aps.push_back(aps[ground[e * (ground.size() - 1) / (n_entry - 1)]].ap_id);

    // Themes: contiguous runs over the AP order, one category per run.
    std::vector<std::size_t> slots(kNumCategories);
    for (std::size_t s = 0; s < kNumCategories; ++s) slots[s] = s;
    std::shuffle(slots.begin(), slots.end(), rng);
    for (std::size_t i = 0; i < aps.size(); ++i) w.theme[aps[i].ap_id] = slots[i * kNumCategories / aps.size()];

    // Zipf popularity over a random rank order.
    std::vector<std::size_t> rank(aps.size());
    for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
    std::shuffle(rank.begin(), rank.end(), rng);
    for (std::size_t r = 0; r < rank.size(); ++r)
        w.popularity[aps[rank[r]].ap_id] = 1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf_exponent);

    // Shops around each AP; most carry the AP's theme.
    std::map<std::string, std::vector<std::string>> operator_by_semantic;
    for (const auto& [op, sem] : w.category_map.mall_to_semantic) operator_by_semantic[sem].push_back(op);
    std::bernoulli_distribution four(cfg.four_shop_prob), off_theme(cfg.off_theme_shop_prob);
    std::uniform_real_distribution<double> radius(0.1 * cfg.spacing, 0.45 * cfg.spacing), angle(0, 2 * std::numbers::pi);
    std::vector<std::string> intended;
    semex::TermBag store_terms, crowd_terms;
    for (const auto& ap : aps) {
        int k = four(rng) ? 4 : 3;
        for (int i = 0; i < k; ++i) {
            std::string op;
            if (off_theme(rng)) {
                op = std::string(kOperatorCategories[std::uniform_int_distribution<std::size_t>(0, kOperatorCategories.size() - 1)(rng)]);
            } else {
                const auto& ops = operator_by_semantic.at(std::string(kSemanticCategoryNames[w.theme.at(ap.ap_id)]));
                op = ops[std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng)];
            }
            std::size_t sem = *category_slot(w.category_map.mall_to_semantic.at(op));
            std::size_t b = std::uniform_int_distribution<std::size_t>(0, kb.brand_labels[sem].size() - 1)(rng);
            Shop shop;
            char id[16];
            std::snprintf(id, sizeof(id), "shop%03zu", w.floorplan.shops.size() + 1);
            shop.shop_id = id;
            shop.name = kb.brand_labels[sem][b];
            shop.mall_category = op;
            double r = radius(rng), a = angle(rng);
            shop.frontage = {ap.position.x + r * std::cos(a), ap.position.y + r * std::sin(a), ap.position.floor};
            ++store_terms[semex::normalize_term(shop.name)];
            for (const auto& l : kb.brand_subject_labels[sem][b]) ++crowd_terms[semex::normalize_term(l)];
            w.floorplan.shops.push_back(std::move(shop));
            intended.push_back(ap.ap_id);
        }
    }
    auto nearest = spatial::voronoi_assign(w.floorplan.aps, w.floorplan.shops);
    for (std::size_t i = 0; i < w.floorplan.shops.size(); ++i) {
        const auto& sid = w.floorplan.shops[i].shop_id;
        if (nearest.shop_to_ap.at(sid) != intended[i]) w.floorplan.rectification_overrides.push_back({sid, intended[i]});
    }
    w.store_doc = {"store names", std::move(store_terms)};
    w.crowd_doc = {"crowdsourced keywords", std::move(crowd_terms)};
    return w;
}

// ---------------------------------------------------------------------------
// Visits

struct PersonaMix {
    double intentful = 48.0 / 176.0;
    double intentless = 128.0 / 176.0;

    void validate() const {
        if (intentful < 0 || intentless < 0 || std::fabs(intentful + intentless - 1.0) > 1e-9)
            throw ValidationError("persona mix must be non-negative and sum to 1");
    }
};

struct Persona {
    IntentLabel kind = IntentLabel::Intentless;
    std::optional<std::size_t> target;  // semantic slot, intentful only
    double dwell_bias = 0;
    double query_on_topic_prob = 0;
};

struct VisitConfig {
    double dwell_bias = 0.75;           // chance an intentful hop is drawn from target-labelled APs
    double query_on_topic_prob = 0.8;   // later intentful queries
    double entity_miss_prob = 0.1;      // on-topic query names a brand unknown to the graph
    double intentless_entity_prob = 0.05;
    double partial_prob = 0.3;          // visits that do not start and end at entry/exit APs
    double repeat_device_prob = 0.2;
    double dwell_median = 1200;         // seconds, log-normal
    double dwell_sigma = 0.5;
    std::int64_t min_dwell = 660;
    std::int64_t max_dwell = 3600;
    double target_dwell_boost = 1.6;
    double split_prob = 0.1;            // hop recorded as two associations
    double short_association_share = 0.3;
    double walk_scale = 2.0;            // graph-distance decay of the next-hop choice
    std::size_t max_body_hops = 5;
    std::int64_t first_day = 16495;     // 2015-03-01
    int days = 90;
};

struct LabelRecord {
    std::string trajectory_id;
    IntentLabel label = IntentLabel::Intentless;
};

struct Logs {
    std::vector<AssociationRecord> associations;
    std::vector<QueryRecord> queries;
    std::vector<LabelRecord> labels;
    std::vector<Persona> personas;  // parallel to labels
};

namespace detail {

inline std::map<std::string, int> bfs_dist(const World& w, const std::string& from) {
    std::map<std::string, int> d{{from, 0}};
    std::deque<std::string> q{from};
    while (!q.empty()) {
        auto cur = q.front();
        q.pop_front();
        for (const auto& n : w.adjacency.at(cur))
            if (!d.count(n)) {
                d[n] = d[cur] + 1;
                q.push_back(n);
            }
    }
    return d;
}

/// Shortest path excluding endpoints; neighbours visited in id order.
inline std::vector<std::string> path_between(const World& w, const std::string& a, const std::string& b) {
    std::map<std::string, std::string> prev;
    std::deque<std::string> q{a};
    prev[a] = a;
    while (!q.empty() && !prev.count(b)) {
        auto cur = q.front();
        q.pop_front();
        for (const auto& n : w.adjacency.at(cur))
            if (!prev.count(n)) {
                prev[n] = cur;
                q.push_back(n);
            }
    }
    std::vector<std::string> path;
    if (!prev.count(b)) return path;
    for (auto cur = prev[b]; cur != a; cur = prev[cur]) path.push_back(cur);
    std::reverse(path.begin(), path.end());
    return path;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

inline std::string off_topic_query(Rng& rng) {
    static const std::vector<std::string> places = {"sydney", "melbourne", "brisbane", "perth", "bondi", "manly"};
    static const std::vector<std::string> sights = {"opera house", "harbour bridge", "darling harbour", "zoo",
                                                    "aquarium", "tower", "observatory", "museum"};
    switch (std::uniform_int_distribution<int>(0, 7)(rng)) {
        case 0: return "cheap flights to " + pick(rng, places);
        case 1: return pick(rng, places) + " weather tomorrow";
        case 2: return "hotels near " + pick(rng, sights);
        case 3: return "how to get to " + pick(rng, sights);
        case 4: return "train timetable " + pick(rng, places);
        case 5: return pick(rng, sights) + ", opening hours";
        case 6: return "currency exchange rate";
        default: return pick(rng, sights) + " tickets";
    }
}

inline std::string on_topic_query(Rng& rng, const std::string& brand) {
    static const std::vector<std::string> filler = {"reviews", "sale", "price", "near me", "size chart",
                                                    "opening hours", "online store", "catalogue"};
    if (std::bernoulli_distribution(0.25)(rng)) return "best " + brand;
    return brand + " " + pick(rng, filler);
}

}  // namespace detail

/// Generates `n` visits. Persona counts are exact (round(mix * n) intentful)
/// and shuffled over visits.
inline Logs generate_logs(std::uint64_t seed, std::size_t n, const World& w, const PersonaMix& mix,
                          const VisitConfig& cfg = {}) {
    mix.validate();
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto labels = spatial::label_floorplan(w.floorplan, w.category_map);
    std::set<std::string> entry(w.floorplan.entry_exit_aps.begin(), w.floorplan.entry_exit_aps.end());

    PerCategory<std::vector<std::string>> target_aps;
    for (const auto& [ap, set] : labels)
        for (std::size_t s = 0; s < kNumCategories; ++s)
            if (set.test(s) && !entry.count(ap)) target_aps[s].push_back(ap);
    std::vector<std::size_t> viable_targets;
    for (std::size_t s = 0; s < kNumCategories; ++s)
        if (target_aps[s].size() >= 2) viable_targets.push_back(s);
    if (viable_targets.empty()) throw ValidationError("no category labels two or more APs");

    std::set<std::string> kg_labels;
    for (const auto& t : w.kg)
        if (t.predicate == semex::Predicate::Label) kg_labels.insert(semex::normalize_term(t.object));
    NameGen fake_brands(rng);

    std::vector<std::string> body_pool;
    for (const auto& ap : w.floorplan.aps)
        if (!entry.count(ap.ap_id)) body_pool.push_back(ap.ap_id);
    std::map<std::string, std::map<std::string, int>> dist;
    for (const auto& ap : w.floorplan.aps) dist[ap.ap_id] = detail::bfs_dist(w, ap.ap_id);

    std::size_t n_if = static_cast<std::size_t>(std::llround(mix.intentful * static_cast<double>(n)));
    std::vector<Persona> personas;
    for (std::size_t i = 0; i < n; ++i) {
        Persona p;
        if (i < n_if) {
            p.kind = IntentLabel::Intentful;
            p.target = detail::pick(rng, viable_targets);
            p.dwell_bias = cfg.dwell_bias;
            p.query_on_topic_prob = cfg.query_on_topic_prob;
        }
        personas.push_back(p);
    }
    std::shuffle(personas.begin(), personas.end(), rng);

    std::lognormal_distribution<double> dwell_dist(std::log(cfg.dwell_median), cfg.dwell_sigma);
    std::uniform_int_distribution<std::int64_t> short_dur(60, 540), entry_dur(cfg.min_dwell, 900);
    std::uniform_int_distribution<std::int64_t> bytes(1000, 5000000);
    std::bernoulli_distribution split(cfg.split_prob), partial(cfg.partial_prob), repeat(cfg.repeat_device_prob);
    std::uniform_int_distribution<std::int64_t> clock_start(9 * 3600, 18 * 3600);
    std::uniform_int_distribution<int> day_dist(0, cfg.days - 1);

    Logs out;
    std::map<std::size_t, std::set<int>> device_days;
    std::size_t next_device = 0;
    for (std::size_t v = 0; v < n; ++v) {
        const Persona& p = personas[v];
        const bool intentful = p.kind == IntentLabel::Intentful;

        std::size_t device = next_device;
        if (next_device > 0 && repeat(rng)) device = std::uniform_int_distribution<std::size_t>(0, next_device - 1)(rng);
        if (device == next_device) ++next_device;
        int day = day_dist(rng);
        if (device_days[device].size() >= static_cast<std::size_t>(cfg.days)) throw ValidationError("too few days for visits");
        while (device_days[device].count(day)) day = (day + 1) % cfg.days;
        device_days[device].insert(day);
        char dev[24];
        std::snprintf(dev, sizeof(dev), "dev%05zu", device + 1);

        // Hop sequence.
        const bool complete = !partial(rng);
        std::vector<std::string> hops;
        std::set<std::string> on_route;
        auto choose_next = [&](const std::string* cur, bool want_target) -> std::optional<std::string> {
            std::vector<std::string> cand;
            const auto& pool = want_target ? target_aps[*p.target] : body_pool;
            for (const auto& ap : pool)
                if (!on_route.count(ap)) cand.push_back(ap);
            if (cand.empty()) return std::nullopt;
            std::vector<double> weight;
            for (const auto& ap : cand) {
                double wgt = w.popularity.at(ap);
                if (cur) wgt *= std::exp(-dist.at(*cur).at(ap) / cfg.walk_scale);
                weight.push_back(wgt);
            }
            return cand[std::discrete_distribution<std::size_t>(weight.begin(), weight.end())(rng)];
        };
        if (complete) {
            hops.push_back(detail::pick(rng, w.floorplan.entry_exit_aps));
            on_route.insert(hops.back());
        }
        std::size_t body = std::uniform_int_distribution<std::size_t>(complete ? 1 : 2, cfg.max_body_hops)(rng);
        bool has_target = false;
        for (std::size_t b = 0; b < body; ++b) {
            bool want_target = intentful && (std::bernoulli_distribution(p.dwell_bias)(rng) || (!has_target && b + 1 == body));
            auto next = choose_next(hops.empty() ? nullptr : &hops.back(), want_target);
            if (!next) next = choose_next(hops.empty() ? nullptr : &hops.back(), false);
            if (!next) break;
            hops.push_back(*next);
            on_route.insert(*next);
            if (intentful && labels.at(*next).test(*p.target)) has_target = true;
        }
        if (complete) {
            std::vector<std::string> exits;
            for (const auto& e : w.floorplan.entry_exit_aps)
                if (!on_route.count(e)) exits.push_back(e);
            hops.push_back(detail::pick(rng, exits));
        }

        // Associations along the route.
        const Timestamp visit_start(static_cast<std::int64_t>(cfg.first_day + day) * 86400 + clock_start(rng));
        Timestamp clock = visit_start;
        std::vector<std::vector<std::pair<Timestamp, std::int64_t>>> spans(hops.size());
        std::set<std::string> hop_set(hops.begin(), hops.end()), passed;
        auto emit = [&](const std::string& ap, std::int64_t dur) {
            out.associations.push_back({dev, ap, clock, dur, bytes(rng), bytes(rng) / 4});
            clock = clock + dur;
        };
        // Short passing associations: aim for the configured share of all rows.
        std::size_t hop_rows = 0;
        std::vector<bool> split_hop(hops.size());
        for (std::size_t h = 0; h < hops.size(); ++h) hop_rows += 1 + (split_hop[h] = split(rng));
        double want = cfg.short_association_share / (1 - cfg.short_association_share) * static_cast<double>(hop_rows);
        std::size_t n_short = static_cast<std::size_t>(want);
        if (std::uniform_real_distribution<double>(0, 1)(rng) < want - static_cast<double>(n_short)) ++n_short;
        std::vector<std::size_t> short_per_gap(hops.size(), 0);
        for (std::size_t s = 0; s < n_short; ++s)
            ++short_per_gap[std::uniform_int_distribution<std::size_t>(0, hops.size() - 1)(rng)];

        for (std::size_t h = 0; h < hops.size(); ++h) {
            const bool edge = complete && (h == 0 || h + 1 == hops.size());
            std::int64_t dwell;
            if (edge) {
                dwell = entry_dur(rng);
            } else {
                double d = dwell_dist(rng);
                if (intentful && labels.at(hops[h]).test(*p.target)) d *= cfg.target_dwell_boost;
                dwell = std::clamp(static_cast<std::int64_t>(d), cfg.min_dwell, cfg.max_dwell);
            }
            if (split_hop[h] && dwell >= 2 * cfg.min_dwell) {
                std::int64_t first = dwell / 2;
                spans[h].push_back({clock, first});
                emit(hops[h], first);
                clock = clock + std::uniform_int_distribution<std::int64_t>(30, 120)(rng);
                spans[h].push_back({clock, dwell - first});
                emit(hops[h], dwell - first);
            } else {
                spans[h].push_back({clock, dwell});
                emit(hops[h], dwell);
            }
            // Passing associations on the way to the next hop (or around the last one).
            std::vector<std::string> cand;
            if (h + 1 < hops.size()) cand = detail::path_between(w, hops[h], hops[h + 1]);
            for (const auto& nb : w.adjacency.at(hops[h])) cand.push_back(nb);
            std::size_t emitted = 0;
            for (const auto& ap : cand) {
                if (emitted == short_per_gap[h]) break;
                if (hop_set.count(ap) || passed.count(ap)) continue;
                passed.insert(ap);
                emit(ap, short_dur(rng));
                ++emitted;
            }
        }

        // Queries.
        auto query_at_hop = [&](std::size_t h, std::string text) {
            const auto& [s, d] = detail::pick(rng, spans[h]);
            Timestamp at = s + std::uniform_int_distribution<std::int64_t>(0, d - 1)(rng);
            out.queries.push_back({dev, hops[h], at, std::move(text)});
        };
        auto brand_query = [&](std::size_t slot) {
            std::string brand = detail::pick(rng, w.brand_labels[slot]);
            if (std::bernoulli_distribution(cfg.entity_miss_prob)(rng)) {
                do brand = fake_brands.word();
                while (kg_labels.count(brand));
            }
            return detail::on_topic_query(rng, brand);
        };
        std::size_t nq = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
        if (intentful) {
            std::size_t first_target = hops.size();
            for (std::size_t h = 0; h < hops.size() && first_target == hops.size(); ++h)
                if (labels.at(hops[h]).test(*p.target)) first_target = h;
            if (first_target == hops.size()) first_target = complete ? 1 : 0;
            query_at_hop(first_target, brand_query(*p.target));
            for (std::size_t q = 1; q < nq; ++q) {
                std::size_t h = std::uniform_int_distribution<std::size_t>(first_target, hops.size() - 1)(rng);
                bool on = std::bernoulli_distribution(p.query_on_topic_prob)(rng);
                query_at_hop(h, on ? brand_query(*p.target) : detail::off_topic_query(rng));
            }
        } else {
            for (std::size_t q = 0; q < nq; ++q) {
                std::size_t h = std::uniform_int_distribution<std::size_t>(0, hops.size() - 1)(rng);
                std::string text = std::bernoulli_distribution(cfg.intentless_entity_prob)(rng)
                                       ? detail::on_topic_query(rng, detail::pick(rng, w.brand_labels[detail::pick(rng, viable_targets)]))
                                       : detail::off_topic_query(rng);
                query_at_hop(h, std::move(text));
            }
        }
        out.labels.push_back({std::string(dev) + "@" + visit_start.to_string(), p.kind});
        out.personas.push_back(p);
    }
    auto by_time = [](const auto& a, const auto& b) {
        return std::tie(a.start, a.device_id, a.ap_id) < std::tie(b.start, b.device_id, b.ap_id);
    };
    std::stable_sort(out.associations.begin(), out.associations.end(), by_time);
    std::stable_sort(out.queries.begin(), out.queries.end(), [](const auto& a, const auto& b) {
        return std::tie(a.at, a.device_id) < std::tie(b.at, b.device_id);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Labels file

inline std::string serialize_labels(std::span<const LabelRecord> labels) {
    std::string out = "trajectory_id,label\n";
    for (const auto& l : labels) out += csv::quote(l.trajectory_id) + "," + std::string(to_string(l.label)) + "\n";
    return out;
}

inline std::map<std::string, IntentLabel> parse_labels(std::string_view text) {
    auto rows = csv::parse(text);
    if (rows.empty() || rows.front().fields != std::vector<std::string>{"trajectory_id", "label"})
        throw ValidationError("labels: header must be trajectory_id,label");
    std::map<std::string, IntentLabel> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        auto l = f.size() == 2 ? parse_intent_label(f[1]) : std::nullopt;
        if (!l) throw ValidationError("labels: bad row on line " + std::to_string(rows[r].line_no));
        out[f[0]] = *l;
    }
    return out;
}

}  // namespace cpctx::synthgen
