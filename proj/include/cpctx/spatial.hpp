#pragma once

// Voronoi coverage of APs, manual cell rectification and AP semantic labels.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpctx/core.hpp"

namespace cpctx::spatial {

/// Operator category -> semantic category, and semantic category -> KG root.
struct CategoryMap {
    std::map<std::string, std::string> mall_to_semantic;
    std::map<std::string, std::string> semantic_roots;

    /// Problems that make the map unusable: unknown semantic names, unmapped
    /// operator categories, roots missing for any of the 18 categories.
    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        for (const auto& [mall, sem] : mall_to_semantic)
            if (!category_slot(sem)) out.push_back("'" + mall + "' maps to unknown semantic category '" + sem + "'");
        for (auto op : kOperatorCategories)
            if (!mall_to_semantic.count(std::string(op)))
                out.push_back("operator category '" + std::string(op) + "' is not mapped");
        for (auto name : kSemanticCategoryNames)
            if (!semantic_roots.count(std::string(name)))
                out.push_back("semantic category '" + std::string(name) + "' has no kg root");
        for (const auto& [sem, _] : semantic_roots)
            if (!category_slot(sem)) out.push_back("unknown semantic category '" + sem + "' in roots");
        return out;
    }

    /// The 18 registered categories. Throws if any root is missing.
    std::vector<SemanticCategoryId> registry() const {
        std::vector<SemanticCategoryId> out;
        for (std::size_t i = 0; i < kNumCategories; ++i) {
            std::string name(kSemanticCategoryNames[i]);
            auto it = semantic_roots.find(name);
            if (it == semantic_roots.end()) throw ValidationError("no kg root for semantic category '" + name + "'");
            out.push_back({static_cast<int>(i + 1), name, it->second});
        }
        return out;
    }
};

inline json to_json(const CategoryMap& m) {
    return {{"mall_to_semantic", m.mall_to_semantic}, {"semantic_roots", m.semantic_roots}};
}

inline CategoryMap category_map_from_json(const json& j) {
    try {
        return {j.at("mall_to_semantic").get<std::map<std::string, std::string>>(),
                j.at("semantic_roots").get<std::map<std::string, std::string>>()};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("category map: ") + e.what());
    }
}

inline CategoryMap load_category_map(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw ValidationError("category map: not valid JSON");
    return category_map_from_json(j);
}

struct Assignment {
    std::map<std::string, std::string> shop_to_ap;
    std::vector<std::string> unassigned;  // shops on floors without an AP
};

/// Nearest AP on the same floor to each shop frontage, which is exactly
/// membership in the AP's Voronoi cell. Equal distances go to the
/// lexicographically smallest ap_id.
inline Assignment voronoi_assign(const std::vector<AccessPoint>& aps, const std::vector<Shop>& shops) {
    std::map<int, std::vector<const AccessPoint*>> by_floor;
    for (const auto& ap : aps) by_floor[ap.position.floor].push_back(&ap);
    Assignment out;
    for (const auto& shop : shops) {
        auto it = by_floor.find(shop.frontage.floor);
        if (it == by_floor.end()) {
            out.unassigned.push_back(shop.shop_id);
            continue;
        }
        const AccessPoint* best = nullptr;
        double best_d2 = 0;
        for (const auto* ap : it->second) {
            double dx = ap->position.x - shop.frontage.x;
            double dy = ap->position.y - shop.frontage.y;
            double d2 = dx * dx + dy * dy;
            if (!best || d2 < best_d2 || (d2 == best_d2 && ap->ap_id < best->ap_id)) {
                best = ap;
                best_d2 = d2;
            }
        }
        out.shop_to_ap[shop.shop_id] = best->ap_id;
    }
    return out;
}

/// Moves overridden shops to their configured AP. Unknown shop or AP ids
/// are a hard error.
inline Assignment apply_rectification(Assignment assignment, const std::vector<RectificationOverride>& overrides,
                                      const Floorplan& fp) {
    std::set<std::string> shops;
    for (const auto& s : fp.shops) shops.insert(s.shop_id);
    auto aps = fp.ap_ids();
    for (const auto& o : overrides) {
        if (!shops.count(o.shop_id)) throw ValidationError("override names unknown shop '" + o.shop_id + "'");
        if (!aps.count(o.ap_id)) throw ValidationError("override names unknown ap '" + o.ap_id + "'");
        assignment.shop_to_ap[o.shop_id] = o.ap_id;
        std::erase(assignment.unassigned, o.shop_id);
    }
    return assignment;
}

struct CellStats {
    std::size_t aps = 0;
    std::size_t nonempty_cells = 0;
    std::size_t assigned_shops = 0;
    double mean_shops_per_cell = 0;  // over non-empty cells
};

inline CellStats cell_stats(const Assignment& a, std::size_t ap_count) {
    std::map<std::string, std::size_t> per;
    for (const auto& [_, ap] : a.shop_to_ap) ++per[ap];
    CellStats s;
    s.aps = ap_count;
    s.nonempty_cells = per.size();
    s.assigned_shops = a.shop_to_ap.size();
    s.mean_shops_per_cell = per.empty() ? 0.0 : static_cast<double>(s.assigned_shops) / static_cast<double>(per.size());
    return s;
}

using ApLabels = std::map<std::string, CategorySet>;

/// P_a = union of semantic categories of the shops in a's cell. Every AP of
/// the floorplan appears; empty cells give an empty set.
inline ApLabels label_aps(const Floorplan& fp, const Assignment& assignment, const CategoryMap& map) {
    ApLabels out;
    for (const auto& ap : fp.aps) out[ap.ap_id];
    std::map<std::string, const Shop*> shops;
    for (const auto& s : fp.shops) shops[s.shop_id] = &s;
    for (const auto& [shop_id, ap_id] : assignment.shop_to_ap) {
        const Shop* shop = shops.at(shop_id);
        auto it = map.mall_to_semantic.find(shop->mall_category);
        if (it == map.mall_to_semantic.end())
            throw ValidationError("mall category '" + shop->mall_category + "' missing from category map");
        auto slot = category_slot(it->second);
        if (!slot) throw ValidationError("unknown semantic category '" + it->second + "'");
        out[ap_id].set(*slot);
    }
    return out;
}

/// Voronoi assignment, rectification from the floorplan, then labels.
inline ApLabels label_floorplan(const Floorplan& fp, const CategoryMap& map, Assignment* assignment_out = nullptr) {
    auto a = apply_rectification(voronoi_assign(fp.aps, fp.shops), fp.rectification_overrides, fp);
    auto labels = label_aps(fp, a, map);
    if (assignment_out) *assignment_out = std::move(a);
    return labels;
}

inline json ap_labels_to_json(const ApLabels& labels) {
    json j = json::object();
    for (const auto& [ap, set] : labels) j[ap] = category_names(set);
    return j;
}

inline ApLabels ap_labels_from_json(const json& j) {
    ApLabels out;
    try {
        for (const auto& [ap, names] : j.items()) {
            CategorySet set;
            for (const auto& n : names) {
                auto slot = category_slot(n.get<std::string>());
                if (!slot) throw ValidationError("ap labels: unknown category '" + n.get<std::string>() + "'");
                set.set(*slot);
            }
            out[ap] = set;
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("ap labels: ") + e.what());
    }
    return out;
}

}  // namespace cpctx::spatial
