#pragma once

// Local knowledge-graph store, category expansion into term documents,
// gazetteer entity extraction and per-visit query contexts.

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cpctx/core.hpp"

namespace cpctx::semex {

/// Term multiset.
using TermBag = std::map<std::string, std::size_t>;

inline void merge_into(TermBag& into, const TermBag& from) {
    for (const auto& [t, c] : from) into[t] += c;
}

inline std::size_t total_count(const TermBag& bag) {
    std::size_t n = 0;
    for (const auto& [_, c] : bag) n += c;
    return n;
}

/// Lowercase, underscores to spaces, ASCII punctuation removed, whitespace
/// collapsed and trimmed. Bytes >= 0x80 pass through untouched.
inline std::string normalize_term(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char raw : s) {
        auto c = static_cast<unsigned char>(raw);
        if (c == '_' || std::isspace(c)) {
            pending_space = true;
            continue;
        }
        if (c < 0x80 && std::ispunct(c)) continue;
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : raw);
    }
    return out;
}

enum class Predicate { Subject, Broader, Label };

inline std::string_view to_string(Predicate p) {
    switch (p) {
        case Predicate::Subject: return "subject";
        case Predicate::Broader: return "broader";
        case Predicate::Label: return "label";
    }
    return "";
}

struct Triple {
    std::string subject;
    Predicate predicate = Predicate::Subject;
    std::string object;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Read-only after construction. `(x, Broader, y)` reads "y is a broader
/// category of x"; `(e, Subject, c)` puts resource e in category c.
class TripleStore {
public:
    TripleStore() = default;

    explicit TripleStore(std::span<const Triple> triples) {
        for (const auto& t : triples) add(t);
        finish();
    }

    std::size_t size() const { return triples_.size(); }
    const std::set<Triple>& triples() const { return triples_; }

    bool contains_node(const std::string& id) const { return nodes_.count(id) > 0; }

    const std::vector<std::string>& subjects_of(const std::string& entity) const { return lookup(subject_, entity); }
    const std::vector<std::string>& broader_of(const std::string& node) const { return lookup(broader_, node); }
    const std::vector<std::string>& narrower_of(const std::string& node) const { return lookup(narrower_, node); }

    /// Normalized label; falls back to the id's local name when the node has
    /// no Label triple ("kg:Category:Sportswear_brands" -> "sportswear brands").
    std::string label(const std::string& node) const {
        auto it = label_.find(node);
        if (it != label_.end()) return it->second;
        auto pos = node.find_last_of(":/");
        return normalize_term(pos == std::string::npos ? node : node.substr(pos + 1));
    }

    /// Nodes whose normalized label equals `normalized_label`, sorted by id.
    const std::vector<std::string>& nodes_with_label(const std::string& normalized_label) const {
        return lookup(label_index_, normalized_label);
    }

    std::size_t max_label_tokens() const { return max_label_tokens_; }

private:
    void add(const Triple& t) {
        if (!triples_.insert(t).second) return;
        nodes_.insert(t.subject);
        switch (t.predicate) {
            case Predicate::Subject:
                subject_[t.subject].push_back(t.object);
                nodes_.insert(t.object);
                break;
            case Predicate::Broader:
                broader_[t.subject].push_back(t.object);
                narrower_[t.object].push_back(t.subject);
                nodes_.insert(t.object);
                break;
            case Predicate::Label:
                // First label in set order wins; ordering is independent of input order.
                break;
        }
    }

    void finish() {
        for (const auto& t : triples_)
            if (t.predicate == Predicate::Label && !label_.count(t.subject)) label_[t.subject] = normalize_term(t.object);
        for (auto* m : {&subject_, &broader_, &narrower_})
            for (auto& [_, v] : *m) std::sort(v.begin(), v.end());
        for (const auto& [node, lbl] : label_) {
            if (lbl.empty()) continue;
            label_index_[lbl].push_back(node);
            max_label_tokens_ = std::max(max_label_tokens_,
                                         static_cast<std::size_t>(std::count(lbl.begin(), lbl.end(), ' ') + 1));
        }
        for (auto& [_, v] : label_index_) std::sort(v.begin(), v.end());
    }

    static const std::vector<std::string>& lookup(const std::map<std::string, std::vector<std::string>>& m,
                                                  const std::string& key) {
        static const std::vector<std::string> empty;
        auto it = m.find(key);
        return it == m.end() ? empty : it->second;
    }

    std::set<Triple> triples_;
    std::set<std::string> nodes_;
    std::map<std::string, std::vector<std::string>> subject_, broader_, narrower_, label_index_;
    std::map<std::string, std::string> label_;
    std::size_t max_label_tokens_ = 0;
};

struct Reject {
    std::size_t line_no = 0;
    std::string reason;
};

struct LoadResult {
    TripleStore store;
    std::vector<Reject> rejects;
};

/// Parses `subject \t predicate \t object` lines; '#' starts a comment line.
inline LoadResult parse_triples(std::string_view text) {
    std::vector<Triple> triples;
    LoadResult out;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || trim(line).front() == '#') continue;
        auto f = split(line, '\t');
        if (f.size() != 3) {
            out.rejects.push_back({line_no, "expected 3 tab-separated fields"});
            continue;
        }
        Triple t;
        t.subject = std::string(trim(f[0]));
        t.object = std::string(trim(f[2]));
        std::string pred(trim(f[1]));
        if (pred == "subject") t.predicate = Predicate::Subject;
        else if (pred == "broader") t.predicate = Predicate::Broader;
        else if (pred == "label") t.predicate = Predicate::Label;
        else {
            out.rejects.push_back({line_no, "unknown predicate '" + pred + "'"});
            continue;
        }
        if (t.subject.empty() || t.object.empty()) {
            out.rejects.push_back({line_no, "empty subject or object"});
            continue;
        }
        if (t.predicate == Predicate::Label && normalize_term(t.object).empty()) {
            out.rejects.push_back({line_no, "label normalizes to empty"});
            continue;
        }
        triples.push_back(std::move(t));
    }
    out.store = TripleStore(triples);
    return out;
}

inline LoadResult load_triples(const std::string& path) { return parse_triples(read_file(path)); }

inline std::string serialize_triples(const TripleStore& store) {
    std::string out;
    for (const auto& t : store.triples())
        out += t.subject + "\t" + std::string(to_string(t.predicate)) + "\t" + t.object + "\n";
    return out;
}

struct Expansion {
    TermBag terms;
    std::vector<std::string> warnings;
};

/// Depth-first walk from `root` down narrower links for up to `depth`
/// levels. Each node contributes its label once; a node reached again by a
/// shorter path is re-expanded so the result is exactly the nodes within
/// `depth` links of the root.
inline Expansion expand_category(const TripleStore& store, const std::string& root, int depth) {
    if (depth < 0) throw ValidationError("expansion depth must be >= 0");
    Expansion out;
    if (!store.contains_node(root)) {
        out.warnings.push_back("root '" + root + "' not in store");
        return out;
    }
    std::map<std::string, int> best;  // node -> shallowest depth reached
    std::vector<std::pair<std::string, int>> stack{{root, 0}};
    while (!stack.empty()) {
        auto [node, d] = std::move(stack.back());
        stack.pop_back();
        auto it = best.find(node);
        if (it != best.end() && it->second <= d) continue;
        if (it == best.end()) {
            ++out.terms[store.label(node)];
            best.emplace(node, d);
        } else {
            it->second = d;
        }
        if (d == depth) continue;
        const auto& kids = store.narrower_of(node);
        for (auto k = kids.rbegin(); k != kids.rend(); ++k) stack.push_back({*k, d + 1});
    }
    return out;
}

struct CategoryDocument {
    SemanticCategoryId category;
    TermBag terms;
};

/// One document per registered category. A root absent from the store is a
/// hard error.
inline std::vector<CategoryDocument> build_category_corpus(const TripleStore& store,
                                                           const std::vector<SemanticCategoryId>& registry,
                                                           int depth = 5) {
    if (registry.size() != kNumCategories)
        throw ValidationError("registry must hold exactly " + std::to_string(kNumCategories) + " categories");
    std::vector<CategoryDocument> docs;
    for (const auto& cat : registry) {
        if (!store.contains_node(cat.kg_root))
            throw ValidationError("kg root '" + cat.kg_root + "' for '" + cat.name + "' not in store");
        docs.push_back({cat, expand_category(store, cat.kg_root, depth).terms});
    }
    return docs;
}

inline json terms_to_json(const TermBag& bag) {
    json arr = json::array();
    for (const auto& [t, c] : bag) arr.push_back({{"term", t}, {"count", c}});
    return arr;
}

inline TermBag terms_from_json(const json& arr) {
    TermBag bag;
    for (const auto& e : arr) bag[normalize_term(e.at("term").get<std::string>())] += e.at("count").get<std::size_t>();
    return bag;
}

inline std::string serialize_corpus(const std::vector<CategoryDocument>& docs) {
    json arr = json::array();
    for (const auto& d : docs) arr.push_back({{"category", d.category.name}, {"terms", terms_to_json(d.terms)}});
    return arr.dump(1) + "\n";
}

/// Reads a corpus export; documents are placed in registry order.
inline std::vector<CategoryDocument> parse_corpus(std::string_view text) {
    json arr = json::parse(text, nullptr, false);
    if (arr.is_discarded() || !arr.is_array()) throw ValidationError("corpus: not a JSON array");
    std::vector<CategoryDocument> docs(kNumCategories);
    std::vector<bool> seen(kNumCategories, false);
    try {
        for (const auto& e : arr) {
            auto name = e.at("category").get<std::string>();
            auto slot = category_slot(name);
            if (!slot) throw ValidationError("corpus: unknown category '" + name + "'");
            docs[*slot] = {{static_cast<int>(*slot + 1), name, ""}, terms_from_json(e.at("terms"))};
            seen[*slot] = true;
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("corpus: ") + e.what());
    }
    for (std::size_t i = 0; i < kNumCategories; ++i)
        if (!seen[i]) throw ValidationError("corpus: missing category '" + std::string(kSemanticCategoryNames[i]) + "'");
    return docs;
}

/// Auxiliary named document (store names, crowdsourced keywords).
struct NamedDocument {
    std::string name;
    TermBag terms;
};

inline std::string serialize_named_document(const NamedDocument& d) {
    return json{{"name", d.name}, {"terms", terms_to_json(d.terms)}}.dump(1) + "\n";
}

inline NamedDocument parse_named_document(std::string_view text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError("document: not valid JSON");
    try {
        return {j.at("name").get<std::string>(), terms_from_json(j.at("terms"))};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("document: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Cyber context

/// Greedy left-to-right longest match of normalized query n-grams against
/// node labels. Unmatched tokens are dropped; a matched label yields every
/// node carrying it.
inline std::vector<std::string> extract_entities(const TripleStore& store, std::string_view query_text) {
    auto norm = normalize_term(query_text);
    std::vector<std::string> tokens = norm.empty() ? std::vector<std::string>{} : split(norm, ' ');
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t max_len = store.max_label_tokens();
    while (i < tokens.size()) {
        std::size_t matched = 0;
        for (std::size_t len = std::min(max_len, tokens.size() - i); len >= 1; --len) {
            std::string cand = tokens[i];
            for (std::size_t k = 1; k < len; ++k) cand += " " + tokens[i + k];
            const auto& nodes = store.nodes_with_label(cand);
            if (!nodes.empty()) {
                out.insert(out.end(), nodes.begin(), nodes.end());
                matched = len;
                break;
            }
        }
        i += matched ? matched : 1;
    }
    return out;
}

struct QueryContext {
    std::vector<std::string> entities;
    TermBag document;  // Q_c
};

/// Category labels of one entity: its Subject targets plus everything
/// reachable from them over at most `hops` Broader links, each node once.
inline TermBag entity_context(const TripleStore& store, const std::string& entity, int hops) {
    TermBag bag;
    std::map<std::string, int> best;
    std::vector<std::pair<std::string, int>> stack;
    const auto& subs = store.subjects_of(entity);
    for (auto it = subs.rbegin(); it != subs.rend(); ++it) stack.push_back({*it, 0});
    while (!stack.empty()) {
        auto [node, d] = std::move(stack.back());
        stack.pop_back();
        auto it = best.find(node);
        if (it != best.end() && it->second <= d) continue;
        if (it == best.end()) {
            ++bag[store.label(node)];
            best.emplace(node, d);
        } else {
            it->second = d;
        }
        if (d == hops) continue;
        const auto& up = store.broader_of(node);
        for (auto u = up.rbegin(); u != up.rend(); ++u) stack.push_back({*u, d + 1});
    }
    return bag;
}

/// Q_c for a visit: the multiset union of every entity's context over all
/// of the visit's queries.
inline QueryContext query_context(const TripleStore& store, std::span<const std::string> queries, int hops = 2) {
    if (hops < 0) throw ValidationError("query hops must be >= 0");
    QueryContext ctx;
    for (const auto& q : queries) {
        for (auto& e : extract_entities(store, q)) {
            merge_into(ctx.document, entity_context(store, e, hops));
            ctx.entities.push_back(std::move(e));
        }
    }
    return ctx;
}

}  // namespace cpctx::semex
