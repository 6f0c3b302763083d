#pragma once

// Decision Table, Naive Bayes and the DTNB hybrid for intent recognition.
//
// Every trained model is a DtnbModel: a decision table over f_DT and a naive
// Bayes model over f_NB, combined as
//
//     P(l | f) = a * P_DT(l | f_DT) * P_NB(l | f_NB) / P(l)
//
// A plain decision table is the case f_NB = {}, plain naive Bayes is the
// case f_DT = {}. Continuous features are discretized with equal-frequency
// bins fitted on the training rows.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "cpctx/core.hpp"
#include "cpctx/features.hpp"

namespace cpctx::classify {

inline constexpr std::size_t kNumClasses = 2;  // index = IntentLabel value
using ClassVector = std::array<double, kNumClasses>;
using ClassCounts = std::array<int, kNumClasses>;

inline int class_index(IntentLabel l) { return static_cast<int>(l); }
inline IntentLabel class_label(int c) { return static_cast<IntentLabel>(c); }

struct Dataset {
    std::vector<std::size_t> feature_indices;  // columns, as 0-based F-indices
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;

    std::size_t size() const { return rows.size(); }
    std::size_t num_features() const { return feature_indices.size(); }
};

/// Labelled rows restricted to `feature_indices`; unlabelled rows skipped.
inline Dataset make_dataset(std::span<const features::FeatureVector> fvs, std::vector<std::size_t> feature_indices) {
    Dataset d;
    d.feature_indices = std::move(feature_indices);
    for (const auto& fv : fvs) {
        if (!fv.label) continue;
        std::vector<double> row;
        row.reserve(d.feature_indices.size());
        for (auto i : d.feature_indices) row.push_back(fv.f.at(i));
        d.rows.push_back(std::move(row));
        d.labels.push_back(class_index(*fv.label));
    }
    return d;
}

inline Dataset subset(const Dataset& d, std::span<const std::size_t> row_ids) {
    Dataset s;
    s.feature_indices = d.feature_indices;
    for (auto r : row_ids) {
        s.rows.push_back(d.rows[r]);
        s.labels.push_back(d.labels[r]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Discretization

/// Equal-frequency binning per feature. Cut points sit halfway between
/// adjacent distinct sorted values; a cut that would split a run of equal
/// values moves to the end of the run, so edges stay strictly increasing.
class Discretizer {
public:
    Discretizer() = default;
    Discretizer(int bins, std::vector<std::vector<double>> edges) : bins_(bins), edges_(std::move(edges)) {}

    static Discretizer fit(const Dataset& d, int bins) {
        if (bins < 2) throw ValidationError("discretizer needs at least 2 bins");
        std::vector<std::vector<double>> edges(d.num_features());
        const std::size_t n = d.size();
        for (std::size_t f = 0; f < d.num_features(); ++f) {
            std::vector<double> v;
            v.reserve(n);
            for (const auto& r : d.rows) v.push_back(r[f]);
            std::sort(v.begin(), v.end());
            std::size_t last_cut = 0;
            for (int b = 1; b < bins; ++b) {
                std::size_t p = static_cast<std::size_t>(b) * n / static_cast<std::size_t>(bins);
                if (p == 0 || p <= last_cut) continue;
                while (p < n && v[p] == v[p - 1]) ++p;
                if (p >= n) break;
                if (p <= last_cut) continue;
                edges[f].push_back(v[p - 1] + (v[p] - v[p - 1]) / 2);
                last_cut = p;
            }
        }
        return Discretizer(bins, std::move(edges));
    }

    int bins() const { return bins_; }
    const std::vector<std::vector<double>>& edges() const { return edges_; }
    std::size_t num_features() const { return edges_.size(); }
    int arity(std::size_t f) const { return static_cast<int>(edges_[f].size()) + 1; }

    int bin(std::size_t f, double v) const {
        const auto& e = edges_[f];
        return static_cast<int>(std::upper_bound(e.begin(), e.end(), v) - e.begin());
    }

    std::vector<int> transform(std::span<const double> row) const {
        std::vector<int> out(row.size());
        for (std::size_t f = 0; f < row.size(); ++f) out[f] = bin(f, row[f]);
        return out;
    }

private:
    int bins_ = 5;
    std::vector<std::vector<double>> edges_;
};

// ---------------------------------------------------------------------------
// Models

inline int argmax_with_default(const ClassVector& v, int tie_class) {
    int best = tie_class;
    for (int c = 0; c < static_cast<int>(kNumClasses); ++c)
        if (v[c] > v[best]) best = c;
    return best;
}

/// Majority class, ties to Intentless.
inline int majority_class(const ClassCounts& counts) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(kNumClasses); ++c)
        if (counts[c] > counts[best]) best = c;
    return best;
}

inline ClassVector smoothed(const ClassCounts& counts) {
    int n = std::accumulate(counts.begin(), counts.end(), 0);
    ClassVector p{};
    for (std::size_t c = 0; c < kNumClasses; ++c)
        p[c] = (counts[c] + 1.0) / (n + static_cast<double>(kNumClasses));
    return p;
}

/// Schema plus body of class counts per schema tuple. An empty schema puts
/// every instance into one cell.
struct DecisionTableModel {
    std::vector<std::size_t> schema;  // column positions in the dataset
    std::map<std::vector<int>, ClassCounts> body;
    ClassCounts class_counts{};
    int default_class = 0;

    std::vector<int> key(std::span<const int> discrete_row) const {
        std::vector<int> k;
        k.reserve(schema.size());
        for (auto f : schema) k.push_back(discrete_row[f]);
        return k;
    }

    /// Laplace-smoothed class distribution of the matching cell; the class
    /// prior when no instance matches.
    ClassVector posterior(std::span<const int> discrete_row) const {
        auto it = body.find(key(discrete_row));
        if (it == body.end()) return smoothed(class_counts);
        return smoothed(it->second);
    }

    int predict(std::span<const int> discrete_row) const {
        auto it = body.find(key(discrete_row));
        if (it == body.end()) return default_class;
        return argmax_with_default(smoothed(it->second), default_class);
    }
};

struct NaiveBayesModel {
    std::vector<std::size_t> features;             // column positions
    ClassVector priors{};                          // Laplace smoothed
    std::vector<std::vector<ClassVector>> conditionals;  // [feature][bin][class]

    /// p(l) * prod p(f_j | l), normalized.
    ClassVector posterior(std::span<const int> discrete_row) const {
        ClassVector lp{};
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            lp[c] = std::log(priors[c]);
            for (std::size_t j = 0; j < features.size(); ++j)
                lp[c] += std::log(conditionals[j][static_cast<std::size_t>(discrete_row[features[j]])][c]);
        }
        return normalize_log(lp);
    }

    static ClassVector normalize_log(const ClassVector& lp) {
        double m = *std::max_element(lp.begin(), lp.end());
        ClassVector p{};
        double z = 0;
        for (std::size_t c = 0; c < kNumClasses; ++c) z += (p[c] = std::exp(lp[c] - m));
        for (auto& v : p) v /= z;
        return p;
    }
};

/// Builds the decision table body for `schema` from discretized rows.
inline DecisionTableModel build_decision_table(const std::vector<std::vector<int>>& x, std::span<const int> y,
                                               std::vector<std::size_t> schema) {
    DecisionTableModel dt;
    dt.schema = std::move(schema);
    for (std::size_t i = 0; i < x.size(); ++i) {
        ++dt.class_counts[static_cast<std::size_t>(y[i])];
        ++dt.body[dt.key(x[i])][static_cast<std::size_t>(y[i])];
    }
    dt.default_class = majority_class(dt.class_counts);
    return dt;
}

/// Maximum-likelihood counts with Laplace alpha = 1.
inline NaiveBayesModel build_naive_bayes(const std::vector<std::vector<int>>& x, std::span<const int> y,
                                         const Discretizer& disc, std::vector<std::size_t> features) {
    NaiveBayesModel nb;
    nb.features = std::move(features);
    ClassCounts counts{};
    for (int l : y) ++counts[static_cast<std::size_t>(l)];
    nb.priors = smoothed(counts);
    for (auto f : nb.features) {
        int arity = disc.arity(f);
        std::vector<ClassCounts> cnt(static_cast<std::size_t>(arity), ClassCounts{});
        for (std::size_t i = 0; i < x.size(); ++i) ++cnt[static_cast<std::size_t>(x[i][f])][static_cast<std::size_t>(y[i])];
        std::vector<ClassVector> cond(static_cast<std::size_t>(arity));
        for (int v = 0; v < arity; ++v)
            for (std::size_t c = 0; c < kNumClasses; ++c)
                cond[static_cast<std::size_t>(v)][c] = (cnt[static_cast<std::size_t>(v)][c] + 1.0) / (counts[c] + static_cast<double>(arity));
        nb.conditionals.push_back(std::move(cond));
    }
    return nb;
}

struct DtnbModel {
    std::vector<std::size_t> feature_indices;  // dataset columns as F-indices
    Discretizer discretizer;
    DecisionTableModel dt;
    NaiveBayesModel nb;
    int tie_class = 0;  // training majority class

    struct Prediction {
        IntentLabel label;
        ClassVector posterior;
    };

    /// P(l|f) = a * P_DT(l|f_DT) * P_NB(l|f_NB) / P(l), computed in log space
    /// and normalized to sum to 1.
    ClassVector posterior_discrete(std::span<const int> xr) const {
        ClassVector pdt = dt.posterior(xr);
        ClassVector pnb = nb.posterior(xr);
        ClassVector lp{};
        for (std::size_t c = 0; c < kNumClasses; ++c)
            lp[c] = std::log(pdt[c]) + std::log(pnb[c]) - std::log(nb.priors[c]);
        return NaiveBayesModel::normalize_log(lp);
    }

    Prediction predict_row(std::span<const double> row) const {
        if (discretizer.num_features() != feature_indices.size())
            throw ValidationError("model is not fitted");
        auto xr = discretizer.transform(row);
        auto post = posterior_discrete(xr);
        return {class_label(argmax_with_default(post, tie_class)), post};
    }

    Prediction predict(const features::FeatureVector& fv) const {
        std::vector<double> row;
        row.reserve(feature_indices.size());
        for (auto i : feature_indices) row.push_back(fv.f.at(i));
        return predict_row(row);
    }
};

inline DtnbModel::Prediction predict_dtnb(const DtnbModel& model, const features::FeatureVector& fv) {
    return model.predict(fv);
}

/// Assembles a model with a fixed split of dataset columns.
inline DtnbModel assemble(const Dataset& d, const Discretizer& disc, std::vector<std::size_t> dt_schema,
                          std::vector<std::size_t> nb_features) {
    if (d.size() == 0) throw ValidationError("empty training set");
    std::vector<std::vector<int>> x;
    x.reserve(d.size());
    for (const auto& r : d.rows) x.push_back(disc.transform(r));
    DtnbModel m;
    m.feature_indices = d.feature_indices;
    m.discretizer = disc;
    m.dt = build_decision_table(x, d.labels, std::move(dt_schema));
    m.nb = build_naive_bayes(x, d.labels, disc, std::move(nb_features));
    m.tie_class = m.dt.default_class;
    return m;
}

// ---------------------------------------------------------------------------
// Leave-one-out evaluation of a (f_DT, f_NB) split on discretized data.

class LooEvaluator {
public:
    LooEvaluator(const Dataset& d, const Discretizer& disc) : y_(d.labels), disc_(disc) {
        x_.reserve(d.size());
        for (const auto& r : d.rows) x_.push_back(disc.transform(r));
        for (int l : y_) ++counts_[static_cast<std::size_t>(l)];
        majority_ = majority_class(counts_);
        const std::size_t nf = d.num_features();
        nb_counts_.resize(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            nb_counts_[f].assign(static_cast<std::size_t>(disc.arity(f)), ClassCounts{});
            for (std::size_t i = 0; i < x_.size(); ++i)
                ++nb_counts_[f][static_cast<std::size_t>(x_[i][f])][static_cast<std::size_t>(y_[i])];
        }
    }

    std::size_t size() const { return y_.size(); }

    /// log p(x_if | l) with row i held out.
    double nb_term(std::size_t i, std::size_t f, std::size_t c) const {
        int own = y_[i] == static_cast<int>(c) ? 1 : 0;
        double num = nb_counts_[f][static_cast<std::size_t>(x_[i][f])][c] - own + 1.0;
        double den = counts_[c] - own + static_cast<double>(disc_.arity(f));
        return std::log(num / den);
    }

    /// Per-row held-out NB log-likelihood sums for a feature set.
    std::vector<ClassVector> nb_cache(std::span<const std::size_t> nb_features) const {
        std::vector<ClassVector> cache(size(), ClassVector{});
        for (std::size_t i = 0; i < size(); ++i)
            for (auto f : nb_features)
                for (std::size_t c = 0; c < kNumClasses; ++c) cache[i][c] += nb_term(i, f, c);
        return cache;
    }

    /// Number of correct held-out predictions. `extra_nb` (if set) is added
    /// to the NB part on top of `cache`.
    int correct(std::span<const std::size_t> schema, const std::vector<ClassVector>& cache,
                std::optional<std::size_t> extra_nb = std::nullopt) const {
        std::unordered_map<std::string, ClassCounts> cells;
        std::vector<std::string> keys(size());
        for (std::size_t i = 0; i < size(); ++i) {
            std::string k;
            k.reserve(schema.size());
            for (auto f : schema) k.push_back(static_cast<char>(x_[i][f]));
            ++cells[k][static_cast<std::size_t>(y_[i])];
            keys[i] = std::move(k);
        }
        const double n = static_cast<double>(size());
        int ok = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            const auto& cell = cells[keys[i]];
            int cell_n = std::accumulate(cell.begin(), cell.end(), 0) - 1;
            ClassVector score{};
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                int own = y_[i] == static_cast<int>(c) ? 1 : 0;
                double pdt = cell_n > 0 ? (cell[c] - own + 1.0) / (cell_n + static_cast<double>(kNumClasses))
                                        : (counts_[c] - own + 1.0) / (n - 1 + static_cast<double>(kNumClasses));
                score[c] = std::log(pdt) + cache[i][c];
                if (extra_nb) score[c] += nb_term(i, *extra_nb, c);
            }
            if (argmax_with_default(score, majority_) == y_[i]) ++ok;
        }
        return ok;
    }

    double accuracy(std::span<const std::size_t> schema, std::span<const std::size_t> nb_features) const {
        return static_cast<double>(correct(schema, nb_cache(nb_features))) / static_cast<double>(size());
    }

private:
    std::vector<std::vector<int>> x_;
    std::vector<int> y_;
    const Discretizer& disc_;
    ClassCounts counts_{};
    int majority_ = 0;
    std::vector<std::vector<ClassCounts>> nb_counts_;
};

// ---------------------------------------------------------------------------
// Training

enum class ClassifierKind { DecisionTable, NaiveBayes, Dtnb, Majority };

inline std::optional<ClassifierKind> parse_classifier_kind(std::string_view s) {
    if (s == "dt") return ClassifierKind::DecisionTable;
    if (s == "nb") return ClassifierKind::NaiveBayes;
    if (s == "dtnb") return ClassifierKind::Dtnb;
    if (s == "majority") return ClassifierKind::Majority;
    return std::nullopt;
}

struct TrainOptions {
    int bins = 5;
};

struct SelectionTrace {
    std::vector<double> accepted_accuracies;  // LOO accuracy after each accepted step
    std::vector<std::string> warnings;
};

/// Forward selection of the decision-table schema, starting empty and
/// adding the feature with the best LOO accuracy while it strictly improves.
inline DtnbModel train_dt(const Dataset& d, const TrainOptions& opt = {}, SelectionTrace* trace = nullptr) {
    if (d.size() == 0) throw ValidationError("empty training set");
    auto disc = Discretizer::fit(d, opt.bins);
    LooEvaluator ev(d, disc);
    std::vector<ClassVector> no_nb(d.size(), ClassVector{});
    std::vector<std::size_t> schema;
    std::vector<bool> used(d.num_features(), false);
    int best = ev.correct(schema, no_nb);
    if (trace) trace->accepted_accuracies.push_back(best / static_cast<double>(d.size()));
    while (true) {
        int cand_best = -1;
        std::size_t cand_f = 0;
        for (std::size_t f = 0; f < d.num_features(); ++f) {
            if (used[f]) continue;
            auto s = schema;
            s.push_back(f);
            int c = ev.correct(s, no_nb);
            if (c > cand_best) {
                cand_best = c;
                cand_f = f;
            }
        }
        if (cand_best <= best) break;
        best = cand_best;
        schema.push_back(cand_f);
        used[cand_f] = true;
        if (trace) trace->accepted_accuracies.push_back(best / static_cast<double>(d.size()));
    }
    std::sort(schema.begin(), schema.end());
    return assemble(d, disc, schema, {});
}

inline DtnbModel train_nb(const Dataset& d, const TrainOptions& opt = {}, SelectionTrace* trace = nullptr) {
    if (d.size() == 0) throw ValidationError("empty training set");
    auto disc = Discretizer::fit(d, opt.bins);
    if (trace && std::adjacent_find(d.labels.begin(), d.labels.end(), std::not_equal_to<>()) == d.labels.end())
        trace->warnings.push_back("training data has a single class; model is degenerate");
    std::vector<std::size_t> all(d.num_features());
    std::iota(all.begin(), all.end(), 0);
    return assemble(d, disc, {}, all);
}

/// Majority-class baseline: a decision table with an empty schema.
inline DtnbModel train_majority(const Dataset& d, const TrainOptions& opt = {}) {
    auto disc = Discretizer::fit(d, opt.bins);
    return assemble(d, disc, {}, {});
}

/// Hybrid search: all features start in the decision table; each step
/// tries moving one of them to naive Bayes or dropping it, keeps the single
/// change with the best LOO accuracy, and stops when nothing strictly
/// improves. Ties go to the lowest feature, moves before drops.
inline DtnbModel train_dtnb(const Dataset& d, const TrainOptions& opt = {}, SelectionTrace* trace = nullptr) {
    if (d.size() == 0) throw ValidationError("empty training set");
    auto disc = Discretizer::fit(d, opt.bins);
    LooEvaluator ev(d, disc);
    std::vector<std::size_t> in_dt(d.num_features());
    std::iota(in_dt.begin(), in_dt.end(), 0);
    std::vector<std::size_t> in_nb;
    auto cache = ev.nb_cache(in_nb);
    int best = ev.correct(in_dt, cache);
    if (trace) trace->accepted_accuracies.push_back(best / static_cast<double>(d.size()));
    while (!in_dt.empty()) {
        int cand_best = -1;
        std::size_t cand_pos = 0;
        bool cand_move = false;
        for (std::size_t p = 0; p < in_dt.size(); ++p) {
            std::vector<std::size_t> schema;
            schema.reserve(in_dt.size() - 1);
            for (std::size_t q = 0; q < in_dt.size(); ++q)
                if (q != p) schema.push_back(in_dt[q]);
            int moved = ev.correct(schema, cache, in_dt[p]);
            if (moved > cand_best) {
                cand_best = moved;
                cand_pos = p;
                cand_move = true;
            }
            int dropped = ev.correct(schema, cache);
            if (dropped > cand_best) {
                cand_best = dropped;
                cand_pos = p;
                cand_move = false;
            }
        }
        if (cand_best <= best) break;
        best = cand_best;
        std::size_t f = in_dt[cand_pos];
        in_dt.erase(in_dt.begin() + static_cast<std::ptrdiff_t>(cand_pos));
        if (cand_move) {
            in_nb.push_back(f);
            for (std::size_t i = 0; i < d.size(); ++i)
                for (std::size_t c = 0; c < kNumClasses; ++c) cache[i][c] += ev.nb_term(i, f, c);
        }
        if (trace) trace->accepted_accuracies.push_back(best / static_cast<double>(d.size()));
    }
    std::sort(in_nb.begin(), in_nb.end());
    return assemble(d, disc, in_dt, in_nb);
}

inline DtnbModel train(ClassifierKind kind, const Dataset& d, const TrainOptions& opt = {},
                       SelectionTrace* trace = nullptr) {
    switch (kind) {
        case ClassifierKind::DecisionTable: return train_dt(d, opt, trace);
        case ClassifierKind::NaiveBayes: return train_nb(d, opt, trace);
        case ClassifierKind::Dtnb: return train_dtnb(d, opt, trace);
        case ClassifierKind::Majority: return train_majority(d, opt);
    }
    throw ValidationError("unknown classifier kind");
}

// ---------------------------------------------------------------------------
// Evaluation

struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f_score = 0;
    int support = 0;
};

struct Metrics {
    double accuracy = 0;
    std::array<ClassMetrics, kNumClasses> per_class{};
    ClassMetrics weighted;  // averages weighted by class support
    std::size_t n = 0;
};

inline Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) throw ValidationError("truth/prediction length mismatch");
    Metrics m;
    m.n = truth.size();
    if (m.n == 0) return m;
    std::array<std::array<int, kNumClasses>, kNumClasses> conf{};  // [truth][pred]
    int ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++conf[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
        ok += truth[i] == predicted[i];
    }
    m.accuracy = ok / static_cast<double>(m.n);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        int tp = conf[c][c];
        int pred_c = 0, true_c = 0;
        for (std::size_t k = 0; k < kNumClasses; ++k) {
            pred_c += conf[k][c];
            true_c += conf[c][k];
        }
        auto& cm = m.per_class[c];
        cm.support = true_c;
        cm.precision = pred_c ? tp / static_cast<double>(pred_c) : 0.0;
        cm.recall = true_c ? tp / static_cast<double>(true_c) : 0.0;
        cm.f_score = cm.precision + cm.recall > 0 ? 2 * cm.precision * cm.recall / (cm.precision + cm.recall) : 0.0;
        double w = true_c / static_cast<double>(m.n);
        m.weighted.precision += w * cm.precision;
        m.weighted.recall += w * cm.recall;
        m.weighted.f_score += w * cm.f_score;
        m.weighted.support += true_c;
    }
    return m;
}

struct CvScheme {
    enum class Kind { Loo, KFold } kind = Kind::KFold;
    std::size_t folds = 10;
    std::uint64_t seed = 0;  // fold shuffling

    static CvScheme parse(std::string_view s) {
        if (s == "loo") return {Kind::Loo, 0, 0};
        if (s.starts_with("kfold:")) {
            std::size_t k = 0;
            if (!parse_int(s.substr(6), k) || k < 2) throw ValidationError("bad fold count in '" + std::string(s) + "'");
            return {Kind::KFold, k, 0};
        }
        throw ValidationError("unknown cv scheme '" + std::string(s) + "' (expected loo or kfold:N)");
    }
};

struct Evaluation {
    Metrics metrics;
    std::vector<int> predictions;  // held-out prediction per row
};

/// Cross-validated metrics: each fold retrains from scratch (including the
/// discretizer and feature selection) on the remaining rows.
inline Evaluation evaluate_classifier(ClassifierKind kind, const Dataset& d, const CvScheme& scheme,
                                      const TrainOptions& opt = {}) {
    const std::size_t n = d.size();
    std::size_t k = scheme.kind == CvScheme::Kind::Loo ? n : scheme.folds;
    if (k > n) throw ValidationError("fold count exceeds number of rows");
    if (k < 2) throw ValidationError("cross-validation needs at least 2 folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (scheme.kind == CvScheme::Kind::KFold) std::shuffle(order.begin(), order.end(), std::mt19937_64(scheme.seed));
    std::vector<std::size_t> fold(n);
    for (std::size_t p = 0; p < n; ++p) fold[order[p]] = p % k;
    Evaluation ev;
    ev.predictions.assign(n, 0);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train_ids, test_ids;
        for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test_ids : train_ids).push_back(i);
        auto model = train(kind, subset(d, train_ids), opt);
        for (auto i : test_ids) ev.predictions[i] = class_index(model.predict_row(d.rows[i]).label);
    }
    ev.metrics = compute_metrics(d.labels, ev.predictions);
    return ev;
}

inline json to_json(const Metrics& m) {
    auto cm = [](const ClassMetrics& c) {
        return json{{"precision", c.precision}, {"recall", c.recall}, {"f_score", c.f_score}, {"support", c.support}};
    };
    json per = json::object();
    for (std::size_t c = 0; c < kNumClasses; ++c) per[std::string(to_string(class_label(static_cast<int>(c))))] = cm(m.per_class[c]);
    return {{"accuracy", m.accuracy}, {"n", m.n}, {"per_class", per}, {"weighted", cm(m.weighted)}};
}

// ---------------------------------------------------------------------------
// Statistics

struct TTestResult {
    double t = 0;
    double df = 0;
    double p_two_tailed = 1;
};

/// Paired-samples t test on a - b. Fewer than 2 pairs or zero variance of
/// the differences is reported as a ValidationError (degenerate test).
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("paired t test: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw ValidationError("paired t test: need at least 2 pairs");
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) ss += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
    double var = ss / static_cast<double>(n - 1);
    if (!(var > 0)) throw ValidationError("paired t test: differences have zero variance (degenerate)");
    TTestResult r;
    r.df = static_cast<double>(n - 1);
    r.t = mean / std::sqrt(var / static_cast<double>(n));
    boost::math::students_t dist(r.df);
    r.p_two_tailed = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
    return r;
}

// ---------------------------------------------------------------------------
// Model file

inline json to_json(const DtnbModel& m) {
    std::vector<std::string> names = features::feature_names(m.feature_indices);
    auto col_names = [&](const std::vector<std::size_t>& cols) {
        std::vector<std::string> out;
        for (auto c : cols) out.push_back(names.at(c));
        return out;
    };
    json body = json::array();
    for (const auto& [key, counts] : m.dt.body) body.push_back({{"key", key}, {"counts", counts}});
    json cond = json::array();
    for (const auto& f : m.nb.conditionals) {
        json bins = json::array();
        for (const auto& v : f) bins.push_back(v);
        cond.push_back(std::move(bins));
    }
    return {{"feature_names", names},
            {"discretizer", {{"bins", m.discretizer.bins()}, {"edges", m.discretizer.edges()}}},
            {"dt",
             {{"schema", col_names(m.dt.schema)},
              {"body", std::move(body)},
              {"class_counts", m.dt.class_counts},
              {"default", to_string(class_label(m.dt.default_class))}}},
            {"nb", {{"features", col_names(m.nb.features)}, {"priors", m.nb.priors}, {"conditionals", std::move(cond)}}}};
}

inline DtnbModel model_from_json(const json& j) {
    try {
        DtnbModel m;
        auto names = j.at("feature_names").get<std::vector<std::string>>();
        std::map<std::string, std::size_t> col;
        for (std::size_t c = 0; c < names.size(); ++c) {
            col[names[c]] = c;
            std::size_t fi = 0;
            if (names[c].size() < 2 || names[c][0] != 'F' || !parse_int(std::string_view(names[c]).substr(1), fi) || fi < 1 ||
                fi > features::kNumFeatures)
                throw ValidationError("model: bad feature name '" + names[c] + "'");
            m.feature_indices.push_back(fi - 1);
        }
        auto cols = [&](const json& arr) {
            std::vector<std::size_t> out;
            for (const auto& n : arr) out.push_back(col.at(n.get<std::string>()));
            return out;
        };
        m.discretizer = Discretizer(j.at("discretizer").at("bins").get<int>(),
                                    j.at("discretizer").at("edges").get<std::vector<std::vector<double>>>());
        const auto& dt = j.at("dt");
        m.dt.schema = cols(dt.at("schema"));
        for (const auto& e : dt.at("body")) m.dt.body[e.at("key").get<std::vector<int>>()] = e.at("counts").get<ClassCounts>();
        m.dt.class_counts = dt.at("class_counts").get<ClassCounts>();
        auto def = parse_intent_label(dt.at("default").get<std::string>());
        if (!def) throw ValidationError("model: bad default class");
        m.dt.default_class = class_index(*def);
        m.tie_class = m.dt.default_class;
        const auto& nb = j.at("nb");
        m.nb.features = cols(nb.at("features"));
        m.nb.priors = nb.at("priors").get<ClassVector>();
        for (const auto& f : nb.at("conditionals")) m.nb.conditionals.push_back(f.get<std::vector<ClassVector>>());
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model: ") + e.what());
    } catch (const std::out_of_range&) {
        throw ValidationError("model: schema references unknown feature");
    }
}

}  // namespace cpctx::classify
