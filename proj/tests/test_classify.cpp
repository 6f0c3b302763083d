#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "test_support.hpp"

using namespace cpctx;
using classify::ClassifierKind;
using classify::CvScheme;
using classify::Dataset;

namespace {

constexpr int IL = 0;
constexpr int IF = 1;

Dataset make(std::vector<std::vector<double>> rows, std::vector<int> labels) {
    Dataset d;
    for (std::size_t f = 0; f < rows.at(0).size(); ++f) d.feature_indices.push_back(f);
    d.rows = std::move(rows);
    d.labels = std::move(labels);
    return d;
}

/// Rows of `informative` + `noise` uniform features; label from `rule`.
template <typename Rule>
Dataset synthetic(std::mt19937_64& rng, std::size_t n, std::size_t noise, Rule rule) {
    std::uniform_real_distribution<double> u(0, 1);
    Dataset d;
    for (std::size_t f = 0; f < 2 + noise; ++f) d.feature_indices.push_back(f);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r;
        for (std::size_t f = 0; f < 2 + noise; ++f) r.push_back(u(rng));
        d.labels.push_back(rule(r[0], r[1]) ? IF : IL);
        d.rows.push_back(std::move(r));
    }
    return d;
}

std::vector<std::vector<int>> discretize(const Dataset& d, const classify::Discretizer& disc) {
    std::vector<std::vector<int>> x;
    for (const auto& r : d.rows) x.push_back(disc.transform(r));
    return x;
}

}  // namespace

// --- discretizer -----------------------------------------------------------------

TEST(Discretizer, EqualFrequencyOnDistinctValues) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-5, 5);
    for (std::size_t n : {10u, 23u, 50u, 176u}) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < n; ++i) rows.push_back({u(rng)});
        auto d = make(rows, std::vector<int>(n, IL));
        auto disc = classify::Discretizer::fit(d, 5);
        ASSERT_EQ(disc.arity(0), 5);
        std::vector<int> cnt(5, 0);
        for (const auto& r : rows) ++cnt[static_cast<std::size_t>(disc.bin(0, r[0]))];
        auto [lo, hi] = std::minmax_element(cnt.begin(), cnt.end());
        EXPECT_LE(*hi - *lo, 1) << "n=" << n;
    }
}

TEST(Discretizer, TiesNeverSplitAndEdgesIncrease) {
    auto d = make({{1}, {1}, {1}, {1}, {1}, {1}, {2}, {3}, {3}, {4}}, std::vector<int>(10, IL));
    auto disc = classify::Discretizer::fit(d, 5);
    const auto& e = disc.edges()[0];
    EXPECT_TRUE(std::is_sorted(e.begin(), e.end()));
    EXPECT_EQ(std::adjacent_find(e.begin(), e.end()), e.end());
    EXPECT_EQ(disc.bin(0, 1), 0);
    EXPECT_EQ(e.front(), 1.5);
    auto constant = make({{7}, {7}, {7}}, {IL, IF, IL});
    EXPECT_EQ(classify::Discretizer::fit(constant, 5).arity(0), 1);
    EXPECT_THROW(classify::Discretizer::fit(constant, 1), ValidationError);
}

// --- decision table ------------------------------------------------------------------

TEST(DecisionTable, PerfectSeparatorIsSelected) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        int y = i % 3 == 0 ? IF : IL;
        rows.push_back({u(rng), static_cast<double>(y), u(rng)});
        labels.push_back(y);
    }
    auto d = make(rows, labels);
    classify::SelectionTrace trace;
    auto m = classify::train_dt(d, {}, &trace);
    EXPECT_EQ(m.dt.schema, std::vector<std::size_t>{1});
    EXPECT_DOUBLE_EQ(trace.accepted_accuracies.back(), 1.0);
    auto ev = classify::evaluate_classifier(ClassifierKind::DecisionTable, d, CvScheme::parse("loo"));
    EXPECT_DOUBLE_EQ(ev.metrics.accuracy, 1.0);
}

TEST(DecisionTable, NoiseGivesEmptySchemaAndMajority) {
    // Every feature is constant, so no schema can beat the empty one.
    std::vector<std::vector<double>> rows(30, std::vector<double>{1.0, 2.0, 3.0});
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) labels.push_back(i < 20 ? IL : IF);
    auto d = make(rows, labels);
    auto m = classify::train_dt(d);
    EXPECT_TRUE(m.dt.schema.empty());
    for (const auto& r : d.rows) EXPECT_EQ(m.predict_row(r).label, IntentLabel::Intentless);
}

TEST(DecisionTable, UnseenTupleReturnsMajority) {
    auto d = make({{0}, {0}, {0}, {1}, {1}}, {IF, IF, IF, IL, IL});
    auto disc = classify::Discretizer(5, {{0.5, 1.5}});
    auto m = classify::assemble(d, disc, {0}, {});
    EXPECT_EQ(m.predict_row(std::vector<double>{1.0}).label, IntentLabel::Intentless);
    auto unseen = m.predict_row(std::vector<double>{9.0});
    EXPECT_EQ(unseen.label, IntentLabel::Intentful);
    EXPECT_NEAR(unseen.posterior[IF], 4.0 / 7.0, 1e-12);
}

TEST(DecisionTable, ForwardSelectionNeverDecreasesLoo) {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        auto d = synthetic(rng, 80, 5, [](double a, double b) { return a + 0.5 * b > 0.8; });
        classify::SelectionTrace trace;
        classify::train_dt(d, {}, &trace);
        for (std::size_t i = 1; i < trace.accepted_accuracies.size(); ++i)
            EXPECT_GT(trace.accepted_accuracies[i], trace.accepted_accuracies[i - 1]);
        classify::SelectionTrace ht;
        classify::train_dtnb(d, {}, &ht);
        for (std::size_t i = 1; i < ht.accepted_accuracies.size(); ++i)
            EXPECT_GT(ht.accepted_accuracies[i], ht.accepted_accuracies[i - 1]);
    }
}

// --- naive Bayes ---------------------------------------------------------------------

TEST(NaiveBayes, HandCountedPosterior) {
    // 8 IF rows at x=1, 2 IL rows at x=0. P(IF|x=1) = (9/12 * 9/10) / (9/12 * 9/10 + 3/12 * 1/4).
    auto d = make({{1}, {1}, {1}, {1}, {1}, {1}, {1}, {1}, {0}, {0}}, {IF, IF, IF, IF, IF, IF, IF, IF, IL, IL});
    auto m = classify::train_nb(d);
    auto p = m.predict_row(std::vector<double>{1.0}).posterior;
    EXPECT_NEAR(p[IF], 0.9152542372881356, 1e-12);
    EXPECT_GT(p[IF], 0.9);
}

TEST(NaiveBayes, UninformativeFeatureKeepsPriors) {
    auto d = make({{0}, {1}, {0}, {1}, {0}, {1}}, {IF, IF, IL, IL, IL, IL});
    auto m = classify::train_nb(d);
    for (double x : {0.0, 1.0}) {
        auto p = m.predict_row(std::vector<double>{x}).posterior;
        EXPECT_NEAR(p[IF], m.nb.priors[IF], 1e-12);
    }
}

TEST(NaiveBayes, UnseenBinHasNonzeroLikelihood) {
    auto d = make({{0}, {0}, {1}, {1}, {2}}, {IF, IF, IL, IL, IL});
    auto m = classify::train_nb(d);
    for (const auto& bins : m.nb.conditionals[0])
        for (double v : bins) EXPECT_GT(v, 0.0);
    auto p = m.predict_row(std::vector<double>{2.0}).posterior;
    EXPECT_GT(p[IF], 0.0);
    classify::SelectionTrace trace;
    classify::train_nb(make({{0}, {1}}, {IL, IL}), {}, &trace);
    EXPECT_EQ(trace.warnings.size(), 1u);
}

// --- DTNB ----------------------------------------------------------------------------

TEST(Dtnb, DegenerateSplitsMatchCountingOracles) {
    std::mt19937_64 rng(24);
    for (int rep = 0; rep < 20; ++rep) {
        auto d = synthetic(rng, 40, 3, [](double a, double b) { return a > b; });
        auto disc = classify::Discretizer::fit(d, 3);
        auto x = discretize(d, disc);
        std::vector<int> arity;
        for (std::size_t f = 0; f < d.num_features(); ++f) arity.push_back(disc.arity(f));
        std::vector<std::size_t> schema{0, 2}, nbf{1, 3, 4};
        auto dt_only = classify::assemble(d, disc, schema, {});
        auto nb_only = classify::assemble(d, disc, {}, nbf);
        for (const auto& q : x) {
            auto pd = dt_only.posterior_discrete(q);
            auto od = oracle::dt_posterior(x, d.labels, schema, q);
            auto pn = nb_only.posterior_discrete(q);
            auto on = oracle::nb_posterior(x, d.labels, nbf, arity, q);
            for (int c = 0; c < 2; ++c) {
                EXPECT_NEAR(pd[c], od[c], 1e-9);
                EXPECT_NEAR(pn[c], on[c], 1e-9);
            }
        }
    }
}

TEST(Dtnb, PriorsInPriorsOut) {
    // Empty schema and no NB features: both parts equal the prior.
    auto d = make({{0}, {1}, {2}, {3}}, {IF, IL, IL, IL});
    auto m = classify::assemble(d, classify::Discretizer::fit(d, 2), {}, {});
    auto p = m.posterior_discrete(std::vector<int>{0});
    EXPECT_NEAR(p[IF], m.nb.priors[IF], 1e-12);
    EXPECT_NEAR(p[IL], m.nb.priors[IL], 1e-12);
}

TEST(Dtnb, PureIntentfulCellWinsAgainstNeutralNb) {
    auto d = make({{0, 0}, {0, 1}, {0, 0}, {1, 1}, {1, 0}, {1, 1}, {1, 0}, {1, 1}},
                  {IF, IF, IF, IL, IL, IL, IL, IL});
    auto disc = classify::Discretizer(5, {{0.5}, {0.5}});
    auto m = classify::assemble(d, disc, {0}, {1});
    EXPECT_EQ(m.predict_row(std::vector<double>{0, 1}).label, IntentLabel::Intentful);
    EXPECT_EQ(m.predict_row(std::vector<double>{0, 0}).label, IntentLabel::Intentful);
}

TEST(Dtnb, SeparableSyntheticSetHighLooAccuracy) {
    std::mt19937_64 rng(25);
    auto d = synthetic(rng, 200, 4, [](double a, double b) { return a > 0.6 || b > 0.8; });
    auto ev = classify::evaluate_classifier(ClassifierKind::Dtnb, d, CvScheme::parse("loo"));
    EXPECT_GE(ev.metrics.accuracy, 0.9);
}

TEST(Dtnb, PosteriorsSumToOne) {
    std::mt19937_64 rng(26);
    for (int rep = 0; rep < 10; ++rep) {
        auto d = synthetic(rng, 60, 4, [](double a, double b) { return a * b > 0.2; });
        auto m = classify::train_dtnb(d);
        for (const auto& r : d.rows) {
            auto p = classify::predict_dtnb(m, [&] {
                          features::FeatureVector fv;
                          for (std::size_t f = 0; f < r.size(); ++f) fv.f[f] = r[f];
                          return fv;
                      }())
                         .posterior;
            EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
        }
    }
}

TEST(Dtnb, UnfittedModelThrows) {
    classify::DtnbModel m;
    m.feature_indices = {0, 1};
    EXPECT_THROW(m.predict_row(std::vector<double>{1, 2}), ValidationError);
}

TEST(Dtnb, ModelJsonRoundTrip) {
    std::mt19937_64 rng(27);
    auto d = synthetic(rng, 80, 3, [](double a, double b) { return a > 0.4 && b < 0.7; });
    auto m = classify::train_dtnb(d);
    auto text = classify::to_json(m).dump();
    auto back = classify::model_from_json(json::parse(text));
    EXPECT_EQ(classify::to_json(back).dump(), text);
    for (const auto& r : d.rows) {
        auto a = m.predict_row(r), b = back.predict_row(r);
        EXPECT_EQ(a.label, b.label);
        EXPECT_DOUBLE_EQ(a.posterior[1], b.posterior[1]);
    }
    EXPECT_THROW(classify::model_from_json(json::parse(R"({"feature_names":["G1"]})")), ValidationError);
}

// --- evaluation ------------------------------------------------------------------------

TEST(Metrics, PerfectPredictions) {
    std::vector<int> y{IF, IL, IL, IF};
    auto m = classify::compute_metrics(y, y);
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_EQ(m.weighted.precision, 1.0);
    EXPECT_EQ(m.weighted.recall, 1.0);
    EXPECT_EQ(m.weighted.f_score, 1.0);
}

TEST(Metrics, AllMajorityOnPaperSplit) {
    std::vector<int> y(176, IL);
    std::fill(y.begin(), y.begin() + 48, IF);
    std::vector<int> pred(176, IL);
    auto m = classify::compute_metrics(y, pred);
    EXPECT_NEAR(m.accuracy, 128.0 / 176.0, 1e-12);
    EXPECT_EQ(m.per_class[IF].recall, 0.0);
    EXPECT_EQ(m.per_class[IL].recall, 1.0);
    EXPECT_NEAR(m.per_class[IL].precision, 128.0 / 176.0, 1e-12);

    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 176; ++i) rows.push_back({static_cast<double>(i % 7)});
    auto ev = classify::evaluate_classifier(ClassifierKind::Majority, make(rows, y), CvScheme::parse("kfold:10"));
    EXPECT_NEAR(ev.metrics.accuracy, 128.0 / 176.0, 1e-12);
}

TEST(Metrics, RandomLabelsScoreNearPriorBaseline) {
    std::mt19937_64 rng(28);
    double total = 0;
    const int reps = 6;
    for (int rep = 0; rep < reps; ++rep) {
        auto d = synthetic(rng, 150, 3, [](double a, double) { return a > 0.3; });
        std::shuffle(d.labels.begin(), d.labels.end(), rng);
        total += classify::evaluate_classifier(ClassifierKind::Dtnb, d, {CvScheme::Kind::KFold, 10, 1}).metrics.accuracy;
    }
    EXPECT_NEAR(total / reps, 0.7, 0.1);
}

TEST(CrossValidation, SchemesAndErrors) {
    EXPECT_EQ(CvScheme::parse("kfold:5").folds, 5u);
    EXPECT_EQ(CvScheme::parse("loo").kind, CvScheme::Kind::Loo);
    EXPECT_THROW(CvScheme::parse("kfold:1"), ValidationError);
    EXPECT_THROW(CvScheme::parse("bootstrap"), ValidationError);
    auto d = make({{0}, {1}, {2}}, {IF, IL, IL});
    EXPECT_THROW(classify::evaluate_classifier(ClassifierKind::Dtnb, d, CvScheme::parse("kfold:4")), ValidationError);
    std::mt19937_64 rng(29);
    auto s = synthetic(rng, 50, 2, [](double a, double b) { return a > b; });
    CvScheme k{CvScheme::Kind::KFold, 5, 42};
    EXPECT_EQ(classify::evaluate_classifier(ClassifierKind::Dtnb, s, k).predictions,
              classify::evaluate_classifier(ClassifierKind::Dtnb, s, k).predictions);
}

// --- paired t test --------------------------------------------------------------------

TEST(PairedTTest, DegenerateInputsThrow) {
    std::vector<double> a{1, 2, 3}, b{2, 3, 4};
    EXPECT_THROW(classify::paired_t_test(a, a), ValidationError);
    EXPECT_THROW(classify::paired_t_test(a, b), ValidationError);
    EXPECT_THROW(classify::paired_t_test(std::vector<double>{1}, std::vector<double>{2}), ValidationError);
    EXPECT_THROW(classify::paired_t_test(a, std::vector<double>{1, 2}), ValidationError);
}

TEST(PairedTTest, MatchesSimpsonIntegration) {
    std::mt19937_64 rng(30);
    std::normal_distribution<double> noise(0, 1);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a, b;
        double shift = 0.3 * rep / 10.0;
        for (int i = 0; i < 12; ++i) {
            double base = noise(rng);
            a.push_back(base + shift + 0.5 * noise(rng));
            b.push_back(base);
        }
        auto r = classify::paired_t_test(a, b);
        EXPECT_EQ(r.df, 11);
        EXPECT_NEAR(r.t, oracle::paired_t_statistic(a, b), 1e-9);
        EXPECT_NEAR(r.p_two_tailed, oracle::t_two_tailed_p_simpson(r.t, r.df), 1e-6);
    }
}
