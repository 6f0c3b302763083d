#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "test_support.hpp"

using namespace cpctx;
using locpred::Method;
using locpred::VisitMatrix;

namespace {

using Bits = std::vector<std::uint8_t>;

std::vector<std::string> ap_names(std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back("ap" + std::string(1, static_cast<char>('a' + i)));
    return v;
}

struct Instance {
    std::vector<std::string> aps;
    std::vector<oracle::Row> rows;
    oracle::Row prefix;
};

/// Random CF instance: up to 10 APs, up to 20 rows; row visit probability
/// is low enough to leave ties and empty overlaps.
Instance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> na(3, 10), nr(2, 20);
    Instance in;
    in.aps = ap_names(na(rng));
    std::bernoulli_distribution visit(0.35);
    std::uniform_int_distribution<std::size_t> pick(0, in.aps.size() - 1);
    std::size_t rows = nr(rng);
    for (std::size_t r = 0; r < rows; ++r) {
        oracle::Row row;
        for (const auto& ap : in.aps)
            if (visit(rng)) row.insert(ap);
        if (row.empty()) row.insert(in.aps[pick(rng)]);
        in.rows.push_back(row);
    }
    std::uniform_int_distribution<std::size_t> plen(1, std::max<std::size_t>(1, in.aps.size() / 2));
    std::size_t len = plen(rng);
    while (in.prefix.size() < len) in.prefix.insert(in.aps[pick(rng)]);
    return in;
}

VisitMatrix build(const Instance& in) {
    VisitMatrix m(in.aps);
    for (const auto& r : in.rows) m.add_row(std::vector<std::string>(r.begin(), r.end()));
    return m;
}

Trajectory traj(const std::string& dev, std::vector<std::string> aps, std::vector<std::string> query_aps = {}) {
    Trajectory t;
    t.device_id = dev;
    t.visit_start = Timestamp{1000};
    for (const auto& a : aps) t.hops.push_back({a, 600});
    std::int64_t at = 1000;
    for (const auto& q : query_aps) t.queries.push_back({dev, q, Timestamp{at += 10}, "q"});
    return t;
}

}  // namespace

// --- jaccard -------------------------------------------------------------------------

TEST(Jaccard, Examples) {
    Bits a{1, 1, 1, 0}, b{0, 1, 1, 1}, c{0, 0, 0, 1}, z{0, 0, 0, 0};
    EXPECT_EQ(locpred::jaccard(a, a), 1.0);
    EXPECT_EQ(locpred::jaccard(a, c), 0.0);
    EXPECT_EQ(locpred::jaccard(a, b), 0.5);
    EXPECT_EQ(locpred::jaccard(z, z), 0.0);
    EXPECT_THROW(locpred::jaccard(a, Bits{1, 0}), ValidationError);
}

TEST(Jaccard, SymmetricAndMatchesSetOracle) {
    std::mt19937_64 rng(31);
    std::bernoulli_distribution bit(0.4);
    for (int rep = 0; rep < 500; ++rep) {
        Bits u(12), v(12);
        oracle::Row su, sv;
        for (std::size_t i = 0; i < 12; ++i) {
            u[i] = bit(rng);
            v[i] = bit(rng);
            if (u[i]) su.insert(std::to_string(i));
            if (v[i]) sv.insert(std::to_string(i));
        }
        EXPECT_EQ(locpred::jaccard(u, v), locpred::jaccard(v, u));
        EXPECT_DOUBLE_EQ(locpred::jaccard(u, v), boost::rational_cast<double>(oracle::set_jaccard(su, sv)));
        if (!su.empty()) {
            EXPECT_EQ(locpred::jaccard(u, u), 1.0);
        }
    }
}

// --- matrix --------------------------------------------------------------------------

TEST(VisitMatrix, RejectsEmptyRowsAndUnknownAps) {
    VisitMatrix m({"b", "a", "a"});
    EXPECT_EQ(m.num_columns(), 2u);
    EXPECT_EQ(m.ap_ids().front(), "a");
    EXPECT_THROW(m.add_row(std::vector<std::string>{}), ValidationError);
    EXPECT_THROW(m.add_row(std::vector<std::string>{"zz"}), ValidationError);
}

// --- item-item -----------------------------------------------------------------------

TEST(ItemItem, CoVisitedEverywhereScoresOneNeverScoresZero) {
    VisitMatrix m({"a", "b", "c", "d"});
    m.add_row(std::vector<std::string>{"a", "b", "c"});
    m.add_row(std::vector<std::string>{"a", "b", "c"});
    m.add_row(std::vector<std::string>{"d"});
    std::vector<std::string> prefix{"a", "b"};
    auto s = locpred::item_item_scores(m, prefix);
    EXPECT_EQ(s.size(), 2u);
    EXPECT_EQ(s["c"], 1.0);
    EXPECT_EQ(s["d"], 0.0);
    EXPECT_TRUE(locpred::item_item_scores(m, std::vector<std::string>{}).at("a") == 0.0);
}

TEST(ItemItem, FiveApSixTrajectoryFixture) {
    Instance in{ap_names(5),
                {{"apa", "apb"}, {"apa", "apc", "apd"}, {"apb", "apc"}, {"apb", "apd", "ape"}, {"apa", "apb", "ape"}, {"apc"}},
                {"apa", "apb"}};
    auto m = build(in);
    std::vector<std::string> prefix(in.prefix.begin(), in.prefix.end());
    auto got = locpred::item_item_scores(m, prefix);
    auto want = oracle::item_item(in.rows, in.aps, in.prefix);
    ASSERT_EQ(got.size(), want.size());
    for (const auto& [ap, q] : want) EXPECT_NEAR(got.at(ap), boost::rational_cast<double>(q), 1e-15) << ap;
    // apc: a-col {1,2,5} vs c-col {2,3,6}: 1/5; b-col {1,3,4,5} vs c: 1/6.
    EXPECT_NEAR(got.at("apc"), (1.0 / 5 + 1.0 / 6) / 2, 1e-15);
}

TEST(ItemItem, RandomInstancesMatchExactOracle) {
    std::mt19937_64 rng(32);
    for (int rep = 0; rep < 200; ++rep) {
        auto in = random_instance(rng);
        auto m = build(in);
        std::vector<std::string> prefix(in.prefix.begin(), in.prefix.end());
        auto got = locpred::item_item_scores(m, prefix);
        auto want = oracle::item_item(in.rows, in.aps, in.prefix);
        for (const auto& [ap, q] : want) ASSERT_NEAR(got.at(ap), boost::rational_cast<double>(q), 1e-12);
        for (std::size_t k : {1u, 3u, 20u}) EXPECT_EQ(locpred::top_k(got, k), oracle::exhaustive_top_k(want, k));
    }
}

TEST(ItemItem, InvariantUnderRowPermutation) {
    std::mt19937_64 rng(33);
    for (int rep = 0; rep < 50; ++rep) {
        auto in = random_instance(rng);
        std::vector<std::string> prefix(in.prefix.begin(), in.prefix.end());
        auto base = locpred::item_item_scores(build(in), prefix);
        std::shuffle(in.rows.begin(), in.rows.end(), rng);
        auto shuffled = locpred::item_item_scores(build(in), prefix);
        EXPECT_EQ(locpred::rank_all(base), locpred::rank_all(shuffled));
        for (const auto& [ap, s] : base) EXPECT_DOUBLE_EQ(s, shuffled.at(ap));
    }
}

// --- user-user -----------------------------------------------------------------------

TEST(UserUser, IdenticalNeighborPromotesItsExtraAp) {
    VisitMatrix m({"a", "b", "c", "d", "e"});
    m.add_row(std::vector<std::string>{"a", "b", "c"});
    m.add_row(std::vector<std::string>{"d", "e"});
    m.add_row(std::vector<std::string>{"a", "e"});
    auto s = locpred::user_user_scores(m, std::vector<std::string>{"a", "b"}, 1);
    EXPECT_EQ(locpred::top_k(s, 1), std::vector<std::string>{"c"});
    EXPECT_THROW(locpred::user_user_scores(m, std::vector<std::string>{"a"}, 0), ValidationError);
}

TEST(UserUser, NoOverlapGivesZeros) {
    VisitMatrix m({"a", "b", "c"});
    m.add_row(std::vector<std::string>{"b"});
    m.add_row(std::vector<std::string>{"c"});
    for (const auto& [_, v] : locpred::user_user_scores(m, std::vector<std::string>{"a"}, 5)) EXPECT_EQ(v, 0.0);
}

TEST(UserUser, TenRowFixture) {
    Instance in{ap_names(6),
                {{"apa", "apb"}, {"apa", "apc"}, {"apb", "apc", "apd"}, {"apa", "apb", "ape"}, {"apf"},
                 {"apa", "apd"}, {"apb", "ape", "apf"}, {"apa", "apb", "apc", "apd"}, {"apc", "ape"}, {"apa", "apf"}},
                {"apa", "apb"}};
    auto m = build(in);
    std::vector<std::string> prefix(in.prefix.begin(), in.prefix.end());
    for (std::size_t k : {1u, 3u, 4u, 10u}) {
        auto got = locpred::user_user_scores(m, prefix, k);
        auto want = oracle::user_user(in.rows, in.aps, in.prefix, k);
        for (const auto& [ap, q] : want) EXPECT_NEAR(got.at(ap), boost::rational_cast<double>(q), 1e-15) << k << ap;
    }
}

TEST(UserUser, RandomInstancesMatchExhaustiveNeighborOracle) {
    std::mt19937_64 rng(34);
    std::uniform_int_distribution<std::size_t> kk(1, 8);
    for (int rep = 0; rep < 200; ++rep) {
        auto in = random_instance(rng);
        auto m = build(in);
        std::vector<std::string> prefix(in.prefix.begin(), in.prefix.end());
        std::size_t k = kk(rng);
        long long ex = rep % 3 == 0 ? 0 : -1;
        auto got = ex < 0 ? locpred::user_user_scores(m, prefix, k) : locpred::user_user_scores(m, prefix, k, 0);
        auto want = oracle::user_user(in.rows, in.aps, in.prefix, k, ex);
        for (const auto& [ap, q] : want) ASSERT_NEAR(got.at(ap), boost::rational_cast<double>(q), 1e-12);
        EXPECT_EQ(locpred::top_k(got, 10), oracle::exhaustive_top_k(want, 10));
    }
}

// --- weighting and ranking --------------------------------------------------------------

TEST(Weighted, Examples) {
    locpred::Scores js{{"a", 0.4}, {"b", 0.9}, {"c", 0.2}};
    EXPECT_EQ(locpred::weighted_scores(js, {{"a", 1}, {"b", 1}, {"c", 1}}), js);
    auto w = locpred::weighted_scores(js, {{"a", 0.3}, {"b", 0.0}});
    EXPECT_NEAR(w["a"], 0.12, 1e-15);
    EXPECT_EQ(w["b"], 0.0);
    EXPECT_EQ(w["c"], 0.0);
}

TEST(Weighted, UniformWeightKeepsRanking) {
    std::mt19937_64 rng(35);
    std::uniform_real_distribution<double> u(0, 1), c(0.01, 3);
    for (int rep = 0; rep < 100; ++rep) {
        locpred::Scores s;
        std::map<std::string, double> ss;
        double w = c(rng);
        for (const auto& ap : ap_names(10)) {
            s[ap] = std::round(u(rng) * 8) / 8;  // coarse, to force ties
            ss[ap] = w;
        }
        EXPECT_EQ(locpred::rank_all(locpred::weighted_scores(s, ss)), locpred::rank_all(s));
    }
}

TEST(TopK, Examples) {
    locpred::Scores eq{{"c", 0.5}, {"a", 0.5}, {"b", 0.5}};
    EXPECT_EQ(locpred::top_k(eq, 3), (std::vector<std::string>{"a", "b", "c"}));
    locpred::Scores s{{"a", 0.1}, {"b", 0.7}, {"c", 0.3}};
    EXPECT_EQ(locpred::top_k(s, 1), std::vector<std::string>{"b"});
    EXPECT_EQ(locpred::top_k(s, 9), (std::vector<std::string>{"b", "c", "a"}));
    EXPECT_TRUE(locpred::top_k(s, 0).empty());
}

TEST(TopK, MatchesExhaustiveRanking) {
    std::mt19937_64 rng(36);
    std::uniform_int_distribution<int> val(0, 5);
    for (int rep = 0; rep < 300; ++rep) {
        std::map<std::string, double> s;
        for (const auto& ap : ap_names(1 + rep % 10)) s[ap] = val(rng) / 5.0;
        for (std::size_t k = 0; k <= 11; ++k) EXPECT_EQ(locpred::top_k(s, k), oracle::exhaustive_top_k(s, k));
    }
}

// --- partition -------------------------------------------------------------------------

TEST(Partition, Examples) {
    auto p = locpred::partition_at_first_query(traj("d", {"A", "B", "C", "D"}, {"B", "D"}));
    ASSERT_TRUE(p);
    EXPECT_EQ(p->prefix, (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(p->suffix, (std::vector<std::string>{"C", "D"}));
    EXPECT_FALSE(p->fallback);
    auto last = locpred::partition_at_first_query(traj("d", {"A", "B", "C"}, {"C"}));
    EXPECT_TRUE(last->suffix.empty());
    auto first = locpred::partition_at_first_query(traj("d", {"A", "B", "C"}, {"A"}));
    EXPECT_EQ(first->prefix, std::vector<std::string>{"A"});
    EXPECT_FALSE(locpred::partition_at_first_query(traj("d", {"A", "B"})));
}

TEST(Partition, EarliestQueryWinsRegardlessOfOrder) {
    auto t = traj("d", {"A", "B", "C", "D"}, {"C", "B"});
    t.queries[1].at = Timestamp{900};
    auto p = locpred::partition_at_first_query(t);
    EXPECT_EQ(p->first_query, 1u);
    EXPECT_EQ(p->prefix.back(), "B");
}

TEST(Partition, OffTrajectoryQueryFallsBackToNearestHop) {
    auto t = traj("d", {"A", "B", "C", "D"}, {"Z"});
    t.queries[0].at = Timestamp{1000 + 600 + 300};  // inside B's span
    auto p = locpred::partition_at_first_query(t);
    EXPECT_TRUE(p->fallback);
    EXPECT_EQ(p->prefix, (std::vector<std::string>{"A", "B"}));
}

TEST(RankTestCases, OwnPrefixRowExcludedFromNeighbors) {
    std::vector<std::string> aps{"a", "b", "c", "d"};
    std::vector<Trajectory> train{traj("t1", {"a", "b", "c"}), traj("t2", {"a", "d"})};
    locpred::TestCase tc{"x", {{"a", "b"}, {"c"}, 0, false}, {{"c", 0.0}, {"d", 1.0}}};
    std::vector<Method> methods{Method::ItemItem, Method::ItemItemWeighted, Method::UserUser};
    auto out = locpred::rank_test_cases(aps, train, std::span(&tc, 1), methods);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].ranked.front(), "c");
    EXPECT_EQ(out[1].ranked.front(), "d");
    EXPECT_EQ(out[2].ranked.front(), "c");
    EXPECT_EQ(out[2].actual, std::vector<std::string>{"c"});
}

TEST(PredictionReport, RoundTrip) {
    std::vector<locpred::Ranking> r{{"d@1", Method::ItemItemWeighted, {"a", "b", "c"}, {"c"}, true},
                                    {"e@2", Method::UserUser, {"b"}, {"a", "b"}, false}};
    auto text = locpred::serialize_prediction_report(r, 2);
    auto back = locpred::parse_prediction_report(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].ranked, (std::vector<std::string>{"a", "b"}));
    EXPECT_TRUE(back[0].fallback);
    EXPECT_EQ(back[1].method, Method::UserUser);
    EXPECT_EQ(locpred::serialize_prediction_report(back, 2), text);
    EXPECT_THROW(locpred::parse_prediction_report("{\"method\":\"x\"}\n"), ValidationError);
}

// --- metrics -----------------------------------------------------------------------------

TEST(AccuracyAtK, Examples) {
    std::vector<std::string> pred{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
    EXPECT_EQ(evalkit::accuracy_at_k(pred, {"a", "b", "c", "d", "e"}, 5), 1.0);
    EXPECT_EQ(evalkit::accuracy_at_k(pred, {"x"}, 5), 0.0);
    EXPECT_EQ(evalkit::accuracy_at_k(pred, {"c", "h", "x"}, 10), 0.2);
    EXPECT_EQ(evalkit::accuracy_at_k(std::vector<std::string>{"a"}, {"a"}, 10), 0.1);
    EXPECT_THROW(evalkit::accuracy_at_k(pred, {"a"}, 0), ValidationError);
}

TEST(Mrr, Examples) {
    std::vector<std::vector<std::string>> lists{{"a", "b"}, {"x", "b", "c"}, {"x", "y", "z", "d"}};
    std::vector<evalkit::ApSet> actual{{"a"}, {"b"}, {"d"}};
    EXPECT_NEAR(evalkit::mrr(lists, actual), 7.0 / 12.0, 1e-15);
    std::vector<std::size_t> ranks{1, 2, 4};
    EXPECT_NEAR(evalkit::mrr_from_ranks(ranks), 7.0 / 12.0, 1e-15);
    std::vector<std::size_t> never{0, 0};
    EXPECT_EQ(evalkit::mrr_from_ranks(never), 0.0);
    std::vector<std::size_t> first{1, 1, 1};
    EXPECT_EQ(evalkit::mrr_from_ranks(first), 1.0);
    EXPECT_EQ(evalkit::reciprocal_rank(lists[2], actual[2], 3), 0.0);
    EXPECT_THROW(evalkit::mrr(std::span<const std::vector<std::string>>{}, std::span<const evalkit::ApSet>{}), ValidationError);
}

TEST(Metrics, HitsMonotoneAndMrrBounds) {
    std::mt19937_64 rng(37);
    auto aps = ap_names(10);
    std::bernoulli_distribution in(0.3);
    for (int rep = 0; rep < 200; ++rep) {
        auto pred = aps;
        std::shuffle(pred.begin(), pred.end(), rng);
        evalkit::ApSet actual;
        for (const auto& a : aps)
            if (in(rng)) actual.insert(a);
        for (std::size_t k = 1; k < 10; ++k)
            EXPECT_LE(evalkit::hits_at_k(pred, actual, k), evalkit::hits_at_k(pred, actual, k + 1));
        double rr = evalkit::reciprocal_rank(pred, actual);
        EXPECT_GE(rr, 0.0);
        EXPECT_LE(rr, 1.0);
        EXPECT_GE(rr, evalkit::accuracy_at_k(pred, actual, 1));
    }
}

TEST(Sensitivity, BaselineAndAllButOne) {
    std::vector<std::string> aps{"a", "b", "c", "d"};
    std::vector<Trajectory> train{traj("1", {"a", "b"}), traj("2", {"a", "c"}), traj("3", {"a", "b", "d"})};
    auto pop = evalkit::popularity(train, aps);
    EXPECT_EQ(pop["a"], 3u);
    EXPECT_EQ(pop["d"], 1u);
    std::vector<locpred::Ranking> r{{"x", Method::ItemItem, {"a", "b", "c", "d"}, {"a", "d"}, false},
                                    {"y", Method::ItemItem, {"c", "d", "b", "a"}, {"b"}, false}};
    std::vector<std::size_t> ns{0, 3};
    auto pts = evalkit::sensitivity_remove_top_n(r, pop, ns, 2);
    EXPECT_DOUBLE_EQ(pts[0].accuracy, evalkit::summarize(r, 2).accuracy_at_k);
    EXPECT_EQ(pts[0].cases, 2u);
    // Removing a, b, c leaves only d: x keeps one case with a hit at rank 1.
    EXPECT_EQ(pts[1].cases, 1u);
    EXPECT_DOUBLE_EQ(pts[1].accuracy, 0.5);
    std::vector<std::size_t> bad{4};
    EXPECT_THROW(evalkit::sensitivity_remove_top_n(r, pop, bad, 2), ValidationError);
}

TEST(Pearson, ExactLinesAndErrors) {
    std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 6, 8, 10}, ny{-1, -2, -3, -4, -5};
    EXPECT_NEAR(evalkit::pearson_correlation(x, y).r, 1.0, 1e-15);
    EXPECT_EQ(evalkit::pearson_correlation(x, y).p, 0.0);
    EXPECT_NEAR(evalkit::pearson_correlation(x, ny).r, -1.0, 1e-15);
    std::vector<double> two{1, 2}, flat{3, 3, 3, 3, 3};
    EXPECT_THROW(evalkit::pearson_correlation(two, two), ValidationError);
    EXPECT_THROW(evalkit::pearson_correlation(x, flat), ValidationError);
    EXPECT_THROW(evalkit::pearson_correlation(x, two), ValidationError);
}

TEST(Pearson, RandomEighteenPointsMatchDirectFormulaAndSimpsonP) {
    std::mt19937_64 rng(38);
    std::normal_distribution<double> n(0, 1);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x, y;
        for (int i = 0; i < 18; ++i) {
            x.push_back(n(rng));
            y.push_back(0.05 * rep * x.back() + n(rng));
        }
        auto c = evalkit::pearson_correlation(x, y);
        EXPECT_NEAR(c.r, oracle::pearson_r_direct(x, y), 1e-9);
        double t = c.r * std::sqrt(16 / (1 - c.r * c.r));
        EXPECT_NEAR(c.p, oracle::t_two_tailed_p_simpson(t, 16), 1e-6);
    }
}

TEST(Reports, JsonAndCsvShape) {
    std::vector<std::string> aps{"a", "b", "c"};
    std::vector<Trajectory> train{traj("1", {"a", "b"}), traj("2", {"a", "c"})};
    auto pop = evalkit::popularity(train, aps);
    std::vector<locpred::Ranking> r{{"x", Method::ItemItem, {"b", "c"}, {"c"}, false},
                                    {"x", Method::ItemItemWeighted, {"c", "b"}, {"c"}, false}};
    std::vector<std::size_t> ns{0, 1};
    auto reports = evalkit::build_reports(r, pop, 1, ns);
    ASSERT_EQ(reports.size(), 2u);
    auto j = json::parse(evalkit::serialize_reports(reports));
    EXPECT_EQ(j[0]["method"], "i-i");
    EXPECT_EQ(j[0]["mrr"], 0.0);
    EXPECT_EQ(j[1]["accuracy_at_k"], 1.0);
    EXPECT_EQ(j[1]["sensitivity"].size(), 2u);
    auto csv = evalkit::reports_to_csv(reports);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,k,n,accuracy_at_k,mrr");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}
