#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "test_support.hpp"

using namespace cpctx;
using cpctx::test::ts;

namespace {

Floorplan two_ap_floorplan() {
    Floorplan fp;
    fp.aps = {{"wap001", {0, 0, 0}, {}}, {"wap002", {10, 0, 0}, {}}};
    fp.shops = {{"s1", "Bean There", "Cafe", {1, 0, 0}}};
    fp.entry_exit_aps = {"wap001"};
    return fp;
}

AssociationRecord assoc(const std::string& dev, const std::string& ap, const char* start, std::int64_t dur) {
    return {dev, ap, ts(start), dur, 100, 10};
}

}  // namespace

// --- core-model ------------------------------------------------------------

TEST(Timestamp, ParsesAndFormatsUtc) {
    auto t = Timestamp::parse("2013-03-01T10:00:00Z");
    ASSERT_TRUE(t);
    EXPECT_EQ(t->to_string(), "2013-03-01T10:00:00Z");
    EXPECT_EQ(*Timestamp::parse("1970-01-01T00:00:00Z"), Timestamp{0});
    EXPECT_EQ((*t + 3600).to_string(), "2013-03-01T11:00:00Z");
    EXPECT_EQ(*Timestamp::parse("2013-03-01T10:00:30Z") - *t, 30);
}

TEST(Timestamp, RejectsMalformedText) {
    for (const char* bad : {"2013-03-01 10:00:00Z", "2013-02-30T10:00:00Z", "2013-03-01T24:00:00Z",
                            "2013-03-01T10:00:00", "13-03-01T10:00:00Z", ""})
        EXPECT_FALSE(Timestamp::parse(bad)) << bad;
}

TEST(Categories, RegistryHasEighteenSortedNames) {
    EXPECT_EQ(kSemanticCategoryNames.size(), 18u);
    EXPECT_TRUE(std::is_sorted(kSemanticCategoryNames.begin(), kSemanticCategoryNames.end()));
    EXPECT_EQ(kOperatorCategories.size(), 29u);
    EXPECT_EQ(category_slot("Footwear"), std::optional<std::size_t>(10));
    EXPECT_FALSE(category_slot("Homeware"));
}

TEST(ValidateDeployment, MinimalFloorplanIsValid) {
    Floorplan fp;
    fp.aps = {{"wap001", {0, 0, 0}, {}}, {"wap002", {5, 0, 0}, {}}};
    fp.entry_exit_aps = {"wap001"};
    EXPECT_TRUE(validate_deployment(fp).ok());
}

TEST(ValidateDeployment, DuplicateApIdIsOneViolation) {
    Floorplan fp;
    fp.aps = {{"wap030", {0, 0, 0}, {}}, {"wap030", {5, 0, 0}, {}}};
    fp.entry_exit_aps = {"wap030"};
    auto r = validate_deployment(fp);
    ASSERT_EQ(r.violations.size(), 1u);
    EXPECT_NE(r.violations[0].find("duplicate ap id"), std::string::npos);
}

TEST(ValidateDeployment, CafeIsAKnownMallCategory) {
    EXPECT_TRUE(validate_deployment(two_ap_floorplan()).ok());
    auto fp = two_ap_floorplan();
    fp.shops[0].mall_category = "Casino";
    EXPECT_FALSE(validate_deployment(fp).ok());
}

TEST(ValidateDeployment, ReportsEveryProblem) {
    Floorplan fp;
    fp.aps = {{"wap001", {0, 0, -1}, {}}};
    fp.shops = {{"s1", "X", "Cafe", {0, 0, 3}}, {"s1", "Y", "Cafe", {0, 0, -1}}};
    fp.entry_exit_aps = {"wap404"};
    fp.rectification_overrides = {{"s9", "wap001"}};
    auto r = validate_deployment(fp);
    EXPECT_EQ(r.violations.size(), 5u);
}

TEST(Floorplan, JsonRoundTripIsByteIdentical) {
    auto fp = two_ap_floorplan();
    fp.rectification_overrides = {{"s1", "wap002"}};
    auto text = serialize_floorplan(fp);
    auto back = parse_floorplan(text);
    EXPECT_EQ(back, fp);
    EXPECT_EQ(serialize_floorplan(back), text);
}

TEST(Floorplan, StructuralErrorsAreValidationErrors) {
    EXPECT_THROW(parse_floorplan("{"), ValidationError);
    EXPECT_THROW(parse_floorplan(R"({"aps": []})"), ValidationError);
}

TEST(Trajectory, FactoryEnforcesDwellThreshold) {
    EXPECT_NO_THROW(Trajectory::make("d", Timestamp{0}, {{"a", 600}, {"b", 900}}, {}, 600));
    EXPECT_THROW(Trajectory::make("d", Timestamp{0}, {{"a", 599}}, {}, 600), ValidationError);
    EXPECT_THROW(Trajectory::make("d", Timestamp{0}, {}, {}, 600), ValidationError);
    EXPECT_THROW(Trajectory::make("d", Timestamp{0}, {{"a", 600}, {"a", 700}}, {}, 600), ValidationError);
}

TEST(IntentLabel, TextForms) {
    EXPECT_EQ(to_string(IntentLabel::Intentful), "IF");
    EXPECT_EQ(parse_intent_label("IL"), IntentLabel::Intentless);
    EXPECT_FALSE(parse_intent_label("if"));
}

// --- csv -------------------------------------------------------------------

TEST(Csv, QuotedFieldsAndLineNumbers) {
    auto rows = csv::parse("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n\nc,\"multi\nline\"\n");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1].fields, (std::vector<std::string>{"x, y", "he said \"hi\""}));
    EXPECT_EQ(rows[1].line_no, 2u);
    EXPECT_EQ(rows[2].fields[1], "multi\nline");
    EXPECT_EQ(csv::quote("plain"), "plain");
    EXPECT_EQ(csv::quote("a,b"), "\"a,b\"");
}

TEST(Csv, UnterminatedQuoteIsMalformed) {
    auto rows = csv::parse("a,b\n\"open,1\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[1].malformed);
}

// --- ingest: parsing -------------------------------------------------------

TEST(ParseAssociationLog, MapsFieldsDirectly) {
    auto p = ingest::parse_association_log_text(
        "device_id,ap_id,start_ts,duration_s,bytes_down,bytes_up\nu1,wap030,2013-03-01T10:00:00Z,900,1024,256\n");
    ASSERT_EQ(p.records.size(), 1u);
    EXPECT_EQ(p.records[0].duration, 900);
    EXPECT_EQ(p.records[0].bytes_down, 1024);
    EXPECT_EQ(p.records[0].ap_id, "wap030");
    EXPECT_TRUE(p.rejects.empty());
}

TEST(ParseAssociationLog, NegativeDurationIsRejectedWithLineNumber) {
    auto p = ingest::parse_association_log_text(
        "device_id,ap_id,start_ts,duration_s,bytes_down,bytes_up\n"
        "u1,wap030,2013-03-01T10:00:00Z,900,1024,256\n"
        "u1,wap031,2013-03-01T10:20:00Z,-5,1024,256\n"
        "u1,wap031,yesterday,60,1,1\n"
        "u1,wap031\n");
    EXPECT_EQ(p.records.size(), 1u);
    ASSERT_EQ(p.rejects.size(), 3u);
    EXPECT_EQ(p.rejects[0].line_no, 3u);
    EXPECT_EQ(p.rejects[0].reason, "negative duration");
    EXPECT_EQ(p.rejects[2].line_no, 5u);
}

TEST(ParseAssociationLog, HeaderOnlyGivesEmptyList) {
    auto p = ingest::parse_association_log_text("device_id,ap_id,start_ts,duration_s,bytes_down,bytes_up\n");
    EXPECT_TRUE(p.records.empty());
    EXPECT_TRUE(p.rejects.empty());
    EXPECT_THROW(ingest::parse_association_log_text("wrong,header\n"), ValidationError);
}

TEST(ParseQueryLog, QuotedCommasAndRoundTrip) {
    std::vector<QueryRecord> qs{{"u1", "wap001", ts("2013-03-01T10:05:00Z"), "shoes, \"cheap\""}};
    auto text = ingest::serialize_query_log(qs);
    auto p = ingest::parse_query_log_text(text);
    ASSERT_EQ(p.records.size(), 1u);
    EXPECT_EQ(p.records[0], qs[0]);
    EXPECT_EQ(ingest::serialize_query_log(p.records), text);
}

TEST(ParseAssociationLog, RoundTripIsByteIdentical) {
    std::vector<AssociationRecord> rs{assoc("u1", "wap001", "2013-03-01T10:00:00Z", 900),
                                      assoc("u2", "wap002", "2013-03-02T11:00:00Z", 60)};
    auto text = ingest::serialize_association_log(rs);
    auto p = ingest::parse_association_log_text(text);
    EXPECT_EQ(p.records, rs);
    EXPECT_EQ(ingest::serialize_association_log(p.records), text);
}

// --- ingest: sessionization ------------------------------------------------

TEST(Sessionize, SingleSessionTwoHops) {
    std::vector<AssociationRecord> rs{assoc("d", "A", "2013-03-01T10:00:00Z", 900),
                                      assoc("d", "B", "2013-03-01T10:20:00Z", 720)};
    auto res = ingest::sessionize({rs, {}}, {});
    ASSERT_EQ(res.trajectories.size(), 1u);
    EXPECT_EQ(res.trajectories[0].hops, (std::vector<Hop>{{"A", 900}, {"B", 720}}));
}

TEST(Sessionize, RepeatedShortAssociationsAggregateBeforeFiltering) {
    std::vector<AssociationRecord> rs{assoc("d", "A", "2013-03-01T10:00:00Z", 480),
                                      assoc("d", "A", "2013-03-01T10:20:00Z", 420)};
    auto res = ingest::sessionize({rs, {}}, {});
    ASSERT_EQ(res.trajectories.size(), 1u);
    EXPECT_EQ(res.trajectories[0].hops, (std::vector<Hop>{{"A", 900}}));

    ingest::SessionizationConfig per_assoc;
    per_assoc.filter_on_aggregate = false;
    auto strict = ingest::sessionize({rs, {}}, per_assoc);
    EXPECT_TRUE(strict.trajectories.empty());
    EXPECT_EQ(strict.discarded_visits, 1u);
}

TEST(Sessionize, ShortVisitIsDiscarded) {
    std::vector<AssociationRecord> rs{assoc("d", "A", "2013-03-01T10:00:00Z", 540)};
    auto res = ingest::sessionize({rs, {}}, {});
    EXPECT_TRUE(res.trajectories.empty());
    EXPECT_EQ(res.discarded_visits, 1u);
}

TEST(Sessionize, GapSplitsVisitsAndQueriesAttachByTime) {
    std::vector<AssociationRecord> rs{assoc("d", "A", "2013-03-01T10:00:00Z", 900),
                                      assoc("d", "B", "2013-03-01T12:00:00Z", 900)};
    std::vector<QueryRecord> qs{{"d", "X", ts("2013-03-01T10:05:00Z"), "ugg shoes"},
                                {"d", "B", ts("2013-03-01T12:01:00Z"), "mascara"},
                                {"d", "A", ts("2013-03-01T11:00:00Z"), "lost"}};
    std::set<std::string> known{"A", "B", "X"};
    auto res = ingest::sessionize({rs, qs}, {}, &known);
    ASSERT_EQ(res.trajectories.size(), 2u);
    ASSERT_EQ(res.trajectories[0].queries.size(), 1u);
    EXPECT_EQ(res.trajectories[0].queries[0].text, "ugg shoes");
    EXPECT_EQ(res.trajectories[1].queries[0].text, "mascara");
    EXPECT_EQ(res.unattached_queries, 1u);
}

TEST(Sessionize, UnknownApsAreRejectedWithLineNumbers) {
    std::vector<AssociationRecord> rs{assoc("d", "A", "2013-03-01T10:00:00Z", 900),
                                      assoc("d", "Z", "2013-03-01T10:20:00Z", 900)};
    std::vector<std::size_t> lines{2, 3};
    std::set<std::string> known{"A"};
    auto res = ingest::sessionize({rs, {}, lines}, {}, &known);
    ASSERT_EQ(res.rejects.size(), 1u);
    EXPECT_EQ(res.rejects[0].line_no, 3u);
    EXPECT_EQ(res.trajectories.size(), 1u);
}

TEST(Sessionize, InvalidConfigThrows) {
    ingest::SessionizationConfig cfg;
    cfg.dwell_threshold = 100;
    EXPECT_THROW(ingest::sessionize({}, cfg), ValidationError);
}

namespace {

// Brute-force reference: every covered second is credited to the first
// association (in start order) covering it; visits split where the next
// start lies more than `gap` past everything seen so far.
std::vector<std::vector<Hop>> oracle_sessions(std::vector<AssociationRecord> rs, std::int64_t threshold,
                                              std::int64_t gap) {
    std::sort(rs.begin(), rs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.start, a.ap_id, a.duration) < std::tie(b.start, b.ap_id, b.duration);
    });
    std::vector<std::vector<AssociationRecord>> visits;
    std::int64_t latest = 0;
    for (const auto& r : rs) {
        if (visits.empty() || r.start.epoch_seconds() - latest > gap) {
            visits.emplace_back();
            latest = r.start.epoch_seconds();
        }
        visits.back().push_back(r);
        latest = std::max(latest, r.end().epoch_seconds());
    }
    std::vector<std::vector<Hop>> out;
    for (const auto& v : visits) {
        std::int64_t lo = v.front().start.epoch_seconds(), hi = lo;
        for (const auto& r : v) hi = std::max(hi, r.end().epoch_seconds());
        std::vector<int> owner(static_cast<std::size_t>(hi - lo), -1);
        for (std::size_t i = 0; i < v.size(); ++i)
            for (auto s = v[i].start.epoch_seconds(); s < v[i].end().epoch_seconds(); ++s)
                if (owner[static_cast<std::size_t>(s - lo)] < 0) owner[static_cast<std::size_t>(s - lo)] = static_cast<int>(i);
        std::map<std::string, std::int64_t> dwell;
        std::vector<std::string> order;
        for (const auto& r : v)
            if (dwell.try_emplace(r.ap_id, 0).second) order.push_back(r.ap_id);
        for (int o : owner)
            if (o >= 0) ++dwell[v[static_cast<std::size_t>(o)].ap_id];
        std::vector<Hop> hops;
        for (const auto& ap : order)
            if (dwell[ap] >= threshold) hops.push_back({ap, dwell[ap]});
        if (!hops.empty()) out.push_back(hops);
    }
    return out;
}

std::vector<AssociationRecord> random_device_log(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_rec(1, 12), ap(0, 4), step(0, 2400), dur(0, 1500);
    std::vector<AssociationRecord> rs;
    std::int64_t t = 1362132000;
    int n = n_rec(rng);
    for (int i = 0; i < n; ++i) {
        t += step(rng);
        rs.push_back({"dev", "ap" + std::to_string(ap(rng)), Timestamp{t}, dur(rng), 0, 0});
    }
    return rs;
}

}  // namespace

TEST(SessionizeProperty, MatchesPerSecondOracle) {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 300; ++iter) {
        auto rs = random_device_log(rng);
        auto res = ingest::sessionize({rs, {}}, {});
        auto expect = oracle_sessions(rs, 600, 1800);
        ASSERT_EQ(res.trajectories.size(), expect.size()) << "iteration " << iter;
        for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(res.trajectories[i].hops, expect[i]);
    }
}

TEST(SessionizeProperty, OrderInsensitiveAndDwellWithinSpan) {
    std::mt19937_64 rng(12);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<AssociationRecord> rs;
        for (int d = 0; d < 3; ++d)
            for (auto r : random_device_log(rng)) {
                r.device_id = "dev" + std::to_string(d);
                rs.push_back(r);
            }
        auto base = ingest::sessionize({rs, {}}, {});
        auto shuffled = rs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto again = ingest::sessionize({shuffled, {}}, {});
        ASSERT_EQ(base.trajectories, again.trajectories);
        for (const auto& t : base.trajectories) {
            std::int64_t end = 0;
            for (const auto& r : rs)
                if (r.device_id == t.device_id && r.start >= t.visit_start && r.start - t.visit_start < 86400 * 2)
                    end = std::max(end, r.end() - t.visit_start);
            EXPECT_LE(t.total_dwell(), end);
        }
    }
}

TEST(MarkComplete, NeedsThreeHopsBetweenEntryExitAps) {
    std::set<std::string> ee{"E1", "E2"};
    Trajectory t;
    t.hops = {{"E1", 600}, {"A", 600}, {"E2", 600}};
    EXPECT_TRUE(ingest::mark_complete(t, ee).complete);
    t.hops = {{"E1", 600}, {"A", 600}};
    EXPECT_FALSE(ingest::mark_complete(t, ee).complete);
    t.hops = {{"A", 600}, {"B", 600}, {"C", 600}};
    EXPECT_FALSE(ingest::mark_complete(t, ee).complete);
}

TEST(AssociationCdf, TenMinuteBins) {
    std::vector<AssociationRecord> rs;
    for (int m : {5, 5, 15, 15}) rs.push_back(assoc("d", "A", "2013-03-01T10:00:00Z", m * 60));
    auto cdf = ingest::association_cdf(rs, 600);
    ASSERT_EQ(cdf.size(), 2u);
    EXPECT_EQ(cdf[0].duration_bound, 600);
    EXPECT_DOUBLE_EQ(cdf[0].cumulative_fraction, 0.5);
    EXPECT_DOUBLE_EQ(cdf[1].cumulative_fraction, 1.0);
    EXPECT_EQ(ingest::cdf_to_csv(cdf), "duration_bound_s,cumulative_fraction\n600,0.5\n1200,1\n");
}

TEST(AssociationCdf, EqualDurationsGiveSingleStep) {
    std::vector<AssociationRecord> rs(5, assoc("d", "A", "2013-03-01T10:00:00Z", 420));
    auto cdf = ingest::association_cdf(rs, 600);
    ASSERT_EQ(cdf.size(), 1u);
    EXPECT_DOUBLE_EQ(cdf[0].cumulative_fraction, 1.0);
    EXPECT_THROW(ingest::association_cdf(rs, 0), ValidationError);
}

TEST(AssociationCdf, MonotoneWithinUnitInterval) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> dur(0, 7200);
    std::vector<AssociationRecord> rs;
    for (int i = 0; i < 500; ++i) rs.push_back({"d", "A", Timestamp{0}, dur(rng), 0, 0});
    auto cdf = ingest::association_cdf(rs, 300);
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        EXPECT_GE(cdf[i].cumulative_fraction, 0.0);
        EXPECT_LE(cdf[i].cumulative_fraction, 1.0);
        if (i) {
            EXPECT_GE(cdf[i].cumulative_fraction, cdf[i - 1].cumulative_fraction);
        }
    }
}

TEST(Trajectories, JsonlRoundTrip) {
    Trajectory t;
    t.device_id = "dev1";
    t.visit_start = ts("2015-03-01T10:00:00Z");
    t.hops = {{"wap001", 900}, {"wap002", 660}};
    t.queries = {{"dev1", "wap002", ts("2015-03-01T10:16:00Z"), "ugg shoes"}};
    t.complete = true;
    std::vector<Trajectory> v{t};
    auto text = ingest::serialize_trajectories(v);
    auto back = ingest::parse_trajectories(text);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], t);
    EXPECT_EQ(ingest::serialize_trajectories(back), text);
    EXPECT_EQ(t.id(), "dev1@2015-03-01T10:00:00Z");
}
