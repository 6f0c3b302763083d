#pragma once

// Command-line front end. Every subcommand reads and writes the documented
// file formats and leaves a run manifest next to its primary output.
//
// Exit codes: 0 success, 1 validation failure (bad flags, bad input
// content), 2 I/O failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "cpctx/pipeline.hpp"

namespace cpctx::cli {

inline constexpr std::string_view kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Logging (level from CPCTX_LOG: error, warn, info, debug; default warn)

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
    const char* env = std::getenv("CPCTX_LOG");
    std::string v = env ? env : "";
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

inline void log(LogLevel level, const std::string& msg) {
    static const LogLevel threshold = log_level();
    if (level > threshold) return;
    static constexpr std::array<std::string_view, 4> tags = {"error", "warn", "info", "debug"};
    std::cerr << "cpctx [" << tags[static_cast<int>(level)] << "] " << msg << "\n";
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

inline std::string base_name(const std::string& path) { return std::filesystem::path(path).filename().string(); }

/// Inputs are read through here so their digests land in the manifest.
class Run {
public:
    Run(std::string subcommand, std::uint64_t seed) : subcommand_(std::move(subcommand)), seed_(seed) {}

    std::string read(const std::string& path) {
        std::string content = read_file(path);
        inputs_.push_back({{"file", base_name(path)}, {"sha256", sha256_hex(content)}});
        return content;
    }

    void write(const std::string& path, std::string_view content) {
        auto parent = std::filesystem::path(path).parent_path();
        if (!parent.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(parent, ec);
        }
        write_file(path, content);
        outputs_.push_back(base_name(path));
        log(LogLevel::Info, "wrote " + path);
    }

    /// Effective flag values; path-typed flags keep only their file name so
    /// the manifest does not depend on the working directory.
    void record_flags(const CLI::App& app) {
        for (const CLI::Option* opt : app.get_options()) {
            if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
            const auto& name = opt->get_lnames().front();
            std::string value;
            if (opt->count() > 0) {
                for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
                if (value.empty()) value = "true";
            } else {
                value = opt->get_default_str();
            }
            if (opt->get_type_name() == "PATH" && !value.empty()) value = base_name(value);
            flags_[name] = value;
        }
    }

    std::string manifest() const {
        json j{{"tool", "cpctx"},
               {"version", kVersion},
               {"subcommand", subcommand_},
               {"seed", seed_},
               {"flags", flags_},
               {"inputs", inputs_},
               {"outputs", outputs_}};
        return j.dump(2) + "\n";
    }

    void write_manifest(const std::string& path) {
        write_file(path, manifest());
        log(LogLevel::Info, "wrote " + path);
    }

private:
    std::string subcommand_;
    std::uint64_t seed_;
    json flags_ = json::object();
    json inputs_ = json::array();
    std::vector<std::string> outputs_;
};

inline std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

// ---------------------------------------------------------------------------
// Shared loaders

inline Floorplan read_floorplan(Run& run, const std::string& path) { return parse_floorplan(run.read(path)); }

inline spatial::CategoryMap read_category_map(Run& run, const std::string& path) {
    json j = json::parse(run.read(path), nullptr, false);
    if (j.is_discarded()) throw ValidationError("category map: not valid JSON");
    return spatial::category_map_from_json(j);
}

inline semex::TripleStore read_kg(Run& run, const std::string& path) {
    auto res = semex::parse_triples(run.read(path));
    for (const auto& r : res.rejects) log(LogLevel::Warn, "kg line " + std::to_string(r.line_no) + ": " + r.reason);
    return std::move(res.store);
}

struct ContextOptions {
    std::string floorplan, category_map, kg, store_doc, crowd_doc;
    int lambda = 5;
    int query_hops = 2;
};

inline void add_context_options(CLI::App* sub, ContextOptions& o) {
    sub->add_option("--floorplan", o.floorplan, "Floorplan JSON")->required()->type_name("PATH");
    sub->add_option("--category-map", o.category_map, "Category map JSON")->required()->type_name("PATH");
    sub->add_option("--kg", o.kg, "Knowledge-graph triples (TSV)")->required()->type_name("PATH");
    sub->add_option("--lambda", o.lambda, "Category expansion depth")->capture_default_str()->check(CLI::Range(0, 64));
    sub->add_option("--query-hops", o.query_hops, "Broader hops per query entity")->capture_default_str()->check(CLI::Range(0, 64));
}

inline std::pair<pipeline::Deployment, pipeline::Knowledge> load_context(Run& run, const ContextOptions& o) {
    auto dep = pipeline::make_deployment(read_floorplan(run, o.floorplan), read_category_map(run, o.category_map));
    auto k = pipeline::make_knowledge(read_kg(run, o.kg), dep.category_map, o.lambda);
    k.query_hops = o.query_hops;
    if (!o.store_doc.empty()) k.store_doc = semex::parse_named_document(run.read(o.store_doc)).terms;
    if (!o.crowd_doc.empty()) k.crowd_doc = semex::parse_named_document(run.read(o.crowd_doc)).terms;
    return {std::move(dep), std::move(k)};
}

inline std::vector<locpred::Method> parse_methods(const std::string& s) {
    std::vector<locpred::Method> out;
    for (const auto& part : split(s, ',')) {
        auto m = locpred::parse_method(trim(part));
        if (!m) throw ValidationError("unknown method '" + part + "' (expected i-i, i-i-w, u-u)");
        if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
    }
    if (out.empty()) throw ValidationError("no prediction methods given");
    return out;
}

inline classify::ClassifierKind parse_kind(const std::string& s) {
    auto k = classify::parse_classifier_kind(s);
    if (!k) throw ValidationError("unknown classifier '" + s + "' (expected dt, nb, dtnb, majority)");
    return *k;
}

// ---------------------------------------------------------------------------

/// Parses and runs one command line; returns the process exit code.
inline int run(int argc, const char* const* argv) {
    CLI::App app{"Cyber-physical context pipeline for indoor intent and next-location prediction", "cpctx"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Seed for all randomness")->capture_default_str();

    std::function<void()> action;
    CLI::App* active = nullptr;
    auto sub = [&](const char* name, const char* desc) {
        auto* s = app.add_subcommand(name, desc);
        s->add_option("--seed", seed, "Seed for all randomness")->capture_default_str();
        return s;
    };

    // synth -----------------------------------------------------------------
    struct {
        std::size_t n = 176;
        double intentful = 48.0 / 176.0;
        std::size_t aps = 70;
        int floors = 6;
        std::string out_dir;
    } synth;
    auto* s_synth = sub("synth", "Generate a synthetic mall, logs and labels");
    s_synth->add_option("--n", synth.n, "Visits to generate")->capture_default_str();
    s_synth->add_option("--intentful", synth.intentful, "Fraction of intentful visitors")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    s_synth->add_option("--aps", synth.aps, "Access points")->capture_default_str();
    s_synth->add_option("--floors", synth.floors, "Floors")->capture_default_str();
    s_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required()->type_name("PATH");
    s_synth->callback([&] {
        active = s_synth;
        action = [&] {
            Run run("synth", seed);
            synthgen::WorldConfig wcfg;
            wcfg.num_aps = synth.aps;
            wcfg.floors = synth.floors;
            auto world = synthgen::generate_world(seed, wcfg);
            auto logs = synthgen::generate_logs(seed, synth.n, world, {synth.intentful, 1.0 - synth.intentful});
            namespace fs = std::filesystem;
            auto at = [&](const char* f) { return (fs::path(synth.out_dir) / f).string(); };
            run.write(at("floorplan.json"), serialize_floorplan(world.floorplan));
            run.write(at("category_map.json"), spatial::to_json(world.category_map).dump(2) + "\n");
            run.write(at("kg.tsv"), semex::serialize_triples(semex::TripleStore(world.kg)));
            run.write(at("store_doc.json"), semex::serialize_named_document(world.store_doc));
            run.write(at("crowd_doc.json"), semex::serialize_named_document(world.crowd_doc));
            run.write(at("al.csv"), ingest::serialize_association_log(logs.associations));
            run.write(at("ql.csv"), ingest::serialize_query_log(logs.queries));
            run.write(at("labels.csv"), synthgen::serialize_labels(logs.labels));
            run.record_flags(*s_synth);
            run.write_manifest(at("manifest.json"));
        };
    });

    // ingest ----------------------------------------------------------------
    struct {
        std::string al, ql, floorplan, out, rejects;
        ingest::SessionizationConfig cfg;
        bool per_association = false;
        bool complete_only = false;
    } ing;
    auto* s_ingest = sub("ingest", "Sessionize association and query logs into trajectories");
    s_ingest->add_option("--al", ing.al, "Association log CSV")->required()->type_name("PATH");
    s_ingest->add_option("--ql", ing.ql, "Query log CSV")->required()->type_name("PATH");
    s_ingest->add_option("--floorplan", ing.floorplan, "Floorplan JSON")->required()->type_name("PATH");
    s_ingest->add_option("--out", ing.out, "Trajectories JSONL")->required()->type_name("PATH");
    s_ingest->add_option("--rejects", ing.rejects, "Rejects JSONL (default: <out>.rejects.jsonl)")->type_name("PATH");
    s_ingest->add_option("--dwell-threshold", ing.cfg.dwell_threshold, "Minimum dwell per hop, seconds")->capture_default_str();
    s_ingest->add_option("--session-gap", ing.cfg.session_gap, "Gap that starts a new visit, seconds")->capture_default_str();
    s_ingest->add_option("--sampling-interval", ing.cfg.sampling_interval, "Log sampling interval, seconds")->capture_default_str();
    s_ingest->add_flag("--per-association", ing.per_association, "Apply the dwell threshold per association");
    s_ingest->add_flag("--complete-only", ing.complete_only, "Keep complete trajectories only");
    s_ingest->callback([&] {
        active = s_ingest;
        action = [&] {
            Run run("ingest", seed);
            ing.cfg.filter_on_aggregate = !ing.per_association;
            auto fp = read_floorplan(run, ing.floorplan);
            auto report = validate_deployment(fp);
            if (!report.ok()) throw ValidationError("invalid floorplan: " + pipeline::join_lines(report.violations));
            pipeline::Deployment dep;
            dep.ap_ids = fp.ap_ids();
            dep.entry_exit = {fp.entry_exit_aps.begin(), fp.entry_exit_aps.end()};
            auto al_text = run.read(ing.al);
            auto ql_text = run.read(ing.ql);
            auto res = pipeline::ingest_logs(al_text, ql_text, dep, ing.cfg);
            std::vector<Trajectory> kept;
            for (auto& t : res.trajectories)
                if (!ing.complete_only || t.complete) kept.push_back(std::move(t));
            std::size_t complete = std::count_if(kept.begin(), kept.end(), [](const Trajectory& t) { return t.complete; });
            log(LogLevel::Info, std::to_string(kept.size()) + " trajectories (" + std::to_string(complete) + " complete), " +
                                    std::to_string(res.rejects.size()) + " rejects, " + std::to_string(res.discarded_visits) +
                                    " visits discarded, " + std::to_string(res.unattached_queries) + " unattached queries");
            if (!res.rejects.empty()) log(LogLevel::Warn, std::to_string(res.rejects.size()) + " rows rejected");
            run.write(ing.out, ingest::serialize_trajectories(kept));
            run.write(ing.rejects.empty() ? ing.out + ".rejects.jsonl" : ing.rejects, ingest::rejects_to_jsonl(res.rejects));
            run.record_flags(*s_ingest);
            run.write_manifest(manifest_path_for(ing.out));
        };
    });

    // cdf -------------------------------------------------------------------
    struct {
        std::string al, out;
        std::int64_t bin = 300;
    } cdf;
    auto* s_cdf = sub("cdf", "Association-duration CDF");
    s_cdf->add_option("--al", cdf.al, "Association log CSV")->required()->type_name("PATH");
    s_cdf->add_option("--bin", cdf.bin, "Bin width, seconds")->capture_default_str();
    s_cdf->add_option("--out", cdf.out, "CDF CSV")->required()->type_name("PATH");
    s_cdf->callback([&] {
        active = s_cdf;
        action = [&] {
            Run run("cdf", seed);
            auto al = ingest::parse_association_log_text(run.read(cdf.al));
            if (!al.rejects.empty()) log(LogLevel::Warn, std::to_string(al.rejects.size()) + " association rows rejected");
            run.write(cdf.out, ingest::cdf_to_csv(ingest::association_cdf(al.records, cdf.bin)));
            run.record_flags(*s_cdf);
            run.write_manifest(manifest_path_for(cdf.out));
        };
    });

    // label-aps -------------------------------------------------------------
    struct {
        std::string floorplan, category_map, out;
    } lab;
    auto* s_label = sub("label-aps", "Voronoi-assign shops and label APs with semantic categories");
    s_label->add_option("--floorplan", lab.floorplan, "Floorplan JSON")->required()->type_name("PATH");
    s_label->add_option("--category-map", lab.category_map, "Category map JSON")->required()->type_name("PATH");
    s_label->add_option("--out", lab.out, "AP labels JSON")->required()->type_name("PATH");
    s_label->callback([&] {
        active = s_label;
        action = [&] {
            Run run("label-aps", seed);
            auto dep = pipeline::make_deployment(read_floorplan(run, lab.floorplan), read_category_map(run, lab.category_map));
            auto st = spatial::cell_stats(dep.assignment, dep.floorplan.aps.size());
            log(LogLevel::Info, "mean shops per non-empty cell: " + format_double(st.mean_shops_per_cell));
            for (const auto& s : dep.assignment.unassigned) log(LogLevel::Warn, "shop '" + s + "' has no AP on its floor");
            run.write(lab.out, spatial::ap_labels_to_json(dep.labels).dump(2) + "\n");
            run.record_flags(*s_label);
            run.write_manifest(manifest_path_for(lab.out));
        };
    });

    // build-corpus ----------------------------------------------------------
    struct {
        std::string kg, category_map, out;
        int lambda = 5;
    } corp;
    auto* s_corpus = sub("build-corpus", "Expand each semantic category into a term document");
    s_corpus->add_option("--kg", corp.kg, "Knowledge-graph triples (TSV)")->required()->type_name("PATH");
    s_corpus->add_option("--category-map", corp.category_map, "Category map JSON")->required()->type_name("PATH");
    s_corpus->add_option("--lambda", corp.lambda, "Expansion depth")->capture_default_str()->check(CLI::Range(0, 64));
    s_corpus->add_option("--out", corp.out, "Corpus JSON")->required()->type_name("PATH");
    s_corpus->callback([&] {
        active = s_corpus;
        action = [&] {
            Run run("build-corpus", seed);
            auto map = read_category_map(run, corp.category_map);
            auto docs = semex::build_category_corpus(read_kg(run, corp.kg), map.registry(), corp.lambda);
            for (const auto& d : docs)
                log(LogLevel::Info, d.category.name + ": " + std::to_string(semex::total_count(d.terms)) + " terms");
            run.write(corp.out, semex::serialize_corpus(docs));
            run.record_flags(*s_corpus);
            run.write_manifest(manifest_path_for(corp.out));
        };
    });

    // features --------------------------------------------------------------
    struct {
        ContextOptions ctx;
        std::string trajectories, labels, out;
        bool complete_only = false;
    } feat;
    auto* s_feat = sub("features", "Extract the 43-dimensional feature matrix");
    add_context_options(s_feat, feat.ctx);
    s_feat->add_option("--trajectories", feat.trajectories, "Trajectories JSONL")->required()->type_name("PATH");
    s_feat->add_option("--labels", feat.labels, "Labels CSV (trajectory_id,label)")->type_name("PATH");
    s_feat->add_option("--store-doc", feat.ctx.store_doc, "Store-name document JSON")->type_name("PATH");
    s_feat->add_option("--crowd-doc", feat.ctx.crowd_doc, "Crowdsourced keyword document JSON")->type_name("PATH");
    s_feat->add_flag("--complete-only", feat.complete_only, "Only complete trajectories");
    s_feat->add_option("--out", feat.out, "Feature matrix CSV")->required()->type_name("PATH");
    s_feat->callback([&] {
        active = s_feat;
        action = [&] {
            Run run("features", seed);
            auto [dep, k] = load_context(run, feat.ctx);
            auto trajs = ingest::parse_trajectories(run.read(feat.trajectories));
            if (feat.complete_only) std::erase_if(trajs, [](const Trajectory& t) { return !t.complete; });
            std::optional<std::map<std::string, IntentLabel>> labels;
            if (!feat.labels.empty()) labels = synthgen::parse_labels(run.read(feat.labels));
            std::vector<std::string> warnings;
            auto fv = pipeline::compute_features(trajs, dep, k, labels ? &*labels : nullptr, &warnings);
            for (const auto& w : warnings) log(LogLevel::Warn, w);
            run.write(feat.out, features::serialize_feature_matrix(fv));
            run.record_flags(*s_feat);
            run.write_manifest(manifest_path_for(feat.out));
        };
    });

    // train-intent / eval-intent ---------------------------------------------
    struct {
        std::string matrix, feature_set = "phy+cyb+cont", classifier = "dtnb", cv = "kfold:10", out;
        int bins = 5;
    } intent;
    auto add_intent_options = [&](CLI::App* s) {
        s->add_option("--matrix", intent.matrix, "Feature matrix CSV")->required()->type_name("PATH");
        s->add_option("--features", intent.feature_set, "Feature groups joined by '+': phy, cyb, cont, all")
            ->capture_default_str();
        s->add_option("--classifier", intent.classifier, "dt, nb, dtnb or majority")->capture_default_str();
        s->add_option("--bins", intent.bins, "Equal-frequency bins")->capture_default_str()->check(CLI::Range(2, 255));
        s->add_option("--out", intent.out, "Output JSON")->required()->type_name("PATH");
    };
    auto labelled_dataset = [&](Run& run) {
        auto fv = features::parse_feature_matrix(run.read(intent.matrix));
        auto d = classify::make_dataset(fv, features::parse_feature_set(intent.feature_set));
        if (d.size() == 0) throw ValidationError("feature matrix has no labelled rows");
        return d;
    };
    auto* s_train = sub("train-intent", "Train an intent classifier");
    add_intent_options(s_train);
    s_train->callback([&] {
        active = s_train;
        action = [&] {
            Run run("train-intent", seed);
            auto kind = parse_kind(intent.classifier);
            auto d = labelled_dataset(run);
            classify::SelectionTrace trace;
            auto model = classify::train(kind, d, {intent.bins}, &trace);
            for (const auto& w : trace.warnings) log(LogLevel::Warn, w);
            run.write(intent.out, classify::to_json(model).dump(1) + "\n");
            run.record_flags(*s_train);
            run.write_manifest(manifest_path_for(intent.out));
        };
    });
    auto* s_eval = sub("eval-intent", "Cross-validate an intent classifier");
    add_intent_options(s_eval);
    s_eval->add_option("--cv", intent.cv, "loo or kfold:N")->capture_default_str();
    s_eval->callback([&] {
        active = s_eval;
        action = [&] {
            Run run("eval-intent", seed);
            auto kind = parse_kind(intent.classifier);
            auto scheme = classify::CvScheme::parse(intent.cv);
            scheme.seed = seed;
            auto d = labelled_dataset(run);
            auto ev = classify::evaluate_classifier(kind, d, scheme, {intent.bins});
            json j{{"classifier", intent.classifier},
                   {"features", intent.feature_set},
                   {"cv", intent.cv},
                   {"metrics", classify::to_json(ev.metrics)}};
            run.write(intent.out, j.dump(2) + "\n");
            run.record_flags(*s_eval);
            run.write_manifest(manifest_path_for(intent.out));
        };
    });

    // predict / sensitivity ---------------------------------------------------
    struct {
        ContextOptions ctx;
        std::string trajectories, methods = "i-i,i-i-w,u-u", out, csv;
        std::size_t n_test = 325, k = 10, neighbors = 10, n_max = 20;
    } pred;
    auto add_pred_options = [&](CLI::App* s) {
        add_context_options(s, pred.ctx);
        s->add_option("--trajectories", pred.trajectories, "Trajectories JSONL")->required()->type_name("PATH");
        s->add_option("--methods", pred.methods, "Comma-separated i-i, i-i-w, u-u")->capture_default_str();
        s->add_option("--n-test", pred.n_test, "Test trajectories to partition")->capture_default_str();
        s->add_option("--k", pred.k, "Predictions per trajectory")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--neighbors", pred.neighbors, "User-user neighbourhood size")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--out", pred.out, "Output file")->required()->type_name("PATH");
    };
    auto rank = [&](Run& run, std::vector<Trajectory>& training) {
        auto [dep, k] = load_context(run, pred.ctx);
        auto trajs = ingest::parse_trajectories(run.read(pred.trajectories));
        auto setup = pipeline::make_locpred_setup(trajs, dep, k, pred.n_test, seed);
        log(LogLevel::Info, std::to_string(setup.tests.size()) + " test trajectories, " + std::to_string(setup.training.size()) + " training");
        for (const auto& t : setup.tests)
            if (t.partition.fallback) log(LogLevel::Warn, t.trajectory_id + ": first query AP not on trajectory, nearest hop used");
        std::vector<std::string> ids(dep.ap_ids.begin(), dep.ap_ids.end());
        auto methods = parse_methods(pred.methods);
        auto rankings = locpred::rank_test_cases(ids, setup.training, setup.tests, methods, {pred.neighbors});
        training = std::move(setup.training);
        return std::make_pair(std::move(rankings), std::move(ids));
    };
    auto* s_pred = sub("predict", "Rank next locations for partitioned test trajectories");
    add_pred_options(s_pred);
    s_pred->callback([&] {
        active = s_pred;
        action = [&] {
            Run run("predict", seed);
            std::vector<Trajectory> training;
            auto [rankings, ids] = rank(run, training);
            run.write(pred.out, locpred::serialize_prediction_report(rankings, pred.k));
            run.record_flags(*s_pred);
            run.write_manifest(manifest_path_for(pred.out));
        };
    });
    auto* s_sens = sub("sensitivity", "Accuracy@k after removing the n most popular APs");
    add_pred_options(s_sens);
    s_sens->add_option("--n-max", pred.n_max, "Largest number of popular APs removed")->capture_default_str();
    s_sens->add_option("--csv", pred.csv, "Plot-ready CSV")->type_name("PATH");
    s_sens->callback([&] {
        active = s_sens;
        action = [&] {
            Run run("sensitivity", seed);
            std::vector<Trajectory> training;
            auto [rankings, ids] = rank(run, training);
            auto pop = evalkit::popularity(training, ids);
            std::vector<std::size_t> ns;
            for (std::size_t n = 0; n <= pred.n_max; ++n) ns.push_back(n);
            auto reports = evalkit::build_reports(rankings, pop, pred.k, ns);
            run.write(pred.out, evalkit::serialize_reports(reports));
            if (!pred.csv.empty()) run.write(pred.csv, evalkit::reports_to_csv(reports));
            run.record_flags(*s_sens);
            run.write_manifest(manifest_path_for(pred.out));
        };
    });

    // eval-predict ------------------------------------------------------------
    struct {
        std::string predictions, out, csv;
    } evp;
    auto* s_evp = sub("eval-predict", "Accuracy@k and MRR of a prediction report");
    s_evp->add_option("--predictions", evp.predictions, "Prediction report JSONL")->required()->type_name("PATH");
    s_evp->add_option("--out", evp.out, "Metrics JSON")->required()->type_name("PATH");
    s_evp->add_option("--csv", evp.csv, "Plot-ready CSV")->type_name("PATH");
    s_evp->callback([&] {
        active = s_evp;
        action = [&] {
            Run run("eval-predict", seed);
            auto text = run.read(evp.predictions);
            auto rankings = locpred::parse_prediction_report(text);
            if (rankings.empty()) throw ValidationError("prediction report is empty");
            std::size_t k = 0;
            for (const auto& line : split(text, '\n'))
                if (!trim(line).empty()) k = std::max(k, json::parse(line).at("k").get<std::size_t>());
            auto reports = evalkit::build_reports(rankings, {}, k, {});
            run.write(evp.out, evalkit::serialize_reports(reports));
            if (!evp.csv.empty()) run.write(evp.csv, evalkit::reports_to_csv(reports));
            run.record_flags(*s_evp);
            run.write_manifest(manifest_path_for(evp.out));
        };
    });

    // validate ----------------------------------------------------------------
    struct {
        std::string floorplan, category_map;
    } val;
    auto* s_val = sub("validate", "Check a floorplan (and optionally a category map)");
    s_val->add_option("--floorplan", val.floorplan, "Floorplan JSON")->required()->type_name("PATH");
    s_val->add_option("--category-map", val.category_map, "Category map JSON")->type_name("PATH");
    s_val->callback([&] {
        active = s_val;
        action = [&] {
            Run run("validate", seed);
            auto report = validate_deployment(read_floorplan(run, val.floorplan));
            std::vector<std::string> problems = report.violations;
            if (!val.category_map.empty())
                for (auto& p : read_category_map(run, val.category_map).problems()) problems.push_back(std::move(p));
            for (const auto& p : problems) std::cout << p << "\n";
            if (!problems.empty()) throw ValidationError(std::to_string(problems.size()) + " problem(s) found");
            std::cout << "ok\n";
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        if (action) action();
        return 0;
    } catch (const IoError& e) {
        log(LogLevel::Error, e.what());
        return 2;
    } catch (const ValidationError& e) {
        log(LogLevel::Error, e.what());
        return 1;
    } catch (const json::exception& e) {
        log(LogLevel::Error, std::string("bad JSON input: ") + e.what());
        return 1;
    } catch (const std::exception& e) {
        log(LogLevel::Error, std::string(active ? active->get_name() + ": " : "") + e.what());
        return 1;
    }
}

inline int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"cpctx"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace cpctx::cli
