// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/cli.hpp"

#include <CLI11.hpp>
#include <pthread.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "steerguard/binary_io.hpp"
#include "steerguard/bundle.hpp"
#include "steerguard/dataset.hpp"
#include "steerguard/digest.hpp"
#include "steerguard/embedding.hpp"
#include "steerguard/error.hpp"
#include "steerguard/eval.hpp"
#include "steerguard/identifier.hpp"
#include "steerguard/llm_client.hpp"
#include "steerguard/mlp_io.hpp"
#include "steerguard/pipeline.hpp"
#include "steerguard/random.hpp"
#include "steerguard/service.hpp"
#include "steerguard/steb_io.hpp"
#include "steerguard/steering.hpp"

namespace steerguard::cli {
namespace {

namespace fs = std::filesystem;

void emit_json(const nlohmann::json& j, const std::optional<fs::path>& path, std::ostream& out) {
    const auto text = j.dump(2) + "\n";
    if (path) {
        write_file(*path, text);
    } else {
        out << text;
    }
}

std::set<std::size_t> to_set(const std::vector<std::size_t>& v) {
    return {v.begin(), v.end()};
}

ConceptBlacklist blacklist_from(const std::optional<fs::path>& file, const std::vector<std::string>& concepts) {
    if (file) {
        std::vector<std::string> lines;
        std::istringstream in(read_file(*file));
        for (std::string line; std::getline(in, line);) {
            if (const auto hash = line.find('#'); hash != std::string::npos) {
                line.erase(hash);
            }
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                lines.push_back(line);
            }
        }
        return build_blacklist(lines);
    }
    if (!concepts.empty()) {
        return build_blacklist(concepts);
    }
    return default_blacklist();
}

PairSet load_pair_set(const fs::path& pairs_path, const fs::path& embeddings_path) {
    const auto pairs = load_term_pairs(pairs_path);
    const auto table = load_embedding_table(embeddings_path);
    const TableEmbedder embedder(table);
    const auto embedded = assemble_steer_dataset(pairs, embedder);
    return PairSet(embedded);
}

// Guard and scan accept STSQ1 sequence files or STEB tables; a table is treated as one
// single-token sequence per record and written back as a table.
struct GuardInput {
    std::optional<EmbeddingTable> table;
    std::vector<EmbeddingSequence> sequences;
    std::size_t dimension = 0;
};

GuardInput load_guard_input(const fs::path& path) {
    const auto bytes = read_file(path);
    GuardInput input;
    if (bytes.starts_with(kStebMagic)) {
        input.table = decode_embedding_table(bytes);
        input.dimension = input.table->dimension();
        for (const auto& r : input.table->records()) {
            input.sequences.emplace_back(std::vector<std::string>{r.text}, std::vector<EmbeddingVector>{r.embedding});
        }
    } else {
        input.sequences = decode_sequences(bytes, &input.dimension);
    }
    return input;
}

struct PolicyFlags {
    std::optional<double> epsilon;
    std::optional<double> threshold;
    std::vector<std::size_t> windows;
    std::optional<std::string> pooling;
    std::optional<std::string> scope;
    bool verify = false;

    void add_to(CLI::App& app, bool with_steering) {
        app.add_option("--threshold", threshold, "flag threshold in (0,1)");
        app.add_option("--windows", windows, "window sizes, e.g. 1,2,3")->delimiter(',');
        app.add_option("--pooling", pooling, "mean|max");
        if (with_steering) {
            app.add_option("--epsilon", epsilon, "steering intensity in [0,1]");
            app.add_option("--scope", scope, "flagged-spans|whole-sequence");
            app.add_flag("--verify", verify, "re-scan the steered output");
        }
    }

    void apply(GuardPolicy& policy) const {
        if (epsilon) {
            policy.epsilon = *epsilon;
        }
        if (threshold) {
            policy.threshold = *threshold;
        }
        if (!windows.empty()) {
            policy.window_sizes = to_set(windows);
        }
        if (pooling) {
            policy.pooling = parse_pooling(*pooling);
        }
        if (scope) {
            policy.scope = parse_steer_scope(*scope);
        }
        if (verify) {
            policy.verify = true;
        }
        policy.validate();
    }
};

struct Options {
    std::uint64_t seed = 0;

    // synth-table / synth-sequences
    std::size_t n_per_class = 500;
    std::size_t dim = 16;
    double separation = 8.0;
    std::size_t count = 10;
    std::size_t tokens = 6;

    // gen-data
    std::optional<fs::path> fixture;
    std::optional<std::string> endpoint;
    std::string model = "gpt-4o-mini";
    int timeout_ms = 30000;
    int retries = 2;
    double temperature = 0.7;
    std::size_t parallelism = 4;
    fs::path corpus;
    std::size_t corpus_size = 500;
    std::optional<fs::path> blacklist;
    std::vector<std::string> concepts;
    std::size_t terms_per_concept = 200;
    std::vector<std::size_t> windows{1, 2, 3};
    std::optional<double> balance_ratio;
    std::optional<fs::path> embeddings;
    std::size_t hash_dim = 0;
    fs::path out_dir;
    std::optional<fs::path> record_fixture;

    // train-identifier
    fs::path data;
    TrainConfig train;
    std::vector<std::size_t> hidden{256, 64};
    double holdout = 0.0;
    std::optional<fs::path> log_path;

    // train-steer
    fs::path pairs;
    std::string method = "closed-form";
    std::optional<double> lambda;
    double epsilon = 0.9;
    SteerConfig steer;

    // shared
    fs::path out;
    std::optional<fs::path> out_opt;
    std::optional<fs::path> csv;
    fs::path input;
    fs::path bundle;
    std::optional<fs::path> model_path;
    std::optional<fs::path> steer_path;
    std::optional<fs::path> bundle_opt;
    std::optional<fs::path> report;
    double threshold = 0.5;
    std::size_t k = 2;
    PolicyFlags policy;

    // bundle pack
    fs::path identifier_path;
    fs::path steer_file;
    std::optional<fs::path> centroid_table;
    std::optional<fs::path> policy_file;

    // serve
    std::optional<fs::path> config;
    std::optional<std::string> bind;
    std::optional<std::size_t> max_body_bytes;
    std::optional<std::size_t> max_parallel;
    std::optional<std::string> log_level;
};

int cmd_synth_table(const Options& o, std::ostream& out) {
    const auto table = synth_cluster_table(o.seed, o.n_per_class, o.dim, o.separation);
    save_embedding_table(table, o.out);
    out << "wrote " << table.size() << " records (D=" << table.dimension() << ") to " << o.out.string() << "\n";
    return kExitOk;
}

int cmd_synth_sequences(const Options& o, std::ostream& out) {
    if (o.count == 0 || o.tokens == 0 || o.dim == 0) {
        throw Error(ErrorKind::kInvalidArgument, "count, tokens and dim must be >= 1");
    }
    Rng rng(o.seed);
    std::vector<EmbeddingSequence> seqs;
    for (std::size_t s = 0; s < o.count; ++s) {
        std::vector<std::string> toks;
        std::vector<EmbeddingVector> vecs;
        for (std::size_t t = 0; t < o.tokens; ++t) {
            std::vector<float> v(o.dim);
            for (auto& x : v) {
                x = static_cast<float>(rng.normal());
            }
            toks.push_back("tok" + std::to_string(t));
            vecs.push_back(EmbeddingVector::from_floats(v));
        }
        seqs.emplace_back(std::move(toks), std::move(vecs));
    }
    save_sequences(seqs, o.dim, o.out);
    out << "wrote " << seqs.size() << " sequences to " << o.out.string() << "\n";
    return kExitOk;
}

int cmd_gen_data(const Options& o, std::ostream& out, std::ostream& err) {
    LlmClientConfig llm;
    llm.fixture_path = o.fixture;
    llm.endpoint = o.endpoint;
    llm.model = o.model;
    llm.timeout = std::chrono::milliseconds(o.timeout_ms);
    llm.retries = o.retries;
    llm.temperature = o.temperature;
    llm.parallelism = o.parallelism;
    llm.validate();
    const auto client = make_llm_client(llm);
    const auto blacklist = blacklist_from(o.blacklist, o.concepts);

    std::unique_ptr<Embedder> embedder;
    std::optional<EmbeddingTable> emb_table;
    if (o.embeddings) {
        emb_table = load_embedding_table(*o.embeddings);
        embedder = std::make_unique<TableEmbedder>(*emb_table);
    } else if (o.hash_dim > 0) {
        embedder = std::make_unique<HashingEmbedder>(o.hash_dim, o.seed);
    } else {
        throw Error(ErrorKind::kInvalidArgument, "gen-data needs --embeddings or --hash-dim");
    }

    ResponseLog log;
    std::vector<UnsafeTerm> unsafe;
    std::vector<TermPair> pairs;
    nlohmann::json per_concept = nlohmann::json::object();
    for (const auto& concept_name : blacklist.concepts()) {
        try {
            const auto terms = generate_unsafe_terms(*client, blacklist, concept_name, o.terms_per_concept, &log);
            const auto safe = generate_safe_counterparts(*client, terms.terms, concept_name, &log, llm.parallelism);
            for (const auto& t : terms.terms) {
                unsafe.push_back({t, concept_name});
            }
            pairs.insert(pairs.end(), safe.pairs.begin(), safe.pairs.end());
            per_concept[concept_name] = {{"unsafe_terms", terms.terms.size()},
                                         {"requests", terms.requests},
                                         {"pairs", safe.pairs.size()},
                                         {"echo_dropped", safe.dropped}};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::kNotFound && e.kind() != ErrorKind::kEmptyResult) {
                throw;
            }
            err << "warning: concept \"" << concept_name << "\" skipped: " << e.what() << "\n";
            per_concept[concept_name] = {{"skipped", e.what()}};
        }
    }
    if (unsafe.empty() || pairs.empty()) {
        throw Error(ErrorKind::kEmptyResult, "no unsafe terms with safe counterparts were generated");
    }
    if (o.record_fixture) {
        log.write_fixture(*o.record_fixture);
    }

    const auto corpus = sample_corpus(load_prompt_corpus(o.corpus), o.corpus_size, o.seed);
    IdentifierDatasetOptions dopt;
    dopt.window_sizes = to_set(o.windows);
    dopt.balance_ratio = o.balance_ratio;
    dopt.seed = o.seed;
    const auto dataset = assemble_identifier_dataset(unsafe, pairs, corpus, *embedder, dopt);

    // Every phrase that appears in a pair, for train-steer.
    std::vector<PhraseRecord> phrase_records;
    std::set<std::string> seen;
    for (const auto& p : pairs) {
        if (seen.insert(p.unsafe_text).second) {
            phrase_records.push_back({p.unsafe_text, Label::kUnsafe, p.concept_name, embedder->embed(p.unsafe_text)});
        }
    }
    for (const auto& p : pairs) {
        if (seen.insert(p.safe_text).second) {
            phrase_records.push_back({p.safe_text, Label::kSafe, std::nullopt, embedder->embed(p.safe_text)});
        }
    }

    fs::create_directories(o.out_dir);
    save_term_pairs(pairs, o.out_dir / "pairs.tsv");
    save_embedding_table(dataset.table, o.out_dir / "identifier.steb");
    save_embedding_table(EmbeddingTable(embedder->dimension(), std::move(phrase_records)), o.out_dir / "phrases.steb");
    const auto& c = dataset.counts;
    const nlohmann::json summary = {
        {"concepts", per_concept},
        {"corpus_prompts", corpus.prompts.size()},
        {"pairs", pairs.size()},
        {"identifier",
         {{"unsafe_terms", c.unsafe_terms},
          {"safe_counterparts", c.safe_counterparts},
          {"corpus_windows", c.corpus_windows},
          {"duplicates_dropped", c.duplicates_dropped},
          {"subsampled_away", c.subsampled_away},
          {"unsafe_records", c.unsafe_records},
          {"safe_records", c.safe_records}}},
        {"dimension", embedder->dimension()},
    };
    write_file(o.out_dir / "summary.json", summary.dump(2) + "\n");
    out << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_train_identifier(const Options& o, std::ostream& out) {
    auto cfg = o.train;
    cfg.seed = o.seed;
    cfg.hidden = o.hidden;
    cfg.validate();
    const auto table = load_embedding_table(o.data);
    std::optional<TableSplit> split;
    if (o.holdout > 0.0) {
        split = split_table(table, o.holdout, o.seed);
    }
    const auto& train_table = split ? split->train : table;
    const auto result = train_identifier(train_table, cfg);
    save_mlp(result.params, {cfg.seed, sha256_hex(cfg.to_json())}, o.out);

    nlohmann::json summary = {
        {"records", train_table.size()},
        {"initial_loss", result.log.initial_loss},
        {"final_loss", result.log.final_loss()},
        {"epochs_run", result.log.epoch_losses.size()},
        {"stopped_early", result.log.stopped_early},
    };
    if (split) {
        const auto m = eval_identifier(result.params, split->test, 0.5);
        summary["holdout"] = identifier_metrics_json(m);
    }
    if (o.log_path) {
        write_file(*o.log_path, nlohmann::json{{"initial_loss", result.log.initial_loss},
                                               {"epoch_losses", result.log.epoch_losses},
                                               {"config", nlohmann::json::parse(cfg.to_json())}}
                                        .dump(2) +
                                    "\n");
    }
    out << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_train_steer(const Options& o, std::ostream& out) {
    const auto pairs = load_pair_set(o.pairs, *o.embeddings);
    const auto method = parse_steer_method(o.method);
    std::optional<SteerMatrix> w;
    const double lambda = o.lambda ? *o.lambda : default_ridge_lambda(pairs);
    std::size_t steps = 0;
    if (method == SteerMethod::kClosedForm) {
        w = fit_steer_closed_form(pairs, lambda);
    } else {
        auto cfg = o.steer;
        cfg.epsilon = o.epsilon;
        cfg.lambda = lambda;
        cfg.seed = o.seed;
        cfg.validate();
        auto result = train_steer_gradient(pairs, cfg);
        steps = result.loss_trace.size() - 1;
        w = std::move(result.steer);
    }
    save_steer(*w, o.epsilon, o.out);
    const nlohmann::json summary = {
        {"method", std::string(to_string(method))},
        {"pairs", pairs.size()},
        {"dimension", pairs.dimension()},
        {"lambda", lambda},
        {"loss", steer_loss(*w, pairs)},
        {"objective", steer_objective(w->matrix(), pairs, lambda)},
        {"steps", steps},
    };
    out << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_scan(const Options& o, std::ostream& out) {
    const auto bundle = load_bundle(o.bundle);
    auto policy = bundle.policy;
    o.policy.apply(policy);
    const auto input = load_guard_input(o.input);
    if (input.dimension != bundle.dimension()) {
        throw Error(ErrorKind::kDimensionMismatch, "input dimension " + std::to_string(input.dimension) +
                                                       " does not match bundle dimension " +
                                                       std::to_string(bundle.dimension()));
    }
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& seq : input.sequences) {
        reports.push_back(scan_report_json(scan_prompt(bundle.identifier, seq, policy.scan_options(), &bundle.centroids)));
    }
    emit_json({{"reports", reports}}, o.out_opt, out);
    return kExitOk;
}

int cmd_guard(const Options& o, std::ostream& out) {
    const auto bundle = load_bundle(o.bundle);
    auto policy = bundle.policy;
    o.policy.apply(policy);
    const auto input = load_guard_input(o.input);
    if (input.dimension != bundle.dimension()) {
        throw Error(ErrorKind::kDimensionMismatch, "input dimension " + std::to_string(input.dimension) +
                                                       " does not match bundle dimension " +
                                                       std::to_string(bundle.dimension()));
    }
    const auto results = guard_batch(bundle.identifier, bundle.steer, input.sequences, policy, &bundle.centroids);

    if (input.table) {
        std::vector<PhraseRecord> records;
        for (std::size_t i = 0; i < results.size(); ++i) {
            auto r = (*input.table)[i];
            r.embedding = results[i].output.vectors().front();
            records.push_back(std::move(r));
        }
        save_embedding_table(EmbeddingTable(input.dimension, std::move(records)), o.out);
    } else {
        std::vector<EmbeddingSequence> outputs;
        for (const auto& r : results) {
            outputs.push_back(r.output);
        }
        save_sequences(outputs, input.dimension, o.out);
    }

    std::size_t steered = 0;
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : results) {
        steered += r.report.verdict == Verdict::kSteered ? 1 : 0;
        reports.push_back(guard_report_json(r.report));
    }
    if (o.report) {
        write_file(*o.report, nlohmann::json{{"reports", reports}}.dump(2) + "\n");
    }
    out << "guarded " << results.size() << " sequences, " << steered << " steered -> " << o.out.string() << "\n";
    return kExitOk;
}

MlpParams load_identifier(const Options& o) {
    if (o.model_path) {
        return load_mlp(*o.model_path);
    }
    if (o.bundle_opt) {
        return load_bundle(*o.bundle_opt).identifier;
    }
    throw Error(ErrorKind::kInvalidArgument, "one of --model or --bundle is required");
}

int cmd_eval_identifier(const Options& o, std::ostream& out) {
    const auto params = load_identifier(o);
    const auto m = eval_identifier(params, load_embedding_table(o.data), o.threshold);
    if (o.csv) {
        write_file(*o.csv, identifier_records_csv(m));
    }
    emit_json(identifier_metrics_json(m), o.out_opt, out);
    return kExitOk;
}

int cmd_eval_steer(const Options& o, std::ostream& out) {
    std::optional<SteerMatrix> w;
    if (o.steer_path) {
        w = load_steer(*o.steer_path);
    } else if (o.bundle_opt) {
        w = load_bundle(*o.bundle_opt).steer;
    } else {
        throw Error(ErrorKind::kInvalidArgument, "one of --steer or --bundle is required");
    }
    const auto m = eval_steer(*w, o.epsilon, load_pair_set(o.pairs, *o.embeddings));
    if (o.csv) {
        write_file(*o.csv, steer_pairs_csv(m));
    }
    emit_json(steer_metrics_json(m), o.out_opt, out);
    return kExitOk;
}

int cmd_eval_probe(const Options& o, std::ostream& out) {
    const auto params = load_identifier(o);
    const auto probes = load_probe_file(o.input);
    const auto r = paraphrase_probe(params, probes, load_embedding_table(*o.embeddings), o.threshold);
    if (o.csv) {
        write_file(*o.csv, probe_csv(r));
    }
    emit_json(probe_report_json(r), o.out_opt, out);
    return kExitOk;
}

int cmd_export_projection(const Options& o, std::ostream& out) {
    const auto table = load_embedding_table(o.data);
    std::optional<SteerMatrix> w;
    if (o.steer_path) {
        w = load_steer(*o.steer_path);
    }
    std::vector<TaggedVector> points;
    for (const auto& r : table.records()) {
        points.push_back({r.embedding, r.label, r.label == Label::kUnsafe ? PointTag::kUnsafe : PointTag::kSafe});
    }
    if (w) {
        for (const auto& r : table.records()) {
            if (r.label == Label::kUnsafe) {
                points.push_back({steer_embedding(*w, o.epsilon, r.embedding), Label::kUnsafe, PointTag::kSteered});
            }
        }
    }
    emit_projection(points, o.out, o.k);
    out << "wrote " << points.size() << " projected points to " << o.out.string() << "\n";
    return kExitOk;
}

int cmd_bundle_pack(const Options& o, std::ostream& out) {
    ModelBundle bundle;
    nlohmann::json mlp_meta;
    bundle.identifier = load_mlp(o.identifier_path, &mlp_meta);
    if (mlp_meta.is_object()) {
        bundle.identifier_meta = mlp_meta;
    }
    nlohmann::json steer_meta;
    bundle.steer = load_steer(o.steer_file, &steer_meta);
    if (steer_meta.is_object() && steer_meta.contains("epsilon_default")) {
        bundle.policy.epsilon = steer_meta.at("epsilon_default").get<double>();
    }
    if (o.policy_file) {
        const auto j = nlohmann::json::parse(read_file(*o.policy_file), nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorKind::kFormat, "policy file is not valid JSON");
        }
        bundle.policy.apply_json(j);
    }
    o.policy.apply(bundle.policy);
    bundle.blacklist = blacklist_from(o.blacklist, o.concepts);
    if (o.centroid_table) {
        bundle.centroids = concept_centroids(load_embedding_table(*o.centroid_table));
    }
    save_bundle(bundle, o.out);
    out << nlohmann::json{{"bundle_sha256", bundle.bundle_sha256},
                          {"identifier_sha256", bundle.identifier_sha256},
                          {"steer_sha256", bundle.steer_sha256},
                          {"dimension", bundle.dimension()}}
                   .dump(2)
        << "\n";
    return kExitOk;
}

int cmd_bundle_verify(const Options& o, std::ostream& out) {
    const auto bundle = load_bundle(o.bundle);
    out << nlohmann::json{{"status", "ok"},
                          {"version", bundle.version},
                          {"bundle_sha256", bundle.bundle_sha256},
                          {"identifier_sha256", bundle.identifier_sha256},
                          {"steer_sha256", bundle.steer_sha256},
                          {"dimension", bundle.dimension()},
                          {"policy", bundle.policy.to_json()},
                          {"blacklist", bundle.blacklist.concepts()}}
                   .dump(2)
        << "\n";
    return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
    ServiceConfig config;
    if (o.config) {
        config = load_service_config(*o.config);
    }
    apply_env_overrides(config);
    if (o.bind) {
        config = parse_service_config("bind = " + *o.bind, config);
    }
    if (o.bundle_opt) {
        config.bundle_path = *o.bundle_opt;
    }
    if (o.max_body_bytes) {
        config.max_body_bytes = *o.max_body_bytes;
    }
    if (o.max_parallel) {
        config.max_parallel = *o.max_parallel;
    }
    if (o.log_level) {
        config.log_level = *o.log_level;
    }
    if (config.bundle_path.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "no bundle given (--bundle, config file or STEERGUARD_BUNDLE)");
    }
    config.validate();

    // Signals are taken synchronously by a waiter thread; server threads inherit the mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    GuardService service(load_bundle(config.bundle_path), config);
    const int port = service.bind();
    out << "listening on " << config.host << ":" << port << std::endl;
    std::thread waiter([&service, signals] {
        int sig = 0;
        sigwait(&signals, &sig);
        service.stop();
    });
    service.listen();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"steerguard: detect unsafe concepts in prompt embeddings and steer them to safe regions"};
    app.name("steerguard");
    app.require_subcommand(1);
    app.fallthrough(false);
    Options o;

    auto* synth = app.add_subcommand("synth-table", "write a synthetic two-cluster STEB table");
    synth->add_option("--seed", o.seed)->required();
    synth->add_option("--n-per-class", o.n_per_class);
    synth->add_option("--dim", o.dim);
    synth->add_option("--separation", o.separation);
    synth->add_option("--out", o.out)->required();

    auto* synth_seq = app.add_subcommand("synth-sequences", "write random token sequences (STSQ1)");
    synth_seq->add_option("--seed", o.seed)->required();
    synth_seq->add_option("--count", o.count);
    synth_seq->add_option("--tokens", o.tokens);
    synth_seq->add_option("--dim", o.dim);
    synth_seq->add_option("--out", o.out)->required();

    auto* gen = app.add_subcommand("gen-data", "generate term pairs and the identifier dataset");
    gen->add_option("--seed", o.seed)->required();
    auto* fixture_opt = gen->add_option("--fixture", o.fixture, "offline LLM fixture file")->check(CLI::ExistingFile);
    auto* endpoint_opt = gen->add_option("--endpoint", o.endpoint, "chat-completions URL");
    fixture_opt->excludes(endpoint_opt);
    gen->add_option("--model", o.model);
    gen->add_option("--timeout-ms", o.timeout_ms);
    gen->add_option("--retries", o.retries);
    gen->add_option("--temperature", o.temperature);
    gen->add_option("--parallelism", o.parallelism);
    gen->add_option("--corpus", o.corpus, "one prompt per line")->required()->check(CLI::ExistingFile);
    gen->add_option("--corpus-size", o.corpus_size);
    gen->add_option("--blacklist", o.blacklist, "one concept per line")->check(CLI::ExistingFile);
    gen->add_option("--concepts", o.concepts)->delimiter(',');
    gen->add_option("--count", o.terms_per_concept, "unsafe terms per concept");
    gen->add_option("--windows", o.windows)->delimiter(',');
    gen->add_option("--balance-ratio", o.balance_ratio);
    gen->add_option("--embeddings", o.embeddings, "STEB table used as the phrase embedder");
    gen->add_option("--hash-dim", o.hash_dim, "use the hashing embedder with this dimension");
    gen->add_option("--out-dir", o.out_dir)->required();
    gen->add_option("--record-fixture", o.record_fixture, "write all LLM responses as a fixture");

    auto* train_id = app.add_subcommand("train-identifier", "train the phrase identifier MLP");
    train_id->add_option("--data", o.data)->required()->check(CLI::ExistingFile);
    train_id->add_option("--seed", o.seed)->required();
    train_id->add_option("--out", o.out)->required();
    train_id->add_option("--epochs", o.train.epochs);
    train_id->add_option("--batch-size", o.train.batch_size);
    train_id->add_option("--lr", o.train.learning_rate);
    train_id->add_option("--momentum", o.train.momentum);
    train_id->add_option("--hidden", o.hidden)->delimiter(',');
    train_id->add_option("--patience", o.train.early_stop_patience);
    train_id->add_flag("--class-weighting", o.train.class_weighting);
    train_id->add_option("--holdout", o.holdout, "fraction held out for evaluation");
    train_id->add_option("--log", o.log_path, "write the per-epoch loss log");

    auto* train_st = app.add_subcommand("train-steer", "fit the steering matrix W");
    train_st->add_option("--pairs", o.pairs, "TSV unsafe_text, safe_text, concept")->required()->check(CLI::ExistingFile);
    train_st->add_option("--embeddings", o.embeddings, "STEB table holding every pair phrase")->required();
    train_st->add_option("--method", o.method, "closed-form|gradient");
    train_st->add_option("--lambda", o.lambda, "ridge strength (default 1e-3 trace(S_uu)/D)");
    train_st->add_option("--epsilon", o.epsilon, "default steering intensity stored with W");
    train_st->add_option("--seed", o.seed);
    train_st->add_option("--epochs", o.steer.epochs);
    train_st->add_option("--lr", o.steer.learning_rate);
    train_st->add_option("--out", o.out)->required();

    auto* scan = app.add_subcommand("scan", "scan sequences and report flagged spans");
    scan->add_option("--bundle", o.bundle)->required()->check(CLI::ExistingFile);
    scan->add_option("--input", o.input, "STSQ1 sequences or STEB table")->required()->check(CLI::ExistingFile);
    scan->add_option("--out", o.out_opt, "report JSON (default stdout)");
    o.policy.add_to(*scan, false);

    auto* guard = app.add_subcommand("guard", "scan and steer sequences");
    guard->add_option("--bundle", o.bundle)->required()->check(CLI::ExistingFile);
    guard->add_option("--input", o.input, "STSQ1 sequences or STEB table")->required()->check(CLI::ExistingFile);
    guard->add_option("--out", o.out, "output file, same format as the input")->required();
    guard->add_option("--report", o.report, "guard report JSON");
    o.policy.add_to(*guard, true);

    auto* eval = app.add_subcommand("eval", "evaluate models");
    eval->require_subcommand(1);
    auto* eval_id = eval->add_subcommand("identifier", "confusion-matrix metrics on a table");
    eval_id->add_option("--model", o.model_path);
    eval_id->add_option("--bundle", o.bundle_opt);
    eval_id->add_option("--data", o.data)->required()->check(CLI::ExistingFile);
    eval_id->add_option("--threshold", o.threshold);
    eval_id->add_option("--out", o.out_opt);
    eval_id->add_option("--csv", o.csv, "per-record table");
    auto* eval_st = eval->add_subcommand("steer", "distance-to-safe before and after steering");
    eval_st->add_option("--steer", o.steer_path);
    eval_st->add_option("--bundle", o.bundle_opt);
    eval_st->add_option("--pairs", o.pairs)->required()->check(CLI::ExistingFile);
    eval_st->add_option("--embeddings", o.embeddings)->required();
    eval_st->add_option("--epsilon", o.epsilon);
    eval_st->add_option("--out", o.out_opt);
    eval_st->add_option("--csv", o.csv, "per-pair table");
    auto* eval_pr = eval->add_subcommand("probe", "flag rate under paraphrase");
    eval_pr->add_option("--model", o.model_path);
    eval_pr->add_option("--bundle", o.bundle_opt);
    eval_pr->add_option("--probes", o.input, "TSV original, paraphrase[, key]")->required()->check(CLI::ExistingFile);
    eval_pr->add_option("--embeddings", o.embeddings)->required();
    eval_pr->add_option("--threshold", o.threshold);
    eval_pr->add_option("--out", o.out_opt);
    eval_pr->add_option("--csv", o.csv, "per-original table");

    auto* proj = app.add_subcommand("export-projection", "PCA scatter CSV of a table, optionally with steered points");
    proj->add_option("--data", o.data)->required()->check(CLI::ExistingFile);
    proj->add_option("--steer", o.steer_path);
    proj->add_option("--epsilon", o.epsilon);
    proj->add_option("--k", o.k);
    proj->add_option("--out", o.out)->required();

    auto* serve = app.add_subcommand("serve", "run the HTTP guard service");
    serve->add_option("--config", o.config)->check(CLI::ExistingFile);
    serve->add_option("--bundle", o.bundle_opt);
    serve->add_option("--bind", o.bind, "host:port");
    serve->add_option("--max-body-bytes", o.max_body_bytes);
    serve->add_option("--max-parallel", o.max_parallel);
    serve->add_option("--log-level", o.log_level);

    auto* bundle = app.add_subcommand("bundle", "pack or verify a model bundle");
    bundle->require_subcommand(1);
    auto* pack = bundle->add_subcommand("pack", "combine identifier and steer weights");
    pack->add_option("--identifier", o.identifier_path)->required()->check(CLI::ExistingFile);
    pack->add_option("--steer", o.steer_file)->required()->check(CLI::ExistingFile);
    pack->add_option("--centroids", o.centroid_table, "STEB table for concept attribution");
    pack->add_option("--blacklist", o.blacklist)->check(CLI::ExistingFile);
    pack->add_option("--concepts", o.concepts)->delimiter(',');
    pack->add_option("--policy", o.policy_file, "policy JSON");
    o.policy.add_to(*pack, true);
    pack->add_option("--out", o.out)->required();
    auto* verify = bundle->add_subcommand("verify", "check every hash in a bundle");
    verify->add_option("--bundle", o.bundle)->required()->check(CLI::ExistingFile);

    if (argc > 1 && argv[1][0] != '-') {
        const auto known = app.get_subcommands([&](const CLI::App* sub) { return sub->check_name(argv[1]); });
        if (known.empty()) {
            err << "error: unknown subcommand \"" << argv[1] << "\"\n\n" << app.help();
            return kExitUsage;
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failing = &app;
        for (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); sub;
             sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().front()) {
            failing = sub;
        }
        err << failing->help();
        return kExitUsage;
    }

    try {
        if (*synth) return cmd_synth_table(o, out);
        if (*synth_seq) return cmd_synth_sequences(o, out);
        if (*gen) return cmd_gen_data(o, out, err);
        if (*train_id) return cmd_train_identifier(o, out);
        if (*train_st) return cmd_train_steer(o, out);
        if (*scan) return cmd_scan(o, out);
        if (*guard) return cmd_guard(o, out);
        if (*eval_id) return cmd_eval_identifier(o, out);
        if (*eval_st) return cmd_eval_steer(o, out);
        if (*eval_pr) return cmd_eval_probe(o, out);
        if (*proj) return cmd_export_projection(o, out);
        if (*serve) return cmd_serve(o, out);
        if (*pack) return cmd_bundle_pack(o, out);
        if (*verify) return cmd_bundle_verify(o, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace steerguard::cli
