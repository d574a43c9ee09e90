// meanrank: command-line front end.
//
//   meanrank prepare      --data DIR --out DIR [--split test] [--mode standard|unseen]
//   meanrank split-unseen --data DIR --out DIR [--seed N] [--valid-fraction F] [--test-fraction F]
//   meanrank score        --data DIR (--logits FILE | --scorer KIND) --out CSV [--top-k K]
//   meanrank evaluate     --data DIR (--logits FILE | --scorer KIND) --out DIR [--seeds 0,1,2]
//   meanrank bench        [--entities 1000,10000,100000] [--out CSV]
//
// Exit status: 0 ok, 1 bad input or usage, 2 internal error.

#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "meanrank/bench.hpp"
#include "meanrank/error.hpp"
#include "meanrank/evaluation.hpp"
#include "meanrank/kernels.hpp"
#include "meanrank/mlmt.hpp"
#include "meanrank/pipeline.hpp"

namespace fs = std::filesystem;
using namespace meanrank;

namespace {

struct DatasetArgs {
    fs::path dir;
    std::string names = "auto";
};

struct EngineArgs {
    std::string vocab, catalog, strings;

    TokenizerOptions options() const {
        TokenizerOptions o;
        if (!vocab.empty()) o.vocab = vocab;
        if (!catalog.empty()) o.catalog = catalog;
        if (!strings.empty()) o.strings = strings;
        return o;
    }
};

void add_dataset_options(CLI::App* cmd, DatasetArgs& args) {
    cmd->add_option("--data", args.dir, "Dataset directory (train/valid/test/entities/relations .tsv)")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd->add_option("--names", args.names, "Entity names: auto, synset or verbatim")
        ->check(CLI::IsMember({"auto", "synset", "verbatim"}));
}

void add_engine_options(CLI::App* cmd, EngineArgs& args) {
    cmd->add_option("--vocab", args.vocab, "Vocabulary file (4 reserved lines, then one token per line)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--catalog", args.catalog, "Pretokenized entity catalog (JSON-lines) from the model side")
        ->check(CLI::ExistingFile);
    cmd->add_option("--strings", args.strings, "Pretokenized strings (JSON-lines) matching --catalog")
        ->check(CLI::ExistingFile);
}

KnowledgeGraph load(const DatasetArgs& args) {
    LoadOptions options;
    options.naming = args.names == "synset"     ? EntityNaming::synset
                     : args.names == "verbatim" ? EntityNaming::verbatim
                                                : EntityNaming::automatic;
    std::vector<std::string> warnings;
    KnowledgeGraph kg = load_dataset_directory(args.dir, options, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return kg;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items) {
    std::vector<std::uint64_t> seeds;
    for (const auto& item : items) {
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("bad seed '" + item + "'");
        }
    }
    if (seeds.empty()) throw InputError("at least one seed is required");
    return seeds;
}

std::size_t default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-likelihood link prediction engine"};
    app.require_subcommand(1);

    DatasetArgs data;
    EngineArgs engine_args;
    std::size_t max_seq_len = 512;
    std::string split_name = "test", mode_name = "standard";
    std::size_t threads = default_threads();

    // prepare
    auto* prepare = app.add_subcommand("prepare", "Emit prompts, catalog, vocabulary and strings for a split");
    fs::path prepare_out;
    bool no_pad = false;
    add_dataset_options(prepare, data);
    add_engine_options(prepare, engine_args);
    prepare->add_option("--out", prepare_out, "Output directory")->required();
    prepare->add_option("--split", split_name)->check(CLI::IsMember({"train", "valid", "test"}));
    prepare->add_option("--mode", mode_name)->check(CLI::IsMember({"standard", "unseen"}));
    prepare->add_option("--max-seq-len", max_seq_len)->check(CLI::PositiveNumber);
    prepare->add_flag("--no-pad", no_pad, "Do not right-pad prompts to --max-seq-len");

    // split-unseen
    auto* split_cmd = app.add_subcommand("split-unseen", "Write an unseen-entity split of a dataset");
    fs::path split_out;
    SplitSpec split_spec;
    add_dataset_options(split_cmd, data);
    split_cmd->add_option("--out", split_out, "Output dataset directory")->required();
    split_cmd->add_option("--seed", split_spec.seed);
    split_cmd->add_option("--valid-fraction", split_spec.valid_fraction);
    split_cmd->add_option("--test-fraction", split_spec.test_fraction);

    // score and evaluate share their table source options
    std::string logits_path, scorer_name;
    auto add_source_options = [&](CLI::App* cmd) {
        auto* logits = cmd->add_option("--logits", logits_path, "MLMT logit-table file")->check(CLI::ExistingFile);
        auto* scorer = cmd->add_option("--scorer", scorer_name, "Built-in scorer: constant, frequency or random")
                           ->check(CLI::IsMember({"constant", "frequency", "random"}));
        logits->excludes(scorer);
        scorer->excludes(logits);
    };

    auto* score_cmd = app.add_subcommand("score", "Write the best-scoring entities of every query");
    fs::path score_out, emit_logits;
    std::size_t top_k = 10;
    std::uint64_t score_seed = 0;
    add_dataset_options(score_cmd, data);
    add_engine_options(score_cmd, engine_args);
    add_source_options(score_cmd);
    score_cmd->add_option("--out", score_out, "Output CSV")->required();
    score_cmd->add_option("--top-k", top_k)->check(CLI::PositiveNumber);
    score_cmd->add_option("--seed", score_seed, "Seed for the random scorer");
    score_cmd->add_option("--split", split_name)->check(CLI::IsMember({"train", "valid", "test"}));
    score_cmd->add_option("--mode", mode_name)->check(CLI::IsMember({"standard", "unseen"}));
    score_cmd->add_option("--emit-logits", emit_logits, "Also write the built-in scorer's tables as MLMT");
    score_cmd->add_option("--threads", threads)->check(CLI::PositiveNumber);

    auto* eval_cmd = app.add_subcommand("evaluate", "Filtered, tie-randomized ranking metrics");
    fs::path eval_out;
    std::vector<std::string> seed_items{"0"};
    std::size_t dump_topk = 0;
    bool unfiltered = false;
    SplitSpec resplit_spec;
    add_dataset_options(eval_cmd, data);
    add_engine_options(eval_cmd, engine_args);
    add_source_options(eval_cmd);
    eval_cmd->add_option("--out", eval_out, "Output directory")->required();
    eval_cmd->add_option("--seeds", seed_items, "Seeds, comma separated")->delimiter(',');
    eval_cmd->add_option("--split", split_name)->check(CLI::IsMember({"valid", "test"}));
    eval_cmd->add_option("--mode", mode_name)->check(CLI::IsMember({"standard", "unseen"}));
    eval_cmd->add_option("--dump-topk", dump_topk, "Write the K best candidates per query to topk.txt");
    eval_cmd->add_flag("--raw", unfiltered, "Rank against all entities (no filtering)");
    eval_cmd->add_option("--valid-fraction", resplit_spec.valid_fraction,
                         "Unseen mode without split.json: held-out validation fraction per seed");
    eval_cmd->add_option("--test-fraction", resplit_spec.test_fraction,
                         "Unseen mode without split.json: held-out test fraction per seed");
    eval_cmd->add_option("--max-seq-len", max_seq_len)->check(CLI::PositiveNumber);
    eval_cmd->add_option("--threads", threads)->check(CLI::PositiveNumber);

    auto* bench_cmd = app.add_subcommand("bench", "Per-entity scoring and ranking time");
    BenchConfig bench;
    fs::path bench_out;
    std::string kernel = "auto";
    bench_cmd->add_option("--entities", bench.entity_counts, "Entity counts, comma separated")->delimiter(',');
    bench_cmd->add_option("--l-max", bench.l_max)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--vocab", bench.vocab)->check(CLI::Range(std::size_t{5}, std::size_t{1} << 30));
    bench_cmd->add_option("--queries", bench.queries, "Minimum queries per entity count (0: empty report)");
    bench_cmd->add_option("--min-seconds", bench.min_seconds);
    bench_cmd->add_option("--seed", bench.seed);
    bench_cmd->add_option("--out", bench_out, "CSV output (default: stdout only)");
    bench_cmd->add_option("--kernel", kernel)->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const PromptOptions prompt_options{max_seq_len, !no_pad};

        if (*prepare) {
            const KnowledgeGraph kg = load(data);
            const Engine engine = make_engine(kg, engine_args.options());
            const auto queries = select_queries(kg, parse_split_name(split_name), parse_eval_mode(mode_name));
            fs::create_directories(prepare_out);
            {
                auto out = open_output(prepare_out / "prompts.jsonl");
                write_prompts_jsonl(out, kg, engine, queries, prompt_options);
            }
            save_catalog_jsonl(engine.catalog, prepare_out / "catalog.jsonl");
            engine.vocabulary().save(prepare_out / "vocab.txt");
            {
                auto out = open_output(prepare_out / "strings.jsonl");
                write_strings_jsonl(out, kg, *engine.tokenizer);
            }
            write_logit_manifest(prepare_out / "manifest.json",
                                 MlmtDims{static_cast<std::uint32_t>(engine.catalog.vocab_size()),
                                          static_cast<std::uint32_t>(engine.catalog.max_length())},
                                 kg, queries);
            std::cout << queries.size() << " prompts, " << engine.catalog.size() << " entities, l_max "
                      << engine.catalog.max_length() << ", vocabulary " << engine.vocabulary().size() << '\n';
        } else if (*split_cmd) {
            const KnowledgeGraph kg = load(data);
            const KnowledgeGraph split = make_unseen_split(kg, split_spec);
            write_dataset_directory(split, split_out);
            std::cout << "train " << split.train().size() << ", valid " << split.valid().size() << ", test "
                      << split.test().size() << " triples; " << split.unseen()->valid_entities.size()
                      << " validation and " << split.unseen()->test_entities.size() << " test entities held out\n";
        } else if (*score_cmd || *eval_cmd) {
            if (logits_path.empty() && scorer_name.empty()) throw InputError("one of --logits or --scorer is required");
            const KnowledgeGraph kg = load(data);
            const Engine engine = make_engine(kg, engine_args.options());
            const SplitName split = parse_split_name(split_name);
            const EvalMode mode = parse_eval_mode(mode_name);

            EvalSettings settings;
            settings.threads = threads;
            settings.filtered = !unfiltered;

            if (*score_cmd) {
                settings.seeds = {score_seed};
                settings.dump_topk = top_k;
                const auto queries = select_queries(kg, split, mode);
                EvalRun run;
                if (!logits_path.empty()) {
                    if (!emit_logits.empty()) throw InputError("--emit-logits only applies to built-in scorers");
                    run = evaluate_logit_file(kg, engine.catalog, queries, logits_path, settings);
                } else {
                    const auto source = make_builtin_scorer(parse_builtin_scorer(scorer_name), kg, engine.catalog);
                    run = evaluate_queries(kg, engine.catalog, queries, *source, settings);
                    if (!emit_logits.empty()) {
                        const MlmtDims dims{static_cast<std::uint32_t>(engine.catalog.vocab_size()),
                                            static_cast<std::uint32_t>(engine.catalog.max_length())};
                        MlmtWriter writer(emit_logits, dims);
                        std::vector<float> scratch;
                        for (const Query& q : queries) writer.write(source->table_for(q, score_seed, scratch));
                        writer.close();
                        write_logit_manifest(manifest_path_for(emit_logits), dims, kg, queries);
                    }
                }
                auto out = open_output(score_out);
                out << "query_id,direction,position,entity,surface,score\n";
                for (const auto& trace : run.traces) {
                    for (std::size_t k = 0; k < trace.top.size(); ++k) {
                        const Entity& e = kg.entity(trace.top[k].entity);
                        nlohmann::json surface = e.surface;  // CSV-safe quoting via JSON string escaping
                        out << trace.query.id << ',' << to_string(trace.query.direction) << ',' << k + 1 << ','
                            << e.key << ',' << surface.dump() << ',' << trace.top[k].score << '\n';
                    }
                }
                std::cout << queries.size() << " queries scored\n";
            } else {
                settings.seeds = parse_seeds(seed_items);
                settings.dump_topk = dump_topk;
                EvalRun run;
                if (mode == EvalMode::unseen && !kg.unseen()) {
                    if (scorer_name.empty()) {
                        throw InputError("unseen mode with --logits needs a dataset written by split-unseen");
                    }
                    run = evaluate_with_resplit(kg, engine, parse_builtin_scorer(scorer_name), resplit_spec, split,
                                                settings);
                } else {
                    const auto queries = select_queries(kg, split, mode);
                    if (!logits_path.empty()) {
                        const auto manifest = manifest_path_for(logits_path);
                        if (fs::exists(manifest)) {
                            for (const auto& entry : read_logit_manifest(manifest)) {
                                const auto h = kg.find_entity(entry.head), t = kg.find_entity(entry.tail);
                                const auto r = kg.find_relation(entry.relation);
                                if (!h || !t || !r ||
                                    query_id(Triple{*h, *r, *t}, entry.direction) != entry.query_id) {
                                    throw InputError(manifest.string() + ": query " +
                                                     std::to_string(entry.query_id) +
                                                     " does not match this dataset");
                                }
                            }
                        }
                        run = evaluate_logit_file(kg, engine.catalog, queries, logits_path, settings);
                    } else {
                        const auto source =
                            make_builtin_scorer(parse_builtin_scorer(scorer_name), kg, engine.catalog);
                        run = evaluate_queries(kg, engine.catalog, queries, *source, settings);
                    }
                }
                fs::create_directories(eval_out);
                {
                    auto out = open_output(eval_out / "report.json");
                    auto report = to_json(run.report);
                    report["split"] = split_name;
                    report["mode"] = mode_name;
                    report["filtered"] = settings.filtered;
                    out << report.dump(2) << '\n';
                }
                for (std::size_t s = 0; s < settings.seeds.size(); ++s) {
                    auto out = open_output(eval_out / ("ranks_seed" + std::to_string(settings.seeds[s]) + ".csv"));
                    write_ranks_csv(out, run.ranks[s]);
                }
                if (dump_topk > 0) {
                    auto out = open_output(eval_out / "topk.txt");
                    write_topk_dump(out, kg, engine, run.traces, prompt_options);
                }
                std::cout << to_json(run.report).dump(2) << '\n';
            }
        } else if (*bench_cmd) {
            if (kernel != "auto") {
                const auto isa = kernel == "avx2" ? kernels::Isa::avx2 : kernels::Isa::scalar;
                if (!kernels::cpu_supports(isa)) throw InputError("this CPU cannot run the " + kernel + " kernels");
                kernels::set_active_isa(isa);
            }
            const auto rows = run_bench(bench);
            write_bench_table(std::cout, rows);
            if (!bench_out.empty()) {
                auto out = open_output(bench_out);
                write_bench_csv(out, rows);
            }
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
