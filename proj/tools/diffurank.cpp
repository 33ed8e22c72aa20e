// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "diffurank/io.hpp"
#include "diffurank/remote.hpp"
#include "diffurank/replay.hpp"

namespace {

using namespace diffurank;

std::shared_ptr<LogitsProvider> build_provider(const std::string& kind,
                                               const std::string& oracle_path,
                                               const std::string& replay_path,
                                               const std::string& remote_url) {
    if (kind == "oracle") {
        if (oracle_path.empty())
            throw std::runtime_error("oracle provider needs --oracle <oracle.json>");
        OracleFile oracle = load_oracle(oracle_path);
        return std::make_shared<SyntheticOracle>(oracle.config, oracle.relevance);
    }
    if (kind == "replay") {
        if (replay_path.empty())
            throw std::runtime_error("replay provider needs --replay <fixtures.jsonl>");
        return std::make_shared<ReplayProvider>(replay_path);
    }
    if (kind == "remote") return std::make_shared<RemoteProvider>(remote_url);
    throw std::runtime_error("unknown provider '" + kind + "'");
}

int cmd_rerank(const std::string& config_path, const EngineConfig& cli_cfg,
               const std::set<std::string>& cli_set,
               std::map<std::string, std::string> paths, const std::string& tag) {
    EngineConfig cfg = cli_cfg;
    if (!config_path.empty()) {
        // config supplies the base; explicitly passed flags override it
        cfg = EngineConfig::from_toml(config_path);
        if (cli_set.count("strategy")) cfg.strategy = cli_cfg.strategy;
        if (cli_set.count("provider")) cfg.provider = cli_cfg.provider;
        if (cli_set.count("k")) cfg.k = cli_cfg.k;
        if (cli_set.count("sampler_mode")) cfg.sampler_mode = cli_cfg.sampler_mode;
        if (cli_set.count("window")) cfg.window = cli_cfg.window;
        if (cli_set.count("step_size")) cfg.step_size = cli_cfg.step_size;
        if (cli_set.count("top_k")) cfg.top_k = cli_cfg.top_k;
        if (cli_set.count("seed")) cfg.seed = cli_cfg.seed;
        if (cli_set.count("jobs")) cfg.jobs = cli_cfg.jobs;
        if (cli_set.count("beta")) cfg.beta = cli_cfg.beta;
        if (cli_set.count("gamma")) cfg.gamma = cli_cfg.gamma;
        if (cli_set.count("lambda")) cfg.lambda = cli_cfg.lambda;
        if (cli_set.count("remote_url")) cfg.remote_url = cli_cfg.remote_url;
        if (cli_set.count("template_id")) cfg.template_id = cli_cfg.template_id;
        const auto kv = load_toml(config_path);
        for (const char* key : {"corpus", "queries", "candidates", "oracle", "out",
                                "trace", "replay", "record", "log"})
            if (kv.count(key) && paths[key].empty()) paths[key] = kv.at(key);
    }
    cfg.validate();
    for (const char* key : {"corpus", "queries", "candidates", "out"})
        if (paths[key].empty())
            throw std::runtime_error(std::string("missing required path --") + key);

    auto corpus = load_corpus(paths["corpus"]);
    auto queries = load_queries(paths["queries"]);
    auto candidates = load_candidates(paths["candidates"], corpus, cfg.top_k);

    std::shared_ptr<LogitsProvider> provider =
        build_provider(cfg.provider, paths["oracle"], paths["replay"], cfg.remote_url);
    if (!paths["record"].empty())
        provider = std::make_shared<RecordingProvider>(provider, paths["record"]);

    RerankJob job;
    job.strategy = parse_strategy(cfg.strategy);
    job.sampler.steps = cfg.k;
    job.sampler.mode = cfg.sampler_mode == "vanilla" ? SamplerMode::kVanilla
                                                     : SamplerMode::kConstrained;
    job.window = WindowConfig{cfg.window, cfg.step_size, cfg.top_k};
    job.template_id = cfg.template_id;

    const std::size_t nq = queries.size();
    std::vector<RankedList> results(nq);
    std::vector<std::vector<WindowTrace>> traces(nq);
    std::vector<QueryRunLog> logs(nq);
    std::vector<int> failed(nq, 0);

#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(cfg.jobs));
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::size_t qi = 0; qi < nq; ++qi) {
        const Query& q = queries[qi];
        auto it = candidates.find(q.query_id);
        if (it == candidates.end() || it->second.empty()) {
            failed[qi] = 1;
            results[qi] = RankedList{q.query_id, {}};
            continue;
        }
        try {
            RerankOutcome outcome = sliding_rerank(q, it->second, job, *provider);
            results[qi] = std::move(outcome.ranking);
            traces[qi] = std::move(outcome.traces);
            logs[qi] = std::move(outcome.log);
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            std::cerr << "warning: query " << q.query_id
                      << " failed, keeping input order: " << e.what() << '\n';
            failed[qi] = 1;
            RankedList fallback{q.query_id, {}};
            const std::size_t m = std::min(it->second.size(), cfg.top_k);
            for (std::size_t i = 0; i < m; ++i)
                fallback.entries.push_back(
                    {it->second[i].doc_id, static_cast<double>(m - i), i + 1});
            results[qi] = std::move(fallback);
        }
    }

    std::vector<RankedList> nonempty;
    for (auto& r : results)
        if (!r.entries.empty()) nonempty.push_back(std::move(r));
    write_run(nonempty, paths["out"], tag);

    if (!paths["trace"].empty()) {
        std::vector<WindowTrace> all;
        for (auto& per_query : traces)
            for (auto& tr : per_query) all.push_back(std::move(tr));
        write_traces(all, paths["trace"]);
    }
    if (!paths["log"].empty()) {
        std::ofstream out(paths["log"]);
        for (const auto& log : logs) {
            if (log.query_id.empty()) continue;
            nlohmann::json j;
            j["query_id"] = log.query_id;
            j["strategy"] = log.strategy;
            j["provider_calls"] = log.provider_calls;
            j["wall_ms"] = log.wall_ms;
            j["windows"] = log.windows;
            j["validity_flags"] = std::vector<bool>(log.validity_flags.begin(),
                                                    log.validity_flags.end());
            out << j.dump() << '\n';
        }
    }

    std::size_t nfailed = 0;
    for (int f : failed) nfailed += f;
    std::cerr << "reranked " << nq - nfailed << "/" << nq << " queries -> "
              << paths["out"] << '\n';
    return nfailed == 0 ? 0 : 1;
}

int cmd_eval(const std::string& run_path, const std::string& qrels_path,
             const std::string& metric, const std::string& compare_path, bool ttest,
             const std::string& out_path, const std::string& gain_name) {
    if (metric.rfind("ndcg@", 0) != 0)
        throw std::runtime_error("unsupported metric '" + metric + "' (use ndcg@K)");
    const std::size_t k = std::stoul(metric.substr(5));
    const GainConvention gain =
        gain_name == "linear" ? GainConvention::kLinear : GainConvention::kExponential;

    const auto runs = load_run(run_path);
    const Qrels qrels = load_qrels(qrels_path);

    std::vector<double> scores;
    std::ostringstream csv;
    csv << "query_id,metric,value\n";
    double total = 0.0;
    for (const auto& run : runs) {
        const double v = ndcg_at_k(run, qrels, k, gain);
        scores.push_back(v);
        total += v;
        csv << run.query_id << ',' << metric << ',' << v << '\n';
    }
    const double mean = runs.empty() ? 0.0 : total / static_cast<double>(runs.size());
    csv << "all," << metric << ',' << mean << '\n';
    std::cout << metric << " mean over " << runs.size() << " queries: " << mean << '\n';

    if (!compare_path.empty()) {
        const auto other = load_run(compare_path);
        if (other.size() != runs.size())
            throw std::runtime_error("--compare run has a different query set");
        std::vector<double> other_scores;
        for (const auto& run : other) other_scores.push_back(ndcg_at_k(run, qrels, k, gain));
        const double other_mean =
            std::accumulate(other_scores.begin(), other_scores.end(), 0.0) /
            static_cast<double>(other_scores.size());
        std::cout << "compare mean: " << other_mean << '\n';
        if (ttest) {
            const TTestResult r = paired_ttest(scores, other_scores);
            std::cout << "paired t-test: t=" << r.t << " p=" << r.p
                      << (r.p <= 0.05 ? " (significant at 0.05)" : "") << '\n';
        }
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << csv.str();
        std::cerr << "wrote " << out_path << '\n';
    }
    return 0;
}

int cmd_dynamics(const std::string& trace_path, std::size_t k, const std::string& out_path) {
    auto traces = load_traces(trace_path);
    const FillingDynamics dyn = filling_dynamics(traces, k);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    auto header = [&] {
        out << "matrix,step";
        for (std::size_t i = 0; i < dyn.positions; ++i) out << ",pos" << i + 1;
        out << '\n';
    };
    header();
    for (std::size_t t = 0; t < dyn.steps; ++t) {
        out << "H," << t + 1;
        for (std::size_t i = 0; i < dyn.positions; ++i) out << ',' << dyn.h(t, i);
        out << '\n';
    }
    for (std::size_t t = 0; t < dyn.steps; ++t) {
        out << "E," << t + 1;
        for (std::size_t i = 0; i < dyn.positions; ++i) out << ',' << dyn.e(t, i);
        out << '\n';
    }
    for (std::size_t t = 0; t < dyn.steps; ++t) {
        out << "P," << t + 1;
        for (std::size_t i = 0; i < dyn.positions; ++i) {
            out << ',';
            if (dyn.e(t, i) > 0) out << dyn.p(t, i);  // E=0 cells stay empty
        }
        out << '\n';
    }
    std::cerr << "wrote " << out_path << '\n';
    return 0;
}

int cmd_train_toy(const std::string& loss_name, const std::string& data_path,
                  std::size_t epochs, double lr, std::uint64_t seed,
                  const std::string& out_path, const std::string& curve_path) {
    std::vector<double> curve;
    nlohmann::json model;

    if (loss_name == "sft") {
        // denoising demo: responses are identifier sequences from the
        // teacher order, corrupted with docid_mask
        const auto instances = load_train_data(data_path);
        std::size_t max_len = 0;
        for (const auto& inst : instances)
            max_len = std::max(max_len, inst.teacher.order.size());
        const IdentifierAlphabet alphabet = IdentifierAlphabet::make_default(max_len);
        ToyPredictor predictor(max_len, alphabet.labels());

        std::mt19937_64 rng(seed);
        CorruptionConfig corr;
        corr.strategy = MaskStrategy::kDocidMask;
        std::unordered_set<std::string> labels(alphabet.labels().begin(),
                                               alphabet.labels().end());
        for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
            SftBatch batch;
            for (const auto& inst : instances) {
                std::vector<std::string> clean;
                for (std::size_t idx : inst.teacher.order)
                    clean.push_back(alphabet.label(idx));
                corr.seed = rng();
                batch.items.push_back(
                    corrupt(clean, 0, sample_noise_level(rng), corr, labels));
            }
            bool any_masked = false;
            for (const auto& item : batch.items)
                for (bool f : item.mask_flags) any_masked |= f;
            if (!any_masked) {
                curve.push_back(curve.empty() ? 0.0 : curve.back());
                continue;
            }
            const LossValue lv = sft_loss(batch, predictor);
            curve.push_back(lv.loss);
            for (std::size_t i = 0; i < predictor.logits.size(); ++i)
                predictor.logits[i] -= lr * lv.gradient[i];
        }
        model["kind"] = "sft_predictor";
        model["positions"] = predictor.positions;
        model["vocab"] = predictor.vocab;
        model["logits"] = predictor.logits;
    } else {
        const TrainLoss loss = loss_name == "ce" ? TrainLoss::kCe : TrainLoss::kRankNet;
        if (loss_name != "ce" && loss_name != "ranknet")
            throw std::runtime_error("unknown loss '" + loss_name + "'");
        const auto instances = load_train_data(data_path);
        const TrainReport report = train_toy(instances, loss, epochs, lr, seed);
        curve = report.loss_curve;
        model["kind"] = "linear_scorer";
        model["theta"] = report.scorer.theta;
    }

    {
        std::ofstream out(out_path);
        out << model.dump(2) << '\n';
    }
    {
        const std::string path = curve_path.empty() ? out_path + ".curve.csv" : curve_path;
        std::ofstream out(path);
        out << "epoch,loss\n";
        for (std::size_t e = 0; e < curve.size(); ++e) out << e + 1 << ',' << curve[e] << '\n';
    }
    std::cout << "final loss: " << (curve.empty() ? 0.0 : curve.back()) << '\n';
    return 0;
}

int cmd_gradcheck(const std::string& loss_name, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double tol = 1e-6;
    bool ok = true;

    auto run_check = [&](const std::string& name, double dev) {
        const bool pass = dev < tol;
        ok = ok && pass;
        std::cout << name << ": max relative deviation " << dev
                  << (pass ? " (ok)" : " (FAIL)") << '\n';
    };

    if (loss_name == "ce" || loss_name == "all") {
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> scores(10);
            for (double& s : scores) s = normal(rng);
            worst = std::max(worst, finite_difference_check(
                [](const std::vector<double>& p) { return ce_loss(p, 3); }, scores));
        }
        run_check("ce_loss", worst);
    }
    if (loss_name == "ranknet" || loss_name == "all") {
        TeacherRanking teacher;
        teacher.order = {2, 0, 5, 1, 7, 3, 6, 4};
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> scores(8);
            for (double& s : scores) s = normal(rng);
            worst = std::max(worst, finite_difference_check(
                [&](const std::vector<double>& p) { return ranknet_loss(p, teacher); },
                scores));
        }
        run_check("ranknet_loss", worst);
    }
    if (loss_name == "sft" || loss_name == "all") {
        SftBatch batch;
        MaskedSequence item;
        item.tokens = {"A", "B", "C", "D"};
        item.mask_flags = {true, false, true, true};
        item.prompt_len = 0;
        item.p = {0.5, 0.5, 0.7, 0.3};
        batch.items.push_back(item);
        ToyPredictor proto(4, {"A", "B", "C", "D"});
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> point(proto.logits.size());
            for (double& v : point) v = normal(rng);
            worst = std::max(worst, finite_difference_check(
                [&](const std::vector<double>& p) {
                    ToyPredictor pred = proto;
                    pred.logits = p;
                    return sft_loss(batch, pred);
                },
                point));
        }
        run_check("sft_loss", worst);
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffusion-style document reranking engine"};
    app.require_subcommand(1);

    // rerank
    auto* rerank = app.add_subcommand("rerank", "rerank candidates and write a TREC run");
    std::string config_path, tag = "diffurank";
    EngineConfig cfg;
    std::map<std::string, std::string> paths{{"corpus", ""}, {"queries", ""},
                                             {"candidates", ""}, {"oracle", ""},
                                             {"out", ""}, {"trace", ""}, {"replay", ""},
                                             {"record", ""}, {"log", ""}};
    rerank->add_option("--config", config_path, "TOML config; flags override");
    rerank->add_option("--strategy", cfg.strategy,
                       "pointwise | logits_list | perm_samp | perm_assign");
    rerank->add_option("--provider", cfg.provider, "oracle | replay | remote");
    rerank->add_option("--k", cfg.k, "sampling steps K (perm_samp)");
    rerank->add_option("--sampler-mode", cfg.sampler_mode, "constrained | vanilla");
    rerank->add_option("--window", cfg.window, "window size");
    rerank->add_option("--step-size", cfg.step_size, "window step size");
    rerank->add_option("--top-k", cfg.top_k, "candidates to rerank per query");
    rerank->add_option("--seed", cfg.seed, "rng seed");
    rerank->add_option("--jobs", cfg.jobs, "query worker count");
    rerank->add_option("--beta", cfg.beta, "oracle sharpness override");
    rerank->add_option("--gamma", cfg.gamma, "oracle noise override");
    rerank->add_option("--lambda", cfg.lambda, "oracle end-bias override");
    rerank->add_option("--remote-url", cfg.remote_url, "remote provider base URL");
    rerank->add_option("--template-id", cfg.template_id, "prompt template id");
    rerank->add_option("--corpus", paths["corpus"], "corpus JSONL");
    rerank->add_option("--queries", paths["queries"], "queries TSV");
    rerank->add_option("--candidates", paths["candidates"], "first-stage run file");
    rerank->add_option("--oracle", paths["oracle"], "oracle.json (oracle provider)");
    rerank->add_option("--replay", paths["replay"], "replay fixture file");
    rerank->add_option("--record", paths["record"], "record provider calls to fixture file");
    rerank->add_option("--out", paths["out"], "output run file");
    rerank->add_option("--trace", paths["trace"], "sampler trace JSONL");
    rerank->add_option("--log", paths["log"], "per-query run log JSONL");
    rerank->add_option("--tag", tag, "run tag");

    // eval
    auto* eval = app.add_subcommand("eval", "score a run against qrels");
    std::string run_path, qrels_path, metric = "ndcg@10", compare_path, report_path,
                gain_name = "exp";
    bool ttest = false;
    eval->add_option("--run", run_path, "run file")->required();
    eval->add_option("--qrels", qrels_path, "qrels file")->required();
    eval->add_option("--metric", metric, "ndcg@K");
    eval->add_option("--compare", compare_path, "second run for comparison");
    eval->add_flag("--ttest", ttest, "paired t-test against --compare");
    eval->add_option("--out", report_path, "per-query CSV report");
    eval->add_option("--gain", gain_name, "exp | linear");

    // dynamics
    auto* dynamics = app.add_subcommand("dynamics", "filling-dynamics matrices from traces");
    std::string trace_path, dynamics_out;
    std::size_t dyn_k = 4;
    dynamics->add_option("--trace", trace_path, "trace JSONL")->required();
    dynamics->add_option("--k", dyn_k, "sampling steps the traces used")->required();
    dynamics->add_option("--out", dynamics_out, "output CSV")->required();

    // train-toy
    auto* train = app.add_subcommand("train-toy", "desk-scale training loop");
    std::string loss_name = "ranknet", data_path, model_out = "model.json", curve_path;
    std::size_t epochs = 200;
    double lr = 0.1;
    std::uint64_t train_seed = 0;
    train->add_option("--loss", loss_name, "ce | ranknet | sft")->required();
    train->add_option("--data", data_path, "training JSONL")->required();
    train->add_option("--epochs", epochs, "epochs");
    train->add_option("--lr", lr, "learning rate");
    train->add_option("--seed", train_seed, "rng seed");
    train->add_option("--out", model_out, "model JSON output");
    train->add_option("--curve", curve_path, "loss-curve CSV (default <out>.curve.csv)");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
    std::string gc_loss = "all";
    std::uint64_t gc_seed = 7;
    gradcheck->add_option("--loss", gc_loss, "ce | ranknet | sft | all");
    gradcheck->add_option("--seed", gc_seed, "rng seed");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark");
    std::size_t synth_queries = 10, synth_docs = 100;
    std::uint64_t synth_seed = 0;
    std::string synth_out = "data";
    synth->add_option("--queries", synth_queries, "number of queries");
    synth->add_option("--docs", synth_docs, "number of documents");
    synth->add_option("--seed", synth_seed, "rng seed");
    synth->add_option("--out-dir", synth_out, "output directory");

    // fixtures
    auto* fixtures = app.add_subcommand("fixtures", "inspect a replay fixture file");
    std::string fixtures_path;
    fixtures->add_option("--file", fixtures_path, "fixture JSONL")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (rerank->parsed()) {
            std::set<std::string> cli_set;
            const std::map<std::string, std::string> flag_names{
                {"--strategy", "strategy"},       {"--provider", "provider"},
                {"--k", "k"},                     {"--sampler-mode", "sampler_mode"},
                {"--window", "window"},           {"--step-size", "step_size"},
                {"--top-k", "top_k"},             {"--seed", "seed"},
                {"--jobs", "jobs"},               {"--beta", "beta"},
                {"--gamma", "gamma"},             {"--lambda", "lambda"},
                {"--remote-url", "remote_url"},   {"--template-id", "template_id"}};
            for (const auto& [flag, key] : flag_names)
                if (rerank->count(flag) > 0) cli_set.insert(key);
            return cmd_rerank(config_path, cfg, cli_set, paths, tag);
        }
        if (eval->parsed())
            return cmd_eval(run_path, qrels_path, metric, compare_path, ttest, report_path,
                            gain_name);
        if (dynamics->parsed()) return cmd_dynamics(trace_path, dyn_k, dynamics_out);
        if (train->parsed())
            return cmd_train_toy(loss_name, data_path, epochs, lr, train_seed, model_out,
                                 curve_path);
        if (gradcheck->parsed()) return cmd_gradcheck(gc_loss, gc_seed);
        if (synth->parsed()) {
            const SyntheticDataset data =
                generate_synthetic(synth_queries, synth_docs, synth_seed);
            write_synthetic(data, synth_out);
            std::cerr << "wrote synthetic dataset to " << synth_out << "/\n";
            return 0;
        }
        if (fixtures->parsed()) {
            ReplayProvider replay(fixtures_path);
            std::cout << fixtures_path << ": " << replay.size() << " recorded responses\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
