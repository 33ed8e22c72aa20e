// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace diffurank {

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return in;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

std::unordered_map<std::string, Document> load_corpus(const std::string& path) {
    auto in = open_or_throw(path);
    std::unordered_map<std::string, Document> corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path, lineno, e.what());
        }
        if (!j.contains("doc_id") || !j.contains("text"))
            throw ParseError(path, lineno, "corpus record needs doc_id and text");
        std::string text = j["text"].get<std::string>();
        if (j.contains("title"))
            text = j["title"].get<std::string>() + " " + text;
        const std::string doc_id = j["doc_id"].get<std::string>();
        if (corpus.count(doc_id))
            throw ParseError(path, lineno, "duplicate doc_id '" + doc_id + "'");
        corpus.emplace(doc_id, Document(doc_id, std::move(text)));
    }
    return corpus;
}

std::vector<Query> load_queries(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<Query> queries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError(path, lineno, "expected 'query_id<TAB>text'");
        try {
            queries.emplace_back(line.substr(0, tab), line.substr(tab + 1));
        } catch (const ValidationError& e) {
            throw ParseError(path, lineno, e.what());
        }
    }
    return queries;
}

std::map<std::string, std::vector<Document>> load_candidates(
    const std::string& path, const std::unordered_map<std::string, Document>& corpus,
    std::size_t top_k) {
    auto in = open_or_throw(path);
    std::map<std::string, std::vector<Document>> out;
    std::vector<std::string> missing;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_ws(line);
        if (fields.size() < 6)
            throw ParseError(path, lineno, "expected 'qid Q0 docid rank score tag'");
        const std::string& qid = fields[0];
        const std::string& doc_id = fields[2];
        auto it = corpus.find(doc_id);
        if (it == corpus.end()) {
            missing.push_back(doc_id);
            continue;
        }
        auto& list = out[qid];
        if (list.size() < top_k) list.push_back(it->second);
    }
    if (!missing.empty()) {
        std::string msg = "candidates reference documents missing from the corpus:";
        for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i)
            msg += " " + missing[i];
        if (missing.size() > 10) msg += " ... (" + std::to_string(missing.size()) + " total)";
        throw std::runtime_error(msg);
    }
    return out;
}

Qrels load_qrels(const std::string& path) {
    auto in = open_or_throw(path);
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_ws(line);
        if (fields.size() != 4)
            throw ParseError(path, lineno, "expected 'qid 0 docid grade'");
        try {
            qrels.set(fields[0], fields[2], std::stoi(fields[3]));
        } catch (const std::exception& e) {
            throw ParseError(path, lineno, e.what());
        }
    }
    return qrels;
}

void write_run(const std::vector<RankedList>& results, const std::string& path,
               const std::string& tag) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    char buf[64];
    for (const auto& run : results) {
        run.validate();
        for (const auto& e : run.entries) {
            std::snprintf(buf, sizeof(buf), "%.6f", e.score);
            out << run.query_id << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << buf << ' '
                << tag << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

std::vector<RankedList> load_run(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<RankedList> runs;
    std::string line;
    std::size_t lineno = 0;
    std::string current_qid;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_ws(line);
        if (fields.size() != 6)
            throw ParseError(path, lineno, "expected 'qid Q0 docid rank score tag'");
        if (fields[0] != current_qid) {
            current_qid = fields[0];
            runs.push_back(RankedList{current_qid, {}});
        }
        try {
            runs.back().entries.push_back({fields[2], std::stod(fields[4]),
                                           static_cast<std::size_t>(std::stoul(fields[3]))});
        } catch (const std::exception& e) {
            throw ParseError(path, lineno, e.what());
        }
    }
    for (const auto& run : runs) run.validate();
    return runs;
}

void write_oracle(const OracleFile& oracle, const std::string& path) {
    nlohmann::json j;
    j["seed"] = oracle.config.seed;
    j["beta"] = oracle.config.beta;
    j["gamma"] = oracle.config.gamma;
    j["lambda"] = oracle.config.lambda;
    nlohmann::json rel = nlohmann::json::object();
    for (const auto& [qid, docs] : oracle.relevance.by_query()) {
        nlohmann::json per_query = nlohmann::json::object();
        for (const auto& [doc_id, r] : docs) per_query[doc_id] = r;
        rel[qid] = std::move(per_query);
    }
    j["rel"] = std::move(rel);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

OracleFile load_oracle(const std::string& path) {
    auto in = open_or_throw(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 1, e.what());
    }
    OracleFile oracle;
    oracle.config.seed = j.at("seed").get<std::uint64_t>();
    oracle.config.beta = j.at("beta").get<double>();
    oracle.config.gamma = j.at("gamma").get<double>();
    oracle.config.lambda = j.at("lambda").get<double>();
    for (const auto& [qid, docs] : j.at("rel").items())
        for (const auto& [doc_id, r] : docs.items())
            oracle.relevance.set(qid, doc_id, r.get<double>());
    return oracle;
}

SyntheticDataset generate_synthetic(std::size_t num_queries, std::size_t num_docs,
                                    std::uint64_t seed) {
    if (num_queries < 1 || num_docs < 1)
        throw ValidationError("generate_synthetic: sizes must be >= 1");

    SyntheticDataset data;
    data.oracle.config.seed = seed;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> retrieval_noise(0.0, 0.15);

    for (std::size_t d = 0; d < num_docs; ++d) {
        const std::string doc_id = "d" + std::to_string(d + 1);
        data.corpus.emplace(doc_id,
                            Document(doc_id, "synthetic passage " + std::to_string(d + 1)));
    }

    for (std::size_t q = 0; q < num_queries; ++q) {
        const std::string qid = "q" + std::to_string(q + 1);
        data.queries.emplace_back(qid, "synthetic query " + std::to_string(q + 1));

        std::vector<std::pair<double, std::string>> retrieval;  // (noisy rel, doc_id)
        for (std::size_t d = 0; d < num_docs; ++d) {
            const std::string doc_id = "d" + std::to_string(d + 1);
            const double rel = uniform(rng);
            data.oracle.relevance.set(qid, doc_id, rel);
            // grades in {0,1,2,3} by thresholding the hidden relevance
            const int grade = rel >= 0.85 ? 3 : rel >= 0.65 ? 2 : rel >= 0.45 ? 1 : 0;
            if (grade > 0) data.qrels.set(qid, doc_id, grade);
            retrieval.emplace_back(rel + retrieval_noise(rng), doc_id);
        }
        std::stable_sort(retrieval.begin(), retrieval.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        auto& cands = data.candidates[qid];
        for (const auto& [_, doc_id] : retrieval) cands.push_back(data.corpus.at(doc_id));
    }
    return data;
}

void write_synthetic(const SyntheticDataset& data, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::ofstream out(out_dir + "/corpus.jsonl");
        std::vector<std::string> ids;
        for (const auto& [id, _] : data.corpus) ids.push_back(id);
        std::sort(ids.begin(), ids.end());
        for (const auto& id : ids) {
            nlohmann::json j;
            j["doc_id"] = id;
            j["text"] = data.corpus.at(id).text;
            out << j.dump() << '\n';
        }
    }
    {
        std::ofstream out(out_dir + "/queries.tsv");
        for (const auto& q : data.queries) out << q.query_id << '\t' << q.text << '\n';
    }
    {
        std::ofstream out(out_dir + "/candidates.txt");
        char buf[64];
        for (const auto& q : data.queries) {
            const auto& cands = data.candidates.at(q.query_id);
            for (std::size_t i = 0; i < cands.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.6f",
                              static_cast<double>(cands.size() - i));
                out << q.query_id << " Q0 " << cands[i].doc_id << ' ' << i + 1 << ' ' << buf
                    << " synth-bm25\n";
            }
        }
    }
    {
        std::ofstream out(out_dir + "/qrels.txt");
        for (const auto& q : data.queries) {
            std::vector<std::string> ids;
            for (const auto& [id, _] : data.corpus) ids.push_back(id);
            std::sort(ids.begin(), ids.end());
            for (const auto& id : ids) {
                const int g = data.qrels.grade(q.query_id, id);
                if (g > 0) out << q.query_id << " 0 " << id << ' ' << g << '\n';
            }
        }
    }
    write_oracle(data.oracle, out_dir + "/oracle.json");
}

void write_traces(const std::vector<WindowTrace>& traces, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (const auto& tr : traces) {
        for (const auto& step : tr.steps) {
            nlohmann::json j;
            j["query_id"] = tr.query_id;
            j["window"] = tr.window_index;
            j["n"] = tr.n;
            j["k"] = tr.k;
            j["mode"] = tr.mode;
            j["step"] = step.step;
            j["s"] = step.s;
            auto filled = nlohmann::json::array();
            for (const auto& f : step.filled)
                filled.push_back({{"pos", f.pos}, {"id", f.id}, {"conf", f.conf}});
            j["filled"] = std::move(filled);
            j["remasked"] = step.remasked;
            out << j.dump() << '\n';
        }
        nlohmann::json summary;
        summary["query_id"] = tr.query_id;
        summary["window"] = tr.window_index;
        summary["n"] = tr.n;
        summary["k"] = tr.k;
        summary["mode"] = tr.mode;
        auto raw = nlohmann::json::array();
        for (std::size_t v : tr.raw_slots)
            raw.push_back(v == kMaskSlot ? -1 : static_cast<long long>(v));
        summary["raw"] = std::move(raw);
        summary["valid"] = tr.valid;
        out << summary.dump() << '\n';
    }
}

std::vector<WindowTrace> load_traces(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<WindowTrace> traces;
    std::map<std::pair<std::string, std::size_t>, std::size_t> index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path, lineno, e.what());
        }
        const std::pair<std::string, std::size_t> key{j.at("query_id").get<std::string>(),
                                                      j.at("window").get<std::size_t>()};
        auto it = index.find(key);
        if (it == index.end()) {
            WindowTrace tr;
            tr.query_id = key.first;
            tr.window_index = key.second;
            tr.n = j.at("n").get<std::size_t>();
            tr.k = j.at("k").get<std::size_t>();
            tr.mode = j.at("mode").get<std::string>();
            traces.push_back(std::move(tr));
            it = index.emplace(key, traces.size() - 1).first;
        }
        WindowTrace& tr = traces[it->second];
        if (j.contains("raw")) {
            for (const auto& v : j["raw"]) {
                const long long raw = v.get<long long>();
                tr.raw_slots.push_back(raw < 0 ? kMaskSlot
                                               : static_cast<std::size_t>(raw));
            }
            tr.valid = j.at("valid").get<bool>();
        } else {
            StepTrace step;
            step.step = j.at("step").get<std::size_t>();
            step.s = j.at("s").get<double>();
            for (const auto& f : j.at("filled"))
                step.filled.push_back({f.at("pos").get<std::size_t>(),
                                       f.at("id").get<std::size_t>(),
                                       f.at("conf").get<double>()});
            step.remasked = j.at("remasked").get<std::vector<std::size_t>>();
            tr.steps.push_back(std::move(step));
        }
    }
    return traces;
}

std::vector<TrainInstance> load_train_data(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<TrainInstance> instances;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path, lineno, e.what());
        }
        TrainInstance inst;
        inst.query_id = j.at("query").get<std::string>();
        std::vector<std::string> doc_ids;
        for (const auto& d : j.at("docs")) {
            doc_ids.push_back(d.at("doc_id").get<std::string>());
            if (d.contains("features")) {
                inst.features.push_back(d["features"].get<std::vector<double>>());
            } else {
                // crude text statistics stand in when no features are given
                const std::string text = d.value("text", "");
                inst.features.push_back({static_cast<double>(text.size()) / 100.0,
                                         static_cast<double>(split_ws(text).size()) / 10.0,
                                         1.0});
            }
        }
        inst.teacher.query_id = inst.query_id;
        for (const auto& id : j.at("teacher_order")) {
            const auto it = std::find(doc_ids.begin(), doc_ids.end(), id.get<std::string>());
            if (it == doc_ids.end())
                throw ParseError(path, lineno,
                                 "teacher_order references unknown doc '" +
                                     id.get<std::string>() + "'");
            inst.teacher.order.push_back(static_cast<std::size_t>(it - doc_ids.begin()));
        }
        if (inst.teacher.order.size() != doc_ids.size())
            throw ParseError(path, lineno, "teacher_order must cover all docs");
        instances.push_back(std::move(inst));
    }
    return instances;
}

void write_train_data(const std::vector<TrainInstance>& instances, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (const auto& inst : instances) {
        nlohmann::json j;
        j["query"] = inst.query_id;
        auto docs = nlohmann::json::array();
        for (std::size_t d = 0; d < inst.features.size(); ++d)
            docs.push_back({{"doc_id", "d" + std::to_string(d + 1)},
                            {"features", inst.features[d]}});
        j["docs"] = std::move(docs);
        auto order = nlohmann::json::array();
        for (std::size_t idx : inst.teacher.order)
            order.push_back("d" + std::to_string(idx + 1));
        j["teacher_order"] = std::move(order);
        out << j.dump() << '\n';
    }
}

std::map<std::string, std::string> load_toml(const std::string& path) {
    auto in = open_or_throw(path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        if (line[first] == '[')
            throw ParseError(path, lineno, "sections are not supported; use flat keys");
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(path, lineno, "expected 'key = value'");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(path, lineno, "empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        out[key] = value;
    }
    return out;
}

EngineConfig EngineConfig::from_toml(const std::string& path) {
    const auto kv = load_toml(path);
    EngineConfig cfg;
    auto get = [&kv](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto* v = get("strategy")) cfg.strategy = *v;
    if (auto* v = get("provider")) cfg.provider = *v;
    if (auto* v = get("k")) cfg.k = std::stoul(*v);
    if (auto* v = get("window")) cfg.window = std::stoul(*v);
    if (auto* v = get("step_size")) cfg.step_size = std::stoul(*v);
    if (auto* v = get("top_k")) cfg.top_k = std::stoul(*v);
    if (auto* v = get("seed")) cfg.seed = std::stoull(*v);
    if (auto* v = get("beta")) cfg.beta = std::stod(*v);
    if (auto* v = get("gamma")) cfg.gamma = std::stod(*v);
    if (auto* v = get("lambda")) cfg.lambda = std::stod(*v);
    if (auto* v = get("remote_url")) cfg.remote_url = *v;
    if (auto* v = get("template_id")) cfg.template_id = *v;
    if (auto* v = get("gain")) cfg.gain = *v;
    if (auto* v = get("sampler_mode")) cfg.sampler_mode = *v;
    if (auto* v = get("jobs")) cfg.jobs = std::stoul(*v);
    cfg.validate();
    return cfg;
}

void EngineConfig::validate() const {
    parse_strategy(strategy);
    if (provider != "oracle" && provider != "replay" && provider != "remote")
        throw ValidationError("EngineConfig: unknown provider '" + provider + "'");
    if (k < 1) throw ValidationError("EngineConfig: k must be >= 1");
    WindowConfig{window, step_size, top_k}.validate();
    if (gain != "exp" && gain != "linear")
        throw ValidationError("EngineConfig: gain must be 'exp' or 'linear'");
    if (sampler_mode != "constrained" && sampler_mode != "vanilla")
        throw ValidationError("EngineConfig: bad sampler_mode '" + sampler_mode + "'");
    if (jobs < 1) throw ValidationError("EngineConfig: jobs must be >= 1");
}

}  // namespace diffurank
