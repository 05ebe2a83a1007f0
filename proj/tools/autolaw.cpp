// Command-line entry point for every pipeline stage.
//
// Exit codes: 0 success, 1 usage error, 2 configuration error, 3 pipeline
// failure, 4 a property of a requested --suite failed. Logs go to stderr;
// data goes to files under the configured paths and, as JSON with --json,
// to stdout.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "autolaw/casegen.hpp"
#include "autolaw/config.hpp"
#include "autolaw/corpus.hpp"
#include "autolaw/datasets.hpp"
#include "autolaw/deliberation.hpp"
#include "autolaw/error.hpp"
#include "autolaw/harness.hpp"
#include "autolaw/juryrank.hpp"
#include "autolaw/log.hpp"
#include "autolaw/metrics.hpp"
#include "autolaw/prompts.hpp"
#include "autolaw/similarity.hpp"

namespace fs = std::filesystem;
using namespace autolaw;

namespace {

struct Globals {
    std::string config = "autolaw.json";
    bool json = false;
    std::size_t max_concurrency = 4;
    bool verbose = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<Record> load_or_empty(const fs::path& p) { return fs::exists(p) ? load_store(p) : std::vector<Record>{}; }

ModelRef need_model(const std::optional<ModelRef>& m, const char* what) {
    if (!m) throw ConfigError(std::string("models.") + what + " is not configured");
    return *m;
}

// Resolves a file name under the reports directory and refuses anything
// that would land outside it.
fs::path report_path(const AppConfig& cfg, const std::string& name) {
    fs::path p = fs::path(name).is_absolute() ? fs::path(name) : cfg.paths.reports / name;
    if (!is_within(p, cfg.paths.reports))
        throw UsageError("output " + p.string() + " is outside the reports directory " + cfg.paths.reports.string());
    fs::create_directories(p.parent_path());
    return p;
}

void write_lines_atomically(const fs::path& p, const std::vector<std::string>& lines) {
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        for (const auto& l : lines) out << l << '\n';
        if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, p);
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<std::size_t> parse_k_list(const std::vector<std::size_t>& ks) {
    if (ks.empty()) throw UsageError("at least one --k value is required");
    for (auto k : ks)
        if (k == 0) throw UsageError("--k must be positive");
    return ks;
}

// Regulations from an explicit file, or those already in the corpus store.
std::vector<Regulation> regulations_from(const std::string& file, const std::vector<Record>& store) {
    if (!file.empty()) {
        const auto recs = load_store(file);
        return records_of<Regulation>(recs);
    }
    return records_of<Regulation>(store);
}

std::unique_ptr<Similarity> make_similarity(const AppConfig& cfg, const BackendRegistry& registry,
                                            std::span<const JuryMatchedRecord> corpus) {
    LexicalSimilarity lexical;
    std::vector<std::string> docs;
    for (const auto& r : corpus) docs.push_back(r.record.scenario.text);
    lexical.fit(docs);
    if (cfg.embedding) {
        return std::make_unique<EmbeddingSimilarity>(registry.embedder(cfg.embedding->provider_id), *cfg.embedding,
                                                     std::move(lexical));
    }
    return std::make_unique<LexicalSimilarity>(std::move(lexical));
}

std::vector<LabeledExample> labeled_inputs(const std::string& file) {
    const auto recs = load_store(file);
    auto examples = records_of<LabeledExample>(recs);
    for (const auto& s : records_of<Scenario>(recs)) {
        LabeledExample ex{s, s.kind == ScenarioKind::compliant ? GroundTruth::no_violation : GroundTruth::violation,
                          "input"};
        examples.push_back(std::move(ex));
    }
    if (examples.empty()) throw UsageError(file + " holds no labeled examples or scenarios");
    return examples;
}

// ---------------------------------------------------------------- verbs

void cmd_gen_misconducts(const Globals& g, const std::string& regulations_file) {
    const auto cfg = load_config(g.config);
    const auto registry = build_registry(cfg);
    const auto generator = need_model(cfg.generator, "generator");
    const auto store = load_or_empty(cfg.paths.corpus);

    std::set<std::string> have_regulation, have_misconducts;
    for (const auto& r : records_of<Regulation>(store)) have_regulation.insert(r.id);
    for (const auto& m : records_of<Misconduct>(store)) have_misconducts.insert(m.regulation_id);

    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& reg : regulations_from(regulations_file, store)) {
        if (have_misconducts.count(reg.id)) continue;
        std::vector<Record> fresh;
        if (!have_regulation.count(reg.id)) fresh.emplace_back(reg);
        for (auto& m : extract_misconducts(reg, generator, registry)) {
            out.push_back({{"id", m.id}, {"regulation_id", m.regulation_id}, {"description", m.description}});
            fresh.emplace_back(std::move(m));
        }
        append_store(cfg.paths.corpus, fresh);
    }
    if (g.json) {
        print_json(out);
    } else {
        for (const auto& m : out)
            std::cout << m["id"].get<std::string>() << "  " << m["description"].get<std::string>() << '\n';
        std::cout << out.size() << " misconducts written to " << cfg.paths.corpus.string() << '\n';
    }
}

void cmd_gen_explicit(const Globals& g, std::size_t seeds) {
    const auto cfg = load_config(g.config);
    const auto registry = build_registry(cfg);
    const auto store = load_or_empty(cfg.paths.corpus);
    const auto base = need_model(cfg.generator, "generator");

    std::map<std::string, Regulation> regs;
    for (const auto& r : records_of<Regulation>(store)) regs[r.id] = r;
    std::set<std::string> ids, texts;
    for (const auto& s : records_of<Scenario>(store)) {
        ids.insert(s.id);
        texts.insert(s.text);
    }

    std::vector<Record> fresh;
    for (const auto& m : records_of<Misconduct>(store)) {
        for (std::size_t i = 0; i < seeds; ++i) {
            const auto id = m.id + "-s" + std::to_string(i + 1);
            if (ids.count(id)) continue;
            ModelRef generator = base;
            generator.decode.seed = generator.decode.seed.value_or(0) + static_cast<std::int64_t>(i);
            auto s = generate_explicit(m, regs.at(m.regulation_id), generator, registry, id);
            if (!texts.insert(s.text).second) {
                log::warn("dropping duplicate scenario " + s.id);
                continue;
            }
            fresh.emplace_back(std::move(s));
        }
    }
    append_store(cfg.paths.corpus, fresh);
    if (g.json) {
        print_json({{"written", fresh.size()}});
    } else {
        std::cout << fresh.size() << " explicit scenarios written to " << cfg.paths.corpus.string() << '\n';
    }
}

void cmd_gen_adversarial(const Globals& g, int max_rounds, bool no_check) {
    const auto cfg = load_config(g.config);
    const auto registry = build_registry(cfg);
    const auto store = load_or_empty(cfg.paths.corpus);

    GenerationConfig gen{need_model(cfg.generator, "generator"), need_model(cfg.target, "target"),
                         need_model(cfg.verifier, "verifier"), max_rounds > 0 ? max_rounds : cfg.defaults.max_rounds,
                         !no_check};
    std::map<std::string, Regulation> regs;
    for (const auto& r : records_of<Regulation>(store)) regs[r.id] = r;
    std::map<std::string, Misconduct> mis;
    for (const auto& m : records_of<Misconduct>(store)) mis[m.id] = m;
    std::set<std::string> refined, texts;
    for (const auto& s : records_of<Scenario>(store)) {
        texts.insert(s.text);
        if (s.kind == ScenarioKind::implicit_violation) refined.insert(s.id.substr(0, s.id.rfind("-r")));
    }

    std::vector<RefinementTrace> traces;
    std::vector<Record> fresh;
    for (const auto& seed : records_of<Scenario>(store)) {
        if (seed.kind != ScenarioKind::explicit_violation || refined.count(seed.id) || !seed.misconduct_id) continue;
        const auto& m = mis.at(*seed.misconduct_id);
        auto trace = refine_adversarial(seed, m, regs.at(m.regulation_id), gen, registry);
        if (auto s = trace.evading_scenario(); s) {
            if (texts.insert(s->text).second) {
                fresh.emplace_back(*s);
            } else {
                log::warn("dropping duplicate scenario " + s->id);
            }
        }
        traces.push_back(std::move(trace));
    }
    append_store(cfg.paths.corpus, fresh);

    std::vector<std::string> lines;
    for (const auto& t : traces) lines.push_back(trace_to_json(t).dump());
    const auto trace_file = report_path(cfg, "traces.jsonl");
    write_lines_atomically(trace_file, lines);

    nlohmann::ordered_json out;
    out["seeds"] = traces.size();
    out["evaded"] = fresh.size();
    out["attack_success_rate"] = traces.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(attack_success_rate(traces));
    if (g.json) {
        print_json(out);
    } else {
        std::cout << traces.size() << " seeds refined, " << fresh.size() << " implicit scenarios written";
        if (!traces.empty()) std::printf(", ASR %.2f", attack_success_rate(traces));
        std::cout << "\ntraces: " << trace_file.string() << '\n';
    }
}

void cmd_build_corpus(const Globals& g, const std::string& regulations_file, std::size_t seeds, std::size_t k,
                      std::optional<std::size_t> max_records) {
    const auto cfg = load_config(g.config);
    const auto registry = build_registry(cfg);
    const auto pool = load_pool(cfg.paths.pools);
    const auto regulations = regulations_from(regulations_file, load_or_empty(cfg.paths.corpus));
    if (regulations.empty()) throw UsageError("no regulations to process");

    CorpusBuildOptions opts;
    opts.generation = {need_model(cfg.generator, "generator"), need_model(cfg.target, "target"),
                       need_model(cfg.verifier, "verifier"), cfg.defaults.max_rounds, true};
    opts.jury_size = k ? k : cfg.defaults.k;
    opts.seeds_per_misconduct = seeds;
    opts.store = cfg.paths.corpus;
    opts.max_records = max_records;
    opts.max_concurrency = g.max_concurrency;
    const auto result = build_corpus(regulations, pool, opts, registry);

    nlohmann::ordered_json out;
    out["misconducts"] = result.misconducts.size();
    out["seeds"] = result.explicit_seeds.size();
    out["records"] = result.records.size();
    out["complete"] = result.complete;
    out["attack_success_rate"] =
        result.traces.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(attack_success_rate(result.traces));
    if (g.json) {
        print_json(out);
    } else {
        std::cout << result.records.size() << " jury-matched records in " << cfg.paths.corpus.string()
                  << (result.complete ? "" : " (partial)") << '\n';
    }
}

void cmd_rank_jury(const Globals& g, std::size_t k) {
    const auto cfg = load_config(g.config);
    const auto registry = build_registry(cfg);
    const auto pool = load_pool(cfg.paths.pools);
    const auto verifier = need_model(cfg.verifier, "verifier");
    const auto store = load_or_empty(cfg.paths.corpus);
    const std::size_t jury_size = k ? k : cfg.defaults.k;

    std::map<std::string, Regulation> regs;
    for (const auto& r : records_of<Regulation>(store)) regs[r.id] = r;
    std::map<std::string, Misconduct> mis;
    for (const auto& m : records_of<Misconduct>(store)) mis[m.id] = m;
    std::set<std::string> ranked;
    for (const auto& j : records_of<JuryMatchedRecord>(store)) ranked.insert(j.record.scenario.id);

    std::vector<CaseLawRecord> todo;
    for (const auto& c : records_of<CaseLawRecord>(store))
        if (!ranked.count(c.scenario.id)) todo.push_back(c);
    for (const auto& s : records_of<Scenario>(store)) {
        if (s.kind != ScenarioKind::implicit_violation || ranked.count(s.id) || !s.misconduct_id) continue;
        const auto& m = mis.at(*s.misconduct_id);
        todo.push_back({s, m, regs.at(m.regulation_id)});
    }

    std::vector<Record> fresh;
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& c : todo) {
        auto rec = rank_case(c, pool, verifier, jury_size, registry);
        out.push_back({{"scenario_id", c.scenario.id}, {"jury", rec.jury()}});
        fresh.emplace_back(std::move(rec));
    }
    append_store(cfg.paths.corpus, fresh);
    if (g.json) {
        print_json(out);
    } else {
        for (const auto& e : out) {
            std::cout << e["scenario_id"].get<std::string>() << ":";
            for (const auto& id : e["jury"]) std::cout << ' ' << display_name(pool.find(id.get<std::string>()));
            std::cout << '\n';
        }
        std::cout << out.size() << " cases ranked\n";
    }
}

struct DeliberateArgs {
    std::string input;
    std::optional<double> theta;
    std::optional<std::size_t> k;
    bool no_demos = false;
    bool no_roles = false;
    std::optional<double> min_similarity;
    std::string out = "verdicts.jsonl";
};

void cmd_deliberate(const Globals& g, const DeliberateArgs& a) {
    const auto cfg = load_config(g.config);
    const auto registry = build_registry(cfg);
    const auto pool = load_pool(cfg.paths.pools);
    const auto corpus = records_of<JuryMatchedRecord>(load_store(cfg.paths.corpus));
    const auto inputs = labeled_inputs(a.input);
    const auto sim = make_similarity(cfg, registry, corpus);

    DeliberationOptions opts;
    opts.theta = a.theta.value_or(cfg.defaults.theta);
    if (!(opts.theta >= 0.0 && opts.theta < 1.0)) throw UsageError("--theta must lie in [0, 1)");
    opts.jury_size = a.k;
    opts.use_demos = !a.no_demos;
    opts.use_roles = !a.no_roles;
    opts.min_similarity = a.min_similarity;
    opts.max_concurrency = g.max_concurrency;

    std::vector<std::string> lines;
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& ex : inputs) {
        const auto v = deliberate(ex.scenario, corpus, pool, registry, *sim, opts);
        auto j = verdict_to_json(v);
        lines.push_back(j.dump());
        out.push_back(std::move(j));
    }
    const auto path = report_path(cfg, a.out);
    write_lines_atomically(path, lines);
    if (g.json) {
        print_json(out);
    } else {
        for (const auto& v : out) {
            std::printf("%-24s %-9s yes=%.2f demo=%s%s\n", v["scenario_id"].get<std::string>().c_str(),
                        v["outcome"].get<bool>() ? "violation" : "no", v["yes_fraction"].get<double>(),
                        v["demonstration_id"].get<std::string>().c_str(), v["flagged"].get<bool>() ? " [flagged]" : "");
        }
        std::cout << "verdicts: " << path.string() << '\n';
    }
}

void write_reports(const Globals& g, const AppConfig& cfg, const std::vector<EvalReport>& reports,
                   const std::string& stem, const nlohmann::ordered_json& extra) {
    std::vector<std::string> lines;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        auto j = report_to_json(r);
        lines.push_back(j.dump());
        arr.push_back(std::move(j));
    }
    const auto jsonl = report_path(cfg, stem + ".jsonl");
    const auto md = report_path(cfg, stem + ".md");
    write_lines_atomically(jsonl, lines);
    const auto table = markdown_table(reports);
    write_text(md, table);
    if (g.json) {
        nlohmann::ordered_json out;
        out["reports"] = std::move(arr);
        for (const auto& [key, value] : extra.items()) out[key] = value;
        print_json(out);
    } else {
        std::cout << table;
        for (const auto& [key, value] : extra.items()) std::cout << key << ": " << value.dump() << '\n';
        std::cout << reports.size() << " reports written to " << jsonl.string() << '\n';
    }
}

// Runs the named property suites; returns 4 when any property fails.
int run_suites(const std::vector<std::string>& suites, const std::vector<EvalReport>& reports,
               nlohmann::ordered_json& extra) {
    int status = 0;
    for (const auto& name : suites) {
        nlohmann::ordered_json checks = nlohmann::ordered_json::array();
        for (const auto& c : check_suite(name, reports)) {
            if (!c.passed) status = 4;
            checks.push_back({{"property", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        }
        extra["suite/" + name] = std::move(checks);
    }
    return status;
}

struct EvalArgs {
    std::string dataset;
    std::string raw;
    std::string kind = "law-sg";
    std::string filler;
    std::vector<std::size_t> ks{1, 3, 5};
    std::optional<std::uint64_t> seed;
    bool ablation = false;
    std::string stem = "eval";
    std::vector<std::string> suites;
};

int cmd_eval(const Globals& g, const EvalArgs& a) {
    const auto cfg = load_config(g.config);
    const auto registry = build_registry(cfg);
    const auto pool = load_pool(cfg.paths.pools);
    const auto corpus = records_of<JuryMatchedRecord>(load_store(cfg.paths.corpus));
    const auto seed = a.seed.value_or(cfg.defaults.seed);

    std::vector<LabeledExample> data;
    if (!a.dataset.empty()) data = labeled_inputs(a.dataset);
    if (!a.raw.empty()) {
        auto loaded = load_dataset(a.raw, dataset_kind_from_string(a.kind));
        data.insert(data.end(), loaded.examples.begin(), loaded.examples.end());
    }
    if (data.empty()) throw UsageError("give --dataset or --raw");
    if (!a.filler.empty()) {
        const auto filler = load_dataset(a.filler, DatasetKind::drop).examples;
        data = balance_with_filler(data, filler, seed);
    }

    const auto sim = make_similarity(cfg, registry, corpus);
    const BackendVoteSource source(registry);
    std::vector<EvalReport> reports;
    for (auto k : parse_k_list(a.ks)) {
        auto mv = RunConfig::majority_vote(pool, k, seed);
        mv.theta = cfg.defaults.theta;
        mv.max_concurrency = g.max_concurrency;
        reports.push_back(run_majority_vote(mv, data, source));
        auto al = RunConfig::autolaw(pool, k, seed);
        al.theta = cfg.defaults.theta;
        al.max_concurrency = g.max_concurrency;
        reports.push_back(run_autolaw(al, data, corpus, *sim, source));
    }
    if (a.ablation) {
        const auto k = *std::max_element(a.ks.begin(), a.ks.end());
        for (const auto& ab : ablation_grid()) {
            if (ab == Ablation{}) continue;
            auto al = RunConfig::autolaw(pool, k, seed);
            al.ablation = ab;
            al.theta = cfg.defaults.theta;
            al.max_concurrency = g.max_concurrency;
            reports.push_back(run_autolaw(al, data, corpus, *sim, source));
        }
    }
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    const int status = run_suites(a.suites, reports, extra);
    write_reports(g, cfg, reports, a.stem, extra);
    return status;
}

struct SimulateArgs {
    std::optional<std::uint64_t> seed;
    std::size_t pools = 3;
    std::vector<std::size_t> ks{5};
    double rho = 1.0;
    std::size_t scenarios = 500;
    double violation_fraction = 1.0;
    bool standard = false;
    bool ablation = false;
    double demo_gain = 0.0;
    double role_gain = 0.0;
    std::string stem = "simulate";
    std::vector<std::string> suites;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
    const auto cfg = load_config(g.config);
    if (a.pools == 0) throw UsageError("--pools must be positive");
    if (!(a.rho >= 0.0 && a.rho <= 1.0)) throw UsageError("--rho must lie in [0, 1]");
    if (a.scenarios == 0) throw UsageError("--scenarios must be positive");

    SimulationSetup setup;
    setup.seed = a.seed.value_or(cfg.defaults.seed);
    setup.n_scenarios = a.scenarios;
    setup.violation_fraction = a.violation_fraction;
    const SyntheticVerifier verifier{a.rho, setup.seed};

    std::vector<SimulatedRun> runs;
    for (auto k : parse_k_list(a.ks)) {
        if (k > 6) throw UsageError("--k cannot exceed the six simulated jurors");
        runs.push_back({RunMode::majority_vote, k, {false, false, false}, cfg.defaults.theta});
        runs.push_back({RunMode::autolaw, k, {}, cfg.defaults.theta});
    }
    if (a.ablation) {
        const auto k = *std::max_element(a.ks.begin(), a.ks.end());
        for (const auto& ab : ablation_grid())
            if (ab != Ablation{}) runs.push_back({RunMode::autolaw, k, ab, cfg.defaults.theta});
    }

    std::vector<EvalReport> reports;
    for (std::size_t p = 0; p < a.pools; ++p) {
        PoolSpec spec = a.standard ? standard_pool(setup.tags) : random_pool(setup.seed, p, setup.tags);
        if (a.standard && a.pools > 1) spec.pool_id = "standard-" + std::to_string(p + 1);
        spec.demo_gain = a.demo_gain;
        spec.role_gain = a.role_gain;
        SimulationSetup s = setup;
        if (a.standard) s.seed = setup.seed + p;
        auto part = simulate(spec, verifier, s, runs);
        reports.insert(reports.end(), part.begin(), part.end());
    }

    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    if (a.pools >= 2) {
        for (auto k : a.ks) {
            for (const char* mode : {"majority_vote", "autolaw"}) {
                std::vector<double> rates;
                const std::string suffix = std::string("/") + mode + "/vote-" + std::to_string(k);
                for (const auto& r : reports)
                    if (r.config_id == r.pool_id + suffix) rates.push_back(r.detection_rate);
                extra[std::string("stddev/") + mode + "/vote-" + std::to_string(k)] = round2(pool_stddev(rates));
            }
        }
    }
    const int status = run_suites(a.suites, reports, extra);
    write_reports(g, cfg, reports, a.stem, extra);
    return status;
}

void cmd_prompts_dump(const Globals& g, const std::string& name) {
    std::vector<TemplateName> names = all_templates();
    if (!name.empty()) names = {template_name_from_string(name)};
    if (g.json) {
        nlohmann::ordered_json out;
        for (auto n : names) out[std::string(to_string(n))] = std::string(prompt_template(n).body);
        print_json(out);
        return;
    }
    for (auto n : names) {
        if (names.size() > 1) std::cout << "=== " << to_string(n) << " ===\n";
        std::cout << prompt_template(n).body << '\n';
    }
}

int cmd_corpus_validate(const Globals& g, const std::string& store_arg) {
    const fs::path store = store_arg.empty() ? load_config(g.config).paths.corpus : fs::path(store_arg);
    const auto records = load_store(store);
    const auto problems = validate_referential_integrity(records);
    if (g.json) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& p : problems) out.push_back({{"index", p.index}, {"message", p.message}});
        print_json({{"records", records.size()}, {"violations", out}});
    } else {
        for (const auto& p : problems) std::cout << "record " << p.index << ": " << p.message << '\n';
        std::cout << records.size() << " records, " << problems.size() << " integrity violations\n";
    }
    return problems.empty() ? 0 : 3;
}

void cmd_report(const Globals& g, const std::string& input) {
    std::ifstream in(input);
    if (!in) throw UsageError("cannot open " + input);
    std::vector<EvalReport> reports;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            reports.push_back(report_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(n, e.what());
        }
    }
    if (g.json) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& r : reports) out.push_back(report_to_json(r));
        print_json(out);
    } else {
        std::cout << markdown_table(reports);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Legal violation detection with adversarial case law and jury deliberation", "autolaw"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("-c,--config", g.config, "Configuration file")->capture_default_str();
    app.add_flag("--json", g.json, "Print machine-readable JSON on stdout");
    app.add_option("--max-concurrency", g.max_concurrency, "Upper bound on parallel model calls")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");

    int status = 0;
    std::function<void()> action;

    auto* gm = app.add_subcommand("gen-misconducts", "Extract misconducts from regulations into the corpus store");
    std::string gm_regs;
    gm->add_option("--regulations", gm_regs, "JSONL file of regulation records (default: those in the store)");
    gm->callback([&] { action = [&] { cmd_gen_misconducts(g, gm_regs); }; });

    auto* ge = app.add_subcommand("gen-explicit", "Generate explicit violation scenarios for stored misconducts");
    std::size_t ge_seeds = 1;
    ge->add_option("--seeds", ge_seeds, "Scenarios per misconduct")->check(CLI::PositiveNumber)->capture_default_str();
    ge->callback([&] { action = [&] { cmd_gen_explicit(g, ge_seeds); }; });

    auto* ga = app.add_subcommand("gen-adversarial", "Refine stored explicit scenarios into implicit ones");
    int ga_rounds = 0;
    bool ga_nocheck = false;
    ga->add_option("--max-rounds", ga_rounds, "Refinement rounds (default: config)")->check(CLI::PositiveNumber);
    ga->add_flag("--no-preservation-check", ga_nocheck, "Accept every rewrite without asking the verifier");
    ga->callback([&] { action = [&] { cmd_gen_adversarial(g, ga_rounds, ga_nocheck); }; });

    auto* bc = app.add_subcommand("build-corpus", "Generate and rank the jury-matched case-law corpus");
    std::string bc_regs;
    std::size_t bc_seeds = 1, bc_k = 0;
    std::optional<std::size_t> bc_max;
    bc->add_option("--regulations", bc_regs, "JSONL file of regulation records (default: those in the store)");
    bc->add_option("--seeds", bc_seeds, "Seed scenarios per misconduct")->check(CLI::PositiveNumber);
    bc->add_option("--k", bc_k, "Jury size stored with each record (default: config)");
    bc->add_option("--max-records", bc_max, "Stop after writing this many records");
    bc->callback([&] { action = [&] { cmd_build_corpus(g, bc_regs, bc_seeds, bc_k, bc_max); }; });

    auto* rj = app.add_subcommand("rank-jury", "Score the pool on stored case law and record the ranking");
    std::size_t rj_k = 0;
    rj->add_option("--k", rj_k, "Jury size (default: config)");
    rj->callback([&] { action = [&] { cmd_rank_jury(g, rj_k); }; });

    auto* dl = app.add_subcommand("deliberate", "Retrieve case law and let its jury vote on input scenarios");
    DeliberateArgs da;
    dl->add_option("--input", da.input, "JSONL of labeled examples or scenarios")->required();
    dl->add_option("--theta", da.theta, "Vote threshold in [0, 1)");
    dl->add_option("--k", da.k, "Jury size override");
    dl->add_flag("--no-demos", da.no_demos, "Do not show the retrieved case law");
    dl->add_flag("--no-roles", da.no_roles, "Do not send role personas");
    dl->add_option("--min-similarity", da.min_similarity, "Drop demonstrations below this similarity");
    dl->add_option("--out", da.out, "Verdict file name inside the reports directory")->capture_default_str();
    dl->callback([&] { action = [&] { cmd_deliberate(g, da); }; });

    auto* ev = app.add_subcommand("eval", "Compare majority vote and the full pipeline on a labeled dataset");
    EvalArgs ea;
    ev->add_option("--dataset", ea.dataset, "JSONL store of labeled examples");
    ev->add_option("--raw", ea.raw, "Raw dataset rows ({\"scenario\", \"misconduct\"})");
    ev->add_option("--kind", ea.kind, "Raw dataset kind: law-sg, case-sg, unfair-tos")->capture_default_str();
    ev->add_option("--filler", ea.filler, "Raw DROP rows used as negatives");
    ev->add_option("--k", ea.ks, "Vote sizes")->capture_default_str();
    ev->add_option("--seed", ea.seed, "Jury sampling seed (default: config)");
    ev->add_flag("--ablation", ea.ablation, "Add every ablation of the pipeline at the largest k");
    ev->add_option("--name", ea.stem, "Report file stem")->capture_default_str();
    ev->add_option("--suite", ea.suites, "Property suite to check; exit 4 if it fails")
        ->check(CLI::IsMember(suite_names()));
    ev->callback([&] { action = [&] { status = cmd_eval(g, ea); }; });

    auto* sm = app.add_subcommand("simulate", "Run majority vote and the pipeline on synthetic jurors");
    SimulateArgs sa;
    sm->add_option("--seed", sa.seed, "Simulation seed (default: config)");
    sm->add_option("--pools", sa.pools, "Number of pools")->capture_default_str();
    sm->add_option("--k", sa.ks, "Vote sizes")->capture_default_str();
    sm->add_option("--rho", sa.rho, "Verifier correlation with true accuracy")->capture_default_str();
    sm->add_option("--scenarios", sa.scenarios, "Scenarios per pool")->capture_default_str();
    sm->add_option("--violation-fraction", sa.violation_fraction, "Share of violation rows")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sm->add_flag("--standard", sa.standard, "Use the fixed 0.9..0.4 pool instead of random pools");
    sm->add_flag("--ablation", sa.ablation, "Add every ablation of the pipeline at the largest k");
    sm->add_option("--demo-gain", sa.demo_gain, "Accuracy gain from seeing a demonstration");
    sm->add_option("--role-gain", sa.role_gain, "Accuracy gain from a role persona");
    sm->add_option("--name", sa.stem, "Report file stem")->capture_default_str();
    sm->add_option("--suite", sa.suites, "Property suite to check; exit 4 if it fails")
        ->check(CLI::IsMember(suite_names()));
    sm->callback([&] { action = [&] { status = cmd_simulate(g, sa); }; });

    auto* pr = app.add_subcommand("prompts", "Prompt templates");
    pr->require_subcommand(1);
    auto* pd = pr->add_subcommand("dump", "Print prompt templates");
    std::string pd_name;
    pd->add_option("--name", pd_name, "Only this template");
    pd->callback([&] { action = [&] { cmd_prompts_dump(g, pd_name); }; });

    auto* co = app.add_subcommand("corpus", "Corpus store maintenance");
    co->require_subcommand(1);
    auto* cv = co->add_subcommand("validate", "Check record invariants and references");
    std::string cv_store;
    cv->add_option("--store", cv_store, "Store to check (default: the configured corpus)");
    cv->callback([&] { action = [&] { status = cmd_corpus_validate(g, cv_store); }; });

    auto* rp = app.add_subcommand("report", "Render evaluation reports as a table");
    std::string rp_input;
    rp->add_option("--input", rp_input, "EvalReport JSONL file")->required();
    rp->callback([&] { action = [&] { cmd_report(g, rp_input); }; });

    auto* cf = app.add_subcommand("config", "Configuration helpers");
    cf->require_subcommand(1);
    auto* cx = cf->add_subcommand("example", "Print a commented configuration template");
    cx->callback([&] { action = [&] { std::cout << example_config_text(); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (g.verbose) log::set_level("info");
    try {
        if (action) action();
        return status;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
