#include <doctest.h>

#include <cmath>
#include <numeric>

#include "autolaw/error.hpp"
#include "autolaw/harness.hpp"
#include "oracles.hpp"

using namespace autolaw;

namespace {

const std::vector<double> kStandard{0.9, 0.8, 0.7, 0.6, 0.5, 0.4};

SimulationSetup setup(std::uint64_t seed, std::size_t n) {
    SimulationSetup s;
    s.seed = seed;
    s.n_scenarios = n;
    return s;
}

// Four standard errors of a detection rate (percent) over n Bernoulli rows.
double tolerance(double expected_percent, std::size_t n) {
    const double p = expected_percent / 100.0;
    return 4.0 * 100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

const EvalReport& find(const std::vector<EvalReport>& rs, RunMode mode, std::size_t k) {
    for (const auto& r : rs)
        if (r.mode == to_string(mode) && r.k == k) return r;
    throw std::runtime_error("report not found");
}

EvalReport report(const std::string& pool, const std::string& mode, std::size_t k, double dr) {
    EvalReport r;
    r.pool_id = pool;
    r.mode = mode;
    r.k = k;
    r.config_id = pool + "/" + mode + "/vote-" + std::to_string(k);
    r.detection_rate = dr;
    return r;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("majority vote matches the subset-enumeration expectation") {
    const auto tags = synthetic_tags();
    const std::size_t n = 2000;
    std::vector<SimulatedRun> runs;
    for (std::size_t k : {1, 3, 5}) runs.push_back({RunMode::majority_vote, k, {false, false, false}, 0.5});
    const auto rs = simulate(standard_pool(tags), SyntheticVerifier{1.0, 2}, setup(2, n), runs);
    for (std::size_t k : {1, 3, 5}) {
        const double expected = oracle::random_jury_rate(kStandard, k);
        CHECK(std::abs(find(rs, RunMode::majority_vote, k).detection_rate - expected) <= tolerance(expected, n));
    }
    CHECK(oracle::random_jury_rate(kStandard, 1) == doctest::Approx(65.0));
    CHECK(oracle::random_jury_rate(kStandard, 5) == doctest::Approx(77.726));
}

TEST_CASE("the pipeline with an exact verifier matches the best-jury expectation") {
    const auto tags = synthetic_tags();
    const std::size_t n = 2000;
    std::vector<SimulatedRun> runs;
    for (std::size_t k : {1, 3, 5}) runs.push_back({RunMode::autolaw, k, {}, 0.5});
    const auto rs = simulate(standard_pool(tags), SyntheticVerifier{1.0, 2}, setup(2, n), runs);
    for (std::size_t k : {1, 3, 5}) {
        const double expected = oracle::best_jury_rate(kStandard, k);
        CHECK(std::abs(find(rs, RunMode::autolaw, k).detection_rate - expected) <= tolerance(expected, n));
    }
}

TEST_CASE("an exact verifier selects the k most accurate jurors for every tag") {
    const auto tags = synthetic_tags();
    for (std::size_t p = 0; p < 3; ++p) {
        const auto pool = random_pool(9, p, tags);
        const auto corpus = synthetic_corpus(pool, SyntheticVerifier{1.0, 4}, tags, 5);
        for (std::size_t t = 0; t < tags.size(); ++t) {
            std::vector<std::pair<double, std::string>> acc;
            for (const auto& j : pool.jurors) acc.push_back({-j.accuracy(tags[t]), j.id});
            std::sort(acc.begin(), acc.end());
            std::vector<std::string> expected;
            for (std::size_t i = 0; i < 5; ++i) expected.push_back(acc[i].second);
            CHECK(corpus[t].jury() == expected);
        }
    }
}

TEST_CASE("a perfect juror alone detects everything") {
    PoolSpec spec;
    spec.jurors = {SyntheticJuror{"J1", {}, 1.0, Role::Judge}};
    const std::vector<SimulatedRun> runs{{RunMode::majority_vote, 1, {false, false, false}, 0.5},
                                         {RunMode::autolaw, 1, {}, 0.5}};
    for (const auto& r : simulate(spec, SyntheticVerifier{}, setup(1, 200), runs)) CHECK(r.detection_rate == 100.0);
}

TEST_CASE("the pipeline with every component off reproduces majority vote") {
    const auto tags = synthetic_tags();
    for (std::size_t k : {1, 3, 5}) {
        const std::vector<SimulatedRun> runs{{RunMode::majority_vote, k, {false, false, false}, 0.5},
                                             {RunMode::autolaw, k, {false, false, false}, 0.5}};
        const auto rs = simulate(random_pool(3, 0, tags), SyntheticVerifier{1.0, 3}, setup(3, 300), runs);
        CHECK(rs[0].detection_rate == rs[1].detection_rate);
    }
}

TEST_CASE("simulation is deterministic") {
    const auto tags = synthetic_tags();
    const std::vector<SimulatedRun> runs{{RunMode::majority_vote, 3, {false, false, false}, 0.5},
                                         {RunMode::autolaw, 3, {}, 0.5}};
    const auto a = simulate(random_pool(5, 1, tags), SyntheticVerifier{0.7, 5}, setup(5, 300), runs);
    const auto b = simulate(random_pool(5, 1, tags), SyntheticVerifier{0.7, 5}, setup(5, 300), runs);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(report_to_json(a[i]).dump() == report_to_json(b[i]).dump());
}

TEST_CASE("adding examples never perturbs earlier ones") {
    const auto small = synthetic_dataset(setup(8, 50));
    const auto large = synthetic_dataset(setup(8, 120));
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == large[i]);

    const auto tags = synthetic_tags();
    const SyntheticVoteSource source(standard_pool(tags), 8);
    const auto pool = standard_pool(tags).jury_pool();
    for (std::size_t i = 0; i < small.size(); ++i)
        for (const auto& j : pool.jurors)
            CHECK(source.vote(small[i].scenario, j, nullptr, false) == source.vote(large[i].scenario, j, nullptr, false));
}

TEST_CASE("thread count does not change results") {
    const auto tags = synthetic_tags();
    const auto spec = random_pool(6, 0, tags);
    const auto data = synthetic_dataset(setup(6, 200));
    const auto corpus = synthetic_corpus(spec, SyntheticVerifier{0.8, 6}, tags, 3);
    const SyntheticVoteSource source(spec, 6);
    const TagSimilarity sim;
    auto cfg = RunConfig::autolaw(spec.jury_pool(), 3, 6);
    cfg.max_concurrency = 1;
    const auto one = run_autolaw(cfg, data, corpus, sim, source);
    cfg.max_concurrency = 4;
    CHECK(run_autolaw(cfg, data, corpus, sim, source) == one);
    auto mv = RunConfig::majority_vote(spec.jury_pool(), 3, 6);
    mv.max_concurrency = 1;
    const auto mv_one = run_majority_vote(mv, data, source);
    mv.max_concurrency = 4;
    CHECK(run_majority_vote(mv, data, source) == mv_one);
}

TEST_CASE("mean pipeline detection rate does not decrease with verifier fidelity") {
    const auto tags = synthetic_tags();
    const std::vector<SimulatedRun> runs{{RunMode::autolaw, 5, {}, 0.5}};
    std::vector<double> means;
    for (double rho : {0.0, 0.5, 1.0}) {
        double sum = 0.0;
        for (std::uint64_t seed : {1, 2, 3}) sum += simulate(standard_pool(tags), SyntheticVerifier{rho, seed}, setup(seed, 500), runs)[0].detection_rate;
        means.push_back(sum / 3.0);
    }
    CHECK(means[0] <= means[1]);
    CHECK(means[1] <= means[2]);
}

TEST_CASE("an uninformative verifier is no better than random juries") {
    const auto tags = synthetic_tags();
    const std::size_t n = 2000;
    const std::vector<SimulatedRun> runs{{RunMode::majority_vote, 5, {false, false, false}, 0.5},
                                         {RunMode::autolaw, 5, {}, 0.5}};
    const auto rs = simulate(standard_pool(tags), SyntheticVerifier{0.0, 4}, setup(4, n), runs);
    // Difference of two rates, each with four standard errors of slack.
    const double expected = oracle::random_jury_rate(kStandard, 5);
    CHECK(std::abs(rs[1].detection_rate - rs[0].detection_rate) <= 2.0 * tolerance(expected, n));
}

TEST_CASE("accuracy gains from demonstrations and roles can only help under common random numbers") {
    const auto tags = synthetic_tags();
    auto spec = random_pool(2, 0, tags);
    spec.demo_gain = 0.1;
    spec.role_gain = 0.05;
    std::vector<SimulatedRun> runs;
    for (const auto& ab : ablation_grid()) runs.push_back({RunMode::autolaw, 3, ab, 0.5});
    const auto rs = simulate(spec, SyntheticVerifier{1.0, 2}, setup(2, 500), runs);
    // Grid order: full first; index 1 drops demos, index 2 drops roles.
    CHECK(rs[0].detection_rate >= rs[1].detection_rate);
    CHECK(rs[0].detection_rate >= rs[2].detection_rate);
}

TEST_CASE("ablation grid and config ids") {
    const auto grid = ablation_grid();
    REQUIRE(grid.size() == 8);
    CHECK(grid[0] == Ablation{});
    CHECK(grid[7] == Ablation{false, false, false});
    const auto pool = standard_pool(synthetic_tags()).jury_pool();
    CHECK(RunConfig::majority_vote(pool, 3, 0).id() == "P1/majority_vote/vote-3");
    CHECK(RunConfig::autolaw(pool, 5, 0).id() == "P1/autolaw/vote-5");
    auto c = RunConfig::autolaw(pool, 5, 0);
    c.ablation.use_roles = false;
    CHECK(c.id() == "P1/autolaw/vote-5/selection+demos");
    c.ablation = {false, false, false};
    CHECK(c.id() == "P1/autolaw/vote-5/none");
}

TEST_CASE("run config validation") {
    const auto pool = standard_pool(synthetic_tags()).jury_pool();
    auto mv = RunConfig::majority_vote(pool, 3, 0);
    mv.ablation.use_selection = true;
    CHECK_THROWS_AS(mv.validate(), std::invalid_argument);
    auto big = RunConfig::autolaw(pool, 7, 0);
    CHECK_THROWS_AS(big.validate(), KTooLarge);
    auto theta = RunConfig::autolaw(pool, 3, 0);
    theta.theta = 1.0;
    CHECK_THROWS_AS(theta.validate(), std::invalid_argument);
    CHECK_THROWS_AS((SyntheticVerifier{1.5, 0}.validate()), std::invalid_argument);
    SyntheticJuror bad{"J", {{"m01", 1.2}}, 0.5, Role::Judge};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("synthetic votes follow juror accuracy") {
    PoolSpec spec;
    spec.jurors = {SyntheticJuror{"J1", {}, 0.0, Role::Judge}};
    const SyntheticVoteSource source(spec, 1);
    const Juror j = spec.jury_pool().jurors[0];
    const Scenario violation{"a", "t", "m01", ScenarioKind::implicit_violation, 1};
    const Scenario compliant{"b", "t", std::nullopt, ScenarioKind::compliant, 0};
    CHECK(source.vote(violation, j, nullptr, false).parsed == Answer::no);
    CHECK(source.vote(compliant, j, nullptr, false).parsed == Answer::yes);
}

TEST_CASE("random pools stay within their documented ranges") {
    const auto tags = synthetic_tags();
    for (std::size_t p = 0; p < 5; ++p) {
        const auto spec = random_pool(1, p, tags);
        CHECK(spec.pool_id == "P" + std::to_string(p + 1));
        for (const auto& j : spec.jurors) {
            CHECK(j.default_accuracy >= 0.3);
            CHECK(j.default_accuracy <= 0.9);
            for (const auto& [tag, a] : j.true_accuracy) {
                CHECK(a >= 0.0);
                CHECK(a <= 1.0);
                CHECK(std::abs(a - j.default_accuracy) <= 0.3 + 1e-12);
            }
        }
    }
}

TEST_CASE("property suites") {
    const std::vector<EvalReport> good{report("P1", "majority_vote", 1, 60), report("P1", "autolaw", 1, 80),
                                       report("P1", "majority_vote", 5, 70), report("P1", "autolaw", 5, 85),
                                       report("P2", "majority_vote", 1, 50), report("P2", "autolaw", 1, 82),
                                       report("P2", "majority_vote", 5, 62), report("P2", "autolaw", 5, 84)};
    for (const auto& name : suite_names())
        for (const auto& c : check_suite(name, good)) CHECK_MESSAGE(c.passed, (name + " " + c.name + ": " + c.detail));

    auto bad = good;
    bad[3].detection_rate = 65;  // P1 vote-5: pipeline below majority, and a wider spread
    const auto dom = check_suite("dominance", bad);
    CHECK(std::count_if(dom.begin(), dom.end(), [](const auto& c) { return !c.passed; }) == 1);
    const auto var = check_suite("variance", bad);
    CHECK_FALSE(std::all_of(var.begin(), var.end(), [](const auto& c) { return c.passed; }));
    bad[2].detection_rate = 55;
    const auto vs = check_suite("vote-size", bad);
    CHECK(std::count_if(vs.begin(), vs.end(), [](const auto& c) { return !c.passed; }) == 1);

    CHECK_FALSE(check_suite("variance", std::vector<EvalReport>{})[0].passed);
    CHECK_THROWS_AS(check_suite("nonsense", good), std::invalid_argument);
}

}  // TEST_SUITE
