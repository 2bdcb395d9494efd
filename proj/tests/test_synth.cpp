#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <featsig/errors.hpp>
#include <featsig/ground_truth.hpp>
#include <featsig/hierarchy.hpp>
#include <featsig/importance.hpp>
#include <featsig/synth.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <utility>
#include <vector>

using namespace featsig;

namespace {

bool same_truth(const GroundTruth& a, const GroundTruth& b) {
    if (a.n_features != b.n_features) return false;
    if (a.linear.size() != b.linear.size()) return false;
    if (a.interactions.size() != b.interactions.size()) return false;
    for (std::size_t i = 0; i < a.linear.size(); ++i) {
        if (a.linear[i].feature != b.linear[i].feature) return false;
        if (a.linear[i].coefficient != b.linear[i].coefficient) return false;
    }
    for (std::size_t i = 0; i < a.interactions.size(); ++i) {
        if (a.interactions[i].a != b.interactions[i].a) return false;
        if (a.interactions[i].b != b.interactions[i].b) return false;
        if (a.interactions[i].coefficient != b.interactions[i].coefficient) return false;
    }
    return true;
}

std::size_t leaf_depth(const FeatureHierarchy& h, std::size_t id) {
    std::size_t d = 0;
    while (h.node(id).parent.has_value()) {
        id = *h.node(id).parent;
        ++d;
    }
    return d;
}

bool same_scores(const std::vector<ExperimentCell>& a, const std::vector<ExperimentCell>& b) {
    if (a.size() != b.size()) return false;
    auto eq = [](const EvaluationScore& x, const EvaluationScore& y) {
        return x.feature_fdr == y.feature_fdr && x.feature_power == y.feature_power &&
               x.interaction_fdr == y.interaction_fdr &&
               x.interaction_power == y.interaction_power;
    };
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].grid_value != b[i].grid_value) return false;
        if (!eq(a[i].mean, b[i].mean) || !eq(a[i].se, b[i].se)) return false;
        if (a[i].replicates.size() != b[i].replicates.size()) return false;
        for (std::size_t r = 0; r < a[i].replicates.size(); ++r) {
            if (!eq(a[i].replicates[r], b[i].replicates[r])) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("generate_ground_truth: term counts and coefficient ranges") {
    const GroundTruth truth = generate_ground_truth(500, 50, 50, 12345);
    CHECK(truth.n_features == 500);
    CHECK(truth.linear.size() == 50);
    CHECK(truth.interactions.size() == 50);

    std::set<std::size_t> linear_features;
    for (const LinearTerm& term : truth.linear) {
        CHECK(term.feature < 500);
        CHECK(term.coefficient > 0.0);
        CHECK(term.coefficient < 1.0);
        linear_features.insert(term.feature);
    }
    CHECK(linear_features.size() == 50);  // distinct

    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (const InteractionTerm& term : truth.interactions) {
        CHECK(term.a < term.b);
        CHECK(term.coefficient > 0.0);
        CHECK(term.coefficient < 1.0);
        // Interaction endpoints are drawn from the linear support, so every
        // product term sits between two individually detectable features.
        CHECK(linear_features.count(term.a) == 1);
        CHECK(linear_features.count(term.b) == 1);
        pairs.insert({term.a, term.b});
    }
    CHECK(pairs.size() == 50);  // distinct pairs
}

TEST_CASE("generate_ground_truth: terms are sorted") {
    const GroundTruth truth = generate_ground_truth(100, 20, 15, 9);
    CHECK(std::is_sorted(truth.linear.begin(), truth.linear.end(),
                         [](const LinearTerm& a, const LinearTerm& b) {
                             return a.feature < b.feature;
                         }));
    CHECK(std::is_sorted(truth.interactions.begin(), truth.interactions.end(),
                         [](const InteractionTerm& a, const InteractionTerm& b) {
                             return std::pair(a.a, a.b) < std::pair(b.a, b.b);
                         }));
}

TEST_CASE("generate_ground_truth: same seed reproduces, different seed varies") {
    const GroundTruth a = generate_ground_truth(80, 12, 8, 42);
    const GroundTruth b = generate_ground_truth(80, 12, 8, 42);
    const GroundTruth c = generate_ground_truth(80, 12, 8, 43);
    CHECK(same_truth(a, b));
    CHECK_FALSE(same_truth(a, c));
}

TEST_CASE("generate_ground_truth: no interactions leaves a purely linear target") {
    const GroundTruth truth = generate_ground_truth(30, 10, 0, 5);
    CHECK(truth.interactions.empty());
    CHECK(truth.linear.size() == 10);
    const std::vector<std::size_t> important = truth.important_features();
    CHECK(important.size() == 10);
}

TEST_CASE("generate_ground_truth: rejects infeasible term counts") {
    // 3 linear features admit only 3 distinct pairs.
    CHECK_THROWS_AS(generate_ground_truth(10, 3, 4, 0), Error);
    CHECK_THROWS_AS(generate_ground_truth(5, 6, 0, 0), Error);  // more linear terms than features
    CHECK_NOTHROW(generate_ground_truth(10, 3, 3, 0));
}

TEST_CASE("ground truth evaluation at the corners of the cube") {
    const GroundTruth truth = generate_ground_truth(40, 10, 6, 17);
    const std::vector<double> origin(40, 0.0);
    CHECK(truth.evaluate(origin) == 0.0);

    const std::vector<double> ones(40, 1.0);
    double expected = 0.0;
    for (const LinearTerm& t : truth.linear) expected += t.coefficient;
    for (const InteractionTerm& t : truth.interactions) expected += t.coefficient;
    CHECK(truth.evaluate(ones) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("important_features unions linear and interaction supports") {
    GroundTruth truth;
    truth.n_features = 8;
    truth.linear = {{1, 0.5}, {4, 0.2}};
    truth.interactions = {{1, 6, 0.3}};
    const std::vector<std::size_t> important = truth.important_features();
    CHECK(important == std::vector<std::size_t>{1, 4, 6});
    CHECK(truth.is_important_feature(6));
    CHECK_FALSE(truth.is_important_feature(0));
    CHECK(truth.has_interaction(1, 6));
    CHECK(truth.has_interaction(6, 1));
    CHECK_FALSE(truth.has_interaction(1, 4));
}

TEST_CASE("generate_instances: binary rows and exact noise-free targets") {
    const GroundTruth truth = generate_ground_truth(12, 4, 2, 3);
    const Dataset data = generate_instances(truth, 200, 0.5, 77);
    CHECK(data.size() == 200);
    CHECK(data.arity() == 12);
    CHECK(data.y.size() == 200);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::span<const double> row = data.X.row(i);
        for (double v : row) CHECK((v == 0.0 || v == 1.0));
        CHECK(data.y[i] == truth.evaluate(row));  // targets carry no noise
    }
}

TEST_CASE("generate_instances: column means track the Bernoulli rate") {
    const GroundTruth truth = generate_ground_truth(6, 2, 1, 11);
    const std::size_t m = 100000;
    for (double p : {0.25, 0.5, 0.8}) {
        const Dataset data = generate_instances(truth, m, p, 123);
        for (std::size_t j = 0; j < 6; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < m; ++i) sum += data.X.at(i, j);
            CHECK(std::abs(sum / static_cast<double>(m) - p) < 0.01);
        }
    }
}

TEST_CASE("generate_instances: deterministic in the seed") {
    const GroundTruth truth = generate_ground_truth(10, 3, 1, 1);
    const Dataset a = generate_instances(truth, 64, 0.5, 5);
    const Dataset b = generate_instances(truth, 64, 0.5, 5);
    const Dataset c = generate_instances(truth, 64, 0.5, 6);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    CHECK(a.X != c.X);
}

TEST_CASE("generate_instances: rate must lie strictly inside (0,1)") {
    const GroundTruth truth = generate_ground_truth(4, 2, 0, 0);
    CHECK_THROWS_AS(generate_instances(truth, 10, 0.0, 0), Error);
    CHECK_THROWS_AS(generate_instances(truth, 10, 1.0, 0), Error);
    CHECK_THROWS_AS(generate_instances(truth, 10, -0.2, 0), Error);
    CHECK_NOTHROW(generate_instances(truth, 10, 0.001, 0));
}

TEST_CASE("build_random_hierarchy: four features give a complete depth-2 tree") {
    const FeatureHierarchy h = build_random_hierarchy(4, 99);
    CHECK(h.size() == 7);
    std::vector<std::size_t> leaves;
    for (std::size_t id = 0; id < h.size(); ++id) {
        if (h.node(id).children.empty()) leaves.push_back(id);
    }
    CHECK(leaves.size() == 4);
    for (std::size_t leaf : leaves) {
        CHECK(h.node(leaf).feature_indices.size() == 1);
        CHECK(leaf_depth(h, leaf) == 2);
    }
}

TEST_CASE("build_random_hierarchy: node count is always 2n-1") {
    for (std::size_t n : {1ul, 2ul, 3ul, 5ul, 17ul, 500ul}) {
        const FeatureHierarchy h = build_random_hierarchy(n, 7);
        CHECK(h.size() == 2 * n - 1);
    }
}

TEST_CASE("build_random_hierarchy: leaves partition the feature set under any seed") {
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 0xdeadbeefull}) {
        const FeatureHierarchy h = build_random_hierarchy(23, seed);
        std::multiset<std::size_t> seen;
        for (std::size_t id = 0; id < h.size(); ++id) {
            if (!h.node(id).children.empty()) continue;
            for (std::size_t f : h.node(id).feature_indices) seen.insert(f);
        }
        std::multiset<std::size_t> expected;
        for (std::size_t f = 0; f < 23; ++f) expected.insert(f);
        CHECK(seen == expected);
    }
}

TEST_CASE("build_random_hierarchy: splits are balanced") {
    // Each internal node divides its features as evenly as possible, so
    // sibling subtree sizes never differ by more than one.
    const FeatureHierarchy h = build_random_hierarchy(37, 5);
    for (std::size_t id = 0; id < h.size(); ++id) {
        const auto& children = h.node(id).children;
        if (children.empty()) continue;
        REQUIRE(children.size() == 2);
        const std::size_t a = h.node(children[0]).feature_indices.size();
        const std::size_t b = h.node(children[1]).feature_indices.size();
        CHECK((a > b ? a - b : b - a) <= 1);
    }
}

TEST_CASE("build_random_hierarchy: different seeds shuffle the leaf order") {
    const FeatureHierarchy a = build_random_hierarchy(64, 1);
    const FeatureHierarchy b = build_random_hierarchy(64, 2);
    auto leaf_features = [](const FeatureHierarchy& h) {
        std::vector<std::size_t> out;
        for (std::size_t id = 0; id < h.size(); ++id) {
            if (h.node(id).children.empty()) out.push_back(h.node(id).feature_indices[0]);
        }
        return out;
    };
    CHECK(leaf_features(a) != leaf_features(b));
}

TEST_CASE("score: empty rejection set gives zero FDR and zero power") {
    const GroundTruth truth = generate_ground_truth(8, 3, 1, 4);
    const FeatureHierarchy h = build_random_hierarchy(8, 4);
    ImportanceReport report;
    report.nodes.resize(h.size());
    const EvaluationScore s = score(report, h, {}, truth);
    CHECK(s.feature_fdr == 0.0);
    CHECK(s.feature_power == 0.0);
    CHECK(s.interaction_fdr == 0.0);
    CHECK(s.interaction_power == 0.0);
}

TEST_CASE("score: rejecting exactly the important closure gives FDR 0 and power 1") {
    const GroundTruth truth = generate_ground_truth(16, 5, 2, 21);
    const FeatureHierarchy h = build_random_hierarchy(16, 21);

    std::vector<bool> important(16, false);
    for (std::size_t f : truth.important_features()) important[f] = true;

    ImportanceReport report;
    report.nodes.resize(h.size());
    for (std::size_t id = 0; id < h.size(); ++id) {
        const bool hit = std::any_of(h.node(id).feature_indices.begin(),
                                     h.node(id).feature_indices.end(),
                                     [&](std::size_t f) { return important[f]; });
        if (hit) report.rejected.nodes.push_back(id);
    }

    const EvaluationScore s = score(report, h, {}, truth);
    CHECK(s.feature_fdr == 0.0);
    CHECK(s.feature_power == 1.0);
}

TEST_CASE("score: hand-checked mixed rejection set") {
    // Balanced tree over 4 features; only feature 0 matters.
    GroundTruth truth;
    truth.n_features = 4;
    truth.linear = {{0, 0.7}};
    std::vector<FeatureHierarchy::NodeSpec> specs = {
        {"root", {}, {}},          {"left", "root", {}},  {"right", "root", {}},
        {"f0", "left", {0}},       {"f1", "left", {1}},   {"f2", "right", {2}},
        {"f3", "right", {3}},
    };
    const FeatureHierarchy h = FeatureHierarchy::build(specs);
    const std::size_t root = *h.find("root");
    const std::size_t left = *h.find("left");
    const std::size_t f0 = *h.find("f0");
    const std::size_t f2 = *h.find("f2");
    const std::size_t right = *h.find("right");

    // Important nodes: root, left, f0 (the ancestors of feature 0).
    ImportanceReport report;
    report.nodes.resize(h.size());
    report.rejected.nodes = {root, left, f0};
    std::sort(report.rejected.nodes.begin(), report.rejected.nodes.end());
    EvaluationScore s = score(report, h, {}, truth);
    CHECK(s.feature_fdr == 0.0);
    CHECK(s.feature_power == 1.0);

    // Adding two null nodes: 2 false among 5 rejected, power unchanged.
    report.rejected.nodes.push_back(right);
    report.rejected.nodes.push_back(f2);
    std::sort(report.rejected.nodes.begin(), report.rejected.nodes.end());
    s = score(report, h, {}, truth);
    CHECK(s.feature_fdr == doctest::Approx(0.4));
    CHECK(s.feature_power == 1.0);

    // Dropping f0 from the rejections: 2 of 3 important nodes found.
    report.rejected.nodes = {root, left, right, f2};
    std::sort(report.rejected.nodes.begin(), report.rejected.nodes.end());
    s = score(report, h, {}, truth);
    CHECK(s.feature_fdr == doctest::Approx(0.5));
    CHECK(s.feature_power == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("score: interaction coverage counts terms, not pairs") {
    GroundTruth truth;
    truth.n_features = 4;
    truth.linear = {{0, 0.5}, {1, 0.5}, {2, 0.5}};
    truth.interactions = {{0, 1, 0.4}, {2, 3, 0.4}};
    std::vector<FeatureHierarchy::NodeSpec> specs = {
        {"root", {}, {}},    {"f0", "root", {0}}, {"f1", "root", {1}},
        {"f2", "root", {2}}, {"f3", "root", {3}},
    };
    const FeatureHierarchy h = FeatureHierarchy::build(specs);
    ImportanceReport report;
    report.nodes.resize(h.size());

    auto result = [&](const char* a, const char* b, bool rejected) {
        InteractionResult r;
        r.candidate = {*h.find(a), *h.find(b)};
        r.rejected = rejected;
        return r;
    };

    // One true pair found, one true pair missed, one false alarm.
    std::vector<InteractionResult> results = {
        result("f0", "f1", true),
        result("f2", "f3", false),
        result("f1", "f2", true),
    };
    const EvaluationScore s = score(report, h, results, truth);
    CHECK(s.interaction_fdr == doctest::Approx(0.5));
    CHECK(s.interaction_power == doctest::Approx(0.5));

    // Swapping candidate orientation must not change coverage.
    std::vector<InteractionResult> flipped = {result("f1", "f0", true)};
    const EvaluationScore s2 = score(report, h, flipped, truth);
    CHECK(s2.interaction_fdr == 0.0);
    CHECK(s2.interaction_power == doctest::Approx(0.5));
}

TEST_CASE("score: a rejected group pair covers the term between its subtrees") {
    GroundTruth truth;
    truth.n_features = 4;
    truth.linear = {{0, 0.5}, {2, 0.5}};
    truth.interactions = {{0, 2, 0.4}};
    std::vector<FeatureHierarchy::NodeSpec> specs = {
        {"root", {}, {}},          {"left", "root", {}},  {"right", "root", {}},
        {"f0", "left", {0}},       {"f1", "left", {1}},   {"f2", "right", {2}},
        {"f3", "right", {3}},
    };
    const FeatureHierarchy h = FeatureHierarchy::build(specs);
    ImportanceReport report;
    report.nodes.resize(h.size());
    InteractionResult r;
    r.candidate = {*h.find("left"), *h.find("right")};
    r.rejected = true;
    const std::vector<InteractionResult> results = {r};
    const EvaluationScore s = score(report, h, results, truth);
    CHECK(s.interaction_fdr == 0.0);
    CHECK(s.interaction_power == 1.0);
}

TEST_CASE("score: rejects mismatched report and hierarchy sizes") {
    const GroundTruth truth = generate_ground_truth(8, 2, 0, 1);
    const FeatureHierarchy h = build_random_hierarchy(8, 1);
    ImportanceReport report;
    report.nodes.resize(h.size() - 1);
    CHECK_THROWS_AS(score(report, h, {}, truth), Error);
}

TEST_CASE("run_experiment: one cell per grid point with per-replicate scores") {
    ExperimentConfig config;
    config.vary = ExperimentConfig::Vary::m;
    config.grid = {32, 128};
    config.replicates = 3;
    config.n_features = 24;
    config.n_linear = 6;
    config.n_interactions = 3;
    config.sigma = 0.05;
    config.seed = 7;

    std::vector<std::pair<std::size_t, std::size_t>> calls;
    config.on_replicate = [&](std::size_t grid_idx, std::size_t rep) {
        calls.push_back({grid_idx, rep});
    };

    const std::vector<ExperimentCell> cells = run_experiment(config);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].grid_value == 32.0);
    CHECK(cells[1].grid_value == 128.0);
    CHECK(calls.size() == 6);
    for (const ExperimentCell& cell : cells) {
        REQUIRE(cell.replicates.size() == 3);
        CHECK(cell.mean.feature_fdr >= 0.0);
        CHECK(cell.mean.feature_fdr <= 1.0);
        CHECK(cell.mean.feature_power >= 0.0);
        CHECK(cell.mean.feature_power <= 1.0);
        CHECK(std::isfinite(cell.se.feature_power));
        double sum = 0.0;
        for (const EvaluationScore& r : cell.replicates) sum += r.feature_power;
        CHECK(cell.mean.feature_power == doctest::Approx(sum / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("run_experiment: noise-free replicates recover the truth exactly") {
    ExperimentConfig config;
    config.vary = ExperimentConfig::Vary::sigma;
    config.grid = {0.0};
    config.replicates = 3;
    config.n_features = 32;
    config.n_linear = 6;
    config.n_interactions = 3;
    config.m = 512;
    config.seed = 11;

    const std::vector<ExperimentCell> cells = run_experiment(config);
    REQUIRE(cells.size() == 1);
    // Without model noise every null contrast is exactly zero and every
    // real effect is exact, so selection is perfect in both directions.
    CHECK(cells[0].mean.feature_fdr == 0.0);
    CHECK(cells[0].mean.feature_power == 1.0);
    CHECK(cells[0].mean.interaction_fdr == 0.0);
    CHECK(cells[0].mean.interaction_power == 1.0);
    CHECK(cells[0].se.feature_fdr == 0.0);
}

TEST_CASE("run_experiment: deterministic and worker-count invariant") {
    ExperimentConfig config;
    config.vary = ExperimentConfig::Vary::m;
    config.grid = {64};
    config.replicates = 4;
    config.n_features = 16;
    config.n_linear = 4;
    config.n_interactions = 2;
    config.sigma = 0.1;
    config.seed = 3;

    const std::vector<ExperimentCell> once = run_experiment(config);
    const std::vector<ExperimentCell> twice = run_experiment(config);
    CHECK(same_scores(once, twice));

    config.workers = 4;
    const std::vector<ExperimentCell> parallel = run_experiment(config);
    CHECK(same_scores(once, parallel));
}

TEST_CASE("run_experiment: validates the grid against the sweep axis") {
    ExperimentConfig config;
    config.vary = ExperimentConfig::Vary::m;
    config.grid = {};
    config.replicates = 1;
    CHECK_THROWS_AS(run_experiment(config), Error);

    config.grid = {32.5};  // sample counts must be whole
    CHECK_THROWS_AS(run_experiment(config), Error);

    config.grid = {0};
    CHECK_THROWS_AS(run_experiment(config), Error);

    config.vary = ExperimentConfig::Vary::sigma;
    config.grid = {-0.5};
    CHECK_THROWS_AS(run_experiment(config), Error);
}

TEST_CASE("vary axis names round-trip") {
    CHECK(vary_name(ExperimentConfig::Vary::m) == std::string("m"));
    CHECK(vary_name(ExperimentConfig::Vary::sigma) == std::string("sigma"));
    CHECK(vary_from_name("m") == ExperimentConfig::Vary::m);
    CHECK(vary_from_name("sigma") == ExperimentConfig::Vary::sigma);
    CHECK_THROWS_AS(vary_from_name("noise"), Error);
}
