#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "featsig/errors.hpp"
#include "featsig/hierarchy.hpp"

using namespace featsig;

namespace {

FeatureHierarchy two_leaf_tree() {
    return FeatureHierarchy::build({
        {"root", "", {}},
        {"a", "root", {0}},
        {"b", "root", {1}},
    });
}

FeatureHierarchy balanced_four_leaf_tree() {
    return FeatureHierarchy::build({
        {"root", "", {}},
        {"g_left", "root", {}},
        {"g_right", "root", {}},
        {"f0", "g_left", {0}},
        {"f1", "g_left", {1}},
        {"f2", "g_right", {2}},
        {"f3", "g_right", {3}},
    });
}

RejectedSubtree reject(const FeatureHierarchy& h, const std::vector<std::string>& names,
                       const std::vector<double>& effects) {
    RejectedSubtree out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::size_t id = *h.find(names[i]);
        out.nodes.push_back(id);
        TestResult r;
        r.effect_size = effects[i];
        r.p_value = 0.01;
        out.results.emplace(id, r);
    }
    std::sort(out.nodes.begin(), out.nodes.end());
    return out;
}

}  // namespace

TEST_CASE("build: root feature set is the union of its leaves") {
    const FeatureHierarchy h = two_leaf_tree();
    CHECK(h.size() == 3);
    CHECK(h.node(h.root_id()).feature_indices == std::vector<std::size_t>{0, 1});
}

TEST_CASE("build: balanced 4-leaf tree has 7 nodes and full root coverage") {
    const FeatureHierarchy h = balanced_four_leaf_tree();
    CHECK(h.size() == 7);
    CHECK(h.node(h.root_id()).feature_indices == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(h.covered_features() == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(h.max_feature_index() == 3);
    for (const HierarchyNode& node : h.nodes()) {
        if (node.is_leaf()) continue;
        std::vector<std::size_t> u;
        for (std::size_t child : node.children) {
            const auto& f = h.node(child).feature_indices;
            u.insert(u.end(), f.begin(), f.end());
        }
        std::sort(u.begin(), u.end());
        CHECK(node.feature_indices == u);
    }
}

TEST_CASE("build: self-parent is reported as a cycle naming the node") {
    try {
        FeatureHierarchy::build({{"loop", "loop", {0}}});
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("loop") != std::string::npos);
        CHECK(std::string(e.what()).find("cycle") != std::string::npos);
    }
}

TEST_CASE("build: two-node parent cycle is rejected") {
    CHECK_THROWS_AS(FeatureHierarchy::build({
                        {"a", "b", {}},
                        {"b", "a", {}},
                        {"leaf", "a", {0}},
                    }),
                    Error);
}

TEST_CASE("build: structural validation errors") {
    // multiple roots
    CHECK_THROWS_AS(FeatureHierarchy::build({
                        {"r1", "", {0}},
                        {"r2", "", {1}},
                    }),
                    Error);
    // unknown parent
    CHECK_THROWS_AS(FeatureHierarchy::build({
                        {"root", "", {}},
                        {"a", "ghost", {0}},
                    }),
                    Error);
    // duplicate feature across leaves
    CHECK_THROWS_AS(FeatureHierarchy::build({
                        {"root", "", {}},
                        {"a", "root", {0}},
                        {"b", "root", {0}},
                    }),
                    Error);
    // duplicate node name
    CHECK_THROWS_AS(FeatureHierarchy::build({
                        {"root", "", {}},
                        {"a", "root", {0}},
                        {"a", "root", {1}},
                    }),
                    Error);
    // empty input
    CHECK_THROWS_AS(FeatureHierarchy::build({}), Error);
    // internal node with no features anywhere below it
    CHECK_THROWS_AS(FeatureHierarchy::build({
                        {"root", "", {}},
                        {"a", "root", {0}},
                        {"hollow", "root", {}},
                    }),
                    Error);
}

TEST_CASE("outer nodes: root-only rejection") {
    const FeatureHierarchy h = two_leaf_tree();
    const RejectedSubtree r = reject(h, {"root"}, {1.0});
    CHECK(outer_nodes(h, r) == std::vector<std::size_t>{h.root_id()});
}

TEST_CASE("outer nodes: child shadows its rejected parent") {
    const FeatureHierarchy h = two_leaf_tree();
    const RejectedSubtree r = reject(h, {"root", "a"}, {1.0, 2.0});
    CHECK(outer_nodes(h, r) == std::vector<std::size_t>{*h.find("a")});
}

TEST_CASE("outer nodes: empty rejection") {
    const FeatureHierarchy h = two_leaf_tree();
    CHECK(outer_nodes(h, RejectedSubtree{}).empty());
}

TEST_CASE("outer nodes: ordered by effect size descending") {
    const FeatureHierarchy h = balanced_four_leaf_tree();
    const RejectedSubtree r =
        reject(h, {"root", "g_left", "g_right", "f0", "f3"}, {9, 8, 7, 0.5, 2.0});
    const std::vector<std::size_t> outer = outer_nodes(h, r);
    CHECK(outer == std::vector<std::size_t>{*h.find("f3"), *h.find("f0")});
}

TEST_CASE("outer nodes: non-parent-closed input is rejected") {
    const FeatureHierarchy h = two_leaf_tree();
    const RejectedSubtree r = reject(h, {"a"}, {1.0});
    CHECK_THROWS_AS(outer_nodes(h, r), Error);
}

TEST_CASE("outer nodes: result is a subset of rejected with no rejected children") {
    const FeatureHierarchy h = balanced_four_leaf_tree();
    const RejectedSubtree r = reject(h, {"root", "g_left", "f1"}, {3, 2, 1});
    for (std::size_t id : outer_nodes(h, r)) {
        CHECK(r.contains(id));
        for (std::size_t child : h.node(id).children) CHECK_FALSE(r.contains(child));
    }
}

TEST_CASE("documents: JSON array round-trips") {
    const FeatureHierarchy h = balanced_four_leaf_tree();
    const FeatureHierarchy back = load_hierarchy(hierarchy_to_json(h));
    REQUIRE(back.size() == h.size());
    for (std::size_t id = 0; id < h.size(); ++id) {
        CHECK(back.node(id).name == h.node(id).name);
        CHECK(back.node(id).parent == h.node(id).parent);
        CHECK(back.node(id).feature_indices == h.node(id).feature_indices);
    }
}

TEST_CASE("documents: CSV companion round-trips") {
    const FeatureHierarchy h = balanced_four_leaf_tree();
    const FeatureHierarchy back = load_hierarchy(hierarchy_to_csv(h));
    REQUIRE(back.size() == h.size());
    for (std::size_t id = 0; id < h.size(); ++id) {
        CHECK(back.node(id).name == h.node(id).name);
        CHECK(back.node(id).parent == h.node(id).parent);
        CHECK(back.node(id).feature_indices == h.node(id).feature_indices);
    }
}

TEST_CASE("documents: malformed hierarchy content raises a data error") {
    CHECK_THROWS_AS(load_hierarchy("{not json"), Error);
    CHECK_THROWS_AS(load_hierarchy("[{\"parent\": \"x\"}]"), Error);  // nameless node
}

TEST_CASE("documents: wrapped object form is accepted") {
    const FeatureHierarchy h = two_leaf_tree();
    const std::string wrapped = "{\"nodes\": " + hierarchy_to_json(h) + "}";
    CHECK(load_hierarchy(wrapped).size() == 3);
}

TEST_CASE("find: present and absent names") {
    const FeatureHierarchy h = two_leaf_tree();
    CHECK(h.find("a").has_value());
    CHECK_FALSE(h.find("zzz").has_value());
}
