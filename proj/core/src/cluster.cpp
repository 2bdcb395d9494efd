#include "featsig/cluster.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>

#include "featsig/errors.hpp"

namespace featsig {

namespace {

struct TempNode {
    long left = -1;   // temp id, -1 for leaves
    long right = -1;
    std::size_t column = 0;  // leaves only
    std::size_t distance = 0;
};

// Pairwise column Hamming distances via packed bit columns.
std::vector<std::uint32_t> column_distances(const Matrix& X) {
    const std::size_t m = X.rows();
    const std::size_t n = X.cols();
    const std::size_t words = (m + 63) / 64;
    std::vector<std::uint64_t> packed(n * words, 0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = X.at(i, j);
            if (v != 0.0 && v != 1.0) {
                throw data_error("clustering requires a binary matrix; found " +
                                 std::to_string(v) + " at row " + std::to_string(i) +
                                 ", column " + std::to_string(j));
            }
            if (v == 1.0) packed[j * words + i / 64] |= 1ull << (i % 64);
        }
    }
    std::vector<std::uint32_t> D(n * n, 0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            std::uint32_t bits = 0;
            for (std::size_t w = 0; w < words; ++w) {
                bits += static_cast<std::uint32_t>(
                    std::popcount(packed[a * words + w] ^ packed[b * words + w]));
            }
            D[a * n + b] = bits;
            D[b * n + a] = bits;
        }
    }
    return D;
}

}  // namespace

ClusterResult constrained_cluster(const Matrix& X, std::span<const std::size_t> order,
                                  std::span<const std::string> column_names) {
    const std::size_t n = X.cols();
    if (n == 0 || X.rows() == 0) {
        throw invalid_argument_error("clustering needs a nonempty matrix");
    }
    std::vector<std::size_t> layout;
    if (order.empty()) {
        layout.resize(n);
        for (std::size_t j = 0; j < n; ++j) layout[j] = j;
    } else {
        layout.assign(order.begin(), order.end());
        std::vector<bool> seen(n, false);
        if (layout.size() != n) {
            throw invalid_argument_error("column order must list every column exactly once");
        }
        for (std::size_t j : layout) {
            if (j >= n || seen[j]) {
                throw invalid_argument_error("column order is not a permutation of 0.." +
                                             std::to_string(n - 1));
            }
            seen[j] = true;
        }
    }
    if (!column_names.empty() && column_names.size() != n) {
        throw invalid_argument_error("column name count does not match the matrix");
    }

    const std::vector<std::uint32_t> D = column_distances(X);

    std::vector<TempNode> temp(n);
    for (std::size_t p = 0; p < n; ++p) temp[p].column = layout[p];

    // Active adjacent clusters, left to right; columns per cluster feed the
    // complete-linkage recomputation after each merge.
    std::vector<long> active(n);
    for (std::size_t p = 0; p < n; ++p) active[p] = static_cast<long>(p);
    auto linkage = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        std::uint32_t worst = 0;
        for (std::size_t ca : a) {
            for (std::size_t cb : b) {
                worst = std::max(worst, D[ca * n + cb]);
            }
        }
        return worst;
    };
    std::vector<std::uint32_t> link(n > 0 ? n - 1 : 0, 0);
    for (std::size_t p = 0; p + 1 < n; ++p) {
        link[p] = D[layout[p] * n + layout[p + 1]];
    }

    struct TempStep {
        long left;
        long right;
        long merged;
        std::size_t distance;
    };
    std::vector<TempStep> temp_steps;
    std::vector<std::vector<std::size_t>> member_of(n);
    for (std::size_t p = 0; p < n; ++p) member_of[p] = {layout[p]};

    while (active.size() > 1) {
        std::size_t best = 0;
        for (std::size_t p = 1; p < link.size(); ++p) {
            if (link[p] < link[best]) best = p;
        }
        const long left_id = active[best];
        const long right_id = active[best + 1];
        const long merged_id = static_cast<long>(temp.size());
        TempNode node;
        node.left = left_id;
        node.right = right_id;
        node.distance = link[best];
        temp.push_back(node);
        temp_steps.push_back({left_id, right_id, merged_id, link[best]});

        std::vector<std::size_t> merged_members = member_of[static_cast<std::size_t>(left_id)];
        const auto& rm = member_of[static_cast<std::size_t>(right_id)];
        merged_members.insert(merged_members.end(), rm.begin(), rm.end());
        member_of.push_back(std::move(merged_members));

        active[best] = merged_id;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best) + 1);
        link.erase(link.begin() + static_cast<std::ptrdiff_t>(best));
        const auto& mm = member_of[static_cast<std::size_t>(merged_id)];
        if (best > 0) {
            link[best - 1] = linkage(member_of[static_cast<std::size_t>(active[best - 1])], mm);
        }
        if (best + 1 < active.size()) {
            link[best] = linkage(mm, member_of[static_cast<std::size_t>(active[best + 1])]);
        }
    }

    // Pre-order emission: parents precede children and the left child
    // precedes the right, so node ids are pre-order and children stay in
    // left-right order.
    std::unordered_set<std::string> used_names;
    std::vector<std::string> leaf_name(n);
    for (std::size_t p = 0; p < n; ++p) {
        leaf_name[p] = column_names.empty() ? "f" + std::to_string(layout[p])
                                            : std::string(column_names[layout[p]]);
        used_names.insert(leaf_name[p]);
    }
    auto internal_name = [&](std::size_t step_index) {
        std::string name = "g" + std::to_string(step_index);
        while (used_names.contains(name)) name = "_" + name;
        used_names.insert(name);
        return name;
    };
    std::unordered_map<long, std::size_t> step_of_merged;
    for (std::size_t s = 0; s < temp_steps.size(); ++s) {
        step_of_merged.emplace(temp_steps[s].merged, s);
    }

    std::vector<FeatureHierarchy::NodeSpec> specs;
    specs.reserve(temp.size());
    std::vector<std::size_t> final_id(temp.size(), 0);
    auto emit = [&](auto&& self, long id, const std::string& parent) -> void {
        const TempNode& node = temp[static_cast<std::size_t>(id)];
        final_id[static_cast<std::size_t>(id)] = specs.size();
        if (node.left < 0) {
            const std::size_t p = static_cast<std::size_t>(id);
            specs.push_back({leaf_name[p], parent, {node.column}});
            return;
        }
        const std::string name = internal_name(step_of_merged.at(id));
        specs.push_back({name, parent, {}});
        self(self, node.left, name);
        self(self, node.right, name);
    };
    emit(emit, active[0], "");

    ClusterResult result;
    result.hierarchy = FeatureHierarchy::build(specs);
    result.steps.reserve(temp_steps.size());
    for (const TempStep& s : temp_steps) {
        result.steps.push_back({final_id[static_cast<std::size_t>(s.left)],
                                final_id[static_cast<std::size_t>(s.right)],
                                final_id[static_cast<std::size_t>(s.merged)], s.distance});
    }
    return result;
}

std::vector<std::vector<std::size_t>> cut_clusters(const ClusterResult& result,
                                                   std::size_t max_bit_difference) {
    const FeatureHierarchy& h = result.hierarchy;
    std::vector<std::size_t> merge_distance(h.size(), 0);
    for (const LinkageStep& step : result.steps) {
        merge_distance[step.merged] = step.distance;
    }
    // Worst merge anywhere in the subtree; pre-order ids let a reverse scan
    // fold children into parents.
    std::vector<std::size_t> subtree_worst = merge_distance;
    for (std::size_t id = h.size(); id-- > 0;) {
        if (const auto parent = h.node(id).parent) {
            subtree_worst[*parent] = std::max(subtree_worst[*parent], subtree_worst[id]);
        }
    }

    std::vector<std::vector<std::size_t>> clusters;
    auto walk = [&](auto&& self, std::size_t id) -> void {
        const HierarchyNode& node = h.node(id);
        if (node.is_leaf() || subtree_worst[id] <= max_bit_difference) {
            std::vector<std::size_t> columns;
            auto collect = [&](auto&& inner, std::size_t at) -> void {
                const HierarchyNode& cur = h.node(at);
                if (cur.is_leaf()) {
                    columns.insert(columns.end(), cur.feature_indices.begin(),
                                   cur.feature_indices.end());
                    return;
                }
                for (std::size_t child : cur.children) inner(inner, child);
            };
            collect(collect, id);
            clusters.push_back(std::move(columns));
            return;
        }
        for (std::size_t child : node.children) self(self, child);
    };
    walk(walk, h.root_id());
    return clusters;
}

}  // namespace featsig
