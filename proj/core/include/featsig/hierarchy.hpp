#ifndef FEATSIG_HIERARCHY_HPP
#define FEATSIG_HIERARCHY_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "featsig/stats.hpp"

namespace featsig {

struct HierarchyNode {
    std::size_t id = 0;
    std::string name;
    std::optional<std::size_t> parent;        // nullopt for the root
    std::vector<std::size_t> children;
    std::vector<std::size_t> feature_indices;  // sorted; internal nodes hold the union of their descendants

    bool is_leaf() const { return children.empty(); }
};

// Tree of feature groups over base-feature leaves.  Immutable after
// construction; validation happens in build()/load_hierarchy.
class FeatureHierarchy {
public:
    // One parsed node of a hierarchy document: `parent` empty for the root,
    // `features` nonempty exactly for leaves.
    struct NodeSpec {
        std::string name;
        std::string parent;
        std::vector<std::size_t> features;
    };

    static FeatureHierarchy build(const std::vector<NodeSpec>& specs);

    std::size_t size() const { return nodes_.size(); }
    std::size_t root_id() const { return root_; }
    const HierarchyNode& node(std::size_t id) const { return nodes_.at(id); }
    const std::vector<HierarchyNode>& nodes() const { return nodes_; }

    std::optional<std::size_t> find(const std::string& name) const;

    // Largest base-feature column index referenced by any leaf.
    std::size_t max_feature_index() const;

    // Sorted union of all leaf feature indices.
    std::vector<std::size_t> covered_features() const;

private:
    std::vector<HierarchyNode> nodes_;
    std::size_t root_ = 0;
    std::unordered_map<std::string, std::size_t> by_name_;
};

// Nodes rejected by the FDR procedure.  Parent-closed: a rejected non-root
// node's parent is also in the set.
struct RejectedSubtree {
    std::vector<std::size_t> nodes;  // sorted ascending
    std::unordered_map<std::size_t, TestResult> results;

    bool contains(std::size_t id) const;
    bool empty() const { return nodes.empty(); }
};

// Rejected nodes with no rejected children: the finest resolution at which
// importance was established.  Ordered by effect size descending (ties by
// id).  Throws invalid_argument if `rejected` is not parent-closed.
std::vector<std::size_t> outer_nodes(const FeatureHierarchy& h, const RejectedSubtree& rejected);

// Hierarchy document parsing.  The primary format is a JSON array of node
// objects {"name": ..., "parent": ..., "features": [...]}; the flat
// companion is CSV with header name,parent,features where features is a
// semicolon-joined index list.  load_hierarchy sniffs the format.
FeatureHierarchy load_hierarchy(const std::string& document);
FeatureHierarchy load_hierarchy_file(const std::string& path);
std::string hierarchy_to_json(const FeatureHierarchy& h);
std::string hierarchy_to_csv(const FeatureHierarchy& h);

}  // namespace featsig

#endif  // FEATSIG_HIERARCHY_HPP
