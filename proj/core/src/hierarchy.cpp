#include "featsig/hierarchy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "featsig/errors.hpp"

namespace featsig {

namespace {

void merge_sorted_into(std::vector<std::size_t>& dst, const std::vector<std::size_t>& src) {
    std::vector<std::size_t> merged;
    merged.reserve(dst.size() + src.size());
    std::merge(dst.begin(), dst.end(), src.begin(), src.end(), std::back_inserter(merged));
    dst = std::move(merged);
}

}  // namespace

FeatureHierarchy FeatureHierarchy::build(const std::vector<NodeSpec>& specs) {
    if (specs.empty()) throw data_error("hierarchy document contains no nodes");

    FeatureHierarchy h;
    h.nodes_.resize(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const NodeSpec& spec = specs[i];
        if (spec.name.empty()) throw data_error("hierarchy node " + std::to_string(i) + " has an empty name");
        if (!h.by_name_.emplace(spec.name, i).second)
            throw data_error("duplicate node name '" + spec.name + "'");
        h.nodes_[i].id = i;
        h.nodes_[i].name = spec.name;
        h.nodes_[i].feature_indices = spec.features;
        std::sort(h.nodes_[i].feature_indices.begin(), h.nodes_[i].feature_indices.end());
        auto dup = std::adjacent_find(h.nodes_[i].feature_indices.begin(), h.nodes_[i].feature_indices.end());
        if (dup != h.nodes_[i].feature_indices.end())
            throw data_error("node '" + spec.name + "' lists feature " + std::to_string(*dup) + " twice");
    }

    std::optional<std::size_t> root;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const NodeSpec& spec = specs[i];
        if (spec.parent.empty()) {
            if (root.has_value())
                throw data_error("multiple roots: '" + h.nodes_[*root].name + "' and '" + spec.name + "'");
            root = i;
            continue;
        }
        auto it = h.by_name_.find(spec.parent);
        if (it == h.by_name_.end())
            throw data_error("node '" + spec.name + "' references unknown parent '" + spec.parent + "'");
        if (it->second == i)
            throw data_error("cycle: node '" + spec.name + "' is its own parent");
        h.nodes_[i].parent = it->second;
        h.nodes_[it->second].children.push_back(i);
    }
    if (!root.has_value()) throw data_error("hierarchy has no root (every node names a parent: cycle)");
    h.root_ = *root;

    // Reachability from the root; with one root and all parents resolved,
    // unreachable nodes can only sit on a parent-link cycle.
    std::vector<bool> reached(h.nodes_.size(), false);
    std::vector<std::size_t> stack{h.root_};
    std::vector<std::size_t> postorder;
    postorder.reserve(h.nodes_.size());
    while (!stack.empty()) {
        std::size_t id = stack.back();
        stack.pop_back();
        if (reached[id]) continue;
        reached[id] = true;
        postorder.push_back(id);
        for (std::size_t c : h.nodes_[id].children) stack.push_back(c);
    }
    for (std::size_t i = 0; i < h.nodes_.size(); ++i) {
        if (!reached[i])
            throw data_error("cycle: node '" + h.nodes_[i].name + "' is not reachable from the root");
    }

    // Leaves must carry features, internal nodes must not (their sets are
    // materialized as the union of their children).
    for (const HierarchyNode& n : h.nodes_) {
        if (n.is_leaf() && n.feature_indices.empty())
            throw data_error("leaf node '" + n.name + "' lists no features");
        if (!n.is_leaf() && !n.feature_indices.empty())
            throw data_error("internal node '" + n.name + "' must not list features");
    }

    // Disjointness across leaves.
    {
        std::unordered_map<std::size_t, std::size_t> owner;
        for (const HierarchyNode& n : h.nodes_) {
            if (!n.is_leaf()) continue;
            for (std::size_t f : n.feature_indices) {
                auto [it, inserted] = owner.emplace(f, n.id);
                if (!inserted)
                    throw data_error("feature " + std::to_string(f) + " appears in both leaf '" +
                                     h.nodes_[it->second].name + "' and leaf '" + n.name + "'");
            }
        }
    }

    // Materialize internal feature sets bottom-up (reverse of the DFS
    // discovery order, which visits parents before children).
    for (auto it = postorder.rbegin(); it != postorder.rend(); ++it) {
        HierarchyNode& n = h.nodes_[*it];
        if (n.is_leaf()) continue;
        for (std::size_t c : n.children) {
            merge_sorted_into(n.feature_indices, h.nodes_[c].feature_indices);
        }
    }
    return h;
}

std::optional<std::size_t> FeatureHierarchy::find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::size_t FeatureHierarchy::max_feature_index() const {
    const auto& root_set = nodes_[root_].feature_indices;
    return root_set.empty() ? 0 : root_set.back();
}

std::vector<std::size_t> FeatureHierarchy::covered_features() const {
    return nodes_[root_].feature_indices;
}

bool RejectedSubtree::contains(std::size_t id) const {
    return std::binary_search(nodes.begin(), nodes.end(), id);
}

std::vector<std::size_t> outer_nodes(const FeatureHierarchy& h, const RejectedSubtree& rejected) {
    for (std::size_t id : rejected.nodes) {
        const HierarchyNode& n = h.node(id);
        if (n.parent.has_value() && !rejected.contains(*n.parent))
            throw invalid_argument_error("rejected set is not parent-closed at node '" + n.name + "'");
    }

    std::vector<std::size_t> outer;
    for (std::size_t id : rejected.nodes) {
        const HierarchyNode& n = h.node(id);
        bool has_rejected_child = false;
        for (std::size_t c : n.children) {
            if (rejected.contains(c)) {
                has_rejected_child = true;
                break;
            }
        }
        if (!has_rejected_child) outer.push_back(id);
    }

    auto effect_of = [&](std::size_t id) {
        auto it = rejected.results.find(id);
        return it == rejected.results.end() ? 0.0 : it->second.effect_size;
    };
    std::stable_sort(outer.begin(), outer.end(), [&](std::size_t a, std::size_t b) {
        double ea = effect_of(a), eb = effect_of(b);
        if (ea != eb) return ea > eb;
        return a < b;
    });
    return outer;
}

namespace {

using nlohmann::ordered_json;

std::vector<std::size_t> parse_feature_array(const ordered_json& j, const std::string& node_name) {
    std::vector<std::size_t> features;
    if (!j.is_array()) throw data_error("node '" + node_name + "': features must be an array");
    for (const auto& v : j) {
        if (!v.is_number_unsigned())
            throw data_error("node '" + node_name + "': feature indices must be nonnegative integers");
        features.push_back(v.get<std::size_t>());
    }
    return features;
}

FeatureHierarchy load_hierarchy_json(const std::string& document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw data_error(std::string("hierarchy JSON parse error: ") + e.what());
    }
    if (doc.is_object() && doc.contains("nodes")) doc = doc["nodes"];
    if (!doc.is_array()) throw data_error("hierarchy JSON must be an array of node objects");

    std::vector<FeatureHierarchy::NodeSpec> specs;
    specs.reserve(doc.size());
    for (const auto& jn : doc) {
        if (!jn.is_object()) throw data_error("hierarchy JSON entries must be objects");
        FeatureHierarchy::NodeSpec spec;
        if (!jn.contains("name") || !jn["name"].is_string())
            throw data_error("hierarchy node missing string field 'name'");
        spec.name = jn["name"].get<std::string>();
        if (jn.contains("parent") && !jn["parent"].is_null())
            spec.parent = jn["parent"].get<std::string>();
        if (jn.contains("features") && !jn["features"].is_null())
            spec.features = parse_feature_array(jn["features"], spec.name);
        specs.push_back(std::move(spec));
    }
    return FeatureHierarchy::build(specs);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

FeatureHierarchy load_hierarchy_csv(const std::string& document) {
    std::istringstream in(document);
    std::string line;
    if (!std::getline(in, line)) throw data_error("empty hierarchy CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "name,parent,features")
        throw data_error("hierarchy CSV must start with header 'name,parent,features'");

    std::vector<FeatureHierarchy::NodeSpec> specs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw data_error("hierarchy CSV line " + std::to_string(lineno) + ": expected 3 fields");
        FeatureHierarchy::NodeSpec spec;
        spec.name = fields[0];
        spec.parent = fields[1];
        if (!fields[2].empty()) {
            std::istringstream fs(fields[2]);
            std::string tok;
            while (std::getline(fs, tok, ';')) {
                try {
                    spec.features.push_back(std::stoul(tok));
                } catch (const std::exception&) {
                    throw data_error("hierarchy CSV line " + std::to_string(lineno) +
                                     ": bad feature index '" + tok + "'");
                }
            }
        }
        specs.push_back(std::move(spec));
    }
    return FeatureHierarchy::build(specs);
}

}  // namespace

FeatureHierarchy load_hierarchy(const std::string& document) {
    for (char c : document) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        if (c == '[' || c == '{') return load_hierarchy_json(document);
        break;
    }
    return load_hierarchy_csv(document);
}

FeatureHierarchy load_hierarchy_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_argument_error("cannot open hierarchy file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_hierarchy(buf.str());
}

std::string hierarchy_to_json(const FeatureHierarchy& h) {
    ordered_json arr = ordered_json::array();
    for (const HierarchyNode& n : h.nodes()) {
        ordered_json jn;
        jn["name"] = n.name;
        if (n.parent.has_value()) jn["parent"] = h.node(*n.parent).name;
        if (n.is_leaf()) jn["features"] = n.feature_indices;
        arr.push_back(std::move(jn));
    }
    return arr.dump(2) + "\n";
}

std::string hierarchy_to_csv(const FeatureHierarchy& h) {
    std::ostringstream out;
    out << "name,parent,features\n";
    for (const HierarchyNode& n : h.nodes()) {
        out << n.name << ',';
        if (n.parent.has_value()) out << h.node(*n.parent).name;
        out << ',';
        if (n.is_leaf()) {
            for (std::size_t i = 0; i < n.feature_indices.size(); ++i) {
                if (i) out << ';';
                out << n.feature_indices[i];
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace featsig
