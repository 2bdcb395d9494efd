#include "featsig/importance.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <numeric>
#include <string>

#include "featsig/errors.hpp"
#include "featsig/parallel.hpp"
#include "featsig/rng.hpp"

namespace featsig {

namespace {

double mean_of(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

bool binary_targets(std::span<const double> y) {
    bool saw_zero = false;
    bool saw_one = false;
    for (double v : y) {
        if (v == 0.0) {
            saw_zero = true;
        } else if (v == 1.0) {
            saw_one = true;
        } else {
            return false;
        }
    }
    return saw_zero && saw_one;
}

NodeTestRecord test_node_impl(const ModelHandle& model, const Dataset& data,
                              std::span<const std::size_t> features,
                              const PerturbationSpec& spec, Loss loss, Tail tail,
                              std::span<const double> baseline, Matrix& scratch,
                              bool want_auroc) {
    const std::size_t m = data.size();
    const PerturbedBatch batch = apply(data.X, features, spec);
    const std::size_t replicates = batch.replicates();

    std::vector<double> accum(m, 0.0);
    double auroc_sum = 0.0;
    std::size_t auroc_count = 0;
    for (std::size_t p = 0; p < replicates; ++p) {
        batch.perturb_in_place(scratch, p);
        const std::vector<double> preds = model.predict(scratch);
        const std::vector<double> losses = per_instance_losses(data.y, preds, loss);
        for (std::size_t i = 0; i < m; ++i) accum[i] += losses[i];
        if (want_auroc) {
            if (const std::optional<double> a = auroc(preds, data.y)) {
                auroc_sum += *a;
                ++auroc_count;
            }
        }
    }
    batch.restore(scratch);

    std::vector<double> diffs(m);
    const double inv = 1.0 / static_cast<double>(replicates);
    for (std::size_t i = 0; i < m; ++i) {
        diffs[i] = accum[i] * inv - baseline[i];
    }

    NodeTestRecord record;
    record.tested = true;
    record.test = wilcoxon_signed_rank(diffs, tail);
    record.mean_baseline_loss = mean_of(baseline);
    record.mean_perturbed_loss = record.mean_baseline_loss + mean_of(diffs);
    if (auroc_count > 0) {
        record.auroc_perturbed = auroc_sum / static_cast<double>(auroc_count);
    }
    return record;
}

}  // namespace

std::uint64_t node_stream_seed(std::uint64_t seed, const std::string& node_name) {
    return mix_seed(seed, hash_bytes(0x6665617473696721ull, node_name.data(), node_name.size()));
}

NodeTestRecord test_node(const ModelHandle& model, const Dataset& data,
                         std::span<const std::size_t> features, const PerturbationSpec& spec,
                         Loss loss, Tail tail, std::span<const double> baseline) {
    data.validate();
    if (model.arity() != data.arity()) {
        throw data_error("data arity " + std::to_string(data.arity()) +
                         " does not match model arity " + std::to_string(model.arity()));
    }
    std::vector<double> base;
    if (baseline.empty()) {
        base = baseline_losses(model, data, loss);
        baseline = base;
    } else if (baseline.size() != data.size()) {
        throw invalid_argument_error("baseline loss vector length does not match the data");
    }
    Matrix scratch = data.X;
    return test_node_impl(model, data, features, spec, loss, tail, baseline, scratch,
                          binary_targets(data.y));
}

RejectedSubtree hierarchical_fdr(
    const FeatureHierarchy& hierarchy, double q,
    const std::function<TestResult(std::size_t)>& test_of,
    const std::function<void(std::span<const std::size_t>)>& prefetch) {
    if (!(q > 0.0 && q < 1.0)) {
        throw invalid_argument_error("q must lie strictly between 0 and 1");
    }
    RejectedSubtree out;

    const std::size_t root = hierarchy.root_id();
    if (prefetch) prefetch(std::span<const std::size_t>(&root, 1));
    const TestResult root_test = test_of(root);
    out.results.emplace(root, root_test);
    if (!(root_test.p_value <= q)) return out;
    out.nodes.push_back(root);

    std::deque<std::size_t> frontier{root};
    while (!frontier.empty()) {
        const std::size_t id = frontier.front();
        frontier.pop_front();
        const std::vector<std::size_t>& children = hierarchy.node(id).children;
        if (children.empty()) continue;

        if (prefetch) prefetch(children);
        std::vector<double> p_values(children.size());
        for (std::size_t c = 0; c < children.size(); ++c) {
            const TestResult t = test_of(children[c]);
            out.results.emplace(children[c], t);
            p_values[c] = t.p_value;
        }
        for (std::size_t rejected : benjamini_hochberg(p_values, q)) {
            out.nodes.push_back(children[rejected]);
            frontier.push_back(children[rejected]);
        }
    }
    std::sort(out.nodes.begin(), out.nodes.end());
    return out;
}

RejectedSubtree hierarchical_fdr(const FeatureHierarchy& hierarchy, double q,
                                 std::span<const std::optional<TestResult>> results) {
    if (results.size() != hierarchy.size()) {
        throw invalid_argument_error("result vector length does not match the hierarchy");
    }
    return hierarchical_fdr(hierarchy, q, [&](std::size_t id) {
        if (!results[id].has_value()) {
            throw internal_error("node " + std::to_string(id) +
                                 " was visited by the selection walk but has no test result");
        }
        return *results[id];
    });
}

ImportanceReport analyze(const ModelHandle& model, const Dataset& data,
                         const FeatureHierarchy& hierarchy, const AnalysisConfig& config) {
    data.validate();
    if (model.arity() != data.arity()) {
        throw data_error("data arity " + std::to_string(data.arity()) +
                         " does not match model arity " + std::to_string(model.arity()));
    }
    if (hierarchy.max_feature_index() >= data.arity()) {
        throw data_error("hierarchy references feature " +
                         std::to_string(hierarchy.max_feature_index()) + " but data has " +
                         std::to_string(data.arity()) + " columns");
    }
    if (!(config.q > 0.0 && config.q < 1.0)) {
        throw invalid_argument_error("q must lie strictly between 0 and 1");
    }
    const std::vector<std::size_t> covered = hierarchy.covered_features();
    if (covered.size() < data.arity()) {
        std::fprintf(stderr,
                     "warning: %zu of %zu data columns are not covered by any leaf and are "
                     "never perturbed\n",
                     data.arity() - covered.size(), data.arity());
    }

    const std::vector<double> baseline = baseline_losses(model, data, config.loss);
    const bool want_auroc = binary_targets(data.y);
    const std::size_t workers = std::max<std::size_t>(1, config.workers);

    ImportanceReport report;
    report.config = config;
    report.nodes.resize(hierarchy.size());
    for (std::size_t id = 0; id < hierarchy.size(); ++id) {
        report.nodes[id].node_id = id;
    }

    std::vector<Matrix> scratch(workers, data.X);
    auto run_test = [&](std::size_t worker, std::size_t id) {
        const HierarchyNode& node = hierarchy.node(id);
        PerturbationSpec spec = config.perturbation.with_seed(
            node_stream_seed(config.perturbation.seed, node.name));
        NodeTestRecord record =
            test_node_impl(model, data, node.feature_indices, spec, config.loss, config.tail,
                           baseline, scratch[worker], want_auroc);
        record.node_id = id;
        report.nodes[id] = record;
    };

    if (!config.lazy) {
        parallel_for(workers, hierarchy.size(), run_test);
        std::vector<std::optional<TestResult>> results(hierarchy.size());
        for (std::size_t id = 0; id < hierarchy.size(); ++id) {
            results[id] = report.nodes[id].test;
        }
        report.rejected = hierarchical_fdr(hierarchy, config.q, results);
    } else {
        auto prefetch = [&](std::span<const std::size_t> ids) {
            std::vector<std::size_t> pending;
            for (std::size_t id : ids) {
                if (!report.nodes[id].tested) pending.push_back(id);
            }
            parallel_for(workers, pending.size(),
                         [&](std::size_t worker, std::size_t k) { run_test(worker, pending[k]); });
        };
        auto provider = [&](std::size_t id) -> TestResult {
            if (!report.nodes[id].tested) {
                throw internal_error("lazy walk requested node " + std::to_string(id) +
                                     " before it was tested");
            }
            return report.nodes[id].test;
        };
        report.rejected = hierarchical_fdr(hierarchy, config.q, provider, prefetch);
    }

    report.outer = outer_nodes(hierarchy, report.rejected);

    report.summary.total_nodes = hierarchy.size();
    for (const NodeTestRecord& record : report.nodes) {
        if (!record.tested) continue;
        ++report.summary.tested_nodes;
        if (record.test.p_value < 0.05) ++report.summary.unadjusted_significant;
    }
    report.summary.rejected_nodes = report.rejected.nodes.size();
    report.summary.outer_nodes = report.outer.size();
    for (std::size_t id : report.outer) {
        if (!hierarchy.node(id).is_leaf()) ++report.summary.outer_groups;
    }
    return report;
}

}  // namespace featsig
