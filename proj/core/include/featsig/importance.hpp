#ifndef FEATSIG_IMPORTANCE_HPP
#define FEATSIG_IMPORTANCE_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "featsig/data.hpp"
#include "featsig/hierarchy.hpp"
#include "featsig/model.hpp"
#include "featsig/perturb.hpp"
#include "featsig/stats.hpp"

namespace featsig {

struct AnalysisConfig {
    double q = 0.05;
    PerturbationSpec perturbation = PerturbationSpec::permutation(500, 0);
    Loss loss = Loss::squared_error;
    Tail tail = Tail::greater;  // two_sided flips on loss drops too
    bool lazy = false;          // test nodes only as the descent reaches them
    std::size_t workers = 1;
};

struct NodeTestRecord {
    std::size_t node_id = 0;
    bool tested = false;
    TestResult test;  // meaningful iff tested
    double mean_baseline_loss = 0.0;
    double mean_perturbed_loss = 0.0;
    std::optional<double> auroc_perturbed;  // binary targets only
};

struct SummaryCounts {
    std::size_t total_nodes = 0;
    std::size_t tested_nodes = 0;
    std::size_t unadjusted_significant = 0;  // tested with raw p < 0.05
    std::size_t rejected_nodes = 0;
    std::size_t outer_nodes = 0;
    std::size_t outer_groups = 0;  // outer nodes that are not leaves
};

struct ImportanceReport {
    AnalysisConfig config;
    std::vector<NodeTestRecord> nodes;  // indexed by node id
    RejectedSubtree rejected;
    std::vector<std::size_t> outer;  // effect size descending
    SummaryCounts summary;
};

// Tests one feature set: perturbs it, averages the per-instance loss shift
// over the replicates, and runs the signed-rank test on the shifts.
// `baseline` are the per-instance unperturbed losses; when empty they are
// computed here.  The perturbation stream is keyed by spec.seed, so two
// calls with equal seeds and feature sets agree exactly.
NodeTestRecord test_node(const ModelHandle& model, const Dataset& data,
                         std::span<const std::size_t> features, const PerturbationSpec& spec,
                         Loss loss, Tail tail = Tail::greater,
                         std::span<const double> baseline = {});

// Top-down hierarchical selection:
//   - the root is rejected iff its raw p-value is at most q,
//   - the children of every rejected node are tested together with a
//     Benjamini-Hochberg pass at level q,
//   - only rejected children are descended into.
// The result is parent-closed by construction.  `test_of` supplies the
// test for a node the first time the walk reaches it; `prefetch`, when
// given, is told which nodes are about to be requested so a batch
// implementation can compute them together.
RejectedSubtree hierarchical_fdr(
    const FeatureHierarchy& hierarchy, double q,
    const std::function<TestResult(std::size_t)>& test_of,
    const std::function<void(std::span<const std::size_t>)>& prefetch = {});

// Same walk over precomputed results, indexed by node id.  A node the walk
// visits must carry a result; a missing one is an internal error.
RejectedSubtree hierarchical_fdr(const FeatureHierarchy& hierarchy, double q,
                                 std::span<const std::optional<TestResult>> results);

// Full pipeline: per-node tests (eager, or lazy along the descent),
// hierarchical selection, outer-node extraction, summary counts.  Reports
// are byte-stable across worker counts and across lazy/eager because each
// node's perturbation stream is keyed by (config seed, node name).
ImportanceReport analyze(const ModelHandle& model, const Dataset& data,
                         const FeatureHierarchy& hierarchy, const AnalysisConfig& config);

// Perturbation seed for a node, derived from the configured seed and the
// node's name so it does not depend on traversal order or node ids.
std::uint64_t node_stream_seed(std::uint64_t seed, const std::string& node_name);

}  // namespace featsig

#endif  // FEATSIG_IMPORTANCE_HPP
