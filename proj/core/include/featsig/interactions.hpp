#ifndef FEATSIG_INTERACTIONS_HPP
#define FEATSIG_INTERACTIONS_HPP

#include <span>
#include <vector>

#include "featsig/data.hpp"
#include "featsig/hierarchy.hpp"
#include "featsig/model.hpp"
#include "featsig/perturb.hpp"
#include "featsig/stats.hpp"

namespace featsig {

// Unordered pair of hierarchy nodes, normalized node_a < node_b.
struct InteractionCandidate {
    std::size_t node_a = 0;
    std::size_t node_b = 0;
};

struct InteractionResult {
    InteractionCandidate candidate;
    TestResult test;  // two-sided; effect size is the mean nonadditivity
    bool rejected = false;
    bool loss_based = false;
};

struct InteractionAnalysis {
    double q = 0.05;
    PerturbationSpec spec;
    Loss loss = Loss::squared_error;
    bool loss_based = false;
    std::vector<InteractionResult> results;  // p-value ascending
    std::size_t rejected_count = 0;
};

// All unordered pairs of the given nodes whose feature sets are disjoint,
// in lexicographic id order.  Overlapping pairs (such as a node with its
// ancestor) are skipped: jointly perturbing them is ill-defined.
std::vector<InteractionCandidate> candidate_pairs(const FeatureHierarchy& hierarchy,
                                                  std::span<const std::size_t> node_ids);

// Nonadditivity contrast on the model's pre-transfer output:
//   delta_i = g(joint perturb) - g(perturb a) - g(perturb b) + g(x_i)
// averaged over replicates, with the single and joint perturbations of a
// set drawing the same stream so they pair exactly.  Additive surfaces
// give delta identically zero.  Two-sided signed-rank test.
InteractionResult test_interaction(const ModelHandle& model, const Dataset& data,
                                   const FeatureHierarchy& hierarchy,
                                   const InteractionCandidate& candidate,
                                   const PerturbationSpec& spec);

// Loss-gap variant: compares the loss of the jointly perturbed prediction
// against the loss of an additively reconstructed one,
//   delta_i = L[y_i, f(g_joint)] - L[y_i, f(g(x_i) + dg_a + dg_b)].
// Kept as an experimental alternative; its null is not centered for
// nonlinear losses, so the g-based contrast is the default.
InteractionResult test_interaction_loss(const ModelHandle& model, const Dataset& data,
                                        const FeatureHierarchy& hierarchy,
                                        const InteractionCandidate& candidate,
                                        const PerturbationSpec& spec, Loss loss);

// Tests every candidate and applies one flat Benjamini-Hochberg pass at
// level q over all candidate p-values.
InteractionAnalysis analyze_interactions(const ModelHandle& model, const Dataset& data,
                                         const FeatureHierarchy& hierarchy,
                                         std::span<const InteractionCandidate> candidates,
                                         double q, const PerturbationSpec& spec,
                                         std::size_t workers = 1, bool loss_based = false,
                                         Loss loss = Loss::squared_error);

}  // namespace featsig

#endif  // FEATSIG_INTERACTIONS_HPP
