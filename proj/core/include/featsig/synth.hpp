#ifndef FEATSIG_SYNTH_HPP
#define FEATSIG_SYNTH_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "featsig/data.hpp"
#include "featsig/ground_truth.hpp"
#include "featsig/hierarchy.hpp"
#include "featsig/importance.hpp"
#include "featsig/interactions.hpp"

namespace featsig {

struct EvaluationScore {
    double feature_fdr = 0.0;
    double feature_power = 0.0;
    double interaction_fdr = 0.0;
    double interaction_power = 0.0;
};

// Uniformly samples n_linear features to carry linear terms and
// n_interactions distinct unordered pairs among those features to carry
// product terms; every interaction's components are therefore themselves
// discoverable.  Coefficients are U(0,1), resampled on an exact zero.
GroundTruth generate_ground_truth(std::size_t n_features, std::size_t n_linear,
                                  std::size_t n_interactions, std::uint64_t seed);

// X ~ i.i.d. Bernoulli(p); y is the noise-free ground-truth value of each
// row (model noise lives in the synthetic model, not the target).
Dataset generate_instances(const GroundTruth& truth, std::size_t m, double bernoulli_p,
                           std::uint64_t seed);

// Balanced binary tree over a random permutation of the features: sibling
// subtree sizes differ by at most one, leaves carry single features, and
// the node count is exactly 2n - 1.  Leaves are named after their feature
// ("f12"); internal nodes are named "g<k>" in construction order.
FeatureHierarchy build_random_hierarchy(std::size_t n_features, std::uint64_t seed);

// Scores discoveries against the ground truth.  A node counts as truly
// important when its subtree holds at least one important feature; a
// rejected pair counts as true when it covers some interaction term.
// Ratios with zero denominators are reported as 0.
EvaluationScore score(const ImportanceReport& report, const FeatureHierarchy& hierarchy,
                      std::span<const InteractionResult> interactions, const GroundTruth& truth);

struct ExperimentConfig {
    enum class Vary { m, sigma };

    Vary vary = Vary::sigma;
    std::vector<double> grid;  // m values or sigma values
    std::size_t replicates = 25;

    std::size_t n_features = 500;
    std::size_t n_linear = 50;
    std::size_t n_interactions = 50;
    std::size_t m = 10000;      // fixed m for sigma sweeps
    double sigma = 0.05;        // fixed sigma for m sweeps
    double bernoulli_p = 0.5;
    double q = 0.05;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    // Called after each finished replicate (grid index, replicate index).
    std::function<void(std::size_t, std::size_t)> on_replicate;
};

struct ExperimentCell {
    double grid_value = 0.0;
    EvaluationScore mean;
    EvaluationScore se;  // standard error of the mean across replicates
    std::vector<EvaluationScore> replicates;
};

// One full table row per grid point: fresh ground truth, model, data, and
// hierarchy per replicate; erasure perturbation; hierarchical selection at
// q; interaction candidates are all pairs of rejected leaves, tested with
// one flat Benjamini-Hochberg pass at q.
std::vector<ExperimentCell> run_experiment(const ExperimentConfig& config);

const char* vary_name(ExperimentConfig::Vary vary);
ExperimentConfig::Vary vary_from_name(const std::string& name);

}  // namespace featsig

#endif  // FEATSIG_SYNTH_HPP
