#ifndef FEATSIG_GROUND_TRUTH_HPP
#define FEATSIG_GROUND_TRUTH_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace featsig {

struct LinearTerm {
    std::size_t feature = 0;
    double coefficient = 0.0;
};

struct InteractionTerm {
    std::size_t a = 0;  // a < b
    std::size_t b = 0;
    double coefficient = 0.0;
};

// Sparse additive target with pairwise product terms:
//   y(x) = sum_j alpha_j x_j + sum_(a,b) alpha_ab x_a x_b
// Terms are kept sorted so evaluation order (and hence floating-point
// results) is reproducible.
struct GroundTruth {
    std::size_t n_features = 0;
    std::vector<LinearTerm> linear;             // sorted by feature
    std::vector<InteractionTerm> interactions;  // sorted by (a, b)

    double evaluate(std::span<const double> x) const;

    // A feature is important when it carries a linear term or participates
    // in an interaction term.
    bool is_important_feature(std::size_t feature) const;
    std::vector<std::size_t> important_features() const;  // sorted

    bool has_interaction(std::size_t a, std::size_t b) const;
};

}  // namespace featsig

#endif  // FEATSIG_GROUND_TRUTH_HPP
