#ifndef FEATSIG_PERTURB_HPP
#define FEATSIG_PERTURB_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "featsig/data.hpp"

namespace featsig {

// How a feature set is perturbed across the test instances.
struct PerturbationSpec {
    enum class Kind {
        permutation,  // shuffle the target columns' rows as a unit, P times
        erasure,      // set target columns to a constant
        flip,         // 1 - x on binary target columns
    };

    Kind kind = Kind::permutation;
    std::size_t num_permutations = 500;  // P; only meaningful for permutation
    double erasure_value = 0.0;
    std::uint64_t seed = 0;

    std::size_t replicates() const {
        return kind == Kind::permutation ? num_permutations : 1;
    }

    static PerturbationSpec permutation(std::size_t count, std::uint64_t seed) {
        return {Kind::permutation, count, 0.0, seed};
    }
    static PerturbationSpec erasure(double value = 0.0) {
        return {Kind::erasure, 1, value, 0};
    }
    static PerturbationSpec flip() { return {Kind::flip, 1, 0.0, 0}; }

    PerturbationSpec with_seed(std::uint64_t s) const {
        PerturbationSpec copy = *this;
        copy.seed = s;
        return copy;
    }
};

const char* perturbation_kind_name(PerturbationSpec::Kind kind);
PerturbationSpec::Kind perturbation_kind_from_name(const std::string& name);

// Lazy view over the P perturbed copies of a data matrix.  Rows of columns
// outside the target set(s) are bit-identical to the original.  Replicate p
// is a pure function of (spec.seed, feature set, p), so identical seeds
// give identical batches regardless of evaluation order.
//
// The batch borrows the base matrix; it must not outlive it.
class PerturbedBatch {
public:
    std::size_t replicates() const { return replicates_; }

    // Full perturbed copy of the base matrix.
    Matrix replicate(std::size_t p) const;

    // In-place fast path: `scratch` must hold the base matrix values in the
    // target columns on entry (as after construction or restore()).  Only
    // target columns are written.
    void perturb_in_place(Matrix& scratch, std::size_t p) const;

    // Rewrites the target columns of `scratch` with the base values.
    void restore(Matrix& scratch) const;

private:
    friend PerturbedBatch apply(const Matrix& X, std::span<const std::size_t> features,
                                const PerturbationSpec& spec);
    friend PerturbedBatch apply_joint(const Matrix& X, std::span<const std::size_t> features_a,
                                      std::span<const std::size_t> features_b,
                                      const PerturbationSpec& spec);

    struct Group {
        std::vector<std::size_t> features;  // sorted
        std::uint64_t stream_key = 0;       // mix(seed, feature-set hash)
    };

    const Matrix* base_ = nullptr;
    std::vector<Group> groups_;
    PerturbationSpec spec_;
    std::size_t replicates_ = 1;
};

// Perturbs one feature set.  Throws on empty/out-of-range feature sets and
// on flip over non-binary columns.
PerturbedBatch apply(const Matrix& X, std::span<const std::size_t> features,
                     const PerturbationSpec& spec);

// Jointly perturbs two disjoint feature sets in the same replicate.  Under
// permutation the two sets draw independent row permutations, and each
// set's stream matches the one apply() would use for it alone, so single
// and joint evaluations pair exactly.
PerturbedBatch apply_joint(const Matrix& X, std::span<const std::size_t> features_a,
                           std::span<const std::size_t> features_b,
                           const PerturbationSpec& spec);

}  // namespace featsig

#endif  // FEATSIG_PERTURB_HPP
