#include "featsig/perturb.hpp"

#include <algorithm>
#include <string>

#include "featsig/errors.hpp"
#include "featsig/rng.hpp"

namespace featsig {

const char* perturbation_kind_name(PerturbationSpec::Kind kind) {
    switch (kind) {
        case PerturbationSpec::Kind::permutation: return "permutation";
        case PerturbationSpec::Kind::erasure: return "erasure";
        case PerturbationSpec::Kind::flip: return "flip";
    }
    throw internal_error("unknown perturbation kind");
}

PerturbationSpec::Kind perturbation_kind_from_name(const std::string& name) {
    if (name == "permutation") return PerturbationSpec::Kind::permutation;
    if (name == "erasure") return PerturbationSpec::Kind::erasure;
    if (name == "flip") return PerturbationSpec::Kind::flip;
    throw invalid_argument_error("unknown perturbation kind '" + name +
                                 "' (expected permutation, erasure, or flip)");
}

namespace {

std::vector<std::size_t> checked_feature_set(const Matrix& X,
                                             std::span<const std::size_t> features,
                                             const PerturbationSpec& spec) {
    if (features.empty()) {
        throw invalid_argument_error("perturbation feature set is empty");
    }
    std::vector<std::size_t> sorted(features.begin(), features.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw invalid_argument_error("perturbation feature set contains duplicates");
    }
    if (sorted.back() >= X.cols()) {
        throw invalid_argument_error("feature index " + std::to_string(sorted.back()) +
                                     " out of range for data with " +
                                     std::to_string(X.cols()) + " columns");
    }
    if (spec.kind == PerturbationSpec::Kind::flip) {
        for (std::size_t j : sorted) {
            for (std::size_t i = 0; i < X.rows(); ++i) {
                if (!is_binary_value(X.at(i, j))) {
                    throw invalid_argument_error(
                        "flip perturbation requires binary columns; column " +
                        std::to_string(j) + " has value " + std::to_string(X.at(i, j)) +
                        " at row " + std::to_string(i));
                }
            }
        }
    }
    return sorted;
}

}  // namespace

PerturbedBatch apply(const Matrix& X, std::span<const std::size_t> features,
                     const PerturbationSpec& spec) {
    if (spec.kind == PerturbationSpec::Kind::permutation && spec.num_permutations == 0) {
        throw invalid_argument_error("permutation count must be at least 1");
    }
    PerturbedBatch batch;
    batch.base_ = &X;
    batch.spec_ = spec;
    batch.replicates_ = spec.replicates();
    PerturbedBatch::Group group;
    group.features = checked_feature_set(X, features, spec);
    group.stream_key = mix_seed(spec.seed, hash_index_sequence(group.features));
    batch.groups_.push_back(std::move(group));
    return batch;
}

PerturbedBatch apply_joint(const Matrix& X, std::span<const std::size_t> features_a,
                           std::span<const std::size_t> features_b,
                           const PerturbationSpec& spec) {
    PerturbedBatch batch = apply(X, features_a, spec);
    PerturbedBatch::Group group;
    group.features = checked_feature_set(X, features_b, spec);
    group.stream_key = mix_seed(spec.seed, hash_index_sequence(group.features));
    for (std::size_t j : group.features) {
        if (std::binary_search(batch.groups_[0].features.begin(),
                               batch.groups_[0].features.end(), j)) {
            throw invalid_argument_error("joint perturbation feature sets overlap at feature " +
                                         std::to_string(j));
        }
    }
    batch.groups_.push_back(std::move(group));
    return batch;
}

Matrix PerturbedBatch::replicate(std::size_t p) const {
    Matrix copy = *base_;
    perturb_in_place(copy, p);
    return copy;
}

void PerturbedBatch::perturb_in_place(Matrix& scratch, std::size_t p) const {
    if (p >= replicates_) {
        throw invalid_argument_error("replicate index " + std::to_string(p) +
                                     " out of range (have " + std::to_string(replicates_) + ")");
    }
    if (scratch.rows() != base_->rows() || scratch.cols() != base_->cols()) {
        throw invalid_argument_error("scratch matrix shape does not match the base matrix");
    }
    const std::size_t m = base_->rows();
    for (const Group& group : groups_) {
        switch (spec_.kind) {
            case PerturbationSpec::Kind::permutation: {
                // The whole set moves as a unit: one row permutation per
                // (group, replicate) applied to every target column.
                Rng rng(mix_seed(group.stream_key, static_cast<std::uint64_t>(p)));
                std::vector<std::size_t> perm = identity_permutation(m);
                rng.shuffle(perm);
                for (std::size_t i = 0; i < m; ++i) {
                    const std::size_t src = perm[i];
                    for (std::size_t j : group.features) {
                        scratch.at(i, j) = base_->at(src, j);
                    }
                }
                break;
            }
            case PerturbationSpec::Kind::erasure:
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j : group.features) {
                        scratch.at(i, j) = spec_.erasure_value;
                    }
                }
                break;
            case PerturbationSpec::Kind::flip:
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j : group.features) {
                        scratch.at(i, j) = 1.0 - base_->at(i, j);
                    }
                }
                break;
        }
    }
}

void PerturbedBatch::restore(Matrix& scratch) const {
    if (scratch.rows() != base_->rows() || scratch.cols() != base_->cols()) {
        throw invalid_argument_error("scratch matrix shape does not match the base matrix");
    }
    for (const Group& group : groups_) {
        for (std::size_t i = 0; i < base_->rows(); ++i) {
            for (std::size_t j : group.features) {
                scratch.at(i, j) = base_->at(i, j);
            }
        }
    }
}

}  // namespace featsig
