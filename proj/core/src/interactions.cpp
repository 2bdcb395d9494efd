#include "featsig/interactions.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "featsig/errors.hpp"
#include "featsig/parallel.hpp"

namespace featsig {

namespace {

bool disjoint_sorted(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return false;
        if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return true;
}

InteractionCandidate normalized(const FeatureHierarchy& hierarchy,
                                const InteractionCandidate& candidate) {
    InteractionCandidate c = candidate;
    if (c.node_a > c.node_b) std::swap(c.node_a, c.node_b);
    if (c.node_b >= hierarchy.size()) {
        throw invalid_argument_error("interaction candidate node id " +
                                     std::to_string(c.node_b) + " out of range");
    }
    if (c.node_a == c.node_b) {
        throw invalid_argument_error("interaction candidate pairs a node with itself");
    }
    return c;
}

double apply_transfer(Transfer transfer, double v) {
    switch (transfer) {
        case Transfer::identity: return v;
        case Transfer::logistic: return 1.0 / (1.0 + std::exp(-v));
    }
    throw internal_error("unknown transfer");
}

// Sum over replicates of g(X with `features` perturbed), one value per row.
// Left unscaled: the contrast divides once at the end, after cancellation,
// so an exactly additive surface yields deltas that are exactly zero.
std::vector<double> sum_perturbed_g(const ModelHandle& model, const Matrix& X,
                                    std::span<const std::size_t> features,
                                    const PerturbationSpec& spec, Matrix& scratch) {
    const PerturbedBatch batch = apply(X, features, spec);
    std::vector<double> accum(X.rows(), 0.0);
    for (std::size_t p = 0; p < batch.replicates(); ++p) {
        batch.perturb_in_place(scratch, p);
        const std::vector<double> g = g_values(model, scratch);
        for (std::size_t i = 0; i < accum.size(); ++i) accum[i] += g[i];
    }
    batch.restore(scratch);
    return accum;
}

std::vector<double> sum_joint_g(const ModelHandle& model, const Matrix& X,
                                std::span<const std::size_t> features_a,
                                std::span<const std::size_t> features_b,
                                const PerturbationSpec& spec, Matrix& scratch) {
    const PerturbedBatch batch = apply_joint(X, features_a, features_b, spec);
    std::vector<double> accum(X.rows(), 0.0);
    for (std::size_t p = 0; p < batch.replicates(); ++p) {
        batch.perturb_in_place(scratch, p);
        const std::vector<double> g = g_values(model, scratch);
        for (std::size_t i = 0; i < accum.size(); ++i) accum[i] += g[i];
    }
    batch.restore(scratch);
    return accum;
}

// gab, ga, gb are replicate sums; g_base is a single evaluation.  The joint
// replicate reuses each side's solo stream, so per replicate the four terms
// cancel exactly whenever g is additive over the two feature sets.
std::vector<double> contrast_deltas(std::span<const double> gab, std::span<const double> ga,
                                    std::span<const double> gb, std::span<const double> g_base,
                                    std::size_t replicates) {
    const double reps = static_cast<double>(replicates);
    std::vector<double> deltas(g_base.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        deltas[i] = (gab[i] - ga[i] - gb[i] + reps * g_base[i]) / reps;
    }
    return deltas;
}

InteractionResult finish(const InteractionCandidate& candidate, std::vector<double> deltas,
                         bool loss_based) {
    InteractionResult result;
    result.candidate = candidate;
    result.loss_based = loss_based;
    result.test = wilcoxon_signed_rank(deltas, Tail::two_sided);
    return result;
}

}  // namespace

std::vector<InteractionCandidate> candidate_pairs(const FeatureHierarchy& hierarchy,
                                                  std::span<const std::size_t> node_ids) {
    std::vector<std::size_t> ids(node_ids.begin(), node_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (!ids.empty() && ids.back() >= hierarchy.size()) {
        throw invalid_argument_error("candidate node id " + std::to_string(ids.back()) +
                                     " out of range");
    }
    std::vector<InteractionCandidate> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            if (disjoint_sorted(hierarchy.node(ids[i]).feature_indices,
                                hierarchy.node(ids[j]).feature_indices)) {
                out.push_back({ids[i], ids[j]});
            }
        }
    }
    return out;
}

InteractionResult test_interaction(const ModelHandle& model, const Dataset& data,
                                   const FeatureHierarchy& hierarchy,
                                   const InteractionCandidate& candidate,
                                   const PerturbationSpec& spec) {
    const InteractionCandidate c = normalized(hierarchy, candidate);
    const std::vector<std::size_t>& fa = hierarchy.node(c.node_a).feature_indices;
    const std::vector<std::size_t>& fb = hierarchy.node(c.node_b).feature_indices;

    Matrix scratch = data.X;
    const std::vector<double> g_base = g_values(model, data.X);
    const std::vector<double> ga = sum_perturbed_g(model, data.X, fa, spec, scratch);
    const std::vector<double> gb = sum_perturbed_g(model, data.X, fb, spec, scratch);
    const std::vector<double> gab = sum_joint_g(model, data.X, fa, fb, spec, scratch);
    return finish(c, contrast_deltas(gab, ga, gb, g_base, spec.replicates()), false);
}

InteractionResult test_interaction_loss(const ModelHandle& model, const Dataset& data,
                                        const FeatureHierarchy& hierarchy,
                                        const InteractionCandidate& candidate,
                                        const PerturbationSpec& spec, Loss loss) {
    const InteractionCandidate c = normalized(hierarchy, candidate);
    const std::vector<std::size_t>& fa = hierarchy.node(c.node_a).feature_indices;
    const std::vector<std::size_t>& fb = hierarchy.node(c.node_b).feature_indices;
    const Transfer transfer = model.transfer();
    const std::size_t m = data.size();

    Matrix scratch = data.X;
    const std::vector<double> g_base = g_values(model, data.X);
    const PerturbedBatch batch_a = apply(data.X, fa, spec);
    const PerturbedBatch batch_b = apply(data.X, fb, spec);
    const PerturbedBatch batch_ab = apply_joint(data.X, fa, fb, spec);

    std::vector<double> accum(m, 0.0);
    std::vector<double> joint_pred(m);
    std::vector<double> additive_pred(m);
    for (std::size_t p = 0; p < batch_ab.replicates(); ++p) {
        batch_a.perturb_in_place(scratch, p);
        const std::vector<double> ga = g_values(model, scratch);
        batch_a.restore(scratch);
        batch_b.perturb_in_place(scratch, p);
        const std::vector<double> gb = g_values(model, scratch);
        batch_b.restore(scratch);
        batch_ab.perturb_in_place(scratch, p);
        const std::vector<double> gab = g_values(model, scratch);
        batch_ab.restore(scratch);

        for (std::size_t i = 0; i < m; ++i) {
            joint_pred[i] = apply_transfer(transfer, gab[i]);
            additive_pred[i] = apply_transfer(transfer, ga[i] + gb[i] - g_base[i]);
        }
        const std::vector<double> joint_loss = per_instance_losses(data.y, joint_pred, loss);
        const std::vector<double> additive_loss =
            per_instance_losses(data.y, additive_pred, loss);
        for (std::size_t i = 0; i < m; ++i) accum[i] += joint_loss[i] - additive_loss[i];
    }
    const double inv = 1.0 / static_cast<double>(batch_ab.replicates());
    for (double& v : accum) v *= inv;
    return finish(c, std::move(accum), true);
}

InteractionAnalysis analyze_interactions(const ModelHandle& model, const Dataset& data,
                                         const FeatureHierarchy& hierarchy,
                                         std::span<const InteractionCandidate> candidates,
                                         double q, const PerturbationSpec& spec,
                                         std::size_t workers, bool loss_based, Loss loss) {
    if (data.size() == 0) throw data_error("dataset is empty (m >= 1 required)");
    if (loss_based) {
        data.validate();  // the loss gap needs a target per row
    }
    if (model.arity() != data.arity()) {
        throw data_error("data arity " + std::to_string(data.arity()) +
                         " does not match model arity " + std::to_string(model.arity()));
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw invalid_argument_error("q must lie strictly between 0 and 1");
    }
    workers = std::max<std::size_t>(1, workers);

    InteractionAnalysis analysis;
    analysis.q = q;
    analysis.spec = spec;
    analysis.loss = loss;
    analysis.loss_based = loss_based;
    analysis.results.resize(candidates.size());

    std::vector<InteractionCandidate> normal(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        normal[k] = normalized(hierarchy, candidates[k]);
        // Overlap is rejected up front so a bad pair fails before any work.
        if (!disjoint_sorted(hierarchy.node(normal[k].node_a).feature_indices,
                             hierarchy.node(normal[k].node_b).feature_indices)) {
            throw invalid_argument_error(
                "interaction candidate (" + hierarchy.node(normal[k].node_a).name + ", " +
                hierarchy.node(normal[k].node_b).name + ") has overlapping feature sets");
        }
    }

    if (loss_based) {
        parallel_for(workers, normal.size(), [&](std::size_t, std::size_t k) {
            analysis.results[k] = test_interaction_loss(model, data, hierarchy, normal[k], spec, loss);
        });
    } else {
        // The per-node replicate sum of g over single-set perturbations is
        // reused by every candidate touching that node; only the joint pass
        // is new work per pair.
        std::vector<std::size_t> distinct;
        for (const InteractionCandidate& c : normal) {
            distinct.push_back(c.node_a);
            distinct.push_back(c.node_b);
        }
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

        const std::vector<double> g_base = g_values(model, data.X);
        std::vector<std::vector<double>> node_sum(distinct.size());
        std::unordered_map<std::size_t, std::size_t> slot;
        for (std::size_t k = 0; k < distinct.size(); ++k) slot.emplace(distinct[k], k);

        std::vector<Matrix> scratch(workers, data.X);
        parallel_for(workers, distinct.size(), [&](std::size_t worker, std::size_t k) {
            node_sum[k] = sum_perturbed_g(
                model, data.X, hierarchy.node(distinct[k]).feature_indices, spec, scratch[worker]);
        });
        parallel_for(workers, normal.size(), [&](std::size_t worker, std::size_t k) {
            const InteractionCandidate& c = normal[k];
            const std::vector<double> gab =
                sum_joint_g(model, data.X, hierarchy.node(c.node_a).feature_indices,
                            hierarchy.node(c.node_b).feature_indices, spec, scratch[worker]);
            analysis.results[k] =
                finish(c, contrast_deltas(gab, node_sum[slot.at(c.node_a)],
                                          node_sum[slot.at(c.node_b)], g_base, spec.replicates()),
                       false);
        });
    }

    std::vector<double> p_values(analysis.results.size());
    for (std::size_t k = 0; k < analysis.results.size(); ++k) {
        p_values[k] = analysis.results[k].test.p_value;
    }
    for (std::size_t k : benjamini_hochberg(p_values, q)) {
        analysis.results[k].rejected = true;
        ++analysis.rejected_count;
    }
    std::sort(analysis.results.begin(), analysis.results.end(),
              [](const InteractionResult& x, const InteractionResult& y) {
                  if (x.test.p_value != y.test.p_value) return x.test.p_value < y.test.p_value;
                  if (x.candidate.node_a != y.candidate.node_a) {
                      return x.candidate.node_a < y.candidate.node_a;
                  }
                  return x.candidate.node_b < y.candidate.node_b;
              });
    return analysis;
}

}  // namespace featsig
