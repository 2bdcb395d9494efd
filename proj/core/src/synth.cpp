#include "featsig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>

#include "featsig/errors.hpp"
#include "featsig/model.hpp"
#include "featsig/parallel.hpp"
#include "featsig/rng.hpp"

namespace featsig {

namespace {

// Uniform over the 2^-26 grid in (0, 1).  Any subset sum of a few hundred
// such coefficients is exactly representable in a double, so a sigma = 0
// surface evaluates without rounding and additive interaction contrasts
// cancel to exactly zero instead of leaving sign-biased residue.
double draw_coefficient(Rng& rng) {
    return std::ldexp(static_cast<double>(1 + rng.bounded((1ull << 26) - 1)), -26);
}

}  // namespace

GroundTruth generate_ground_truth(std::size_t n_features, std::size_t n_linear,
                                  std::size_t n_interactions, std::uint64_t seed) {
    if (n_features == 0) {
        throw invalid_argument_error("n_features must be at least 1");
    }
    if (n_linear > n_features) {
        throw invalid_argument_error("n_linear " + std::to_string(n_linear) +
                                     " exceeds n_features " + std::to_string(n_features));
    }
    const std::uint64_t max_pairs =
        n_linear < 2 ? 0
                     : static_cast<std::uint64_t>(n_linear) *
                           static_cast<std::uint64_t>(n_linear - 1) / 2;
    if (n_interactions > max_pairs) {
        throw invalid_argument_error(
            "n_interactions " + std::to_string(n_interactions) + " exceeds the " +
            std::to_string(max_pairs) + " distinct pairs over " + std::to_string(n_linear) +
            " linear features");
    }

    Rng rng(mix_seed(seed, 0xa11cedull));
    GroundTruth truth;
    truth.n_features = n_features;

    std::vector<std::size_t> order = identity_permutation(n_features);
    rng.shuffle(order);
    std::vector<std::size_t> chosen(order.begin(),
                                    order.begin() + static_cast<std::ptrdiff_t>(n_linear));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t feature : chosen) {
        truth.linear.push_back({feature, draw_coefficient(rng)});
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (max_pairs <= 2'000'000) {
        pairs.reserve(static_cast<std::size_t>(max_pairs));
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            for (std::size_t j = i + 1; j < chosen.size(); ++j) {
                pairs.emplace_back(chosen[i], chosen[j]);
            }
        }
        rng.shuffle(pairs);
        pairs.resize(n_interactions);
    } else {
        std::set<std::pair<std::size_t, std::size_t>> taken;
        while (taken.size() < n_interactions) {
            std::size_t a = chosen[rng.bounded(chosen.size())];
            std::size_t b = chosen[rng.bounded(chosen.size())];
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            if (taken.insert({a, b}).second) pairs.emplace_back(a, b);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [a, b] : pairs) {
        truth.interactions.push_back({a, b, draw_coefficient(rng)});
    }
    return truth;
}

Dataset generate_instances(const GroundTruth& truth, std::size_t m, double bernoulli_p,
                           std::uint64_t seed) {
    if (m == 0) {
        throw invalid_argument_error("m must be at least 1");
    }
    if (!(bernoulli_p > 0.0 && bernoulli_p < 1.0)) {
        throw invalid_argument_error("bernoulli_p must lie strictly between 0 and 1");
    }
    Rng rng(mix_seed(seed, 0xda7aull));
    Dataset data;
    data.X = Matrix(m, truth.n_features);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < truth.n_features; ++j) {
            data.X.at(i, j) = rng.uniform01() < bernoulli_p ? 1.0 : 0.0;
        }
    }
    data.y.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        data.y[i] = truth.evaluate(data.X.row(i));
    }
    data.column_names.reserve(truth.n_features);
    for (std::size_t j = 0; j < truth.n_features; ++j) {
        data.column_names.push_back("f" + std::to_string(j));
    }
    return data;
}

namespace {

void build_subtree(std::span<const std::size_t> features, std::size_t lo, std::size_t hi,
                   const std::string& parent, std::size_t& internal_counter,
                   std::vector<FeatureHierarchy::NodeSpec>& specs) {
    if (hi - lo == 1) {
        specs.push_back({"f" + std::to_string(features[lo]), parent, {features[lo]}});
        return;
    }
    const std::string name = "g" + std::to_string(internal_counter++);
    specs.push_back({name, parent, {}});
    const std::size_t mid = lo + (hi - lo + 1) / 2;  // left sibling takes the extra leaf
    build_subtree(features, lo, mid, name, internal_counter, specs);
    build_subtree(features, mid, hi, name, internal_counter, specs);
}

}  // namespace

FeatureHierarchy build_random_hierarchy(std::size_t n_features, std::uint64_t seed) {
    if (n_features == 0) {
        throw invalid_argument_error("n_features must be at least 1");
    }
    std::vector<std::size_t> order = identity_permutation(n_features);
    Rng rng(mix_seed(seed, 0x7ee5ull));
    rng.shuffle(order);

    std::vector<FeatureHierarchy::NodeSpec> specs;
    specs.reserve(2 * n_features - 1);
    std::size_t internal_counter = 0;
    build_subtree(order, 0, n_features, "", internal_counter, specs);
    return FeatureHierarchy::build(specs);
}

EvaluationScore score(const ImportanceReport& report, const FeatureHierarchy& hierarchy,
                      std::span<const InteractionResult> interactions,
                      const GroundTruth& truth) {
    if (report.nodes.size() != hierarchy.size()) {
        throw invalid_argument_error("report and hierarchy node counts differ");
    }
    if (hierarchy.max_feature_index() >= truth.n_features) {
        throw invalid_argument_error("hierarchy references features outside the ground truth");
    }

    std::vector<bool> important(truth.n_features, false);
    for (std::size_t feature : truth.important_features()) important[feature] = true;
    auto node_important = [&](std::size_t id) {
        for (std::size_t feature : hierarchy.node(id).feature_indices) {
            if (important[feature]) return true;
        }
        return false;
    };

    EvaluationScore out;

    std::size_t true_rejections = 0;
    for (std::size_t id : report.rejected.nodes) {
        if (node_important(id)) ++true_rejections;
    }
    if (!report.rejected.nodes.empty()) {
        out.feature_fdr =
            static_cast<double>(report.rejected.nodes.size() - true_rejections) /
            static_cast<double>(report.rejected.nodes.size());
    }
    std::size_t important_nodes = 0;
    for (std::size_t id = 0; id < hierarchy.size(); ++id) {
        if (node_important(id)) ++important_nodes;
    }
    if (important_nodes > 0) {
        out.feature_power =
            static_cast<double>(true_rejections) / static_cast<double>(important_nodes);
    }

    // A rejected pair covers term (j,k) when one side's subtree holds j and
    // the other's holds k.
    auto covers = [&](const InteractionCandidate& c, const InteractionTerm& term) {
        const auto& fa = hierarchy.node(c.node_a).feature_indices;
        const auto& fb = hierarchy.node(c.node_b).feature_indices;
        const bool a_has_j = std::binary_search(fa.begin(), fa.end(), term.a);
        const bool a_has_k = std::binary_search(fa.begin(), fa.end(), term.b);
        const bool b_has_j = std::binary_search(fb.begin(), fb.end(), term.a);
        const bool b_has_k = std::binary_search(fb.begin(), fb.end(), term.b);
        return (a_has_j && b_has_k) || (a_has_k && b_has_j);
    };

    std::size_t rejected_pairs = 0;
    std::size_t true_pairs = 0;
    std::vector<bool> term_found(truth.interactions.size(), false);
    for (const InteractionResult& result : interactions) {
        if (!result.rejected) continue;
        ++rejected_pairs;
        bool any = false;
        for (std::size_t t = 0; t < truth.interactions.size(); ++t) {
            if (covers(result.candidate, truth.interactions[t])) {
                term_found[t] = true;
                any = true;
            }
        }
        if (any) ++true_pairs;
    }
    if (rejected_pairs > 0) {
        out.interaction_fdr = static_cast<double>(rejected_pairs - true_pairs) /
                              static_cast<double>(rejected_pairs);
    }
    if (!truth.interactions.empty()) {
        const auto found =
            static_cast<std::size_t>(std::count(term_found.begin(), term_found.end(), true));
        out.interaction_power =
            static_cast<double>(found) / static_cast<double>(truth.interactions.size());
    }
    return out;
}

const char* vary_name(ExperimentConfig::Vary vary) {
    switch (vary) {
        case ExperimentConfig::Vary::m: return "m";
        case ExperimentConfig::Vary::sigma: return "sigma";
    }
    throw internal_error("unknown vary axis");
}

ExperimentConfig::Vary vary_from_name(const std::string& name) {
    if (name == "m") return ExperimentConfig::Vary::m;
    if (name == "sigma") return ExperimentConfig::Vary::sigma;
    throw invalid_argument_error("unknown sweep axis '" + name + "' (expected m or sigma)");
}

namespace {

EvaluationScore run_replicate(const ExperimentConfig& config, std::size_t m, double sigma,
                              std::uint64_t seed) {
    const GroundTruth truth = generate_ground_truth(config.n_features, config.n_linear,
                                                    config.n_interactions, mix_seed(seed, 1));
    const Dataset data = generate_instances(truth, m, config.bernoulli_p, mix_seed(seed, 2));
    const FeatureHierarchy hierarchy =
        build_random_hierarchy(config.n_features, mix_seed(seed, 3));
    const SyntheticModel model(truth, sigma, mix_seed(seed, 4));

    AnalysisConfig analysis_config;
    analysis_config.q = config.q;
    analysis_config.perturbation = PerturbationSpec::erasure(0.0).with_seed(mix_seed(seed, 5));
    analysis_config.loss = Loss::squared_error;
    analysis_config.workers = 1;
    const ImportanceReport report = analyze(model, data, hierarchy, analysis_config);

    std::vector<std::size_t> rejected_leaves;
    for (std::size_t id : report.rejected.nodes) {
        if (hierarchy.node(id).is_leaf()) rejected_leaves.push_back(id);
    }
    const std::vector<InteractionCandidate> candidates =
        candidate_pairs(hierarchy, rejected_leaves);
    const InteractionAnalysis interaction_analysis = analyze_interactions(
        model, data, hierarchy, candidates, config.q,
        PerturbationSpec::erasure(0.0).with_seed(mix_seed(seed, 6)), 1);

    return score(report, hierarchy, interaction_analysis.results, truth);
}

}  // namespace

std::vector<ExperimentCell> run_experiment(const ExperimentConfig& config) {
    if (config.grid.empty()) {
        throw invalid_argument_error("experiment grid is empty");
    }
    if (config.replicates == 0) {
        throw invalid_argument_error("replicates must be at least 1");
    }
    for (double v : config.grid) {
        if (config.vary == ExperimentConfig::Vary::m) {
            if (!(v >= 1.0) || v != std::floor(v)) {
                throw invalid_argument_error("m grid values must be positive integers");
            }
        } else if (!(v >= 0.0)) {
            throw invalid_argument_error("sigma grid values must be nonnegative");
        }
    }

    const std::size_t points = config.grid.size();
    const std::size_t reps = config.replicates;
    std::vector<ExperimentCell> cells(points);
    for (std::size_t gi = 0; gi < points; ++gi) {
        cells[gi].grid_value = config.grid[gi];
        cells[gi].replicates.resize(reps);
    }

    std::mutex progress_mutex;
    parallel_for(std::max<std::size_t>(1, config.workers), points * reps,
                 [&](std::size_t, std::size_t flat) {
                     const std::size_t gi = flat / reps;
                     const std::size_t r = flat % reps;
                     const double v = config.grid[gi];
                     const std::size_t m = config.vary == ExperimentConfig::Vary::m
                                               ? static_cast<std::size_t>(v)
                                               : config.m;
                     const double sigma =
                         config.vary == ExperimentConfig::Vary::sigma ? v : config.sigma;
                     cells[gi].replicates[r] =
                         run_replicate(config, m, sigma, mix_seed(config.seed, gi, r));
                     if (config.on_replicate) {
                         std::lock_guard<std::mutex> lock(progress_mutex);
                         config.on_replicate(gi, r);
                     }
                 });

    for (ExperimentCell& cell : cells) {
        auto accumulate = [&](auto member) {
            double sum = 0.0;
            for (const EvaluationScore& s : cell.replicates) sum += s.*member;
            const double mean = sum / static_cast<double>(reps);
            double ss = 0.0;
            for (const EvaluationScore& s : cell.replicates) {
                const double d = s.*member - mean;
                ss += d * d;
            }
            const double se =
                reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) /
                               std::sqrt(static_cast<double>(reps))
                         : 0.0;
            return std::pair(mean, se);
        };
        std::tie(cell.mean.feature_fdr, cell.se.feature_fdr) =
            accumulate(&EvaluationScore::feature_fdr);
        std::tie(cell.mean.feature_power, cell.se.feature_power) =
            accumulate(&EvaluationScore::feature_power);
        std::tie(cell.mean.interaction_fdr, cell.se.interaction_fdr) =
            accumulate(&EvaluationScore::interaction_fdr);
        std::tie(cell.mean.interaction_power, cell.se.interaction_power) =
            accumulate(&EvaluationScore::interaction_power);
    }
    return cells;
}

}  // namespace featsig
