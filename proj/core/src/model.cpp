#include "featsig/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "featsig/errors.hpp"
#include "featsig/rng.hpp"

namespace featsig {

double GroundTruth::evaluate(std::span<const double> x) const {
    double value = 0.0;
    for (const LinearTerm& term : linear) {
        value += term.coefficient * x[term.feature];
    }
    for (const InteractionTerm& term : interactions) {
        value += term.coefficient * x[term.a] * x[term.b];
    }
    return value;
}

bool GroundTruth::is_important_feature(std::size_t feature) const {
    for (const LinearTerm& term : linear) {
        if (term.feature == feature) return true;
    }
    for (const InteractionTerm& term : interactions) {
        if (term.a == feature || term.b == feature) return true;
    }
    return false;
}

std::vector<std::size_t> GroundTruth::important_features() const {
    std::vector<std::size_t> out;
    for (const LinearTerm& term : linear) out.push_back(term.feature);
    for (const InteractionTerm& term : interactions) {
        out.push_back(term.a);
        out.push_back(term.b);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool GroundTruth::has_interaction(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    for (const InteractionTerm& term : interactions) {
        if (term.a == a && term.b == b) return true;
    }
    return false;
}

const char* transfer_name(Transfer transfer) {
    switch (transfer) {
        case Transfer::identity: return "identity";
        case Transfer::logistic: return "logistic";
    }
    throw internal_error("unknown transfer");
}

Transfer transfer_from_name(const std::string& name) {
    if (name == "identity") return Transfer::identity;
    if (name == "logistic") return Transfer::logistic;
    throw invalid_argument_error("unknown transfer '" + name +
                                 "' (expected identity or logistic)");
}

const char* loss_name(Loss loss) {
    switch (loss) {
        case Loss::squared_error: return "squared_error";
        case Loss::binary_cross_entropy: return "binary_cross_entropy";
    }
    throw internal_error("unknown loss");
}

Loss loss_from_name(const std::string& name) {
    if (name == "squared_error") return Loss::squared_error;
    if (name == "binary_cross_entropy") return Loss::binary_cross_entropy;
    throw invalid_argument_error("unknown loss '" + name +
                                 "' (expected squared_error or binary_cross_entropy)");
}

std::vector<double> ModelHandle::g(const Matrix&) const {
    throw invalid_argument_error("model does not expose its pre-transfer output g(.)");
}

std::vector<double> g_values(const ModelHandle& model, const Matrix& X) {
    if (model.supports_g()) return model.g(X);
    if (model.transfer() == Transfer::identity) return model.predict(X);
    throw invalid_argument_error(
        "model does not expose g(.) and its transfer is not the identity; "
        "the nonadditivity contrast is undefined");
}

std::vector<double> per_instance_losses(std::span<const double> y,
                                        std::span<const double> predictions, Loss loss) {
    if (y.size() != predictions.size()) {
        throw invalid_argument_error("targets and predictions differ in length");
    }
    std::vector<double> out(y.size());
    bool warned = false;
    constexpr double eps = 1e-12;
    for (std::size_t i = 0; i < y.size(); ++i) {
        switch (loss) {
            case Loss::squared_error: {
                const double d = y[i] - predictions[i];
                out[i] = d * d;
                break;
            }
            case Loss::binary_cross_entropy: {
                if (y[i] != 0.0 && y[i] != 1.0) {
                    throw data_error("binary cross-entropy requires 0/1 targets, got " +
                                     std::to_string(y[i]));
                }
                double p = predictions[i];
                if (p < eps || p > 1.0 - eps) {
                    if (!warned) {
                        std::fprintf(stderr,
                                     "warning: clamping predictions into [%g, 1-%g] for "
                                     "binary cross-entropy\n",
                                     eps, eps);
                        warned = true;
                    }
                    p = std::clamp(p, eps, 1.0 - eps);
                }
                out[i] = y[i] == 1.0 ? -std::log(p) : -std::log1p(-p);
                break;
            }
        }
    }
    return out;
}

std::vector<double> baseline_losses(const ModelHandle& model, const Dataset& data, Loss loss) {
    return per_instance_losses(data.y, model.predict(data.X), loss);
}

std::optional<double> auroc(std::span<const double> scores, std::span<const double> labels) {
    if (scores.size() != labels.size()) {
        throw invalid_argument_error("scores and labels differ in length");
    }
    std::size_t positives = 0;
    for (double label : labels) {
        if (label == 1.0) {
            ++positives;
        } else if (label != 0.0) {
            return std::nullopt;
        }
    }
    const std::size_t n = scores.size();
    if (positives == 0 || positives == n) return std::nullopt;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks over score ties, summed over the positive class.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1.0) positive_rank_sum += midrank;
        }
        i = j;
    }
    const double n1 = static_cast<double>(positives);
    const double n0 = static_cast<double>(n - positives);
    return (positive_rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

SyntheticModel::SyntheticModel(GroundTruth truth, double sigma, std::uint64_t noise_seed)
    : truth_(std::move(truth)), sigma_(sigma), noise_seed_(noise_seed) {
    if (truth_.n_features == 0) {
        throw invalid_argument_error("synthetic model needs at least one feature");
    }
    if (!(sigma_ >= 0.0)) {
        throw invalid_argument_error("sigma must be nonnegative");
    }
    for (const LinearTerm& term : truth_.linear) {
        if (term.feature >= truth_.n_features) {
            throw invalid_argument_error("linear term feature index out of range");
        }
    }
    for (const InteractionTerm& term : truth_.interactions) {
        if (term.a >= term.b || term.b >= truth_.n_features) {
            throw invalid_argument_error("interaction term indices must satisfy a < b < n");
        }
    }
    std::sort(truth_.linear.begin(), truth_.linear.end(),
              [](const LinearTerm& a, const LinearTerm& b) { return a.feature < b.feature; });
    std::sort(truth_.interactions.begin(), truth_.interactions.end(),
              [](const InteractionTerm& x, const InteractionTerm& y) {
                  return std::pair(x.a, x.b) < std::pair(y.a, y.b);
              });

    for (std::size_t lane = 0; lane < 4; ++lane) {
        lane_seed_[lane] = splitmix64(noise_seed_ + lane + 1);
    }
}

// Positional hash of the row's raw bit patterns.  Four interleaved
// multiply-xor lanes keep the multiply latency off the critical path;
// the per-lane seeds make the hash sensitive to column position.
std::uint64_t SyntheticModel::row_hash(std::span<const double> x) const {
    constexpr std::uint64_t kMul = 0x9e3779b97f4a7c15ull;
    std::uint64_t lane[4] = {lane_seed_[0], lane_seed_[1], lane_seed_[2], lane_seed_[3]};
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        lane[0] = (lane[0] ^ std::bit_cast<std::uint64_t>(x[j])) * kMul;
        lane[1] = (lane[1] ^ std::bit_cast<std::uint64_t>(x[j + 1])) * kMul;
        lane[2] = (lane[2] ^ std::bit_cast<std::uint64_t>(x[j + 2])) * kMul;
        lane[3] = (lane[3] ^ std::bit_cast<std::uint64_t>(x[j + 3])) * kMul;
    }
    for (; j < n; ++j) {
        lane[j & 3] = (lane[j & 3] ^ std::bit_cast<std::uint64_t>(x[j])) * kMul;
    }
    std::uint64_t h = lane[0];
    h = splitmix64(h ^ lane[1]);
    h = splitmix64(h ^ lane[2]);
    h = splitmix64(h ^ lane[3]);
    return h;
}

double SyntheticModel::gamma(std::span<const double> x) const {
    Rng rng(row_hash(x));
    return sigma_ * rng.normal();
}

double SyntheticModel::predict_row(std::span<const double> x) const {
    if (x.size() != truth_.n_features) {
        throw invalid_argument_error("row arity does not match the model");
    }
    double value = truth_.evaluate(x);
    if (sigma_ > 0.0) value += gamma(x);
    return value;
}

std::vector<double> SyntheticModel::predict(const Matrix& X) const {
    if (X.cols() != truth_.n_features) {
        throw invalid_argument_error("data arity " + std::to_string(X.cols()) +
                                     " does not match model arity " +
                                     std::to_string(truth_.n_features));
    }
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        out[i] = predict_row(X.row(i));
    }
    return out;
}

std::shared_ptr<SyntheticModel> make_synthetic_model(GroundTruth truth, double sigma,
                                                     std::uint64_t noise_seed) {
    return std::make_shared<SyntheticModel>(std::move(truth), sigma, noise_seed);
}

}  // namespace featsig
