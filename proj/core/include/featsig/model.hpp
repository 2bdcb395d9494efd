#ifndef FEATSIG_MODEL_HPP
#define FEATSIG_MODEL_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featsig/data.hpp"
#include "featsig/ground_truth.hpp"

namespace featsig {

// Output transfer of a model h(x) = f(g(x)).
enum class Transfer {
    identity,
    logistic,
};

const char* transfer_name(Transfer transfer);
Transfer transfer_from_name(const std::string& name);

enum class Loss {
    squared_error,
    binary_cross_entropy,
};

const char* loss_name(Loss loss);
Loss loss_from_name(const std::string& name);

// Black-box prediction interface.  Implementations only need predict();
// g() is optional and gated by supports_g().
class ModelHandle {
public:
    virtual ~ModelHandle() = default;

    virtual std::size_t arity() const = 0;
    virtual Transfer transfer() const = 0;
    virtual bool supports_g() const { return false; }

    // h(x) per row of X.
    virtual std::vector<double> predict(const Matrix& X) const = 0;

    // Pre-transfer output g(x) per row of X.  Only valid if supports_g().
    virtual std::vector<double> g(const Matrix& X) const;
};

// g(x) when the model exposes it, h(x) when the transfer is the identity
// (then g = h); otherwise throws an invalid-argument capability error.
std::vector<double> g_values(const ModelHandle& model, const Matrix& X);

// Per-instance loss L[y_i, prediction_i].  binary_cross_entropy clamps
// predictions into [eps, 1-eps] with eps = 1e-12 and warns on stderr the
// first time a clamp fires in a call.
std::vector<double> per_instance_losses(std::span<const double> y,
                                        std::span<const double> predictions, Loss loss);

std::vector<double> baseline_losses(const ModelHandle& model, const Dataset& data, Loss loss);

// Rank-based AUROC with midrank tie handling.  Empty result when labels
// are not binary or only one class is present.
std::optional<double> auroc(std::span<const double> scores, std::span<const double> labels);

// Deterministic noisy realization of a ground truth:
//   h(x) = y(x) + gamma(x),  gamma(x) ~ N(0, sigma^2)
// gamma is a pure function of the input point (keyed by a hash of the
// row's bit pattern), so repeated predictions of the same rows agree and
// perturbed rows that equal the original ones produce zero difference.
class SyntheticModel final : public ModelHandle {
public:
    SyntheticModel(GroundTruth truth, double sigma, std::uint64_t noise_seed);

    std::size_t arity() const override { return truth_.n_features; }
    Transfer transfer() const override { return Transfer::identity; }
    bool supports_g() const override { return true; }
    std::vector<double> predict(const Matrix& X) const override;
    std::vector<double> g(const Matrix& X) const override { return predict(X); }

    const GroundTruth& truth() const { return truth_; }
    double sigma() const { return sigma_; }
    std::uint64_t noise_seed() const { return noise_seed_; }

    double predict_row(std::span<const double> x) const;

private:
    double gamma(std::span<const double> x) const;
    std::uint64_t row_hash(std::span<const double> x) const;

    GroundTruth truth_;
    double sigma_ = 0.0;
    std::uint64_t noise_seed_ = 0;
    // Lane seeds for the positional row hash keying gamma.
    std::uint64_t lane_seed_[4] = {0, 0, 0, 0};
};

std::shared_ptr<SyntheticModel> make_synthetic_model(GroundTruth truth, double sigma,
                                                     std::uint64_t noise_seed);

}  // namespace featsig

#endif  // FEATSIG_MODEL_HPP
