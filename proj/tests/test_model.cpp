#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "featsig/errors.hpp"
#include "featsig/model.hpp"
#include "featsig/rng.hpp"

using namespace featsig;

namespace {

Matrix make_matrix(std::size_t rows, std::size_t cols, const std::vector<double>& values) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = values[i * cols + j];
    }
    return m;
}

GroundTruth linear_truth(std::size_t n, std::vector<LinearTerm> terms) {
    GroundTruth truth;
    truth.n_features = n;
    truth.linear = std::move(terms);
    return truth;
}

}  // namespace

TEST_CASE("synthetic model: single linear term acts as identity on its column") {
    const SyntheticModel model(linear_truth(1, {{0, 1.0}}), 0.0, 5);
    CHECK(model.predict(make_matrix(2, 1, {1, 0})) == std::vector<double>{1, 0});
}

TEST_CASE("synthetic model: product term fires only when both features are set") {
    GroundTruth truth;
    truth.n_features = 2;
    truth.interactions = {{0, 1, 1.0}};
    const SyntheticModel model(std::move(truth), 0.0, 5);
    CHECK(model.predict(make_matrix(2, 2, {1, 1, 1, 0})) == std::vector<double>{1, 0});
}

TEST_CASE("synthetic model: noisy predictions are call-order independent") {
    Rng rng(11);
    Matrix X(50, 8);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) {
            X.at(i, j) = static_cast<double>(rng.bounded(2));
        }
    }
    const SyntheticModel model(linear_truth(8, {{0, 0.7}, {3, 0.2}}), 0.4, 99);
    const std::vector<double> first = model.predict(X);
    const std::vector<double> second = model.predict(X);
    CHECK(first == second);

    // Row-local: the same row alone or in a batch gets the same value.
    Matrix one(1, 8);
    for (std::size_t j = 0; j < 8; ++j) one.at(0, j) = X.at(7, j);
    CHECK(model.predict(one)[0] == first[7]);
}

TEST_CASE("synthetic model: sigma = 0 reproduces the ground truth exactly") {
    Rng rng(12);
    GroundTruth truth;
    truth.n_features = 6;
    truth.linear = {{1, 0.3}, {4, 0.9}};
    truth.interactions = {{1, 4, 0.5}};
    const SyntheticModel model(truth, 0.0, 7);
    Matrix X(20, 6);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) {
            X.at(i, j) = static_cast<double>(rng.bounded(2));
        }
    }
    const std::vector<double> preds = model.predict(X);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        CHECK(preds[i] == truth.evaluate(X.row(i)));
    }
}

TEST_CASE("synthetic model: identical bit patterns share their noise draw") {
    const SyntheticModel model(linear_truth(3, {{0, 1.0}}), 1.5, 321);
    const Matrix X = make_matrix(3, 3, {1, 0, 1, 0, 1, 1, 1, 0, 1});
    const std::vector<double> preds = model.predict(X);
    CHECK(preds[0] == preds[2]);   // same pattern, same gamma
    CHECK(preds[0] != preds[1]);   // different pattern, different gamma (a.s.)
}

TEST_CASE("synthetic model: gamma matches N(0, sigma^2) over distinct inputs") {
    const double sigma = 0.3;
    const SyntheticModel model(linear_truth(32, {}), sigma, 2024);
    Rng rng(77);
    const std::size_t count = 100000;
    Matrix X(count, 32);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < 32; ++j) {
            X.at(i, j) = static_cast<double>(rng.bounded(2));
        }
    }
    // Empty truth: predictions are pure gamma values.
    const std::vector<double> gamma = model.predict(X);
    double mean = 0.0;
    for (double v : gamma) mean += v;
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (double v : gamma) var += (v - mean) * (v - mean);
    var /= static_cast<double>(count - 1);

    CHECK(std::fabs(mean) < 3.0 * sigma / std::sqrt(static_cast<double>(count)));
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("synthetic model: arity mismatch is a data error") {
    const SyntheticModel model(linear_truth(3, {{0, 1.0}}), 0.0, 1);
    const Matrix X = make_matrix(1, 2, {1, 0});
    CHECK_THROWS_AS(model.predict(X), Error);
}

TEST_CASE("synthetic model: invalid ground truth terms are rejected") {
    GroundTruth bad_index;
    bad_index.n_features = 2;
    bad_index.linear = {{5, 1.0}};
    CHECK_THROWS_AS(SyntheticModel(bad_index, 0.0, 0), Error);

    GroundTruth bad_pair;
    bad_pair.n_features = 3;
    bad_pair.interactions = {{2, 2, 1.0}};
    CHECK_THROWS_AS(SyntheticModel(bad_pair, 0.0, 0), Error);

    CHECK_THROWS_AS(SyntheticModel(linear_truth(2, {}), -0.1, 0), Error);
}

TEST_CASE("losses: squared error reference points") {
    CHECK(per_instance_losses(std::vector<double>{1}, std::vector<double>{1},
                              Loss::squared_error) == std::vector<double>{0});
    CHECK(per_instance_losses(std::vector<double>{0}, std::vector<double>{2},
                              Loss::squared_error) == std::vector<double>{4});
}

TEST_CASE("losses: binary cross entropy reference point and clamping") {
    const std::vector<double> loss = per_instance_losses(
        std::vector<double>{1}, std::vector<double>{0.5}, Loss::binary_cross_entropy);
    CHECK(loss[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // Out-of-range prediction clamps rather than producing inf.
    const std::vector<double> clamped = per_instance_losses(
        std::vector<double>{1}, std::vector<double>{0.0}, Loss::binary_cross_entropy);
    CHECK(std::isfinite(clamped[0]));
    CHECK(clamped[0] > 20.0);

    // Non-binary target under cross entropy is a data error.
    CHECK_THROWS_AS(per_instance_losses(std::vector<double>{0.4}, std::vector<double>{0.5},
                                        Loss::binary_cross_entropy),
                    Error);
}

TEST_CASE("losses: zero exactly when prediction equals target") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const double y = rng.uniform01();
        const std::vector<double> loss = per_instance_losses(
            std::vector<double>{y}, std::vector<double>{y}, Loss::squared_error);
        CHECK(loss[0] == 0.0);
        const double off = per_instance_losses(std::vector<double>{y},
                                               std::vector<double>{y + 0.25},
                                               Loss::squared_error)[0];
        CHECK(off > 0.0);
    }
}

TEST_CASE("g_values: identity transfer falls back to predict") {
    const SyntheticModel model(linear_truth(1, {{0, 2.0}}), 0.0, 0);
    const Matrix X = make_matrix(2, 1, {1, 0});
    CHECK(g_values(model, X) == model.predict(X));
}

namespace {

class LogisticNoG final : public ModelHandle {
public:
    std::size_t arity() const override { return 1; }
    Transfer transfer() const override { return Transfer::logistic; }
    std::vector<double> predict(const Matrix& X) const override {
        std::vector<double> out(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) {
            out[i] = 1.0 / (1.0 + std::exp(-X.at(i, 0)));
        }
        return out;
    }
};

}  // namespace

TEST_CASE("g_values: logistic model without g capability is a config error") {
    const LogisticNoG model;
    const Matrix X = make_matrix(1, 1, {0.3});
    CHECK_THROWS_AS(g_values(model, X), Error);
}

TEST_CASE("auroc: perfect, reversed, and chance-level rankings") {
    const std::vector<double> labels{0, 0, 1, 1};
    CHECK(*auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, labels) == doctest::Approx(1.0));
    CHECK(*auroc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, labels) == doctest::Approx(0.0));
    CHECK(*auroc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, labels) == doctest::Approx(0.5));
}

TEST_CASE("auroc: tie handling via midranks") {
    // scores: positives {0.8, 0.5}, negatives {0.5, 0.2}
    // pairs: (0.8 vs 0.5) win, (0.8 vs 0.2) win, (0.5 vs 0.5) half, (0.5 vs 0.2) win
    const std::optional<double> value =
        auroc(std::vector<double>{0.8, 0.5, 0.5, 0.2}, std::vector<double>{1, 1, 0, 0});
    CHECK(*value == doctest::Approx(3.5 / 4.0));
}

TEST_CASE("auroc: degenerate label sets give no value") {
    CHECK_FALSE(auroc(std::vector<double>{0.1, 0.9}, std::vector<double>{1, 1}).has_value());
    CHECK_FALSE(auroc(std::vector<double>{0.1, 0.9}, std::vector<double>{0.2, 0.8}).has_value());
}

TEST_CASE("transfer and loss names round-trip") {
    CHECK(transfer_from_name(transfer_name(Transfer::identity)) == Transfer::identity);
    CHECK(transfer_from_name(transfer_name(Transfer::logistic)) == Transfer::logistic);
    CHECK(loss_from_name(loss_name(Loss::squared_error)) == Loss::squared_error);
    CHECK(loss_from_name(loss_name(Loss::binary_cross_entropy)) ==
          Loss::binary_cross_entropy);
    CHECK_THROWS_AS(transfer_from_name("softmax"), Error);
    CHECK_THROWS_AS(loss_from_name("hinge"), Error);
}
