#ifndef FEATSIG_DATA_HPP
#define FEATSIG_DATA_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "featsig/errors.hpp"

namespace featsig {

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    std::span<const double> flat() const { return data_; }
    std::span<double> flat() { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Test instances the model is interrogated on: feature matrix plus targets.
struct Dataset {
    Matrix X;
    std::vector<double> y;
    std::vector<std::string> column_names;  // empty when the source had none

    std::size_t size() const { return X.rows(); }
    std::size_t arity() const { return X.cols(); }

    void validate() const {
        if (X.rows() == 0) throw data_error("dataset is empty (m >= 1 required)");
        if (X.rows() != y.size())
            throw data_error("dataset row count " + std::to_string(X.rows()) +
                             " does not match target count " + std::to_string(y.size()));
        if (!column_names.empty() && column_names.size() != X.cols())
            throw data_error("column name count does not match matrix width");
    }
};

inline bool is_binary_value(double v) { return v == 0.0 || v == 1.0; }

}  // namespace featsig

#endif  // FEATSIG_DATA_HPP
