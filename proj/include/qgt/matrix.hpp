#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "qgt/bit_matrix.hpp"
#include "qgt/error.hpp"

namespace qgt {

/// Dense row-major matrix. Zero-sized shapes are allowed here (unlike BitMatrix).
template <class T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<T>> rows) : rows_(rows.size()) {
        cols_ = rows.size() == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            detail::require(r.size() == cols_, ErrorCode::InvalidParams, "Matrix: ragged literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        std::swap_ranges(data_.begin() + static_cast<std::ptrdiff_t>(a * cols_),
                         data_.begin() + static_cast<std::ptrdiff_t>((a + 1) * cols_),
                         data_.begin() + static_cast<std::ptrdiff_t>(b * cols_));
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using IntMatrix = Matrix<std::int64_t>;

inline IntMatrix to_int_matrix(const BitMatrix& a) {
    IntMatrix out(a.rows(), a.cols());
    for (std::size_t j = 0; j < a.rows(); ++j) {
        for (std::size_t i = 0; i < a.cols(); ++i) out(j, i) = a.get(j, i) ? 1 : 0;
    }
    return out;
}

}  // namespace qgt
