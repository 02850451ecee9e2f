#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qgt/error.hpp"
#include "qgt/item_set.hpp"

namespace qgt {

/// Row-major bit-packed binary matrix. Bit i of row j lives in word (j * words_per_row + i / 64)
/// at position i % 64. Bits past `cols` in the last word of each row are always zero, so
/// equality is plain word equality.
class BitMatrix {
public:
    using word_type = std::uint64_t;
    static constexpr std::size_t word_bits = 64;

    BitMatrix() = default;

    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), wpr_((cols + word_bits - 1) / word_bits), words_(rows * wpr_, 0) {
        detail::require(rows >= 1 && cols >= 1, ErrorCode::InvalidParams, "BitMatrix: rows and cols must be >= 1");
    }

    /// Builds from nested 0/1 lists; for tests and small literals.
    static BitMatrix from_rows(const std::vector<std::vector<int>>& entries) {
        detail::require(!entries.empty() && !entries.front().empty(), ErrorCode::InvalidParams,
                        "BitMatrix: empty literal");
        BitMatrix a(entries.size(), entries.front().size());
        for (std::size_t j = 0; j < a.rows_; ++j) {
            detail::require(entries[j].size() == a.cols_, ErrorCode::InvalidParams, "BitMatrix: ragged literal");
            for (std::size_t i = 0; i < a.cols_; ++i) a.set(j, i, entries[j][i] != 0);
        }
        return a;
    }

    static BitMatrix ones(std::size_t rows, std::size_t cols) {
        BitMatrix a(rows, cols);
        return a.complement();
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t words_per_row() const noexcept { return wpr_; }

    bool get(std::size_t row, std::size_t col) const {
        return (words_[row * wpr_ + col / word_bits] >> (col % word_bits)) & 1U;
    }

    void set(std::size_t row, std::size_t col, bool value) {
        word_type& w = words_[row * wpr_ + col / word_bits];
        const word_type bit = word_type{1} << (col % word_bits);
        w = value ? (w | bit) : (w & ~bit);
    }

    std::span<const word_type> row_words(std::size_t row) const { return {words_.data() + row * wpr_, wpr_}; }
    std::span<word_type> row_words(std::size_t row) { return {words_.data() + row * wpr_, wpr_}; }
    std::span<const word_type> words() const noexcept { return words_; }

    /// Mask of valid bits in the last word of a row.
    word_type tail_mask() const noexcept {
        const std::size_t r = cols_ % word_bits;
        return r == 0 ? ~word_type{0} : ((word_type{1} << r) - 1);
    }

    /// Clears the padding bits; callers that write whole words must finish with this.
    void canonicalize() noexcept {
        const word_type mask = tail_mask();
        for (std::size_t j = 0; j < rows_; ++j) words_[j * wpr_ + wpr_ - 1] &= mask;
    }

    BitMatrix complement() const {
        BitMatrix out = *this;
        for (auto& w : out.words_) w = ~w;
        out.canonicalize();
        return out;
    }

    /// The first `count` rows.
    BitMatrix first_rows(std::size_t count) const {
        detail::require(count >= 1 && count <= rows_, ErrorCode::InvalidParams, "first_rows: count out of range");
        BitMatrix out(count, cols_);
        std::copy(words_.begin(), words_.begin() + static_cast<std::ptrdiff_t>(count * wpr_), out.words_.begin());
        return out;
    }

    /// Submatrix of the listed columns, in list order.
    BitMatrix select_columns(const ItemSet& columns) const {
        detail::require(!columns.empty(), ErrorCode::InvalidParams, "select_columns: empty column set");
        detail::require(columns.bound() <= cols_, ErrorCode::IndexOutOfRange, "select_columns: column index");
        BitMatrix out(rows_, columns.size());
        for (std::size_t j = 0; j < rows_; ++j) {
            for (std::size_t t = 0; t < columns.size(); ++t) {
                if (get(j, columns[t])) out.set(j, t, true);
            }
        }
        return out;
    }

    BitMatrix transposed() const {
        BitMatrix out(cols_, rows_);
        for (std::size_t j = 0; j < rows_; ++j) {
            const auto row = row_words(j);
            for (std::size_t w = 0; w < wpr_; ++w) {
                word_type bits = row[w];
                while (bits != 0) {
                    const std::size_t b = static_cast<std::size_t>(std::countr_zero(bits));
                    out.set(w * word_bits + b, j, true);
                    bits &= bits - 1;
                }
            }
        }
        return out;
    }

    /// popcount(row & mask) for every row; mask has words_per_row() words.
    std::vector<std::int64_t> masked_row_counts(std::span<const word_type> mask) const {
        std::vector<std::int64_t> out(rows_, 0);
        for (std::size_t j = 0; j < rows_; ++j) {
            const word_type* row = words_.data() + j * wpr_;
            std::int64_t c = 0;
            for (std::size_t w = 0; w < wpr_; ++w) c += std::popcount(row[w] & mask[w]);
            out[j] = c;
        }
        return out;
    }

    /// Packed indicator of a column set, usable as a mask for masked_row_counts.
    std::vector<word_type> column_mask(const ItemSet& columns) const {
        detail::require(columns.bound() <= cols_, ErrorCode::IndexOutOfRange, "column_mask: column index");
        std::vector<word_type> mask(wpr_, 0);
        for (std::size_t i : columns) mask[i / word_bits] |= word_type{1} << (i % word_bits);
        return mask;
    }

    /// out[i] = sum_j A[j][i] * weights[j].
    std::vector<std::int64_t> column_dot(std::span<const std::int64_t> weights) const {
        detail::require(weights.size() == rows_, ErrorCode::InvalidParams, "column_dot: weight length");
        std::vector<std::int64_t> acc(wpr_ * word_bits, 0);
        for (std::size_t j = 0; j < rows_; ++j) {
            const std::int64_t wt = weights[j];
            if (wt == 0) continue;
            const word_type* row = words_.data() + j * wpr_;
            for (std::size_t w = 0; w < wpr_; ++w) {
                const word_type bits = row[w];
                if (bits == 0) continue;
                std::int64_t* dst = acc.data() + w * word_bits;
                for (std::size_t b = 0; b < word_bits; ++b) {
                    dst[b] += wt & -static_cast<std::int64_t>((bits >> b) & 1U);
                }
            }
        }
        acc.resize(cols_);
        return acc;
    }

    /// Number of ones in each column.
    std::vector<std::int64_t> column_weights() const {
        const std::vector<std::int64_t> ones(rows_, 1);
        return column_dot(ones);
    }

    std::size_t count_ones() const {
        std::size_t c = 0;
        for (word_type w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t wpr_ = 0;
    std::vector<word_type> words_;
};

}  // namespace qgt
