#include <gtest/gtest.h>

#include <cstdint>
#include <map>
#include <vector>

#include "qgt/exactla.hpp"
#include "qgt/model.hpp"

using namespace qgt;

namespace {

template <class T>
void expect_rref_shape(const RrefResult<T>& r) {
    const std::size_t cols = r.reduced.cols();
    std::vector<int> seen(cols, 0);
    for (auto c : r.pivot_cols) ++seen[c];
    for (auto c : r.free_cols) ++seen[c];
    for (int s : seen) ASSERT_EQ(s, 1);
    for (std::size_t q = 0; q < r.rank(); ++q) {
        if (q > 0) {
            ASSERT_LT(r.pivot_cols[q - 1], r.pivot_cols[q]);
        }
        for (std::size_t j = 0; j < r.pivot_cols[q]; ++j) ASSERT_EQ(r.reduced(q, j), T{0});
        for (std::size_t i = 0; i < r.reduced.rows(); ++i) ASSERT_EQ(r.reduced(i, r.pivot_cols[q]), T(i == q ? 1 : 0));
    }
    bool zero_row_with_rhs = false;
    for (std::size_t i = r.rank(); i < r.reduced.rows(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) ASSERT_EQ(r.reduced(i, j), T{0});
        if (r.rhs[i] != T{0}) zero_row_with_rhs = true;
    }
    EXPECT_EQ(r.consistent, !zero_row_with_rhs);
}

Matrix<std::uint64_t> random_field_matrix(std::size_t rows, std::size_t cols, std::uint64_t p, SplitMix64& rng,
                                          double zero_fraction) {
    Matrix<std::uint64_t> a(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) a(i, j) = rng.uniform01() < zero_fraction ? 0 : rng.uniform_below(p);
    }
    return a;
}

}  // namespace

TEST(ModpKernels, BlockedMatchesUnblocked) {
    SplitMix64 rng(5);
    struct Shape {
        std::size_t rows, cols;
        double zeros;
    };
    for (const Shape s : {Shape{1, 1, 0.0}, Shape{5, 9, 0.0}, Shape{40, 33, 0.0}, Shape{33, 70, 0.5},
                          Shape{70, 40, 0.9}, Shape{100, 100, 0.97}, Shape{64, 64, 0.0}}) {
        for (std::size_t panel : {1, 3, 16}) {
            auto a = random_field_matrix(s.rows, s.cols, detail::kM31, rng, s.zeros);
            auto b = a;
            const auto pa = detail::echelon_m31(a, panel);
            const auto pb = detail::echelon_generic(b, detail::kM31);
            ASSERT_EQ(pa, pb) << s.rows << "x" << s.cols << " panel " << panel;
            ASSERT_EQ(a, b) << s.rows << "x" << s.cols << " panel " << panel;
        }
    }
}

TEST(ModpKernels, LowRankProducts) {
    // Rank-r product U V with duplicated rows exercises skipped pivots inside a panel.
    SplitMix64 rng(8);
    const std::size_t rows = 50, cols = 45, r = 7;
    auto u = random_field_matrix(rows, r, detail::kM31, rng, 0.0);
    auto v = random_field_matrix(r, cols, detail::kM31, rng, 0.0);
    Matrix<std::uint64_t> a(rows, cols, 0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            std::uint64_t acc = 0;
            for (std::size_t t = 0; t < r; ++t) acc = (acc + detail::m31_mul(u(i, t), v(t, j))) % detail::kM31;
            a(i, j) = acc;
        }
    }
    auto b = a;
    EXPECT_EQ(detail::echelon_m31(a).size(), r);
    detail::echelon_generic(b, detail::kM31);
    EXPECT_EQ(a, b);
}

TEST(ModpKernels, Accumulate) {
    const std::uint64_t p = detail::kM31;
    std::vector<std::uint64_t> dst{p - 1, 0, 5};
    std::vector<std::uint64_t> s0{p - 1, p - 1, 1}, s1{p - 1, 2, 3};
    std::vector<const std::uint64_t*> srcs{s0.data(), s1.data(), s0.data(), s1.data(), s0.data()};
    std::vector<std::uint64_t> f{p - 1, p - 1, p - 1, p - 1, 7};
    auto expect = dst;
    for (std::size_t t = 0; t < 5; ++t) {
        for (std::size_t c = 0; c < 3; ++c) expect[c] = (expect[c] + detail::mulmod(f[t], srcs[t][c], p)) % p;
    }
    detail::m31_accumulate(dst.data(), srcs.data(), f.data(), 5, 3);
    EXPECT_EQ(dst, expect);
}

TEST(Rref, IdentitySystem) {
    const IntMatrix m{{1, 0}, {0, 1}};
    const std::vector<std::int64_t> v{1, 0};
    const auto r = std::get<ModpRref>(rref(m, v));
    EXPECT_EQ(r.pivot_cols, (std::vector<std::size_t>{0, 1}));
    EXPECT_TRUE(r.free_cols.empty());
    EXPECT_TRUE(r.consistent);
    EXPECT_EQ(solve_pinned(r, {}), (std::vector<std::uint64_t>{1, 0}));
}

TEST(Rref, SingleRowTwoUnknowns) {
    const IntMatrix m{{1, 1}};
    const std::vector<std::int64_t> v{1};
    const auto r = std::get<ModpRref>(rref(m, v, ModP{2147483647}));
    EXPECT_EQ(r.pivot_cols, (std::vector<std::size_t>{0}));
    EXPECT_EQ(r.free_cols, (std::vector<std::size_t>{1}));
    EXPECT_TRUE(r.consistent);
    EXPECT_EQ(solve_pinned(r, {{1, 0}}), (std::vector<std::uint64_t>{1, 0}));
    EXPECT_EQ(solve_pinned(r, {{1, 1}}), (std::vector<std::uint64_t>{0, 1}));
    EXPECT_THROW(solve_pinned(r, {}), Error);
    EXPECT_THROW(solve_pinned(r, {{0, 1}, {1, 1}}), Error);
}

TEST(Rref, InconsistentSystem) {
    const IntMatrix m{{1, 1}, {1, 1}};
    const std::vector<std::int64_t> v{1, 2};
    for (const FieldMode mode : {FieldMode{ModP{}}, FieldMode{ExactRational{}}}) {
        const AnyRref any = rref(m, v, mode);
        std::visit(
            [](const auto& r) {
                EXPECT_FALSE(r.consistent);
                EXPECT_EQ(r.rank(), 1U);
                expect_rref_shape(r);
                std::map<std::size_t, typename std::decay_t<decltype(r.rhs)>::value_type> pin;
                pin[1] = 0;
                EXPECT_THROW(solve_pinned(r, pin), Error);
            },
            any);
    }
}

TEST(Rref, RationalEntries) {
    const IntMatrix m{{2, 4, 1}, {1, 3, 0}};
    const std::vector<std::int64_t> v{3, 1};
    const auto r = std::get<RationalRref>(rref(m, v, ExactRational{}));
    expect_rref_shape(r);
    EXPECT_EQ(r.pivot_cols, (std::vector<std::size_t>{0, 1}));
    // x0 + 1.5 x2 = 2.5, x1 - 0.5 x2 = -0.5
    EXPECT_EQ(r.reduced(0, 2), Rational(3, 2));
    EXPECT_EQ(r.reduced(1, 2), Rational(-1, 2));
    EXPECT_EQ(r.rhs[0], Rational(5, 2));
    EXPECT_EQ(r.rhs[1], Rational(-1, 2));
    const auto z = solve_pinned(r, {{2, Rational(1)}});
    EXPECT_EQ(z, (std::vector<Rational>{Rational(1), Rational(0), Rational(1)}));
}

TEST(Rref, InvariantsAndIdempotence) {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t rows = 1 + rng.uniform_below(30);
        const std::size_t cols = 1 + rng.uniform_below(30);
        const BitMatrix a = random_bit_matrix(rows, cols, rng);
        std::vector<std::int64_t> v(rows);
        for (auto& x : v) x = static_cast<std::int64_t>(rng.uniform_below(4));
        for (const FieldMode mode : {FieldMode{ModP{}}, FieldMode{ModP{101}}, FieldMode{ExactRational{}}}) {
            std::visit(
                [&](const auto& r) {
                    expect_rref_shape(r);
                    using T = typename std::decay_t<decltype(r.rhs)>::value_type;
                    if constexpr (std::is_same_v<T, std::uint64_t>) {
                        IntMatrix again(rows, cols);
                        std::vector<std::int64_t> rhs(rows);
                        for (std::size_t i = 0; i < rows; ++i) {
                            for (std::size_t j = 0; j < cols; ++j) again(i, j) = static_cast<std::int64_t>(r.reduced(i, j));
                            rhs[i] = static_cast<std::int64_t>(r.rhs[i]);
                        }
                        const auto r2 = std::get<ModpRref>(rref(again, rhs, r.mode));
                        EXPECT_EQ(r2.reduced, r.reduced);
                        EXPECT_EQ(r2.rhs, r.rhs);
                    }
                },
                rref(a, v, mode));
        }
    }
}

TEST(Rank, Examples) {
    IntMatrix id(5, 5, 0);
    for (int i = 0; i < 5; ++i) id(i, i) = 1;
    EXPECT_EQ(rank(id), 5U);
    EXPECT_EQ(rank(id, ExactRational{}), 5U);
    const IntMatrix same{{1, 1}, {1, 1}};
    EXPECT_EQ(rank(same), 1U);
    EXPECT_EQ(rank(same, ExactRational{}), 1U);
    const std::int64_t p = 2147483647;
    const IntMatrix undercount{{1, 0}, {0, p}};
    EXPECT_EQ(rank(undercount, ModP{static_cast<std::uint64_t>(p)}), 1U);
    EXPECT_EQ(rank(undercount, ExactRational{}), 2U);
}

TEST(Rank, ModeAgreementOnRandomBinary) {
    SplitMix64 rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t rows = 1 + rng.uniform_below(32);
        const std::size_t cols = 1 + rng.uniform_below(32);
        const BitMatrix a = random_bit_matrix(rows, cols, rng);
        const std::size_t rp = rank(a);
        ASSERT_EQ(rp, rank(a, ExactRational{})) << "trial " << trial;
        ASSERT_LE(rp, std::min(rows, cols));
    }
}

TEST(Rank, RowPermutationInvariant) {
    SplitMix64 rng(2);
    const BitMatrix a = random_bit_matrix(20, 25, rng);
    IntMatrix m = to_int_matrix(a);
    const std::size_t before = rank(m, ExactRational{});
    m.swap_rows(0, 19);
    m.swap_rows(3, 7);
    EXPECT_EQ(rank(m, ExactRational{}), before);
    EXPECT_EQ(rank(m), rank(a));
}

TEST(Rank, BareissFallsBackToBigIntegers) {
    const std::int64_t big = std::int64_t{1} << 61;
    const IntMatrix m{{big, big - 1, 3}, {big - 5, big, 7}, {1, 2, big}};
    auto work = m;
    EXPECT_FALSE(detail::bareiss_i64(work).has_value());
    EXPECT_EQ(rank(m, ExactRational{}), 3U);
}

TEST(FieldMode, Validation) {
    const IntMatrix m{{1}};
    const std::vector<std::int64_t> v{1};
    EXPECT_THROW(rref(m, v, ModP{2}), Error);
    EXPECT_THROW(rref(m, v, ModP{15}), Error);
    EXPECT_NO_THROW(rref(m, v, ModP{(std::uint64_t{1} << 61) - 1}));
    const IntMatrix wide(2, 65, 0);
    try {
        rank(wide, ExactRational{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ExactCapExceeded);
    }
    EXPECT_EQ(rank(wide, ExactRational{65}), 0U);
    EXPECT_THROW(rref(m, std::vector<std::int64_t>{1, 2}), Error);
}

TEST(SolvePinned, SatisfiesReducedSystem) {
    SplitMix64 rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const BitMatrix a = random_bit_matrix(8, 14, rng);
        const ItemSet x = random_subset(14, 4, rng);
        const auto y = outcome(a, x);
        const auto r = std::get<ModpRref>(rref(a, y));
        ASSERT_TRUE(r.consistent);
        std::map<std::size_t, std::uint64_t> pin;
        for (auto f : r.free_cols) pin[f] = rng.uniform_below(detail::kM31);
        const auto z = solve_pinned(r, pin);
        for (std::size_t q = 0; q < r.rank(); ++q) {
            std::uint64_t acc = 0;
            for (std::size_t j = 0; j < 14; ++j) acc = (acc + detail::mulmod(r.reduced(q, j), z[j], detail::kM31)) % detail::kM31;
            ASSERT_EQ(acc, r.rhs[q]);
        }
        // Pinning the free columns to the planted values reproduces the planted vector.
        std::map<std::size_t, std::uint64_t> truth;
        for (auto f : r.free_cols) truth[f] = x.contains(f) ? 1 : 0;
        const auto zt = solve_pinned(r, truth);
        for (std::size_t j = 0; j < 14; ++j) ASSERT_EQ(zt[j], x.contains(j) ? 1U : 0U);
    }
}

TEST(VerifyInteger, Examples) {
    const IntMatrix id{{1, 0}, {0, 1}};
    const std::vector<std::int64_t> v{4, -3};
    EXPECT_TRUE(verify_integer(id, v, v));
    const IntMatrix row{{1, 1}};
    EXPECT_TRUE(verify_integer(row, std::vector<std::int64_t>{1, 0}, std::vector<std::int64_t>{1}));
    EXPECT_FALSE(verify_integer(row, std::vector<std::int64_t>{1, 1}, std::vector<std::int64_t>{1}));
    // Mod-p wraparound must not fool the integer check.
    const std::int64_t p = 2147483647;
    EXPECT_FALSE(verify_integer(row, std::vector<std::int64_t>{p + 1, 0}, std::vector<std::int64_t>{1}));
}

TEST(VerifyInteger, PlantedInstances) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Instance inst = generate_instance(90, 7, 30, seed);
        std::vector<std::int64_t> x(inst.n, 0);
        for (auto i : inst.defectives) x[i] = 1;
        EXPECT_TRUE(verify_integer(inst.matrix, x, inst.outcome));
        EXPECT_TRUE(verify_integer(to_int_matrix(inst.matrix), x, inst.outcome));
        x[inst.defectives[0]] = 0;
        EXPECT_FALSE(verify_integer(inst.matrix, x, inst.outcome));
    }
}
