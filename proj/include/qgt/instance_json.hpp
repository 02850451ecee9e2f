#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "qgt/model.hpp"

namespace qgt {

/// Row j as lowercase hex: digit d holds columns 4d..4d+3, column 4d+b at bit b of the digit.
inline std::string row_to_hex(const BitMatrix& a, std::size_t row) {
    static constexpr char digits[] = "0123456789abcdef";
    const std::size_t ndigits = (a.cols() + 3) / 4;
    const auto words = a.row_words(row);
    std::string out(ndigits, '0');
    for (std::size_t d = 0; d < ndigits; ++d) {
        const std::size_t bit = d * 4;
        // 4-bit groups never straddle a word boundary since 64 % 4 == 0.
        out[d] = digits[(words[bit / 64] >> (bit % 64)) & 0xFU];
    }
    return out;
}

inline void row_from_hex(BitMatrix& a, std::size_t row, std::string_view hex) {
    detail::require(hex.size() == (a.cols() + 3) / 4, ErrorCode::Parse, "matrix row: wrong hex length");
    auto words = a.row_words(row);
    for (std::size_t d = 0; d < hex.size(); ++d) {
        const char c = hex[d];
        unsigned v = 0;
        if (c >= '0' && c <= '9') {
            v = static_cast<unsigned>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            v = static_cast<unsigned>(c - 'a' + 10);
        } else {
            throw Error(ErrorCode::Parse, "matrix row: not a lowercase hex digit");
        }
        const std::size_t bit = d * 4;
        words[bit / 64] |= static_cast<std::uint64_t>(v) << (bit % 64);
    }
    const std::uint64_t tail = words[words.size() - 1] & ~a.tail_mask();
    detail::require(tail == 0, ErrorCode::Parse, "matrix row: nonzero padding bits");
}

inline nlohmann::json to_json(const Instance& inst) {
    nlohmann::json j;
    j["n"] = inst.n;
    j["k"] = inst.k;
    j["m"] = inst.m;
    j["seed"] = inst.seed;
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < inst.matrix.rows(); ++r) rows.push_back(row_to_hex(inst.matrix, r));
    j["matrix"] = std::move(rows);
    j["defectives"] = inst.defectives.indices();
    j["outcome"] = inst.outcome;
    return j;
}

/// Parses and validates; every structural problem surfaces as Error(Parse) or Error(InvalidParams).
inline Instance instance_from_json(const nlohmann::json& j) {
    Instance inst;
    try {
        inst.n = j.at("n").get<std::size_t>();
        inst.k = j.at("k").get<std::size_t>();
        inst.m = j.at("m").get<std::size_t>();
        inst.seed = j.at("seed").get<std::uint64_t>();
        const auto& rows = j.at("matrix");
        detail::require(rows.is_array() && rows.size() == inst.m, ErrorCode::Parse, "matrix: expected m rows");
        inst.matrix = BitMatrix(inst.m, inst.n);
        for (std::size_t r = 0; r < inst.m; ++r) row_from_hex(inst.matrix, r, rows[r].get<std::string>());
        inst.defectives = ItemSet(j.at("defectives").get<std::vector<std::size_t>>());
        inst.outcome = j.at("outcome").get<Outcome>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
    validate(inst);
    return inst;
}

}  // namespace qgt
