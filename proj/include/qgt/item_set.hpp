#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "qgt/error.hpp"

namespace qgt {

/// Strictly increasing list of 0-based item indices.
class ItemSet {
public:
    using value_type = std::size_t;
    using const_iterator = std::vector<std::size_t>::const_iterator;

    ItemSet() = default;

    /// Takes an already sorted, duplicate-free list; throws InvalidParams otherwise.
    explicit ItemSet(std::vector<std::size_t> sorted) : items_(std::move(sorted)) {
        for (std::size_t i = 1; i < items_.size(); ++i) {
            detail::require(items_[i - 1] < items_[i], ErrorCode::InvalidParams,
                            "ItemSet: indices must be strictly increasing");
        }
    }

    ItemSet(std::initializer_list<std::size_t> sorted) : ItemSet(std::vector<std::size_t>(sorted)) {}

    /// Sorts and de-duplicates.
    static ItemSet from_unsorted(std::vector<std::size_t> items) {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
        ItemSet s;
        s.items_ = std::move(items);
        return s;
    }

    /// [0, n)
    static ItemSet range(std::size_t n) {
        ItemSet s;
        s.items_.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.items_[i] = i;
        return s;
    }

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    std::size_t operator[](std::size_t i) const { return items_[i]; }
    const_iterator begin() const noexcept { return items_.begin(); }
    const_iterator end() const noexcept { return items_.end(); }
    std::span<const std::size_t> view() const noexcept { return items_; }
    const std::vector<std::size_t>& indices() const noexcept { return items_; }

    bool contains(std::size_t item) const { return std::binary_search(items_.begin(), items_.end(), item); }

    /// True iff every element of `other` is in this set.
    bool includes(const ItemSet& other) const {
        return std::includes(items_.begin(), items_.end(), other.items_.begin(), other.items_.end());
    }

    std::size_t intersection_size(const ItemSet& other) const {
        std::size_t count = 0;
        auto a = items_.begin();
        auto b = other.items_.begin();
        while (a != items_.end() && b != other.items_.end()) {
            if (*a < *b) {
                ++a;
            } else if (*b < *a) {
                ++b;
            } else {
                ++count;
                ++a;
                ++b;
            }
        }
        return count;
    }

    ItemSet united(const ItemSet& other) const {
        std::vector<std::size_t> out;
        out.reserve(items_.size() + other.items_.size());
        std::set_union(items_.begin(), items_.end(), other.items_.begin(), other.items_.end(),
                       std::back_inserter(out));
        ItemSet s;
        s.items_ = std::move(out);
        return s;
    }

    /// Largest index + 1, or 0 when empty.
    std::size_t bound() const noexcept { return items_.empty() ? 0 : items_.back() + 1; }

    friend bool operator==(const ItemSet&, const ItemSet&) = default;

private:
    std::vector<std::size_t> items_;
};

}  // namespace qgt
