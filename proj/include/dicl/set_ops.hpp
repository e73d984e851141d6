// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <set>

#include "dicl/rational.hpp"

namespace dicl {

template <typename T>
std::size_t intersection_size(const std::set<T>& a, const std::set<T>& b) {
    std::size_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

/// |a ∩ b| / |a ∪ b| as an exact fraction; 0 when both are empty.
template <typename T>
Rational jaccard_exact(const std::set<T>& a, const std::set<T>& b) {
    const auto inter = intersection_size(a, b);
    const auto uni = a.size() + b.size() - inter;
    if (uni == 0) return Rational(0);
    return Rational(static_cast<std::int64_t>(inter), static_cast<std::int64_t>(uni));
}

template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
    return jaccard_exact(a, b).to_double();
}

template <typename T>
bool is_subset(const std::set<T>& sub, const std::set<T>& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

}  // namespace dicl
