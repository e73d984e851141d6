// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/signals.hpp"

namespace dicl::demo {

std::string_view describe(BundleSignalType type) {
    switch (type) {
        case BundleSignalType::kKeep: return "correct and should be kept";
        case BundleSignalType::kInvalid: return "invalid and should be removed";
        case BundleSignalType::kRemoveUnrelated: return "containing unrelated products to be removed";
        case BundleSignalType::kAppendRelated:
            return "missing some products and should append other related products";
        case BundleSignalType::kExpandSingleton:
            return "missing some products and should contain at least two related products";
    }
    return "";
}

std::string_view describe(IntentSignalType type) {
    switch (type) {
        case IntentSignalType::kNaturalness: return "be more natural";
        case IntentSignalType::kCoverage: return "cover more products within the bundle";
        case IntentSignalType::kMotivation: return "have a more motivational description";
    }
    return "";
}

}  // namespace dicl::demo
