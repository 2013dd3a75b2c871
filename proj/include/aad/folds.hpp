#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "aad/common.hpp"

namespace aad {

constexpr int kFoldCount = 5;

// Deterministic nested cross-validation plan: 5 outer folds partition all
// window indices; for each outer fold, 5 inner folds partition its training
// complement. Both levels are label-stratified to within one sample.
struct FoldPlan {
    std::uint64_t seed = 0;
    int n = 0;
    std::array<std::vector<int>, kFoldCount> outer;
    // inner[f][i] partitions the training set of outer fold f
    std::array<std::array<std::vector<int>, kFoldCount>, kFoldCount> inner;

    std::vector<int> outer_train(int fold) const;  // all indices minus outer[fold]
    std::uint64_t hash() const;                    // FNV-1a over the index sets
};

FoldPlan make_folds(const std::vector<int>& labels, std::uint64_t seed);

}  // namespace aad
