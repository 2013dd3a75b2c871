#include "aad/folds.hpp"

#include <algorithm>

#include "aad/rng.hpp"

namespace aad {

namespace {

// Stratified split of `indices` (with labels) into kFoldCount sorted sets.
// Class-0 remainders go to the first folds and class-1 remainders to the
// last, keeping total fold sizes within one of each other.
std::array<std::vector<int>, kFoldCount> stratified_split(const std::vector<int>& indices,
                                                          const std::vector<int>& labels,
                                                          Rng& rng) {
    std::vector<int> class0, class1;
    for (int idx : indices)
        (labels[static_cast<std::size_t>(idx)] == 0 ? class0 : class1).push_back(idx);
    rng.shuffle(class0);
    rng.shuffle(class1);

    std::array<std::vector<int>, kFoldCount> folds;
    std::size_t at = 0;
    const std::size_t b0 = class0.size() / kFoldCount, r0 = class0.size() % kFoldCount;
    for (int f = 0; f < kFoldCount; ++f) {
        const std::size_t take = b0 + (static_cast<std::size_t>(f) < r0 ? 1 : 0);
        for (std::size_t i = 0; i < take; ++i) folds[static_cast<std::size_t>(f)].push_back(class0[at++]);
    }
    at = 0;
    const std::size_t b1 = class1.size() / kFoldCount, r1 = class1.size() % kFoldCount;
    for (int f = 0; f < kFoldCount; ++f) {
        const std::size_t take =
            b1 + (static_cast<std::size_t>(f) >= kFoldCount - r1 ? 1 : 0);
        for (std::size_t i = 0; i < take; ++i) folds[static_cast<std::size_t>(f)].push_back(class1[at++]);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

}  // namespace

std::vector<int> FoldPlan::outer_train(int fold) const {
    std::vector<bool> held(static_cast<std::size_t>(n), false);
    for (int idx : outer[static_cast<std::size_t>(fold)]) held[static_cast<std::size_t>(idx)] = true;
    std::vector<int> train;
    train.reserve(static_cast<std::size_t>(n) - outer[static_cast<std::size_t>(fold)].size());
    for (int i = 0; i < n; ++i)
        if (!held[static_cast<std::size_t>(i)]) train.push_back(i);
    return train;
}

std::uint64_t FoldPlan::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint64_t>(n));
    for (const auto& f : outer) {
        mix(f.size());
        for (int idx : f) mix(static_cast<std::uint64_t>(idx));
    }
    for (const auto& per_outer : inner)
        for (const auto& f : per_outer) {
            mix(f.size());
            for (int idx : f) mix(static_cast<std::uint64_t>(idx));
        }
    return h;
}

FoldPlan make_folds(const std::vector<int>& labels, std::uint64_t seed) {
    const int n = static_cast<int>(labels.size());
    if (n < 25)
        throw ParamError("make_folds: need at least 25 windows, got " + std::to_string(n));
    for (int y : labels)
        if (y != 0 && y != 1) throw ParamError("make_folds: labels must be 0 or 1");

    FoldPlan plan;
    plan.seed = seed;
    plan.n = n;

    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;

    Rng outer_rng(derive_seed(seed, 0x666f6c64ULL));
    plan.outer = stratified_split(all, labels, outer_rng);

    for (int f = 0; f < kFoldCount; ++f) {
        Rng inner_rng(derive_seed(seed, 0x666f6c64ULL, static_cast<std::uint64_t>(f + 1)));
        plan.inner[static_cast<std::size_t>(f)] =
            stratified_split(plan.outer_train(f), labels, inner_rng);
    }
    return plan;
}

}  // namespace aad
