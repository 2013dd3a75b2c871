#pragma once

#include <vector>

#include "aad/tensor.hpp"

namespace aad {

struct ConfusionCounts {
    long tp = 0, tn = 0, fp = 0, fn = 0;

    long total() const { return tp + tn + fp + fn; }
    void add(int predicted, int actual);
};

// ACC/PRE/SEN/SPE plus the PRE-SEN harmonic mean. Zero-denominator cases
// yield 0 with the corresponding flag set (reports never carry NaN).
struct Metrics {
    double acc = 0.0, pre = 0.0, sen = 0.0, spe = 0.0, f1 = 0.0;
    bool pre_undefined = false, sen_undefined = false, spe_undefined = false, f1_undefined = false;
};

Metrics compute_metrics(const ConfusionCounts& counts);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // sorted by FPR, (0,0) .. (1,1)
    double auc = 0.0;              // trapezoid; ties contribute 0.5 per pair
};

// Threshold sweep over every distinct score; prediction is positive iff
// score >= threshold. Requires both classes present.
RocCurve roc(const Vector& scores, const std::vector<int>& labels);

}  // namespace aad
