#pragma once

#include <string>
#include <vector>

#include "aad/csp.hpp"
#include "aad/linear_clf.hpp"
#include "aad/pca.hpp"

namespace aad {

struct FbcspConfig {
    std::vector<CspBand> bands = default_fbcsp_bands();
    int pairs = 3;
};

struct PcaBaselineConfig {
    int q = 32;  // retained components of the flattened window
};

struct BaselineConfig {
    FbcspConfig fbcsp;
    PcaBaselineConfig pca;
    LinearFitConfig linear;
};

// Classical comparator: feature extractor (FBCSP log-variances or PCA of the
// flattened window) -> train-fitted standardizer -> linear classifier.
struct BaselinePipeline {
    std::string kind;  // "fbcsp" | "pca"
    CspModel csp;
    PcaModel pca;
    Standardizer standardizer;
    LinearClassifier clf;
    double fs = 0.0;

    Vector features(const Matrix& window) const;
    double score(const Matrix& window) const;          // signed decision value
    int label(const Matrix& window) const;             // score >= 0 -> positive
};

// Fits the full pipeline on the indexed training windows. Only `fit` sees
// labels; transforming test windows never does.
BaselinePipeline fit_baseline(const std::string& kind, const std::vector<Window>& windows,
                              const std::vector<int>& train_idx, Task task,
                              const BaselineConfig& cfg, double fs, std::uint64_t seed,
                              std::vector<std::string>* warnings = nullptr);

// Baseline checkpoint, magic "AADC": tagged binary sections mirroring the
// model checkpoint scheme. Round-trips are bit-exact.
void save_baseline(const BaselinePipeline& pipeline, const std::string& path);
BaselinePipeline load_baseline(const std::string& path);

}  // namespace aad
