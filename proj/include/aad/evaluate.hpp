#pragma once

#include <memory>
#include <string>
#include <vector>

#include "aad/baseline.hpp"
#include "aad/metrics.hpp"
#include "aad/train.hpp"
#include "aad/trial_io.hpp"

namespace aad {

enum class ModelKind { AadNet, Fbcsp, Pca };
ModelKind parse_model_kind(const std::string& name);  // "aadnet" | "fbcsp" | "pca"
const char* model_kind_name(ModelKind kind);

struct SubjectWindows {
    std::string subject_id;
    std::vector<Window> windows;
};

struct EvalOptions {
    Task task = Task::OA;
    double window_s = 0.5;
    double fs = 500.0;
    ModelKind kind = ModelKind::AadNet;
    ModelConfig model_cfg;       // window_samples/n_channels set from the data
    TrainConfig train_cfg;
    HyperGrid grid;
    bool use_grid = false;
    BaselineConfig baseline_cfg;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string variant = "base";
    bool capture_model = false;  // keep the first subject's fold-0 model
};

struct SubjectResult {
    std::string subject_id;
    ConfusionCounts counts;  // pooled over the 5 outer folds
    Metrics metrics;
    RocCurve roc;
    std::uint64_t fold_hash = 0;
    std::vector<TrainConfig> selected_cfgs;  // per outer fold (grid search only)
};

struct EvalReport {
    std::string model;
    std::string variant;
    Task task = Task::OA;
    double window_s = 0.0;
    std::vector<SubjectResult> subjects;
    Metrics mean, sd;  // across subjects, sample SD (n-1)
    double auc_mean = 0.0, auc_sd = 0.0;
    RocCurve pooled;   // scores pooled over every subject and fold
    std::shared_ptr<ModelParams> captured_model;
    std::shared_ptr<BaselinePipeline> captured_baseline;
    std::vector<std::string> warnings;
};

// The published protocol: per subject, 5 outer folds; per fold, optional grid
// search on the inner folds, retrain on the full outer-train set, test on the
// held-out fold; pool confusion counts per subject; aggregate across
// subjects. Test windows never reach fitting, standardization or training.
EvalReport evaluate_outer(const std::vector<SubjectWindows>& subjects, const EvalOptions& opts);

// Base plus the three BN-ablation variants over identical fold plans
// (asserted by hash equality).
struct AblationReport {
    std::vector<EvalReport> reports;  // base, m1, m2, m3
};
AblationReport run_ablation(const std::vector<SubjectWindows>& subjects, const EvalOptions& base);

struct EmbedPoint {
    double x = 0.0;
    double y = 0.0;
    int label = 0;
};

// Windows -> hidden-layer markers -> 2-D PCA scatter.
std::vector<EmbedPoint> export_embedding(ModelParams& params, const std::vector<Window>& windows,
                                         Task task);

// Preprocess + segment a loaded dataset into per-subject window sets.
std::vector<SubjectWindows> build_windows(const std::vector<SubjectTrials>& dataset,
                                          const FirSpec& fir, double window_s, double stride_s,
                                          std::vector<std::string>* stage_log = nullptr);

}  // namespace aad
