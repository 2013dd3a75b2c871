#pragma once

#include <vector>

#include "aad/folds.hpp"
#include "aad/model.hpp"
#include "aad/preprocess.hpp"

namespace aad {

// Optimizer settings; the defaults and grid mirror the published values
// (lr 1e-3, batch 20, 100 epochs, weight decay 1e-2).
struct TrainConfig {
    double lr = 1e-3;
    int batch = 20;
    int epochs = 100;
    double weight_decay = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    // inner-CV grid evaluations train with epochs capped at min(50, epochs);
    // the selected configuration is retrained uncapped
    bool cap_grid_epochs = true;
};

struct HyperGrid {
    std::vector<double> lr{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<int> batch{10, 20, 50};
    std::vector<int> epochs{20, 50, 100, 150, 200};
    std::vector<double> weight_decay{1e-1, 1e-2, 1e-3};

    std::size_t size() const {
        return lr.size() * batch.size() * epochs.size() * weight_decay.size();
    }
};

struct EpochStats {
    double train_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = -1;  // -1: no validation set, final-epoch parameters kept
    double best_val_acc = 0.0;
};

// Stacks the selected windows into a (B, 1, C, T) batch.
Tensor4 windows_to_tensor(const std::vector<Window>& windows, const std::vector<int>& idx);
std::vector<int> window_labels(const std::vector<Window>& windows, const std::vector<int>& idx,
                               Task task);

// Epoch loop: seeded shuffle, batches of cfg.batch (final partial batch
// kept), forward/backward/adam. With a validation set, returns the
// parameters of the best-val-accuracy epoch (ties -> earliest); otherwise
// the final epoch's parameters stay in place.
TrainResult train(ModelParams& params, const std::vector<Window>& windows,
                  const std::vector<int>& train_idx, const std::vector<int>& val_idx, Task task,
                  const TrainConfig& cfg);

// Batched inference accuracy and positive-class scores.
double eval_accuracy(ModelParams& params, const std::vector<Window>& windows,
                     const std::vector<int>& idx, Task task);
Vector eval_scores(ModelParams& params, const std::vector<Window>& windows,
                   const std::vector<int>& idx);

// Mean inner-CV validation accuracy per grid point; returns the argmax
// configuration (ties -> first in lr-major, then batch, epochs, decay order).
TrainConfig grid_search(const std::vector<Window>& windows, const FoldPlan& plan, int outer_fold,
                        Task task, const ModelConfig& model_cfg, const TrainConfig& base,
                        const HyperGrid& grid, double* best_mean_acc = nullptr);

}  // namespace aad
