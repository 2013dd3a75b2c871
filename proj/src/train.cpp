#include "aad/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "aad/adam.hpp"

namespace aad {

Tensor4 windows_to_tensor(const std::vector<Window>& windows, const std::vector<int>& idx) {
    if (idx.empty()) throw ParamError("windows_to_tensor: empty selection");
    const auto& first = windows[static_cast<std::size_t>(idx.front())].samples;
    Tensor4 x(static_cast<Eigen::Index>(idx.size()), 1, first.rows(), first.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const Matrix& m = windows[static_cast<std::size_t>(idx[i])].samples;
        if (m.rows() != first.rows() || m.cols() != first.cols())
            throw ShapeError("windows_to_tensor: inconsistent window shape");
        x.plane(static_cast<Eigen::Index>(i), 0) = m;
    }
    return x;
}

std::vector<int> window_labels(const std::vector<Window>& windows, const std::vector<int>& idx,
                               Task task) {
    std::vector<int> labels(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        labels[i] = window_label(windows[static_cast<std::size_t>(idx[i])], task);
    return labels;
}

namespace {

constexpr std::uint64_t kSaltShuffle = 0x7368756646ULL;
constexpr std::uint64_t kSaltDropout = 0x64726f70ULL;
constexpr Eigen::Index kEvalBatch = 128;

}  // namespace

Vector eval_scores(ModelParams& params, const std::vector<Window>& windows,
                   const std::vector<int>& idx) {
    Vector scores(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t at = 0; at < idx.size(); at += kEvalBatch) {
        const std::size_t take = std::min<std::size_t>(kEvalBatch, idx.size() - at);
        std::vector<int> part(idx.begin() + static_cast<std::ptrdiff_t>(at),
                              idx.begin() + static_cast<std::ptrdiff_t>(at + take));
        Tensor4 x = windows_to_tensor(windows, part);
        Vector s = predict_scores(params, x);
        scores.segment(static_cast<Eigen::Index>(at), static_cast<Eigen::Index>(take)) = s;
    }
    return scores;
}

double eval_accuracy(ModelParams& params, const std::vector<Window>& windows,
                     const std::vector<int>& idx, Task task) {
    if (idx.empty()) throw ParamError("eval_accuracy: empty selection");
    const Vector scores = eval_scores(params, windows, idx);
    const std::vector<int> labels = window_labels(windows, idx, task);
    long correct = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        const int pred = scores[i] >= 0.5 ? 1 : 0;
        if (pred == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

TrainResult train(ModelParams& params, const std::vector<Window>& windows,
                  const std::vector<int>& train_idx, const std::vector<int>& val_idx, Task task,
                  const TrainConfig& cfg) {
    if (train_idx.empty()) throw ParamError("train: empty training set");
    if (cfg.batch < 1 || cfg.epochs < 0) throw ParamError("train: bad batch/epoch settings");
    {
        std::vector<bool> in_train(windows.size(), false);
        for (int i : train_idx) in_train[static_cast<std::size_t>(i)] = true;
        for (int i : val_idx)
            if (in_train[static_cast<std::size_t>(i)])
                throw ParamError("train: train and validation sets overlap at index " +
                                 std::to_string(i));
    }

    AdamHyper hyper{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay};
    AdamHyper hyper_nodecay = hyper;
    hyper_nodecay.weight_decay = 0.0;
    std::map<std::uint16_t, AdamMoments> moments;
    for (const ParamRef& p : param_refs(params))
        moments.emplace(p.id, AdamMoments::zeros(p.size));

    Rng shuffle_rng(derive_seed(cfg.seed, kSaltShuffle));
    Rng dropout_rng(derive_seed(cfg.seed, kSaltDropout));

    TrainResult result;
    ModelParams best;
    long step = 0;
    std::vector<int> order = train_idx;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t take =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch), order.size() - at);
            std::vector<int> batch_idx(order.begin() + static_cast<std::ptrdiff_t>(at),
                                       order.begin() + static_cast<std::ptrdiff_t>(at + take));
            Tensor4 x = windows_to_tensor(windows, batch_idx);
            std::vector<int> labels = window_labels(windows, batch_idx, task);

            ForwardCache cache;
            Matrix logits = forward(params, x, Mode::Train, dropout_rng, &cache);
            SoftmaxXent sx = softmax_xent(logits, labels);
            if (!std::isfinite(sx.loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " +
                                   std::to_string(at / static_cast<std::size_t>(cfg.batch)));
            loss_sum += sx.loss * static_cast<double>(take);

            ModelGrads grads = backward(params, cache, sx.d_logits, /*need_input_grad=*/false);
            ++step;
            auto prefs = param_refs(params);
            auto grefs = grad_refs(grads, params);
            for (std::size_t i = 0; i < prefs.size(); ++i) {
                Eigen::Map<ArrayX> pv(prefs[i].data, prefs[i].size);
                Eigen::Map<const ArrayX> gv(grefs[i].data, grefs[i].size);
                adam_step(pv, gv, moments.at(prefs[i].id), step,
                          prefs[i].decay ? hyper : hyper_nodecay, prefs[i].name);
            }
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(order.size());
        if (!val_idx.empty()) {
            stats.val_acc = eval_accuracy(params, windows, val_idx, task);
            if (result.best_epoch < 0 || stats.val_acc > result.best_val_acc) {
                result.best_epoch = epoch;
                result.best_val_acc = stats.val_acc;
                best = params;
            }
        }
        result.history.push_back(stats);
    }
    if (!val_idx.empty() && result.best_epoch >= 0) params = best;
    return result;
}

TrainConfig grid_search(const std::vector<Window>& windows, const FoldPlan& plan, int outer_fold,
                        Task task, const ModelConfig& model_cfg, const TrainConfig& base,
                        const HyperGrid& grid, double* best_mean_acc) {
    if (grid.lr.empty() || grid.batch.empty() || grid.epochs.empty() || grid.weight_decay.empty())
        throw ParamError("grid_search: empty grid");

    const auto& inner = plan.inner[static_cast<std::size_t>(outer_fold)];
    const std::vector<int> outer_train = plan.outer_train(outer_fold);

    TrainConfig best_cfg = base;
    double best_acc = -1.0;
    int point = 0;
    for (double lr : grid.lr)
        for (int batch : grid.batch)
            for (int epochs : grid.epochs)
                for (double wd : grid.weight_decay) {
                    TrainConfig cand = base;
                    cand.lr = lr;
                    cand.batch = batch;
                    cand.epochs = epochs;
                    cand.weight_decay = wd;

                    TrainConfig run_cfg = cand;
                    if (base.cap_grid_epochs) run_cfg.epochs = std::min(50, epochs);

                    double acc_sum = 0.0;
                    for (int i = 0; i < kFoldCount; ++i) {
                        const auto& val = inner[static_cast<std::size_t>(i)];
                        std::vector<bool> in_val(windows.size(), false);
                        for (int idx : val) in_val[static_cast<std::size_t>(idx)] = true;
                        std::vector<int> tr;
                        for (int idx : outer_train)
                            if (!in_val[static_cast<std::size_t>(idx)]) tr.push_back(idx);

                        run_cfg.seed = derive_seed(base.seed, 0x67726964ULL,
                                                   static_cast<std::uint64_t>(point),
                                                   static_cast<std::uint64_t>(i));
                        Rng init_rng(derive_seed(run_cfg.seed, 0x696e6974ULL));
                        ModelParams params = init_model(model_cfg, init_rng);
                        TrainResult r = train(params, windows, tr, val, task, run_cfg);
                        acc_sum += r.best_val_acc;
                    }
                    const double mean_acc = acc_sum / kFoldCount;
                    if (mean_acc > best_acc) {
                        best_acc = mean_acc;
                        best_cfg = cand;
                    }
                    ++point;
                }
    if (best_mean_acc) *best_mean_acc = best_acc;
    return best_cfg;
}

}  // namespace aad
