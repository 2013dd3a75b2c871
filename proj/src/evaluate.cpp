#include "aad/evaluate.hpp"

#include <cmath>
#include <mutex>

#include "aad/parallel.hpp"

namespace aad {

ModelKind parse_model_kind(const std::string& name) {
    if (name == "aadnet") return ModelKind::AadNet;
    if (name == "fbcsp") return ModelKind::Fbcsp;
    if (name == "pca") return ModelKind::Pca;
    throw ParamError("unknown model: " + name + " (expected aadnet, fbcsp or pca)");
}

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::AadNet: return "aadnet";
        case ModelKind::Fbcsp: return "fbcsp";
        case ModelKind::Pca: return "pca";
    }
    return "?";
}

namespace {

constexpr std::uint64_t kSaltFoldPlan = 0x706c616eULL;
constexpr std::uint64_t kSaltInit = 0x696e6974ULL;
constexpr std::uint64_t kSaltTrain = 0x747261696eULL;
constexpr std::uint64_t kSaltBaseline = 0x62617365ULL;
constexpr std::uint64_t kSaltGrid = 0x67726964ULL;

struct UnitOutcome {
    std::vector<int> test_idx;
    std::vector<int> preds;
    std::vector<int> labels;
    std::vector<double> scores;
    TrainConfig selected_cfg;
    bool has_selected_cfg = false;
    std::shared_ptr<ModelParams> captured_model;
    std::shared_ptr<BaselinePipeline> captured_baseline;
    std::vector<std::string> warnings;
};

UnitOutcome run_unit(const std::vector<Window>& windows, const FoldPlan& plan, int fold,
                     std::size_t subject_idx, const EvalOptions& opts) {
    UnitOutcome out;
    out.test_idx = plan.outer[static_cast<std::size_t>(fold)];
    const std::vector<int> train_idx = plan.outer_train(fold);
    const std::uint64_t s = static_cast<std::uint64_t>(subject_idx);
    const std::uint64_t f = static_cast<std::uint64_t>(fold);

    out.labels = window_labels(windows, out.test_idx, opts.task);
    if (opts.kind == ModelKind::AadNet) {
        TrainConfig cfg = opts.train_cfg;
        if (opts.use_grid) {
            TrainConfig base = opts.train_cfg;
            base.seed = derive_seed(opts.seed, s, f, kSaltGrid);
            cfg = grid_search(windows, plan, fold, opts.task, opts.model_cfg, base, opts.grid);
            out.has_selected_cfg = true;
            out.selected_cfg = cfg;
        }
        cfg.seed = derive_seed(opts.seed, s, f, kSaltTrain);
        Rng init_rng(derive_seed(opts.seed, s, f, kSaltInit));
        ModelParams params = init_model(opts.model_cfg, init_rng);
        train(params, windows, train_idx, {}, opts.task, cfg);
        const Vector scores = eval_scores(params, windows, out.test_idx);
        out.scores.assign(scores.data(), scores.data() + scores.size());
        out.preds.resize(out.test_idx.size());
        for (std::size_t i = 0; i < out.test_idx.size(); ++i)
            out.preds[i] = out.scores[i] >= 0.5 ? 1 : 0;
        if (opts.capture_model && subject_idx == 0 && fold == 0)
            out.captured_model = std::make_shared<ModelParams>(std::move(params));
    } else {
        BaselinePipeline pipeline =
            fit_baseline(model_kind_name(opts.kind), windows, train_idx, opts.task,
                         opts.baseline_cfg, opts.fs, derive_seed(opts.seed, s, f, kSaltBaseline),
                         &out.warnings);
        out.preds.resize(out.test_idx.size());
        out.scores.resize(out.test_idx.size());
        for (std::size_t i = 0; i < out.test_idx.size(); ++i) {
            const Window& w = windows[static_cast<std::size_t>(out.test_idx[i])];
            out.scores[i] = pipeline.score(w.samples);
            out.preds[i] = out.scores[i] >= 0.0 ? 1 : 0;
        }
        if (opts.capture_model && subject_idx == 0 && fold == 0)
            out.captured_baseline = std::make_shared<BaselinePipeline>(std::move(pipeline));
    }
    return out;
}

void aggregate(const std::vector<double>& values, double& mean, double& sd) {
    const std::size_t n = values.size();
    mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    sd = 0.0;
    if (n > 1) {
        for (double v : values) sd += (v - mean) * (v - mean);
        sd = std::sqrt(sd / static_cast<double>(n - 1));
    }
}

}  // namespace

EvalReport evaluate_outer(const std::vector<SubjectWindows>& subjects, const EvalOptions& opts) {
    if (subjects.empty()) throw ParamError("evaluate_outer: no subjects");
    EvalReport report;
    report.model = model_kind_name(opts.kind);
    report.variant = opts.variant;
    report.task = opts.task;
    report.window_s = opts.window_s;

    // fold plans are cheap and deterministic; build them up front
    std::vector<FoldPlan> plans;
    plans.reserve(subjects.size());
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        std::vector<int> all(subjects[s].windows.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        plans.push_back(make_folds(window_labels(subjects[s].windows, all, opts.task),
                                   derive_seed(opts.seed, static_cast<std::uint64_t>(s),
                                               kSaltFoldPlan)));
    }

    const int n_units = static_cast<int>(subjects.size()) * kFoldCount;
    std::vector<UnitOutcome> outcomes(static_cast<std::size_t>(n_units));
    run_parallel(n_units, opts.jobs, [&](int unit) {
        const std::size_t s = static_cast<std::size_t>(unit) / kFoldCount;
        const int fold = unit % kFoldCount;
        outcomes[static_cast<std::size_t>(unit)] =
            run_unit(subjects[s].windows, plans[s], fold, s, opts);
    });

    std::vector<double> accs, f1s, pres, sens, spes, aucs;
    std::vector<double> pooled_scores;
    std::vector<int> pooled_labels;
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        SubjectResult sr;
        sr.subject_id = subjects[s].subject_id;
        sr.fold_hash = plans[s].hash();
        std::vector<double> subj_scores;
        std::vector<int> subj_labels;
        for (int fold = 0; fold < kFoldCount; ++fold) {
            const UnitOutcome& u = outcomes[s * kFoldCount + static_cast<std::size_t>(fold)];
            for (std::size_t i = 0; i < u.test_idx.size(); ++i) {
                sr.counts.add(u.preds[i], u.labels[i]);
                subj_scores.push_back(u.scores[i]);
                subj_labels.push_back(u.labels[i]);
            }
            if (u.has_selected_cfg) sr.selected_cfgs.push_back(u.selected_cfg);
            for (const auto& w : u.warnings) report.warnings.push_back(w);
            if (u.captured_model) report.captured_model = u.captured_model;
            if (u.captured_baseline) report.captured_baseline = u.captured_baseline;
        }
        sr.metrics = compute_metrics(sr.counts);
        Vector sv(static_cast<Eigen::Index>(subj_scores.size()));
        for (std::size_t i = 0; i < subj_scores.size(); ++i)
            sv[static_cast<Eigen::Index>(i)] = subj_scores[i];
        sr.roc = roc(sv, subj_labels);

        accs.push_back(sr.metrics.acc);
        f1s.push_back(sr.metrics.f1);
        pres.push_back(sr.metrics.pre);
        sens.push_back(sr.metrics.sen);
        spes.push_back(sr.metrics.spe);
        aucs.push_back(sr.roc.auc);
        pooled_scores.insert(pooled_scores.end(), subj_scores.begin(), subj_scores.end());
        pooled_labels.insert(pooled_labels.end(), subj_labels.begin(), subj_labels.end());
        report.subjects.push_back(std::move(sr));
    }

    aggregate(accs, report.mean.acc, report.sd.acc);
    aggregate(f1s, report.mean.f1, report.sd.f1);
    aggregate(pres, report.mean.pre, report.sd.pre);
    aggregate(sens, report.mean.sen, report.sd.sen);
    aggregate(spes, report.mean.spe, report.sd.spe);
    aggregate(aucs, report.auc_mean, report.auc_sd);

    Vector ps(static_cast<Eigen::Index>(pooled_scores.size()));
    for (std::size_t i = 0; i < pooled_scores.size(); ++i)
        ps[static_cast<Eigen::Index>(i)] = pooled_scores[i];
    report.pooled = roc(ps, pooled_labels);
    return report;
}

AblationReport run_ablation(const std::vector<SubjectWindows>& subjects, const EvalOptions& base) {
    if (base.kind != ModelKind::AadNet)
        throw ParamError("run_ablation: ablations apply to the aadnet model");
    AblationReport out;
    EvalOptions opts = base;
    opts.variant = "base";
    out.reports.push_back(evaluate_outer(subjects, opts));

    const std::pair<AblationVariant, const char*> variants[] = {
        {AblationVariant::M1, "m1"}, {AblationVariant::M2, "m2"}, {AblationVariant::M3, "m3"}};
    for (const auto& [variant, name] : variants) {
        EvalOptions v = base;
        v.variant = name;
        v.model_cfg = ablation_config(base.model_cfg, variant);
        out.reports.push_back(evaluate_outer(subjects, v));
    }

    // identical seeds must give identical fold plans across variants
    for (std::size_t r = 1; r < out.reports.size(); ++r)
        for (std::size_t s = 0; s < out.reports[r].subjects.size(); ++s)
            if (out.reports[r].subjects[s].fold_hash != out.reports[0].subjects[s].fold_hash)
                throw StateError("run_ablation: fold plan hash diverged for subject " +
                                 out.reports[r].subjects[s].subject_id);
    return out;
}

std::vector<EmbedPoint> export_embedding(ModelParams& params, const std::vector<Window>& windows,
                                         Task task) {
    if (windows.empty()) throw ParamError("export_embedding: no windows");
    const Eigen::Index n = static_cast<Eigen::Index>(windows.size());
    Matrix markers(n, params.config.hidden);
    Rng rng(0);
    constexpr Eigen::Index kBatch = 128;
    for (Eigen::Index at = 0; at < n; at += kBatch) {
        const Eigen::Index take = std::min<Eigen::Index>(kBatch, n - at);
        std::vector<int> idx(static_cast<std::size_t>(take));
        for (Eigen::Index i = 0; i < take; ++i) idx[static_cast<std::size_t>(i)] = static_cast<int>(at + i);
        Tensor4 x = windows_to_tensor(windows, idx);
        ForwardCache cache;
        forward(params, x, Mode::Infer, rng, &cache);
        markers.middleRows(at, take) = cache.hidden;
    }

    PcaModel pca = fit_pca(markers, 2);
    Matrix projected = pca_project(pca, markers);
    std::vector<EmbedPoint> points(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        points[static_cast<std::size_t>(i)] = {projected(i, 0), projected(i, 1),
                                               window_label(windows[static_cast<std::size_t>(i)], task)};
    }
    return points;
}

std::vector<SubjectWindows> build_windows(const std::vector<SubjectTrials>& dataset,
                                          const FirSpec& fir, double window_s, double stride_s,
                                          std::vector<std::string>* stage_log) {
    if (dataset.empty()) throw ParamError("build_windows: empty dataset");
    const double fs = dataset.front().trials.front().fs;
    Vector coeffs = design_fir(fir, fs);
    std::vector<SubjectWindows> out;
    bool logged = false;
    for (const auto& subject : dataset) {
        SubjectWindows sw;
        sw.subject_id = subject.subject_id;
        for (const auto& trial : subject.trials) {
            TrialRecord pre = preprocess_trial(trial, coeffs, logged ? nullptr : stage_log);
            WindowSet set = segment(pre, window_s, stride_s);
            if (!logged && stage_log)
                stage_log->push_back("segment: window " + std::to_string(window_s) + " s, stride " +
                                     std::to_string(stride_s) + " s");
            logged = true;
            for (auto& w : set.windows) sw.windows.push_back(std::move(w));
        }
        out.push_back(std::move(sw));
    }
    return out;
}

}  // namespace aad
