// Command-line entry point: dataset synthesis, evaluation runs, gradient
// checks and embedding export. Exit codes: 0 success, 1 runtime failure,
// 2 usage/validation error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "aad/common.hpp"
#include "aad/evaluate.hpp"
#include "aad/gradcheck.hpp"
#include "aad/model_io.hpp"
#include "aad/reports.hpp"
#include "aad/synth.hpp"

namespace fs = std::filesystem;
using namespace aad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Run manifest: configuration is flushed before execution, stage/fold
// sections are appended as they become known; a crash leaves the manifest
// plus a FAILED marker file. Content is byte-deterministic (no timestamps).
class RunManifest {
public:
    RunManifest(const std::string& out_dir, const std::string& command)
        : dir_(out_dir), os_(out_dir + "/manifest.txt") {
        if (!os_) throw IoError("cannot write manifest under " + out_dir);
        os_ << "command " << command << "\n";
        std::error_code ec;
        fs::remove(dir_ + "/FAILED", ec);
    }

    void kv(const std::string& key, const std::string& value) {
        os_ << key << ' ' << value << "\n";
    }
    void kv(const std::string& key, double v) { os_ << key << ' ' << v << "\n"; }
    void kv(const std::string& key, std::uint64_t v) { os_ << key << ' ' << v << "\n"; }
    void flush() { os_.flush(); }

    void fail_marker(const std::string& stage, const std::string& message) {
        std::ofstream f(dir_ + "/FAILED");
        f << stage << ": " << message << "\n";
    }

private:
    std::string dir_;
    std::ofstream os_;
};

struct CommonOpts {
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
};

int run_synth(const std::string& out_dir, const SynthSpec& spec) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    {  // probe writability before doing any work
        std::ofstream probe(out_dir + "/manifest.txt");
        if (!probe) {
            log_error("output directory not writable: " + out_dir);
            return kExitUsage;
        }
    }
    SynthResult result = generate_synthetic(spec, out_dir);
    const std::size_t n_trials = static_cast<std::size_t>(spec.n_subjects) *
                                 static_cast<std::size_t>(spec.trials_per_subject);
    std::printf("dataset: %d subjects x %d trials = %zu files, %llu bytes\n", spec.n_subjects,
                spec.trials_per_subject, n_trials,
                static_cast<unsigned long long>(result.total_bytes));
    std::printf("manifest: %s\n", result.manifest_path.c_str());
    return kExitOk;
}

// key/value config file; flag values override file values
void apply_config_file(const std::string& path, TrainConfig& train, BaselineConfig& baseline,
                       double& stride_s) {
    std::ifstream is(path);
    if (!is) throw ParamError("config file not readable: " + path);
    std::string key;
    while (is >> key) {
        if (key.empty() || key[0] == '#') {
            std::string rest;
            std::getline(is, rest);
            continue;
        }
        double value = 0.0;
        if (!(is >> value)) throw ParamError("config file: missing value for " + key);
        if (key == "lr") train.lr = value;
        else if (key == "batch") train.batch = static_cast<int>(value);
        else if (key == "epochs") train.epochs = static_cast<int>(value);
        else if (key == "weight_decay") train.weight_decay = value;
        else if (key == "stride_s") stride_s = value;
        else if (key == "pca_q") baseline.pca.q = static_cast<int>(value);
        else if (key == "csp_pairs") baseline.fbcsp.pairs = static_cast<int>(value);
        else if (key == "linear_lambda") baseline.linear.lambda = value;
        else if (key == "linear_epochs") baseline.linear.epochs = static_cast<int>(value);
        else throw ParamError("config file: unknown key " + key);
    }
}

void manifest_train_cfg(RunManifest& man, const TrainConfig& cfg) {
    man.kv("lr", cfg.lr);
    man.kv("batch", static_cast<std::uint64_t>(cfg.batch));
    man.kv("epochs", static_cast<std::uint64_t>(cfg.epochs));
    man.kv("weight_decay", cfg.weight_decay);
    man.kv("beta1", cfg.beta1);
    man.kv("beta2", cfg.beta2);
    man.kv("adam_eps", cfg.eps);
    man.kv("grid_epoch_cap", std::string(cfg.cap_grid_epochs ? "1" : "0"));
}

int run_evaluate(const std::string& data_dir, const std::string& out_dir, const std::string& task,
                 double window_s, const std::string& model, std::uint64_t seed, bool grid,
                 const std::string& ablate, double stride_s, const TrainConfig& train_cfg,
                 const BaselineConfig& baseline_cfg, int jobs, const std::string& save_model_path) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    RunManifest man(out_dir, "run");
    try {
        man.kv("data", data_dir);
        man.kv("task", task);
        man.kv("window_s", window_s);
        man.kv("model", model);
        man.kv("seed", seed);
        man.kv("jobs", static_cast<std::uint64_t>(jobs));
        man.kv("grid", std::string(grid ? "1" : "0"));
        if (!ablate.empty()) man.kv("ablate", ablate);
        man.kv("stride_s", stride_s > 0 ? stride_s : window_s);
        manifest_train_cfg(man, train_cfg);
        man.flush();

        DatasetManifest manifest = read_manifest(data_dir + "/manifest.txt");
        std::vector<SubjectTrials> dataset = load_dataset(manifest, data_dir + "/manifest.txt");

        EvalOptions opts;
        opts.task = parse_task(task);
        opts.window_s = window_s;
        opts.fs = manifest.fs;
        opts.kind = parse_model_kind(model);
        opts.model_cfg.n_channels = manifest.n_channels;
        opts.model_cfg.window_samples =
            static_cast<Eigen::Index>(std::llround(window_s * manifest.fs));
        opts.train_cfg = train_cfg;
        opts.use_grid = grid;
        opts.baseline_cfg = baseline_cfg;
        opts.seed = seed;
        opts.jobs = jobs;
        opts.capture_model = !save_model_path.empty();

        std::vector<std::string> stage_log;
        FirSpec fir;
        fir.taps = default_fir_taps(manifest.fs);
        const double stride = stride_s > 0 ? stride_s : window_s;
        std::vector<SubjectWindows> subjects =
            build_windows(dataset, fir, window_s, stride, &stage_log);
        for (const auto& s : stage_log) man.kv("stage", s);
        man.flush();

        std::vector<EvalReport> reports;
        if (!ablate.empty()) {
            AblationReport ar = run_ablation(subjects, opts);
            if (ablate == "all") {
                reports = ar.reports;
            } else {
                reports.push_back(ar.reports[0]);  // base kept for the controlled comparison
                for (auto& r : ar.reports)
                    if (r.variant == ablate) reports.push_back(r);
                if (reports.size() != 2) throw ParamError("unknown ablation variant: " + ablate);
            }
        } else {
            reports.push_back(evaluate_outer(subjects, opts));
        }

        for (const auto& r : reports)
            for (std::size_t s = 0; s < r.subjects.size(); ++s) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%016llx",
                              static_cast<unsigned long long>(r.subjects[s].fold_hash));
                man.kv("fold_hash " + r.variant + " " + r.subjects[s].subject_id, std::string(buf));
            }
        for (const auto& r : reports)
            for (const auto& w : r.warnings) man.kv("warning", w);
        man.flush();

        write_metrics_csv(out_dir + "/metrics.csv", reports);
        write_roc_tsv(out_dir + "/roc.tsv", reports.front());
        for (std::size_t i = 1; i < reports.size(); ++i)
            write_roc_tsv(out_dir + "/roc_" + reports[i].variant + ".tsv", reports[i]);

        if (!save_model_path.empty()) {
            if (reports.front().captured_model)
                save_model(*reports.front().captured_model, save_model_path);
            else if (reports.front().captured_baseline)
                save_baseline(*reports.front().captured_baseline, save_model_path);
            else
                throw StateError("no model captured for --save-model");
            man.kv("saved_model", save_model_path);
            man.flush();
        }

        for (const auto& r : reports)
            std::printf("%s/%s %s window %.2gs: mean ACC %.4f (SD %.4f), AUC %.4f\n",
                        r.model.c_str(), r.variant.c_str(), task_name(r.task), r.window_s,
                        r.mean.acc, r.sd.acc, r.auc_mean);
        return kExitOk;
    } catch (const std::exception& e) {
        man.fail_marker("run", e.what());
        throw;
    }
}

int run_gradcheck_cmd(std::uint64_t seed, const std::string& out_dir, bool corrupt_elu) {
    std::vector<GradCheckRow> rows = run_gradcheck(seed, corrupt_elu);
    const std::string table = gradcheck_table(rows);
    std::fputs(table.c_str(), stdout);
    if (!out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        RunManifest man(out_dir, "gradcheck");
        man.kv("seed", seed);
        man.flush();
        std::ofstream os(out_dir + "/gradcheck.txt");
        os << table;
    }
    return gradcheck_all_pass(rows) ? kExitOk : kExitRuntime;
}

int run_embed(const std::string& checkpoint, const std::string& data_dir, const std::string& task,
              const std::string& out_dir, double stride_s) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    RunManifest man(out_dir, "embed");
    try {
        man.kv("checkpoint", checkpoint);
        man.kv("data", data_dir);
        man.kv("task", task);
        man.flush();

        ModelParams params = load_model(checkpoint);
        DatasetManifest manifest = read_manifest(data_dir + "/manifest.txt");
        if (manifest.n_channels != params.config.n_channels ||
            manifest.fs != params.config.sample_rate)
            throw StateError("checkpoint/model mismatch: dataset has " +
                             std::to_string(manifest.n_channels) + " channels at fs " +
                             std::to_string(manifest.fs));
        std::vector<SubjectTrials> dataset = load_dataset(manifest, data_dir + "/manifest.txt");

        const double window_s =
            static_cast<double>(params.config.window_samples) / params.config.sample_rate;
        man.kv("window_s", window_s);
        std::vector<std::string> stage_log;
        FirSpec fir;
        fir.taps = default_fir_taps(manifest.fs);
        const double stride = stride_s > 0 ? stride_s : window_s;
        std::vector<SubjectWindows> subjects =
            build_windows(dataset, fir, window_s, stride, &stage_log);
        for (const auto& s : stage_log) man.kv("stage", s);
        man.flush();

        std::vector<Window> all;
        for (auto& sw : subjects)
            for (auto& w : sw.windows) all.push_back(std::move(w));
        std::vector<EmbedPoint> points = export_embedding(params, all, parse_task(task));
        write_embed_tsv(out_dir + "/embed.tsv", points);
        std::printf("embed: %zu points -> %s/embed.tsv\n", points.size(), out_dir.c_str());
        return kExitOk;
    } catch (const std::exception& e) {
        man.fail_marker("embed", e.what());
        throw;
    }
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
    // large tensor blocks churn through mmap otherwise
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    CLI::App app{"auditory attention decoding toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags (--jobs) may follow the subcommand

    CommonOpts common;
    app.add_option("--jobs", common.jobs, "worker threads (1 = fully serial)")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    SynthSpec spec;
    std::string synth_out;
    bool matched_bands = false;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--subjects", spec.n_subjects, "subject count")->capture_default_str();
    synth->add_option("--trials", spec.trials_per_subject, "trials per subject")
        ->capture_default_str();
    synth->add_option("--seconds", spec.trial_seconds, "trial length in seconds")
        ->capture_default_str();
    synth->add_option("--snr", spec.snr_db, "signal-to-noise ratio in dB")->capture_default_str();
    synth->add_option("--gain", spec.spatial_gain, "lateralization strength in [0,1]")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
    synth->add_option("--channels", spec.n_channels, "channel count")->capture_default_str();
    synth->add_option("--fs", spec.fs, "sampling rate")->capture_default_str();
    synth->add_flag("--matched-bands", matched_bands,
                    "use one source band for both timbre classes (null datasets)");

    // run
    auto* run = app.add_subcommand("run", "preprocess, evaluate and report");
    std::string data_dir, out_dir, task = "oa", model = "aadnet", ablate, config_file;
    std::string save_model_path;
    double window_s = 0.5, stride_s = 0.0;
    std::uint64_t seed = 0;
    bool grid = false;
    TrainConfig train_cfg;
    BaselineConfig baseline_cfg;
    run->add_option("--data", data_dir, "dataset directory (with manifest.txt)")->required();
    run->add_option("--out", out_dir, "report output directory")->required();
    run->add_option("--task", task, "oa | ta")->capture_default_str();
    run->add_option("--window", window_s, "decision window in seconds")->capture_default_str();
    run->add_option("--model", model, "aadnet | fbcsp | pca")->capture_default_str();
    run->add_option("--seed", seed, "run seed")->capture_default_str();
    run->add_flag("--grid", grid, "inner-CV hyper-parameter grid search");
    run->add_option("--ablate", ablate, "m1 | m2 | m3 | all (BN ablation variants)");
    run->add_option("--stride", stride_s, "window stride in seconds (default: window length)");
    run->add_option("--config", config_file, "key/value config file (flags override)");
    run->add_option("--epochs", train_cfg.epochs, "training epochs")->capture_default_str();
    run->add_option("--lr", train_cfg.lr, "learning rate")->capture_default_str();
    run->add_option("--batch", train_cfg.batch, "batch size")->capture_default_str();
    run->add_option("--weight-decay", train_cfg.weight_decay, "decoupled weight decay")
        ->capture_default_str();
    run->add_option("--save-model", save_model_path, "write the first trained fold model here");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::uint64_t gc_seed = 0;
    std::string gc_out;
    bool corrupt_elu = false;
    gc->add_option("--seed", gc_seed, "check seed")->capture_default_str();
    gc->add_option("--out", gc_out, "optional output directory for the table");
    gc->add_flag("--corrupt-elu", corrupt_elu)->group("");  // sensitivity fixture

    // embed
    auto* embed = app.add_subcommand("embed", "export the 2-D marker embedding");
    std::string emb_checkpoint, emb_data, emb_task = "oa", emb_out;
    double emb_stride = 0.0;
    embed->add_option("--checkpoint", emb_checkpoint, "AADM model checkpoint")->required();
    embed->add_option("--data", emb_data, "dataset directory")->required();
    embed->add_option("--task", emb_task, "oa | ta")->capture_default_str();
    embed->add_option("--out", emb_out, "output directory")->required();
    embed->add_option("--stride", emb_stride, "window stride in seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*synth) {
            if (matched_bands) {
                spec.male_band_lo = 2.0;
                spec.male_band_hi = 20.0;
                spec.female_band_lo = 2.0;
                spec.female_band_hi = 20.0;
            }
            spec.validate();
            return run_synth(synth_out, spec);
        }
        if (*run) {
            if (window_s < 0.1 || window_s > 2.0) {
                log_error("window must be in [0.1, 2.0] seconds");
                return kExitUsage;
            }
            if (!config_file.empty()) {
                // file values first, explicitly passed flags win
                const TrainConfig from_flags = train_cfg;
                const double stride_from_flags = stride_s;
                apply_config_file(config_file, train_cfg, baseline_cfg, stride_s);
                if (run->count("--epochs") > 0) train_cfg.epochs = from_flags.epochs;
                if (run->count("--lr") > 0) train_cfg.lr = from_flags.lr;
                if (run->count("--batch") > 0) train_cfg.batch = from_flags.batch;
                if (run->count("--weight-decay") > 0)
                    train_cfg.weight_decay = from_flags.weight_decay;
                if (run->count("--stride") > 0) stride_s = stride_from_flags;
            }
            parse_task(task);
            parse_model_kind(model);
            if (!ablate.empty() && ablate != "all") parse_ablation(ablate);
            return run_evaluate(data_dir, out_dir, task, window_s, model, seed, grid, ablate,
                                stride_s, train_cfg, baseline_cfg, common.jobs, save_model_path);
        }
        if (*gc) return run_gradcheck_cmd(gc_seed, gc_out, corrupt_elu);
        if (*embed) return run_embed(emb_checkpoint, emb_data, emb_task, emb_out, emb_stride);
    } catch (const ParamError& e) {
        log_error(e.what());
        return kExitUsage;
    } catch (const ConfigError& e) {
        log_error(e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        log_error(e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
