#include "aad/synth.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

#include "aad/dsp.hpp"
#include "aad/rng.hpp"

namespace aad {

void SynthSpec::validate() const {
    if (n_subjects < 1 || trials_per_subject < 1) throw ParamError("synth: counts must be positive");
    if (trials_per_subject % 2 != 0)
        throw ParamError("synth: trials_per_subject must be even for balanced labels");
    if (!(fs > 0.0) || !(trial_seconds * fs >= fs)) throw ParamError("synth: trial must be >= 1 s");
    if (n_channels < 2) throw ParamError("synth: needs at least 2 channels");
    if (!std::isfinite(snr_db)) throw ParamError("synth: snr_db must be finite");
    if (spatial_gain < 0.0 || spatial_gain > 1.0) throw ParamError("synth: gain in [0, 1]");
    if (!(male_band_lo > 0.0 && male_band_lo < male_band_hi && male_band_hi < fs / 2.0) ||
        !(female_band_lo > 0.0 && female_band_lo < female_band_hi && female_band_hi < fs / 2.0))
        throw ParamError("synth: source bands must lie in (0, fs/2)");
}

namespace {

// (label_oa, label_ta) cycle keeping both tasks balanced every 4 trials.
constexpr int kLabelCycle[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};

// 1/f-shaped noise: white Gaussian spectrum-masked with 1/sqrt(f), zero DC.
Vector pink_noise(Eigen::Index n, double fs, Rng& rng) {
    const std::size_t m = next_pow2(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> spec(m);
    for (std::size_t i = 0; i < m; ++i) spec[i] = rng.normal();
    fft(spec, false);
    spec[0] = 0.0;
    for (std::size_t k = 1; k <= m / 2; ++k) {
        const double f = static_cast<double>(k) * fs / static_cast<double>(m);
        const double mask = 1.0 / std::sqrt(f);
        spec[k] *= mask;
        if (k < m / 2) spec[m - k] *= mask;
    }
    fft(spec, true);
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = spec[static_cast<std::size_t>(i)].real();
    // unit variance so SNR scaling starts from a known power
    const double var = (out.array() - out.mean()).square().mean();
    out /= std::sqrt(var);
    return out;
}

// Constant-envelope tone whose instantaneous frequency glides between
// uniform draws inside [lo, hi]; every decision window carries the same
// source power (a random-phase sinusoid sum has envelope dips that make
// individual windows undecodable).
Vector sinusoid_source(Eigen::Index n, double fs, double lo, double hi, Rng& rng) {
    const double two_pi = 6.283185307179586476925286766559;
    const Eigen::Index segment = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(fs / 4));
    Vector s(n);
    double phase = rng.uniform(0.0, two_pi);
    double f_prev = rng.uniform(lo, hi);
    double f_next = rng.uniform(lo, hi);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index pos = i % segment;
        if (pos == 0 && i > 0) {
            f_prev = f_next;
            f_next = rng.uniform(lo, hi);
        }
        const double blend = static_cast<double>(pos) / static_cast<double>(segment);
        const double freq = f_prev + (f_next - f_prev) * blend;
        phase += two_pi * freq / fs;
        s[i] = std::sin(phase);
    }
    return s;
}

}  // namespace

TrialRecord synth_trial(const SynthSpec& spec, int subject_idx, int trial_idx,
                        double* snr_achieved) {
    spec.validate();
    const int global_idx = subject_idx * spec.trials_per_subject + trial_idx;
    Rng rng(derive_seed(spec.seed, 0x74726961ULL, static_cast<std::uint64_t>(global_idx)));

    const Eigen::Index n = static_cast<Eigen::Index>(std::llround(spec.trial_seconds * spec.fs));
    const Eigen::Index c = spec.n_channels;
    const int label_oa = kLabelCycle[trial_idx % 4][0];
    const int label_ta = kLabelCycle[trial_idx % 4][1];

    constexpr double kBaseAmplitudeUv = 10.0;  // cosmetic microvolt scale
    Matrix noise(c, n);
    for (Eigen::Index ch = 0; ch < c; ++ch)
        noise.row(ch) = kBaseAmplitudeUv * pink_noise(n, spec.fs, rng).transpose();

    const double lo = label_ta == 0 ? spec.male_band_lo : spec.female_band_lo;
    const double hi = label_ta == 0 ? spec.male_band_hi : spec.female_band_hi;
    Vector source = sinusoid_source(n, spec.fs, lo, hi, rng);

    // The attended half receives a concentrated exponential boost; the other
    // half stays at unit gain. A flat (1+g)/(1-g) split does not survive
    // common-average referencing: the two class patterns become exact
    // negations and the random-phase source makes the classes identically
    // distributed. The concentrated taper keeps the mirrored post-reference
    // patterns nearly orthogonal, so the lateralization stays decodable.
    const double g = spec.spatial_gain;
    const Eigen::Index half = c / 2;
    Vector gains = Vector::Ones(c);
    for (Eigen::Index i = 0; i < half; ++i) {
        const double taper = std::pow(2.0, -static_cast<double>(i));
        const Eigen::Index ch = label_oa == 0 ? i : c - 1 - i;
        gains[ch] = 1.0 + g * taper;
    }

    const double source_var = (source.array() - source.mean()).square().mean();
    const double mean_gain_sq = gains.array().square().mean();
    double noise_power = 0.0;
    for (Eigen::Index ch = 0; ch < c; ++ch)
        noise_power += (noise.row(ch).array() - noise.row(ch).mean()).square().mean();
    noise_power /= static_cast<double>(c);

    // scale the source so mean signal power / mean noise power hits snr_db
    const double target = noise_power * std::pow(10.0, spec.snr_db / 10.0);
    const double alpha = std::sqrt(target / (source_var * mean_gain_sq));

    TrialRecord t;
    t.subject_id = "S" + std::string(subject_idx + 1 < 10 ? "0" : "") + std::to_string(subject_idx + 1);
    t.trial_id = trial_idx;
    t.fs = spec.fs;
    t.label_oa = label_oa;
    t.label_ta = label_ta;
    t.samples = noise;
    for (Eigen::Index ch = 0; ch < c; ++ch)
        t.samples.row(ch) += (alpha * gains[ch]) * source.transpose();

    if (snr_achieved) {
        double sig_power = 0.0;
        for (Eigen::Index ch = 0; ch < c; ++ch) {
            const Vector s = (alpha * gains[ch]) * source;
            sig_power += (s.array() - s.mean()).square().mean();
        }
        sig_power /= static_cast<double>(c);
        *snr_achieved = 10.0 * std::log10(sig_power / noise_power);
    }
    return t;
}

SynthResult generate_synthetic(const SynthSpec& spec, const std::string& out_dir) {
    spec.validate();
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);

    SynthResult result;
    result.manifest.version = 1;
    result.manifest.fs = spec.fs;
    result.manifest.n_channels = spec.n_channels;
    result.manifest.task = "both";
    result.manifest.has_seed = true;
    result.manifest.generator_seed = spec.seed;
    result.manifest_path = out_dir + "/manifest.txt";

    for (int s = 0; s < spec.n_subjects; ++s) {
        DatasetManifest::Subject subj;
        subj.subject_id = "S" + std::string(s + 1 < 10 ? "0" : "") + std::to_string(s + 1);
        fs::create_directories(out_dir + "/" + subj.subject_id, ec);
        for (int k = 0; k < spec.trials_per_subject; ++k) {
            char name[64];
            std::snprintf(name, sizeof(name), "%s/trial_%03d.aadb", subj.subject_id.c_str(), k);
            subj.trial_files.emplace_back(name);
        }
        result.manifest.subjects.push_back(std::move(subj));
    }
    // manifest first so an interrupted run leaves a parseable record
    write_manifest(result.manifest, result.manifest_path);

    for (int s = 0; s < spec.n_subjects; ++s)
        for (int k = 0; k < spec.trials_per_subject; ++k) {
            double snr = 0.0;
            TrialRecord t = synth_trial(spec, s, k, &snr);
            const std::string rel = result.manifest.subjects[static_cast<std::size_t>(s)]
                                        .trial_files[static_cast<std::size_t>(k)];
            const std::string path = out_dir + "/" + rel;
            save_trial(t, path);
            result.diags.push_back({rel, snr});
            result.total_bytes += fs::file_size(path);
        }
    return result;
}

}  // namespace aad
