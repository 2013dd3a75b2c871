#include "aad/preprocess.hpp"

#include <cmath>

#include "aad/dsp.hpp"

namespace aad {

void TrialRecord::validate() const {
    if (fs <= 0.0) throw ParamError("trial: fs must be positive");
    if (channels() < 1) throw ParamError("trial: needs at least one channel");
    if (static_cast<double>(length()) < fs)
        throw ParamError("trial: shorter than one second (" + std::to_string(length()) +
                         " samples at fs " + std::to_string(fs) + ")");
    if ((label_oa != 0 && label_oa != 1) || (label_ta != 0 && label_ta != 1))
        throw ParamError("trial: labels must be 0 or 1");
}

int default_fir_taps(double fs) {
    int t = static_cast<int>(std::lround(4000.0 * fs / 500.0));
    if (t % 2 == 0) ++t;
    return t;
}

Vector design_fir(const FirSpec& spec, double fs) {
    if (!(spec.low_hz > 0.0 && spec.low_hz < spec.high_hz && spec.high_hz < fs / 2.0))
        throw ParamError("fir: band edges must satisfy 0 < low < high < fs/2");
    if (spec.taps < 3 || spec.taps % 2 == 0) throw ParamError("fir: taps must be odd and >= 3");

    const int n = spec.taps;
    const int center = (n - 1) / 2;
    const double pi = 3.14159265358979323846264338327950288;
    const double w_lo = 2.0 * pi * spec.low_hz / fs;
    const double w_hi = 2.0 * pi * spec.high_hz / fs;

    // each low-pass is normalized to exact unit DC gain so the band-pass
    // difference has zero coefficient sum (the 0.4 Hz edge sits inside the
    // window transition width, which would otherwise leak ~1e-3 at DC)
    Vector lp_hi(n), lp_lo(n);
    for (int i = 0; i <= center; ++i) {
        const int m = i - center;
        double sinc_hi, sinc_lo;
        if (m == 0) {
            sinc_hi = w_hi / pi;
            sinc_lo = w_lo / pi;
        } else {
            sinc_hi = std::sin(w_hi * m) / (pi * m);
            sinc_lo = std::sin(w_lo * m) / (pi * m);
        }
        const double window = 0.54 - 0.46 * std::cos(2.0 * pi * i / (n - 1));
        lp_hi[i] = lp_hi[n - 1 - i] = sinc_hi * window;  // mirror: exact symmetry
        lp_lo[i] = lp_lo[n - 1 - i] = sinc_lo * window;
    }
    lp_hi /= lp_hi.sum();
    lp_lo /= lp_lo.sum();
    return lp_hi - lp_lo;
}

Matrix filter_rows(const Matrix& samples, const Vector& coeffs) {
    const Eigen::Index n = samples.cols();
    const Eigen::Index taps = coeffs.size();
    if (n <= taps)
        throw ParamError("filter: signal of " + std::to_string(n) +
                         " samples is not longer than the " + std::to_string(taps) + "-tap filter");
    const Eigen::Index pad = (taps - 1) / 2;

    auto reflect = [n](Eigen::Index j) {
        while (j < 0 || j >= n) {
            if (j < 0) j = -j;
            if (j >= n) j = 2 * (n - 1) - j;
        }
        return j;
    };

    Matrix out(samples.rows(), n);
    Vector extended(n + 2 * pad);
    for (Eigen::Index ch = 0; ch < samples.rows(); ++ch) {
        for (Eigen::Index j = 0; j < extended.size(); ++j)
            extended[j] = samples(ch, reflect(j - pad));
        Vector full = fft_convolve(extended, coeffs);
        // symmetric taps: correlation equals convolution; the valid segment
        // starts taps-1 in, which also absorbs the group delay
        out.row(ch) = full.segment(taps - 1, n).transpose();
    }
    return out;
}

TrialRecord filter_trial(const TrialRecord& trial, const Vector& coeffs) {
    TrialRecord out = trial;
    out.samples = filter_rows(trial.samples, coeffs);
    return out;
}

TrialRecord average_reference(const TrialRecord& trial) {
    if (trial.channels() < 2) throw ParamError("average_reference: needs at least 2 channels");
    TrialRecord out = trial;
    out.samples.rowwise() -= trial.samples.colwise().mean();
    return out;
}

TrialRecord artifact_stage(const TrialRecord& trial, std::vector<std::string>* stage_log) {
    if (stage_log) stage_log->push_back("artifact: ICA skipped (pass-through)");
    return trial;
}

WindowSet segment(const TrialRecord& trial, double window_s, double stride_s) {
    if (stride_s <= 0.0) throw ParamError("segment: stride must be positive");
    const Eigen::Index t = static_cast<Eigen::Index>(std::llround(window_s * trial.fs));
    const Eigen::Index stride = static_cast<Eigen::Index>(std::llround(stride_s * trial.fs));
    if (t < 1) throw ParamError("segment: window shorter than one sample");
    if (stride < 1) throw ParamError("segment: stride shorter than one sample");

    WindowSet set;
    set.window_len = t;
    set.stride = stride;
    for (Eigen::Index off = 0; off + t <= trial.length(); off += stride) {
        Window w;
        w.samples = trial.samples.middleCols(off, t);
        w.label_oa = trial.label_oa;
        w.label_ta = trial.label_ta;
        w.subject_id = trial.subject_id;
        w.trial_id = trial.trial_id;
        w.offset = off;
        set.windows.push_back(std::move(w));
    }
    return set;
}

TrialRecord preprocess_trial(const TrialRecord& trial, const Vector& coeffs,
                             std::vector<std::string>* stage_log) {
    TrialRecord filtered = filter_trial(trial, coeffs);
    if (stage_log) stage_log->push_back("filter: fir bandpass, " + std::to_string(coeffs.size()) + " taps");
    TrialRecord referenced = average_reference(filtered);
    if (stage_log) stage_log->push_back("reference: common average");
    return artifact_stage(referenced, stage_log);
}

Task parse_task(const std::string& name) {
    if (name == "oa" || name == "OA") return Task::OA;
    if (name == "ta" || name == "TA") return Task::TA;
    throw ParamError("unknown task: " + name + " (expected oa or ta)");
}

const char* task_name(Task task) { return task == Task::OA ? "oa" : "ta"; }

int window_label(const Window& w, Task task) {
    return task == Task::OA ? w.label_oa : w.label_ta;
}

}  // namespace aad
