#pragma once

#include <string>
#include <vector>

#include "aad/tensor.hpp"

namespace aad {

// One EEG recording: channels x samples, microvolt scale, with both task
// labels (orientation: left=0/right=1; timbre: male=0/female=1).
struct TrialRecord {
    std::string subject_id;
    int trial_id = 0;
    double fs = 0.0;
    Matrix samples;  // C x N
    int label_oa = 0;
    int label_ta = 0;

    Eigen::Index channels() const { return samples.rows(); }
    Eigen::Index length() const { return samples.cols(); }
    void validate() const;  // fs > 0, C >= 1, N >= fs, labels in {0,1}
};

// Hamming windowed-sinc band-pass design. Taps must be odd (linear phase,
// integer group delay); the default suits fs = 500.
struct FirSpec {
    double low_hz = 0.4;
    double high_hz = 32.0;
    int taps = 4001;
};

// round(4000 * fs / 500), forced odd.
int default_fir_taps(double fs);

// Difference of two low-pass sincs, Hamming windowed; coefficients are
// exactly symmetric (built half-and-mirror).
Vector design_fir(const FirSpec& spec, double fs);

// Per-row convolution with reflection padding of (taps-1)/2 on each side,
// group delay compensated; output has the input's length.
Matrix filter_rows(const Matrix& samples, const Vector& coeffs);
TrialRecord filter_trial(const TrialRecord& trial, const Vector& coeffs);

// Subtracts the cross-channel mean at every sample (common average reference).
TrialRecord average_reference(const TrialRecord& trial);

// ICA slot: identity pass-through, records a skip marker in the stage log.
TrialRecord artifact_stage(const TrialRecord& trial, std::vector<std::string>* stage_log = nullptr);

struct Window {
    Matrix samples;  // C x T
    int label_oa = 0;
    int label_ta = 0;
    std::string subject_id;
    int trial_id = 0;
    Eigen::Index offset = 0;
};

struct WindowSet {
    std::vector<Window> windows;
    Eigen::Index window_len = 0;
    Eigen::Index stride = 0;
};

// Windows at offsets 0, stride, 2*stride, ... while offset + T <= N.
// Empty set if the trial is shorter than one window.
WindowSet segment(const TrialRecord& trial, double window_s, double stride_s);

// filter -> average reference -> artifact stage, appending to the stage log.
TrialRecord preprocess_trial(const TrialRecord& trial, const Vector& coeffs,
                             std::vector<std::string>* stage_log = nullptr);

enum class Task { OA, TA };
Task parse_task(const std::string& name);  // "oa" | "ta"
const char* task_name(Task task);
int window_label(const Window& w, Task task);

}  // namespace aad
