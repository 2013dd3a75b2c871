#pragma once

#include <string>
#include <vector>

#include "aad/trial_io.hpp"

namespace aad {

// Synthetic stand-in for a recorded dataset. Each trial is 1/f-shaped
// background noise plus a band-limited sinusoid source. The orientation label
// drives the spatial mix (gain 1+g on one channel half, 1-g on the other);
// the timbre label picks the source band (male low, female high). Labels are
// exactly balanced per subject and everything is seed-deterministic.
struct SynthSpec {
    int n_subjects = 16;
    int trials_per_subject = 12;
    double trial_seconds = 69.0;
    double fs = 500.0;
    int n_channels = 32;
    double snr_db = 0.0;
    double spatial_gain = 0.5;  // g in [0, 1]; 0 removes the orientation cue
    std::uint64_t seed = 0;
    // Source bands per timbre class; identical bands remove the timbre cue.
    double male_band_lo = 2.0, male_band_hi = 8.0;
    double female_band_lo = 8.0, female_band_hi = 20.0;

    void validate() const;
};

struct SynthTrialDiag {
    std::string file;
    double snr_db_achieved = 0.0;
};

struct SynthResult {
    DatasetManifest manifest;
    std::string manifest_path;
    std::vector<SynthTrialDiag> diags;
    std::uint64_t total_bytes = 0;
};

// Writes trial files and the manifest under out_dir. Deterministic given the
// spec; per-trial streams are derived from (seed, global trial index).
SynthResult generate_synthetic(const SynthSpec& spec, const std::string& out_dir);

// Single trial, exposed for targeted tests.
TrialRecord synth_trial(const SynthSpec& spec, int subject_idx, int trial_idx,
                        double* snr_achieved = nullptr);

}  // namespace aad
