#pragma once

#include <map>
#include <string>
#include <vector>

#include "aad/preprocess.hpp"

namespace aad {

// Binary trial container, magic "AADB": u32 version, f32 fs, u32 C, u32 N,
// u8 label_oa, u8 label_ta, u16 subject-id length + UTF-8 bytes, u32 trial_id,
// then C*N little-endian float32 samples, channel-major.
void save_trial(const TrialRecord& trial, const std::string& path);
TrialRecord load_trial(const std::string& path);

// Header-only load (no payload); used for cheap label counting.
TrialRecord load_trial_header(const std::string& path);

struct DatasetManifest {
    int version = 1;
    double fs = 0.0;
    int n_channels = 0;
    std::string task = "both";
    bool has_seed = false;
    std::uint64_t generator_seed = 0;

    struct Subject {
        std::string subject_id;
        std::vector<std::string> trial_files;  // relative to the manifest
    };
    std::vector<Subject> subjects;
};

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

// Loads every trial of the manifest, grouped per subject in manifest order.
struct SubjectTrials {
    std::string subject_id;
    std::vector<TrialRecord> trials;
};
std::vector<SubjectTrials> load_dataset(const DatasetManifest& manifest,
                                        const std::string& manifest_path);

struct ClassCounts {
    int count0 = 0;
    int count1 = 0;
    int delta() const { return count0 > count1 ? count0 - count1 : count1 - count0; }
};

struct BalanceReport {
    // per subject, per task
    std::map<std::string, ClassCounts> oa;
    std::map<std::string, ClassCounts> ta;
    bool balanced = true;
    int max_delta = 0;
};

// Per-class, per-subject trial counts; flags any imbalance.
BalanceReport class_balance(const DatasetManifest& manifest, const std::string& manifest_path);

std::string dir_of(const std::string& path);

}  // namespace aad
