#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "aad/rng.hpp"
#include "aad/synth.hpp"
#include "aad/trial_io.hpp"

using namespace aad;
namespace fs = std::filesystem;

namespace {

std::string scratch_dir(const std::string& name) {
    const std::string dir = (fs::temp_directory_path() / name).string();
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

TrialRecord small_trial() {
    Rng rng(21);
    TrialRecord t;
    t.subject_id = "S03";
    t.trial_id = 7;
    t.fs = 100.0;
    t.label_oa = 1;
    t.label_ta = 0;
    t.samples.resize(3, 150);
    for (Eigen::Index i = 0; i < t.samples.size(); ++i) t.samples.data()[i] = rng.normal() * 20.0;
    return t;
}

}  // namespace

TEST_CASE("trial round-trip is exact at float32 precision") {
    const std::string dir = scratch_dir("aad_trial_rt");
    TrialRecord t = small_trial();
    save_trial(t, dir + "/t.aadb");
    TrialRecord u = load_trial(dir + "/t.aadb");
    CHECK(u.subject_id == t.subject_id);
    CHECK(u.trial_id == t.trial_id);
    CHECK(u.fs == t.fs);
    CHECK(u.label_oa == t.label_oa);
    CHECK(u.label_ta == t.label_ta);
    REQUIRE(u.samples.rows() == t.samples.rows());
    REQUIRE(u.samples.cols() == t.samples.cols());
    for (Eigen::Index i = 0; i < t.samples.size(); ++i)
        CHECK(u.samples.data()[i] == static_cast<double>(static_cast<float>(t.samples.data()[i])));
    // saving the loaded trial reproduces the file byte-for-byte
    save_trial(u, dir + "/t2.aadb");
    CHECK(read_bytes(dir + "/t.aadb") == read_bytes(dir + "/t2.aadb"));
    fs::remove_all(dir);
}

TEST_CASE("trial header declares the payload size") {
    const std::string dir = scratch_dir("aad_trial_hdr");
    TrialRecord t;
    t.subject_id = "S01";
    t.trial_id = 0;
    t.fs = 500.0;
    t.label_oa = 0;
    t.label_ta = 1;
    t.samples = Matrix::Zero(32, 34500);
    save_trial(t, dir + "/big.aadb");
    const std::size_t header = 4 + 4 + 4 + 4 + 4 + 1 + 1 + 2 + 3 + 4;
    CHECK(fs::file_size(dir + "/big.aadb") == header + 4416000);  // 32*34500*4
    fs::remove_all(dir);
}

TEST_CASE("trial loader reports truncation with expected byte counts") {
    const std::string dir = scratch_dir("aad_trial_trunc");
    TrialRecord t = small_trial();
    save_trial(t, dir + "/t.aadb");
    std::string bytes = read_bytes(dir + "/t.aadb");
    {
        std::ofstream os(dir + "/cut.aadb", std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 100));
    }
    bool threw = false;
    try {
        load_trial(dir + "/cut.aadb");
    } catch (const FormatError& e) {
        threw = true;
        const std::string msg = e.what();
        CHECK(msg.find("truncated") != std::string::npos);
        CHECK(msg.find("expected") != std::string::npos);
    }
    CHECK(threw);
    {
        std::ofstream os(dir + "/pad.aadb", std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        os << "junk";
    }
    CHECK_THROWS_AS(load_trial(dir + "/pad.aadb"), FormatError);
    std::string bad = bytes;
    bad[1] = 'X';
    {
        std::ofstream os(dir + "/bad.aadb", std::ios::binary);
        os.write(bad.data(), static_cast<std::streamsize>(bad.size()));
    }
    CHECK_THROWS_AS(load_trial(dir + "/bad.aadb"), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("structural header fuzzing never crashes and is always rejected") {
    const std::string dir = scratch_dir("aad_trial_fuzz");
    TrialRecord t = small_trial();
    save_trial(t, dir + "/t.aadb");
    const std::string bytes = read_bytes(dir + "/t.aadb");
    Rng rng(4242);
    int rejected = 0;
    const int cases = 100;
    for (int i = 0; i < cases; ++i) {
        std::string mutated = bytes;
        if (i % 3 == 0) {
            mutated.resize(rng.below(mutated.size() - 1) + 1);  // truncation
        } else {
            // structural fields: magic/version (0..8), C/N (12..20), labels (20..22),
            // slen (22..24); fs (8..12) is skipped, any positive float is a legal rate
            std::size_t pos = rng.below(20);
            if (pos >= 8) pos += 4;
            const std::uint8_t flip = static_cast<std::uint8_t>(1 + rng.below(255));
            mutated[pos] = static_cast<char>(static_cast<std::uint8_t>(mutated[pos]) ^ flip);
        }
        std::ofstream os(dir + "/fz.aadb", std::ios::binary);
        os.write(mutated.data(), static_cast<std::streamsize>(mutated.size()));
        os.close();
        try {
            (void)load_trial(dir + "/fz.aadb");
        } catch (const FormatError&) {
            ++rejected;
        }
    }
    CHECK(rejected >= cases - 5);  // a flip can cancel itself via the retry above
    fs::remove_all(dir);
}

TEST_CASE("manifest round-trip and validation") {
    const std::string dir = scratch_dir("aad_manifest");
    DatasetManifest m;
    m.version = 1;
    m.fs = 500.0;
    m.n_channels = 32;
    m.task = "both";
    m.has_seed = true;
    m.generator_seed = 7;
    m.subjects.push_back({"S01", {"S01/trial_000.aadb", "S01/trial_001.aadb"}});
    m.subjects.push_back({"S02", {"S02/trial_000.aadb"}});
    write_manifest(m, dir + "/manifest.txt");
    DatasetManifest r = read_manifest(dir + "/manifest.txt");
    CHECK(r.fs == 500.0);
    CHECK(r.n_channels == 32);
    CHECK(r.generator_seed == 7);
    REQUIRE(r.subjects.size() == 2);
    CHECK(r.subjects[0].trial_files.size() == 2);
    CHECK(r.subjects[1].subject_id == "S02");

    std::ofstream bad(dir + "/bad.txt");
    bad << "version 1\nfs 500\nn_channels 8\nbogus_key 3\n";
    bad.close();
    CHECK_THROWS_AS(read_manifest(dir + "/bad.txt"), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("synthetic generation is bit-deterministic") {
    SynthSpec spec;
    spec.n_subjects = 2;
    spec.trials_per_subject = 4;
    spec.trial_seconds = 2.0;
    spec.fs = 100.0;
    spec.n_channels = 4;
    spec.seed = 7;
    const std::string d1 = scratch_dir("aad_synth_a");
    const std::string d2 = scratch_dir("aad_synth_b");
    SynthResult r1 = generate_synthetic(spec, d1);
    SynthResult r2 = generate_synthetic(spec, d2);
    CHECK(r1.total_bytes == r2.total_bytes);
    for (const auto& s : r1.manifest.subjects)
        for (const auto& f : s.trial_files)
            CHECK(read_bytes(d1 + "/" + f) == read_bytes(d2 + "/" + f));
    CHECK(read_bytes(d1 + "/manifest.txt") == read_bytes(d2 + "/manifest.txt"));

    // a different seed changes the data
    SynthSpec other = spec;
    other.seed = 8;
    const std::string d3 = scratch_dir("aad_synth_c");
    generate_synthetic(other, d3);
    CHECK(read_bytes(d1 + "/S01/trial_000.aadb") != read_bytes(d3 + "/S01/trial_000.aadb"));
    fs::remove_all(d1);
    fs::remove_all(d2);
    fs::remove_all(d3);
}

TEST_CASE("synthetic trials: labels balanced, SNR within half a dB, loadable") {
    SynthSpec spec;
    spec.n_subjects = 1;
    spec.trials_per_subject = 12;
    spec.trial_seconds = 2.0;
    spec.fs = 100.0;
    spec.n_channels = 4;
    spec.snr_db = 3.0;
    spec.seed = 11;
    const std::string dir = scratch_dir("aad_synth_bal");
    SynthResult r = generate_synthetic(spec, dir);

    BalanceReport bal = class_balance(r.manifest, r.manifest_path);
    CHECK(bal.balanced);
    CHECK(bal.oa.at("S01").count0 == 6);
    CHECK(bal.oa.at("S01").count1 == 6);
    CHECK(bal.ta.at("S01").count0 == 6);
    CHECK(bal.ta.at("S01").count1 == 6);

    for (const auto& d : r.diags) CHECK(std::abs(d.snr_db_achieved - 3.0) <= 0.5);

    auto dataset = load_dataset(r.manifest, r.manifest_path);
    REQUIRE(dataset.size() == 1);
    REQUIRE(dataset[0].trials.size() == 12);
    for (const auto& t : dataset[0].trials) {
        t.validate();
        CHECK(t.samples.allFinite());
    }
    fs::remove_all(dir);
}

TEST_CASE("class_balance flags an imbalanced subject with its delta") {
    const std::string dir = scratch_dir("aad_imbalance");
    fs::create_directories(dir + "/S01");
    DatasetManifest m;
    m.version = 1;
    m.fs = 100.0;
    m.n_channels = 2;
    DatasetManifest::Subject subj;
    subj.subject_id = "S01";
    Rng rng(5);
    for (int k = 0; k < 12; ++k) {
        TrialRecord t;
        t.subject_id = "S01";
        t.trial_id = k;
        t.fs = 100.0;
        t.label_oa = k < 7 ? 0 : 1;  // 7 left / 5 right
        t.label_ta = k % 2;
        t.samples.resize(2, 120);
        for (Eigen::Index i = 0; i < t.samples.size(); ++i) t.samples.data()[i] = rng.normal();
        const std::string rel = "S01/t" + std::to_string(k) + ".aadb";
        save_trial(t, dir + "/" + rel);
        subj.trial_files.push_back(rel);
    }
    m.subjects.push_back(subj);
    write_manifest(m, dir + "/manifest.txt");
    BalanceReport bal = class_balance(m, dir + "/manifest.txt");
    CHECK_FALSE(bal.balanced);
    CHECK(bal.max_delta == 2);
    CHECK(bal.oa.at("S01").delta() == 2);
    CHECK(bal.ta.at("S01").delta() == 0);
    fs::remove_all(dir);
}

TEST_CASE("matched bands and zero gain remove both class cues") {
    SynthSpec null_spec;
    null_spec.n_subjects = 1;
    null_spec.trials_per_subject = 4;
    null_spec.trial_seconds = 2.0;
    null_spec.fs = 100.0;
    null_spec.n_channels = 4;
    null_spec.spatial_gain = 0.0;
    null_spec.male_band_lo = null_spec.female_band_lo = 2.0;
    null_spec.male_band_hi = null_spec.female_band_hi = 20.0;
    null_spec.seed = 3;
    // structural check only: generation succeeds and trials stay finite
    double snr = 0.0;
    TrialRecord t = synth_trial(null_spec, 0, 0, &snr);
    CHECK(t.samples.allFinite());
    CHECK(std::abs(snr - null_spec.snr_db) <= 0.5);
}

TEST_CASE("synth spec validation") {
    SynthSpec bad;
    bad.trials_per_subject = 3;  // odd: cannot balance
    CHECK_THROWS_AS(bad.validate(), ParamError);
    SynthSpec gain;
    gain.spatial_gain = 1.5;
    CHECK_THROWS_AS(gain.validate(), ParamError);
    SynthSpec band;
    band.female_band_hi = 300.0;  // above Nyquist at fs=500
    CHECK_THROWS_AS(band.validate(), ParamError);
}

TEST_CASE("synth defaults describe the full-size stand-in dataset") {
    SynthSpec spec;
    CHECK(spec.n_subjects == 16);
    CHECK(spec.trials_per_subject == 12);
    CHECK(spec.trial_seconds == 69.0);
    CHECK(spec.fs == 500.0);
    CHECK(spec.n_channels == 32);
    // 16 x 12 = 192 trial files at full scale
    CHECK(spec.n_subjects * spec.trials_per_subject == 192);
}
