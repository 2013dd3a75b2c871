#include "aad/trial_io.hpp"

#include <filesystem>
#include <sstream>

#include "aad/io_util.hpp"

namespace aad {

namespace {

constexpr char kMagic[4] = {'A', 'A', 'D', 'B'};
constexpr std::uint32_t kVersion = 1;

struct TrialHeader {
    TrialRecord meta;  // samples left empty
    Eigen::Index channels = 0;
    Eigen::Index length = 0;
};

TrialHeader read_header(BinReader& r) {
    r.expect_magic(kMagic);
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        r.fail("unsupported trial format version " + std::to_string(version));
    TrialHeader h;
    h.meta.fs = static_cast<double>(r.f32());
    const std::uint32_t c = r.u32();
    const std::uint32_t n = r.u32();
    if (c == 0 || c > 4096) r.fail("channel count " + std::to_string(c) + " out of range");
    if (n == 0 || n > (1u << 30)) r.fail("sample count " + std::to_string(n) + " out of range");
    const std::uint8_t oa = r.u8();
    const std::uint8_t ta = r.u8();
    if (oa > 1 || ta > 1) r.fail("label out of range");
    h.meta.label_oa = oa;
    h.meta.label_ta = ta;
    const std::uint16_t slen = r.u16();
    std::string sid(slen, '\0');
    if (slen > 0) r.bytes(sid.data(), slen);
    h.meta.subject_id = std::move(sid);
    h.meta.trial_id = static_cast<int>(r.u32());
    if (!(h.meta.fs > 0.0)) r.fail("non-positive sampling rate");
    h.channels = c;
    h.length = n;
    return h;
}

}  // namespace

void save_trial(const TrialRecord& trial, const std::string& path) {
    trial.validate();
    if (trial.subject_id.size() > 65535) throw ParamError("save_trial: subject id too long");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_trial: cannot open " + path);
    BinWriter w(os);
    w.magic(kMagic);
    w.u32(kVersion);
    w.f32(static_cast<float>(trial.fs));
    w.u32(static_cast<std::uint32_t>(trial.channels()));
    w.u32(static_cast<std::uint32_t>(trial.length()));
    w.u8(static_cast<std::uint8_t>(trial.label_oa));
    w.u8(static_cast<std::uint8_t>(trial.label_ta));
    w.u16(static_cast<std::uint16_t>(trial.subject_id.size()));
    if (!trial.subject_id.empty()) w.bytes(trial.subject_id.data(), trial.subject_id.size());
    w.u32(static_cast<std::uint32_t>(trial.trial_id));

    std::vector<float> row(static_cast<std::size_t>(trial.length()));
    for (Eigen::Index ch = 0; ch < trial.channels(); ++ch) {
        for (Eigen::Index i = 0; i < trial.length(); ++i)
            row[static_cast<std::size_t>(i)] = static_cast<float>(trial.samples(ch, i));
        w.bytes(row.data(), row.size() * sizeof(float));
    }
    os.flush();
    if (!os) throw IoError("save_trial: write failed for " + path);
}

TrialRecord load_trial(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_trial: cannot open " + path);
    BinReader r(is, "trial file " + path);
    TrialHeader h = read_header(r);
    TrialRecord t = std::move(h.meta);
    t.samples.resize(h.channels, h.length);
    std::vector<float> row(static_cast<std::size_t>(h.length));
    for (Eigen::Index ch = 0; ch < h.channels; ++ch) {
        r.bytes(row.data(), row.size() * sizeof(float));
        for (Eigen::Index i = 0; i < h.length; ++i)
            t.samples(ch, i) = static_cast<double>(row[static_cast<std::size_t>(i)]);
    }
    r.expect_eof();
    return t;
}

TrialRecord load_trial_header(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_trial_header: cannot open " + path);
    BinReader r(is, "trial file " + path);
    return read_header(r).meta;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("write_manifest: cannot open " + path);
    os << "version " << m.version << "\n";
    os << "fs " << m.fs << "\n";
    os << "n_channels " << m.n_channels << "\n";
    os << "task " << m.task << "\n";
    if (m.has_seed) os << "generator_seed " << m.generator_seed << "\n";
    for (const auto& s : m.subjects) {
        os << "subject " << s.subject_id << "\n";
        for (const auto& f : s.trial_files) os << "trial " << f << "\n";
    }
    os.flush();
    if (!os) throw IoError("write_manifest: write failed for " + path);
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("read_manifest: cannot open " + path);
    DatasetManifest m;
    m.version = 0;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key, value;
        ss >> key;
        std::getline(ss, value);
        if (!value.empty() && value[0] == ' ') value.erase(0, 1);
        auto fail = [&](const std::string& msg) {
            throw FormatError("manifest " + path + ": " + msg + " at line " + std::to_string(lineno));
        };
        if (key == "version") {
            m.version = std::stoi(value);
            if (m.version != 1) fail("unsupported version " + value);
        } else if (key == "fs") {
            m.fs = std::stod(value);
        } else if (key == "n_channels") {
            m.n_channels = std::stoi(value);
        } else if (key == "task") {
            if (value != "oa" && value != "ta" && value != "both") fail("bad task " + value);
            m.task = value;
        } else if (key == "generator_seed") {
            m.has_seed = true;
            m.generator_seed = std::stoull(value);
        } else if (key == "subject") {
            if (value.empty()) fail("empty subject id");
            m.subjects.push_back({value, {}});
        } else if (key == "trial") {
            if (m.subjects.empty()) fail("trial before any subject");
            if (value.empty()) fail("empty trial path");
            m.subjects.back().trial_files.push_back(value);
        } else {
            fail("unknown key " + key);
        }
    }
    if (m.version != 1) throw FormatError("manifest " + path + ": missing version");
    if (!(m.fs > 0.0)) throw FormatError("manifest " + path + ": missing or bad fs");
    if (m.n_channels < 1) throw FormatError("manifest " + path + ": missing n_channels");
    return m;
}

std::string dir_of(const std::string& path) {
    const std::filesystem::path p(path);
    return p.has_parent_path() ? p.parent_path().string() : std::string(".");
}

std::vector<SubjectTrials> load_dataset(const DatasetManifest& manifest,
                                        const std::string& manifest_path) {
    const std::string base = dir_of(manifest_path);
    std::vector<SubjectTrials> out;
    for (const auto& s : manifest.subjects) {
        SubjectTrials st;
        st.subject_id = s.subject_id;
        for (const auto& f : s.trial_files) {
            TrialRecord t = load_trial(base + "/" + f);
            if (t.fs != manifest.fs || t.channels() != manifest.n_channels)
                throw FormatError("trial " + f + " disagrees with manifest fs/n_channels");
            st.trials.push_back(std::move(t));
        }
        out.push_back(std::move(st));
    }
    return out;
}

BalanceReport class_balance(const DatasetManifest& manifest, const std::string& manifest_path) {
    const std::string base = dir_of(manifest_path);
    BalanceReport rep;
    for (const auto& s : manifest.subjects) {
        ClassCounts oa, ta;
        for (const auto& f : s.trial_files) {
            TrialRecord t = load_trial_header(base + "/" + f);
            (t.label_oa == 0 ? oa.count0 : oa.count1)++;
            (t.label_ta == 0 ? ta.count0 : ta.count1)++;
        }
        rep.max_delta = std::max({rep.max_delta, oa.delta(), ta.delta()});
        rep.oa[s.subject_id] = oa;
        rep.ta[s.subject_id] = ta;
    }
    rep.balanced = rep.max_delta == 0;
    return rep;
}

}  // namespace aad
