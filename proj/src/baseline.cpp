#include "aad/baseline.hpp"

#include <map>

#include "aad/io_util.hpp"

namespace aad {

namespace {

Vector flatten_window(const Matrix& window) {
    Vector v(window.size());
    Eigen::Index at = 0;
    for (Eigen::Index r = 0; r < window.rows(); ++r)
        for (Eigen::Index c = 0; c < window.cols(); ++c) v[at++] = window(r, c);
    return v;
}

}  // namespace

Vector BaselinePipeline::features(const Matrix& window) const {
    if (kind == "fbcsp") return csp_features(csp, window);
    if (kind == "pca") {
        Matrix row(1, window.size());
        row.row(0) = flatten_window(window).transpose();
        return pca_project(pca, row).row(0).transpose();
    }
    throw StateError("baseline: unknown kind " + kind);
}

double BaselinePipeline::score(const Matrix& window) const {
    const Vector feat = features(window);
    Matrix f(1, feat.size());
    f.row(0) = feat.transpose();
    return clf.score(standardizer.apply(f).row(0).transpose());
}

int BaselinePipeline::label(const Matrix& window) const { return score(window) >= 0.0 ? 1 : 0; }

BaselinePipeline fit_baseline(const std::string& kind, const std::vector<Window>& windows,
                              const std::vector<int>& train_idx, Task task,
                              const BaselineConfig& cfg, double fs, std::uint64_t seed,
                              std::vector<std::string>* warnings) {
    if (train_idx.empty()) throw ParamError("fit_baseline: empty training set");
    BaselinePipeline p;
    p.kind = kind;
    p.fs = fs;

    if (kind == "fbcsp") {
        p.csp = fit_fbcsp(windows, train_idx, task, cfg.fbcsp.bands, cfg.fbcsp.pairs, fs, warnings);
    } else if (kind == "pca") {
        const Eigen::Index d = windows[static_cast<std::size_t>(train_idx.front())].samples.size();
        Matrix flat(static_cast<Eigen::Index>(train_idx.size()), d);
        for (std::size_t i = 0; i < train_idx.size(); ++i)
            flat.row(static_cast<Eigen::Index>(i)) =
                flatten_window(windows[static_cast<std::size_t>(train_idx[i])].samples).transpose();
        const int q = std::min<int>(cfg.pca.q,
                                    static_cast<int>(std::min<Eigen::Index>(flat.rows() - 1, d)));
        p.pca = fit_pca(flat, q);
    } else {
        throw ParamError("fit_baseline: unknown kind " + kind);
    }

    Matrix feats(static_cast<Eigen::Index>(train_idx.size()), p.features(
        windows[static_cast<std::size_t>(train_idx.front())].samples).size());
    std::vector<int> labels(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
        const Window& w = windows[static_cast<std::size_t>(train_idx[i])];
        feats.row(static_cast<Eigen::Index>(i)) = p.features(w.samples).transpose();
        labels[i] = window_label(w, task);
    }
    p.standardizer = Standardizer::fit(feats);
    LinearFitConfig lc = cfg.linear;
    lc.seed = seed;
    p.clf = fit_linear(p.standardizer.apply(feats), labels, lc);
    return p;
}

namespace {

constexpr char kMagic[4] = {'A', 'A', 'D', 'C'};
constexpr std::uint32_t kVersion = 1;

void write_matrix(BinWriter& w, std::uint16_t id, const Matrix& m) {
    // stored row-major for readability of the format
    std::vector<double> buf(static_cast<std::size_t>(m.size()));
    std::size_t at = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) buf[at++] = m(r, c);
    write_tagged_array(w, id,
                       {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())},
                       buf.data(), buf.size());
}

Matrix matrix_from(const TaggedArray& a, BinReader& r) {
    if (a.dims.size() != 2) r.fail("array id " + std::to_string(a.id) + " must have rank 2");
    Matrix m(a.dims[0], a.dims[1]);
    std::size_t at = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = a.data[at++];
    return m;
}

void write_vector(BinWriter& w, std::uint16_t id, const Vector& v) {
    write_tagged_array(w, id, {static_cast<std::uint32_t>(v.size())}, v.data(),
                       static_cast<std::size_t>(v.size()));
}

Vector vector_from(const TaggedArray& a, BinReader& r) {
    if (a.dims.size() != 1) r.fail("array id " + std::to_string(a.id) + " must have rank 1");
    Vector v(static_cast<Eigen::Index>(a.data.size()));
    for (std::size_t i = 0; i < a.data.size(); ++i) v[static_cast<Eigen::Index>(i)] = a.data[i];
    return v;
}

constexpr std::uint16_t kIdStdMean = 100, kIdStdStd = 101, kIdClfW = 102, kIdClfB = 103;
constexpr std::uint16_t kIdFs = 104;
constexpr std::uint16_t kIdCspPairs = 110, kIdCspBands = 111;
constexpr std::uint16_t kIdCspTapsBase = 130, kIdCspFiltersBase = 160, kIdCspEvalsBase = 200;
constexpr std::uint16_t kIdPcaMean = 140, kIdPcaComponents = 141, kIdPcaEigenvalues = 142;
constexpr std::uint16_t kIdPcaTotalVar = 143;

}  // namespace

void save_baseline(const BaselinePipeline& p, const std::string& path) {
    if (p.kind != "fbcsp" && p.kind != "pca") throw ParamError("save_baseline: unknown kind");
    if (p.kind == "fbcsp" && p.csp.bands.size() > 30)
        throw ParamError("save_baseline: too many bands");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_baseline: cannot open " + path);
    BinWriter w(os);
    w.magic(kMagic);
    w.u32(kVersion);
    w.u64(p.kind == "fbcsp" ? 1 : 2);

    std::uint32_t count = 5;  // standardizer, classifier, fs
    if (p.kind == "fbcsp")
        count += 2 + 3 * static_cast<std::uint32_t>(p.csp.bands.size());
    else
        count += 4;
    w.u32(count);

    write_vector(w, kIdStdMean, p.standardizer.mean);
    write_vector(w, kIdStdStd, p.standardizer.std);
    write_vector(w, kIdClfW, p.clf.w);
    write_tagged_array(w, kIdClfB, {}, &p.clf.b, 1);
    write_tagged_array(w, kIdFs, {}, &p.fs, 1);

    if (p.kind == "fbcsp") {
        const double pairs = static_cast<double>(p.csp.pairs);
        write_tagged_array(w, kIdCspPairs, {}, &pairs, 1);
        Matrix bands(static_cast<Eigen::Index>(p.csp.bands.size()), 2);
        for (std::size_t i = 0; i < p.csp.bands.size(); ++i) {
            bands(static_cast<Eigen::Index>(i), 0) = p.csp.bands[i].lo_hz;
            bands(static_cast<Eigen::Index>(i), 1) = p.csp.bands[i].hi_hz;
        }
        write_matrix(w, kIdCspBands, bands);
        for (std::size_t i = 0; i < p.csp.bands.size(); ++i) {
            write_vector(w, static_cast<std::uint16_t>(kIdCspTapsBase + i), p.csp.band_taps[i]);
            write_matrix(w, static_cast<std::uint16_t>(kIdCspFiltersBase + i), p.csp.filters[i]);
            write_vector(w, static_cast<std::uint16_t>(kIdCspEvalsBase + i), p.csp.eigenvalues[i]);
        }
    } else {
        write_vector(w, kIdPcaMean, p.pca.mean);
        write_matrix(w, kIdPcaComponents, p.pca.components);
        write_vector(w, kIdPcaEigenvalues, p.pca.eigenvalues);
        write_tagged_array(w, kIdPcaTotalVar, {}, &p.pca.total_variance, 1);
    }
    os.flush();
    if (!os) throw IoError("save_baseline: write failed for " + path);
}

BaselinePipeline load_baseline(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_baseline: cannot open " + path);
    BinReader r(is, "baseline checkpoint " + path);
    r.expect_magic(kMagic);
    const std::uint32_t version = r.u32();
    if (version != kVersion) r.fail("unsupported format version " + std::to_string(version));
    const std::uint64_t kind = r.u64();
    if (kind != 1 && kind != 2) r.fail("unknown model kind " + std::to_string(kind));

    const std::uint32_t count = r.u32();
    if (count > 256) r.fail("array count out of range");
    std::map<std::uint16_t, TaggedArray> arrays;
    for (std::uint32_t i = 0; i < count; ++i) {
        TaggedArray a = read_tagged_array(r);
        if (!arrays.emplace(a.id, std::move(a)).second)
            r.fail("duplicate array id " + std::to_string(a.id));
    }
    auto need = [&](std::uint16_t id) -> const TaggedArray& {
        auto it = arrays.find(id);
        if (it == arrays.end()) r.fail("missing array id " + std::to_string(id));
        return it->second;
    };

    BaselinePipeline p;
    p.kind = kind == 1 ? "fbcsp" : "pca";
    p.standardizer.mean = vector_from(need(kIdStdMean), r);
    p.standardizer.std = vector_from(need(kIdStdStd), r);
    p.clf.w = vector_from(need(kIdClfW), r);
    p.clf.b = need(kIdClfB).data.at(0);
    p.fs = need(kIdFs).data.at(0);

    if (p.kind == "fbcsp") {
        p.csp.pairs = static_cast<int>(need(kIdCspPairs).data.at(0));
        Matrix bands = matrix_from(need(kIdCspBands), r);
        if (bands.cols() != 2 || bands.rows() > 30) r.fail("bad band table");
        for (Eigen::Index i = 0; i < bands.rows(); ++i) {
            p.csp.bands.push_back({bands(i, 0), bands(i, 1)});
            p.csp.band_taps.push_back(
                vector_from(need(static_cast<std::uint16_t>(kIdCspTapsBase + i)), r));
            p.csp.filters.push_back(
                matrix_from(need(static_cast<std::uint16_t>(kIdCspFiltersBase + i)), r));
            p.csp.eigenvalues.push_back(
                vector_from(need(static_cast<std::uint16_t>(kIdCspEvalsBase + i)), r));
        }
    } else {
        p.pca.mean = vector_from(need(kIdPcaMean), r);
        p.pca.components = matrix_from(need(kIdPcaComponents), r);
        p.pca.eigenvalues = vector_from(need(kIdPcaEigenvalues), r);
        p.pca.total_variance = need(kIdPcaTotalVar).data.at(0);
    }
    r.expect_eof();
    return p;
}

}  // namespace aad
