#include "aad/model_io.hpp"

#include <map>

#include "aad/io_util.hpp"

namespace aad {

namespace {

constexpr char kMagic[4] = {'A', 'A', 'D', 'M'};
constexpr std::uint32_t kVersion = 1;

struct BnIo {
    std::uint16_t base_id;
    const std::optional<BnState>* state;
};

std::vector<std::uint32_t> tensor_dims(const Tensor4& t) {
    return {static_cast<std::uint32_t>(t.b), static_cast<std::uint32_t>(t.k),
            static_cast<std::uint32_t>(t.c), static_cast<std::uint32_t>(t.t)};
}

}  // namespace

void save_model(const ModelParams& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_model: cannot open " + path);
    BinWriter w(os);
    w.magic(kMagic);
    w.u32(kVersion);

    const ModelConfig& c = params.config;
    w.u64(static_cast<std::uint64_t>(c.n_channels));
    w.f64(c.sample_rate);
    w.u64(static_cast<std::uint64_t>(c.window_samples));
    w.u64(static_cast<std::uint64_t>(c.temporal_kernels));
    w.u64(static_cast<std::uint64_t>(c.temporal_len));
    w.u64(static_cast<std::uint64_t>(c.depth_multiplier));
    w.u64(static_cast<std::uint64_t>(c.sep_len));
    w.u64(static_cast<std::uint64_t>(c.pool1));
    w.u64(static_cast<std::uint64_t>(c.pool2));
    w.u64(static_cast<std::uint64_t>(c.hidden));
    w.u64(static_cast<std::uint64_t>(c.classes));
    w.f64(c.dropout_p);
    w.f64(c.bn_momentum);
    w.f64(c.bn_eps);
    w.u64(c.bn1 ? 1 : 0);
    w.u64(c.bn2 ? 1 : 0);
    w.u64(c.bn3a ? 1 : 0);
    w.u64(c.bn3b ? 1 : 0);

    std::uint32_t count = 8;
    for (const auto* bn : {&params.bn1, &params.bn2, &params.bn3a, &params.bn3b})
        if (*bn) count += 6;
    w.u32(count);

    write_tagged_array(w, 1, tensor_dims(params.w_temporal), params.w_temporal.data.data(),
                       static_cast<std::size_t>(params.w_temporal.size()));
    write_tagged_array(w, 2, tensor_dims(params.w_spatial), params.w_spatial.data.data(),
                       static_cast<std::size_t>(params.w_spatial.size()));
    write_tagged_array(w, 3, tensor_dims(params.w_sepdepth), params.w_sepdepth.data.data(),
                       static_cast<std::size_t>(params.w_sepdepth.size()));
    write_tagged_array(w, 4, tensor_dims(params.w_point), params.w_point.data.data(),
                       static_cast<std::size_t>(params.w_point.size()));
    write_tagged_array(w, 5,
                       {static_cast<std::uint32_t>(params.w_fc1.rows()),
                        static_cast<std::uint32_t>(params.w_fc1.cols())},
                       params.w_fc1.data(), static_cast<std::size_t>(params.w_fc1.size()));
    write_tagged_array(w, 6, {static_cast<std::uint32_t>(params.b_fc1.size())}, params.b_fc1.data(),
                       static_cast<std::size_t>(params.b_fc1.size()));
    write_tagged_array(w, 7,
                       {static_cast<std::uint32_t>(params.w_fc2.rows()),
                        static_cast<std::uint32_t>(params.w_fc2.cols())},
                       params.w_fc2.data(), static_cast<std::size_t>(params.w_fc2.size()));
    write_tagged_array(w, 8, {static_cast<std::uint32_t>(params.b_fc2.size())}, params.b_fc2.data(),
                       static_cast<std::size_t>(params.b_fc2.size()));

    const BnIo bns[] = {{10, &params.bn1}, {20, &params.bn2}, {30, &params.bn3a}, {40, &params.bn3b}};
    for (const auto& b : bns) {
        if (!*b.state) continue;
        const BnState& s = **b.state;
        const auto n = static_cast<std::uint32_t>(s.gamma.size());
        write_tagged_array(w, b.base_id, {n}, s.gamma.data(), n);
        write_tagged_array(w, static_cast<std::uint16_t>(b.base_id + 1), {n}, s.beta.data(), n);
        write_tagged_array(w, static_cast<std::uint16_t>(b.base_id + 2), {n}, s.running_mean.data(), n);
        write_tagged_array(w, static_cast<std::uint16_t>(b.base_id + 3), {n}, s.running_var.data(), n);
        write_tagged_array(w, static_cast<std::uint16_t>(b.base_id + 4), {}, &s.momentum, 1);
        write_tagged_array(w, static_cast<std::uint16_t>(b.base_id + 5), {}, &s.eps, 1);
    }
    os.flush();
    if (!os) throw IoError("save_model: write failed for " + path);
}

namespace {

Tensor4 tensor_from(const TaggedArray& a, BinReader& r) {
    if (a.dims.size() != 4) r.fail("array id " + std::to_string(a.id) + " must have rank 4");
    Tensor4 t(a.dims[0], a.dims[1], a.dims[2], a.dims[3]);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = a.data[static_cast<std::size_t>(i)];
    return t;
}

Vector vector_from(const TaggedArray& a) {
    Vector v(static_cast<Eigen::Index>(a.data.size()));
    for (std::size_t i = 0; i < a.data.size(); ++i) v[static_cast<Eigen::Index>(i)] = a.data[i];
    return v;
}

}  // namespace

ModelParams load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_model: cannot open " + path);
    BinReader r(is, "model checkpoint " + path);
    r.expect_magic(kMagic);
    const std::uint32_t version = r.u32();
    if (version != kVersion) r.fail("unsupported format version " + std::to_string(version));

    ModelConfig c;
    c.n_channels = static_cast<Eigen::Index>(r.u64());
    c.sample_rate = r.f64();
    c.window_samples = static_cast<Eigen::Index>(r.u64());
    c.temporal_kernels = static_cast<Eigen::Index>(r.u64());
    c.temporal_len = static_cast<Eigen::Index>(r.u64());
    c.depth_multiplier = static_cast<Eigen::Index>(r.u64());
    c.sep_len = static_cast<Eigen::Index>(r.u64());
    c.pool1 = static_cast<Eigen::Index>(r.u64());
    c.pool2 = static_cast<Eigen::Index>(r.u64());
    c.hidden = static_cast<Eigen::Index>(r.u64());
    c.classes = static_cast<Eigen::Index>(r.u64());
    c.dropout_p = r.f64();
    c.bn_momentum = r.f64();
    c.bn_eps = r.f64();
    c.bn1 = r.u64() != 0;
    c.bn2 = r.u64() != 0;
    c.bn3a = r.u64() != 0;
    c.bn3b = r.u64() != 0;
    try {
        c.validate();
    } catch (const ConfigError& e) {
        r.fail(std::string("invalid config: ") + e.what());
    }

    const std::uint32_t count = r.u32();
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

    ModelParams p;
    p.config = c;
    p.w_temporal = tensor_from(need(1), r);
    p.w_spatial = tensor_from(need(2), r);
    p.w_sepdepth = tensor_from(need(3), r);
    p.w_point = tensor_from(need(4), r);
    {
        const TaggedArray& a = need(5);
        if (a.dims.size() != 2) r.fail("w_fc1 must have rank 2");
        p.w_fc1.resize(a.dims[0], a.dims[1]);
        std::memcpy(p.w_fc1.data(), a.data.data(), a.data.size() * sizeof(double));
    }
    p.b_fc1 = vector_from(need(6));
    {
        const TaggedArray& a = need(7);
        if (a.dims.size() != 2) r.fail("w_fc2 must have rank 2");
        p.w_fc2.resize(a.dims[0], a.dims[1]);
        std::memcpy(p.w_fc2.data(), a.data.data(), a.data.size() * sizeof(double));
    }
    p.b_fc2 = vector_from(need(8));

    struct BnLoad {
        std::uint16_t base_id;
        bool enabled;
        std::optional<BnState>* dst;
        Eigen::Index maps;
    };
    const BnLoad bns[] = {{10, c.bn1, &p.bn1, c.temporal_kernels},
                          {20, c.bn2, &p.bn2, c.spatial_maps()},
                          {30, c.bn3a, &p.bn3a, c.spatial_maps()},
                          {40, c.bn3b, &p.bn3b, c.spatial_maps()}};
    for (const auto& b : bns) {
        if (!b.enabled) continue;
        BnState s;
        s.gamma = vector_from(need(b.base_id));
        s.beta = vector_from(need(static_cast<std::uint16_t>(b.base_id + 1)));
        s.running_mean = vector_from(need(static_cast<std::uint16_t>(b.base_id + 2)));
        s.running_var = vector_from(need(static_cast<std::uint16_t>(b.base_id + 3)));
        s.momentum = need(static_cast<std::uint16_t>(b.base_id + 4)).data.at(0);
        s.eps = need(static_cast<std::uint16_t>(b.base_id + 5)).data.at(0);
        if (s.gamma.size() != b.maps) r.fail("bn block size mismatch");
        *b.dst = std::move(s);
    }

    // shape validation against the config
    auto check = [&](bool ok, const char* what) {
        if (!ok) r.fail(std::string("shape mismatch for ") + what);
    };
    check(p.w_temporal.b == c.temporal_kernels && p.w_temporal.k == 1 && p.w_temporal.c == 1 &&
              p.w_temporal.t == c.temporal_len,
          "w_temporal");
    check(p.w_spatial.b == c.spatial_maps() && p.w_spatial.k == 1 && p.w_spatial.c == c.n_channels &&
              p.w_spatial.t == 1,
          "w_spatial");
    check(p.w_sepdepth.b == c.spatial_maps() && p.w_sepdepth.k == 1 && p.w_sepdepth.c == 1 &&
              p.w_sepdepth.t == c.sep_len,
          "w_sepdepth");
    check(p.w_point.b == c.spatial_maps() && p.w_point.k == c.spatial_maps() && p.w_point.c == 1 &&
              p.w_point.t == 1,
          "w_point");
    check(p.w_fc1.rows() == c.hidden && p.w_fc1.cols() == c.flatten_width(), "w_fc1");
    check(p.b_fc1.size() == c.hidden, "b_fc1");
    check(p.w_fc2.rows() == c.classes && p.w_fc2.cols() == c.hidden, "w_fc2");
    check(p.b_fc2.size() == c.classes, "b_fc2");
    r.expect_eof();
    return p;
}

}  // namespace aad
