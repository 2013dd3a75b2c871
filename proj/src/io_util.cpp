#include "aad/io_util.hpp"

namespace aad {

void write_tagged_array(BinWriter& w, std::uint16_t id, const std::vector<std::uint32_t>& dims,
                        const double* data, std::size_t n) {
    std::size_t prod = 1;
    for (auto d : dims) prod *= d;
    if (prod != n) throw ShapeError("write_tagged_array: dims do not match payload size");
    w.u16(id);
    w.u8(static_cast<std::uint8_t>(dims.size()));
    for (auto d : dims) w.u32(d);
    w.bytes(data, n * sizeof(double));
}

TaggedArray read_tagged_array(BinReader& r) {
    TaggedArray a;
    a.id = r.u16();
    const std::uint8_t rank = r.u8();
    if (rank > 4) r.fail("array rank " + std::to_string(rank) + " out of range");
    std::size_t n = 1;
    for (std::uint8_t i = 0; i < rank; ++i) {
        const std::uint32_t d = r.u32();
        if (d == 0 || d > (1u << 28)) r.fail("array dim " + std::to_string(d) + " out of range");
        a.dims.push_back(d);
        n *= d;
        if (n > (1ull << 32)) r.fail("array payload too large");
    }
    a.data.resize(n);
    r.bytes(a.data.data(), n * sizeof(double));
    return a;
}

}  // namespace aad
