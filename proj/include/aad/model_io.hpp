#pragma once

#include <string>

#include "aad/model.hpp"

namespace aad {

// Model checkpoint, magic "AADM": u32 format version, config block as
// fixed-order 64-bit little-endian values, then one tagged array per
// parameter / BN statistic. Round-trips are bit-exact.
void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

}  // namespace aad
