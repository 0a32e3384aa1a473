#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "wagi/tensor.hpp"

namespace wagi {

/// Largest element count any parser accepts (C·H·W).
inline constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 28;

/// Binary PNM (P5 grey, P6 RGB), maxval 1..255. Samples are scaled to [0,1].
/// Throws MalformedHeaderError, TruncatedPayloadError, UnsupportedMaxvalError,
/// UnsupportedFormatError or DimensionOverflowError.
Tensor read_pnm(std::string_view bytes);

/// Writes P5 (1 channel) or P6 (3 channels) with header "P6\n<w> <h>\n<maxval>\n".
/// Values are clamped to [0,1] and rounded to the nearest level.
std::string write_pnm(const Tensor& img, int maxval = 255);

/// Raw tensor file: "WGT1", u32 dtype code (1 = f32), u32 C, H, W, then the
/// little-endian f32 payload in C×H×W order.
Tensor read_raw(std::string_view bytes);
std::string write_raw(const Tensor& t);

inline constexpr std::uint32_t kRawDtypeF32 = 1;

/// Whole-file helpers; failures throw IoError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

/// Loads a PNM or raw tensor file, chosen by its leading bytes.
Tensor load_image(const std::string& path);

}  // namespace wagi
