#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "popinfer/hotspot/window.hpp"

namespace popinfer::hotspot {

inline constexpr std::uint32_t kWindowFormatVersion = 1;

struct WindowFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "EXGW" | u32 version | u32 n | u32 d | u32 channels | u64 count | per window:
// n * d * channels f64 (row-major, channel fastest), then the label record
// f64 label, u8 h, f64 k, f64 background, u32 raw SNP count. Little-endian.
std::string encode_windows(std::span<const LabeledWindow> windows, int n, int d);
std::vector<LabeledWindow> decode_windows(std::string_view bytes);

void save_windows(std::span<const LabeledWindow> windows, int n, int d, const std::filesystem::path& path);
std::vector<LabeledWindow> load_windows(const std::filesystem::path& path);

}  // namespace popinfer::hotspot
