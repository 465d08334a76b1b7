#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "popinfer/exchnet/network.hpp"

namespace popinfer::exchnet {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MagicMismatch : ModelFormatError {
  MagicMismatch() : ModelFormatError("not a model file (bad magic)") {}
};
struct VersionUnsupported : ModelFormatError {
  explicit VersionUnsupported(std::uint32_t v)
      : ModelFormatError("unsupported model format version " + std::to_string(v)) {}
};
struct TruncatedFile : ModelFormatError {
  TruncatedFile() : ModelFormatError("model file is truncated") {}
};
struct ChecksumMismatch : ModelFormatError {
  ChecksumMismatch() : ModelFormatError("model file checksum mismatch") {}
};

// "EXNN" | u32 version | u32 tensor count | per tensor: u32 rank, u32 dims,
// f64 values | "ADAM" u64 step, moments | "META" u32 length, architecture
// JSON | u32 CRC32 of everything before it. All little-endian.
std::string encode_model(const ExchNet& net);
ExchNet decode_model(std::string_view bytes);

void save_model(const ExchNet& net, const std::filesystem::path& path);
ExchNet load_model(const std::filesystem::path& path);

std::string architecture_json(const Architecture& arch);
Architecture architecture_from_json(std::string_view json);

}  // namespace popinfer::exchnet
