#include "popinfer/hotspot/window_file.hpp"

#include "popinfer/common/binary_io.hpp"

namespace popinfer::hotspot {

namespace {
constexpr std::string_view kMagic = "EXGW";
}

std::string encode_windows(std::span<const LabeledWindow> windows, int n, int d) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kWindowFormatVersion);
  w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(d));
  w.u32(kChannels);
  w.u64(windows.size());
  const auto cells = static_cast<std::size_t>(n) * d * kChannels;
  for (const auto& win : windows) {
    if (win.rows != n || win.positions != d || win.tensor.size() != cells)
      throw WindowFileError("window shape does not match the file header");
    w.f64s(win.tensor);
    w.f64(win.label);
    w.u8(static_cast<std::uint8_t>(win.draw.h));
    w.f64(win.draw.k);
    w.f64(win.draw.background);
    w.u32(static_cast<std::uint32_t>(win.raw_snps));
  }
  return std::move(w).take();
}

std::vector<LabeledWindow> decode_windows(std::string_view bytes) {
  try {
    ByteReader r{bytes};
    if (r.bytes(4) != kMagic) throw WindowFileError("not a window file (bad magic)");
    const auto version = r.u32();
    if (version != kWindowFormatVersion)
      throw WindowFileError("unsupported window format version " + std::to_string(version));
    const auto n = static_cast<int>(r.u32());
    const auto d = static_cast<int>(r.u32());
    const auto channels = r.u32();
    if (channels != kChannels) throw WindowFileError("window file has " + std::to_string(channels) + " channels");
    const auto count = r.u64();
    const auto cells = static_cast<std::size_t>(n) * d * kChannels;
    const auto record = cells * 8 + 8 + 1 + 8 + 8 + 4;
    if (count > r.remaining() / record) throw WindowFileError("window file is truncated");
    std::vector<LabeledWindow> out(count);
    for (auto& win : out) {
      win.rows = n;
      win.positions = d;
      win.tensor.resize(cells);
      r.f64s(win.tensor);
      win.label = r.f64();
      win.draw.h = r.u8();
      win.draw.k = r.f64();
      win.draw.background = r.f64();
      win.raw_snps = static_cast<int>(r.u32());
    }
    if (r.remaining() != 0) throw WindowFileError("trailing bytes in window file");
    return out;
  } catch (const TruncatedInput&) {
    throw WindowFileError("window file is truncated");
  }
}

void save_windows(std::span<const LabeledWindow> windows, int n, int d, const std::filesystem::path& path) {
  write_file(path, encode_windows(windows, n, d));
}

std::vector<LabeledWindow> load_windows(const std::filesystem::path& path) { return decode_windows(read_file(path)); }

}  // namespace popinfer::hotspot
