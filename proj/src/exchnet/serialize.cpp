#include "popinfer/exchnet/serialize.hpp"

#include <zlib.h>

#include <nlohmann/json.hpp>

#include "popinfer/common/binary_io.hpp"

namespace popinfer::exchnet {

namespace {

constexpr std::string_view kMagic = "EXNN";
constexpr std::string_view kAdamTag = "ADAM";
constexpr std::string_view kMetaTag = "META";

std::uint32_t crc32_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void write_tensor(ByteWriter& w, const Tensor& t) {
  w.u32(static_cast<std::uint32_t>(t.shape.size()));
  for (auto dim : t.shape) w.u32(static_cast<std::uint32_t>(dim));
  w.f64s(t.values);
}

Tensor read_tensor(ByteReader& r) {
  const auto rank = r.u32();
  if (rank > 8) throw ModelFormatError("tensor rank " + std::to_string(rank) + " is implausible");
  std::vector<std::size_t> shape(rank);
  std::size_t count = 1;
  for (auto& dim : shape) {
    dim = r.u32();
    if (dim != 0 && count > r.remaining() / 8 / dim) throw TruncatedInput{};
    count *= dim;
  }
  Tensor t{shape};
  r.f64s(t.values);
  return t;
}

bool same_shapes(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].shape != b[i].shape) return false;
  return true;
}

}  // namespace

std::string architecture_json(const Architecture& a) {
  nlohmann::ordered_json j;
  j["positions"] = a.positions;
  j["input_channels"] = a.input_channels;
  j["patch"] = a.patch;
  j["conv1_filters"] = a.conv1_filters;
  j["conv2_filters"] = a.conv2_filters;
  j["fc1_units"] = a.fc1_units;
  j["fc2_units"] = a.fc2_units;
  j["pooling"] = pooling_name(a.pooling);
  j["head"] = head_name(a);
  j["num_classes"] = a.num_classes;
  j["mixture_components"] = a.mixture_components;
  j["target_low"] = a.target_low;
  j["target_high"] = a.target_high;
  j["dropout"] = a.dropout;
  return j.dump();
}

Architecture architecture_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  Architecture a;
  a.positions = j.at("positions").get<int>();
  a.input_channels = j.at("input_channels").get<int>();
  a.patch = j.at("patch").get<int>();
  a.conv1_filters = j.at("conv1_filters").get<int>();
  a.conv2_filters = j.at("conv2_filters").get<int>();
  a.fc1_units = j.at("fc1_units").get<int>();
  a.fc2_units = j.at("fc2_units").get<int>();
  a.pooling = parse_pooling(j.at("pooling").get<std::string>());
  set_head(a, j.at("head").get<std::string>());
  a.num_classes = j.at("num_classes").get<int>();
  a.mixture_components = j.at("mixture_components").get<int>();
  a.target_low = j.at("target_low").get<double>();
  a.target_high = j.at("target_high").get<double>();
  a.dropout = j.at("dropout").get<double>();
  a.validate();
  return a;
}

std::string encode_model(const ExchNet& net) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kModelFormatVersion);
  const auto& params = net.params();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& t : params) write_tensor(w, t);

  const auto& adam = net.optimizer();
  w.bytes(kAdamTag);
  w.u64(adam.step);
  const bool has_moments = adam.m.size() == params.size();
  w.u8(has_moments ? 1 : 0);
  if (has_moments) {
    for (const auto& t : adam.m) w.f64s(t.values);
    for (const auto& t : adam.v) w.f64s(t.values);
  }

  const auto meta = architecture_json(net.architecture());
  w.bytes(kMetaTag);
  w.u32(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta);

  w.u32(crc32_of(w.data()));
  return std::move(w).take();
}

namespace {

struct Sections {
  std::vector<Tensor> params;
  AdamState adam;
  std::string_view meta;
};

// Reads everything between the version field and the checksum; throws
// TruncatedInput when the bytes end early.
Sections read_sections(ByteReader& r) {
  Sections s;
  const auto count = r.u32();
  if (count != kNumParams)
    throw ModelFormatError("expected " + std::to_string(kNumParams) + " tensors, found " + std::to_string(count));
  for (std::uint32_t i = 0; i < count; ++i) s.params.push_back(read_tensor(r));

  if (r.bytes(4) != kAdamTag) throw ModelFormatError("missing optimizer section");
  s.adam.step = r.u64();
  if (r.u8() != 0) {
    s.adam.m = zeros_like(s.params);
    s.adam.v = zeros_like(s.params);
    for (auto& t : s.adam.m) r.f64s(t.values);
    for (auto& t : s.adam.v) r.f64s(t.values);
  }

  if (r.bytes(4) != kMetaTag) throw ModelFormatError("missing architecture section");
  const auto len = r.u32();
  s.meta = r.bytes(len);
  return s;
}

// After a checksum failure: did the file simply end early?
bool looks_truncated(std::string_view payload) {
  try {
    ByteReader r{payload};
    read_sections(r);
    return r.remaining() < 4;
  } catch (const TruncatedInput&) {
    return true;
  } catch (const ModelFormatError&) {
    return false;
  }
}

}  // namespace

ExchNet decode_model(std::string_view bytes) {
  constexpr std::size_t kHeader = kMagic.size() + 4;
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) throw MagicMismatch{};
  if (bytes.size() < kHeader) throw TruncatedFile{};
  ByteReader header{bytes.substr(kMagic.size())};
  const auto version = header.u32();
  if (version != kModelFormatVersion) throw VersionUnsupported{version};

  const auto payload = bytes.substr(kHeader);
  if (bytes.size() < kHeader + 4) throw TruncatedFile{};
  const auto body = bytes.substr(0, bytes.size() - 4);
  ByteReader tail{bytes.substr(bytes.size() - 4)};
  if (crc32_of(body) != tail.u32()) {
    if (looks_truncated(payload)) throw TruncatedFile{};
    throw ChecksumMismatch{};
  }

  try {
    ByteReader r{body.substr(kHeader)};
    auto s = read_sections(r);
    if (r.remaining() != 0) throw ModelFormatError("trailing bytes after architecture section");
    const auto arch = architecture_from_json(s.meta);
    ExchNet net{arch};
    if (!same_shapes(net.params(), s.params)) throw ModelFormatError("tensor shapes do not match the architecture");
    net.mutable_params() = std::move(s.params);
    net.mutable_optimizer() = std::move(s.adam);
    return net;
  } catch (const TruncatedInput&) {
    throw TruncatedFile{};
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string{"bad architecture section: "} + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string{"bad architecture section: "} + e.what());
  }
}

void save_model(const ExchNet& net, const std::filesystem::path& path) { write_file(path, encode_model(net)); }

ExchNet load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

}  // namespace popinfer::exchnet
