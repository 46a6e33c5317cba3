// Copyright 2026 The whisqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iterator>

#include "whisqa/binary_io.hpp"
#include "whisqa/errors.hpp"
#include "whisqa/features.hpp"

namespace whisqa {

namespace io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace io

std::vector<std::uint8_t> encode_feature_stack(const FeatureStack& s) {
  io::ByteWriter w;
  w.put_chars({kFeatureMagic, 4});
  w.put_u16(kFeatureVersion);
  w.put_u32(static_cast<std::uint32_t>(s.layer_count()));
  w.put_u32(static_cast<std::uint32_t>(s.frame_count()));
  w.put_u32(static_cast<std::uint32_t>(s.feature_dim()));
  w.put_u32(static_cast<std::uint32_t>(s.valid_frames()));
  w.put_u8(kDtypeFloat32);
  for (float v : s.data()) w.put_f32(v);
  return w.take();
}

FeatureStack decode_feature_stack(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "WSQF header");
  const std::string magic = r.chars(4);
  if (magic != std::string(kFeatureMagic, 4)) throw BadMagicError("WSQF: bad magic '" + magic + "'");
  const std::uint16_t version = r.u16();
  if (version != kFeatureVersion) {
    throw VersionMismatchError("WSQF: unsupported version " + std::to_string(version) + " (expected " +
                               std::to_string(kFeatureVersion) + ")");
  }
  StackDims dims;
  dims.layers = r.u32();
  dims.frames = r.u32();
  dims.features = r.u32();
  const std::size_t valid = r.u32();
  const std::uint8_t dtype = r.u8();
  if (dtype != kDtypeFloat32) throw UnsupportedDtypeError("WSQF: unsupported dtype code " + std::to_string(dtype));

  const std::size_t count = dims.size();
  if (r.remaining() < count * 4) {
    throw TruncatedError("WSQF: payload truncated, expected " + std::to_string(count * 4) + " bytes, found " +
                         std::to_string(r.remaining()));
  }
  if (r.remaining() > count * 4) {
    throw FormatError("WSQF: " + std::to_string(r.remaining() - count * 4) + " trailing bytes after payload");
  }
  std::vector<float> data(count);
  for (float& v : data) v = r.f32();
  return FeatureStack(dims, std::move(data), valid);
}

void save_feature_stack(const FeatureStack& s, const std::filesystem::path& path) {
  io::write_file(path, encode_feature_stack(s));
}

FeatureStack load_feature_stack(const std::filesystem::path& path) {
  try {
    return decode_feature_stack(io::read_file(path));
  } catch (const BadMagicError& e) {
    throw BadMagicError(path.string() + ": " + e.what());
  } catch (const VersionMismatchError& e) {
    throw VersionMismatchError(path.string() + ": " + e.what());
  } catch (const TruncatedError& e) {
    throw TruncatedError(path.string() + ": " + e.what());
  } catch (const UnsupportedDtypeError& e) {
    throw UnsupportedDtypeError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace whisqa
