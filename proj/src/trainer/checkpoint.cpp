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

#include <boost/crc.hpp>

#include <map>

#include "whisqa/binary_io.hpp"
#include "whisqa/errors.hpp"
#include "whisqa/trainer.hpp"

namespace whisqa {

namespace {

// magic, version, total length
constexpr std::size_t kHeaderBytes = 4 + 2 + 8;
constexpr std::size_t kTrailerBytes = 4;

template <class Real>
constexpr std::uint8_t dtype_code() {
  return sizeof(Real) == 4 ? 0 : 1;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

template <class Real>
void put_values(io::ByteWriter& w, std::span<const Real> values) {
  w.put_u8(dtype_code<Real>());
  w.put_u64(values.size());
  for (Real v : values) {
    if constexpr (sizeof(Real) == 4) {
      w.put_f32(v);
    } else {
      w.put_f64(v);
    }
  }
}

template <class Real>
std::vector<Real> get_values(io::ByteReader& r) {
  const std::uint8_t code = r.u8();
  if (code != dtype_code<Real>()) {
    throw FormatError("WSQC: parameter dtype " + std::to_string(code) + " does not match the requested precision");
  }
  const std::uint64_t n = r.u64();
  if (n > r.remaining() / sizeof(Real)) throw TruncatedError("WSQC: value array longer than its section");
  std::vector<Real> out(n);
  for (Real& v : out) {
    if constexpr (sizeof(Real) == 4) {
      v = r.f32();
    } else {
      v = r.f64();
    }
  }
  return out;
}

void put_section(io::ByteWriter& w, const char (&tag)[5], const io::ByteWriter& body) {
  w.put_chars({tag, 4});
  w.put_u64(body.size());
  w.put_raw(body.bytes());
}

io::ByteWriter encode_arch(const ArchConfig& a) {
  io::ByteWriter w;
  w.put_u64(a.layer_count);
  w.put_u64(a.frame_count);
  w.put_u64(a.feature_dim);
  w.put_u64(a.model_dim);
  w.put_u64(a.transformer_layers);
  w.put_u64(a.attention_heads);
  w.put_u32(static_cast<std::uint32_t>(a.head_names.size()));
  for (const std::string& h : a.head_names) w.put_string(h);
  return w;
}

ArchConfig decode_arch(io::ByteReader& r) {
  ArchConfig a;
  a.layer_count = r.u64();
  a.frame_count = r.u64();
  a.feature_dim = r.u64();
  a.model_dim = r.u64();
  a.transformer_layers = r.u64();
  a.attention_heads = r.u64();
  const std::uint32_t heads = r.u32();
  a.head_names.clear();
  for (std::uint32_t i = 0; i < heads; ++i) a.head_names.push_back(r.string());
  a.validate();
  return a;
}

io::ByteWriter encode_train(const TrainConfig& t) {
  io::ByteWriter w;
  w.put_f64(t.lr_init);
  w.put_f64(t.plateau_factor);
  w.put_u64(t.plateau_patience);
  w.put_u64(t.early_stop_patience);
  w.put_u64(t.batch);
  w.put_u64(t.max_epochs);
  w.put_u64(t.seed);
  w.put_u8(static_cast<std::uint8_t>(t.loss));
  w.put_u8(static_cast<std::uint8_t>(t.precision));
  w.put_f64(t.val_fraction);
  w.put_f64(t.adam_beta1);
  w.put_f64(t.adam_beta2);
  w.put_f64(t.adam_eps);
  return w;
}

TrainConfig decode_train(io::ByteReader& r) {
  TrainConfig t;
  t.lr_init = r.f64();
  t.plateau_factor = r.f64();
  t.plateau_patience = r.u64();
  t.early_stop_patience = r.u64();
  t.batch = r.u64();
  t.max_epochs = r.u64();
  t.seed = r.u64();
  const std::uint8_t loss = r.u8();
  const std::uint8_t precision = r.u8();
  if (loss > 1 || precision > 1) throw FormatError("WSQC: bad enum value in training config");
  t.loss = static_cast<LossKind>(loss);
  t.precision = static_cast<Precision>(precision);
  t.val_fraction = r.f64();
  t.adam_beta1 = r.f64();
  t.adam_beta2 = r.f64();
  t.adam_eps = r.f64();
  return t;
}

template <class Real>
io::ByteWriter encode_state(const TrainState<Real>& s) {
  io::ByteWriter w;
  w.put_u64(s.epoch);
  w.put_u64(s.global_step);
  w.put_f64(s.plateau.best);
  w.put_u64(s.plateau.wait);
  w.put_f64(s.plateau.lr);
  w.put_u64(s.plateau.decays);
  w.put_f64(s.early.best);
  w.put_u64(s.early.wait);
  w.put_f64(s.best_val_loss);
  w.put_u64(s.best_epoch);
  w.put_u8(s.stopped ? 1 : 0);
  return w;
}

template <class Real>
void decode_state(io::ByteReader& r, TrainState<Real>& s) {
  s.epoch = r.u64();
  s.global_step = r.u64();
  s.plateau.best = r.f64();
  s.plateau.wait = r.u64();
  s.plateau.lr = r.f64();
  s.plateau.decays = r.u64();
  s.early.best = r.f64();
  s.early.wait = r.u64();
  s.best_val_loss = r.f64();
  s.best_epoch = r.u64();
  s.stopped = r.u8() != 0;
}

std::size_t check_frame(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "WSQC header");
  const std::string magic = r.chars(4);
  if (magic != std::string(kCheckpointMagic, 4)) throw BadMagicError("WSQC: bad magic '" + magic + "'");
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw VersionMismatchError("WSQC: unsupported version " + std::to_string(version) + " (expected " +
                               std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t length = r.u64();
  if (length != bytes.size()) {
    throw TruncatedError("WSQC: header declares " + std::to_string(length) + " bytes, file has " +
                         std::to_string(bytes.size()));
  }
  if (length < kHeaderBytes + kTrailerBytes) throw TruncatedError("WSQC: file too short");
  const auto body = bytes.subspan(0, bytes.size() - kTrailerBytes);
  io::ByteReader trailer(bytes.subspan(bytes.size() - kTrailerBytes), "WSQC trailer");
  if (trailer.u32() != crc32(body)) throw ChecksumError("WSQC: checksum mismatch");
  return r.position();
}

std::map<std::string, std::span<const std::uint8_t>> read_sections(std::span<const std::uint8_t> bytes) {
  const std::size_t start = check_frame(bytes);
  io::ByteReader r(bytes.subspan(start, bytes.size() - start - kTrailerBytes), "WSQC sections");
  std::map<std::string, std::span<const std::uint8_t>> sections;
  while (r.remaining() > 0) {
    const std::string tag = r.chars(4);
    const std::uint64_t len = r.u64();
    if (len > r.remaining()) throw TruncatedError("WSQC: section " + tag + " runs past the end of the file");
    sections[tag] = r.raw(len);
  }
  return sections;
}

std::span<const std::uint8_t> require(const std::map<std::string, std::span<const std::uint8_t>>& sections,
                                      const std::string& tag) {
  auto it = sections.find(tag);
  if (it == sections.end()) throw FormatError("WSQC: missing section " + tag);
  return it->second;
}

}  // namespace

template <class Real>
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint<Real>& c) {
  io::ByteWriter body;
  put_section(body, "ARCH", encode_arch(c.arch));
  put_section(body, "TRCF", encode_train(c.train));
  {
    io::ByteWriter w;
    put_values<Real>(w, c.params.values);
    put_section(body, "PRMS", w);
  }
  {
    io::ByteWriter w;
    put_values<Real>(w, c.state.best_params.values);
    put_section(body, "BEST", w);
  }
  {
    io::ByteWriter w;
    w.put_u64(c.state.adam.step);
    put_values<Real>(w, c.state.adam.m);
    put_values<Real>(w, c.state.adam.v);
    put_section(body, "ADAM", w);
  }
  put_section(body, "STAT", encode_state(c.state));
  {
    io::ByteWriter w;
    w.put_u64(c.history.size());
    for (const EpochRecord& e : c.history) {
      w.put_u64(e.epoch);
      w.put_f64(e.lr);
      w.put_f64(e.train_loss);
      w.put_f64(e.val_loss);
      w.put_u8(e.is_best ? 1 : 0);
    }
    put_section(body, "HIST", w);
  }

  io::ByteWriter out;
  out.put_chars({kCheckpointMagic, 4});
  out.put_u16(kCheckpointVersion);
  out.put_u64(kHeaderBytes + body.size() + kTrailerBytes);
  out.put_raw(body.bytes());
  const std::uint32_t crc = crc32(out.bytes());
  out.put_u32(crc);
  return out.take();
}

template <class Real>
Checkpoint<Real> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  const auto sections = read_sections(bytes);
  Checkpoint<Real> c;
  {
    io::ByteReader r(require(sections, "ARCH"), "WSQC ARCH");
    c.arch = decode_arch(r);
  }
  {
    io::ByteReader r(require(sections, "TRCF"), "WSQC TRCF");
    c.train = decode_train(r);
  }
  {
    io::ByteReader r(require(sections, "PRMS"), "WSQC PRMS");
    c.params.values = get_values<Real>(r);
  }
  {
    io::ByteReader r(require(sections, "BEST"), "WSQC BEST");
    c.state.best_params.values = get_values<Real>(r);
  }
  {
    io::ByteReader r(require(sections, "ADAM"), "WSQC ADAM");
    c.state.adam.step = r.u64();
    c.state.adam.m = get_values<Real>(r);
    c.state.adam.v = get_values<Real>(r);
  }
  {
    io::ByteReader r(require(sections, "STAT"), "WSQC STAT");
    decode_state(r, c.state);
  }
  {
    io::ByteReader r(require(sections, "HIST"), "WSQC HIST");
    const std::uint64_t rows = r.u64();
    for (std::uint64_t i = 0; i < rows; ++i) {
      EpochRecord e;
      e.epoch = r.u64();
      e.lr = r.f64();
      e.train_loss = r.f64();
      e.val_loss = r.f64();
      e.is_best = r.u8() != 0;
      c.history.push_back(e);
    }
  }
  const std::size_t expected = ParamLayout(c.arch).total();
  if (c.params.values.size() != expected ||
      (!c.state.best_params.values.empty() && c.state.best_params.values.size() != expected)) {
    throw FormatError("WSQC: parameter count does not match the stored architecture");
  }
  return c;
}

template <class Real>
void save_checkpoint(const Checkpoint<Real>& c, const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint(c));
}

template <class Real>
Checkpoint<Real> load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint<Real>(io::read_file(path));
  } catch (const BadMagicError& e) {
    throw BadMagicError(path.string() + ": " + e.what());
  } catch (const VersionMismatchError& e) {
    throw VersionMismatchError(path.string() + ": " + e.what());
  } catch (const TruncatedError& e) {
    throw TruncatedError(path.string() + ": " + e.what());
  } catch (const ChecksumError& e) {
    throw ChecksumError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Precision checkpoint_precision(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = io::read_file(path);
  const auto sections = read_sections(bytes);
  io::ByteReader r(require(sections, "PRMS"), "WSQC PRMS");
  const std::uint8_t code = r.u8();
  if (code > 1) throw FormatError(path.string() + ": WSQC: unknown parameter dtype " + std::to_string(code));
  return code == 0 ? Precision::f32 : Precision::f64;
}

template std::vector<std::uint8_t> encode_checkpoint<float>(const Checkpoint<float>&);
template std::vector<std::uint8_t> encode_checkpoint<double>(const Checkpoint<double>&);
template Checkpoint<float> decode_checkpoint<float>(std::span<const std::uint8_t>);
template Checkpoint<double> decode_checkpoint<double>(std::span<const std::uint8_t>);
template void save_checkpoint<float>(const Checkpoint<float>&, const std::filesystem::path&);
template void save_checkpoint<double>(const Checkpoint<double>&, const std::filesystem::path&);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace whisqa
