// SPDX-License-Identifier: Apache-2.0
#include "timegrad/engine/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "timegrad/error.hpp"

namespace timegrad::engine {

namespace {

constexpr char kMagic[8] = {'T', 'G', 'C', 'K', 'P', 'T', '\0', '\0'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_ += s;
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  const char* bytes(std::size_t n, const char* what) {
    if (n > in_.size() - pos_) {
      throw CheckpointTruncatedError("checkpoint truncated while reading " + std::string(what) +
                                     " at byte " + std::to_string(pos_));
    }
    const char* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint64_t uint(int width, const char* what) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes(static_cast<std::size_t>(width), what));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) { return uint(8, what); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string str(const char* what) {
    const std::uint64_t n = u64(what);
    return std::string(bytes(static_cast<std::size_t>(n), what), static_cast<std::size_t>(n));
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const TimeGradModel& model, double best_validation_loss,
                              std::uint64_t seed) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.str(serialize_config(model.config()));
  w.f64(best_validation_loss);
  w.u64(seed);
  const auto& entries = model.params().entries();
  w.u64(entries.size());
  for (const auto& e : entries) {
    w.str(e.name);
    w.u64(e.value.rank());
    for (std::size_t d : e.value.shape()) w.u64(d);
    for (double v : e.value.data()) w.f64(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  const char* magic = r.bytes(sizeof kMagic, "magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw CheckpointError("not a checkpoint file (bad magic)");
  const auto version = static_cast<std::uint32_t>(r.uint(4, "version"));
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint format version " + std::to_string(version) +
                                 " is not supported (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
  }
  const ModelConfig config = parse_model_config(r.str("config"));
  const double best = r.f64("best validation loss");
  const std::uint64_t seed = r.u64("seed");

  Checkpoint ck{TimeGradModel(config, 0), best, seed};
  auto& entries = ck.model.params().entries();
  const std::uint64_t count = r.u64("parameter count");
  if (count != entries.size()) {
    throw CheckpointShapeError("checkpoint holds " + std::to_string(count) +
                               " parameters, configuration implies " + std::to_string(entries.size()));
  }
  for (auto& e : entries) {
    const std::string name = r.str("parameter name");
    if (name != e.name) {
      throw CheckpointShapeError("parameter '" + name + "' found where '" + e.name + "' was expected");
    }
    const std::uint64_t rank = r.u64("rank");
    if (rank != e.value.rank()) {
      throw CheckpointShapeError("parameter '" + name + "' has rank " + std::to_string(rank) +
                                 ", expected " + std::to_string(e.value.rank()));
    }
    num::Shape shape;
    for (std::uint64_t i = 0; i < rank; ++i) shape.push_back(static_cast<std::size_t>(r.u64("dims")));
    if (shape != e.value.shape()) {
      throw CheckpointShapeError("parameter '" + name + "' has shape " + num::shape_str(shape) +
                                 ", expected " + num::shape_str(e.value.shape()));
    }
    auto values = e.value.mutable_data();
    for (double& v : values) v = r.f64("parameter values");
  }
  if (!r.done()) throw CheckpointError("trailing bytes after the last parameter");
  return ck;
}

void save_checkpoint(const std::string& path, const TimeGradModel& model,
                     double best_validation_loss, std::uint64_t seed) {
  const std::string bytes = encode_checkpoint(model, best_validation_loss, seed);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace timegrad::engine
