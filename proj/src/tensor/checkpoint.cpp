#include "qgcn/tensor/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace qgcn::tensor {
namespace {

constexpr char kMagic[4] = {'Q', 'G', 'C', 'N'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  const std::uint8_t* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw CheckpointError("corrupt checkpoint: truncated");
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint32_t u32() {
    const auto* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, ckpt.version);
  put_u64(out, ckpt.config_digest);
  put_u32(out, static_cast<std::uint32_t>(ckpt.records.size()));
  for (const auto& rec : ckpt.records) {
    std::size_t count = 1;
    for (auto e : rec.shape) count *= e;
    if (count != rec.values.size()) {
      throw CheckpointError("record '" + rec.name + "' payload does not match its shape");
    }
    put_u32(out, static_cast<std::uint32_t>(rec.name.size()));
    out.insert(out.end(), rec.name.begin(), rec.name.end());
    for (auto e : rec.shape) put_u32(out, e);
    for (float v : rec.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  if (std::memcmp(in.take(4), kMagic, 4) != 0) throw CheckpointError("corrupt checkpoint: bad magic");
  Checkpoint ckpt;
  ckpt.version = in.u32();
  if (ckpt.version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  ckpt.config_digest = in.u64();
  const std::uint32_t n = in.u32();
  for (std::uint32_t r = 0; r < n; ++r) {
    ParamRecord rec;
    const std::uint32_t len = in.u32();
    const auto* name = in.take(len);
    rec.name.assign(reinterpret_cast<const char*>(name), len);
    std::uint64_t count = 1;
    for (auto& e : rec.shape) {
      e = in.u32();
      count *= e;
    }
    if (count > bytes.size()) throw CheckpointError("corrupt checkpoint: implausible shape for '" + rec.name + "'");
    rec.values.resize(count);
    for (auto& v : rec.values) v = std::bit_cast<float>(in.u32());
    ckpt.records.push_back(std::move(rec));
  }
  if (!in.done()) throw CheckpointError("corrupt checkpoint: trailing bytes");
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("write failed for '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace qgcn::tensor
