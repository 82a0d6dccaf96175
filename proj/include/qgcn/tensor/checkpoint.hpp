#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

// Binary parameter container, all integers little-endian:
//
//   "QGCN"            4 bytes magic
//   version           u32 (kCheckpointVersion)
//   config digest     u64
//   record count      u32
//   per record:
//     name length     u32, followed by that many UTF-8 bytes
//     shape           4 × u32 (unused trailing extents are 1)
//     payload         product(shape) × f32
namespace qgcn::tensor {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamRecord {
  std::string name;
  std::array<std::uint32_t, 4> shape{1, 1, 1, 1};
  std::vector<float> values;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t config_digest = 0;
  std::vector<ParamRecord> records;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace qgcn::tensor
