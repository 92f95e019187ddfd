#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmdc/config.hpp"
#include "lmdc/ddpg.hpp"

namespace lmdc {

// On-disk layout, little-endian throughout:
//   "LMDC"  4-byte magic
//   u32     format version
//   u32     metadata byte length
//   ...     metadata: "key = value" text (config snapshot, network shapes,
//           step count, seed, payload digest)
//   ...     payload: float32 parameters, nets in order actor, critic,
//           target_actor, target_critic, each layer as weights then biases.
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointErrorKind {
  io,                // file missing or unreadable
  truncated,         // shorter than the declared layout
  bad_magic,         // not a checkpoint file
  version_mismatch,  // produced by an incompatible format revision
  bad_metadata,      // metadata text does not parse
  bad_hash,          // payload digest mismatch, file corrupted
};

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

struct Checkpoint {
  RunConfig config;  // full snapshot of the run that produced the weights
  long trained_steps = 0;
  std::uint64_t seed = 0;
  AgentParams agent;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

// Atomic write; load throws CheckpointError with a kind-specific message.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lmdc
