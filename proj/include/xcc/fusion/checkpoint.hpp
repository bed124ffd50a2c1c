#pragma once

// Binary checkpoint layout (all integers little-endian):
//   "XCCN" | u32 version | u64 seed | u32 n + n bytes config JSON
//   | u32 segment count | segments
// segment: u32 n + n bytes name | u32 rank | u64 dims[rank] | f32 values[numel]

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xcc/tensor/layers.hpp"

namespace xcc::inline XCC_PRECISION_NS {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointSegment {
    std::string name;
    Shape shape;
    std::vector<float> values;
};

struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    std::uint64_t seed = 0;
    std::string config;  // JSON text
    std::vector<CheckpointSegment> segments;

    const CheckpointSegment* find(const std::string& name) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
/// Throws BadMagicError, VersionMismatchError or TruncatedError.
Checkpoint decode_checkpoint(const std::string& bytes);

/// Written to a temporary sibling and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Snapshot of named tensors as segments.
Checkpoint capture(const NamedTensors& tensors, std::uint64_t seed, const std::string& config);
/// Copies every segment named in `dst` into the tensor of that name.
/// Throws CheckpointError for a missing segment or a shape mismatch.
void restore(const Checkpoint& ckpt, const NamedTensors& dst);

}  // namespace xcc::inline XCC_PRECISION_NS
