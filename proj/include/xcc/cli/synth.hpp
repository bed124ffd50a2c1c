#pragma once

#include <filesystem>

#include "xcc/cli/config.hpp"
#include "xcc/cli/dataset.hpp"

namespace xcc::cli {

struct SynthSample {
    SampleRecord record;
    BlobSample sample;
};

/// The corpus in memory: each split balanced across the two classes
/// (class 0 takes the odd one), deterministic under `seed`.
std::vector<SynthSample> generate_corpus(const SynthConfig& cfg, std::uint64_t seed);

/// Writes `normal/` and `pneumonia/` PGMs, manifest.json and boxes.json
/// (patch ground truth by sample id) under `out`.
DatasetManifest write_corpus(const std::vector<SynthSample>& corpus, const std::filesystem::path& out);

}  // namespace xcc::cli
