#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xcc/ada/augment.hpp"
#include "xcc/cxp/phantoms.hpp"
#include "xcc/fusion/train.hpp"

namespace xcc::cli {

enum class Split { train, val, test };

const char* split_name(Split s);
Split parse_split(const std::string& s);

struct SampleRecord {
    std::string id;
    std::string path;  // relative to the manifest root
    int label = 0;     // 0 normal, 1 pneumonia
    Origin origin = Origin::real;
    Split split = Split::train;
    std::optional<PatchBox> box;  // planted patch, synthetic corpora only
};

/// Class directories `normal/` and `pneumonia/` under `root`, one record per image.
struct DatasetManifest {
    std::filesystem::path root;
    std::vector<SampleRecord> samples;

    std::vector<const SampleRecord*> select(Split s) const;
    std::string to_json() const;
    /// Throws ValueError on malformed records (labels must be 0 or 1).
    static DatasetManifest from_json(const std::string& text, const std::filesystem::path& root);
};

constexpr const char* kManifestName = "manifest.json";

const char* class_dir(int label);

/// Seeded shuffle, then contiguous slicing per class into train/val/test.
/// Counts are round(frac * n) for train and val, the rest for test.
void assign_splits(std::vector<SampleRecord>& samples, double train_frac, double val_frac, std::uint64_t seed);

/// Manifest from `root/manifest.json`, or (if absent) from the class
/// directories with seeded 80/10/10 splits. A path to a .json file is read directly.
DatasetManifest load_dataset(const std::filesystem::path& path, std::uint64_t seed);

/// Images of one split, resized bicubically to `size` when they differ.
/// Throws ValueError when the split is empty.
LabeledSet load_split(const DatasetManifest& m, Split s, std::size_t size);

}  // namespace xcc::cli
