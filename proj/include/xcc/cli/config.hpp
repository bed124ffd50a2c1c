#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcc/ada/gan.hpp"
#include "xcc/cxp/preprocess.hpp"
#include "xcc/cxp/rib.hpp"
#include "xcc/cxp/segmentation.hpp"
#include "xcc/fusion/train.hpp"

namespace xcc::cli {

using Json = nlohmann::json;

/// Every recognised key with its default value. Sections: synth, preprocess,
/// seg, rib, gan, model, train, explain; plus the top-level seed.
Json default_config();

/// Defaults, overlaid by the file (if any), then by `key.path=value`
/// overrides (value parsed as JSON, falling back to a string), then by an
/// explicit seed. Unknown keys and type changes throw ValueError.
Json load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides,
                 const std::optional<std::uint64_t>& seed);

/// Recursive overlay with strict key and type checking.
void merge_strict(Json& base, const Json& overlay, const std::string& where = "");
void apply_override(Json& cfg, const std::string& assignment);

/// Canonical text of the effective config, written beside every output.
std::string config_echo(const Json& cfg);

std::uint64_t config_seed(const Json& cfg);

struct SynthConfig {
    std::size_t size = 64;
    std::size_t train = 600, val = 100, test = 100;  // per split, balanced across classes
    double noise = 0.03;
};

SynthConfig synth_config(const Json& cfg);
PreprocessConfig preprocess_config(const Json& cfg);
SegConfig seg_config(const Json& cfg);
RibConfig rib_config(const Json& cfg);
AdaConfig ada_config(const Json& cfg);
XccConfig model_config(const Json& cfg);
TrainConfig train_config(const Json& cfg);

}  // namespace xcc::cli
