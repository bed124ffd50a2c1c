#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// double-precision criteria
Outcome gradient_suite();         // 1
Outcome dilated_conv_oracles();   // 2
Outcome preprocessing_oracles();  // 3
Outcome adain_moments();          // 4
Outcome loss_identities();        // 5
Outcome metrics_algebra();        // 6

// end-to-end runs through the CLI, single precision
struct SeedRun {
    unsigned seed = 0;
    std::filesystem::path data, combined, ce_only;
};

/// Runs left in `work` by an earlier end_to_end call.
std::vector<SeedRun> existing_runs(const std::filesystem::path& work);

Outcome end_to_end(const std::filesystem::path& work, std::vector<SeedRun>& runs);  // 7
Outcome gan_smoke();                                                                // 8
Outcome segmentation(const std::filesystem::path& work);                            // 9
Outcome explainability(const std::filesystem::path& work, const std::vector<SeedRun>& runs);  // 10
Outcome persistence(const std::filesystem::path& work);                             // 11

}  // namespace acceptance
