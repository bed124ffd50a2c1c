#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <set>
#include <sstream>

#include "acceptance/criteria.hpp"

namespace fs = std::filesystem;
using namespace acceptance;

// Criteria with a documented open failure. A FAIL here is reported but does
// not fail the run; an unexpected FAIL, or a PASS here, is flagged.
const std::set<int> kKnownOpen{7, 10};

int main(int argc, char** argv) {
    // optional: argv[1] work dir, argv[2] comma list of criteria to run
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "xcc_acceptance";
    std::set<int> only;
    if (argc > 2) {
        std::stringstream ss(argv[2]);
        for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    }
    if (only.empty()) fs::remove_all(work);
    fs::create_directories(work);
    std::vector<SeedRun> runs;
    if (!only.empty() && !only.count(7)) runs = existing_runs(work);

    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, gradient_suite},
        {2, dilated_conv_oracles},
        {3, preprocessing_oracles},
        {4, adain_moments},
        {5, loss_identities},
        {6, metrics_algebra},
        {7, [&] { return end_to_end(work, runs); }},
        {8, gan_smoke},
        {9, [&] { return segmentation(work); }},
        {10, [&] { return explainability(work, runs); }},
        {11, [&] { return persistence(work); }},
    };
    int failed = 0, unexpected = 0;
    for (const auto& [id, run] : criteria) {
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool open = kKnownOpen.count(id) > 0;
        std::printf("criterion %2d: %s (%.1fs) %s%s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str(),
                    o.pass == open ? (open ? " [known open, now passing]" : "") : (open ? " [known open]" : ""));
        std::fflush(stdout);
        failed += !o.pass;
        unexpected += !o.pass && !open;
    }
    std::printf("%d of %zu criteria failed, %d unexpected\n", failed, only.empty() ? criteria.size() : only.size(),
                unexpected);
    const bool strict = std::getenv("XCC_ACCEPTANCE_STRICT") != nullptr;
    return (strict ? failed : unexpected) > 0 ? 1 : 0;
}
