#include "xcc/cli/synth.hpp"

#include <cstdio>

namespace xcc::cli {

std::vector<SynthSample> generate_corpus(const SynthConfig& cfg, std::uint64_t seed) {
    RngStream root(seed);
    const BlobSpec spec{cfg.size, cfg.noise};
    std::vector<SynthSample> out;
    const std::pair<Split, std::size_t> splits[] = {{Split::train, cfg.train}, {Split::val, cfg.val}, {Split::test, cfg.test}};
    for (const auto& [split, count] : splits) {
        for (int label : {0, 1}) {
            const std::size_t n = label == 0 ? (count + 1) / 2 : count / 2;
            RngStream stream = root.split(static_cast<std::uint64_t>(split) * 2 + static_cast<std::uint64_t>(label) + 1);
            for (std::size_t i = 0; i < n; ++i) {
                RngStream rng = stream.split(i);
                SynthSample s;
                s.sample = make_blob_sample(spec, label, rng);
                char name[64];
                std::snprintf(name, sizeof name, "%s_%04zu", split_name(split), i);
                s.record.id = std::string(class_dir(label)) + "/" + name;
                s.record.path = s.record.id + ".pgm";
                s.record.label = label;
                s.record.split = split;
                s.record.box = s.sample.box;
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

DatasetManifest write_corpus(const std::vector<SynthSample>& corpus, const std::filesystem::path& out) {
    std::filesystem::create_directories(out / class_dir(0));
    std::filesystem::create_directories(out / class_dir(1));
    DatasetManifest m;
    m.root = out;
    nlohmann::ordered_json boxes = nlohmann::ordered_json::object();
    for (const SynthSample& s : corpus) {
        write_pgm(out / s.record.path, s.sample.image);
        m.samples.push_back(s.record);
        if (s.record.box) {
            const PatchBox& b = *s.record.box;
            boxes[s.record.id] = {{"row", b.row}, {"col", b.col}, {"height", b.height}, {"width", b.width}};
        }
    }
    write_file(out / kManifestName, m.to_json());
    write_file(out / "boxes.json", boxes.dump(2) + "\n");
    return m;
}

}  // namespace xcc::cli
