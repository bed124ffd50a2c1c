#include "xcc/ada/augment.hpp"

namespace xcc::inline XCC_PRECISION_NS {

const char* origin_name(Origin o) { return o == Origin::real ? "real" : "synthetic"; }

ImageSampler generator_sampler(const Generator& gen, std::uint64_t seed) {
    return [&gen, seed](std::size_t index) {
        RngStream rng = RngStream(seed).split(index);
        return gen.sample(1, rng).front();
    };
}

std::vector<LabeledImage> augment_dataset(const std::map<int, std::vector<GrayImage>>& real_by_class,
                                          const std::map<int, std::size_t>& targets_by_class,
                                          const std::map<int, ImageSampler>& gen_by_class) {
    std::vector<LabeledImage> out;
    for (const auto& [label, images] : real_by_class) {
        for (const GrayImage& g : images) out.push_back({g, label, Origin::real});
    }
    for (const auto& [label, target] : targets_by_class) {
        auto it = real_by_class.find(label);
        const std::size_t have = it == real_by_class.end() ? 0 : it->second.size();
        if (target < have) {
            throw ValueError("class " + std::to_string(label) + ": target " + std::to_string(target) +
                             " below real count " + std::to_string(have));
        }
        if (target == have) continue;
        auto gen = gen_by_class.find(label);
        if (gen == gen_by_class.end() || !gen->second) {
            throw ValueError("class " + std::to_string(label) + " needs synthetic images but has no generator");
        }
        for (std::size_t i = 0; i < target - have; ++i) out.push_back({gen->second(i), label, Origin::synthetic});
    }
    return out;
}

std::map<int, ClassCounts> count_by_class(const std::vector<LabeledImage>& data) {
    std::map<int, ClassCounts> counts;
    for (const LabeledImage& s : data) {
        ClassCounts& c = counts[s.label];
        ++(s.origin == Origin::real ? c.real : c.synthetic);
        ++c.total;
    }
    return counts;
}

}  // namespace xcc::inline XCC_PRECISION_NS
