#include "xcc/cli/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "xcc/cxp/resize.hpp"

namespace xcc::cli {

using Json = nlohmann::ordered_json;

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw ValueError("unknown split '" + s + "'");
}

const char* class_dir(int label) { return label == 1 ? "pneumonia" : "normal"; }

std::vector<const SampleRecord*> DatasetManifest::select(Split s) const {
    std::vector<const SampleRecord*> out;
    for (const SampleRecord& r : samples)
        if (r.split == s) out.push_back(&r);
    return out;
}

std::string DatasetManifest::to_json() const {
    Json j;
    j["samples"] = Json::array();
    for (const SampleRecord& r : samples) {
        Json s{{"id", r.id}, {"path", r.path}, {"label", r.label}, {"origin", origin_name(r.origin)},
               {"split", split_name(r.split)}};
        if (r.box) s["box"] = {{"row", r.box->row}, {"col", r.box->col}, {"height", r.box->height}, {"width", r.box->width}};
        j["samples"].push_back(std::move(s));
    }
    return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text, const std::filesystem::path& root) {
    const Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("samples") || !j["samples"].is_array()) {
        throw ValueError("manifest is not a JSON object with a samples array");
    }
    DatasetManifest m;
    m.root = root;
    try {
        for (const Json& s : j["samples"]) {
            SampleRecord r;
            r.id = s.at("id");
            r.path = s.at("path");
            r.label = s.at("label");
            if (r.label != 0 && r.label != 1) throw ValueError("manifest label must be 0 or 1 (sample " + r.id + ")");
            const std::string origin = s.value("origin", "real");
            if (origin != "real" && origin != "synthetic") throw ValueError("bad origin '" + origin + "'");
            r.origin = origin == "real" ? Origin::real : Origin::synthetic;
            r.split = parse_split(s.at("split"));
            if (s.contains("box")) {
                const Json& b = s["box"];
                r.box = PatchBox{b.at("row"), b.at("col"), b.at("height"), b.at("width")};
            }
            m.samples.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValueError(std::string("malformed manifest record: ") + e.what());
    }
    return m;
}

void assign_splits(std::vector<SampleRecord>& samples, double train_frac, double val_frac, std::uint64_t seed) {
    RngStream rng(seed);
    for (int label : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (samples[i].label == label) idx.push_back(i);
        RngStream r = rng.split(static_cast<std::uint64_t>(label) + 1);
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[r.below(i)]);
        const double n = static_cast<double>(idx.size());
        const auto n_train = static_cast<std::size_t>(std::lround(train_frac * n));
        const auto n_val = std::min(idx.size() - n_train, static_cast<std::size_t>(std::lround(val_frac * n)));
        for (std::size_t k = 0; k < idx.size(); ++k)
            samples[idx[k]].split = k < n_train ? Split::train : k < n_train + n_val ? Split::val : Split::test;
    }
}

DatasetManifest load_dataset(const std::filesystem::path& path, std::uint64_t seed) {
    namespace fs = std::filesystem;
    if (path.extension() == ".json") return DatasetManifest::from_json(read_file(path), path.parent_path());
    if (!fs::is_directory(path)) throw IoError("dataset " + path.string() + " is not a directory");
    if (fs::exists(path / kManifestName)) return DatasetManifest::from_json(read_file(path / kManifestName), path);
    DatasetManifest m;
    m.root = path;
    for (int label : {0, 1}) {
        const fs::path dir = path / class_dir(label);
        if (!fs::is_directory(dir)) continue;
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".pgm") names.push_back(e.path().filename().string());
        std::sort(names.begin(), names.end());
        for (const std::string& n : names) {
            SampleRecord r;
            r.id = std::string(class_dir(label)) + "/" + fs::path(n).stem().string();
            r.path = std::string(class_dir(label)) + "/" + n;
            r.label = label;
            r.origin = n.rfind("synthetic_", 0) == 0 ? Origin::synthetic : Origin::real;
            m.samples.push_back(std::move(r));
        }
    }
    if (m.samples.empty()) throw ValueError("no images under " + path.string() + "/{normal,pneumonia}");
    assign_splits(m.samples, 0.8, 0.1, seed);
    return m;
}

LabeledSet load_split(const DatasetManifest& m, Split s, std::size_t size) {
    LabeledSet out;
    for (const SampleRecord* r : m.select(s)) {
        GrayImage img = read_pgm(m.root / r->path);
        if (img.height != size || img.width != size) img = resize_bicubic(img, size, size);
        out.images.push_back(std::move(img));
        out.labels.push_back(r->label);
    }
    if (out.empty()) throw ValueError(std::string("split '") + split_name(s) + "' is empty");
    return out;
}

}  // namespace xcc::cli
