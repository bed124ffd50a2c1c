#include "xcc/fusion/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "xcc/cxp/image.hpp"

namespace xcc::inline XCC_PRECISION_NS {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

void put_str(std::string& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

class Reader {
 public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* what) {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::string get_str(const char* what) {
        const auto n = get<std::uint32_t>(what);
        need(n, what);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    void get_raw(void* dst, std::size_t n, const char* what) {
        need(n, what);
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }

    bool done() const { return pos_ == bytes_.size(); }

 private:
    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) throw TruncatedError(std::string("checkpoint truncated while reading ") + what);
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

const CheckpointSegment* Checkpoint::find(const std::string& name) const {
    for (const auto& s : segments)
        if (s.name == name) return &s;
    return nullptr;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
    std::string out = "XCCN";
    put<std::uint32_t>(out, ckpt.version);
    put<std::uint64_t>(out, ckpt.seed);
    put_str(out, ckpt.config);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.segments.size()));
    for (const auto& s : ckpt.segments) {
        if (shape_numel(s.shape) != s.values.size()) throw ShapeError("segment " + s.name + ": shape/value mismatch");
        put_str(out, s.name);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(s.shape.size()));
        for (std::size_t d : s.shape) put<std::uint64_t>(out, d);
        out.append(reinterpret_cast<const char*>(s.values.data()), s.values.size() * sizeof(float));
    }
    return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
    if (bytes.size() < 4 || bytes.compare(0, 4, "XCCN") != 0) throw BadMagicError("not a checkpoint: bad magic");
    Reader r(bytes);
    r.get<std::uint32_t>("magic");
    Checkpoint c;
    c.version = r.get<std::uint32_t>("version");
    if (c.version != kCheckpointVersion) {
        throw VersionMismatchError("checkpoint version " + std::to_string(c.version) + " cannot be read (expected " +
                                   std::to_string(kCheckpointVersion) + "); re-export it with a matching build");
    }
    c.seed = r.get<std::uint64_t>("seed");
    c.config = r.get_str("config");
    const auto count = r.get<std::uint32_t>("segment count");
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointSegment s;
        s.name = r.get_str("segment name");
        const auto rank = r.get<std::uint32_t>("segment rank");
        if (rank > 8) throw CheckpointError("segment " + s.name + ": implausible rank");
        for (std::uint32_t k = 0; k < rank; ++k) s.shape.push_back(r.get<std::uint64_t>("segment dims"));
        const std::size_t n = shape_numel(s.shape);
        if (n > bytes.size()) throw TruncatedError("checkpoint truncated in segment " + s.name);
        s.values.resize(n);
        r.get_raw(s.values.data(), n * sizeof(float), "segment payload");
        c.segments.push_back(std::move(s));
    }
    if (!r.done()) throw CheckpointError("trailing bytes after the last segment");
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const std::string bytes = encode_checkpoint(ckpt);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    write_file(tmp, bytes);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const IoError& e) {
        throw CheckpointError(e.what());
    }
    return decode_checkpoint(bytes);
}

Checkpoint capture(const NamedTensors& tensors, std::uint64_t seed, const std::string& config) {
    Checkpoint c;
    c.seed = seed;
    c.config = config;
    for (const auto& [name, t] : tensors) {
        CheckpointSegment s{name, t.shape(), {}};
        s.values.reserve(t.numel());
        for (Real v : t.data()) s.values.push_back(static_cast<float>(v));
        c.segments.push_back(std::move(s));
    }
    return c;
}

void restore(const Checkpoint& ckpt, const NamedTensors& dst) {
    for (const auto& [name, t] : dst) {
        const CheckpointSegment* s = ckpt.find(name);
        if (s == nullptr) throw CheckpointError("checkpoint has no segment '" + name + "'");
        if (s->shape != t.shape()) {
            throw CheckpointError("segment '" + name + "' has shape " + shape_str(s->shape) + ", model expects " +
                                  shape_str(t.shape()));
        }
        Tensor target = t;
        for (std::size_t i = 0; i < s->values.size(); ++i) target[i] = static_cast<Real>(s->values[i]);
    }
}

}  // namespace xcc::inline XCC_PRECISION_NS
