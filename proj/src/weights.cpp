#include "orange/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "orange/error.hpp"

namespace fs = std::filesystem;

namespace orange {

namespace {

constexpr char kMagic[8] = {'O', 'R', 'N', 'G', 'W', 'T', 'S', '1'};
constexpr std::uint8_t kDtypeF32 = 0;

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8() {
        need(1);
        return in_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
        return v;
    }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    bool at_end() const { return pos_ == in_.size(); }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw Error(ErrorCode::MalformedArchive, "truncated archive");
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

std::size_t element_count(const std::vector<std::uint32_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::vector<std::uint32_t> to_u32_shape(const nn::Shape& shape) {
    return {shape.begin(), shape.end()};
}

std::string shape_text(const std::vector<std::uint32_t>& shape) {
    return nn::shape_string(nn::Shape(shape.begin(), shape.end()));
}

}  // namespace

const WeightRecord* WeightArchive::find(const std::string& name) const {
    for (const auto& r : records) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

std::vector<std::uint8_t> encode_archive(const WeightArchive& archive) {
    Writer w;
    w.raw(kMagic, sizeof(kMagic));
    w.str(archive.architecture);
    w.u32(archive.num_classes);
    w.u8(archive.pretrained ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(archive.records.size()));
    for (const auto& r : archive.records) {
        if (r.values.size() != element_count(r.shape)) {
            throw Error(ErrorCode::MalformedArchive, "record '" + r.name + "' data does not match its shape");
        }
        w.str(r.name);
        w.u8(kDtypeF32);
        w.u32(static_cast<std::uint32_t>(r.shape.size()));
        for (auto d : r.shape) w.u32(d);
        for (float v : r.values) w.f32(v);
    }
    return w.take();
}

WeightArchive decode_archive(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw Error(ErrorCode::MalformedArchive, "bad magic");
    }
    Reader r(bytes.subspan(sizeof(kMagic)));
    WeightArchive archive;
    archive.architecture = r.str();
    archive.num_classes = r.u32();
    const auto flags = r.u8();
    if (flags > 1) throw Error(ErrorCode::MalformedArchive, "unknown header flags");
    archive.pretrained = (flags & 1) != 0;
    const auto count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        WeightRecord rec;
        rec.name = r.str();
        if (r.u8() != kDtypeF32) throw Error(ErrorCode::MalformedArchive, "record '" + rec.name + "': unsupported dtype");
        const auto rank = r.u32();
        if (rank > 8) throw Error(ErrorCode::MalformedArchive, "record '" + rec.name + "': rank too large");
        for (std::uint32_t d = 0; d < rank; ++d) rec.shape.push_back(r.u32());
        const auto n = element_count(rec.shape);
        if (n > r.remaining() / 4) throw Error(ErrorCode::MalformedArchive, "truncated archive");
        rec.values.resize(n);
        for (auto& v : rec.values) v = r.f32();
        archive.records.push_back(std::move(rec));
    }
    if (!r.at_end()) throw Error(ErrorCode::MalformedArchive, "trailing bytes");
    return archive;
}

void save_archive(const WeightArchive& archive, const fs::path& path) {
    const auto bytes = encode_archive(archive);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, path.string());
}

WeightArchive load_archive(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::WeightsFileMissing, path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_archive(bytes);
}

WeightArchive export_weights(const ModelHandle& model) {
    WeightArchive archive;
    archive.architecture = model.architecture_name();
    archive.num_classes = static_cast<std::uint32_t>(model.num_classes());
    archive.pretrained = model.pretrained();
    auto add = [&](const std::string& name, const nn::Tensor& t) {
        archive.records.push_back({name, to_u32_shape(t.shape()), {t.data().begin(), t.data().end()}});
    };
    for (const auto& [name, t] : model.parameters()) add(name, *t);
    for (const auto& [name, t] : model.buffers()) add(name, *t);
    return archive;
}

void import_weights(ModelHandle& model, const WeightArchive& archive, bool backbone_only) {
    if (archive.architecture != model.architecture_name()) {
        throw Error(ErrorCode::WeightShapeMismatch,
                    "architecture: expected " + model.architecture_name() + ", found " + archive.architecture);
    }
    auto copy_into = [&](const std::string& name, nn::Tensor& target) {
        if (backbone_only && model.is_head(name)) return;
        const auto expected = to_u32_shape(target.shape());
        const auto* rec = archive.find(name);
        if (!rec) {
            throw Error(ErrorCode::WeightShapeMismatch, name + ": expected " + shape_text(expected) + ", found missing");
        }
        if (rec->shape != expected) {
            throw Error(ErrorCode::WeightShapeMismatch,
                        name + ": expected " + shape_text(expected) + ", found " + shape_text(rec->shape));
        }
        std::copy(rec->values.begin(), rec->values.end(), target.data().begin());
    };
    const auto& state = model.state();
    for (const auto& p : state.params) copy_into(p.name, *p.value);
    for (const auto& b : state.buffers) copy_into(b.name, *b.value);
}

void save_model(const ModelHandle& model, const fs::path& path) { save_archive(export_weights(model), path); }

ModelHandle load_model(const fs::path& path) {
    const auto archive = load_archive(path);
    nn::SqueezeNetVersion version = nn::SqueezeNetVersion::V1_1;
    ArchitectureKind kind;
    if (archive.architecture == "resnet18") {
        kind = ArchitectureKind::ResNet18;
    } else if (archive.architecture == "squeezenet1_1" || archive.architecture == "squeezenet1_0") {
        kind = ArchitectureKind::SqueezeNet;
        if (archive.architecture == "squeezenet1_0") version = nn::SqueezeNetVersion::V1_0;
    } else {
        throw Error(ErrorCode::MalformedArchive, "unknown architecture '" + archive.architecture + "'");
    }
    ModelHandle model(kind, archive.num_classes, archive.pretrained, version);
    import_weights(model, archive, /*backbone_only=*/false);
    return model;
}

}  // namespace orange
