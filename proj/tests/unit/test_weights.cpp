#include <doctest.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "orange/error.hpp"
#include "orange/model.hpp"
#include "orange/rng.hpp"
#include "orange/weights.hpp"
#include "../support/temp_dir.hpp"

using namespace orange;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

WeightArchive tiny_archive() {
    WeightArchive a;
    a.architecture = "resnet18";
    a.num_classes = 3;
    a.pretrained = true;
    a.records.push_back({"w", {2, 1}, {1.5f, -2.0f}});
    a.records.push_back({"b", {}, {0.25f}});
    return a;
}

}  // namespace

TEST_CASE("archive encoding follows the documented layout") {
    const auto bytes = encode_archive(tiny_archive());
    std::vector<std::uint8_t> expected;
    auto u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) expected.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    auto str = [&](const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        expected.insert(expected.end(), s.begin(), s.end());
    };
    auto f32 = [&](float f) {
        std::uint32_t v;
        std::memcpy(&v, &f, 4);
        u32(v);
    };
    for (char c : std::string("ORNGWTS1")) expected.push_back(static_cast<std::uint8_t>(c));
    str("resnet18");
    u32(3);
    expected.push_back(1);
    u32(2);
    str("w");
    expected.push_back(0);
    u32(2);
    u32(2);
    u32(1);
    f32(1.5f);
    f32(-2.0f);
    str("b");
    expected.push_back(0);
    u32(0);
    f32(0.25f);
    CHECK(bytes == expected);
    CHECK(decode_archive(bytes) == tiny_archive());
}

TEST_CASE("malformed archives are rejected") {
    auto bytes = encode_archive(tiny_archive());
    auto expect_malformed = [](std::span<const std::uint8_t> b) {
        try {
            decode_archive(b);
            FAIL("decoded");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MalformedArchive);
        }
    };
    for (std::size_t cut : {std::size_t{0}, std::size_t{4}, std::size_t{12}, bytes.size() - 1}) {
        expect_malformed(std::span(bytes).first(cut));
    }
    auto trailing = bytes;
    trailing.push_back(0);
    expect_malformed(trailing);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    expect_malformed(bad_magic);
    auto bad_dtype = bytes;
    // dtype byte of the first record: 8 magic + 12 arch + 4 classes + 1 flags + 4 count + 5 name
    bad_dtype[34] = 7;
    expect_malformed(bad_dtype);
}

TEST_CASE("save/load/save is byte identical for both architectures") {
    test::TempDir dir;
    for (auto kind : {ArchitectureKind::ResNet18, ArchitectureKind::SqueezeNet}) {
        const auto m = build_model(kind, 3, false, std::nullopt, 11);
        save_model(m, dir.path() / "a.weights");
        const auto loaded = load_model(dir.path() / "a.weights");
        save_model(loaded, dir.path() / "b.weights");
        CHECK(read_bytes(dir.path() / "a.weights") == read_bytes(dir.path() / "b.weights"));
        CHECK(loaded.kind() == kind);
        CHECK(export_weights(loaded) == export_weights(m));
    }
}

TEST_CASE("loaded models predict identically") {
    test::TempDir dir;
    const auto m = build_model(ArchitectureKind::ResNet18, 3, false, std::nullopt, 12);
    save_model(m, dir.path() / "m.weights");
    const auto loaded = load_model(dir.path() / "m.weights");
    nn::Tensor x({2, 3, 32, 64});
    Rng rng(1);
    for (auto& v : x.data()) v = static_cast<float>(rng.normal());
    CHECK(loaded.forward(x) == m.forward(x));
}

TEST_CASE("load errors") {
    test::TempDir dir;
    try {
        load_archive(dir.path() / "missing.weights");
        FAIL("loaded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WeightsFileMissing);
    }
    std::ofstream(dir.path() / "junk.weights") << "junk";
    try {
        load_archive(dir.path() / "junk.weights");
        FAIL("loaded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedArchive);
    }
}

TEST_CASE("import requires every record") {
    auto m = build_model(ArchitectureKind::SqueezeNet, 3, false, std::nullopt, 1);
    auto archive = export_weights(m);
    archive.records.erase(archive.records.begin() + 3);
    try {
        import_weights(m, archive, false);
        FAIL("imported");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WeightShapeMismatch);
    }
}
