#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "orange/model.hpp"

namespace orange {

// Weight archive, all integers little-endian:
//
//   magic        8 bytes  "ORNGWTS1"
//   arch         u32 length + UTF-8 ("resnet18", "squeezenet1_1", ...)
//   num_classes  u32
//   flags        u8       bit 0: pretrained normalization
//   count        u32      number of records
//   record       u32 name length + UTF-8 name
//                u8 dtype (0 = f32)
//                u32 rank, rank x u32 dims
//                product(dims) x f32
//
// Records hold parameters followed by batch-norm buffers, each in network
// registration order. Encoding is canonical, so decode/encode is
// byte-identical.
struct WeightRecord {
    std::string name;
    std::vector<std::uint32_t> shape;
    std::vector<float> values;

    friend bool operator==(const WeightRecord&, const WeightRecord&) = default;
};

struct WeightArchive {
    std::string architecture;
    std::uint32_t num_classes = 0;
    bool pretrained = false;
    std::vector<WeightRecord> records;

    const WeightRecord* find(const std::string& name) const;

    friend bool operator==(const WeightArchive&, const WeightArchive&) = default;
};

std::vector<std::uint8_t> encode_archive(const WeightArchive& archive);
WeightArchive decode_archive(std::span<const std::uint8_t> bytes);

void save_archive(const WeightArchive& archive, const std::filesystem::path& path);
// Throws WeightsFileMissing if the file does not exist, MalformedArchive if
// it cannot be decoded.
WeightArchive load_archive(const std::filesystem::path& path);

WeightArchive export_weights(const ModelHandle& model);

// Copies matching records into the model. With backbone_only the head is
// left untouched and the archive may have a different class count.
// Throws WeightShapeMismatch on missing names or differing shapes.
void import_weights(ModelHandle& model, const WeightArchive& archive, bool backbone_only);

void save_model(const ModelHandle& model, const std::filesystem::path& path);
ModelHandle load_model(const std::filesystem::path& path);

}  // namespace orange
