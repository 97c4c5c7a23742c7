#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "orange/domain.hpp"

namespace orange {

// On-disk layout:
//   root/manifest.csv          header "sample_id,label,num_views"
//   root/<sample_id>/view_NN.png  NN = 00 .. num_views-1, 8-bit RGB
struct ManifestRow {
    std::string sample_id;
    std::string label_text;
    int view_count = 0;

    friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

inline constexpr const char* kManifestHeader = "sample_id,label,num_views";
inline constexpr int kMaxViews = 100;

// True for non-empty ids made only of [A-Za-z0-9_-].
bool is_valid_sample_id(const std::string& id);

std::string view_filename(int index);

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestRow>& rows, const std::filesystem::path& path);
std::vector<ManifestRow> manifest_rows(const Dataset& dataset);

// Loads root/manifest.csv, or `manifest` (rows still resolved under root)
// when given. Dataset order is manifest order.
Dataset load_dataset(const std::filesystem::path& root);
Dataset load_dataset(const std::filesystem::path& root, const std::filesystem::path& manifest);

void write_dataset(const Dataset& dataset, const std::filesystem::path& root);

}  // namespace orange
