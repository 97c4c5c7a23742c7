#include "orange/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "orange/error.hpp"

namespace fs = std::filesystem;

namespace orange {

bool is_valid_sample_id(const std::string& id) {
    if (id.empty()) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_' || c == '-';
    });
}

std::string view_filename(int index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 2) digits.insert(0, 2 - digits.size(), '0');
    return "view_" + digits + ".png";
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string malformed(std::size_t line_no, const std::string& why) {
    return "line " + std::to_string(line_no) + ": " + why;
}

}  // namespace

std::vector<ManifestRow> read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, path.string());

    std::vector<ManifestRow> rows;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
            if (line != kManifestHeader) {
                throw Error(ErrorCode::MalformedHeader, path.string() + ": '" + line + "'");
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        const auto fields = split_fields(line);
        if (fields.size() != 3) {
            throw Error(ErrorCode::MalformedRow, malformed(line_no, "expected 3 fields"));
        }
        ManifestRow row{fields[0], fields[1], 0};
        if (!is_valid_sample_id(row.sample_id)) {
            throw Error(ErrorCode::MalformedRow, malformed(line_no, "invalid sample id '" + row.sample_id + "'"));
        }
        const auto& count = fields[2];
        const auto [end, ec] = std::from_chars(count.data(), count.data() + count.size(), row.view_count);
        if (ec != std::errc{} || end != count.data() + count.size()) {
            throw Error(ErrorCode::MalformedRow, malformed(line_no, "num_views is not an integer"));
        }
        if (row.view_count < 1 || row.view_count > kMaxViews) {
            throw Error(ErrorCode::MalformedRow, malformed(line_no, "num_views out of range 1..100"));
        }
        if (!seen.insert(row.sample_id).second) {
            throw Error(ErrorCode::DuplicateSampleId, "'" + row.sample_id + "'");
        }
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw Error(ErrorCode::MalformedHeader, path.string() + ": empty file");
    return rows;
}

void write_manifest(const std::vector<ManifestRow>& rows, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, path.string());
    out << kManifestHeader << '\n';
    for (const auto& row : rows) {
        out << row.sample_id << ',' << row.label_text << ',' << row.view_count << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, path.string());
}

std::vector<ManifestRow> manifest_rows(const Dataset& dataset) {
    std::vector<ManifestRow> rows;
    rows.reserve(dataset.size());
    for (const auto& s : dataset) {
        rows.push_back({s.id, std::string(render(s.label)), static_cast<int>(s.views.size())});
    }
    return rows;
}

Dataset load_dataset(const fs::path& root) { return load_dataset(root, root / "manifest.csv"); }

Dataset load_dataset(const fs::path& root, const fs::path& manifest) {
    const auto rows = read_manifest(manifest);

    std::vector<OrangeSample> samples(rows.size());
    std::vector<std::exception_ptr> failures(rows.size());
    auto load_one = [&](std::size_t i) {
        try {
            const auto& row = rows[i];
            OrangeSample sample;
            sample.id = row.sample_id;
            try {
                sample.label = parse_grade(row.label_text);
            } catch (const Error& e) {
                throw Error(ErrorCode::UnknownLabel, "sample '" + row.sample_id + "': '" + row.label_text + "'");
            }
            for (int v = 0; v < row.view_count; ++v) {
                const auto file = root / row.sample_id / view_filename(v);
                if (!fs::is_regular_file(file)) {
                    throw Error(ErrorCode::MissingViewFile,
                                "sample '" + row.sample_id + "' view " + std::to_string(v) + " (" + file.string() + ")");
                }
                sample.views.push_back(read_png(file));
            }
            samples[i] = std::move(sample);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };

    // Decode in parallel; slots are indexed so the result keeps manifest order.
    const std::size_t workers =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(rows.size(), 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) load_one(i);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < rows.size(); i += workers) load_one(i);
            });
        }
    }
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
    return Dataset(std::move(samples));
}

void write_dataset(const Dataset& dataset, const fs::path& root) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw Error(ErrorCode::IoError, root.string() + ": " + ec.message());

    for (const auto& sample : dataset) {
        if (!is_valid_sample_id(sample.id)) {
            throw Error(ErrorCode::InvalidArgument, "sample id '" + sample.id + "' is not writable");
        }
        if (sample.views.size() > static_cast<std::size_t>(kMaxViews)) {
            throw Error(ErrorCode::InvalidArgument, "sample '" + sample.id + "' has more than 100 views");
        }
    }
    for (const auto& sample : dataset) {
        const auto dir = root / sample.id;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::IoError, dir.string() + ": " + ec.message());
        for (std::size_t v = 0; v < sample.views.size(); ++v) {
            write_png(sample.views[v], dir / view_filename(static_cast<int>(v)));
        }
    }
    write_manifest(manifest_rows(dataset), root / "manifest.csv");
}

}  // namespace orange
