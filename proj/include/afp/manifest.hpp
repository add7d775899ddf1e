#pragma once

// Dataset manifests: comma-separated text with header `path,label,split`
// (split optional). Relative paths resolve against the manifest's directory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "afp/error.hpp"
#include "afp/rng.hpp"

namespace afp {

enum class Split { none, train, val, test };

inline std::string to_string(Split s) {
    switch (s) {
    case Split::none:
        return "";
    case Split::train:
        return "train";
    case Split::val:
        return "val";
    case Split::test:
        return "test";
    }
    return "";
}

inline Split split_from_string(const std::string& s) {
    if (s.empty()) {
        return Split::none;
    }
    if (s == "train") {
        return Split::train;
    }
    if (s == "val") {
        return Split::val;
    }
    if (s == "test") {
        return Split::test;
    }
    throw Error("unknown split value: '" + s + "'");
}

struct ManifestEntry {
    std::string path;
    std::string label;
    Split split = Split::none;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir; // anchor for relative entry paths

    std::filesystem::path resolve(const ManifestEntry& entry) const {
        const std::filesystem::path p(entry.path);
        return p.is_absolute() ? p : base_dir / p;
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const ManifestEntry& e : entries) {
            if (std::find(out.begin(), out.end(), e.label) == out.end()) {
                out.push_back(e.label);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;

    void validate() const {
        require(train >= 0.0 && val >= 0.0 && test >= 0.0,
                "split ratios must be nonnegative");
        const double sum = train + val + test;
        require(std::fabs(sum - 1.0) <= 1e-9,
                "split ratios must sum to 1 (got " + std::to_string(sum) + ")");
    }

    int nonzero_count() const {
        return (train > 0.0 ? 1 : 0) + (val > 0.0 ? 1 : 0) +
               (test > 0.0 ? 1 : 0);
    }
};

inline Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest: " + path.string());
    }
    Manifest m;
    m.base_dir = path.has_parent_path() ? path.parent_path()
                                        : std::filesystem::path(".");
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (!saw_header) {
            if (fields.size() < 2 || fields[0] != "path" ||
                fields[1] != "label" ||
                (fields.size() == 3 && fields[2] != "split") ||
                fields.size() > 3) {
                throw IoError("manifest " + path.string() +
                              ": expected header 'path,label[,split]', got '" +
                              line + "'");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() < 2 || fields.size() > 3) {
            throw IoError("manifest " + path.string() + " line " +
                          std::to_string(line_no) + ": expected 2 or 3 fields");
        }
        ManifestEntry entry;
        entry.path = fields[0];
        entry.label = fields[1];
        entry.split =
            fields.size() == 3 ? split_from_string(fields[2]) : Split::none;
        if (entry.path.empty() || entry.label.empty()) {
            throw IoError("manifest " + path.string() + " line " +
                          std::to_string(line_no) + ": empty path or label");
        }
        m.entries.push_back(std::move(entry));
    }
    if (!saw_header) {
        throw IoError("manifest " + path.string() + ": missing header");
    }
    return m;
}

inline void save_manifest(const Manifest& m,
                          const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "path,label,split\n";
    for (const ManifestEntry& e : m.entries) {
        out << e.path << "," << e.label << "," << to_string(e.split) << "\n";
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

/// Per-label stratified split. Counts are floor-based with the remainder
/// going to train; the shuffle stream is derived per label so one label's
/// assignment does not depend on the others. With `respect_existing`,
/// entries that already carry a split keep it and only the rest are
/// distributed.
inline Manifest split_manifest(const Manifest& manifest,
                               const SplitRatios& ratios, std::uint64_t seed,
                               bool respect_existing = false) {
    ratios.validate();
    Manifest out = manifest;
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
        if (respect_existing && out.entries[i].split != Split::none) {
            continue;
        }
        by_label[out.entries[i].label].push_back(i);
    }
    for (auto& [label, indices] : by_label) {
        require(indices.size() >=
                    static_cast<std::size_t>(ratios.nonzero_count()),
                "split_manifest: label '" + label + "' has " +
                    std::to_string(indices.size()) +
                    " entries, fewer than the " +
                    std::to_string(ratios.nonzero_count()) +
                    " nonzero splits requested");
        Rng rng(derive_seed(seed, "split:" + label));
        rng.shuffle(indices);
        const std::size_t n = indices.size();
        const std::size_t n_val =
            static_cast<std::size_t>(ratios.val * static_cast<double>(n));
        const std::size_t n_test =
            static_cast<std::size_t>(ratios.test * static_cast<double>(n));
        const std::size_t n_train = n - n_val - n_test; // remainder to train
        for (std::size_t k = 0; k < n; ++k) {
            Split s = Split::train;
            if (k >= n_train && k < n_train + n_val) {
                s = Split::val;
            } else if (k >= n_train + n_val) {
                s = Split::test;
            }
            out.entries[indices[k]].split = s;
        }
    }
    return out;
}

} // namespace afp
