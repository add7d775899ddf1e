#pragma once

// Residual extraction and fingerprint estimation.
//
// A residual is the element-wise difference between a clip's average
// log-spectral energy and that of its filtered version. A fingerprint is the
// mean residual of one synthesis system together with the Cholesky factor of
// the shrinkage-regularized sample covariance, plus every configuration field
// needed to reproduce scoring later.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "afp/audio.hpp"
#include "afp/error.hpp"
#include "afp/fir.hpp"
#include "afp/linalg.hpp"
#include "afp/spectrum.hpp"

namespace afp {

inline constexpr int kFingerprintFormatVersion = 1;

struct ResidualVector {
    std::vector<double> values; // length F, decibel differences
    StftConfig config;
    int sample_rate = 0;
    std::string filter_id;
};

/// The filtering method behind a set of residuals: either a designed FIR
/// filter (spec + coefficients) or an external method known only by tag,
/// e.g. a neural codec applied outside this library.
struct FilterInfo {
    bool external = false;
    std::string tag;                  // external only
    FilterSpec spec{};                // designed only
    std::vector<double> coefficients; // designed only

    std::string id() const {
        return external ? "external:" + tag : spec.describe();
    }

    static FilterInfo from_filter(const FirFilter& filter) {
        FilterInfo info;
        info.external = false;
        info.spec = filter.spec;
        info.coefficients = filter.coefficients;
        return info;
    }

    static FilterInfo from_tag(const std::string& tag) {
        FilterInfo info;
        info.external = true;
        info.tag = tag;
        return info;
    }
};

struct Fingerprint {
    std::string label;
    std::vector<double> mean;        // length F
    std::vector<double> chol_factor; // packed lower triangle, F(F+1)/2
    double shrinkage = 0.0;
    int n_train = 0;
    StftConfig stft;
    int sample_rate = 0;
    FilterInfo filter;

    std::size_t dim() const { return mean.size(); }
};

/// R = E_x - E_f(x) for a designed FIR filter.
inline ResidualVector residual(const AudioSignal& signal,
                               const FirFilter& filter,
                               const StftConfig& config) {
    const EnergyVector original = average_energy(signal, config);
    const EnergyVector filtered =
        average_energy(apply_fir(signal, filter), config);
    ResidualVector out;
    out.config = config;
    out.sample_rate = signal.sample_rate;
    out.filter_id = filter.id;
    out.values.resize(original.values.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = original.values[i] - filtered.values[i];
    }
    return out;
}

/// R = E_original - E_filtered for a pre-filtered companion produced by any
/// external method. Durations may differ; the energies are duration-
/// normalized averages.
inline ResidualVector residual_from_pair(const AudioSignal& original,
                                         const AudioSignal& filtered,
                                         const StftConfig& config,
                                         const std::string& tag = "external") {
    require(original.sample_rate == filtered.sample_rate,
            "residual_from_pair: sample-rate mismatch (" +
                std::to_string(original.sample_rate) + " vs " +
                std::to_string(filtered.sample_rate) + ")");
    const EnergyVector e_orig = average_energy(original, config);
    const EnergyVector e_filt = average_energy(filtered, config);
    ResidualVector out;
    out.config = config;
    out.sample_rate = original.sample_rate;
    out.filter_id = "external:" + tag;
    out.values.resize(e_orig.values.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = e_orig.values[i] - e_filt.values[i];
    }
    return out;
}

/// Mean residual plus Cholesky factor of (sample covariance + shrinkage * I).
///
/// The mean uses exact accumulation, so it is bit-identical under any
/// reordering of the residual collection. The covariance uses the unbiased
/// (N-1) denominator and is the zero matrix for N = 1. When `shrinkage` is
/// not given it defaults to 1e-3 * trace(Sigma)/F, floored at 1e-12 so the
/// factorization is defined even for degenerate covariances.
inline Fingerprint
estimate_fingerprint(const std::string& label,
                     const std::vector<ResidualVector>& residuals,
                     std::optional<double> shrinkage = std::nullopt,
                     std::optional<FilterInfo> filter = std::nullopt) {
    require(!residuals.empty(), "estimate_fingerprint: no residuals");
    const ResidualVector& first = residuals.front();
    const std::size_t dim = first.values.size();
    require(dim >= 1, "estimate_fingerprint: empty residual vectors");
    for (const ResidualVector& r : residuals) {
        require(r.config == first.config && r.sample_rate == first.sample_rate,
                "estimate_fingerprint: mixed STFT configs among residuals");
        require(r.filter_id == first.filter_id,
                "estimate_fingerprint: mixed filter methods among residuals (" +
                    r.filter_id + " vs " + first.filter_id + ")");
        require(r.values.size() == dim,
                "estimate_fingerprint: mixed residual dimensions");
    }
    if (filter) {
        require(filter->id() == first.filter_id,
                "estimate_fingerprint: filter metadata (" + filter->id() +
                    ") does not match residual filter_id (" + first.filter_id +
                    ")");
    }
    if (shrinkage) {
        require(*shrinkage >= 0.0,
                "estimate_fingerprint: shrinkage must be >= 0");
    }

    const std::size_t n = residuals.size();
    Fingerprint fp;
    fp.label = label;
    fp.n_train = static_cast<int>(n);
    fp.stft = first.config;
    fp.sample_rate = first.sample_rate;
    fp.filter = filter ? *filter : FilterInfo::from_tag(
                                       first.filter_id.rfind("external:", 0) ==
                                               0
                                           ? first.filter_id.substr(9)
                                           : first.filter_id);

    fp.mean.resize(dim);
    for (std::size_t f = 0; f < dim; ++f) {
        ExactSum acc;
        for (const ResidualVector& r : residuals) {
            acc.add(r.values[f]);
        }
        fp.mean[f] = acc.value() / static_cast<double>(n);
    }

    std::vector<double> cov(dim * dim, 0.0);
    if (n >= 2) {
        std::vector<double> centered(dim);
        for (const ResidualVector& r : residuals) {
            for (std::size_t f = 0; f < dim; ++f) {
                centered[f] = r.values[f] - fp.mean[f];
            }
            for (std::size_t i = 0; i < dim; ++i) {
                const double ci = centered[i];
                double* row = cov.data() + i * dim;
                for (std::size_t j = 0; j <= i; ++j) {
                    row[j] += ci * centered[j];
                }
            }
        }
        const double denom = static_cast<double>(n - 1);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = cov[i * dim + j] / denom;
                cov[i * dim + j] = v;
                cov[j * dim + i] = v;
            }
        }
    }

    if (shrinkage) {
        fp.shrinkage = *shrinkage;
    } else {
        double trace = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            trace += cov[i * dim + i];
        }
        fp.shrinkage = 1e-3 * trace / static_cast<double>(dim);
        if (fp.shrinkage < 1e-12) {
            fp.shrinkage = 1e-12;
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        cov[i * dim + i] += fp.shrinkage;
    }
    fp.chol_factor = cholesky_packed(cov, dim);
    return fp;
}

namespace detail {

inline nlohmann::json filter_to_json(const FilterInfo& info) {
    nlohmann::json j;
    if (info.external) {
        j["kind"] = "external";
        j["tag"] = info.tag;
    } else {
        j["kind"] = to_string(info.spec.kind);
        j["edge_lo"] = info.spec.edge_lo;
        if (info.spec.is_band()) {
            j["edge_hi"] = info.spec.edge_hi;
        }
        j["transition_width"] = info.spec.transition_width;
        j["stopband_atten_db"] = info.spec.stopband_atten_db;
        j["coefficients"] = info.coefficients;
    }
    return j;
}

inline FilterInfo filter_from_json(const nlohmann::json& j) {
    FilterInfo info;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "external") {
        info.external = true;
        info.tag = j.at("tag").get<std::string>();
    } else {
        info.external = false;
        info.spec.kind = filter_kind_from_string(kind);
        info.spec.edge_lo = j.at("edge_lo").get<double>();
        info.spec.edge_hi = j.value("edge_hi", 0.0);
        info.spec.transition_width = j.at("transition_width").get<double>();
        info.spec.stopband_atten_db = j.at("stopband_atten_db").get<double>();
        info.coefficients = j.at("coefficients").get<std::vector<double>>();
    }
    return info;
}

inline void validate_fingerprint(const Fingerprint& fp,
                                 const std::string& where) {
    const std::size_t dim = fp.mean.size();
    if (dim != static_cast<std::size_t>(fp.stft.bins())) {
        throw Error("fingerprint dimension inconsistency: mean has " +
                    std::to_string(dim) + " entries but the STFT config " +
                    "yields " + std::to_string(fp.stft.bins()) + " bins" +
                    (where.empty() ? "" : " (" + where + ")"));
    }
    if (fp.chol_factor.size() != tri_size(dim)) {
        throw Error("fingerprint dimension inconsistency: factor size " +
                    std::to_string(fp.chol_factor.size()) + " != " +
                    std::to_string(tri_size(dim)) +
                    (where.empty() ? "" : " (" + where + ")"));
    }
    require(fp.n_train >= 1, "fingerprint: n_train must be >= 1" +
                                 (where.empty() ? "" : " (" + where + ")"));
    require(fp.sample_rate > 0, "fingerprint: invalid sample rate" +
                                    (where.empty() ? "" : " (" + where + ")"));
    for (double v : fp.mean) {
        require(std::isfinite(v), "fingerprint: non-finite mean entry" +
                                      (where.empty() ? "" : " (" + where + ")"));
    }
    for (std::size_t i = 0; i < dim; ++i) {
        const double diag = fp.chol_factor[tri_index(i, i)];
        require(std::isfinite(diag) && diag > 0.0,
                "fingerprint: factor diagonal must be strictly positive" +
                    (where.empty() ? "" : " (" + where + ")"));
    }
    for (double v : fp.chol_factor) {
        require(std::isfinite(v), "fingerprint: non-finite factor entry" +
                                      (where.empty() ? "" : " (" + where + ")"));
    }
}

} // namespace detail

/// Serialize as a self-describing JSON document. nlohmann's number output is
/// shortest round-trip decimal, so a save/load cycle is lossless.
inline void save_fingerprint(const Fingerprint& fp,
                             const std::filesystem::path& path) {
    detail::validate_fingerprint(fp, "");
    nlohmann::json j;
    j["format_version"] = kFingerprintFormatVersion;
    j["label"] = fp.label;
    j["sample_rate"] = fp.sample_rate;
    j["stft"] = {{"window_len", fp.stft.window_len},
                 {"hop", fp.stft.hop},
                 {"window_kind", to_string(fp.stft.window_kind)}};
    j["filter"] = detail::filter_to_json(fp.filter);
    j["n_train"] = fp.n_train;
    j["shrinkage"] = fp.shrinkage;
    j["mean"] = fp.mean;
    j["chol_factor"] = fp.chol_factor;
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

inline Fingerprint load_fingerprint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open fingerprint file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("corrupted fingerprint file " + path.string() + ": " +
                      e.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kFingerprintFormatVersion) {
            throw Error("fingerprint format version mismatch in " +
                        path.string() + ": file has " +
                        std::to_string(version) + ", expected " +
                        std::to_string(kFingerprintFormatVersion));
        }
        Fingerprint fp;
        fp.label = j.at("label").get<std::string>();
        fp.sample_rate = j.at("sample_rate").get<int>();
        const nlohmann::json& stft = j.at("stft");
        fp.stft.window_len = stft.at("window_len").get<int>();
        fp.stft.hop = stft.at("hop").get<int>();
        fp.stft.window_kind =
            window_kind_from_string(stft.at("window_kind").get<std::string>());
        fp.filter = detail::filter_from_json(j.at("filter"));
        fp.n_train = j.at("n_train").get<int>();
        fp.shrinkage = j.at("shrinkage").get<double>();
        fp.mean = j.at("mean").get<std::vector<double>>();
        fp.chol_factor = j.at("chol_factor").get<std::vector<double>>();
        fp.stft.validate();
        detail::validate_fingerprint(fp, path.string());
        return fp;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("corrupted fingerprint file " + path.string() + ": " +
                      e.what());
    }
}

} // namespace afp
