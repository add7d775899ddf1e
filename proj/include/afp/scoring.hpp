#pragma once

// Scoring residuals against fingerprints and the decision rules built on
// those scores: argmax/argmin attribution, validation threshold sweep and
// training-free synthetic-vs-real detection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "afp/error.hpp"
#include "afp/fingerprint.hpp"
#include "afp/linalg.hpp"

namespace afp {

enum class ScoreKind { correlation, mahalanobis };

inline std::string to_string(ScoreKind kind) {
    return kind == ScoreKind::correlation ? "correlation" : "mahalanobis";
}

inline ScoreKind score_kind_from_string(const std::string& s) {
    if (s == "correlation") {
        return ScoreKind::correlation;
    }
    if (s == "mahalanobis") {
        return ScoreKind::mahalanobis;
    }
    throw Error("unknown score kind: " + s);
}

enum class SampleClass { synthetic, real };

struct AttributionResult {
    std::string predicted_label;
    double score = 0.0;
    ScoreKind score_kind = ScoreKind::mahalanobis;
    std::map<std::string, double> per_candidate;
};

struct DetectionThreshold {
    double tau = 0.0;
    double calibration_f1 = 0.0;
};

struct DetectionResult {
    SampleClass decision = SampleClass::real;
    double min_distance = 0.0;
    std::string nearest_label;
};

namespace detail {

/// Zero-mean, unit-norm transform; errors on constant input.
inline std::vector<double> standardize(const std::vector<double>& v,
                                       const std::string& what) {
    double mean = 0.0;
    for (double x : v) {
        mean += x;
    }
    mean /= static_cast<double>(v.size());
    std::vector<double> out(v.size());
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = v[i] - mean;
        norm_sq += out[i] * out[i];
    }
    if (norm_sq <= 0.0) {
        throw Error("correlation_score: " + what +
                    " is constant (zero variance), normalization undefined");
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : out) {
        x *= inv;
    }
    return out;
}

} // namespace detail

/// Pearson correlation of the zero-mean unit-norm residual against the
/// zero-mean unit-norm fingerprint mean; in [-1, 1].
inline double correlation_score(const ResidualVector& r,
                                const Fingerprint& fp) {
    require(r.values.size() == fp.dim(),
            "correlation_score: dimension mismatch (" +
                std::to_string(r.values.size()) + " vs " +
                std::to_string(fp.dim()) + ")");
    const std::vector<double> rn = detail::standardize(r.values, "residual");
    const std::vector<double> fn =
        detail::standardize(fp.mean, "fingerprint mean");
    double dot = 0.0;
    for (std::size_t i = 0; i < rn.size(); ++i) {
        dot += rn[i] * fn[i];
    }
    return dot;
}

/// sqrt((r - mean)^T (Sigma + eps I)^-1 (r - mean)), evaluated as the norm of
/// the forward-substitution solve against the stored Cholesky factor.
inline double mahalanobis_score(const ResidualVector& r,
                                const Fingerprint& fp) {
    require(r.values.size() == fp.dim(),
            "mahalanobis_score: dimension mismatch (" +
                std::to_string(r.values.size()) + " vs " +
                std::to_string(fp.dim()) + ")");
    require(fp.n_train >= 2,
            "mahalanobis_score: fingerprint '" + fp.label +
                "' was built from a single residual; n_train >= 2 required");
    std::vector<double> diff(r.values.size());
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = r.values[i] - fp.mean[i];
    }
    return norm2(forward_solve_packed(fp.chol_factor, diff.size(), diff));
}

/// Score against every fingerprint; argmax for correlation, argmin for
/// Mahalanobis. Exact ties go to the lexicographically smallest label.
inline AttributionResult attribute_multi(const ResidualVector& r,
                                         const std::vector<Fingerprint>& fps,
                                         ScoreKind kind) {
    require(!fps.empty(), "attribute_multi: empty fingerprint set");
    const Fingerprint& first = fps.front();
    for (const Fingerprint& fp : fps) {
        require(fp.stft == first.stft && fp.sample_rate == first.sample_rate &&
                    fp.filter.id() == first.filter.id(),
                "attribute_multi: mixed configs among fingerprints ('" +
                    fp.label + "' vs '" + first.label + "')");
    }
    AttributionResult result;
    result.score_kind = kind;
    bool have_best = false;
    for (const Fingerprint& fp : fps) {
        require(result.per_candidate.find(fp.label) ==
                    result.per_candidate.end(),
                "attribute_multi: duplicate fingerprint label '" + fp.label +
                    "'");
        const double s = kind == ScoreKind::correlation
                             ? correlation_score(r, fp)
                             : mahalanobis_score(r, fp);
        result.per_candidate[fp.label] = s;
        const bool better =
            kind == ScoreKind::correlation ? s > result.score : s < result.score;
        const bool tie_break = s == result.score && fp.label < result.predicted_label;
        if (!have_best || better || tie_break) {
            have_best = true;
            result.score = s;
            result.predicted_label = fp.label;
        }
    }
    return result;
}

/// Pick the threshold maximizing F1 of "distance < tau => synthetic" on
/// validation data. Candidates are midpoints between consecutive distinct
/// distances plus one sentinel below the minimum and one above the maximum;
/// F1 ties are broken toward the larger tau.
inline DetectionThreshold
sweep_threshold(const std::vector<double>& min_distances,
                const std::vector<SampleClass>& labels) {
    require(min_distances.size() == labels.size(),
            "sweep_threshold: distances and labels differ in length");
    require(!min_distances.empty(), "sweep_threshold: empty input");
    std::size_t n_synthetic = 0;
    for (SampleClass c : labels) {
        if (c == SampleClass::synthetic) {
            ++n_synthetic;
        }
    }
    require(n_synthetic > 0 && n_synthetic < labels.size(),
            "sweep_threshold: both classes must be present (F1 degenerate)");

    std::vector<std::pair<double, SampleClass>> sorted(min_distances.size());
    for (std::size_t i = 0; i < min_distances.size(); ++i) {
        require(std::isfinite(min_distances[i]),
                "sweep_threshold: non-finite distance");
        sorted[i] = {min_distances[i], labels[i]};
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<double> candidates;
    candidates.push_back(sorted.front().first - 1.0);
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (sorted[i].first != sorted[i + 1].first) {
            candidates.push_back((sorted[i].first + sorted[i + 1].first) / 2.0);
        }
    }
    candidates.push_back(sorted.back().first + 1.0);

    DetectionThreshold best{candidates.front(), -1.0};
    std::size_t idx = 0; // entries with distance < current candidate
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (double tau : candidates) {
        while (idx < sorted.size() && sorted[idx].first < tau) {
            if (sorted[idx].second == SampleClass::synthetic) {
                ++tp;
            } else {
                ++fp;
            }
            ++idx;
        }
        const std::size_t fn = n_synthetic - tp;
        const std::size_t denom = 2 * tp + fp + fn;
        const double f1 =
            denom == 0 ? 0.0
                       : 2.0 * static_cast<double>(tp) /
                             static_cast<double>(denom);
        if (f1 > best.calibration_f1 ||
            (f1 == best.calibration_f1 && tau > best.tau)) {
            best.calibration_f1 = f1;
            best.tau = tau;
        }
    }
    return best;
}

/// Minimum Mahalanobis distance over the fingerprint set; synthetic iff the
/// minimum is strictly below tau.
inline DetectionResult detect(const ResidualVector& r,
                              const std::vector<Fingerprint>& fps,
                              const DetectionThreshold& threshold) {
    const AttributionResult attribution =
        attribute_multi(r, fps, ScoreKind::mahalanobis);
    DetectionResult result;
    result.min_distance = attribution.score;
    result.nearest_label = attribution.predicted_label;
    result.decision = attribution.score < threshold.tau ? SampleClass::synthetic
                                                        : SampleClass::real;
    return result;
}

} // namespace afp
