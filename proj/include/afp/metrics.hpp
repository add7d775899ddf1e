#pragma once

// Rank-based AUROC and macro-averaged classification metrics.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "afp/error.hpp"

namespace afp {

/// Mann-Whitney AUROC with 0.5 credit per tied pair. Convention: higher
/// score means more positive, so callers negate Mahalanobis distances.
inline double auroc(const std::vector<double>& scores,
                    const std::vector<std::uint8_t>& positive) {
    require(scores.size() == positive.size(),
            "auroc: scores and labels differ in length");
    require(!scores.empty(), "auroc: empty input");
    std::size_t n_pos = 0;
    for (std::uint8_t p : positive) {
        if (p) {
            ++n_pos;
        }
    }
    const std::size_t n_neg = scores.size() - n_pos;
    require(n_pos > 0 && n_neg > 0, "auroc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });

    // Rank sum of positives with average ranks over ties. Ranks are exact
    // multiples of 0.5, so the statistic is exact in double precision.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        const double avg_rank = (static_cast<double>(i + 1) +
                                 static_cast<double>(j)) /
                                2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (positive[order[k]]) {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    const double n_pos_d = static_cast<double>(n_pos);
    const double u = rank_sum_pos - n_pos_d * (n_pos_d + 1.0) / 2.0;
    return u / (n_pos_d * static_cast<double>(n_neg));
}

struct MacroMetrics {
    double accuracy = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// One-vs-rest precision/recall/F1 per class present in the truths,
/// unweighted-averaged; classes never predicted contribute precision 0.
inline MacroMetrics macro_metrics(const std::vector<std::string>& predictions,
                                  const std::vector<std::string>& truths) {
    require(predictions.size() == truths.size(),
            "macro_metrics: predictions and truths differ in length");
    require(!truths.empty(), "macro_metrics: empty input");

    std::map<std::string, std::size_t> tp;
    std::map<std::string, std::size_t> predicted_count;
    std::map<std::string, std::size_t> truth_count;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        ++truth_count[truths[i]];
        ++predicted_count[predictions[i]];
        if (predictions[i] == truths[i]) {
            ++tp[truths[i]];
            ++correct;
        }
    }

    MacroMetrics m;
    m.accuracy =
        static_cast<double>(correct) / static_cast<double>(truths.size());
    const double n_classes = static_cast<double>(truth_count.size());
    for (const auto& [label, support] : truth_count) {
        const double tp_c = static_cast<double>(
            tp.count(label) ? tp.at(label) : 0);
        const double pred_c = static_cast<double>(
            predicted_count.count(label) ? predicted_count.at(label) : 0);
        const double precision_c = pred_c > 0.0 ? tp_c / pred_c : 0.0;
        const double recall_c = tp_c / static_cast<double>(support);
        const double f1_c = precision_c + recall_c > 0.0
                                ? 2.0 * precision_c * recall_c /
                                      (precision_c + recall_c)
                                : 0.0;
        m.precision += precision_c / n_classes;
        m.recall += recall_c / n_classes;
        m.f1 += f1_c / n_classes;
    }
    return m;
}

} // namespace afp
