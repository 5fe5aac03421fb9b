#pragma once

// Power-scaled aggregation of judge scores on the 0..5 scale. Raising the
// exponent compresses mid-range scores toward 0 while leaving perfect
// scores untouched, which spreads out the top of the scale.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "boss/common.hpp"

namespace boss::score {

// No principled choice exists for the exponent; 2 is just the shipped
// default and callers should treat it as tunable.
inline constexpr double k_default_power = 2.0;

struct ScoreBatch {
    std::vector<double> raw_scores;
    double power = k_default_power;

    void validate() const {
        ensure(!raw_scores.empty(), "score batch: empty");
        ensure(std::isfinite(power) && power >= 1.0,
               "score batch: power must be >= 1");
        for (size_t i = 0; i < raw_scores.size(); ++i) {
            ensure(std::isfinite(raw_scores[i]) && raw_scores[i] >= 0.0 &&
                       raw_scores[i] <= 5.0,
                   "score batch: score " + std::to_string(i) +
                       " outside [0, 5]");
        }
    }
};

// (100 / |S|) * sum over s in S of (s/5)^power
inline double power_scaled_average(const ScoreBatch& batch) {
    batch.validate();
    double total = 0.0;
    for (double s : batch.raw_scores) {
        total += std::pow(s / 5.0, batch.power);
    }
    return 100.0 * total / static_cast<double>(batch.raw_scores.size());
}

// Repeated judgments of one item.
struct ItemJudgments {
    std::string id;
    std::vector<double> scores;
};

struct ScoreReport {
    struct Item {
        std::string id;
        double mean_raw = 0.0;
        double scaled = 0.0;  // (mean_raw / 5)^power, in [0, 1]
    };
    std::vector<Item> items;
    double power = k_default_power;
    double overall = 0.0;  // 100 * mean of per-item scaled values
};

// Average each item's judgments first, then apply the power scaling to the
// per-item mean, then average the scaled values across items.
inline ScoreReport aggregate_repeated(std::span<const ItemJudgments> judgments,
                                      double power) {
    ensure(!judgments.empty(), "aggregate_repeated: no items");
    ensure(std::isfinite(power) && power >= 1.0,
           "aggregate_repeated: power must be >= 1");
    ScoreReport report;
    report.power = power;
    report.items.reserve(judgments.size());
    double scaled_total = 0.0;
    for (const auto& item : judgments) {
        ScoreBatch batch{item.scores, power};
        batch.validate();
        double mean = 0.0;
        for (double s : item.scores) mean += s;
        mean /= static_cast<double>(item.scores.size());
        ScoreReport::Item out;
        out.id = item.id;
        out.mean_raw = mean;
        out.scaled = std::pow(mean / 5.0, power);
        scaled_total += out.scaled;
        report.items.push_back(std::move(out));
    }
    report.overall = 100.0 * scaled_total / static_cast<double>(judgments.size());
    return report;
}

}  // namespace boss::score
