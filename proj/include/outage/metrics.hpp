#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace outage {

/// Binary confusion counts; the positive class is de-energized (1).
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o);
};

ConfusionCounts confusion(std::span<const int> pred,
                          std::span<const int> truth);
/// Throws ValidationError when the key sets differ.
ConfusionCounts confusion(const std::map<std::string, int>& pred,
                          const std::map<std::string, int>& truth);

/// Branch-level metrics plus system-level accuracy. Precision, recall and
/// F-score are empty when their denominator is zero; aggregate() excludes
/// them from the mean and counts them.
struct MetricReport {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    double beta = 1.0;
    /// For one scenario: 1 when every branch and customer is right.
    std::optional<double> system_accuracy;

    std::size_t scenarios = 1;
    std::size_t undefined_precision = 0;
    std::size_t undefined_recall = 0;
    std::size_t undefined_f1 = 0;
};

MetricReport metrics(const ConfusionCounts& c, double beta = 1.0);

/// Macro average over scenarios: mean of each defined per-scenario value.
MetricReport aggregate(std::span<const MetricReport> reports);

} // namespace outage
