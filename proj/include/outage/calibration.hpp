#pragma once

#include <cstdint>
#include <vector>

#include "outage/bayes_net.hpp"
#include "outage/gibbs.hpp"

namespace outage {

/// Split sequences: 2n rows of m samples each, built from n chains.
struct ChainMatrix {
    std::vector<std::vector<double>> rows;
    std::size_t n = 0; // original chain count
    std::size_t m = 0; // row length
};

/// Drops floor(warmup * length) leading samples of every sequence, truncates
/// one trailing sample if the rest is odd, and splits each into two halves.
ChainMatrix split_and_stack(const std::vector<std::vector<double>>& sequences,
                            double warmup = 0.0);

struct RHat {
    double B = 0.0; // between-sequence variance
    double V = 0.0; // within-sequence variance
    double R = 1.0;
    /// V = 0: every row is constant. R is 1 when B = 0 too, else +inf.
    bool degenerate = false;
};

/// Potential scale reduction with the original chain count n:
///   B = m/(2n-1) sum_j (mean_j - mean)^2,  V = 1/(2n) sum_j s_j^2,
///   R = sqrt(((n-1)/n V + B/n) / V).
RHat r_hat(const ChainMatrix& matrix);

/// Same statistic from per-row means and unbiased variances.
RHat r_hat_from_moments(const std::vector<double>& means,
                        const std::vector<double>& variances, std::size_t n,
                        std::size_t m);

/// One evidence scenario to calibrate on. All cases must share a feeder.
struct CalibrationCase {
    BayesNet bn;
    Assignment evidence;
};

struct CalibrationConfig {
    std::vector<std::size_t> sweep = {500, 1000, 2000, 4000, 8000};
    std::size_t chains = 10;
    double threshold = 1.1;
    double warmup = 0.5;
    ScanOrder scan_order = ScanOrder::Topological;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SweepPoint {
    std::size_t iterations = 0;
    /// Per unknown (BayesNet::unknowns() order): worst R over the cases.
    std::vector<double> r;
    double max_r = 0.0;
    std::size_t degenerate = 0; // variables degenerate in every case
    bool converged = false;
};

struct CalibrationResult {
    std::vector<SweepPoint> points;
    /// Smallest converged sweep point, or the last point when none is.
    std::size_t chosen = 0;
    bool converged = false;
    std::vector<NodeRef> variables;

    std::size_t iterations() const { return points[chosen].iterations; }
};

/// Runs cfg.chains chains of max(sweep) iterations per case and evaluates
/// every swept M on the chain prefixes of length M.
CalibrationResult calibrate_iterations(const std::vector<CalibrationCase>& cases,
                                       const CalibrationConfig& cfg);

} // namespace outage
