#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "outage/bayes_net.hpp"
#include "outage/evidence.hpp"
#include "outage/feeder.hpp"
#include "outage/params.hpp"

namespace outage {

enum class ScanOrder { Topological, Random };

ScanOrder parse_scan_order(const std::string& s); // "topo" | "random"
const char* to_string(ScanOrder s);

struct GibbsConfig {
    std::size_t iterations = 4000; // M
    double burn_in = 0.0;          // fraction of each chain discarded
    ScanOrder scan_order = ScanOrder::Topological;
    std::size_t chains = 1;
    std::uint64_t seed = 0;
    /// Keep full sample sequences (needed for convergence diagnostics).
    bool keep_samples = true;

    void validate() const;
};

/// Samples of every unknown vertex, iteration-major: value of unknown u at
/// iteration t is `values[t * unknown_count + u]`, where u indexes
/// BayesNet::unknowns().
struct ChainTrace {
    std::size_t unknown_count = 0;
    std::size_t iterations = 0;
    std::vector<std::uint8_t> values; // empty unless samples were kept
    /// Per-unknown count of ones over the retained (post burn-in) samples.
    std::vector<std::uint64_t> retained_ones;
    std::size_t retained = 0;

    int at(std::size_t iteration, std::size_t unknown) const {
        return values[iteration * unknown_count + unknown];
    }
    /// Sequence of one unknown across all iterations.
    std::vector<double> sequence(std::size_t unknown) const;
};

/// Number of leading samples discarded for a burn-in fraction.
std::size_t burn_in_count(std::size_t iterations, double burn_in);

/// One Gibbs chain. Unknowns start uniformly at random (any value with zero
/// probability given upstream values and downstream hard evidence is
/// flipped), evidence stays clamped, and each iteration resamples every
/// unknown once from its local conditional. Deterministic in
/// (cfg.seed, chain_index).
ChainTrace run_chain(const BayesNet& bn, const Assignment& evidence,
                     const GibbsConfig& cfg, std::size_t chain_index);

/// Fraction of ones after dropping the burn-in prefix. Throws when nothing
/// is retained.
double estimate_marginal(std::span<const double> samples, double burn_in);
std::vector<double>
estimate_marginals(const std::vector<std::vector<double>>& sequences,
                   double burn_in);

struct PosteriorEstimate {
    std::vector<double> branch_marginals;   // P(D_i = 1 | E), by branch
    std::vector<double> customer_marginals; // P(C = 1 | E), by customer
    std::vector<int> decided_branches;
    std::vector<int> decided_customers;
    std::vector<std::size_t> locations; // branch indices, ascending
    std::vector<ChainTrace> chain_samples;
};

/// A state is decided de-energized iff its marginal is strictly above 0.5.
int decide_state(double marginal);

/// Fills the decided states and outage locations from the marginals.
void decide_and_locate(const FeederTopology& t, PosteriorEstimate& est);

/// Runs cfg.chains chains (in parallel) and pools their retained samples.
PosteriorEstimate infer(const BayesNet& bn, const FeederTopology& t,
                        const EvidenceSet& ev, const GibbsConfig& cfg);

/// Episode parameters for a seed: Beta priors are drawn once, fixed values
/// pass through.
EpisodeParams draw_episode(const ModelParams& params, std::uint64_t seed);

/// End-to-end episode: draws the Beta-distributed parameters once from
/// cfg.seed, builds the net with the given meter coverage, and infers.
PosteriorEstimate locate_outages(const FeederTopology& t,
                                 const ModelParams& params,
                                 const std::vector<bool>& meter_coverage,
                                 const EvidenceSet& ev,
                                 const GibbsConfig& cfg);

} // namespace outage
