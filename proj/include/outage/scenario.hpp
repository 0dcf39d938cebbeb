#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "outage/evidence.hpp"
#include "outage/feeder.hpp"
#include "outage/gibbs.hpp"
#include "outage/metrics.hpp"
#include "outage/params.hpp"

namespace outage {

enum class Branching {
    Chain,  // every branch hangs off the previous one
    Star,   // every branch hangs off the root
    Random, // trunk-biased random recursive tree
};

struct TopologyShape {
    Branching branching = Branching::Random;
    /// Random: probability that a new branch extends the latest branch
    /// rather than attaching to a uniformly chosen earlier one.
    double trunk_bias = 0.5;
    std::size_t min_customers = 1;
    std::size_t max_customers = 4;
    /// Fraction of customers flagged has_meter in the generated file.
    double meter_fraction = 0.0;
};

/// Random radial feeder with ids b1..bN and c1..cM; deterministic in seed.
FeederTopology generate_topology(std::size_t n_branches,
                                 const TopologyShape& shape,
                                 std::uint64_t seed);

struct ErrorRates {
    double human_false = 0.10; // false report from an energized customer
    double nlp_error = 0.15;   // received report lost in text processing
    double ami_fail = 0.03;    // last gasp not delivered
};

/// Uniform ranges for the branch context drawn per scenario.
struct ContextModel {
    double wind_min = 15.0; // m/s
    double wind_max = 25.0;
    double species_min = 0.5;
    double species_max = 1.5;
    double diameter_min = 10.0; // cm
    double diameter_max = 60.0;
};

struct ScenarioSpec {
    double observability = 0.5; // fraction of customers with smart meters
    std::size_t n_scenarios = 1;
    std::size_t n_outages = 1;
    double delta_t = 10.0; // minutes
    ErrorRates errors;
    double report_lambda = 0.06; // per minute, used to generate reports
    ContextModel context;
    std::uint64_t seed = 0;

    void validate(const FeederTopology& t) const;
};

struct Scenario {
    std::size_t index = 0;
    std::vector<bool> meter_coverage;         // per customer
    std::vector<std::size_t> outage_branches; // sorted
    std::vector<int> true_branch_states;
    std::vector<int> true_customer_states;
    EvidenceSet evidence;
    double outage_time = 0.0; // minutes since the start of the study
};

/// Draws meters, outage branches, and the noisy evidence of scenario
/// `index`; deterministic in (spec.seed, index).
Scenario generate_scenario(const FeederTopology& t, const ScenarioSpec& spec,
                           std::size_t index);

struct ScenarioOutcome {
    std::size_t index = 0;
    bool ok = false;
    std::string error;
    ConfusionCounts branch_counts;
    MetricReport report; // branch metrics, system_accuracy in {0, 1}
    std::vector<int> decided_branches;
    std::vector<int> decided_customers;
    std::vector<std::size_t> locations;
    double seconds = 0.0;
};

struct MonteCarloResult {
    std::vector<ScenarioOutcome> outcomes; // by scenario index
    MetricReport aggregate;
    std::size_t failed = 0;
    double mean_seconds = 0.0; // mean inference time of successful runs
};

/// Gibbs seed of one scenario, derived from the base seed and index.
std::uint64_t scenario_seed(std::uint64_t base, std::size_t index);

/// Infers one generated scenario and scores it against its ground truth.
ScenarioOutcome evaluate_scenario(const FeederTopology& t,
                                  const Scenario& scenario,
                                  const ModelParams& model,
                                  const GibbsConfig& cfg);

/// Generates and evaluates spec.n_scenarios scenarios in parallel. Failed
/// scenarios are recorded, not fatal.
MonteCarloResult run_monte_carlo(const FeederTopology& t,
                                 const ScenarioSpec& spec,
                                 const ModelParams& model,
                                 const GibbsConfig& cfg);

/// `truth <node> <0|1>` lines for every branch and customer state.
void write_truth(std::ostream& out, const FeederTopology& t,
                 const std::vector<int>& branch_states,
                 const std::vector<int>& customer_states,
                 const char* keyword = "truth");
/// Reads lines written by write_truth with the given keyword.
std::map<std::string, int> load_states(std::istream& in,
                                       const char* keyword = "truth");

} // namespace outage
