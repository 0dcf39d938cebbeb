#pragma once

#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "outage/factors.hpp"

namespace outage {

/// Customer-side evidence parameters.
struct EvidenceParams {
    ProbabilitySource pi2 = 0.02;  // customer-side fault rate
    ProbabilitySource pi3 = 0.05;  // false human report
    ProbabilitySource pi4 = 0.97;  // last gasp delivered
    ProbabilitySource pi5 = 0.001; // spurious last gasp
    double lambda1 = 0.03;         // human report rate, per minute
    double delta_t = 10.0;         // evidence window, minutes
};

/// Every factor parameter of the outage model.
///
/// The shipped defaults (pi3 = 0.05, alpha_tree = 0.1, the conductor
/// sub-model coefficients) are placeholders rather than measured values;
/// override them from a params file.
struct ModelParams {
    double chi = 50.0;
    double xi = 0.3;
    double alpha_tree = 0.1;
    ConductorModel conductor;
    EvidenceParams evidence;

    FragilityParams fragility() const {
        return make_fragility(chi, xi, alpha_tree, conductor);
    }

    /// Throws ValidationError when an invariant is violated.
    void validate() const;
};

/// Concrete parameter values for one inference episode (Beta priors
/// already drawn).
struct EpisodeParams {
    double pi2 = 0.0;
    double pi3 = 0.0;
    double pi4 = 1.0;
    double pi5 = 0.0;
    double lambda1 = 1.0;
    double delta_t = 0.0;

    double report_probability() const;
};

/// Draws every Beta-distributed probability once. Fixed values pass through
/// and consume no randomness.
EpisodeParams resolve_episode(const ModelParams& params, std::mt19937_64& rng);
/// Same as above for parameter sets without priors; throws when a prior is
/// configured.
EpisodeParams resolve_fixed(const ModelParams& params);
bool has_priors(const ModelParams& params);

/// Parses `key value` lines. Probability keys (pi2..pi5) take `fixed=<p>` or
/// `beta=<a>,<b>`; scalar keys are lambda1, delta_t_min, chi, xi,
/// alpha_tree, w_crit, tree_intercept, tree_slope. Unknown keys are errors.
ModelParams load_params(std::istream& in);
ModelParams load_params_file(const std::string& path);
void write_params(std::ostream& out, const ModelParams& params);

} // namespace outage
