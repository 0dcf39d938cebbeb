#pragma once

#include <functional>
#include <random>
#include <variant>

#include "outage/feeder.hpp"

namespace outage {

/// Two-point distribution over a binary variable.
struct BinaryDist {
    double p0 = 1.0;
    double p1 = 0.0;

    double operator[](int value) const { return value ? p1 : p0; }
};

/// Vegetation near a branch: species-specific constant and tree diameter.
struct Vegetation {
    double species_constant = 0.0;
    double diameter_cm = 0.0;
};

/// Context evidence of one branch (wind, vegetation, physical parameters).
struct BranchEvidence {
    double wind_speed = 0.0; // m/s
    Vegetation vegetation;
    BranchPhysical physical;
};

/// Pole and conductor fragility model.
///
/// `wind_force_ratio` maps wind speed to the conductor's wind-load to
/// capacity ratio; `tree_fail_prob` maps (vegetation, wind speed) to the
/// probability that a falling tree breaks the conductor. Both must be set;
/// make_fragility() installs the default quadratic/logistic forms.
struct FragilityParams {
    double chi = 50.0; // median wind speed of pole fragility
    double xi = 0.3;   // log standard deviation
    double alpha_tree = 0.1;
    std::function<double(double)> wind_force_ratio;
    std::function<double(const Vegetation&, double)> tree_fail_prob;
};

/// Coefficients of the default conductor sub-models.
struct ConductorModel {
    double w_crit = 120.0;        // wind speed at which load reaches capacity
    double tree_intercept = -6.0; // logistic intercept
    double tree_slope = 0.002;    // per (species constant * diameter_cm * m/s)
};

/// Quadratic wind-load ratio (w / w_crit)^2.
double quadratic_wind_force_ratio(double wind_speed, double w_crit);
/// Logistic tree failure probability in species * diameter * wind.
double logistic_tree_fail_prob(const Vegetation& veg, double wind_speed,
                               double intercept, double slope);

FragilityParams make_fragility(double chi, double xi, double alpha_tree,
                               const ConductorModel& conductor);

/// Standard normal CDF.
double standard_normal_cdf(double x);

/// Probability that a single pole fails at the given wind speed.
double pole_failure_probability(double wind_speed, const FragilityParams& fp);

/// Series-system failure probability of a branch: any failed pole or
/// conductor takes the branch out.
double branch_failure_probability(const BranchEvidence& ev,
                                  const FragilityParams& fp);

/// P(D_i | D_parent, context). Upstream de-energization forces D_i = 1.
BinaryDist branch_state_factor(int d_parent, double failure_probability);
BinaryDist branch_state_factor(int d_parent, const BranchEvidence& ev,
                               const FragilityParams& fp);

/// P(C | D_branch): deterministic when the branch is out, otherwise a
/// customer-side fault with probability pi2.
BinaryDist customer_state_factor(int d_branch, double pi2);

/// Probability that a de-energized customer reports within the window.
double report_probability(double lambda1, double delta_t);

/// P(E^h | C). Reports arrive at exponential times with rate lambda1; pi3 is
/// the false-report probability of an energized customer.
BinaryDist human_evidence_factor(int c, double lambda1, double delta_t,
                                 double pi3);

/// P(E^m | C). pi4: last gasp delivered when out; pi5: spurious last gasp.
BinaryDist meter_evidence_factor(int c, double pi4, double pi5);

struct BetaPrior {
    double alpha = 1.0;
    double beta = 1.0;

    double mean() const { return alpha / (alpha + beta); }
};

/// Draw from Beta(alpha, beta) via two gamma variates.
double sample_parameter(const BetaPrior& prior, std::mt19937_64& rng);

/// A probability that is either fixed or drawn per inference episode.
using ProbabilitySource = std::variant<double, BetaPrior>;

double resolve(const ProbabilitySource& src, std::mt19937_64& rng);
bool is_fixed(const ProbabilitySource& src);

} // namespace outage
