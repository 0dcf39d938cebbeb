#include "outage/factors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "outage/error.hpp"

namespace outage {

double quadratic_wind_force_ratio(double wind_speed, double w_crit) {
    double r = wind_speed / w_crit;
    return r * r;
}

double logistic_tree_fail_prob(const Vegetation& veg, double wind_speed,
                               double intercept, double slope) {
    double z = intercept +
               slope * veg.species_constant * veg.diameter_cm * wind_speed;
    return 1.0 / (1.0 + std::exp(-z));
}

FragilityParams make_fragility(double chi, double xi, double alpha_tree,
                               const ConductorModel& conductor) {
    if (!(chi > 0.0))
        throw ValidationError("fragility median chi must be positive");
    if (!(xi > 0.0))
        throw ValidationError("fragility log-std xi must be positive");
    if (!(alpha_tree >= 0.0 && alpha_tree <= 1.0))
        throw ValidationError("alpha_tree must lie in [0,1]");
    if (!(conductor.w_crit > 0.0))
        throw ValidationError("w_crit must be positive");
    FragilityParams fp;
    fp.chi = chi;
    fp.xi = xi;
    fp.alpha_tree = alpha_tree;
    fp.wind_force_ratio = [w = conductor.w_crit](double speed) {
        return quadratic_wind_force_ratio(speed, w);
    };
    fp.tree_fail_prob = [a = conductor.tree_intercept,
                         b = conductor.tree_slope](const Vegetation& v,
                                                   double speed) {
        return logistic_tree_fail_prob(v, speed, a, b);
    };
    return fp;
}

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double pole_failure_probability(double wind_speed, const FragilityParams& fp) {
    if (wind_speed <= 0.0)
        return 0.0; // ln(0) -> -inf, Phi(-inf) = 0
    return standard_normal_cdf(std::log(wind_speed / fp.chi) / fp.xi);
}

double branch_failure_probability(const BranchEvidence& ev,
                                  const FragilityParams& fp) {
    const auto& ph = ev.physical;
    double survive = 1.0;

    const double pole = pole_failure_probability(ev.wind_speed, fp);
    if (ph.pole_count > 0)
        survive *= std::pow(1.0 - pole, ph.pole_count);

    const int conductors = ph.conductor_count();
    if (conductors > 0) {
        double ratio =
            fp.wind_force_ratio ? fp.wind_force_ratio(ev.wind_speed) : 0.0;
        double tree = fp.tree_fail_prob
                          ? fp.tree_fail_prob(ev.vegetation, ev.wind_speed)
                          : 0.0;
        double p_f = (1.0 - ph.underground_probability) *
                     std::max(std::min(ratio, 1.0), fp.alpha_tree * tree);
        survive *= std::pow(1.0 - p_f, conductors);
    }
    return std::clamp(1.0 - survive, 0.0, 1.0);
}

BinaryDist branch_state_factor(int d_parent, double failure_probability) {
    if (d_parent)
        return {0.0, 1.0};
    return {1.0 - failure_probability, failure_probability};
}

BinaryDist branch_state_factor(int d_parent, const BranchEvidence& ev,
                               const FragilityParams& fp) {
    if (d_parent)
        return {0.0, 1.0};
    return branch_state_factor(0, branch_failure_probability(ev, fp));
}

BinaryDist customer_state_factor(int d_branch, double pi2) {
    if (d_branch)
        return {0.0, 1.0};
    return {1.0 - pi2, pi2};
}

double report_probability(double lambda1, double delta_t) {
    return -std::expm1(-lambda1 * delta_t);
}

BinaryDist human_evidence_factor(int c, double lambda1, double delta_t,
                                 double pi3) {
    if (c) {
        double silent = std::exp(-lambda1 * delta_t);
        return {silent, 1.0 - silent};
    }
    return {1.0 - pi3, pi3};
}

BinaryDist meter_evidence_factor(int c, double pi4, double pi5) {
    if (c)
        return {1.0 - pi4, pi4};
    return {1.0 - pi5, pi5};
}

double sample_parameter(const BetaPrior& prior, std::mt19937_64& rng) {
    std::gamma_distribution<double> ga(prior.alpha, 1.0);
    std::gamma_distribution<double> gb(prior.beta, 1.0);
    double x = ga(rng);
    double y = gb(rng);
    if (x + y <= 0.0)
        return prior.mean();
    return x / (x + y);
}

double resolve(const ProbabilitySource& src, std::mt19937_64& rng) {
    if (const double* p = std::get_if<double>(&src))
        return *p;
    return sample_parameter(std::get<BetaPrior>(src), rng);
}

bool is_fixed(const ProbabilitySource& src) {
    return std::holds_alternative<double>(src);
}

} // namespace outage
