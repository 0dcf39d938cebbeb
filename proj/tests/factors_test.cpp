#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "outage/error.hpp"
#include "outage/factors.hpp"
#include "outage/params.hpp"
#include "outage/random.hpp"
#include "test_util.hpp"

using namespace outage;

namespace {

// Fragility with no conductor or tree contribution unless asked for.
FragilityParams poles_only(double chi = 40.0, double xi = 0.3) {
    FragilityParams fp;
    fp.chi = chi;
    fp.xi = xi;
    fp.alpha_tree = 0.0;
    fp.wind_force_ratio = [](double) { return 0.0; };
    fp.tree_fail_prob = [](const Vegetation&, double) { return 0.0; };
    return fp;
}

BranchEvidence branch(double wind, int poles, std::vector<int> spans = {}) {
    BranchEvidence ev;
    ev.wind_speed = wind;
    ev.physical.pole_count = poles;
    ev.physical.span_conductor_counts = std::move(spans);
    return ev;
}

void expect_distribution(const BinaryDist& d) {
    EXPECT_GE(d.p0, 0.0);
    EXPECT_GE(d.p1, 0.0);
    EXPECT_NEAR(d.p0 + d.p1, 1.0, 1e-12);
}

} // namespace

TEST(BranchFailure, ZeroWindGivesZero) {
    auto fp = poles_only();
    for (int poles : {0, 1, 5})
        EXPECT_EQ(branch_failure_probability(branch(0.0, poles, {3, 3}), fp),
                  0.0);
}

TEST(BranchFailure, MedianWindSinglePole) {
    auto fp = poles_only(40.0);
    EXPECT_DOUBLE_EQ(branch_failure_probability(branch(40.0, 1), fp), 0.5);
}

TEST(BranchFailure, SeriesOfTwoPoles) {
    auto fp = poles_only(40.0);
    ASSERT_DOUBLE_EQ(pole_failure_probability(40.0, fp), 0.5);
    EXPECT_DOUBLE_EQ(branch_failure_probability(branch(40.0, 2), fp), 0.75);
}

TEST(BranchFailure, SeriesProductByHand) {
    FragilityParams fp = poles_only(30.0, 0.4);
    fp.alpha_tree = 0.5;
    fp.wind_force_ratio = [](double w) { return w / 100.0; };
    fp.tree_fail_prob = [](const Vegetation& v, double) {
        return v.species_constant;
    };
    BranchEvidence ev = branch(20.0, 3, {2, 4});
    ev.vegetation.species_constant = 0.6; // alpha * tree = 0.3 > ratio 0.2
    ev.physical.underground_probability = 0.25;
    const double pole = 0.5 * std::erfc(-std::log(20.0 / 30.0) / 0.4 /
                                        std::sqrt(2.0));
    const double pf = 0.75 * 0.3;
    const double expect =
        1.0 - std::pow(1.0 - pole, 3) * std::pow(1.0 - pf, 6);
    EXPECT_NEAR(branch_failure_probability(ev, fp), expect, 1e-15);
}

TEST(BranchFailure, UndergroundRemovesConductorTerm) {
    FragilityParams fp = poles_only();
    fp.wind_force_ratio = [](double) { return 0.9; };
    BranchEvidence ev = branch(25.0, 2, {3, 3});
    const double poles = branch_failure_probability(branch(25.0, 2), fp);
    ev.physical.underground_probability = 1.0;
    EXPECT_DOUBLE_EQ(branch_failure_probability(ev, fp), poles);
    ev.physical.underground_probability = 0.0;
    EXPECT_GT(branch_failure_probability(ev, fp), poles);
}

TEST(BranchFailure, MonotoneInWindWithDefaultModel) {
    const auto fp = make_fragility(50.0, 0.3, 0.1, ConductorModel{});
    BranchEvidence ev = branch(0.0, 4, {3, 3, 3});
    ev.vegetation = {1.2, 40.0};
    double prev = 0.0;
    for (double w = 0.0; w <= 80.0; w += 0.5) {
        ev.wind_speed = w;
        const double p = branch_failure_probability(ev, fp);
        EXPECT_GE(p, prev);
        EXPECT_LE(p, 1.0);
        prev = p;
    }
}

TEST(DefaultSubModels, QuadraticAndLogistic) {
    EXPECT_DOUBLE_EQ(quadratic_wind_force_ratio(30.0, 60.0), 0.25);
    EXPECT_DOUBLE_EQ(logistic_tree_fail_prob({1.0, 10.0}, 0.0, 0.0, 1.0), 0.5);
    const double x = -6.0 + 0.002 * 1.5 * 40.0 * 20.0;
    EXPECT_NEAR(logistic_tree_fail_prob({1.5, 40.0}, 20.0, -6.0, 0.002),
                1.0 / (1.0 + std::exp(-x)), 1e-15);
}

TEST(BranchStateFactor, UpstreamOutForcesOutage) {
    auto fp = poles_only();
    for (double w : {0.0, 10.0, 80.0}) {
        const auto d = branch_state_factor(1, branch(w, 3), fp);
        EXPECT_EQ(d.p1, 1.0);
        EXPECT_EQ(d.p0, 0.0);
    }
}

TEST(BranchStateFactor, NoFailureDrivers) {
    const auto d = branch_state_factor(0, branch(0.0, 3), poles_only());
    EXPECT_EQ(d.p1, 0.0);
    EXPECT_EQ(d.p0, 1.0);
}

TEST(BranchStateFactor, MedianWind) {
    const auto d = branch_state_factor(0, branch(40.0, 1), poles_only(40.0));
    EXPECT_DOUBLE_EQ(d.p1, 0.5);
    EXPECT_DOUBLE_EQ(d.p0, 0.5);
}

TEST(CustomerStateFactor, Cases) {
    EXPECT_EQ(customer_state_factor(1, 0.3).p1, 1.0);
    EXPECT_EQ(customer_state_factor(1, 0.3).p0, 0.0);
    EXPECT_EQ(customer_state_factor(0, 0.0).p0, 1.0);
    const auto d = customer_state_factor(0, 0.02);
    EXPECT_DOUBLE_EQ(d.p1, 0.02);
    EXPECT_DOUBLE_EQ(d.p0, 0.98);
}

TEST(HumanEvidenceFactor, Cases) {
    const auto zero = human_evidence_factor(1, 0.03, 0.0, 0.1);
    EXPECT_EQ(zero.p1, 0.0);
    EXPECT_EQ(zero.p0, 1.0);
    const auto inf = human_evidence_factor(1, 0.03, 1e6, 0.1);
    EXPECT_DOUBLE_EQ(inf.p1, 1.0);
    const auto fp = human_evidence_factor(0, 0.03, 10.0, 0.05);
    EXPECT_DOUBLE_EQ(fp.p1, 0.05);
    const auto mid = human_evidence_factor(1, 0.03, 10.0, 0.05);
    EXPECT_NEAR(mid.p0, std::exp(-0.3), 1e-15);
    EXPECT_NEAR(mid.p1, 1.0 - std::exp(-0.3), 1e-15);
}

TEST(MeterEvidenceFactor, Cases) {
    EXPECT_EQ(meter_evidence_factor(1, 1.0, 0.2).p1, 1.0);
    EXPECT_EQ(meter_evidence_factor(0, 0.9, 0.0).p0, 1.0);
    EXPECT_DOUBLE_EQ(meter_evidence_factor(1, 0.97, 0.0).p1, 0.97);
    EXPECT_DOUBLE_EQ(meter_evidence_factor(0, 0.97, 0.001).p1, 0.001);
}

TEST(Factors, EveryOutputIsADistribution) {
    auto rng = make_rng(5, {});
    const auto fp = make_fragility(45.0, 0.35, 0.2, ConductorModel{});
    for (int i = 0; i < 2000; ++i) {
        const double p = uniform01(rng), q = uniform01(rng);
        const int v = static_cast<int>(uniform_index(rng, 2));
        BranchEvidence ev = branch(60.0 * uniform01(rng),
                                   static_cast<int>(uniform_index(rng, 8)),
                                   {3, 2, 3});
        ev.vegetation = {2.0 * uniform01(rng), 80.0 * uniform01(rng)};
        ev.physical.underground_probability = uniform01(rng);
        expect_distribution(branch_state_factor(v, ev, fp));
        expect_distribution(customer_state_factor(v, p));
        expect_distribution(
            human_evidence_factor(v, 0.1 * q, 30.0 * uniform01(rng), p));
        expect_distribution(meter_evidence_factor(v, p, q));
    }
}

TEST(SampleParameter, UniformPrior) {
    auto rng = make_rng(1, {});
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = sample_parameter({1.0, 1.0}, rng);
        ASSERT_GE(x, 0.0);
        ASSERT_LE(x, 1.0);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        sum += x;
    }
    EXPECT_LT(lo, 0.01);
    EXPECT_GT(hi, 0.99);
    EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(SampleParameter, MomentsMatchClosedForm) {
    for (auto prior : {BetaPrior{2.0, 5.0}, BetaPrior{30.0, 1.0},
                       BetaPrior{0.5, 0.5}, BetaPrior{1.0, 99.0}}) {
        auto rng = make_rng(2, {});
        const int n = 100000;
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = sample_parameter(prior, rng);
            sum += x;
            sq += x * x;
        }
        const double a = prior.alpha, b = prior.beta;
        const double mean = a / (a + b);
        const double var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
        EXPECT_NEAR(sum / n, mean, 0.01);
        EXPECT_NEAR(sq / n - (sum / n) * (sum / n), var, 0.005);
    }
}

TEST(SampleParameter, ConcentratedPrior) {
    auto rng = make_rng(3, {});
    EXPECT_NEAR(sample_parameter({1e6, 1.0}, rng), 1.0, 1e-4);
}

TEST(Resolve, FixedConsumesNoRandomness) {
    auto a = make_rng(4, {});
    auto b = make_rng(4, {});
    EXPECT_EQ(resolve(ProbabilitySource{0.3}, a), 0.3);
    EXPECT_EQ(a(), b());
    EXPECT_TRUE(is_fixed(ProbabilitySource{0.3}));
    EXPECT_FALSE(is_fixed(ProbabilitySource{BetaPrior{}}));
}

TEST(Params, FileRoundTripAndErrors) {
    std::istringstream in("pi2 beta=2,8\npi3 fixed=0.1\nlambda1 0.05\n"
                          "w_crit 90\n");
    const ModelParams p = load_params(in);
    ASSERT_TRUE(std::holds_alternative<BetaPrior>(p.evidence.pi2));
    EXPECT_EQ(std::get<BetaPrior>(p.evidence.pi2).beta, 8.0);
    EXPECT_EQ(std::get<double>(p.evidence.pi3), 0.1);
    EXPECT_EQ(p.conductor.w_crit, 90.0);
    std::ostringstream out;
    write_params(out, p);
    std::istringstream again(out.str());
    const ModelParams q = load_params(again);
    EXPECT_EQ(std::get<BetaPrior>(q.evidence.pi2).alpha, 2.0);
    EXPECT_EQ(q.evidence.lambda1, 0.05);

    auto bad = [](const std::string& s) {
        std::istringstream b(s);
        return load_params(b);
    };
    EXPECT_THROW(bad("pi2 0.3\n"), ParseError);
    EXPECT_THROW(bad("pi9 fixed=0.3\n"), ParseError);
    EXPECT_THROW(bad("pi2 fixed=1.3\n"), ValidationError);
    EXPECT_THROW(bad("lambda1 0\n"), ValidationError);
    EXPECT_THROW(bad("pi2 beta=0,1\n"), ValidationError);
}

TEST(Params, EpisodeDrawsOnlyPriors) {
    ModelParams m = testutil::fixed_params(0.02, 0.05, 0.97, 0.001);
    EXPECT_FALSE(has_priors(m));
    EXPECT_EQ(resolve_fixed(m).pi4, 0.97);
    m.evidence.pi4 = BetaPrior{30.0, 1.0};
    EXPECT_TRUE(has_priors(m));
    EXPECT_THROW(resolve_fixed(m), ValidationError);
    auto rng = make_rng(0, {});
    const auto ep = resolve_episode(m, rng);
    EXPECT_GT(ep.pi4, 0.5);
    EXPECT_EQ(ep.pi2, 0.02);
}
