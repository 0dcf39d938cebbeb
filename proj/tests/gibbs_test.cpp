#include <gtest/gtest.h>

#include <cmath>

#include "outage/error.hpp"
#include "outage/exact.hpp"
#include "outage/gibbs.hpp"
#include "outage/random.hpp"
#include "outage/scenario.hpp"
#include "test_util.hpp"

using namespace outage;
using testutil::chain;
using testutil::fixed_params;

namespace {

EvidenceSet quiet(const FeederTopology& t, double wind) {
    EvidenceSet ev;
    for (const auto& b : t.branches()) {
        ev.wind[b.id] = wind;
        ev.vegetation[b.id] = {1.0, 30.0};
    }
    for (const auto& c : t.customers())
        ev.human[c.id] = 0;
    return ev;
}

BayesNet make(const FeederTopology& t, const ModelParams& m,
              const EvidenceSet& ev) {
    return build_bn(t, m, resolve_fixed(m), meter_coverage_of(t), ev);
}

GibbsConfig config(std::size_t iterations, std::uint64_t seed,
                   std::size_t chains = 1) {
    GibbsConfig cfg;
    cfg.iterations = iterations;
    cfg.seed = seed;
    cfg.chains = chains;
    return cfg;
}

// Small noisy 3-branch case shared by the oracle tests.
struct SmallCase {
    FeederTopology t = chain(3, 1, true);
    ModelParams m = fixed_params(0.15, 0.1, 0.9, 0.05);
    EvidenceSet ev;
    SmallCase() {
        ev = quiet(t, 45.0);
        ev.human["c2"] = 1;
        ev.meter["c3"] = 1;
    }
};

} // namespace

TEST(GibbsConfig, Validation) {
    EXPECT_THROW(config(0, 1).validate(), ValidationError);
    auto c = config(10, 1, 0);
    EXPECT_THROW(c.validate(), ValidationError);
    c = config(10, 1);
    c.burn_in = 1.0;
    EXPECT_THROW(c.validate(), ValidationError);
    EXPECT_EQ(parse_scan_order("random"), ScanOrder::Random);
    EXPECT_EQ(std::string(to_string(ScanOrder::Topological)), "topo");
    EXPECT_THROW(parse_scan_order("zigzag"), ParseError);
}

TEST(RunChain, DeterministicNetIsConstantAfterFirstSweep) {
    const auto t = chain(3, 1, true);
    ModelParams m = fixed_params(0.0, 0.0, 1.0, 0.0, 0.03, 0.0);
    m.alpha_tree = 0.0;
    EvidenceSet ev = quiet(t, 0.0);
    ev.wind["b2"] = 1e9; // pole failure probability exactly 1
    ev.meter["c2"] = 1;
    ev.meter["c3"] = 1;
    const auto bn = make(t, m, ev);
    const auto tr = run_chain(bn, clamp_evidence(bn, t, ev), config(50, 4), 0);
    for (std::size_t it = 1; it < tr.iterations; ++it)
        for (std::size_t u = 0; u < tr.unknown_count; ++u)
            ASSERT_EQ(tr.at(it, u), tr.at(0, u));
    const std::vector<int> expect_branch{0, 1, 1};
    for (std::size_t u = 0; u < tr.unknown_count; ++u) {
        const auto& ref = bn.ref(bn.unknowns()[u]);
        if (ref.kind == NodeKind::BranchState)
            EXPECT_EQ(tr.at(0, u), expect_branch[ref.index]);
    }
}

TEST(RunChain, SameSeedSameSamples) {
    SmallCase c;
    const auto bn = make(c.t, c.m, c.ev);
    const auto a = clamp_evidence(bn, c.t, c.ev);
    for (auto scan : {ScanOrder::Topological, ScanOrder::Random}) {
        auto cfg = config(500, 77);
        cfg.scan_order = scan;
        EXPECT_EQ(run_chain(bn, a, cfg, 2).values,
                  run_chain(bn, a, cfg, 2).values);
        EXPECT_NE(run_chain(bn, a, cfg, 2).values,
                  run_chain(bn, a, cfg, 3).values);
    }
}

TEST(RunChain, SamplesRespectClampedEvidence) {
    SmallCase c;
    const auto bn = make(c.t, c.m, c.ev);
    const auto clamped = clamp_evidence(bn, c.t, c.ev);
    const auto tr = run_chain(bn, clamped, config(300, 5), 0);
    for (std::size_t it = 0; it < tr.iterations; ++it) {
        Assignment a = clamped;
        for (std::size_t u = 0; u < tr.unknown_count; ++u)
            a.values[bn.unknowns()[u]] =
                static_cast<std::uint8_t>(tr.at(it, u));
        ASSERT_TRUE(std::isfinite(joint_log_prob(bn, a)));
    }
}

TEST(RunChain, ThreeBranchNetMatchesExact) {
    SmallCase c;
    const auto bn = make(c.t, c.m, c.ev);
    const auto exact = exact_inference(bn, c.t, c.ev);
    for (auto scan : {ScanOrder::Topological, ScanOrder::Random}) {
        auto cfg = config(400000, 8);
        cfg.chains = 4;
        cfg.scan_order = scan;
        const auto est = infer(bn, c.t, c.ev, cfg);
        for (std::size_t b = 0; b < 3; ++b)
            EXPECT_NEAR(est.branch_marginals[b], exact.branch_marginals[b],
                        0.01);
        for (std::size_t j = 0; j < 3; ++j)
            EXPECT_NEAR(est.customer_marginals[j],
                        exact.customer_marginals[j], 0.01);
    }
}

TEST(EstimateMarginal, Counting) {
    EXPECT_EQ(estimate_marginal(std::vector<double>{1, 1, 1}, 0.0), 1.0);
    EXPECT_EQ(estimate_marginal(std::vector<double>{0, 1, 0, 1}, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(estimate_marginal(std::vector<double>{1, 1, 1, 0, 0}, 0.4),
                     1.0 / 3.0);
    EXPECT_THROW(estimate_marginal(std::vector<double>{}, 0.0),
                 ValidationError);
    EXPECT_THROW(estimate_marginal(std::vector<double>{1}, 1.0),
                 ValidationError);
    const auto m = estimate_marginals({{1, 0}, {1, 1}}, 0.0);
    EXPECT_EQ(m, (std::vector<double>{0.5, 1.0}));
}

TEST(Infer, BurnInDropsLeadingSamples) {
    SmallCase c;
    const auto bn = make(c.t, c.m, c.ev);
    auto cfg = config(400, 9);
    cfg.burn_in = 0.25;
    const auto est = infer(bn, c.t, c.ev, cfg);
    const auto& tr = est.chain_samples.at(0);
    EXPECT_EQ(tr.retained, 300u);
    for (std::size_t u = 0; u < tr.unknown_count; ++u) {
        const auto seq = tr.sequence(u);
        const NodeRef& ref = bn.ref(bn.unknowns()[u]);
        const double p = estimate_marginal(seq, 0.25);
        if (ref.kind == NodeKind::BranchState)
            EXPECT_DOUBLE_EQ(est.branch_marginals[ref.index], p);
        else
            EXPECT_DOUBLE_EQ(est.customer_marginals[ref.index], p);
    }
}

TEST(Infer, ChainsArePooled) {
    SmallCase c;
    const auto bn = make(c.t, c.m, c.ev);
    const auto est = infer(bn, c.t, c.ev, config(300, 10, 3));
    ASSERT_EQ(est.chain_samples.size(), 3u);
    const auto clamped = clamp_evidence(bn, c.t, c.ev);
    double ones = 0.0;
    for (std::size_t ch = 0; ch < 3; ++ch) {
        const auto tr = run_chain(bn, clamped, config(300, 10, 3), ch);
        ones += static_cast<double>(tr.retained_ones[0]);
    }
    EXPECT_DOUBLE_EQ(est.branch_marginals[0], ones / 900.0);
}

TEST(DecideAndLocate, ThresholdAndLocations) {
    EXPECT_EQ(decide_state(0.5), 0);
    EXPECT_EQ(decide_state(0.5000001), 1);
    const auto t = chain(6, 0);
    PosteriorEstimate est;
    est.branch_marginals = {0.01, 0.03, 0.08, 0.93, 0.97, 0.99};
    decide_and_locate(t, est);
    EXPECT_EQ(est.locations, (std::vector<std::size_t>{3}));
    est.branch_marginals = {0.1, 0.2, 0.5, 0.3, 0.4, 0.49};
    decide_and_locate(t, est);
    EXPECT_TRUE(est.locations.empty());
}

TEST(Infer, PerfectEvidenceFindsTheOutage) {
    TopologyShape s;
    const auto t = generate_topology(20, s, 12);
    const ModelParams m = fixed_params(0.02, 0.0, 1.0, 0.0);
    ScenarioSpec spec;
    spec.observability = 1.0;
    spec.errors = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 10; ++i) {
        const auto sc = generate_scenario(t, spec, i);
        const auto est = locate_outages(t, m, sc.meter_coverage, sc.evidence,
                                        config(2000, i));
        EXPECT_EQ(est.locations, sc.outage_branches) << "scenario " << i;
        EXPECT_EQ(est.decided_branches, sc.true_branch_states);
    }
}

TEST(Infer, PriorDominatesWithoutEvidence) {
    const auto t = chain(5, 2, false);
    ModelParams m = fixed_params(0.01, 0.05, 0.97, 0.001);
    const auto ev = quiet(t, 5.0);
    const auto est = infer(make(t, m, ev), t, ev, config(2000, 1));
    for (int d : est.decided_branches)
        EXPECT_EQ(d, 0);
    EXPECT_TRUE(est.locations.empty());
}

TEST(Infer, ContradictoryEvidence) {
    const auto t = chain(2, 1, true);
    EvidenceSet ev = quiet(t, 20.0);
    ev.meter["c1"] = 1;
    const auto bn = make(t, fixed_params(0.1, 0.1, 0.0, 0.0), ev);
    EXPECT_THROW(infer(bn, t, ev, config(100, 1)), ZeroSupportError);
}

TEST(Infer, DownstreamDominance) {
    TopologyShape s;
    const auto t = generate_topology(25, s, 6);
    const ModelParams m = fixed_params(0.05, 0.1, 0.97, 0.001);
    ScenarioSpec spec;
    spec.observability = 0.5;
    double below = 0.0, elsewhere = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        const auto sc = generate_scenario(t, spec, i);
        const auto est = locate_outages(t, m, sc.meter_coverage, sc.evidence,
                                        config(3000, i));
        const auto sub = t.subtree(sc.outage_branches[0]);
        std::vector<char> in(t.branch_count(), 0);
        for (auto d : sub)
            in[d] = 1;
        double a = 0.0, b = 0.0;
        for (std::size_t k = 0; k < t.branch_count(); ++k)
            (in[k] ? a : b) += est.branch_marginals[k];
        below += a / static_cast<double>(sub.size());
        if (sub.size() < t.branch_count())
            elsewhere +=
                b / static_cast<double>(t.branch_count() - sub.size());
    }
    EXPECT_GT(below, elsewhere);
}

TEST(Infer, LastGaspNeverLowersCustomerPosterior) {
    TopologyShape s;
    s.meter_fraction = 1.0;
    const auto t = generate_topology(5, s, 2);
    const ModelParams m = fixed_params(0.1, 0.1, 0.9, 0.02);
    auto rng = make_rng(41, {});
    for (int trial = 0; trial < 5; ++trial) {
        EvidenceSet ev = quiet(t, 30.0);
        for (const auto& c : t.customers()) {
            ev.human[c.id] = uniform01(rng) < 0.3;
            ev.meter[c.id] = uniform01(rng) < 0.2;
        }
        const std::size_t c = uniform_index(rng, t.customer_count());
        ev.meter[t.customer(c).id] = 0;
        const auto before = infer(make(t, m, ev), t, ev, config(20000, trial));
        ev.meter[t.customer(c).id] = 1;
        const auto after = infer(make(t, m, ev), t, ev, config(20000, trial));
        EXPECT_GE(after.customer_marginals[c] + 0.02,
                  before.customer_marginals[c]);
    }
}

TEST(DrawEpisode, FixedPassThroughAndSeededPriors) {
    ModelParams m = fixed_params(0.02, 0.05, 0.97, 0.001);
    EXPECT_EQ(draw_episode(m, 1).pi2, 0.02);
    m.evidence.pi2 = BetaPrior{2.0, 8.0};
    EXPECT_EQ(draw_episode(m, 5).pi2, draw_episode(m, 5).pi2);
    EXPECT_NE(draw_episode(m, 5).pi2, draw_episode(m, 6).pi2);
}
