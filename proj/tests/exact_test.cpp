#include <gtest/gtest.h>

#include <cmath>

#include "outage/error.hpp"
#include "outage/exact.hpp"
#include "outage/random.hpp"
#include "outage/scenario.hpp"
#include "test_util.hpp"

using namespace outage;
using testutil::chain;
using testutil::fixed_params;

namespace {

// One pole, no conductors, no tree term: P_l is the pole fragility alone.
ModelParams pole_only_params(double pi2, double pi3, double pi4, double pi5,
                             double delta_t) {
    ModelParams m = fixed_params(pi2, pi3, pi4, pi5, 0.03, delta_t);
    m.alpha_tree = 0.0;
    return m;
}

FeederTopology single_pole_chain(std::size_t k, std::size_t per_branch,
                                 bool metered) {
    std::string text;
    for (std::size_t i = 1; i <= k; ++i) {
        text += "branch b" + std::to_string(i) + " parent=" +
                (i == 1 ? std::string("none") : "b" + std::to_string(i - 1)) +
                " poles=1 spans= length_m=0 p_underground=1\n";
        for (std::size_t j = 0; j < per_branch; ++j)
            text += "customer c" + std::to_string(i) + "_" +
                    std::to_string(j) + " branch=b" + std::to_string(i) +
                    " meter=" + (metered ? "1" : "0") + "\n";
    }
    return testutil::parse_topology(text);
}

// Wind speed whose pole failure probability is `p`.
double wind_for(double p, const ModelParams& m) {
    const auto fp = m.fragility();
    double lo = 1e-9, hi = 10.0 * m.chi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (pole_failure_probability(mid, fp) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

EvidenceSet quiet(const FeederTopology& t, double wind) {
    EvidenceSet ev;
    for (const auto& b : t.branches())
        ev.wind[b.id] = wind;
    for (const auto& c : t.customers())
        ev.human[c.id] = 0;
    return ev;
}

BayesNet make(const FeederTopology& t, const ModelParams& m,
              const EvidenceSet& ev) {
    return build_bn(t, m, resolve_fixed(m), meter_coverage_of(t), ev);
}

} // namespace

TEST(ExactInference, PriorReadOff) {
    const auto t = single_pole_chain(1, 1, false);
    const auto m = pole_only_params(0.0, 0.0, 0.97, 0.0, 0.0);
    const auto ev = quiet(t, wind_for(0.3, m));
    const auto bn = make(t, m, ev);
    const auto r = exact_inference(bn, t, ev);
    EXPECT_NEAR(r.branch_marginals[0], 0.3, 1e-9);
    EXPECT_NEAR(r.customer_marginals[0], 0.3, 1e-9);
}

TEST(ExactInference, TwoBranchChainByHand) {
    const auto t = single_pole_chain(2, 0, false);
    const auto m = pole_only_params(0.0, 0.0, 0.97, 0.0, 10.0);
    const double p = 0.2;
    const auto ev = quiet(t, wind_for(p, m));
    const auto r = exact_inference(make(t, m, ev), t, ev);
    // States (D1, D2): (0,0) (1-p)^2, (0,1) (1-p)p, (1,0) 0, (1,1) p.
    EXPECT_NEAR(r.branch_marginals[0], p, 1e-9);
    EXPECT_NEAR(r.branch_marginals[1], p + (1 - p) * p, 1e-9);
    EXPECT_GE(r.branch_marginals[1], r.branch_marginals[0]);
    EXPECT_NEAR(r.log_evidence, 0.0, 1e-12);
}

TEST(ExactInference, ForcedOutageCascades) {
    const auto t = chain(4, 1, true);
    EvidenceSet ev = quiet(t, 20.0);
    ev.meter["c1"] = 1; // with pi5 = 0 and pi2 = 0 this forces D1 = 1
    const auto r = exact_inference(
        make(t, fixed_params(0.0, 0.1, 0.97, 0.0), ev), t, ev);
    for (double p : r.branch_marginals)
        EXPECT_DOUBLE_EQ(p, 1.0);
    for (double p : r.customer_marginals)
        EXPECT_DOUBLE_EQ(p, 1.0);
}

TEST(ExactInference, MatchesNaiveEnumeration) {
    TopologyShape s;
    s.meter_fraction = 0.5;
    s.max_customers = 2;
    auto rng = make_rng(31, {});
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto t = generate_topology(4, s, seed);
        EvidenceSet ev = quiet(t, 30.0 + 20.0 * uniform01(rng));
        for (const auto& c : t.customers()) {
            ev.human[c.id] = uniform01(rng) < 0.4;
            if (c.has_meter)
                ev.meter[c.id] = uniform01(rng) < 0.4;
        }
        const auto bn = make(t, fixed_params(0.15, 0.1, 0.9, 0.03), ev);
        const auto clamped = clamp_evidence(bn, t, ev);
        const auto r = exact_inference(bn, clamped);
        const auto naive = testutil::brute_marginals(bn, clamped);
        ASSERT_EQ(r.marginals.size(), naive.size());
        for (std::size_t i = 0; i < naive.size(); ++i)
            EXPECT_NEAR(r.marginals[i], naive[i], 1e-12);

        double z = 0.0, best = -1.0;
        Assignment best_a;
        testutil::for_each_completion(bn, clamped,
                                      [&](const Assignment& a, double w) {
                                          z += w;
                                          if (w > best) {
                                              best = w;
                                              best_a = a;
                                          }
                                      });
        EXPECT_NEAR(r.log_evidence, std::log(z), 1e-10);
        EXPECT_NEAR(r.map_log_prob, std::log(best), 1e-10);
        EXPECT_NEAR(joint_log_prob(bn, r.map_assignment), std::log(best),
                    1e-10);

        // Normalization and self-consistency.
        double total = 0.0;
        std::vector<double> ones(bn.unknowns().size(), 0.0);
        testutil::for_each_completion(
            bn, clamped, [&](const Assignment& a, double w) {
                const double q = w / std::exp(r.log_evidence);
                total += q;
                for (std::size_t i = 0; i < ones.size(); ++i)
                    if (a[bn.unknowns()[i]])
                        ones[i] += q;
            });
        EXPECT_NEAR(total, 1.0, 1e-10);
        for (std::size_t i = 0; i < ones.size(); ++i)
            EXPECT_NEAR(r.marginals[i], ones[i], 1e-10);
        for (std::size_t b = 0; b < t.branch_count(); ++b)
            EXPECT_EQ(r.branch_marginals[b],
                      r.marginals[std::find(bn.unknowns().begin(),
                                            bn.unknowns().end(),
                                            bn.branch_node(b)) -
                                  bn.unknowns().begin()]);
    }
}

TEST(ExactInference, TooLarge) {
    const auto t = chain(10, 2, false); // 30 unknowns
    const auto ev = quiet(t, 20.0);
    const auto bn = make(t, ModelParams{}, ev);
    try {
        exact_inference(bn, t, ev);
        FAIL() << "expected TooLargeError";
    } catch (const TooLargeError& e) {
        EXPECT_NE(std::string(e.what()).find("30"), std::string::npos);
    }
    const auto small = chain(5, 2, false); // 15 unknowns
    const auto sev = quiet(small, 20.0);
    const auto sbn = make(small, ModelParams{}, sev);
    EXPECT_THROW(exact_inference(sbn, small, sev, 14), TooLargeError);
    EXPECT_NO_THROW(exact_inference(sbn, small, sev, 15));
}

TEST(ExactInference, ZeroEvidence) {
    const auto t = chain(1, 1, true);
    EvidenceSet ev = quiet(t, 20.0);
    ev.meter["c1"] = 1;
    const auto bn = make(t, fixed_params(0.2, 0.1, 0.0, 0.0), ev);
    EXPECT_THROW(exact_inference(bn, t, ev), ZeroSupportError);
}

TEST(ExactInference, Deterministic) {
    TopologyShape s;
    s.meter_fraction = 0.5;
    const auto t = generate_topology(6, s, 3);
    const auto ev = quiet(t, 40.0);
    const auto bn = make(t, ModelParams{}, ev);
    const auto a = exact_inference(bn, t, ev);
    const auto b = exact_inference(bn, t, ev);
    EXPECT_EQ(a.marginals, b.marginals);
    EXPECT_EQ(a.map_assignment.values, b.map_assignment.values);
}
