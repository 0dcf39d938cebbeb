#include "outage/gibbs.hpp"

#include <algorithm>
#include <cmath>

#include "outage/error.hpp"
#include "outage/parallel.hpp"
#include "outage/random.hpp"

namespace outage {

ScanOrder parse_scan_order(const std::string& s) {
    if (s == "topo" || s == "topological")
        return ScanOrder::Topological;
    if (s == "random")
        return ScanOrder::Random;
    throw ParseError("scan order must be 'topo' or 'random', got '" + s + "'");
}

const char* to_string(ScanOrder s) {
    return s == ScanOrder::Topological ? "topo" : "random";
}

void GibbsConfig::validate() const {
    if (iterations < 1)
        throw ValidationError("iterations must be at least 1");
    if (chains < 1)
        throw ValidationError("chains must be at least 1");
    if (!(burn_in >= 0.0 && burn_in < 1.0))
        throw ValidationError("burn-in fraction must lie in [0,1)");
}

std::vector<double> ChainTrace::sequence(std::size_t unknown) const {
    std::vector<double> out(iterations);
    for (std::size_t t = 0; t < iterations; ++t)
        out[t] = at(t, unknown);
    return out;
}

std::size_t burn_in_count(std::size_t iterations, double burn_in) {
    return static_cast<std::size_t>(
        std::floor(burn_in * static_cast<double>(iterations) + 1e-9));
}

ChainTrace run_chain(const BayesNet& bn, const Assignment& evidence,
                     const GibbsConfig& cfg, std::size_t chain_index) {
    cfg.validate();
    auto rng = make_rng(cfg.seed, {0x6962'6273ULL, chain_index});
    const auto unknowns = bn.unknowns();
    const std::size_t n = unknowns.size();

    Assignment a = evidence;
    for (int u : unknowns)
        a.values[u] = static_cast<std::uint8_t>(rng() >> 63);
    project_to_support(bn, a);

    ChainTrace trace;
    trace.unknown_count = n;
    trace.iterations = cfg.iterations;
    trace.retained_ones.assign(n, 0);
    const std::size_t discard = burn_in_count(cfg.iterations, cfg.burn_in);
    trace.retained = cfg.iterations - discard;
    if (cfg.keep_samples)
        trace.values.resize(cfg.iterations * n);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        if (cfg.scan_order == ScanOrder::Random)
            std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t k : order) {
            const int u = unknowns[k];
            const LocalWeights w = local_weights(bn, u, a);
            const double z = w.w0 + w.w1;
            if (!(z > 0.0))
                throw ZeroSupportError(
                    "zero support while sampling: deterministic factors "
                    "contradict the evidence");
            // Inverse transform on the two-point conditional.
            a.values[u] = static_cast<std::uint8_t>(uniform01(rng) * z < w.w1);
        }
        if (cfg.keep_samples) {
            std::uint8_t* row = trace.values.data() + it * n;
            for (std::size_t k = 0; k < n; ++k)
                row[k] = a.values[unknowns[k]];
        }
        if (it >= discard)
            for (std::size_t k = 0; k < n; ++k)
                trace.retained_ones[k] += a.values[unknowns[k]];
    }
    return trace;
}

double estimate_marginal(std::span<const double> samples, double burn_in) {
    const std::size_t skip = burn_in_count(samples.size(), burn_in);
    if (skip >= samples.size())
        throw ValidationError("no samples retained after burn-in");
    double sum = 0.0;
    for (std::size_t i = skip; i < samples.size(); ++i)
        sum += samples[i];
    return sum / static_cast<double>(samples.size() - skip);
}

std::vector<double>
estimate_marginals(const std::vector<std::vector<double>>& sequences,
                   double burn_in) {
    std::vector<double> out;
    out.reserve(sequences.size());
    for (const auto& s : sequences)
        out.push_back(estimate_marginal(s, burn_in));
    return out;
}

int decide_state(double marginal) { return marginal > 0.5 ? 1 : 0; }

void decide_and_locate(const FeederTopology& t, PosteriorEstimate& est) {
    est.decided_branches.resize(est.branch_marginals.size());
    for (std::size_t b = 0; b < est.branch_marginals.size(); ++b)
        est.decided_branches[b] = decide_state(est.branch_marginals[b]);
    est.decided_customers.resize(est.customer_marginals.size());
    for (std::size_t c = 0; c < est.customer_marginals.size(); ++c)
        est.decided_customers[c] = decide_state(est.customer_marginals[c]);
    est.locations = select_outage_locations(t, est.decided_branches);
}

PosteriorEstimate infer(const BayesNet& bn, const FeederTopology& t,
                        const EvidenceSet& ev, const GibbsConfig& cfg) {
    cfg.validate();
    if (bn.branch_count() != t.branch_count() ||
        bn.customer_count() != t.customer_count())
        throw ValidationError("net was built from a different feeder");
    const Assignment clamped = clamp_evidence(bn, t, ev);
    if (!has_support(bn, clamped))
        throw ZeroSupportError(
            "evidence admits no positive-probability state (contradictory "
            "hard evidence)");

    std::vector<ChainTrace> traces(cfg.chains);
    parallel_for(cfg.chains, [&](std::size_t c) {
        traces[c] = run_chain(bn, clamped, cfg, c);
    });

    const auto unknowns = bn.unknowns();
    std::vector<double> pooled(unknowns.size(), 0.0);
    std::size_t retained = 0;
    for (const auto& tr : traces) {
        for (std::size_t k = 0; k < unknowns.size(); ++k)
            pooled[k] += static_cast<double>(tr.retained_ones[k]);
        retained += tr.retained;
    }

    PosteriorEstimate est;
    est.branch_marginals.assign(t.branch_count(), 0.0);
    est.customer_marginals.assign(t.customer_count(), 0.0);
    for (std::size_t k = 0; k < unknowns.size(); ++k) {
        const double p = pooled[k] / static_cast<double>(retained);
        const NodeRef& ref = bn.ref(unknowns[k]);
        if (ref.kind == NodeKind::BranchState)
            est.branch_marginals[ref.index] = p;
        else
            est.customer_marginals[ref.index] = p;
    }
    decide_and_locate(t, est);
    if (cfg.keep_samples)
        est.chain_samples = std::move(traces);
    return est;
}

EpisodeParams draw_episode(const ModelParams& params, std::uint64_t seed) {
    auto rng = make_rng(seed, {0x7061'7261ULL});
    return resolve_episode(params, rng);
}

PosteriorEstimate locate_outages(const FeederTopology& t,
                                 const ModelParams& params,
                                 const std::vector<bool>& meter_coverage,
                                 const EvidenceSet& ev,
                                 const GibbsConfig& cfg) {
    const EpisodeParams ep = draw_episode(params, cfg.seed);
    const BayesNet bn = build_bn(t, params, ep, meter_coverage, ev);
    return infer(bn, t, ev, cfg);
}

} // namespace outage
