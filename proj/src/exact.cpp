#include "outage/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "outage/error.hpp"
#include "outage/parallel.hpp"

namespace outage {

ExactResult exact_inference(const BayesNet& bn, const Assignment& evidence,
                            std::size_t limit) {
    const auto unknowns = bn.unknowns();
    const std::size_t r = unknowns.size();
    if (r > limit)
        throw TooLargeError("exact inference over " + std::to_string(r) +
                            " unknowns exceeds the limit of " +
                            std::to_string(limit));
    if (r >= 63)
        throw TooLargeError("too many unknowns to enumerate");
    const std::uint64_t total = std::uint64_t{1} << r;

    // Bit k of the code is the value of unknowns[k].
    auto fill = [&](Assignment& a, std::uint64_t code) {
        for (std::size_t k = 0; k < r; ++k)
            a.values[unknowns[k]] = static_cast<std::uint8_t>((code >> k) & 1);
    };

    std::vector<double> logp(total);
    const std::uint64_t block = 4096;
    const std::size_t blocks = static_cast<std::size_t>((total + block - 1) / block);
    parallel_for(blocks, [&](std::size_t b) {
        Assignment a = evidence;
        const std::uint64_t end = std::min<std::uint64_t>(total, (b + 1) * block);
        for (std::uint64_t code = b * block; code < end; ++code) {
            fill(a, code);
            logp[code] = joint_log_prob(bn, a);
        }
    });

    const auto best = std::max_element(logp.begin(), logp.end());
    const double peak = *best;
    if (!std::isfinite(peak))
        throw ZeroSupportError("every completion of the unknowns has zero "
                               "probability under the evidence");

    ExactResult out;
    std::vector<double> ones(r, 0.0);
    double z = 0.0;
    for (std::uint64_t code = 0; code < total; ++code) {
        const double w = std::exp(logp[code] - peak);
        if (w == 0.0)
            continue;
        z += w;
        for (std::size_t k = 0; k < r; ++k)
            if ((code >> k) & 1)
                ones[k] += w;
    }
    out.log_evidence = peak + std::log(z);
    out.marginals.resize(r);
    out.branch_marginals.assign(bn.branch_count(), 0.0);
    out.customer_marginals.assign(bn.customer_count(), 0.0);
    for (std::size_t k = 0; k < r; ++k) {
        const double p = ones[k] / z;
        out.marginals[k] = p;
        const NodeRef& ref = bn.ref(unknowns[k]);
        if (ref.kind == NodeKind::BranchState)
            out.branch_marginals[ref.index] = p;
        else
            out.customer_marginals[ref.index] = p;
    }
    out.map_assignment = evidence;
    fill(out.map_assignment, static_cast<std::uint64_t>(best - logp.begin()));
    out.map_log_prob = peak;
    return out;
}

ExactResult exact_inference(const BayesNet& bn, const FeederTopology& t,
                            const EvidenceSet& ev, std::size_t limit) {
    return exact_inference(bn, clamp_evidence(bn, t, ev), limit);
}

} // namespace outage
