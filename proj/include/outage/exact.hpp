#pragma once

#include <cstddef>
#include <vector>

#include "outage/bayes_net.hpp"
#include "outage/evidence.hpp"
#include "outage/feeder.hpp"

namespace outage {

struct ExactResult {
    std::vector<double> marginals; // P(x = 1 | E), BayesNet::unknowns() order
    std::vector<double> branch_marginals;
    std::vector<double> customer_marginals;
    Assignment map_assignment;
    double map_log_prob = 0.0;
    double log_evidence = 0.0; // log of the sum of joints over the unknowns
};

/// Enumerates all 2^r completions of the unknowns. Throws TooLargeError when
/// r > limit and ZeroSupportError when every completion is impossible.
ExactResult exact_inference(const BayesNet& bn, const Assignment& evidence,
                            std::size_t limit = 20);
ExactResult exact_inference(const BayesNet& bn, const FeederTopology& t,
                            const EvidenceSet& ev, std::size_t limit = 20);

} // namespace outage
