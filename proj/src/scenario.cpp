#include "outage/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "outage/error.hpp"
#include "outage/parallel.hpp"
#include "outage/random.hpp"
#include "text_util.hpp"

namespace outage {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// First `count` entries of a uniformly shuffled 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::mt19937_64& rng,
                                                    std::size_t n,
                                                    std::size_t count) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + uniform_index(rng, n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace

FeederTopology generate_topology(std::size_t n_branches,
                                 const TopologyShape& shape,
                                 std::uint64_t seed) {
    if (n_branches < 1)
        throw ValidationError("a feeder needs at least one branch");
    if (shape.min_customers > shape.max_customers)
        throw ValidationError("min_customers exceeds max_customers");
    auto rng = make_rng(seed, {0x746f'706fULL});

    std::vector<BranchNode> branches(n_branches);
    std::vector<CustomerNode> customers;
    for (std::size_t i = 0; i < n_branches; ++i) {
        BranchNode& b = branches[i];
        b.id = "b" + std::to_string(i + 1);
        if (i > 0) {
            std::size_t parent = 0;
            switch (shape.branching) {
            case Branching::Chain:
                parent = i - 1;
                break;
            case Branching::Star:
                parent = 0;
                break;
            case Branching::Random:
                parent = uniform01(rng) < shape.trunk_bias
                             ? i - 1
                             : uniform_index(rng, i);
                break;
            }
            b.parent = branches[parent].id;
        }
        auto& ph = b.physical;
        ph.pole_count = 2 + static_cast<int>(uniform_index(rng, 7));
        ph.span_conductor_counts.assign(
            static_cast<std::size_t>(std::max(ph.pole_count - 1, 1)), 3);
        ph.conductor_length_m =
            static_cast<double>(ph.span_conductor_counts.size()) *
            uniform(rng, 40.0, 80.0);
        ph.underground_probability =
            uniform01(rng) < 0.2 ? uniform(rng, 0.6, 1.0)
                                 : uniform(rng, 0.0, 0.2);

        const std::size_t z =
            shape.min_customers +
            uniform_index(rng, shape.max_customers - shape.min_customers + 1);
        for (std::size_t j = 0; j < z; ++j) {
            CustomerNode c;
            c.id = "c" + std::to_string(customers.size() + 1);
            c.branch = b.id;
            c.has_meter = uniform01(rng) < shape.meter_fraction;
            customers.push_back(std::move(c));
        }
    }
    return FeederTopology(std::move(branches), std::move(customers));
}

void ScenarioSpec::validate(const FeederTopology& t) const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw ValidationError(std::string(name) + " must lie in [0,1]");
    };
    prob(observability, "observability");
    prob(errors.human_false, "human_false");
    prob(errors.nlp_error, "nlp_error");
    prob(errors.ami_fail, "ami_fail");
    if (n_outages < 1 || n_outages > t.branch_count())
        throw ValidationError("n_outages must lie in [1, branch count]");
    if (!(delta_t >= 0.0))
        throw ValidationError("delta_t must be non-negative");
    if (!(report_lambda > 0.0))
        throw ValidationError("report_lambda must be positive");
    if (context.wind_min < 0.0 || context.wind_max < context.wind_min)
        throw ValidationError("bad wind range");
}

Scenario generate_scenario(const FeederTopology& t, const ScenarioSpec& spec,
                           std::size_t index) {
    spec.validate(t);
    auto rng = make_rng(spec.seed, {0x7363'656eULL, index});
    const std::size_t k = t.branch_count();
    const std::size_t n = t.customer_count();

    Scenario s;
    s.index = index;
    s.outage_time = static_cast<double>(index) * 60.0;

    const auto meters = sample_without_replacement(
        rng, n,
        static_cast<std::size_t>(
            std::lround(spec.observability * static_cast<double>(n))));
    s.meter_coverage.assign(n, false);
    for (auto c : meters)
        s.meter_coverage[c] = true;

    s.outage_branches = sample_without_replacement(rng, k, spec.n_outages);
    s.true_branch_states.assign(k, 0);
    for (auto b : s.outage_branches)
        for (auto d : t.subtree(b))
            s.true_branch_states[d] = 1;
    s.true_customer_states.assign(n, 0);
    for (std::size_t c = 0; c < n; ++c)
        s.true_customer_states[c] = s.true_branch_states[t.customer_branch(c)];

    const double report = report_probability(spec.report_lambda, spec.delta_t);
    const auto& err = spec.errors;
    for (std::size_t c = 0; c < n; ++c) {
        const auto& id = t.customer(c).id;
        const bool out = s.true_customer_states[c] == 1;
        int human = 0;
        if (out) {
            human = uniform01(rng) < report ? 1 : 0;
            if (human && uniform01(rng) < err.nlp_error)
                human = 0;
        } else {
            human = uniform01(rng) < err.human_false ? 1 : 0;
        }
        s.evidence.human[id] = human;
        if (s.meter_coverage[c]) {
            int gasp = out && uniform01(rng) >= err.ami_fail ? 1 : 0;
            s.evidence.meter[id] = gasp;
        }
    }
    const auto& cm = spec.context;
    for (std::size_t b = 0; b < k; ++b) {
        const auto& id = t.branch(b).id;
        s.evidence.wind[id] = uniform(rng, cm.wind_min, cm.wind_max);
        s.evidence.vegetation[id] =
            Vegetation{uniform(rng, cm.species_min, cm.species_max),
                       uniform(rng, cm.diameter_min, cm.diameter_max)};
    }
    s.evidence.elapsed_window = spec.delta_t;
    return s;
}

std::uint64_t scenario_seed(std::uint64_t base, std::size_t index) {
    auto rng = make_rng(base, {0x6d63'7275ULL, index});
    return rng();
}

ScenarioOutcome evaluate_scenario(const FeederTopology& t,
                                  const Scenario& scenario,
                                  const ModelParams& model,
                                  const GibbsConfig& cfg) {
    ScenarioOutcome out;
    out.index = scenario.index;
    GibbsConfig run = cfg;
    run.seed = scenario_seed(cfg.seed, scenario.index);
    run.keep_samples = false;

    const auto start = std::chrono::steady_clock::now();
    try {
        const PosteriorEstimate est = locate_outages(
            t, model, scenario.meter_coverage, scenario.evidence, run);
        out.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
        out.branch_counts =
            confusion(est.decided_branches, scenario.true_branch_states);
        out.report = metrics(out.branch_counts);
        const bool all_right =
            est.decided_branches == scenario.true_branch_states &&
            est.decided_customers == scenario.true_customer_states;
        out.report.system_accuracy = all_right ? 1.0 : 0.0;
        out.decided_branches = est.decided_branches;
        out.decided_customers = est.decided_customers;
        out.locations = est.locations;
        out.ok = true;
    } catch (const Error& e) {
        out.error = e.what();
    }
    return out;
}

MonteCarloResult run_monte_carlo(const FeederTopology& t,
                                 const ScenarioSpec& spec,
                                 const ModelParams& model,
                                 const GibbsConfig& cfg) {
    spec.validate(t);
    model.validate();
    cfg.validate();
    MonteCarloResult result;
    result.outcomes.resize(spec.n_scenarios);
    parallel_for(spec.n_scenarios, [&](std::size_t i) {
        const Scenario s = generate_scenario(t, spec, i);
        result.outcomes[i] = evaluate_scenario(t, s, model, cfg);
    });

    std::vector<MetricReport> reports;
    double seconds = 0.0;
    for (const auto& o : result.outcomes) {
        if (!o.ok) {
            ++result.failed;
            continue;
        }
        reports.push_back(o.report);
        seconds += o.seconds;
    }
    if (!reports.empty()) {
        result.aggregate = aggregate(reports);
        result.mean_seconds = seconds / static_cast<double>(reports.size());
    } else {
        result.aggregate.scenarios = 0;
    }
    return result;
}

void write_truth(std::ostream& out, const FeederTopology& t,
                 const std::vector<int>& branch_states,
                 const std::vector<int>& customer_states,
                 const char* keyword) {
    for (std::size_t b = 0; b < t.branch_count(); ++b)
        out << keyword << " D:" << t.branch(b).id << ' ' << branch_states[b]
            << '\n';
    for (std::size_t c = 0; c < t.customer_count(); ++c)
        out << keyword << " C:" << t.customer(c).id << ' '
            << customer_states[c] << '\n';
}

std::map<std::string, int> load_states(std::istream& in, const char* keyword) {
    std::map<std::string, int> out;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (detail::is_skippable(text))
            continue;
        auto tok = detail::split_ws(text);
        if (tok.size() != 3 || tok[0] != keyword)
            throw ParseError("expected '" + std::string(keyword) +
                                 " <node> <0|1>'",
                             line);
        if (!out.emplace(std::string(tok[1]),
                         detail::parse_bit(tok[2], "state", line))
                 .second)
            throw ParseError("duplicate node '" + std::string(tok[1]) + "'",
                             line);
    }
    return out;
}

} // namespace outage
