#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "outage/calibration.hpp"
#include "outage/error.hpp"
#include "outage/exact.hpp"
#include "outage/parallel.hpp"
#include "outage/scenario.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace outage::cli {

namespace {

constexpr const char* version = "1.0.0";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(10) << v;
    return s.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty())
        throw ValidationError("bad " + what + " '" + s + "'");
    return v;
}

std::size_t to_size(const std::string& s, const std::string& what) {
    const double v = to_double(s, what);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ValidationError("bad " + what + " '" + s + "'");
    return static_cast<std::size_t>(v);
}

std::vector<double> parse_doubles(const std::string& s,
                                  const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split_list(s))
        out.push_back(to_double(item, what));
    if (out.empty())
        throw ValidationError(what + " list is empty");
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s,
                                     const std::string& what) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(s))
        out.push_back(to_size(item, what));
    if (out.empty())
        throw ValidationError(what + " list is empty");
    return out;
}

/// "2", "1,3" or "1..3".
std::vector<std::size_t> parse_range(const std::string& s,
                                     const std::string& what) {
    const auto dots = s.find("..");
    if (dots == std::string::npos)
        return parse_sizes(s, what);
    const std::size_t lo = to_size(s.substr(0, dots), what);
    const std::size_t hi = to_size(s.substr(dots + 2), what);
    if (lo > hi)
        throw ValidationError("empty " + what + " range '" + s + "'");
    std::vector<std::size_t> out;
    for (std::size_t k = lo; k <= hi; ++k)
        out.push_back(k);
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error("cannot create directory '" + dir.string() +
                    "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f)
        throw Error("cannot write '" + path.string() + "'");
    return f;
}

std::ostream& lvalue(std::ofstream&& f) { return f; }

// Flags shared by every command that samples.
struct GibbsFlags {
    std::size_t iterations = 4000;
    std::size_t chains = 1;
    double burn_in = 0.0;
    std::string scan = "topo";
    std::uint64_t seed = 0;

    void add(CLI::App* app) {
        app->add_option("--iterations", iterations, "Gibbs sweeps per chain (M)");
        app->add_option("--chains", chains, "independent chains, pooled");
        app->add_option("--burn-in", burn_in, "fraction of each chain discarded");
        app->add_option("--scan", scan, "scan order: topo or random");
        app->add_option("--seed", seed, "base random seed");
    }

    GibbsConfig config() const {
        GibbsConfig cfg;
        cfg.iterations = iterations;
        cfg.chains = chains;
        cfg.burn_in = burn_in;
        cfg.scan_order = parse_scan_order(scan);
        cfg.seed = seed;
        cfg.keep_samples = false;
        cfg.validate();
        return cfg;
    }
};

json gibbs_json(const GibbsConfig& cfg) {
    return {{"iterations", cfg.iterations},
            {"chains", cfg.chains},
            {"burn_in", cfg.burn_in},
            {"scan", to_string(cfg.scan_order)},
            {"seed", cfg.seed}};
}

struct ShapeFlags {
    std::string shape = "random";
    double trunk_bias = 0.5;
    std::string customers = "1,4";
    double meter_fraction = 0.0;
    std::uint64_t topology_seed = 1;

    void add(CLI::App* app) {
        app->add_option("--shape", shape, "chain, star or random");
        app->add_option("--trunk-bias", trunk_bias,
                        "random shape: chance of extending the latest branch");
        app->add_option("--customers", customers,
                        "customers per branch as min,max");
        app->add_option("--meter-fraction", meter_fraction,
                        "fraction of customers flagged as metered");
        app->add_option("--topology-seed", topology_seed,
                        "seed of generated feeders");
    }

    TopologyShape get() const {
        TopologyShape s;
        if (shape == "chain")
            s.branching = Branching::Chain;
        else if (shape == "star")
            s.branching = Branching::Star;
        else if (shape == "random")
            s.branching = Branching::Random;
        else
            throw ValidationError("shape must be chain, star or random");
        s.trunk_bias = trunk_bias;
        const auto range = parse_sizes(customers, "customers");
        if (range.size() != 2)
            throw ValidationError("--customers takes min,max");
        s.min_customers = range[0];
        s.max_customers = range[1];
        s.meter_fraction = meter_fraction;
        return s;
    }

    json to_json() const {
        return {{"shape", shape},
                {"trunk_bias", trunk_bias},
                {"customers", customers},
                {"topology_seed", topology_seed}};
    }
};

ModelParams load_model(const std::string& path) {
    return path.empty() ? ModelParams{} : load_params_file(path);
}

template <class F>
std::vector<std::size_t> order_by_id(std::size_t n, F id) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return id(a) < id(b); });
    return idx;
}

void write_branch_csv(std::ostream& out, const FeederTopology& t,
                      const std::vector<double>& marginals) {
    out << "branch,probability,state\n";
    for (auto b : order_by_id(t.branch_count(),
                              [&](std::size_t i) { return t.branch(i).id; }))
        out << t.branch(b).id << ',' << fmt(marginals[b]) << ','
            << decide_state(marginals[b]) << '\n';
}

void write_customer_csv(std::ostream& out, const FeederTopology& t,
                        const std::vector<double>& marginals) {
    out << "customer,branch,probability,state\n";
    for (auto c : order_by_id(t.customer_count(),
                              [&](std::size_t i) { return t.customer(i).id; }))
        out << t.customer(c).id << ',' << t.customer(c).branch << ','
            << fmt(marginals[c]) << ',' << decide_state(marginals[c]) << '\n';
}

std::string location_list(const FeederTopology& t,
                          const std::vector<std::size_t>& locations) {
    std::vector<std::string> ids;
    for (auto b : locations)
        ids.push_back(t.branch(b).id);
    std::sort(ids.begin(), ids.end());
    std::string s;
    for (const auto& id : ids)
        s += (s.empty() ? "" : " ") + id;
    return s;
}

// ---------------------------------------------------------------- infer

struct InferArgs {
    std::string topology, evidence, params, out;
    bool exact = false;
    std::size_t exact_limit = 20;
    GibbsFlags gibbs;
};

int cmd_infer(const InferArgs& a, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    const FeederTopology t = load_topology_file(a.topology);
    const EvidenceSet ev = load_evidence_file(a.evidence);
    const ModelParams model = load_model(a.params);
    model.validate();
    GibbsConfig cfg = a.gibbs.config();
    const double load_s = seconds_since(start);

    const auto infer_start = Clock::now();
    const std::vector<bool> coverage = meter_coverage_of(t);
    PosteriorEstimate est;
    if (a.exact) {
        const EpisodeParams ep = draw_episode(model, cfg.seed);
        const BayesNet bn = build_bn(t, model, ep, coverage, ev);
        const ExactResult ex = exact_inference(bn, t, ev, a.exact_limit);
        est.branch_marginals = ex.branch_marginals;
        est.customer_marginals = ex.customer_marginals;
        decide_and_locate(t, est);
    } else {
        est = locate_outages(t, model, coverage, ev, cfg);
    }
    const double infer_s = seconds_since(infer_start);
    const std::string locations = location_list(t, est.locations);

    if (a.out.empty()) {
        write_branch_csv(out, t, est.branch_marginals);
        err << "locations: " << (locations.empty() ? "none" : locations)
            << '\n';
        return ok;
    }
    const fs::path dir(a.out);
    ensure_dir(dir);
    {
        auto f = open_out(dir / "posterior.csv");
        write_branch_csv(f, t, est.branch_marginals);
    }
    {
        auto f = open_out(dir / "customers.csv");
        write_customer_csv(f, t, est.customer_marginals);
    }
    {
        auto f = open_out(dir / "locations.txt");
        f << locations << '\n';
    }
    json m = {{"command", "infer"},
              {"version", version},
              {"topology", a.topology},
              {"evidence", a.evidence},
              {"params", a.params},
              {"method", a.exact ? "exact" : "gibbs"},
              {"gibbs", gibbs_json(cfg)},
              {"seconds", {{"load", load_s}, {"infer", infer_s}}},
              {"outputs", {"posterior.csv", "customers.csv", "locations.txt"}}};
    open_out(dir / "manifest.json") << m.dump(2) << '\n';
    out << "locations: " << (locations.empty() ? "none" : locations) << '\n';
    return ok;
}

// ------------------------------------------------------------- simulate

struct SimulateArgs {
    std::vector<std::string> topologies;
    std::string generate;
    ShapeFlags shape;
    std::string observability = "0.5";
    std::size_t n_scenarios = 100;
    std::string n_outages = "1";
    std::string params;
    GibbsFlags gibbs;
    double delta_t = 10.0;
    double human_false = 0.10;
    double nlp_error = 0.15;
    double ami_fail = 0.03;
    double report_lambda = -1.0; // default: twice the model's lambda1
    std::string wind = "15,25";
    std::string out;
    bool dump = false;
};

struct Feeder {
    std::string name;
    std::string source; // file path or "generated"
    FeederTopology topology;
};

std::vector<Feeder> load_feeders(const std::vector<std::string>& files,
                                 const std::string& generate,
                                 const ShapeFlags& shape) {
    std::vector<Feeder> feeders;
    for (const auto& f : files)
        feeders.push_back({fs::path(f).stem().string(), f,
                           load_topology_file(f)});
    if (!generate.empty()) {
        const TopologyShape s = shape.get();
        for (std::size_t n : parse_sizes(generate, "feeder size"))
            feeders.push_back({"gen" + std::to_string(n), "generated",
                               generate_topology(n, s, shape.topology_seed)});
    }
    if (feeders.empty())
        throw ValidationError("give --topology files or --generate sizes");
    std::vector<std::string> names;
    for (const auto& f : feeders)
        names.push_back(f.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
        throw ValidationError("feeder names must be unique");
    return feeders;
}

std::string obs_label(double o) {
    std::ostringstream s;
    s << "obs" << std::setprecision(6) << o;
    return s.str();
}

struct Job {
    std::size_t feeder = 0;
    ScenarioSpec spec;
    std::vector<ScenarioOutcome> outcomes;
};

void dump_scenario(const fs::path& dir, const Feeder& f, const Scenario& s,
                   const ScenarioOutcome& o, const GibbsConfig& cfg) {
    ensure_dir(dir);
    write_evidence(lvalue(open_out(dir / "evidence.txt")), s.evidence);
    write_truth(lvalue(open_out(dir / "truth.txt")), f.topology, s.true_branch_states,
                s.true_customer_states);
    if (o.ok)
        write_truth(lvalue(open_out(dir / "pred.txt")), f.topology, o.decided_branches,
                    o.decided_customers, "pred");
    // Feeder with this scenario's meters, for replay through `infer`.
    std::vector<CustomerNode> customers = f.topology.customers();
    for (std::size_t c = 0; c < customers.size(); ++c)
        customers[c].has_meter = s.meter_coverage[c];
    write_topology(lvalue(open_out(dir / "feeder.txt")),
                   FeederTopology(f.topology.branches(), customers));
    std::vector<std::string> outages;
    for (auto b : s.outage_branches)
        outages.push_back(f.topology.branch(b).id);
    json m = {{"index", s.index},
              {"scenario_seed", cfg.seed},
              {"gibbs_seed", scenario_seed(cfg.seed, s.index)},
              {"outage_branches", outages},
              {"outage_time", s.outage_time},
              {"ok", o.ok},
              {"error", o.error}};
    open_out(dir / "manifest.json") << m.dump(2) << '\n';
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const auto start = Clock::now();
    if (a.out.empty())
        throw ValidationError("--out is required");
    const std::vector<Feeder> feeders =
        load_feeders(a.topologies, a.generate, a.shape);
    const ModelParams model = load_model(a.params);
    model.validate();
    const GibbsConfig cfg = a.gibbs.config();
    const auto observability = parse_doubles(a.observability, "observability");
    const auto outages = parse_range(a.n_outages, "n-outages");
    const auto wind = parse_doubles(a.wind, "wind");
    if (wind.size() != 2)
        throw ValidationError("--wind takes min,max");

    ScenarioSpec base;
    base.n_scenarios = a.n_scenarios;
    base.delta_t = a.delta_t;
    base.errors = {a.human_false, a.nlp_error, a.ami_fail};
    base.report_lambda = a.report_lambda > 0.0
                             ? a.report_lambda
                             : 2.0 * model.evidence.lambda1;
    base.context.wind_min = wind[0];
    base.context.wind_max = wind[1];
    base.seed = cfg.seed;

    std::vector<Job> jobs;
    for (std::size_t f = 0; f < feeders.size(); ++f)
        for (double o : observability)
            for (std::size_t k : outages) {
                Job j;
                j.feeder = f;
                j.spec = base;
                j.spec.observability = o;
                j.spec.n_outages = k;
                j.spec.validate(feeders[f].topology);
                j.outcomes.resize(a.n_scenarios);
                jobs.push_back(std::move(j));
            }
    const double setup_s = seconds_since(start);

    const fs::path root(a.out);
    ensure_dir(root);
    std::mutex io;
    const auto run_start = Clock::now();
    // One pool over every (feeder, level, scenario) task.
    parallel_for(jobs.size() * a.n_scenarios, [&](std::size_t task) {
        Job& j = jobs[task / a.n_scenarios];
        const std::size_t i = task % a.n_scenarios;
        const Feeder& f = feeders[j.feeder];
        const Scenario s = generate_scenario(f.topology, j.spec, i);
        j.outcomes[i] = evaluate_scenario(f.topology, s, model, cfg);
        if (a.dump) {
            std::lock_guard lock(io);
            dump_scenario(root / "scenarios" / f.name /
                              (obs_label(j.spec.observability) + "_k" +
                               std::to_string(j.spec.n_outages)) /
                              std::to_string(i),
                          f, s, j.outcomes[i], cfg);
        }
    });
    const double run_s = seconds_since(run_start);

    struct Row {
        std::string feeder;
        const Job* job;
    };
    std::vector<Row> rows;
    for (const auto& j : jobs)
        rows.push_back({feeders[j.feeder].name, &j});
    std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
        return std::tie(x.feeder, x.job->spec.observability,
                        x.job->spec.n_outages) <
               std::tie(y.feeder, y.job->spec.observability,
                        y.job->spec.n_outages);
    });

    auto metrics_csv = open_out(root / "metrics.csv");
    auto runtime_csv = open_out(root / "runtime.csv");
    metrics_csv << "feeder,branches,customers,observability,n_outages,"
                   "scenarios,failed,accuracy,precision,recall,f1,"
                   "system_accuracy,undefined_precision,undefined_recall,"
                   "undefined_f1\n";
    runtime_csv << "feeder,branches,customers,observability,n_outages,"
                   "mean_seconds,total_seconds\n";
    for (const auto& r : rows) {
        const Job& j = *r.job;
        const FeederTopology& t = feeders[j.feeder].topology;
        std::vector<MetricReport> reports;
        std::size_t failed = 0;
        double secs = 0.0;
        for (const auto& o : j.outcomes) {
            if (!o.ok) {
                ++failed;
                continue;
            }
            reports.push_back(o.report);
            secs += o.seconds;
        }
        const std::string key = r.feeder + ',' +
                                std::to_string(t.branch_count()) + ',' +
                                std::to_string(t.customer_count()) + ',' +
                                fmt(j.spec.observability) + ',' +
                                std::to_string(j.spec.n_outages);
        metrics_csv << key << ',' << reports.size() << ',' << failed;
        if (reports.empty()) {
            metrics_csv << ",,,,,,0,0,0\n";
        } else {
            const MetricReport m = aggregate(reports);
            metrics_csv << ',' << fmt(m.accuracy) << ',' << fmt(m.precision)
                        << ',' << fmt(m.recall) << ',' << fmt(m.f1) << ','
                        << fmt(m.system_accuracy) << ','
                        << m.undefined_precision << ',' << m.undefined_recall
                        << ',' << m.undefined_f1 << '\n';
        }
        const double n = static_cast<double>(std::max<std::size_t>(1, reports.size()));
        runtime_csv << key << ',' << fmt(secs / n) << ',' << fmt(secs) << '\n';
    }

    json fj = json::array();
    for (const auto& f : feeders)
        fj.push_back({{"name", f.name},
                      {"source", f.source},
                      {"branches", f.topology.branch_count()},
                      {"customers", f.topology.customer_count()}});
    json m = {{"command", "simulate"},
              {"version", version},
              {"feeders", fj},
              {"generator", a.shape.to_json()},
              {"params", a.params},
              {"observability", observability},
              {"n_outages", outages},
              {"n_scenarios", a.n_scenarios},
              {"delta_t", a.delta_t},
              {"errors",
               {{"human_false", a.human_false},
                {"nlp_error", a.nlp_error},
                {"ami_fail", a.ami_fail}}},
              {"report_lambda", base.report_lambda},
              {"wind", wind},
              {"gibbs", gibbs_json(cfg)},
              {"workers", worker_count()},
              {"seconds", {{"setup", setup_s}, {"run", run_s}}},
              {"outputs", {"metrics.csv", "runtime.csv"}}};
    open_out(root / "manifest.json") << m.dump(2) << '\n';
    for (const auto& f : feeders)
        if (f.source == "generated") {
            ensure_dir(root / "feeders");
            write_topology(lvalue(open_out(root / "feeders" / (f.name + ".txt"))),
                           f.topology);
        }
    out << "wrote " << rows.size() << " metric rows to "
        << (root / "metrics.csv").string() << '\n';
    return ok;
}

// ------------------------------------------------------------ calibrate

struct CalibrateArgs {
    std::string topology;
    std::size_t generate = 0;
    ShapeFlags shape;
    std::string params;
    std::string sweep = "500,1000,2000,4000,8000";
    std::size_t chains = 10;
    std::size_t cases = 10;
    double threshold = 1.1;
    double warmup = 0.5;
    double observability = 0.5;
    std::size_t n_outages = 1;
    std::string scan = "topo";
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
    const auto start = Clock::now();
    CalibrationConfig cc;
    cc.sweep = parse_sizes(a.sweep, "sweep");
    cc.chains = a.chains;
    cc.threshold = a.threshold;
    cc.warmup = a.warmup;
    cc.scan_order = parse_scan_order(a.scan);
    cc.seed = a.seed;
    cc.validate();
    if (a.cases < 1)
        throw ValidationError("--cases must be at least 1");

    std::vector<Feeder> feeders =
        load_feeders(a.topology.empty() ? std::vector<std::string>{}
                                        : std::vector<std::string>{a.topology},
                     a.generate ? std::to_string(a.generate) : "", a.shape);
    if (feeders.size() != 1)
        throw ValidationError("calibrate takes one feeder");
    const FeederTopology& t = feeders.front().topology;
    const ModelParams model = load_model(a.params);
    model.validate();

    ScenarioSpec spec;
    spec.observability = a.observability;
    spec.n_outages = a.n_outages;
    spec.report_lambda = 2.0 * model.evidence.lambda1;
    spec.seed = a.seed;
    spec.validate(t);
    std::vector<CalibrationCase> cases;
    for (std::size_t i = 0; i < a.cases; ++i) {
        const Scenario s = generate_scenario(t, spec, i);
        const EpisodeParams ep =
            draw_episode(model, scenario_seed(a.seed, i));
        BayesNet bn = build_bn(t, model, ep, s.meter_coverage, s.evidence);
        Assignment clamped = clamp_evidence(bn, t, s.evidence);
        if (!has_support(bn, clamped))
            throw ZeroSupportError("calibration case " + std::to_string(i) +
                                   " has contradictory evidence");
        cases.push_back({std::move(bn), std::move(clamped)});
    }
    const CalibrationResult r = calibrate_iterations(cases, cc);
    const double run_s = seconds_since(start);

    std::vector<std::string> names;
    for (const auto& v : r.variables)
        names.push_back(node_name(v, t));
    const auto order =
        order_by_id(names.size(), [&](std::size_t i) { return names[i]; });

    auto emit = [&](std::ostream& rhat, std::ostream& summary) {
        rhat << "M,variable,R\n";
        summary << "M,max_R,degenerate,converged\n";
        for (const auto& p : r.points) {
            for (auto v : order)
                rhat << p.iterations << ',' << names[v] << ',' << fmt(p.r[v])
                     << '\n';
            summary << p.iterations << ',' << fmt(p.max_r) << ','
                    << p.degenerate << ',' << (p.converged ? 1 : 0) << '\n';
        }
    };
    if (a.out.empty()) {
        std::ostringstream sink;
        emit(sink, out);
    } else {
        const fs::path dir(a.out);
        ensure_dir(dir);
        auto rhat = open_out(dir / "rhat.csv");
        auto summary = open_out(dir / "summary.csv");
        emit(rhat, summary);
        json m = {{"command", "calibrate"},
                  {"version", version},
                  {"feeder", feeders.front().source},
                  {"generator", a.shape.to_json()},
                  {"params", a.params},
                  {"sweep", cc.sweep},
                  {"chains", cc.chains},
                  {"cases", a.cases},
                  {"threshold", cc.threshold},
                  {"warmup", cc.warmup},
                  {"observability", a.observability},
                  {"n_outages", a.n_outages},
                  {"scan", a.scan},
                  {"seed", a.seed},
                  {"chosen_M", r.iterations()},
                  {"converged", r.converged},
                  {"seconds", {{"run", run_s}}},
                  {"outputs", {"rhat.csv", "summary.csv"}}};
        open_out(dir / "manifest.json") << m.dump(2) << '\n';
    }
    out << "chosen M=" << r.iterations()
        << " max_R=" << fmt(r.points[r.chosen].max_r)
        << (r.converged ? " converged" : " not converged") << '\n';
    return ok;
}

// ------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string predictions, truth, out;
    double beta = 1.0;
};

// Relative scenario directory -> state file, for every `name` below root.
std::map<std::string, fs::path> find_state_files(const fs::path& root,
                                                 const std::string& name) {
    if (!fs::is_directory(root))
        throw ValidationError("not a directory: '" + root.string() + "'");
    std::map<std::string, fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().filename() == name)
            out[fs::relative(e.path().parent_path(), root).generic_string()] =
                e.path();
    return out;
}

std::map<std::string, int> read_states(const fs::path& p, const char* kw) {
    std::ifstream in(p);
    if (!in)
        throw ValidationError("cannot open '" + p.string() + "'");
    try {
        return load_states(in, kw);
    } catch (const ParseError& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const fs::path pred_root(a.predictions), truth_root(a.truth);
    const auto preds = find_state_files(pred_root, "pred.txt");
    const auto truths = find_state_files(truth_root, "truth.txt");
    if (preds.empty())
        throw ValidationError("no pred.txt files under '" + a.predictions +
                              "'");
    for (const auto& [id, path] : preds)
        if (!truths.count(id))
            throw ValidationError(
                "missing truth file: '" +
                (truth_root / id / "truth.txt").lexically_normal().string() +
                "'");
    for (const auto& [id, path] : truths)
        if (!preds.count(id))
            throw ValidationError(
                "missing prediction file: '" +
                (pred_root / id / "pred.txt").lexically_normal().string() +
                "'");

    std::vector<MetricReport> reports;
    for (const auto& [id, path] : preds) {
        const auto pred = read_states(path, "pred");
        const auto truth = read_states(truths.at(id), "truth");
        std::map<std::string, int> pb, tb;
        for (const auto& [k, v] : pred)
            if (k.rfind("D:", 0) == 0)
                pb[k] = v;
        for (const auto& [k, v] : truth)
            if (k.rfind("D:", 0) == 0)
                tb[k] = v;
        MetricReport r;
        try {
            r = metrics(confusion(pb, tb), a.beta);
            confusion(pred, truth);
        } catch (const ValidationError& e) {
            throw ValidationError("scenario '" + id + "': " + e.what());
        }
        r.system_accuracy = pred == truth ? 1.0 : 0.0;
        reports.push_back(r);
    }
    const MetricReport m = aggregate(reports);
    std::ostringstream csv;
    csv << "scenarios,accuracy,precision,recall,f1,system_accuracy,"
           "undefined_precision,undefined_recall,undefined_f1\n"
        << m.scenarios << ',' << fmt(m.accuracy) << ',' << fmt(m.precision)
        << ',' << fmt(m.recall) << ',' << fmt(m.f1) << ','
        << fmt(m.system_accuracy) << ',' << m.undefined_precision << ','
        << m.undefined_recall << ',' << m.undefined_f1 << '\n';
    if (a.out.empty())
        out << csv.str();
    else
        open_out(a.out) << csv.str();
    return ok;
}

// ------------------------------------------------------------- generate

struct GenerateArgs {
    std::size_t branches = 51;
    ShapeFlags shape;
    std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    const FeederTopology t =
        generate_topology(a.branches, a.shape.get(), a.shape.topology_seed);
    if (a.out.empty())
        write_topology(out, t);
    else
        write_topology(lvalue(open_out(a.out)), t);
    return ok;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"Outage location on radial distribution feeders"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    InferArgs ia;
    auto* infer = app.add_subcommand("infer", "locate outages from evidence");
    infer->add_option("--topology", ia.topology, "feeder file")->required();
    infer->add_option("--evidence", ia.evidence, "evidence file")->required();
    infer->add_option("--params", ia.params, "model parameter file");
    infer->add_option("--out", ia.out, "output directory");
    infer->add_flag("--exact", ia.exact, "enumerate instead of sampling");
    infer->add_option("--exact-limit", ia.exact_limit,
                      "largest unknown count for --exact");
    ia.gibbs.add(infer);

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo evaluation");
    sim->add_option("--topology", sa.topologies, "feeder files")
        ->expected(1, -1);
    sim->add_option("--generate", sa.generate,
                    "generated feeder sizes, comma separated");
    sa.shape.add(sim);
    sim->add_option("--observability", sa.observability,
                    "meter fractions, comma separated");
    sim->add_option("--n-scenarios", sa.n_scenarios, "scenarios per level");
    sim->add_option("--n-outages", sa.n_outages,
                    "outages per scenario: k, k1,k2 or lo..hi");
    sim->add_option("--params", sa.params, "model parameter file");
    sim->add_option("--delta-t", sa.delta_t, "evidence window, minutes");
    sim->add_option("--human-false", sa.human_false, "false report rate");
    sim->add_option("--nlp-error", sa.nlp_error, "lost report rate");
    sim->add_option("--ami-fail", sa.ami_fail, "lost last gasp rate");
    sim->add_option("--report-lambda", sa.report_lambda,
                    "report rate used to generate evidence, per minute");
    sim->add_option("--wind", sa.wind, "wind range min,max in m/s");
    sim->add_option("--out", sa.out, "output directory")->required();
    sim->add_flag("--dump", sa.dump, "write one directory per scenario");
    sa.gibbs.add(sim);

    CalibrateArgs ca;
    auto* cal = app.add_subcommand("calibrate", "choose the sweep count M");
    cal->add_option("--topology", ca.topology, "feeder file");
    cal->add_option("--generate", ca.generate, "generated feeder size");
    ca.shape.add(cal);
    cal->add_option("--params", ca.params, "model parameter file");
    cal->add_option("--sweep", ca.sweep, "increasing M values");
    cal->add_option("--chains", ca.chains, "sequences per case");
    cal->add_option("--cases", ca.cases, "simulated evidence scenarios");
    cal->add_option("--threshold", ca.threshold, "R threshold");
    cal->add_option("--warmup", ca.warmup, "warm-up fraction discarded");
    cal->add_option("--observability", ca.observability,
                    "meter fraction of the cases");
    cal->add_option("--n-outages", ca.n_outages, "outages per case");
    cal->add_option("--scan", ca.scan, "scan order: topo or random");
    cal->add_option("--seed", ca.seed, "base random seed");
    cal->add_option("--out", ca.out, "output directory");

    EvaluateArgs ea;
    auto* eval = app.add_subcommand("evaluate", "score predictions");
    eval->add_option("--predictions", ea.predictions,
                     "directory of pred.txt files")
        ->required();
    eval->add_option("--truth", ea.truth, "directory of truth.txt files")
        ->required();
    eval->add_option("--beta", ea.beta, "F-score weight");
    eval->add_option("--out", ea.out, "output CSV file");

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "write a synthetic feeder");
    gen->add_option("--branches", ga.branches, "branch count");
    ga.shape.add(gen);
    gen->add_option("--out", ga.out, "output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForVersion&) {
        out << version << '\n';
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }

    try {
        if (*infer)
            return cmd_infer(ia, out, err);
        if (*sim)
            return cmd_simulate(sa, out);
        if (*cal)
            return cmd_calibrate(ca, out);
        if (*eval)
            return cmd_evaluate(ea, out);
        return cmd_generate(ga, out);
    } catch (const ZeroSupportError& e) {
        err << "error: zero-support: " << e.what() << '\n';
        return zero_support;
    } catch (const TooLargeError& e) {
        err << "error: too-large: " << e.what() << '\n';
        return usage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
}

} // namespace outage::cli
