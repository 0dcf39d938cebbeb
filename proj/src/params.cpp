#include "outage/params.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>

#include "outage/error.hpp"
#include "text_util.hpp"

namespace outage {

namespace {

void check_probability(const ProbabilitySource& src, const char* name) {
    if (const double* p = std::get_if<double>(&src)) {
        if (!(*p >= 0.0 && *p <= 1.0))
            throw ValidationError(std::string(name) + " must lie in [0,1]");
    } else {
        const auto& b = std::get<BetaPrior>(src);
        if (!(b.alpha > 0.0 && b.beta > 0.0))
            throw ValidationError(std::string(name) +
                                  " Beta shapes must be positive");
    }
}

ProbabilitySource parse_source(std::string_view value, std::string_view key,
                               int line) {
    auto [kind, rest] = detail::split_key_value(value, line);
    if (kind == "fixed")
        return detail::parse_double(rest, key, line);
    if (kind == "beta") {
        auto parts = detail::split_on(rest, ',');
        if (parts.size() != 2)
            throw ParseError("beta prior for " + std::string(key) +
                                 " needs two shapes",
                             line);
        return BetaPrior{detail::parse_double(parts[0], key, line),
                         detail::parse_double(parts[1], key, line)};
    }
    throw ParseError("expected fixed=<p> or beta=<a>,<b> for " +
                         std::string(key),
                     line);
}

void write_source(std::ostream& out, const char* key,
                  const ProbabilitySource& src) {
    out << key << ' ';
    if (const double* p = std::get_if<double>(&src))
        out << "fixed=" << *p << '\n';
    else {
        const auto& b = std::get<BetaPrior>(src);
        out << "beta=" << b.alpha << ',' << b.beta << '\n';
    }
}

} // namespace

void ModelParams::validate() const {
    (void)fragility(); // checks chi, xi, alpha_tree, w_crit
    check_probability(evidence.pi2, "pi2");
    check_probability(evidence.pi3, "pi3");
    check_probability(evidence.pi4, "pi4");
    check_probability(evidence.pi5, "pi5");
    if (!(evidence.lambda1 > 0.0))
        throw ValidationError("lambda1 must be positive");
    if (!(evidence.delta_t >= 0.0))
        throw ValidationError("delta_t must be non-negative");
}

double EpisodeParams::report_probability() const {
    return outage::report_probability(lambda1, delta_t);
}

EpisodeParams resolve_episode(const ModelParams& params,
                              std::mt19937_64& rng) {
    const auto& ev = params.evidence;
    EpisodeParams ep;
    ep.pi2 = resolve(ev.pi2, rng);
    ep.pi3 = resolve(ev.pi3, rng);
    ep.pi4 = resolve(ev.pi4, rng);
    ep.pi5 = resolve(ev.pi5, rng);
    ep.lambda1 = ev.lambda1;
    ep.delta_t = ev.delta_t;
    return ep;
}

bool has_priors(const ModelParams& params) {
    const auto& ev = params.evidence;
    return !(is_fixed(ev.pi2) && is_fixed(ev.pi3) && is_fixed(ev.pi4) &&
             is_fixed(ev.pi5));
}

EpisodeParams resolve_fixed(const ModelParams& params) {
    if (has_priors(params))
        throw ValidationError(
            "parameter set has Beta priors; an episode seed is required");
    std::mt19937_64 unused;
    return resolve_episode(params, unused);
}

ModelParams load_params(std::istream& in) {
    ModelParams p;
    std::set<std::string> seen;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (detail::is_skippable(text))
            continue;
        auto tok = detail::split_ws(text);
        if (tok.size() != 2)
            throw ParseError("expected '<key> <value>'", line);
        const std::string key(tok[0]);
        const auto value = tok[1];
        if (!seen.insert(key).second)
            throw ParseError("duplicate key '" + key + "'", line);

        auto num = [&] { return detail::parse_double(value, key, line); };
        if (key == "pi2")
            p.evidence.pi2 = parse_source(value, key, line);
        else if (key == "pi3")
            p.evidence.pi3 = parse_source(value, key, line);
        else if (key == "pi4")
            p.evidence.pi4 = parse_source(value, key, line);
        else if (key == "pi5")
            p.evidence.pi5 = parse_source(value, key, line);
        else if (key == "lambda1")
            p.evidence.lambda1 = num();
        else if (key == "delta_t_min")
            p.evidence.delta_t = num();
        else if (key == "chi")
            p.chi = num();
        else if (key == "xi")
            p.xi = num();
        else if (key == "alpha_tree")
            p.alpha_tree = num();
        else if (key == "w_crit")
            p.conductor.w_crit = num();
        else if (key == "tree_intercept")
            p.conductor.tree_intercept = num();
        else if (key == "tree_slope")
            p.conductor.tree_slope = num();
        else
            throw ParseError("unknown key '" + key + "'", line);
    }
    p.validate();
    return p;
}

ModelParams load_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open params file '" + path + "'");
    try {
        return load_params(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_params(std::ostream& out, const ModelParams& p) {
    auto flags = out.flags();
    auto prec = out.precision();
    out << std::setprecision(17);
    write_source(out, "pi2", p.evidence.pi2);
    write_source(out, "pi3", p.evidence.pi3);
    write_source(out, "pi4", p.evidence.pi4);
    write_source(out, "pi5", p.evidence.pi5);
    out << "lambda1 " << p.evidence.lambda1 << '\n'
        << "delta_t_min " << p.evidence.delta_t << '\n'
        << "chi " << p.chi << '\n'
        << "xi " << p.xi << '\n'
        << "alpha_tree " << p.alpha_tree << '\n'
        << "w_crit " << p.conductor.w_crit << '\n'
        << "tree_intercept " << p.conductor.tree_intercept << '\n'
        << "tree_slope " << p.conductor.tree_slope << '\n';
    out.flags(flags);
    out.precision(prec);
}

} // namespace outage
