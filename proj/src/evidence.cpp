#include "outage/evidence.hpp"

#include <fstream>
#include <iomanip>

#include "outage/error.hpp"
#include "text_util.hpp"

namespace outage {

std::vector<bool> meter_coverage_of(const FeederTopology& t) {
    std::vector<bool> cov(t.customer_count());
    for (std::size_t c = 0; c < t.customer_count(); ++c)
        cov[c] = t.customer(c).has_meter;
    return cov;
}

DenseEvidence densify(const FeederTopology& t, const EvidenceSet& ev,
                      const std::vector<bool>& meter_coverage) {
    if (meter_coverage.size() != t.customer_count())
        throw ValidationError("meter coverage size does not match customers");
    DenseEvidence d;
    d.human.assign(t.customer_count(), 0);
    d.meter.assign(t.customer_count(), 0);
    d.branch.resize(t.branch_count());
    for (std::size_t b = 0; b < t.branch_count(); ++b)
        d.branch[b].physical = t.branch(b).physical;

    for (const auto& [id, v] : ev.human) {
        if (v != 0 && v != 1)
            throw ValidationError("human evidence for '" + id +
                                  "' is not binary");
        d.human[t.customer_index(id)] = v;
    }
    for (const auto& [id, v] : ev.meter) {
        std::size_t c = t.customer_index(id);
        if (!meter_coverage[c])
            throw ValidationError("meter evidence for unmetered customer '" +
                                  id + "'");
        if (v != 0 && v != 1)
            throw ValidationError("meter evidence for '" + id +
                                  "' is not binary");
        d.meter[c] = v;
    }
    for (const auto& [id, w] : ev.wind) {
        if (!(w >= 0.0))
            throw ValidationError("negative wind speed on branch '" + id +
                                  "'");
        d.branch[t.branch_index(id)].wind_speed = w;
    }
    for (const auto& [id, veg] : ev.vegetation) {
        if (!(veg.diameter_cm >= 0.0) || !(veg.species_constant >= 0.0))
            throw ValidationError("negative vegetation value on branch '" +
                                  id + "'");
        d.branch[t.branch_index(id)].vegetation = veg;
    }
    return d;
}

EvidenceSet load_evidence(std::istream& in) {
    EvidenceSet ev;
    std::string text;
    int line = 0;
    auto expect = [&](const std::vector<std::string_view>& tok,
                      std::size_t n) {
        if (tok.size() != n)
            throw ParseError("'" + std::string(tok[0]) + "' record needs " +
                                 std::to_string(n - 1) + " fields",
                             line);
    };
    auto insert_unique = [&](auto& map, std::string key, auto value) {
        if (!map.emplace(key, value).second)
            throw ParseError("duplicate evidence for '" + key + "'", line);
    };
    while (std::getline(in, text)) {
        ++line;
        if (detail::is_skippable(text))
            continue;
        auto tok = detail::split_ws(text);
        const auto kind = tok[0];
        if (kind == "human") {
            expect(tok, 3);
            insert_unique(ev.human, std::string(tok[1]),
                          detail::parse_bit(tok[2], "human", line));
        } else if (kind == "meter") {
            expect(tok, 3);
            insert_unique(ev.meter, std::string(tok[1]),
                          detail::parse_bit(tok[2], "meter", line));
        } else if (kind == "wind") {
            expect(tok, 3);
            insert_unique(ev.wind, std::string(tok[1]),
                          detail::parse_double(tok[2], "wind", line));
        } else if (kind == "veg") {
            expect(tok, 4);
            insert_unique(
                ev.vegetation, std::string(tok[1]),
                Vegetation{detail::parse_double(tok[2], "species", line),
                           detail::parse_double(tok[3], "diameter", line)});
        } else if (kind == "window") {
            expect(tok, 2);
            if (ev.elapsed_window)
                throw ParseError("duplicate window record", line);
            ev.elapsed_window = detail::parse_double(tok[1], "window", line);
        } else {
            throw ParseError("unknown evidence record '" + std::string(kind) +
                                 "'",
                             line);
        }
    }
    return ev;
}

EvidenceSet load_evidence_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open evidence file '" + path + "'");
    try {
        return load_evidence(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_evidence(std::ostream& out, const EvidenceSet& ev) {
    auto prec = out.precision();
    out << std::setprecision(17);
    if (ev.elapsed_window)
        out << "window " << *ev.elapsed_window << '\n';
    for (const auto& [id, w] : ev.wind)
        out << "wind " << id << ' ' << w << '\n';
    for (const auto& [id, v] : ev.vegetation)
        out << "veg " << id << ' ' << v.species_constant << ' '
            << v.diameter_cm << '\n';
    for (const auto& [id, v] : ev.human)
        out << "human " << id << ' ' << v << '\n';
    for (const auto& [id, v] : ev.meter)
        out << "meter " << id << ' ' << v << '\n';
    out.precision(prec);
}

} // namespace outage
