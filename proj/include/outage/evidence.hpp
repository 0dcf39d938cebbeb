#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "outage/factors.hpp"
#include "outage/feeder.hpp"

namespace outage {

/// Observed evidence of one outage episode, keyed by feeder ids.
struct EvidenceSet {
    std::map<std::string, int> human;  // customer id -> E^h
    std::map<std::string, int> meter;  // metered customer id -> E^m
    std::map<std::string, double> wind; // branch id -> m/s
    std::map<std::string, Vegetation> vegetation;
    /// Window actually waited before inference; overrides the params value.
    std::optional<double> elapsed_window;
};

/// Evidence aligned with topology indices; absent entries take their
/// defaults (no report, no last gasp, calm wind, no vegetation).
struct DenseEvidence {
    std::vector<int> human;         // per customer
    std::vector<int> meter;         // per customer, ignored when unmetered
    std::vector<BranchEvidence> branch; // per branch
};

/// Throws ValidationError for unknown ids, meter evidence on an unmetered
/// customer, or negative wind / vegetation values.
DenseEvidence densify(const FeederTopology& t, const EvidenceSet& ev,
                      const std::vector<bool>& meter_coverage);

/// Meter coverage declared by the feeder file.
std::vector<bool> meter_coverage_of(const FeederTopology& t);

/// Parses `human <cid> <0|1>`, `meter <cid> <0|1>`, `wind <bid> <m/s>`,
/// `veg <bid> <species-const> <diameter-cm>` and `window <minutes>` lines.
EvidenceSet load_evidence(std::istream& in);
EvidenceSet load_evidence_file(const std::string& path);
/// Writes every record, sorted by id.
void write_evidence(std::ostream& out, const EvidenceSet& ev);

} // namespace outage
