#include "outage/metrics.hpp"

#include "outage/error.hpp"

namespace outage {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
}

ConfusionCounts confusion(std::span<const int> pred,
                          std::span<const int> truth) {
    if (pred.size() != truth.size())
        throw ValidationError("prediction and truth sizes differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0;
        const bool t = truth[i] != 0;
        if (p && t)
            ++c.tp;
        else if (!p && !t)
            ++c.tn;
        else if (p)
            ++c.fp;
        else
            ++c.fn;
    }
    return c;
}

ConfusionCounts confusion(const std::map<std::string, int>& pred,
                          const std::map<std::string, int>& truth) {
    if (pred.size() != truth.size())
        throw ValidationError("prediction has " + std::to_string(pred.size()) +
                              " entries, truth has " +
                              std::to_string(truth.size()));
    std::vector<int> p, t;
    p.reserve(pred.size());
    t.reserve(truth.size());
    auto it = truth.begin();
    for (const auto& [key, value] : pred) {
        if (it->first != key)
            throw ValidationError("key mismatch: '" + key + "' vs '" +
                                  it->first + "'");
        p.push_back(value);
        t.push_back(it->second);
        ++it;
    }
    return confusion(p, t);
}

MetricReport metrics(const ConfusionCounts& c, double beta) {
    MetricReport r;
    r.beta = beta;
    const auto total = c.total();
    r.accuracy = total ? static_cast<double>(c.tp + c.tn) /
                             static_cast<double>(total)
                       : 1.0;
    if (c.tp + c.fp > 0)
        r.precision = static_cast<double>(c.tp) /
                      static_cast<double>(c.tp + c.fp);
    else
        r.undefined_precision = 1;
    if (c.tp + c.fn > 0)
        r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    else
        r.undefined_recall = 1;
    if (r.precision && r.recall) {
        const double b2 = beta * beta;
        const double den = b2 * *r.precision + *r.recall;
        if (den > 0.0)
            r.f1 = (b2 + 1.0) * *r.precision * *r.recall / den;
    }
    if (!r.f1)
        r.undefined_f1 = 1;
    return r;
}

MetricReport aggregate(std::span<const MetricReport> reports) {
    if (reports.empty())
        throw ValidationError("aggregate needs at least one report");
    MetricReport out;
    out.beta = reports.front().beta;
    out.scenarios = 0;
    double acc = 0.0, prec = 0.0, rec = 0.0, f = 0.0, sys = 0.0;
    std::size_t n_prec = 0, n_rec = 0, n_f = 0, n_sys = 0;
    for (const auto& r : reports) {
        out.scenarios += r.scenarios;
        acc += r.accuracy * static_cast<double>(r.scenarios);
        if (r.precision) {
            prec += *r.precision;
            ++n_prec;
        }
        if (r.recall) {
            rec += *r.recall;
            ++n_rec;
        }
        if (r.f1) {
            f += *r.f1;
            ++n_f;
        }
        if (r.system_accuracy) {
            sys += *r.system_accuracy;
            ++n_sys;
        }
        out.undefined_precision += r.undefined_precision;
        out.undefined_recall += r.undefined_recall;
        out.undefined_f1 += r.undefined_f1;
    }
    out.accuracy = acc / static_cast<double>(out.scenarios);
    if (n_prec)
        out.precision = prec / static_cast<double>(n_prec);
    if (n_rec)
        out.recall = rec / static_cast<double>(n_rec);
    if (n_f)
        out.f1 = f / static_cast<double>(n_f);
    if (n_sys)
        out.system_accuracy = sys / static_cast<double>(n_sys);
    return out;
}

} // namespace outage
