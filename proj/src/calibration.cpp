#include "outage/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "outage/error.hpp"
#include "outage/parallel.hpp"

namespace outage {

ChainMatrix split_and_stack(const std::vector<std::vector<double>>& sequences,
                            double warmup) {
    if (sequences.empty())
        throw ValidationError("no sequences to split");
    if (!(warmup >= 0.0 && warmup < 1.0))
        throw ValidationError("warm-up fraction must lie in [0,1)");
    const std::size_t len = sequences.front().size();
    for (const auto& s : sequences)
        if (s.size() != len)
            throw ValidationError("sequences differ in length");
    const std::size_t skip = burn_in_count(len, warmup);
    std::size_t kept = len - skip;
    kept -= kept % 2;
    if (kept < 2)
        throw ValidationError("fewer than 2 samples left after warm-up");

    ChainMatrix out;
    out.n = sequences.size();
    out.m = kept / 2;
    for (const auto& s : sequences) {
        auto first = s.begin() + static_cast<std::ptrdiff_t>(skip);
        auto mid = first + static_cast<std::ptrdiff_t>(out.m);
        out.rows.emplace_back(first, mid);
        out.rows.emplace_back(mid, mid + static_cast<std::ptrdiff_t>(out.m));
    }
    return out;
}

RHat r_hat_from_moments(const std::vector<double>& means,
                        const std::vector<double>& variances, std::size_t n,
                        std::size_t m) {
    if (means.size() != variances.size() || means.size() != 2 * n || n == 0)
        throw ValidationError("expected 2n row moments");
    if (m < 2)
        throw ValidationError("rows need at least 2 samples");
    const double rows = static_cast<double>(means.size());
    double grand = 0.0;
    for (double x : means)
        grand += x;
    grand /= rows;

    RHat r;
    double between = 0.0, within = 0.0;
    for (std::size_t j = 0; j < means.size(); ++j) {
        const double d = means[j] - grand;
        between += d * d;
        within += variances[j];
    }
    r.B = static_cast<double>(m) / (rows - 1.0) * between;
    r.V = within / rows;
    if (!(r.V > 0.0)) {
        r.degenerate = true;
        r.R = r.B > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
        return r;
    }
    const double nn = static_cast<double>(n);
    r.R = std::sqrt(((nn - 1.0) / nn * r.V + r.B / nn) / r.V);
    return r;
}

RHat r_hat(const ChainMatrix& matrix) {
    if (matrix.rows.size() != 2 * matrix.n)
        throw ValidationError("matrix must have 2n rows");
    std::vector<double> means, vars;
    for (const auto& row : matrix.rows) {
        if (row.size() != matrix.m)
            throw ValidationError("ragged chain matrix");
        double mean = 0.0;
        for (double x : row)
            mean += x;
        mean /= static_cast<double>(row.size());
        double ss = 0.0;
        for (double x : row)
            ss += (x - mean) * (x - mean);
        means.push_back(mean);
        vars.push_back(row.size() > 1 ? ss / static_cast<double>(row.size() - 1)
                                      : 0.0);
    }
    return r_hat_from_moments(means, vars, matrix.n, matrix.m);
}

void CalibrationConfig::validate() const {
    if (sweep.empty())
        throw ValidationError("sweep must not be empty");
    for (std::size_t i = 1; i < sweep.size(); ++i)
        if (sweep[i] <= sweep[i - 1])
            throw ValidationError("sweep must be strictly increasing");
    if (chains < 1)
        throw ValidationError("calibration needs at least one chain");
    if (!(threshold > 0.0))
        throw ValidationError("threshold must be positive");
    if (!(warmup >= 0.0 && warmup < 1.0))
        throw ValidationError("warm-up fraction must lie in [0,1)");
}

namespace {

struct Window {
    std::size_t start = 0; // first retained sample
    std::size_t m = 0;     // half length
};

Window window_for(std::size_t iterations, double warmup) {
    Window w;
    w.start = burn_in_count(iterations, warmup);
    w.m = (iterations - w.start) / 2;
    return w;
}

} // namespace

CalibrationResult calibrate_iterations(const std::vector<CalibrationCase>& cases,
                                       const CalibrationConfig& cfg) {
    cfg.validate();
    if (cases.empty())
        throw ValidationError("calibration needs at least one case");
    const std::size_t n_unknown = cases.front().bn.unknowns().size();
    for (const auto& c : cases)
        if (c.bn.unknowns().size() != n_unknown)
            throw ValidationError("calibration cases differ in their unknowns");

    std::vector<Window> windows;
    std::vector<std::size_t> marks; // prefix-count boundaries
    for (std::size_t M : cfg.sweep) {
        Window w = window_for(M, cfg.warmup);
        if (w.m < 2)
            throw ValidationError("sweep point " + std::to_string(M) +
                                  " leaves fewer than 2 samples per half");
        windows.push_back(w);
        marks.push_back(w.start);
        marks.push_back(w.start + w.m);
        marks.push_back(w.start + 2 * w.m);
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    auto mark_index = [&](std::size_t pos) {
        return static_cast<std::size_t>(
            std::lower_bound(marks.begin(), marks.end(), pos) - marks.begin());
    };

    GibbsConfig gc;
    gc.iterations = cfg.sweep.back();
    gc.scan_order = cfg.scan_order;
    gc.seed = cfg.seed;
    gc.keep_samples = true;

    // counts[case][chain][mark][unknown]: ones among the first `mark` samples.
    using Counts = std::vector<std::vector<std::uint32_t>>;
    std::vector<Counts> counts(cases.size() * cfg.chains);
    parallel_for(counts.size(), [&](std::size_t task) {
        const std::size_t ci = task / cfg.chains;
        const std::size_t chain = task % cfg.chains;
        GibbsConfig run = gc;
        run.seed = gc.seed + ci;
        const ChainTrace tr = run_chain(cases[ci].bn, cases[ci].evidence, run,
                                        chain);
        Counts out(marks.size(), std::vector<std::uint32_t>(n_unknown, 0));
        std::vector<std::uint32_t> acc(n_unknown, 0);
        std::size_t next = 0;
        for (std::size_t t = 0; t <= tr.iterations && next < marks.size(); ++t) {
            while (next < marks.size() && marks[next] == t)
                out[next++] = acc;
            if (t == tr.iterations)
                break;
            const std::uint8_t* row = tr.values.data() + t * n_unknown;
            for (std::size_t u = 0; u < n_unknown; ++u)
                acc[u] += row[u];
        }
        counts[task] = std::move(out);
    });

    CalibrationResult result;
    for (int u : cases.front().bn.unknowns())
        result.variables.push_back(cases.front().bn.ref(u));

    for (std::size_t p = 0; p < cfg.sweep.size(); ++p) {
        const Window& w = windows[p];
        const std::size_t k0 = mark_index(w.start);
        const std::size_t k1 = mark_index(w.start + w.m);
        const std::size_t k2 = mark_index(w.start + 2 * w.m);
        const double m = static_cast<double>(w.m);

        SweepPoint sp;
        sp.iterations = cfg.sweep[p];
        sp.r.assign(n_unknown, 0.0);
        std::vector<std::size_t> degenerate(n_unknown, 0);
        std::vector<double> means(2 * cfg.chains), vars(2 * cfg.chains);
        for (std::size_t ci = 0; ci < cases.size(); ++ci) {
            for (std::size_t u = 0; u < n_unknown; ++u) {
                for (std::size_t ch = 0; ch < cfg.chains; ++ch) {
                    const Counts& c = counts[ci * cfg.chains + ch];
                    const double ones[2] = {
                        static_cast<double>(c[k1][u] - c[k0][u]),
                        static_cast<double>(c[k2][u] - c[k1][u])};
                    for (int h = 0; h < 2; ++h) {
                        const double mean = ones[h] / m;
                        means[2 * ch + h] = mean;
                        // Unbiased variance of a 0/1 row.
                        vars[2 * ch + h] = m * mean * (1.0 - mean) / (m - 1.0);
                    }
                }
                const RHat r =
                    r_hat_from_moments(means, vars, cfg.chains, w.m);
                sp.r[u] = std::max(sp.r[u], r.R);
                if (r.degenerate)
                    ++degenerate[u];
            }
        }
        for (std::size_t u = 0; u < n_unknown; ++u)
            if (degenerate[u] == cases.size())
                ++sp.degenerate;
        sp.max_r = n_unknown ? *std::max_element(sp.r.begin(), sp.r.end()) : 1.0;
        sp.converged = sp.max_r <= cfg.threshold;
        result.points.push_back(std::move(sp));
    }

    result.chosen = result.points.size() - 1;
    for (std::size_t p = 0; p < result.points.size(); ++p)
        if (result.points[p].converged) {
            result.chosen = p;
            result.converged = true;
            break;
        }
    return result;
}

} // namespace outage
