#include "spfk/fits.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "spfk/error.hpp"
#include "spfk/kernels.hpp"

namespace spfk {

namespace {

// Shared OLS core over already-transformed coordinates.
FitResult ols(std::span<const double> x, std::span<const double> y,
              bool zero_residual_is_perfect) {
    const std::size_t n = x.size();
    if (n < 2) throw error("insufficient points");
    const double mean_x = kernels::sum(x) / static_cast<double>(n);
    const double mean_y = kernels::sum(y) / static_cast<double>(n);
    const kernels::Moments m = kernels::centered_moments(x, y, mean_x, mean_y);
    if (m.sxx == 0.0) throw error("insufficient points");

    FitResult fit;
    fit.n_points = n;
    fit.slope = m.sxy / m.sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    double ss_res = m.syy - m.sxy * m.sxy / m.sxx;
    if (ss_res < 0.0) ss_res = 0.0;
    if (m.syy == 0.0)
        fit.r_squared = zero_residual_is_perfect ? 1.0 : 0.0;
    else
        fit.r_squared = std::clamp(1.0 - ss_res / m.syy, 0.0, 1.0);
    return fit;
}

}  // namespace

FitResult loglog_fit(std::span<const double> x, std::span<const double> y,
                     std::optional<std::pair<double, double>> window) {
    if (x.size() != y.size()) throw error("mismatched point lists");
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    double lo = window ? window->first : -std::numeric_limits<double>::infinity();
    double hi = window ? window->second : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo || x[i] > hi) continue;
        if (x[i] <= 0.0 || y[i] <= 0.0) throw error("domain error");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    FitResult fit = ols(lx, ly, /*zero_residual_is_perfect=*/true);
    if (window) {
        fit.window = *window;
    } else {
        auto [mn, mx] = std::minmax_element(x.begin(), x.end());
        fit.window = {*mn, *mx};
    }
    return fit;
}

FitResult scaling_slope(const LossCurve& curve) {
    std::vector<double> n, l;
    n.reserve(curve.points.size());
    l.reserve(curve.points.size());
    for (const LossPoint& p : curve.points) {
        n.push_back(static_cast<double>(p.n));
        l.push_back(p.loss);
    }
    return loglog_fit(n, l);
}

FitResult tail_slope(const Spectrum& sp, std::pair<double, double> window) {
    std::vector<double> ranks, weights;
    std::size_t excluded = 0;
    bool any_in_window = false;
    for (std::size_t i = 0; i < sp.size(); ++i) {
        double rank = sp.rank_at(i);
        if (rank < window.first || rank > window.second) continue;
        any_in_window = true;
        if (sp.weights[i] <= 0.0) {
            ++excluded;
            continue;
        }
        ranks.push_back(rank);
        weights.push_back(sp.weights[i]);
    }
    if (!any_in_window) throw error("window out of range");
    FitResult fit = loglog_fit(ranks, weights);
    fit.window = window;
    fit.n_excluded = excluded;
    return fit;
}

FitResult cross_dataset_regression(
    const std::vector<std::pair<std::string, double>>& tail_slopes,
    const std::vector<std::pair<std::string, double>>& scaling_slopes) {
    std::set<std::string> tail_names, scaling_names;
    for (const auto& [name, v] : tail_slopes) tail_names.insert(name);
    for (const auto& [name, v] : scaling_slopes) scaling_names.insert(name);
    if (tail_names != scaling_names || tail_names.size() != tail_slopes.size() ||
        scaling_names.size() != scaling_slopes.size())
        throw error("dataset mismatch");
    if (tail_slopes.size() < 3) throw error("insufficient points");

    std::map<std::string, double> by_name(scaling_slopes.begin(), scaling_slopes.end());
    std::vector<std::pair<std::string, double>> xs(tail_slopes);
    std::sort(xs.begin(), xs.end());
    std::vector<double> x, y;
    x.reserve(xs.size());
    y.reserve(xs.size());
    for (const auto& [name, v] : xs) {
        x.push_back(v);
        y.push_back(by_name.at(name));
    }
    FitResult fit = ols(x, y, /*zero_residual_is_perfect=*/false);
    auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    fit.window = {*mn, *mx};
    return fit;
}

std::vector<std::tuple<std::uint64_t, double, double>> excess_loss(const LossCurve& curve) {
    if (curve.points.empty()) throw error("insufficient points");
    double min_loss = curve.points.front().loss;
    for (const LossPoint& p : curve.points) min_loss = std::min(min_loss, p.loss);
    double max_delta = 0.0;
    for (const LossPoint& p : curve.points) max_delta = std::max(max_delta, p.loss - min_loss);

    std::vector<std::tuple<std::uint64_t, double, double>> out;
    out.reserve(curve.points.size());
    for (const LossPoint& p : curve.points) {
        double delta = p.loss - min_loss;
        double ratio = max_delta > 0.0 ? delta / max_delta : 0.0;
        out.emplace_back(p.n, delta, ratio);
    }
    return out;
}

FrontierTrace effective_cutoff(const Spectrum& normalized, const LossCurve& curve) {
    const TailMass tail(normalized);
    const std::uint64_t m = tail.size();
    if (m == 0) throw error("degenerate spectrum");

    FrontierTrace trace;
    trace.dataset = curve.dataset;
    trace.provenance = normalized.provenance;
    for (const auto& [n, delta, ratio] : excess_loss(curve)) {
        std::uint64_t k;
        if (ratio == 1.0)
            k = 1;  // largest observed excess
        else if (ratio == 0.0)
            k = m;  // zero excess
        else
            k = tail.cutoff(ratio);
        trace.entries.push_back(
            FrontierEntry{n, delta, ratio, normalized.rank_at(k - 1)});
    }
    return trace;
}

FrontierFits frontier_fit(const std::vector<FrontierTrace>& traces, bool pooled,
                          bool interior_only) {
    FrontierFits out;
    std::vector<double> pooled_n, pooled_k;

    for (const FrontierTrace& trace : traces) {
        bool all_zero = std::all_of(trace.entries.begin(), trace.entries.end(),
                                    [](const FrontierEntry& e) { return e.ratio == 0.0; });
        std::vector<double> n, k;
        if (!all_zero) {
            for (const FrontierEntry& e : trace.entries) {
                if (interior_only && (e.ratio == 0.0 || e.ratio == 1.0)) continue;
                n.push_back(static_cast<double>(e.n));
                k.push_back(e.k);
            }
        }
        pooled_n.insert(pooled_n.end(), n.begin(), n.end());
        pooled_k.insert(pooled_k.end(), k.begin(), k.end());
        try {
            out.fits[trace.dataset] = loglog_fit(n, k);
        } catch (const error& e) {
            out.errors[trace.dataset] = e.what();
        }
    }

    if (pooled) {
        if (traces.size() < 2) {
            out.errors["pooled"] = "insufficient points";
        } else {
            try {
                out.fits["pooled"] = loglog_fit(pooled_n, pooled_k);
            } catch (const error& e) {
                out.errors["pooled"] = e.what();
            }
        }
    }
    return out;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, end);
}

}  // namespace

std::string loss_csv(std::span<const LossCurve> curves) {
    std::string out = "dataset,n_tokens,loss\n";
    for (const LossCurve& curve : curves) {
        for (const LossPoint& p : curve.points) {
            out += curve.dataset;
            out.push_back(',');
            char buf[24];
            auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p.n);
            out.append(buf, end);
            out.push_back(',');
            append_double(out, p.loss);
            out.push_back('\n');
        }
    }
    return out;
}

void write_loss_csv(std::span<const LossCurve> curves, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw error("cannot write " + path.string());
    std::string csv = loss_csv(curves);
    f.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    if (!f) throw error("cannot write " + path.string());
}

std::vector<LossCurve> read_loss_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error("cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line) ||
        (line != "dataset,n_tokens,loss" && line != "dataset,n_tokens,loss\r"))
        throw error("unrecognized format");

    std::vector<LossCurve> curves;
    std::map<std::string, std::size_t> index;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) throw error("corrupt loss csv");
        std::string dataset = line.substr(0, c1);
        std::uint64_t n = 0;
        double loss = 0.0;
        auto r1 = std::from_chars(line.data() + c1 + 1, line.data() + c2, n);
        auto r2 = std::from_chars(line.data() + c2 + 1, line.data() + line.size(), loss);
        if (r1.ec != std::errc() || r2.ec != std::errc() || dataset.empty())
            throw error("corrupt loss csv");

        auto [it, inserted] = index.try_emplace(dataset, curves.size());
        if (inserted) curves.push_back(LossCurve{dataset, {}});
        curves[it->second].points.push_back(LossPoint{n, loss});
    }

    for (LossCurve& curve : curves) {
        std::sort(curve.points.begin(), curve.points.end(),
                  [](const LossPoint& a, const LossPoint& b) { return a.n < b.n; });
        if (curve.points.size() < 2) throw error("invalid loss curve: fewer than 2 points");
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            if (curve.points[i].loss <= 0.0)
                throw error("invalid loss curve: nonpositive loss");
            if (i > 0 && curve.points[i].n == curve.points[i - 1].n)
                throw error("invalid loss curve: duplicate n_tokens");
        }
    }
    if (curves.empty()) throw error("corrupt loss csv");
    return curves;
}

}  // namespace spfk
