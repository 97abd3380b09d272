#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "spfk/spectrum.hpp"

namespace spfk {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;   // in log space for log-log fits
    double r_squared = 0.0;   // 1 - SS_res/SS_tot, clamped to [0, 1]
    std::pair<double, double> window{0.0, 0.0};
    std::size_t n_points = 0;
    std::size_t n_excluded = 0;  // zero-weight points dropped from a window
};

struct LossPoint {
    std::uint64_t n = 0;  // training tokens
    double loss = 0.0;    // best validation loss
};

// Per-dataset loss curve; points strictly increasing in n, losses > 0.
struct LossCurve {
    std::string dataset;
    std::vector<LossPoint> points;
};

struct FrontierEntry {
    std::uint64_t n = 0;
    double delta_l = 0.0;
    double ratio = 0.0;  // delta_l / max delta_l, in [0, 1]
    double k = 0.0;      // effective cutoff rank (fractional for smoothed spectra)
};

struct FrontierTrace {
    std::string dataset;
    std::vector<FrontierEntry> entries;  // in curve order (ascending n)
    Provenance provenance = Provenance::global_kl_raw;
};

// Ordinary least squares on (ln x, ln y), optionally restricted to x in
// [window.lo, window.hi]. Throws "insufficient points" (< 2 points or no x
// spread) and "domain error" (x or y <= 0). R^2 of a zero-residual fit is 1.
FitResult loglog_fit(std::span<const double> x, std::span<const double> y,
                     std::optional<std::pair<double, double>> window = std::nullopt);

// Data-scaling slope: loglog_fit of loss against n over the whole curve.
FitResult scaling_slope(const LossCurve& curve);

// loglog_fit of (rank, weight) restricted to ranks in [lo, hi]. Zero weights
// inside the window are excluded and counted in n_excluded. Throws "window
// out of range" when no point falls inside the window.
FitResult tail_slope(const Spectrum& sp, std::pair<double, double> window);

// Linear (not log-log) regression of scaling slope against tail slope across
// datasets, matched by name. Throws "dataset mismatch" when the name sets
// differ and "insufficient points" below 3 datasets. R^2 is 0 when the
// response is constant.
FitResult cross_dataset_regression(
    const std::vector<std::pair<std::string, double>>& tail_slopes,
    const std::vector<std::pair<std::string, double>>& scaling_slopes);

// (n, dL, dL/dL_max) per point; dL(n) = L(n) - min L. All ratios are 0 when
// the curve is flat.
std::vector<std::tuple<std::uint64_t, double, double>> excess_loss(const LossCurve& curve);

// Effective cutoff trace: ratio 1 -> k = first rank, ratio 0 -> k = last
// rank, else the smallest rank whose tail mass is <= ratio (binary search
// over the suffix-sum array). Spectrum must be normalized.
FrontierTrace effective_cutoff(const Spectrum& normalized, const LossCurve& curve);

struct FrontierFits {
    std::map<std::string, FitResult> fits;    // per dataset, plus "pooled"
    std::map<std::string, std::string> errors;
};

// loglog_fit of k against n per trace, plus a pooled fit concatenating all
// points when `pooled` is set. interior_only drops entries with ratio
// exactly 0 or 1. Traces whose ratios are all zero (flat loss curves) carry
// no signal and contribute no fit points.
FrontierFits frontier_fit(const std::vector<FrontierTrace>& traces, bool pooled,
                          bool interior_only);

// Loss table CSV: header "dataset,n_tokens,loss". Curves are returned in
// first-appearance order with points sorted by n.
std::vector<LossCurve> read_loss_csv(const std::filesystem::path& path);
void write_loss_csv(std::span<const LossCurve> curves, const std::filesystem::path& path);
std::string loss_csv(std::span<const LossCurve> curves);

}  // namespace spfk
