#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "spfk/fits.hpp"

namespace spfk {

// Full-pipeline run configuration. JSON schema (all fields optional except
// "datasets"):
//   {
//     "datasets": {"name": "path/to/corpus.toks", ...},
//     "prepared_size": 1000000,
//     "alpha": 0.0,
//     "smooth_bins_per_decade": 20,
//     "tail_windows": [[300, 50000], [1000, 100000]],
//     "quotient": false,
//     "epsilon": 0.05,
//     "interior_only": false,
//     "workers": 0,            // 0 = hardware concurrency
//     "out_dir": "report"
//   }
struct RunConfig {
    std::vector<std::pair<std::string, std::string>> datasets;  // name -> corpus path
    std::uint64_t prepared_size = 1'000'000;
    double alpha = 0.0;
    unsigned smooth_bins_per_decade = 20;
    std::vector<std::pair<double, double>> tail_windows{{300, 50000}, {1000, 100000}};
    bool quotient = false;  // quotient spectra are opt-in (greedy clustering
                            // is quadratic in cluster count at corpus scale)
    double epsilon = 0.05;
    bool interior_only = false;
    unsigned workers = 0;
    std::string out_dir = "report";
};

RunConfig read_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

// Run the whole analysis for every loss-table dataset and write the bundle:
//   out/manifest.json            config echo, per-dataset status, file hashes
//   out/spectra/<ds>.mass.csv    state-mass spectrum
//   out/spectra/<ds>.raw.csv     global-KL spectrum
//   out/spectra/<ds>.smooth.csv  log-binned global-KL spectrum
//   out/spectra/<ds>.quotient.csv  (when quotient is enabled)
//   out/frontier/<ds>.csv        trace: n,delta_l,ratio,k (raw spectrum)
//   out/fits.json                tail slopes, scaling slopes, frontier fits,
//                                slope regression, summary table
//   out/pooled.json              pooled frontier fits and pooled points
//   out/scaling.csv              echo of the input loss table
//   out/slope_regression.csv     per-window (tail slope, scaling slope) pairs
//
// Per-dataset failures are recorded and the run continues; returns false
// only when no dataset could be processed.
bool run_report(const RunConfig& config, const std::vector<LossCurve>& losses);

}  // namespace spfk
