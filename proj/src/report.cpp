#include "spfk/report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include <json.hpp>

#include "spfk/error.hpp"
#include "spfk/kernel_quotient.hpp"
#include "spfk/kernels.hpp"
#include "spfk/predictive.hpp"
#include "spfk/suffix_automaton.hpp"

namespace spfk {

namespace {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw error("cannot write " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw error("cannot write " + path.string());
}

std::string window_label(std::pair<double, double> w) {
    auto fmt = [](double v) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, end);
    };
    return fmt(w.first) + ":" + fmt(w.second);
}

json fit_json(const FitResult& fit) {
    json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r_squared"] = fit.r_squared;
    j["n_points"] = fit.n_points;
    j["n_excluded"] = fit.n_excluded;
    j["window"] = {fit.window.first, fit.window.second};
    return j;
}

std::string frontier_csv(const FrontierTrace& trace) {
    std::string out = "n,delta_l,ratio,k\n";
    auto put = [&out](double v) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.append(buf, end);
    };
    for (const FrontierEntry& e : trace.entries) {
        char buf[24];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), e.n);
        out.append(buf, end);
        out.push_back(',');
        put(e.delta_l);
        out.push_back(',');
        put(e.ratio);
        out.push_back(',');
        put(e.k);
        out.push_back('\n');
    }
    return out;
}

struct DatasetResult {
    std::string name;
    std::string fatal;  // nonempty: dataset skipped entirely
    std::map<std::string, std::string> step_errors;

    std::optional<FitResult> scaling;
    // variant ("raw"/"smooth") -> window label -> fit
    std::map<std::string, std::map<std::string, FitResult>> tail;
    std::optional<FrontierTrace> trace_raw;
    std::optional<FrontierTrace> trace_smooth;
    std::vector<std::string> files;  // bundle-relative paths written
};

struct Job {
    std::string name;
    std::string corpus_path;
    const LossCurve* curve;
};

void process_dataset(const RunConfig& config, const std::filesystem::path& out,
                     const Job& job, DatasetResult& result) {
    result.name = job.name;
    if (job.corpus_path.empty()) {
        result.fatal = "missing corpus path";
        return;
    }

    TokenStream prepared;
    Automaton sam;
    try {
        TokenStream stream = load_token_stream(job.corpus_path);
        prepared = prepare_corpus(stream, config.prepared_size);
        sam = build_sam(prepared);
        compute_occurrences(sam);
    } catch (const error& e) {
        result.fatal = e.what();
        return;
    }

    auto emit = [&](const std::string& rel, std::string_view bytes) {
        write_file(out / rel, bytes);
        result.files.push_back(rel);
    };

    try {
        emit("spectra/" + job.name + ".mass.csv", spectrum_csv(state_mass_spectrum(sam)));

        Distribution baseline = global_next_distribution(prepared, config.alpha);
        Spectrum raw = global_kl_spectrum(sam, baseline);
        emit("spectra/" + job.name + ".raw.csv", spectrum_csv(raw));

        Spectrum smooth = smooth_spectrum(raw, config.smooth_bins_per_decade);
        emit("spectra/" + job.name + ".smooth.csv", spectrum_csv(smooth));

        if (config.quotient) {
            QuotientStates q = kernel_quotient(sam, config.epsilon);
            emit("spectra/" + job.name + ".quotient.csv",
                 spectrum_csv(quotient_spectrum(q, baseline)));
        }

        for (const auto& [variant, sp] :
             {std::pair<const char*, const Spectrum*>{"raw", &raw}, {"smooth", &smooth}}) {
            for (const auto& window : config.tail_windows) {
                try {
                    result.tail[variant][window_label(window)] = tail_slope(*sp, window);
                } catch (const error& e) {
                    result.step_errors["tail_slope " + std::string(variant) + " " +
                                       window_label(window)] = e.what();
                }
            }
        }

        try {
            result.scaling = scaling_slope(*job.curve);
        } catch (const error& e) {
            result.step_errors["scaling_slope"] = e.what();
        }

        try {
            Spectrum normalized = normalize_spectrum(raw);
            result.trace_raw = effective_cutoff(normalized, *job.curve);
            emit("frontier/" + job.name + ".csv", frontier_csv(*result.trace_raw));
        } catch (const error& e) {
            result.step_errors["frontier raw"] = e.what();
        }
        try {
            Spectrum normalized = normalize_spectrum(smooth);
            result.trace_smooth = effective_cutoff(normalized, *job.curve);
        } catch (const error& e) {
            result.step_errors["frontier smooth"] = e.what();
        }
    } catch (const error& e) {
        result.fatal = e.what();
    }
}

json config_json(const RunConfig& config) {
    json j;
    json ds = json::object();
    for (const auto& [name, path] : config.datasets) ds[name] = path;
    j["datasets"] = std::move(ds);
    j["prepared_size"] = config.prepared_size;
    j["alpha"] = config.alpha;
    j["smooth_bins_per_decade"] = config.smooth_bins_per_decade;
    json windows = json::array();
    for (const auto& w : config.tail_windows) windows.push_back({w.first, w.second});
    j["tail_windows"] = std::move(windows);
    j["quotient"] = config.quotient;
    j["epsilon"] = config.epsilon;
    j["interior_only"] = config.interior_only;
    j["workers"] = config.workers;
    j["out_dir"] = config.out_dir;
    return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception&) {
        throw error("invalid config: bad json");
    }
    RunConfig config;
    try {
        if (!j.contains("datasets") || !j["datasets"].is_object())
            throw error("invalid config: missing datasets");
        for (const auto& [name, path] : j["datasets"].items())
            config.datasets.emplace_back(name, path.get<std::string>());
        config.prepared_size = j.value("prepared_size", config.prepared_size);
        config.alpha = j.value("alpha", config.alpha);
        config.smooth_bins_per_decade =
            j.value("smooth_bins_per_decade", config.smooth_bins_per_decade);
        if (j.contains("tail_windows")) {
            config.tail_windows.clear();
            for (const auto& w : j["tail_windows"])
                config.tail_windows.emplace_back(w.at(0).get<double>(),
                                                 w.at(1).get<double>());
        }
        config.quotient = j.value("quotient", config.quotient);
        config.epsilon = j.value("epsilon", config.epsilon);
        config.interior_only = j.value("interior_only", config.interior_only);
        config.workers = j.value("workers", config.workers);
        config.out_dir = j.value("out_dir", config.out_dir);
    } catch (const json::exception&) {
        throw error("invalid config: missing or mistyped field");
    }
    if (config.prepared_size < 2) throw error("invalid config: prepared_size must be >= 2");
    if (config.smooth_bins_per_decade < 1)
        throw error("invalid config: smooth_bins_per_decade must be >= 1");
    for (const auto& w : config.tail_windows)
        if (!(w.first < w.second)) throw error("invalid config: malformed tail window");
    if (config.epsilon < 0.0) throw error("invalid config: negative epsilon");
    return config;
}

RunConfig read_run_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

bool run_report(const RunConfig& config, const std::vector<LossCurve>& losses) {
    if (losses.empty()) throw error("no loss curves");
    const std::filesystem::path out = config.out_dir;
    std::filesystem::create_directories(out / "spectra");
    std::filesystem::create_directories(out / "frontier");

    std::map<std::string, std::string> corpus_paths(config.datasets.begin(),
                                                    config.datasets.end());
    std::vector<Job> jobs;
    for (const LossCurve& curve : losses) {
        Job job;
        job.name = curve.dataset;
        auto it = corpus_paths.find(curve.dataset);
        if (it != corpus_paths.end()) job.corpus_path = it->second;
        job.curve = &curve;
        jobs.push_back(std::move(job));
    }

    std::vector<DatasetResult> results(jobs.size());
    unsigned workers = config.workers != 0 ? config.workers
                                           : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i)
            process_dataset(config, out, jobs[i], results[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) return;
                    process_dataset(config, out, jobs[i], results[i]);
                }
            });
        for (std::thread& t : pool) t.join();
    }

    // ---- assembly (sequential, dataset order = loss-table order) ----
    json fits;
    json tail_slopes = json::object();
    json scaling_slopes = json::object();
    json errors = json::object();

    std::vector<std::pair<std::string, double>> scaling_by_ds;
    std::map<std::string, std::map<std::string, std::vector<std::pair<std::string, double>>>>
        tail_by_variant_window;  // variant -> window -> (dataset, slope)
    std::vector<FrontierTrace> traces_raw, traces_smooth;

    bool any_ok = false;
    for (const DatasetResult& r : results) {
        if (!r.fatal.empty()) {
            errors[r.name] = r.fatal;
            continue;
        }
        any_ok = true;
        json per_ds_errors = json::object();
        for (const auto& [step, msg] : r.step_errors) per_ds_errors[step] = msg;
        if (!per_ds_errors.empty()) errors[r.name] = std::move(per_ds_errors);

        json tails = json::object();
        for (const auto& [variant, windows] : r.tail) {
            json per_variant = json::object();
            for (const auto& [label, fit] : windows) {
                per_variant[label] = fit_json(fit);
                tail_by_variant_window[variant][label].emplace_back(r.name, fit.slope);
            }
            tails[variant] = std::move(per_variant);
        }
        tail_slopes[r.name] = std::move(tails);

        if (r.scaling) {
            scaling_slopes[r.name] = fit_json(*r.scaling);
            scaling_by_ds.emplace_back(r.name, r.scaling->slope);
        }
        if (r.trace_raw) traces_raw.push_back(*r.trace_raw);
        if (r.trace_smooth) traces_smooth.push_back(*r.trace_smooth);
    }
    if (!any_ok) {
        // Global failure: nothing to report on.
        json manifest;
        manifest["config"] = config_json(config);
        manifest["datasets"] = errors;
        write_file(out / "manifest.json", manifest.dump(2) + "\n");
        return false;
    }

    fits["tail_slopes"] = std::move(tail_slopes);
    fits["scaling_slopes"] = std::move(scaling_slopes);

    // Frontier fits, raw and smoothed.
    json frontier = json::object();
    json table = json::array();
    FrontierFits ff_raw = frontier_fit(traces_raw, /*pooled=*/true, config.interior_only);
    FrontierFits ff_smooth =
        frontier_fit(traces_smooth, /*pooled=*/true, config.interior_only);
    for (const auto& [variant, ff] :
         {std::pair<const char*, const FrontierFits*>{"raw", &ff_raw},
          {"smooth", &ff_smooth}}) {
        json per_variant = json::object();
        for (const auto& [name, fit] : ff->fits) per_variant[name] = fit_json(fit);
        for (const auto& [name, msg] : ff->errors) per_variant[name] = {{"error", msg}};
        frontier[variant] = std::move(per_variant);
    }
    fits["frontier"] = std::move(frontier);

    // Summary table: pooled raw, pooled smooth, then per-dataset smooth fits.
    auto table_row = [&table](const std::string& name, const FrontierFits& ff) {
        auto it = ff.fits.find(name == "pooled/raw" || name == "pooled/smooth"
                                   ? "pooled"
                                   : name.substr(0, name.rfind('/')));
        json row;
        row["fit"] = name;
        if (it != ff.fits.end()) {
            row["slope"] = it->second.slope;
            row["r_squared"] = it->second.r_squared;
        } else {
            row["slope"] = nullptr;
            row["r_squared"] = nullptr;
        }
        table.push_back(std::move(row));
    };
    table_row("pooled/raw", ff_raw);
    table_row("pooled/smooth", ff_smooth);
    for (const DatasetResult& r : results)
        if (r.fatal.empty()) table_row(r.name + "/smooth", ff_smooth);
    fits["table"] = std::move(table);

    // Cross-dataset regression of scaling slope against tail slope.
    json regression = json::object();
    std::string regression_csv = "variant,window,dataset,tail_slope,scaling_slope\n";
    for (const auto& [variant, windows] : tail_by_variant_window) {
        json per_variant = json::object();
        for (const auto& [label, tail_list] : windows) {
            std::map<std::string, double> scaling_map(scaling_by_ds.begin(),
                                                      scaling_by_ds.end());
            std::vector<std::pair<std::string, double>> xs, ys;
            for (const auto& [name, slope] : tail_list) {
                auto it = scaling_map.find(name);
                if (it == scaling_map.end()) continue;
                xs.emplace_back(name, slope);
                ys.emplace_back(name, it->second);
                char buf[32];
                regression_csv += variant + "," + label + "," + name + ",";
                auto [e1, ec1] = std::to_chars(buf, buf + sizeof(buf), slope);
                regression_csv.append(buf, e1);
                regression_csv.push_back(',');
                auto [e2, ec2] = std::to_chars(buf, buf + sizeof(buf), it->second);
                regression_csv.append(buf, e2);
                regression_csv.push_back('\n');
            }
            try {
                per_variant[label] = fit_json(cross_dataset_regression(xs, ys));
            } catch (const error& e) {
                per_variant[label] = {{"error", e.what()}};
            }
        }
        regression[variant] = std::move(per_variant);
    }
    fits["slope_regression"] = std::move(regression);
    if (!errors.empty()) fits["errors"] = errors;

    write_file(out / "fits.json", fits.dump(2) + "\n");
    write_file(out / "scaling.csv", loss_csv(losses));
    write_file(out / "slope_regression.csv", regression_csv);

    // pooled.json: pooled fits plus the concatenated points behind them.
    json pooled;
    for (const auto& [variant, ff, traces] :
         {std::tuple<const char*, const FrontierFits*, const std::vector<FrontierTrace>*>{
              "raw", &ff_raw, &traces_raw},
          {"smooth", &ff_smooth, &traces_smooth}}) {
        json entry;
        auto it = ff->fits.find("pooled");
        if (it != ff->fits.end())
            entry["fit"] = fit_json(it->second);
        else if (auto eit = ff->errors.find("pooled"); eit != ff->errors.end())
            entry["error"] = eit->second;
        json points = json::array();
        for (const FrontierTrace& trace : *traces)
            for (const FrontierEntry& e : trace.entries) {
                json p;
                p["dataset"] = trace.dataset;
                p["n"] = e.n;
                p["delta_l"] = e.delta_l;
                p["ratio"] = e.ratio;
                p["k"] = e.k;
                points.push_back(std::move(p));
            }
        entry["points"] = std::move(points);
        pooled[variant] = std::move(entry);
    }
    write_file(out / "pooled.json", pooled.dump(2) + "\n");

    // Manifest: config echo, per-dataset status, hashes of every bundle file.
    std::vector<std::string> rels = {"fits.json", "pooled.json", "scaling.csv",
                                     "slope_regression.csv"};
    for (const DatasetResult& r : results)
        rels.insert(rels.end(), r.files.begin(), r.files.end());
    std::sort(rels.begin(), rels.end());

    json manifest;
    manifest["config"] = config_json(config);
    manifest["kernels"] = kernels::active_variant();
    json status = json::object();
    for (const DatasetResult& r : results)
        status[r.name] = r.fatal.empty() ? "ok" : r.fatal;
    manifest["datasets"] = std::move(status);
    json files = json::object();
    for (const std::string& rel : rels) {
        std::ifstream f(out / rel, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(f)),
                          std::istreambuf_iterator<char>());
        json entry;
        entry["bytes"] = bytes.size();
        entry["fnv1a64"] = hex64(fnv1a64(bytes));
        files[rel] = std::move(entry);
    }
    manifest["files"] = std::move(files);
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
    return true;
}

}  // namespace spfk
