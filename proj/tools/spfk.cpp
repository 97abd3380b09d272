// spfk: suffix-automaton predictive-spectrum toolkit.
//
// Subcommands: ingest, sam build, spectrum, quotient, fit-tail, slopes,
// frontier, synth markov, synth frontier, report. See README.md.

#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spfk/error.hpp"
#include "spfk/fits.hpp"
#include "spfk/kernel_quotient.hpp"
#include "spfk/predictive.hpp"
#include "spfk/report.hpp"
#include "spfk/suffix_automaton.hpp"
#include "spfk/synth.hpp"
#include "spfk/token_stream.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw spfk::error("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
}

json fit_json(const spfk::FitResult& fit) {
    json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r_squared"] = fit.r_squared;
    j["n_points"] = fit.n_points;
    j["n_excluded"] = fit.n_excluded;
    j["window"] = {fit.window.first, fit.window.second};
    return j;
}

std::pair<double, double> parse_window(const std::string& text) {
    std::size_t colon = text.find(':');
    if (colon == std::string::npos) throw spfk::error("window must be LO:HI");
    double lo = 0.0, hi = 0.0;
    auto r1 = std::from_chars(text.data(), text.data() + colon, lo);
    auto r2 = std::from_chars(text.data() + colon + 1, text.data() + text.size(), hi);
    if (r1.ec != std::errc() || r2.ec != std::errc() || !(lo < hi))
        throw spfk::error("window must be LO:HI");
    return {lo, hi};
}

spfk::Automaton load_sam_with_corpus(const std::string& sam_path,
                                     const std::string& corpus_path,
                                     spfk::TokenStream& stream_out) {
    stream_out = spfk::load_token_stream(corpus_path);
    spfk::Automaton sam = spfk::load_automaton(sam_path);
    if (sam.source_length != stream_out.size() || sam.vocab_size != stream_out.vocab_size)
        throw spfk::error("corpus does not match automaton");
    if (!sam.occ_computed) spfk::compute_occurrences(sam);
    return sam;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"suffix-automaton predictive-spectrum toolkit"};
    app.require_subcommand(1);

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "convert input data to a token stream");
    std::string in_path, out_path;
    bool as_bytes = false;
    std::uint64_t truncate = 0;
    std::uint32_t vocab_hint = 0;
    ingest->add_option("--input", in_path, "input file")->required();
    ingest->add_option("--output", out_path, "output .toks path")->required();
    ingest->add_flag("--bytes", as_bytes, "byte-level tokens (vocab 256)");
    ingest->add_option("--truncate", truncate, "keep only the first N tokens");
    ingest->add_option("--vocab", vocab_hint,
                       "declared vocab size for id text input (default: max id + 1)");
    ingest->callback([&] {
        spfk::TokenStream s = as_bytes
                                  ? spfk::tokenize_bytes(read_file(in_path))
                                  : spfk::parse_token_text(read_file(in_path), vocab_hint);
        if (truncate != 0) s = spfk::prepare_corpus(s, truncate);
        spfk::save_token_stream(s, out_path);
        std::cout << "wrote " << out_path << " (" << s.size() << " tokens, vocab "
                  << s.vocab_size << ")\n";
    });

    // ---- sam build ----
    auto* sam_cmd = app.add_subcommand("sam", "suffix automaton operations");
    sam_cmd->require_subcommand(1);
    auto* sam_build = sam_cmd->add_subcommand("build", "build the automaton for a corpus");
    std::string corpus_path, sam_out;
    bool stats = false;
    sam_build->add_option("--corpus", corpus_path, "input .toks path")->required();
    sam_build->add_option("--output", sam_out, "output .sam path")->required();
    sam_build->add_flag("--stats", stats, "print state/transition/substring counts");
    sam_build->callback([&] {
        spfk::TokenStream s = spfk::load_token_stream(corpus_path);
        spfk::Automaton a = spfk::build_sam(s);
        spfk::compute_occurrences(a);
        spfk::save_automaton(a, sam_out);
        if (stats) {
            std::cout << "states " << a.state_count() << "\n"
                      << "transitions " << a.transition_count() << "\n"
                      << "distinct_substrings " << spfk::distinct_substring_count(a)
                      << "\n";
        }
    });

    // ---- spectrum ----
    auto* spectrum_cmd =
        app.add_subcommand("spectrum", "global-KL predictive contribution spectrum");
    std::string sp_sam, sp_corpus, sp_out;
    double alpha = 0.0;
    unsigned smooth_bins = 0;
    bool normalize = false;
    spectrum_cmd->add_option("--sam", sp_sam, "input .sam path")->required();
    spectrum_cmd->add_option("--corpus", sp_corpus, "corpus the automaton was built from")
        ->required();
    spectrum_cmd->add_option("--alpha", alpha, "baseline add-alpha smoothing (default 0)");
    spectrum_cmd->add_option("--smooth", smooth_bins, "log-bin the spectrum (bins/decade)");
    spectrum_cmd->add_flag("--normalize", normalize, "normalize weights to sum 1");
    spectrum_cmd->add_option("--output", sp_out, "output CSV path")->required();
    spectrum_cmd->callback([&] {
        spfk::TokenStream s;
        spfk::Automaton a = load_sam_with_corpus(sp_sam, sp_corpus, s);
        spfk::Distribution baseline = spfk::global_next_distribution(s, alpha);
        spfk::Spectrum sp = spfk::global_kl_spectrum(a, baseline);
        if (smooth_bins != 0) sp = spfk::smooth_spectrum(sp, smooth_bins);
        if (normalize) sp = spfk::normalize_spectrum(sp);
        spfk::write_spectrum_csv(sp, sp_out);
    });

    // ---- quotient ----
    auto* quotient_cmd = app.add_subcommand("quotient", "kernel-quotient spectrum");
    std::string q_sam, q_corpus, q_out, q_clusters;
    double epsilon = 0.05;
    quotient_cmd->add_option("--sam", q_sam, "input .sam path")->required();
    quotient_cmd->add_option("--corpus", q_corpus, "corpus the automaton was built from")
        ->required();
    quotient_cmd->add_option("--epsilon", epsilon, "JSD merge threshold (nats)");
    quotient_cmd->add_option("--output", q_out, "output CSV path")->required();
    quotient_cmd->add_option("--clusters", q_clusters, "also dump cluster membership JSON");
    quotient_cmd->callback([&] {
        spfk::TokenStream s;
        spfk::Automaton a = load_sam_with_corpus(q_sam, q_corpus, s);
        spfk::QuotientStates q = spfk::kernel_quotient(a, epsilon);
        spfk::Distribution baseline = spfk::global_next_distribution(s, 0.0);
        spfk::write_spectrum_csv(spfk::quotient_spectrum(q, baseline), q_out);
        if (!q_clusters.empty()) spfk::write_clusters_json(q, q_clusters);
    });

    // ---- fit-tail ----
    auto* fit_tail = app.add_subcommand("fit-tail", "log-log slope of a spectrum window");
    std::string ft_spectrum, ft_window;
    fit_tail->add_option("--spectrum", ft_spectrum, "spectrum CSV")->required();
    fit_tail->add_option("--window", ft_window, "rank window LO:HI")->required();
    fit_tail->callback([&] {
        spfk::Spectrum sp = spfk::read_spectrum_csv(ft_spectrum);
        spfk::FitResult fit = spfk::tail_slope(sp, parse_window(ft_window));
        std::cout << fit_json(fit).dump(2) << "\n";
    });

    // ---- slopes ----
    auto* slopes_cmd = app.add_subcommand("slopes", "data-scaling slope per dataset");
    std::string sl_losses;
    slopes_cmd->add_option("--losses", sl_losses, "loss table CSV")->required();
    slopes_cmd->callback([&] {
        json out = json::object();
        for (const spfk::LossCurve& curve : spfk::read_loss_csv(sl_losses)) {
            try {
                out[curve.dataset] = fit_json(spfk::scaling_slope(curve));
            } catch (const spfk::error& e) {
                out[curve.dataset] = {{"error", e.what()}};
            }
        }
        std::cout << out.dump(2) << "\n";
    });

    // ---- frontier ----
    auto* frontier_cmd =
        app.add_subcommand("frontier", "effective-cutoff traces and frontier fits");
    std::string fr_dir, fr_losses, fr_out;
    bool interior_only = false;
    frontier_cmd->add_option("--spectrum-dir", fr_dir,
                             "directory with <dataset>.csv spectra")
        ->required();
    frontier_cmd->add_option("--losses", fr_losses, "loss table CSV")->required();
    frontier_cmd->add_flag("--interior-only", interior_only,
                           "drop ratio-0 and ratio-1 endpoints from fits");
    frontier_cmd->add_option("--output", fr_out, "output report JSON")->required();
    frontier_cmd->callback([&] {
        std::vector<spfk::LossCurve> losses = spfk::read_loss_csv(fr_losses);
        std::vector<spfk::FrontierTrace> traces;
        json out = json::object();
        for (const spfk::LossCurve& curve : losses) {
            std::filesystem::path sp_path =
                std::filesystem::path(fr_dir) / (curve.dataset + ".csv");
            if (!std::filesystem::exists(sp_path))
                sp_path = std::filesystem::path(fr_dir) / (curve.dataset + ".raw.csv");
            try {
                spfk::Spectrum sp =
                    spfk::normalize_spectrum(spfk::read_spectrum_csv(sp_path));
                traces.push_back(spfk::effective_cutoff(sp, curve));
            } catch (const spfk::error& e) {
                out[curve.dataset] = {{"error", e.what()}};
            }
        }
        spfk::FrontierFits ff = spfk::frontier_fit(traces, /*pooled=*/true, interior_only);
        for (const spfk::FrontierTrace& trace : traces) {
            json entry;
            if (auto it = ff.fits.find(trace.dataset); it != ff.fits.end())
                entry["fit"] = fit_json(it->second);
            else if (auto eit = ff.errors.find(trace.dataset); eit != ff.errors.end())
                entry["error"] = eit->second;
            json points = json::array();
            for (const spfk::FrontierEntry& e : trace.entries) {
                json p;
                p["n"] = e.n;
                p["delta_l"] = e.delta_l;
                p["ratio"] = e.ratio;
                p["k"] = e.k;
                points.push_back(std::move(p));
            }
            entry["trace"] = std::move(points);
            out[trace.dataset] = std::move(entry);
        }
        if (auto it = ff.fits.find("pooled"); it != ff.fits.end())
            out["pooled"] = fit_json(it->second);
        else if (auto eit = ff.errors.find("pooled"); eit != ff.errors.end())
            out["pooled"] = {{"error", eit->second}};
        std::ofstream f(fr_out, std::ios::binary | std::ios::trunc);
        if (!f) throw spfk::error("cannot write " + fr_out);
        f << out.dump(2) << "\n";
    });

    // ---- synth ----
    auto* synth_cmd = app.add_subcommand("synth", "synthetic corpora and loss curves");
    synth_cmd->require_subcommand(1);

    auto* markov = synth_cmd->add_subcommand("markov", "seeded Markov-chain corpus");
    std::string mk_spec, mk_out;
    std::uint64_t mk_length = 0;
    markov->add_option("--spec", mk_spec, "MarkovSpec JSON")->required();
    markov->add_option("--length", mk_length, "tokens to generate")->required();
    markov->add_option("--output", mk_out, "output .toks path")->required();
    markov->callback([&] {
        spfk::MarkovSpec spec = spfk::read_markov_spec(mk_spec);
        spfk::save_token_stream(spfk::generate_markov_corpus(spec, mk_length), mk_out);
    });

    auto* planted = synth_cmd->add_subcommand("frontier", "planted-frontier loss curve");
    std::string pl_spectrum, pl_sizes, pl_out, pl_dataset = "planted";
    double gamma = 0.0, scale = 0.0, floor_loss = 0.0;
    planted->add_option("--spectrum", pl_spectrum, "spectrum CSV")->required();
    planted->add_option("--gamma", gamma, "frontier exponent")->required();
    planted->add_option("--scale", scale, "frontier scale c")->required();
    planted->add_option("--sizes", pl_sizes, "comma-separated token counts")->required();
    planted->add_option("--floor", floor_loss, "loss floor L_inf")->required();
    planted->add_option("--dataset", pl_dataset, "dataset name in the CSV");
    planted->add_option("--output", pl_out, "output losses CSV")->required();
    planted->callback([&] {
        std::vector<std::uint64_t> sizes;
        const char* p = pl_sizes.data();
        const char* end = p + pl_sizes.size();
        while (p < end) {
            std::uint64_t v = 0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) throw spfk::error("bad --sizes list");
            sizes.push_back(v);
            p = next;
            if (p < end && *p == ',') ++p;
        }
        spfk::Spectrum sp =
            spfk::normalize_spectrum(spfk::read_spectrum_csv(pl_spectrum));
        spfk::LossCurve curve =
            spfk::planted_frontier_losses(sp, gamma, scale, sizes, floor_loss, pl_dataset);
        spfk::write_loss_csv(std::span<const spfk::LossCurve>(&curve, 1), pl_out);
    });

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "full analysis bundle");
    std::string rp_config, rp_losses, rp_out;
    report_cmd->add_option("--config", rp_config, "run config JSON")->required();
    report_cmd->add_option("--losses", rp_losses, "loss table CSV")->required();
    report_cmd->add_option("--out", rp_out, "output directory (overrides config)");
    bool report_failed = false;
    report_cmd->callback([&] {
        spfk::RunConfig config = spfk::read_run_config(rp_config);
        if (!rp_out.empty()) config.out_dir = rp_out;
        std::vector<spfk::LossCurve> losses = spfk::read_loss_csv(rp_losses);
        if (!spfk::run_report(config, losses)) {
            std::cerr << "error: no dataset could be processed\n";
            report_failed = true;
        } else {
            std::cout << "report written to " << config.out_dir << "\n";
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const spfk::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return report_failed ? 1 : 0;
}
