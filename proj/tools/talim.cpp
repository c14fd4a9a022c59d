// talim: command-line front end for stroke analysis and corpus statistics.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "talim/talim.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kIo = 2, kAnalysis = 3 };

int exit_code_for(talim::ErrorCode code) {
    using talim::ErrorCode;
    switch (code) {
    case ErrorCode::NotWav:
    case ErrorCode::UnsupportedEncoding:
    case ErrorCode::MultiChannel:
    case ErrorCode::TruncatedData:
    case ErrorCode::IoFailure:
    case ErrorCode::EmptyManifest:
    case ErrorCode::BadManifest:
        return kIo;
    case ErrorCode::BadConfig:
    case ErrorCode::BadFrameLength:
    case ErrorCode::SpecInvalid:
        return kUsage;
    default:
        return kAnalysis;
    }
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("talim");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("TALIM_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    }
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw talim::Error(talim::ErrorCode::IoFailure, "cannot write " + p.string());
    return out;
}

struct AnalysisFlags {
    std::size_t frame_size = 4096;
    std::size_t hop = 2048;
    std::string window = "hann";
    double fmin = 80.0, fmax = 1000.0;
    double peak_separation = 50.0, peak_threshold = 40.0;
    double env_window_ms = 10.0, env_hop_ms = 1.0;
    int max_partials = 10;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--frame-size", frame_size, "FFT frame length (power of two)")->capture_default_str();
        cmd.add_option("--hop", hop, "frame hop in samples")->capture_default_str();
        cmd.add_option("--window", window, "hann or rectangular")
            ->check(CLI::IsMember({"hann", "rectangular"}))
            ->capture_default_str();
        cmd.add_option("--fmin", fmin, "lowest pitch searched (Hz)")->capture_default_str();
        cmd.add_option("--fmax", fmax, "highest pitch searched (Hz)")->capture_default_str();
        cmd.add_option("--peak-separation", peak_separation, "minimum spacing of spectral peaks (Hz)")
            ->capture_default_str();
        cmd.add_option("--peak-threshold", peak_threshold, "peaks kept within this many dB of the top")
            ->capture_default_str();
        cmd.add_option("--envelope-window", env_window_ms, "RMS window (ms)")->capture_default_str();
        cmd.add_option("--envelope-hop", env_hop_ms, "RMS hop (ms)")->capture_default_str();
        cmd.add_option("--max-partials", max_partials, "harmonics used by partial features")->capture_default_str();
    }

    talim::AnalysisConfig config() const {
        talim::AnalysisConfig cfg;
        cfg.spectrum = {frame_size, hop, window == "hann" ? talim::Window::hann : talim::Window::rectangular};
        cfg.pitch = {fmin, fmax};
        cfg.peaks = {peak_separation, peak_threshold};
        cfg.envelope.window_ms = env_window_ms;
        cfg.envelope.hop_ms = env_hop_ms;
        cfg.max_partials = max_partials;
        cfg.spectrum.validate();
        if (!(fmin > 0.0 && fmin < fmax)) throw talim::Error(talim::ErrorCode::BadConfig, "need 0 < fmin < fmax");
        return cfg;
    }
};

void warn_sample_rate(const talim::AudioClip& clip, const std::string& path) {
    if (clip.sample_rate() != 44100)
        spdlog::warn("{}: sample rate {} Hz (expected 44100)", path, clip.sample_rate());
}

// ---- analyze ---------------------------------------------------------------

void run_analyze(const std::string& path, const std::string& format, const AnalysisFlags& flags) {
    const auto clip = talim::load_wav(path);
    warn_sample_rate(clip, path);
    const auto v = talim::compute_all(clip, flags.config());
    if (format == "json") {
        std::cout << talim::to_json(v).dump(2) << '\n';
    } else {
        std::cout << talim::csv_header(v) << '\n' << talim::csv_row(v) << '\n';
    }
}

// ---- batch -----------------------------------------------------------------

talim::stats::FeatureMatrix batch_features(const fs::path& manifest_path, const AnalysisFlags& flags, unsigned jobs) {
    const auto manifest = talim::read_manifest(manifest_path);
    spdlog::info("analyzing {} clips with {} worker(s)", manifest.entries.size(), jobs);
    auto result = talim::analyze_batch(manifest, flags.config(), jobs);
    for (const auto& f : result.failures) spdlog::warn("skipped {}: {}", f.path, f.message);
    return std::move(result.features);
}

// ---- correlate -------------------------------------------------------------

void write_correlation_reports(const talim::stats::FeatureMatrix& m, const fs::path& dir) {
    const auto c = talim::stats::pearson(m);
    auto r = open_out(dir / "r.csv");
    talim::write_square(c.ids, c.r, r);
    auto p = open_out(dir / "p.csv");
    talim::write_square(c.ids, c.p_values, p);
    auto flagged = open_out(dir / "correlation_flagged.csv");
    talim::write_flagged_correlation(c, flagged);
    auto pairs = open_out(dir / "correlation_pairs.csv");
    talim::write_correlation_pairs(c, pairs);
    spdlog::info("correlation reports written to {}", dir.string());
}

// ---- factor ----------------------------------------------------------------

struct FactorFlags {
    std::string factors = "auto";
    bool no_kaiser_normalize = false;
    double suppress = 0.5;
    bool transpose = false;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--factors", factors, "'auto' (eigenvalue > 1) or a fixed count")->capture_default_str();
        cmd.add_flag("--no-kaiser-normalize", no_kaiser_normalize, "rotate raw loadings");
        cmd.add_option("--suppress", suppress, "blank loadings with |value| below this")->capture_default_str();
        cmd.add_flag("--transpose", transpose, "treat observations as variables");
    }

    talim::stats::FactorOptions options() const {
        talim::stats::FactorOptions opts;
        opts.kaiser_normalize = !no_kaiser_normalize;
        if (factors != "auto") {
            std::size_t k = 0;
            try {
                std::size_t used = 0;
                k = std::stoul(factors, &used);
                if (used != factors.size()) throw std::invalid_argument(factors);
            } catch (const std::exception&) {
                throw talim::Error(talim::ErrorCode::BadConfig, "--factors must be 'auto' or a positive integer");
            }
            if (k == 0) throw talim::Error(talim::ErrorCode::BadConfig, "--factors must be at least 1");
            opts.retention = talim::stats::Retention::fixed(k);
        }
        return opts;
    }
};

void write_factor_reports(talim::stats::FeatureMatrix m, const FactorFlags& flags, const fs::path& dir) {
    if (flags.transpose) m = talim::stats::transpose_analysis(m);
    m.validate();
    const auto model = talim::stats::factor_analysis(m, flags.options());
    if (model.degenerate_retention) spdlog::warn("no eigenvalue exceeds 1; keeping one component");
    if (model.rotated && !model.varimax_info.converged)
        spdlog::warn("varimax stopped after {} sweeps without converging", model.varimax_info.sweeps);
    if (!model.varimax_info.unnormalized_rows.empty())
        spdlog::warn("{} zero-communality row(s) skipped Kaiser normalization",
                     model.varimax_info.unnormalized_rows.size());

    auto comm = open_out(dir / "communalities.csv");
    talim::write_communalities(model, comm);
    auto var = open_out(dir / "variance.csv");
    talim::write_variance_table(model.variance, var);
    auto loadings = open_out(dir / "loadings.csv");
    talim::write_loadings(model.variables, model.loadings, flags.suppress, loadings);
    auto rotated = open_out(dir / "rotated.csv");
    talim::write_loadings(model.variables, model.rotated_loadings, flags.suppress, rotated);
    auto scree = open_out(dir / "scree.csv");
    talim::write_scree(model.eigenvalues, scree);
    spdlog::info("{} component(s) retained; reports written to {}", model.factors, dir.string());
}

// ---- synth -----------------------------------------------------------------

struct SynthFlags {
    std::string out;
    std::string spec_file;
    std::string preset;
    std::string corpus;
    std::size_t tablas = 5, strokes = 9;
    unsigned seed = 45;
    double f0 = 0.0, attack = -1.0, duration = 0.0;
    std::vector<double> amps;
    std::vector<double> stretch;

    void add_to(CLI::App& cmd) {
        cmd.add_option("-o,--out", out, "output WAV (a .json sidecar is written next to it)");
        cmd.add_option("--spec", spec_file, "JSON stroke description");
        cmd.add_option("--preset", preset, "named stroke")->check(CLI::IsMember({"raman"}));
        cmd.add_option("--f0", f0, "fundamental (Hz)");
        cmd.add_option("--amps", amps, "partial amplitudes")->delimiter(',');
        cmd.add_option("--stretch", stretch, "per-partial frequency stretch")->delimiter(',');
        cmd.add_option("--attack", attack, "linear attack (s)");
        cmd.add_option("--duration", duration, "clip length (s)");
        cmd.add_option("--corpus", corpus, "write a whole synthetic corpus and manifest into this directory");
        cmd.add_option("--tablas", tablas, "corpus instruments")->capture_default_str();
        cmd.add_option("--strokes", strokes, "corpus strokes per instrument")->capture_default_str();
        cmd.add_option("--seed", seed, "corpus random seed")->capture_default_str();
    }
};

void run_synth(const SynthFlags& f) {
    if (!f.corpus.empty()) {
        const auto m = talim::write_synthetic_corpus(f.corpus, f.tablas, f.strokes, f.seed);
        std::cout << (fs::path(f.corpus) / "manifest.csv").string() << '\n';
        spdlog::info("wrote {} clips", m.entries.size());
        return;
    }
    if (f.out.empty()) throw talim::Error(talim::ErrorCode::BadConfig, "synth needs --out or --corpus");

    talim::SynthSpec spec;
    if (!f.spec_file.empty()) {
        std::ifstream in(f.spec_file);
        if (!in) throw talim::Error(talim::ErrorCode::IoFailure, "cannot open " + f.spec_file);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw talim::Error(talim::ErrorCode::SpecInvalid, e.what());
        }
        spec = talim::synth_spec_from_json(j);
    } else if (f.preset == "raman") {
        spec = talim::raman_preset();
    }
    if (f.f0 > 0.0) spec.f0 = f.f0;
    if (!f.amps.empty()) spec.partial_amps = f.amps;
    if (!f.stretch.empty()) spec.stretch = f.stretch;
    if (f.attack >= 0.0) spec.attack = f.attack;
    if (f.duration > 0.0) spec.duration = f.duration;
    spec.validate();

    const fs::path wav(f.out);
    if (wav.has_parent_path()) fs::create_directories(wav.parent_path());
    talim::write_wav(talim::synth_stroke(spec), wav);
    auto side = open_out(wav.string() + ".json");
    side << talim::to_json(spec).dump(2) << '\n';
}

/// Appends `--key value` for every line of the --config file whose flag is
/// not already on the command line, so explicit flags take precedence.
/// Values "true"/"false" toggle bare flags. Returns args in CLI11's reversed order.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    fs::path file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
    }
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw talim::Error(talim::ErrorCode::IoFailure, "cannot open config " + file.string());
        std::string line;
        std::vector<std::string> extra;
        while (std::getline(in, line)) {
            if (talim::csv::skippable(line) || line.front() == '[') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw talim::Error(talim::ErrorCode::BadConfig, "config line without '=': " + line);
            const std::string key(talim::csv::trim(std::string_view(line).substr(0, eq)));
            const std::string value(talim::csv::trim(std::string_view(line).substr(eq + 1)));
            const std::string flag = "--" + key;
            const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
                return a == flag || a.rfind(flag + "=", 0) == 0;
            });
            if (given || value == "false") continue;
            extra.push_back(flag);
            if (value != "true") extra.push_back(value);
        }
        args.insert(args.end(), extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    return args;
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Timbre descriptors and factor analysis for percussion strokes"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_file;
    app.add_option("--config", config_file, "key=value file mirroring the command-line flags");

    AnalysisFlags analysis;
    FactorFlags factor;
    SynthFlags synth;
    unsigned jobs = std::max(1U, std::thread::hardware_concurrency());
    std::string input, out_path, out_dir = ".", format = "json";

    auto* analyze = app.add_subcommand("analyze", "descriptors of one WAV clip to stdout");
    analyze->add_option("wav", input, "input clip")->required();
    analyze->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    analysis.add_to(*analyze);

    auto* batch = app.add_subcommand("batch", "feature matrix CSV for every clip in a manifest");
    batch->add_option("manifest", input, "CSV with path,stroke_label,tabla_id")->required();
    batch->add_option("-o,--out", out_path, "output CSV (default stdout)");
    batch->add_option("-j,--jobs", jobs, "parallel workers");
    analysis.add_to(*batch);

    auto* correlate = app.add_subcommand("correlate", "Pearson r and two-tailed p tables");
    correlate->add_option("matrix", input, "feature matrix CSV")->required();
    correlate->add_option("--out-dir", out_dir, "report directory")->capture_default_str();

    auto* fac = app.add_subcommand("factor", "principal components with varimax rotation");
    fac->add_option("matrix", input, "feature matrix CSV")->required();
    fac->add_option("--out-dir", out_dir, "report directory")->capture_default_str();
    factor.add_to(*fac);

    auto* syn = app.add_subcommand("synth", "synthetic strokes with a JSON ground-truth sidecar");
    synth.add_to(*syn);

    auto* report = app.add_subcommand("report", "batch, correlate and factor in one run");
    report->add_option("manifest", input, "CSV with path,stroke_label,tabla_id")->required();
    report->add_option("--out-dir", out_dir, "report directory")->capture_default_str();
    report->add_option("-j,--jobs", jobs, "parallel workers");
    analysis.add_to(*report);
    factor.add_to(*report);

    try {
        app.parse(expand_config(argc, argv));
    } catch (const talim::Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e.code());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*analyze) {
            run_analyze(input, format, analysis);
        } else if (*batch) {
            const auto m = batch_features(input, analysis, jobs);
            if (out_path.empty()) {
                talim::write_feature_matrix(m, std::cout);
            } else {
                auto out = open_out(out_path);
                talim::write_feature_matrix(m, out);
            }
        } else if (*correlate) {
            const auto m = talim::read_feature_matrix(fs::path(input));
            m.validate();
            write_correlation_reports(m, out_dir);
        } else if (*fac) {
            factor.options();
            write_factor_reports(talim::read_feature_matrix(fs::path(input)), factor, out_dir);
        } else if (*syn) {
            run_synth(synth);
        } else if (*report) {
            const auto m = batch_features(input, analysis, jobs);
            auto out = open_out(fs::path(out_dir) / "features.csv");
            talim::write_feature_matrix(m, out);
            m.validate();
            write_correlation_reports(m, out_dir);
            write_factor_reports(m, factor, out_dir);
        }
    } catch (const talim::Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kIo;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kAnalysis;
    }
    return kOk;
}
