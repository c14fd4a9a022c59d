#ifndef TALIM_BATCH_HPP
#define TALIM_BATCH_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "talim/error.hpp"
#include "talim/io.hpp"
#include "talim/signal_io.hpp"
#include "talim/stats/matrix.hpp"
#include "talim/synth.hpp"
#include "talim/timbre.hpp"

namespace talim {

struct ManifestEntry {
    std::filesystem::path path;
    std::string stroke_label;
    std::string tabla_id;

    std::string row_id() const { return tabla_id + "_" + stroke_label; }
};

struct Manifest {
    std::vector<ManifestEntry> entries;

    void validate() const {
        if (entries.empty()) throw Error(ErrorCode::EmptyManifest, "manifest lists no recordings");
        std::set<std::filesystem::path> seen;
        for (const auto& e : entries) {
            if (e.stroke_label.empty() || e.tabla_id.empty())
                throw Error(ErrorCode::BadManifest, "empty label for " + e.path.string());
            if (!seen.insert(e.path.lexically_normal()).second)
                throw Error(ErrorCode::BadManifest, "duplicate path " + e.path.string());
        }
    }
};

/// CSV with header `path,stroke_label,tabla_id`. Relative paths resolve
/// against the manifest's own directory.
inline Manifest read_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open manifest " + file.string());
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (csv::skippable(line)) continue;
        header = csv::split(line);
        break;
    }
    const std::vector<std::string> expected{"path", "stroke_label", "tabla_id"};
    Manifest m;
    if (header.empty()) throw Error(ErrorCode::EmptyManifest, "manifest " + file.string() + " is empty");
    if (header != expected)
        throw Error(ErrorCode::BadManifest, "manifest header must be path,stroke_label,tabla_id");
    const auto base = file.parent_path();
    while (std::getline(in, line)) {
        if (csv::skippable(line)) continue;
        const auto cells = csv::split(line);
        if (cells.size() != 3) throw Error(ErrorCode::BadManifest, "manifest row needs 3 fields: " + line);
        std::filesystem::path p(cells[0]);
        if (p.is_relative()) p = base / p;
        m.entries.push_back({p, cells[1], cells[2]});
    }
    m.validate();
    return m;
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + file.string());
    const auto base = file.parent_path();
    out << "path,stroke_label,tabla_id\n";
    for (const auto& e : m.entries) {
        const auto rel = base.empty() ? e.path : e.path.lexically_relative(base);
        out << csv::quote(rel.generic_string()) << ',' << csv::quote(e.stroke_label) << ','
            << csv::quote(e.tabla_id) << '\n';
    }
}

struct BatchFailure {
    std::size_t index = 0;
    std::string path;
    std::string message;
};

struct BatchResult {
    stats::FeatureMatrix features;
    std::vector<BatchFailure> failures;
};

/// Analyzes every manifest entry; failed clips are dropped and reported.
/// Rows keep manifest order regardless of `jobs`.
inline BatchResult analyze_batch(const Manifest& manifest, const AnalysisConfig& cfg = {}, unsigned jobs = 1) {
    manifest.validate();
    const std::size_t n = manifest.entries.size();
    std::vector<std::optional<TimbreVector>> results(n);
    std::vector<std::string> errors(n);

    auto work = [&](std::size_t i) {
        try {
            results[i] = compute_all(load_wav(manifest.entries[i].path), cfg);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };
    jobs = std::max(1U, jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
        std::vector<std::future<void>> pool;
        for (unsigned w = 0; w < jobs; ++w)
            pool.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < n; i += jobs) work(i);
            }));
        for (auto& f : pool) f.get();
    }

    BatchResult out;
    const auto names = TimbreVector::field_names();
    out.features.col_ids.assign(names.begin(), names.end());
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i]) {
            out.features.row_ids.push_back(manifest.entries[i].row_id());
            const auto v = results[i]->values();
            rows.emplace_back(v.begin(), v.end());
        } else {
            out.failures.push_back({i, manifest.entries[i].path.string(), errors[i]});
        }
    }
    out.features.values = rows.empty() ? stats::Matrix(0, names.size()) : stats::Matrix::from_rows(rows);
    return out;
}

inline const std::vector<std::string>& default_stroke_names() {
    static const std::vector<std::string> names{"ta", "tee", "teen", "din", "thun", "te", "re", "ghe", "tu"};
    return names;
}

/// Writes a tablas x strokes corpus of synthetic strokes (WAV plus JSON
/// sidecar each) and its manifest into `dir`. Each tabla has its own
/// fundamental; each stroke its own spectral profile, stretch and attack.
inline Manifest write_synthetic_corpus(const std::filesystem::path& dir, std::size_t tablas = 5,
                                       std::size_t strokes = 9, unsigned seed = 45) {
    std::filesystem::create_directories(dir);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& names = default_stroke_names();
    Manifest manifest;
    for (std::size_t t = 0; t < tablas; ++t) {
        const double base_f0 = 200.0 + 35.0 * double(t) + 10.0 * unit(rng);
        for (std::size_t s = 0; s < strokes; ++s) {
            SynthSpec spec;
            spec.f0 = base_f0 * (1.0 + 0.04 * double(s % 3)) ;
            const std::size_t partials = 4 + (s + t) % 5;
            spec.partial_amps.clear();
            for (std::size_t k = 0; k < partials; ++k) {
                const double slope = 0.25 + 0.08 * double(s);
                spec.partial_amps.push_back(std::max(0.05, std::exp(-slope * double(k)) * (0.5 + unit(rng))));
            }
            spec.stretch.clear();
            const double bend = (unit(rng) - 0.5) * 0.02;
            for (std::size_t k = 0; k < partials; ++k) spec.stretch.push_back(1.0 + bend);
            spec.attack = 0.004 + 0.002 * double(s % 5) + 0.004 * unit(rng);
            spec.duration = 0.5;
            spec.decay.assign(partials, 0.15 + 0.35 * unit(rng));
            const auto clip = synth_stroke(spec).scaled(0.3 + 0.7 * unit(rng));

            const std::string label = s < names.size() ? names[s] : "stroke" + std::to_string(s + 1);
            const std::string tabla = "tabla" + std::to_string(t + 1);
            const auto wav = dir / (tabla + "_" + label + ".wav");
            write_wav(clip, wav);
            std::ofstream side(wav.string() + ".json");
            side << to_json(spec).dump(2) << '\n';
            manifest.entries.push_back({wav, label, tabla});
        }
    }
    write_manifest(manifest, dir / "manifest.csv");
    return manifest;
}

} // namespace talim

#endif
