// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "talim/talim.hpp"

namespace {

using talim::stats::FeatureMatrix;
using talim::stats::Matrix;

/// Collects the first violated condition of a check.
struct Verdict {
    std::string failure;

    bool expect(bool ok, const std::string& what) {
        if (!ok && failure.empty()) failure = what;
        return ok;
    }
    bool ok() const { return failure.empty(); }
};

std::string num(double v) { return talim::format_number(v); }

Matrix random_matrix(std::mt19937& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

FeatureMatrix as_features(Matrix values) {
    FeatureMatrix fm;
    for (std::size_t i = 0; i < values.rows(); ++i) fm.row_ids.push_back("obs" + std::to_string(i + 1));
    for (std::size_t j = 0; j < values.cols(); ++j) fm.col_ids.push_back("v" + std::to_string(j + 1));
    fm.values = std::move(values);
    return fm;
}

// 1 ---------------------------------------------------------------------------
Verdict tristimulus_identity() {
    Verdict v;
    std::mt19937 rng(101);
    std::uniform_int_distribution<int> len(2, 20);
    std::uniform_real_distribution<double> amp(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a(std::size_t(len(rng)));
        for (auto& x : a) x = amp(rng);
        a[0] += 1e-3;
        const auto t = talim::tristimulus(a);
        const auto oe = talim::odd_even(a);
        worst = std::max({worst, std::abs(t.t1 + t.t2 + t.t3 - 1.0), std::abs(t.t1 + oe.odd + oe.even - 1.0)});
    }
    v.expect(worst <= 1e-9, "max deviation " + num(worst));
    return v;
}

// 2 ---------------------------------------------------------------------------
Verdict pca_trace() {
    Verdict v;
    std::mt19937 rng(202);
    std::uniform_int_distribution<std::size_t> nd(4, 12), pd(3, 20);
    for (int trial = 0; trial < 200 && v.ok(); ++trial) {
        const std::size_t n = nd(rng), p = pd(rng);
        const auto res = talim::stats::pca(as_features(random_matrix(rng, n, p, -1.0, 1.0)));
        double sum = 0.0;
        std::size_t positive = 0;
        for (double e : res.eigenvalues) {
            sum += e;
            if (e > 1e-8) ++positive;
        }
        v.expect(std::abs(sum - double(p)) <= 1e-8, "trial " + std::to_string(trial) + ": eigenvalue sum " + num(sum));
        v.expect(positive <= n - 1, "trial " + std::to_string(trial) + ": " + std::to_string(positive) +
                                        " eigenvalues above 1e-8 with n=" + std::to_string(n));
    }
    return v;
}

// 3 ---------------------------------------------------------------------------
Verdict varimax_invariants() {
    Verdict v;
    std::mt19937 rng(303);
    std::uniform_int_distribution<std::size_t> pd(2, 20);
    for (int trial = 0; trial < 100 && v.ok(); ++trial) {
        const std::size_t p = pd(rng);
        std::uniform_int_distribution<std::size_t> md(2, std::min<std::size_t>(6, p));
        const std::size_t m = md(rng);
        const Matrix a = random_matrix(rng, p, m, -0.9, 0.9);
        const auto res = talim::stats::varimax(a);
        const auto h0 = talim::stats::communalities(a), h1 = talim::stats::communalities(res.rotated);
        const std::string tag = "trial " + std::to_string(trial) + ": ";
        double total0 = 0.0, total1 = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            v.expect(std::abs(h0[i] - h1[i]) <= 1e-8, tag + "communality of row " + std::to_string(i) + " changed");
            total0 += h0[i];
            total1 += h1[i];
        }
        v.expect(std::abs(total0 - total1) <= 1e-8, tag + "total SS changed by " + num(total1 - total0));
        for (std::size_t s = 1; s < res.criterion.size(); ++s)
            v.expect(res.criterion[s] >= res.criterion[s - 1] - 1e-12 * std::max(1.0, std::abs(res.criterion[s - 1])),
                     tag + "criterion fell at sweep " + std::to_string(s));
    }
    return v;
}

// 4 ---------------------------------------------------------------------------
Verdict closed_form_rotation() {
    Verdict v;
    const auto res = talim::stats::varimax(Matrix::from_rows({{0.7, 0.7}, {0.7, -0.7}}));
    const Matrix& b = res.rotated;
    const double target = 0.7 * std::sqrt(2.0);
    std::vector<std::size_t> row_of(2);
    for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t big = std::abs(b(0, j)) > std::abs(b(1, j)) ? 0 : 1;
        row_of[j] = big;
        v.expect(std::abs(b(big, j) - target) <= 1e-3, "column " + std::to_string(j) + " loading " + num(b(big, j)));
        v.expect(std::abs(b(1 - big, j)) <= 1e-3, "column " + std::to_string(j) + " cross loading " + num(b(1 - big, j)));
    }
    v.expect(row_of[0] != row_of[1], "both columns load on the same row");
    return v;
}

// 5 ---------------------------------------------------------------------------
Verdict significance_fixture() {
    Verdict v;
    const double p = talim::stats::correlation_p_value(0.969, 14);
    v.expect(p < 0.01, "p(0.969, 14) = " + num(p));
    v.expect(talim::stats::significance_stars(p) == "**", "flag for p = " + num(p));
    for (std::size_t n = 3; n <= 60; ++n) {
        const double p0 = talim::stats::correlation_p_value(0.0, n);
        v.expect(std::abs(p0 - 1.0) <= 1e-9, "p(0, " + std::to_string(n) + ") = " + num(p0));
    }
    return v;
}

// 6 ---------------------------------------------------------------------------
Verdict synth_round_trip() {
    Verdict v;
    std::mt19937 rng(606);
    std::uniform_real_distribution<double> f0d(100.0, 500.0), ampd(0.1, 1.0);
    std::uniform_int_distribution<std::size_t> kd(3, 8);

    auto random_spec = [&] {
        talim::SynthSpec spec;
        spec.f0 = f0d(rng);
        spec.partial_amps.resize(kd(rng));
        for (auto& a : spec.partial_amps) a = ampd(rng);
        return spec;
    };

    double worst_f0 = 0.0, worst_ratio = 0.0, worst_inh = 0.0, worst_stretch = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto spec = random_spec();
        const auto clip = talim::synth_stroke(spec);
        const auto ltas = talim::compute_ltas(clip);
        const double f0 = talim::estimate_f0(clip);
        worst_f0 = std::max(worst_f0, std::abs(f0 / spec.f0 - 1.0));

        const auto series = talim::extract_partials(ltas, f0);
        const auto got_t = talim::tristimulus(series);
        const auto got_oe = talim::odd_even(series);
        const auto want_t = talim::tristimulus(spec.partial_amps);
        const auto want_oe = talim::odd_even(spec.partial_amps);
        worst_ratio = std::max({worst_ratio, std::abs(got_t.t1 - want_t.t1), std::abs(got_t.t2 - want_t.t2),
                                std::abs(got_t.t3 - want_t.t3), std::abs(got_oe.odd - want_oe.odd),
                                std::abs(got_oe.even - want_oe.even)});

        const auto nominal = talim::extract_partials(ltas, spec.f0);
        worst_inh = std::max(worst_inh, std::abs(talim::inharmonicity(nominal)));
    }
    for (int trial = 0; trial < 20; ++trial) {
        auto spec = random_spec();
        spec.stretch.assign(spec.partial_amps.size(), 1.01);
        const auto ltas = talim::compute_ltas(talim::synth_stroke(spec));
        const double inh = talim::inharmonicity(talim::extract_partials(ltas, spec.f0));
        worst_stretch = std::max(worst_stretch, std::abs(inh - 1.0));
    }
    v.expect(worst_f0 <= 0.01, "f0 relative error " + num(worst_f0));
    v.expect(worst_ratio <= 0.03, "ratio feature error " + num(worst_ratio));
    v.expect(worst_inh <= 0.01, "harmonic inharmonicity " + num(worst_inh));
    v.expect(worst_stretch <= 0.05, "stretched inharmonicity off by " + num(worst_stretch));
    return v;
}

// 7 ---------------------------------------------------------------------------
Verdict dft_correctness() {
    Verdict v;
    std::mt19937 rng(707);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t n : {8, 64, 256, 1024}) {
        for (auto window : {talim::Window::rectangular, talim::Window::hann}) {
            std::vector<double> x(n);
            for (auto& s : x) s = g(rng);
            const auto fast = talim::magnitude_spectrum(x, window);
            const auto slow = oracle::direct_dft_magnitude(x, talim::make_window(window, n));
            double peak = 0.0, err = 0.0;
            for (std::size_t m = 0; m < slow.size(); ++m) {
                peak = std::max(peak, slow[m]);
                err = std::max(err, std::abs(fast[m] - slow[m]));
            }
            v.expect(err <= 1e-6 * peak, "N=" + std::to_string(n) + " " + talim::to_string(window) +
                                             ": relative error " + num(err / peak));
        }
        std::vector<double> x(n);
        for (auto& s : x) s = g(rng);
        const auto mag = talim::magnitude_spectrum(x);
        double time_energy = 0.0, freq_energy = 0.0;
        for (double s : x) time_energy += s * s;
        for (std::size_t m = 0; m < mag.size(); ++m) {
            const double xm = mag[m] * double(n) / 2.0;
            freq_energy += (m == 0 || m == n / 2 ? 1.0 : 2.0) * xm * xm;
        }
        freq_energy /= double(n);
        v.expect(std::abs(freq_energy - time_energy) <= 1e-6 * time_energy,
                 "Parseval N=" + std::to_string(n) + ": " + num(freq_energy) + " vs " + num(time_energy));
    }
    return v;
}

// 8 ---------------------------------------------------------------------------
Verdict scaling_behavior() {
    Verdict v;
    std::vector<talim::AudioClip> clips;
    clips.push_back(talim::synth_stroke(talim::raman_preset()));
    {
        talim::SynthSpec s;
        s.f0 = 180.0;
        s.partial_amps = {0.4, 1.0, 0.3, 0.6, 0.1, 0.2};
        s.stretch = {1.0, 1.004, 1.009, 1.012, 1.02, 1.03};
        s.decay = {0.3, 0.2, 0.15, 0.1, 0.08, 0.05};
        s.attack = 0.005;
        clips.push_back(talim::synth_stroke(s));
    }
    {
        std::mt19937 rng(808);
        std::normal_distribution<double> g(0.0, 0.02);
        talim::SynthSpec s;
        s.f0 = 330.0;
        s.partial_amps = {1.0, 0.5, 0.25};
        const auto base = talim::synth_stroke(s);
        std::vector<double> noisy(base.samples().begin(), base.samples().end());
        for (auto& s : noisy) s = std::clamp(s + g(rng), -1.0, 1.0);
        clips.emplace_back(std::move(noisy), 44100, "noisy");
    }
    for (std::size_t ci = 0; ci < clips.size(); ++ci) {
        const auto ref = talim::compute_all(clips[ci]);
        for (double c : {0.1, 0.5}) {
            const auto got = talim::compute_all(clips[ci].scaled(c));
            const std::string tag = "clip " + std::to_string(ci) + " c=" + num(c) + ": ";
            const std::pair<const char*, std::pair<double, double>> ratios[] = {
                {"brightness", {ref.brightness, got.brightness}},
                {"tristimulus1", {ref.tristimulus1, got.tristimulus1}},
                {"tristimulus2", {ref.tristimulus2, got.tristimulus2}},
                {"tristimulus3", {ref.tristimulus3, got.tristimulus3}},
                {"odd_param", {ref.odd_param, got.odd_param}},
                {"even_param", {ref.even_param, got.even_param}},
                {"irregularity", {ref.irregularity, got.irregularity}},
                {"inharmonicity", {ref.inharmonicity, got.inharmonicity}},
                {"centroid", {ref.centroid, got.centroid}},
            };
            for (const auto& [name, pair] : ratios)
                v.expect(std::abs(pair.first - pair.second) <= 1e-6,
                         tag + name + " moved by " + num(pair.second - pair.first));
            const double shift = got.rms_power - ref.rms_power;
            v.expect(std::abs(shift - 20.0 * std::log10(c)) <= 0.01, tag + "rms shift " + num(shift));
        }
    }
    return v;
}

// 9 ---------------------------------------------------------------------------
Verdict end_to_end_corpus() {
    Verdict v;
    namespace fs = std::filesystem;
    const fs::path dir = fs::current_path() / "acceptance_corpus";
    fs::remove_all(dir);
    const auto manifest = talim::write_synthetic_corpus(dir / "clips", 5, 9);
    const auto reread = talim::read_manifest(dir / "clips" / "manifest.csv");
    v.expect(reread.entries.size() == 45, "manifest has " + std::to_string(reread.entries.size()) + " rows");

    const auto batch = talim::analyze_batch(reread, {}, std::max(1U, std::thread::hardware_concurrency()));
    v.expect(batch.failures.empty(), "batch failures: " + std::to_string(batch.failures.size()));
    const auto& fm = batch.features;
    v.expect(fm.n() == 45 && fm.p() == 14, "feature matrix " + std::to_string(fm.n()) + "x" + std::to_string(fm.p()));
    if (!v.ok()) return v;
    for (std::size_t i = 0; i < fm.n(); ++i) {
        const double t = fm.values(i, 1) + fm.values(i, 2) + fm.values(i, 3);
        const double oe = fm.values(i, 1) + fm.values(i, 4) + fm.values(i, 5);
        v.expect(std::abs(t - 1.0) <= 1e-9 && std::abs(oe - 1.0) <= 1e-9, "row " + fm.row_ids[i] + " ratio sums");
    }

    const auto corr = talim::stats::pearson(fm);
    for (std::size_t i = 0; i < 14; ++i)
        for (std::size_t j = 0; j < 14; ++j) {
            v.expect(corr.r(i, j) == corr.r(j, i) && std::abs(corr.r(i, j)) <= 1.0 + 1e-12, "r not symmetric/bounded");
            v.expect(corr.p_values(i, j) >= 0.0 && corr.p_values(i, j) <= 1.0, "p outside [0,1]");
        }

    const auto model = talim::stats::factor_analysis(fm);
    double eig_sum = 0.0;
    for (double e : model.eigenvalues) eig_sum += e;
    v.expect(std::abs(eig_sum - 14.0) <= 1e-8, "eigenvalue sum " + num(eig_sum));
    const auto h_rot = talim::stats::communalities(model.rotated_loadings);
    for (std::size_t i = 0; i < 14; ++i)
        v.expect(std::abs(h_rot[i] - model.communalities_extraction[i]) <= 1e-8, "communality changed by rotation");
    const auto& last = model.variance[model.factors - 1];
    v.expect(last.extraction && last.rotation && std::abs(last.extraction->cumulative - last.rotation->cumulative) <= 1e-8,
             "extraction and rotation totals differ");

    const fs::path out = dir / "reports";
    fs::create_directories(out);
    auto write = [&](const char* name, const std::function<void(std::ostream&)>& fn) {
        std::ofstream f(out / name);
        fn(f);
        f.close();
        v.expect(!f.fail() && fs::file_size(out / name) > 0, std::string("could not write ") + name);
    };
    write("features.csv", [&](std::ostream& o) { talim::write_feature_matrix(fm, o); });
    write("r.csv", [&](std::ostream& o) { talim::write_square(corr.ids, corr.r, o); });
    write("p.csv", [&](std::ostream& o) { talim::write_square(corr.ids, corr.p_values, o); });
    write("correlation_flagged.csv", [&](std::ostream& o) { talim::write_flagged_correlation(corr, o); });
    write("correlation_pairs.csv", [&](std::ostream& o) { talim::write_correlation_pairs(corr, o); });
    write("communalities.csv", [&](std::ostream& o) { talim::write_communalities(model, o); });
    write("variance.csv", [&](std::ostream& o) { talim::write_variance_table(model.variance, o); });
    write("loadings.csv", [&](std::ostream& o) { talim::write_loadings(model.variables, model.loadings, 0.5, o); });
    write("rotated.csv", [&](std::ostream& o) { talim::write_loadings(model.variables, model.rotated_loadings, 0.5, o); });
    write("scree.csv", [&](std::ostream& o) { talim::write_scree(model.eigenvalues, o); });

    std::ifstream back(out / "features.csv");
    const auto parsed = talim::read_feature_matrix(back);
    v.expect(parsed.values == fm.values && parsed.row_ids == fm.row_ids, "features.csv does not round-trip");
    return v;
}

struct Criterion {
    int id;
    const char* title;
    double budget_s; // 0 = untimed
    Verdict (*run)();
};

} // namespace

int main() {
    const Criterion criteria[] = {
        {1, "tristimulus and odd/even shares sum to one (1000 vectors)", 1.0, tristimulus_identity},
        {2, "PCA eigenvalues sum to p with rank <= n-1 (200 matrices)", 5.0, pca_trace},
        {3, "varimax keeps communalities and total SS, criterion non-decreasing (100 matrices)", 5.0,
         varimax_invariants},
        {4, "[[0.7,0.7],[0.7,-0.7]] rotates to +0.9899 on the diagonal", 0.0, closed_form_rotation},
        {5, "r=0.969, n=14 flagged ** and r=0 gives p=1", 0.0, significance_fixture},
        {6, "synthetic stroke round trip: f0, ratios, inharmonicity (100 + 20 clips)", 60.0, synth_round_trip},
        {7, "magnitude spectrum matches direct DFT, Parseval holds", 0.0, dft_correctness},
        {8, "amplitude scaling leaves ratio features fixed and shifts rms by 20log10(c)", 0.0, scaling_behavior},
        {9, "45-clip corpus through batch, correlate and factor", 30.0, end_to_end_corpus},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0.0)
            v.expect(secs < c.budget_s, "took " + num(secs) + " s, limit " + num(c.budget_s) + " s");
        const bool ok = v.ok();
        failures += ok ? 0 : 1;
        std::printf("[%s] AC%d %s (%.3f s)%s%s\n", ok ? "PASS" : "FAIL", c.id, c.title, secs, ok ? "" : ": ",
                    v.failure.c_str());
    }
    std::printf("%d/%zu criteria passed\n", int(std::size(criteria)) - failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
