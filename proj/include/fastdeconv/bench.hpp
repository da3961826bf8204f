#pragma once

#include <chrono>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ratio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fastdeconv/convolve.hpp"
#include "fastdeconv/image.hpp"
#include "fastdeconv/pgm.hpp"
#include "fastdeconv/psf.hpp"
#include "fastdeconv/rl.hpp"

namespace fastdeconv {

enum class Experiment { Table1, Table2 };

/// Experiment description. The defaults mirror the reference protocol
/// (100 iterations, runtimes averaged over 100 runs); both knobs scale down
/// for desk-size checks.
struct BenchSpec {
    std::string imagePath;
    Experiment experiment = Experiment::Table1;
    int iterations = 100;
    int repetitions = 100;
    std::vector<double> thresholds = {0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
    BoundaryMode blurMode = BoundaryMode::Cyclic;
};

/// One report line: a timed configuration. Quality columns are only present
/// for table2 rows; all numeric fields are absent for incompatible
/// (operator, PSF) cells.
struct BenchRow {
    std::string experiment;
    std::string op;
    std::string psf;
    std::optional<double> meanSeconds;
    std::optional<double> stddevSeconds;
    std::optional<double> omittedPct;
    std::optional<double> snrOrigDb;
    std::optional<double> snrRefDb;
    std::optional<double> speedup;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<std::string> warnings;
};

/// Wall-clock duration of one invocation.
template <typename Thunk>
double timeRun(Thunk&& thunk) {
    const auto t0 = std::chrono::steady_clock::now();
    thunk();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

namespace detail {

inline double mean(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

inline double stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double sum = 0.0;
    for (double x : xs) sum += (x - m) * (x - m);
    return std::sqrt(sum / static_cast<double>(xs.size()));
}

inline Image clampNonNegative(Image img) {
    for (double& v : img.data())
        if (v < 0.0) v = 0.0;
    return img;
}

inline void validateBenchSpec(const BenchSpec& spec) {
    if (spec.iterations < 1)
        throw std::invalid_argument("bench: iterations must be >= 1");
    if (spec.repetitions < 1)
        throw std::invalid_argument("bench: repetitions must be >= 1");
}

inline void warnTimerResolution(BenchReport& report) {
    if (std::ratio_greater<std::chrono::steady_clock::period, std::milli>::value)
        report.warnings.push_back("timer resolution coarser than 1 ms; timings unreliable");
}

inline std::vector<std::pair<std::string, Psf>> table1PsfSet() {
    return {
        {"line:9", makeLinePsf(9)},       {"line:17", makeLinePsf(17)},
        {"box:9x9", makeBoxPsf(9, 9)},    {"box:17x17", makeBoxPsf(17, 17)},
        {"diag:9", makeDiagonalPsf(9)},   {"diag:17", makeDiagonalPsf(17)},
        {"disc:9", makeDiscPsf(9)},       {"disc:17", makeDiscPsf(17)},
    };
}

inline std::string formatThreshold(double t) {
    std::ostringstream out;
    out << t;
    return out.str();
}

} // namespace detail

/// Runtime matrix: RL deconvolution with every applicable operator for each
/// PSF of the standard set. Incompatible cells stay empty.
inline BenchReport runTable1(const BenchSpec& spec, const Image& original) {
    detail::validateBenchSpec(spec);
    BenchReport report;
    detail::warnTimerResolution(report);

    const auto psfSet = detail::table1PsfSet();
    std::vector<Image> blurred;
    blurred.reserve(psfSet.size());
    for (const auto& [label, psf] : psfSet)
        blurred.push_back(detail::clampNonNegative(blurImage(original, psf, spec.blurMode)));

    const OperatorKind ops[] = {
        OperatorKind::Naive,        OperatorKind::Fourier,       OperatorKind::List,
        OperatorKind::GenericBox,   OperatorKind::Box2dSliding,  OperatorKind::Box2dCumulated,
        OperatorKind::Box1dSliding, OperatorKind::Box1dCumulated,
    };
    for (OperatorKind op : ops) {
        for (std::size_t i = 0; i < psfSet.size(); ++i) {
            BenchRow row;
            row.experiment = "table1";
            row.op = std::string(operatorName(op));
            row.psf = psfSet[i].first;
            if (operatorAcceptsPsf(op, psfSet[i].second)) {
                RlConfig cfg;
                cfg.iterations = spec.iterations;
                cfg.op = op;
                std::vector<double> samples;
                samples.reserve(static_cast<std::size_t>(spec.repetitions));
                for (int rep = 0; rep < spec.repetitions; ++rep)
                    samples.push_back(
                        timeRun([&] { rlDeconvolve(blurred[i], psfSet[i].second, cfg); }));
                row.meanSeconds = detail::mean(samples);
                row.stddevSeconds = detail::stddev(samples);
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

/// Thinning sweep: unthinned reference plus one selective run per threshold,
/// all on the image blurred with the diameter-9 defocus PSF.
inline BenchReport runTable2(const BenchSpec& spec, const Image& original) {
    detail::validateBenchSpec(spec);
    BenchReport report;
    detail::warnTimerResolution(report);

    const Psf psf = makeDiscPsf(9);
    const Image blurred = detail::clampNonNegative(blurImage(original, psf, spec.blurMode));

    RlConfig cfg;
    cfg.iterations = spec.iterations;
    cfg.op = OperatorKind::Naive;

    // reference: unthinned RL
    std::vector<double> refSamples;
    Image reference;
    refSamples.push_back(timeRun([&] { reference = rlDeconvolve(blurred, psf, cfg).image; }));
    for (int rep = 1; rep < spec.repetitions; ++rep)
        refSamples.push_back(timeRun([&] { rlDeconvolve(blurred, psf, cfg); }));
    const double refMean = detail::mean(refSamples);

    BenchRow refRow;
    refRow.experiment = "table2";
    refRow.op = "naive";
    refRow.psf = "disc:9";
    refRow.meanSeconds = refMean;
    refRow.stddevSeconds = detail::stddev(refSamples);
    refRow.omittedPct = 0.0;
    refRow.snrOrigDb = snrDb(original, reference);
    refRow.speedup = 1.0;
    report.rows.push_back(std::move(refRow));

    for (double threshold : spec.thresholds) {
        std::vector<double> samples;
        RlResult run;
        samples.push_back(
            timeRun([&] { run = rlDeconvolveSelective(blurred, psf, cfg, threshold); }));
        for (int rep = 1; rep < spec.repetitions; ++rep)
            samples.push_back(
                timeRun([&] { rlDeconvolveSelective(blurred, psf, cfg, threshold); }));

        BenchRow row;
        row.experiment = "table2";
        row.op = "naive:thin=" + detail::formatThreshold(threshold);
        row.psf = "disc:9";
        row.meanSeconds = detail::mean(samples);
        row.stddevSeconds = detail::stddev(samples);
        row.omittedPct = run.trace.omittedPercent();
        row.snrOrigDb = snrDb(original, run.image);
        row.snrRefDb = snrDb(reference, run.image);
        row.speedup = refMean / detail::mean(samples);
        report.rows.push_back(std::move(row));
    }
    return report;
}

inline BenchReport runTable1(const BenchSpec& spec) {
    return runTable1(spec, readPgmFile(spec.imagePath));
}

inline BenchReport runTable2(const BenchSpec& spec) {
    return runTable2(spec, readPgmFile(spec.imagePath));
}

inline BenchReport runBench(const BenchSpec& spec) {
    return spec.experiment == Experiment::Table1 ? runTable1(spec) : runTable2(spec);
}

/// CSV serialization: fixed column order, 2-decimal fixed formatting,
/// absent cells as empty fields, LF line endings.
inline std::string emitCsv(const BenchReport& report) {
    std::ostringstream out;
    out << "experiment,operator,psf,mean_s,stddev_s,omitted_pct,snr_orig_db,snr_ref_db,speedup\n";
    const auto cell = [&](const std::optional<double>& v) -> std::string {
        if (!v) return "";
        if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << *v;
        return s.str();
    };
    for (const BenchRow& r : report.rows) {
        out << r.experiment << ',' << r.op << ',' << r.psf << ',' << cell(r.meanSeconds) << ','
            << cell(r.stddevSeconds) << ',' << cell(r.omittedPct) << ',' << cell(r.snrOrigDb)
            << ',' << cell(r.snrRefDb) << ',' << cell(r.speedup) << '\n';
    }
    return out.str();
}

} // namespace fastdeconv
