// Command-line front end: blur generation, Richardson-Lucy deconvolution,
// SNR measurement, PSF generation, and the benchmark experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fastdeconv/fastdeconv.hpp"

namespace {

using namespace fastdeconv;

// PSF specifier grammar: line:<M> | box:<MX>x<MY> | disc:<D> | diag:<M> | file:<path>
Psf parsePsfSpec(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::runtime_error("bad PSF spec '" + spec +
                                 "' (expected line:<M>, box:<MX>x<MY>, disc:<D>, diag:<M>, "
                                 "or file:<path>)");
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    const auto parseInt = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || v < 1)
            throw std::runtime_error("bad PSF size '" + s + "' in spec '" + spec + "'");
        return v;
    };
    if (kind == "line") return makeLinePsf(parseInt(arg));
    if (kind == "disc") return makeDiscPsf(parseInt(arg));
    if (kind == "diag") return makeDiagonalPsf(parseInt(arg));
    if (kind == "box") {
        const std::size_t x = arg.find('x');
        if (x == std::string::npos)
            throw std::runtime_error("bad box spec '" + spec + "' (expected box:<MX>x<MY>)");
        return makeBoxPsf(parseInt(arg.substr(0, x)), parseInt(arg.substr(x + 1)));
    }
    if (kind == "file") {
        std::ifstream in(arg);
        if (!in)
            throw std::runtime_error("cannot open PSF file: " + arg);
        std::stringstream buf;
        buf << in.rdbuf();
        return parseSparsePsf(buf.str());
    }
    throw std::runtime_error("unknown PSF kind '" + kind + "' in spec '" + spec + "'");
}

std::string describePsf(const Psf& psf) {
    const SparsePsf sparse = toSparse(psf);
    return std::to_string(sparse.supportCount()) + " taps";
}

struct BlurArgs {
    std::string in, psf, out;
    std::string mode = "cyclic";
};

struct DeconvArgs {
    std::string in, psf, out;
    int iters = 100;
    std::string op = "auto";
    double eps = 1e-8;
    std::optional<double> thin;
    int reactivate = 10;
};

struct SnrArgs {
    std::string ref, test;
};

struct PsfGenArgs {
    std::string psf, out;
};

struct BenchArgs {
    std::string experiment, in, out;
    int reps = 100;
    int iters = 100;
    std::vector<double> thresholds;
    std::string mode = "cyclic";
};

BoundaryMode parseMode(const std::string& mode) {
    if (mode == "cyclic") return BoundaryMode::Cyclic;
    if (mode == "replicate") return BoundaryMode::Replicate;
    throw std::runtime_error("bad boundary mode '" + mode + "' (expected cyclic or replicate)");
}

int runBlur(const BlurArgs& args) {
    const Image in = readPgmFile(args.in);
    const Psf psf = parsePsfSpec(args.psf);
    Image out;
    const double secs = timeRun([&] { out = blurImage(in, psf, parseMode(args.mode)); });
    writePgmFile(args.out, out);
    std::printf("blur: psf=%s mode=%s %dx%d %.3f s -> %s\n", args.psf.c_str(),
                args.mode.c_str(), in.width(), in.height(), secs, args.out.c_str());
    return 0;
}

int runDeconv(const DeconvArgs& args) {
    const Image in = readPgmFile(args.in);
    const Psf psf = parsePsfSpec(args.psf);
    RlConfig cfg;
    cfg.iterations = args.iters;
    cfg.op = operatorKindFromName(args.op);
    cfg.epsilonDiv = args.eps;

    RlResult result;
    double secs = 0.0;
    if (args.thin) {
        secs = timeRun(
            [&] { result = rlDeconvolveSelective(in, psf, cfg, *args.thin, args.reactivate); });
        writePgmFile(args.out, result.image);
        std::printf("deconv: %d iterations operator=%s thin=%g omitted=%.2f%% %.3f s -> %s\n",
                    args.iters, args.op.c_str(), *args.thin, result.trace.omittedPercent(), secs,
                    args.out.c_str());
    } else {
        const OperatorKind resolved = dispatch(psf, cfg.op);
        secs = timeRun([&] { result = rlDeconvolve(in, psf, cfg); });
        writePgmFile(args.out, result.image);
        std::printf("deconv: %d iterations operator=%s %.3f s -> %s\n", args.iters,
                    std::string(operatorName(resolved)).c_str(), secs, args.out.c_str());
    }
    return 0;
}

int runSnr(const SnrArgs& args) {
    const Image ref = readPgmFile(args.ref);
    const Image test = readPgmFile(args.test);
    const double snr = snrDb(ref, test);
    if (std::isinf(snr))
        std::printf("inf\n");
    else
        std::printf("%.2f\n", snr);
    return 0;
}

int runPsfGen(const PsfGenArgs& args) {
    const Psf psf = parsePsfSpec(args.psf);
    const SparsePsf sparse = toSparse(psf);
    std::ofstream out(args.out, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + args.out);
    out << formatSparsePsf(sparse);
    if (!out)
        throw std::runtime_error("write failed: " + args.out);
    std::printf("psf-gen: %s -> %s (%s)\n", args.psf.c_str(), args.out.c_str(),
                describePsf(psf).c_str());
    return 0;
}

int runBenchCmd(const BenchArgs& args) {
    BenchSpec spec;
    spec.imagePath = args.in;
    if (args.experiment == "table1")
        spec.experiment = Experiment::Table1;
    else if (args.experiment == "table2")
        spec.experiment = Experiment::Table2;
    else
        throw std::runtime_error("bad experiment '" + args.experiment +
                                 "' (expected table1 or table2)");
    spec.iterations = args.iters;
    spec.repetitions = args.reps;
    spec.blurMode = parseMode(args.mode);
    if (!args.thresholds.empty()) spec.thresholds = args.thresholds;

    const BenchReport report = runBench(spec);
    const std::string csv = emitCsv(report);
    std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + args.out);
    out << csv;
    if (!out)
        throw std::runtime_error("write failed: " + args.out);
    for (const std::string& w : report.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("bench: %s image=%s reps=%d iters=%d -> %s (%zu rows)\n",
                args.experiment.c_str(), args.in.c_str(), args.reps, args.iters,
                args.out.c_str(), report.rows.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Richardson-Lucy deconvolution with PSF-specialized convolution operators"};
    app.require_subcommand(1);

    BlurArgs blurArgs;
    CLI::App* blur = app.add_subcommand("blur", "Convolve an image with a PSF");
    blur->add_option("--in", blurArgs.in, "input PGM")->required();
    blur->add_option("--psf", blurArgs.psf, "PSF spec (line:<M>|box:<MX>x<MY>|disc:<D>|diag:<M>|file:<path>)")->required();
    blur->add_option("--mode", blurArgs.mode, "boundary mode: cyclic|replicate (default cyclic)");
    blur->add_option("--out", blurArgs.out, "output PGM")->required();

    DeconvArgs deconvArgs;
    CLI::App* deconv = app.add_subcommand("deconv", "Richardson-Lucy deconvolution");
    deconv->add_option("--in", deconvArgs.in, "blurred input PGM")->required();
    deconv->add_option("--psf", deconvArgs.psf, "PSF spec")->required();
    deconv->add_option("--iters", deconvArgs.iters, "iteration count (default 100)");
    deconv->add_option("--op", deconvArgs.op,
                       "operator: auto|naive|list|generic-box|box2d-sliding|box2d-cumul|"
                       "box1d-sliding|box1d-cumul|fourier (default auto)");
    deconv->add_option("--eps", deconvArgs.eps, "quotient guard (default 1e-8)");
    deconv->add_option("--thin", deconvArgs.thin, "selective-convolution threshold");
    deconv->add_option("--reactivate", deconvArgs.reactivate,
                       "selective reactivation period (default 10)");
    deconv->add_option("--out", deconvArgs.out, "output PGM")->required();

    SnrArgs snrArgs;
    CLI::App* snr = app.add_subcommand("snr", "Signal-to-noise ratio between two images (dB)");
    snr->add_option("--ref", snrArgs.ref, "reference PGM")->required();
    snr->add_option("--test", snrArgs.test, "test PGM")->required();

    PsfGenArgs psfGenArgs;
    CLI::App* psfGen = app.add_subcommand("psf-gen", "Write a PSF as a sparse tap-list file");
    psfGen->add_option("--psf", psfGenArgs.psf, "PSF spec")->required();
    psfGen->add_option("--out", psfGenArgs.out, "output text file")->required();

    BenchArgs benchArgs;
    CLI::App* bench = app.add_subcommand("bench", "Run a benchmark experiment, emit CSV");
    bench->add_option("--experiment", benchArgs.experiment, "table1|table2")->required();
    bench->add_option("--in", benchArgs.in, "input PGM (the sharp original)")->required();
    bench->add_option("--reps", benchArgs.reps, "timing repetitions (default 100)");
    bench->add_option("--iters", benchArgs.iters, "RL iterations per run (default 100)");
    bench->add_option("--thresholds", benchArgs.thresholds, "table2 thinning thresholds");
    bench->add_option("--mode", benchArgs.mode, "blur boundary mode (default cyclic)");
    bench->add_option("--out", benchArgs.out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (blur->parsed()) return runBlur(blurArgs);
        if (deconv->parsed()) return runDeconv(deconvArgs);
        if (snr->parsed()) return runSnr(snrArgs);
        if (psfGen->parsed()) return runPsfGen(psfGenArgs);
        if (bench->parsed()) return runBenchCmd(benchArgs);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
