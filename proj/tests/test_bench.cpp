#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <sstream>
#include <thread>

#include "fastdeconv/bench.hpp"
#include "testutil.hpp"

using namespace fastdeconv;

namespace {

int countLines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("timeRun") {
    SECTION("a no-op takes almost no time") {
        const double secs = timeRun([] {});
        REQUIRE(secs >= 0.0);
        REQUIRE(secs < 1e-3);
    }
    SECTION("a synthetic sleep is measured within jitter") {
        const double secs =
            timeRun([] { std::this_thread::sleep_for(std::chrono::milliseconds(20)); });
        REQUIRE(secs >= 0.015);
        REQUIRE(secs < 0.5);
    }
}

TEST_CASE("runTable1 degenerate spec completes with one sample per cell") {
    BenchSpec spec;
    spec.iterations = 1;
    spec.repetitions = 1;
    const Image img = testutil::syntheticScene(16, 16);
    const BenchReport report = runTable1(spec, img);

    // 8 operators x 8 PSFs
    REQUIRE(report.rows.size() == 64);
    for (const BenchRow& row : report.rows) {
        if (row.meanSeconds) {
            REQUIRE(*row.stddevSeconds == 0.0); // single sample
            REQUIRE(*row.meanSeconds >= 0.0);
        }
    }
}

TEST_CASE("runTable1 compatibility matches dispatch applicability") {
    BenchSpec spec;
    spec.iterations = 1;
    spec.repetitions = 1;
    const Image img = testutil::syntheticScene(16, 16);
    const BenchReport report = runTable1(spec, img);

    const auto psfFor = [](const std::string& label) -> Psf {
        if (label == "line:9") return makeLinePsf(9);
        if (label == "line:17") return makeLinePsf(17);
        if (label == "box:9x9") return makeBoxPsf(9, 9);
        if (label == "box:17x17") return makeBoxPsf(17, 17);
        if (label == "diag:9") return makeDiagonalPsf(9);
        if (label == "diag:17") return makeDiagonalPsf(17);
        if (label == "disc:9") return makeDiscPsf(9);
        return makeDiscPsf(17);
    };
    for (const BenchRow& row : report.rows) {
        const bool compatible = operatorAcceptsPsf(operatorKindFromName(row.op), psfFor(row.psf));
        REQUIRE(row.meanSeconds.has_value() == compatible);
    }
    // spot checks mirroring the expected applicability pattern
    const auto find = [&](const std::string& op, const std::string& psf) -> const BenchRow& {
        for (const BenchRow& row : report.rows)
            if (row.op == op && row.psf == psf) return row;
        FAIL("row not found");
        return report.rows.front();
    };
    REQUIRE(find("box1d-cumul", "line:9").meanSeconds.has_value());
    REQUIRE_FALSE(find("box1d-cumul", "box:9x9").meanSeconds.has_value());
    REQUIRE_FALSE(find("box2d-cumul", "disc:9").meanSeconds.has_value());
    REQUIRE_FALSE(find("box2d-sliding", "diag:9").meanSeconds.has_value());
    REQUIRE(find("generic-box", "diag:17").meanSeconds.has_value());
    REQUIRE(find("list", "disc:17").meanSeconds.has_value());
    REQUIRE(find("fourier", "box:17x17").meanSeconds.has_value());
}

TEST_CASE("runTable2 structure and invariants") {
    BenchSpec spec;
    spec.iterations = 3;
    spec.repetitions = 1;
    spec.thresholds = {0.0, 0.1};
    const Image img = testutil::syntheticScene(24, 24);
    const BenchReport report = runTable2(spec, img);

    REQUIRE(report.rows.size() == 3); // reference + 2 thresholds
    const BenchRow& ref = report.rows[0];
    REQUIRE(ref.op == "naive");
    REQUIRE(*ref.omittedPct == 0.0);
    REQUIRE(*ref.speedup == 1.0);
    REQUIRE_FALSE(ref.snrRefDb.has_value());

    const BenchRow& zero = report.rows[1];
    REQUIRE(zero.op == "naive:thin=0");
    REQUIRE(*zero.omittedPct == 0.0);             // omitted is 0 exactly when threshold is 0
    REQUIRE(*zero.snrOrigDb == *ref.snrOrigDb);   // bit-identical reconstruction
    REQUIRE(std::isinf(*zero.snrRefDb));

    const BenchRow& thinned = report.rows[2];
    REQUIRE(thinned.op == "naive:thin=0.1");
    REQUIRE(*thinned.omittedPct >= 0.0);
    REQUIRE(thinned.snrRefDb.has_value());
}

TEST_CASE("runTable2 with only threshold 0 gives reference plus one identical row") {
    BenchSpec spec;
    spec.iterations = 2;
    spec.repetitions = 2;
    spec.thresholds = {0.0};
    const Image img = testutil::syntheticScene(16, 16);
    const BenchReport report = runTable2(spec, img);
    REQUIRE(report.rows.size() == 2);
    REQUIRE(*report.rows[1].snrOrigDb == *report.rows[0].snrOrigDb);
}

TEST_CASE("emitCsv") {
    SECTION("empty report is just the header") {
        const std::string csv = emitCsv(BenchReport{});
        REQUIRE(csv ==
                "experiment,operator,psf,mean_s,stddev_s,omitted_pct,snr_orig_db,snr_ref_db,"
                "speedup\n");
    }
    SECTION("one cell emits exactly two lines") {
        BenchReport report;
        BenchRow row;
        row.experiment = "table1";
        row.op = "naive";
        row.psf = "line:9";
        row.meanSeconds = 0.048;
        row.stddevSeconds = 0.001;
        report.rows.push_back(row);
        const std::string csv = emitCsv(report);
        REQUIRE(countLines(csv) == 2);
        REQUIRE(csv.find("table1,naive,line:9,0.05,0.00,,,,\n") != std::string::npos);
    }
    SECTION("fixed two-decimal formatting and inf handling") {
        BenchReport report;
        BenchRow row;
        row.experiment = "table2";
        row.op = "naive:thin=0";
        row.psf = "disc:9";
        row.meanSeconds = 3.771;
        row.stddevSeconds = 0.0049;
        row.omittedPct = 0.0;
        row.snrOrigDb = 13.308;
        row.snrRefDb = std::numeric_limits<double>::infinity();
        row.speedup = 0.994;
        report.rows.push_back(row);
        const std::string csv = emitCsv(report);
        REQUIRE(csv.find("table2,naive:thin=0,disc:9,3.77,0.00,0.00,13.31,inf,0.99\n") !=
                std::string::npos);
    }
    SECTION("full table2 run: header, reference, one row per threshold") {
        BenchSpec spec;
        spec.iterations = 1;
        spec.repetitions = 1;
        const Image img = testutil::syntheticScene(16, 16);
        const std::string csv = emitCsv(runTable2(spec, img));
        REQUIRE(countLines(csv) == 1 + 1 + 8);
    }
}

TEST_CASE("bench spec validation") {
    BenchSpec spec;
    spec.iterations = 0;
    REQUIRE_THROWS_AS(runTable1(spec, Image(8, 8, 1.0)), std::invalid_argument);
    spec.iterations = 1;
    spec.repetitions = 0;
    REQUIRE_THROWS_AS(runTable2(spec, Image(8, 8, 1.0)), std::invalid_argument);
}
