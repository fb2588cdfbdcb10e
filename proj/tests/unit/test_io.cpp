#include "doctest.h"

#include "scalelab/error.hpp"
#include "scalelab/io.hpp"
#include "scalelab/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace scalelab;
namespace fs = std::filesystem;

TEST_CASE("number formatting round-trips") {
    CounterRng rng(1, 1);
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.normal() * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
        CHECK(io::parse_double(io::format_double(x)) == x);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(io::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(std::isnan(io::parse_double("NaN")));
    CHECK(io::parse_double(" 1.5e-3 ") == 1.5e-3);
    CHECK(io::parse_double("+2") == 2.0);
    CHECK_THROWS_AS(io::parse_double("1,5"), ParseError);
    CHECK_THROWS_AS(io::parse_double(""), ParseError);
}

TEST_CASE("CSV quoting and parsing") {
    std::ostringstream os;
    const std::vector<std::string> h{"a", "b"};
    const std::vector<std::string> r{"x,y", "say \"hi\""};
    io::write_csv_row(os, h);
    io::write_csv_row(os, r);
    CHECK(os.str() == "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
    std::istringstream is(os.str());
    const auto t = io::read_csv(is);
    CHECK(t.header == h);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0] == r);
    CHECK(t.column("b") == 1);
    CHECK(t.column("zzz") == -1);

    std::istringstream crlf("a,b\r\n1,2\r\n\r\n3,4\r\n");
    const auto c = io::read_csv(crlf);
    REQUIRE(c.rows.size() == 2);
    CHECK(c.row_lines[1] == 4);

    std::istringstream empty("");
    CHECK_THROWS_AS(io::read_csv(empty), ParseError);
    std::istringstream open("a,b\n\"1,2\n");
    CHECK_THROWS_AS(io::read_csv(open), ParseError);
    std::istringstream ragged("a,b\n1,2\n3\n");
    try {
        io::read_csv(ragged);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("omega table round trip and grids") {
    std::vector<io::OmegaRow> rows;
    CounterRng rng(2, 2);
    const double axis[] = {0.9, 0.99, 0.999};
    for (std::uint64_t s = 0; s < 2; ++s)
        for (double b1 : axis)
            for (double b2 : axis) rows.push_back({b1, b2, s, rng.uniform(), rng.uniform() * 1e-7, 200});
    rows[4].omega1 = std::numeric_limits<double>::quiet_NaN();
    std::stringstream ss;
    io::write_omega_rows(ss, rows);
    const auto back = io::read_omega_rows(ss);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].beta1 == rows[i].beta1);
        CHECK(back[i].beta2 == rows[i].beta2);
        CHECK(back[i].seed == rows[i].seed);
        CHECK(back[i].omega2 == rows[i].omega2);
        CHECK(back[i].window == rows[i].window);
        if (i == 4)
            CHECK(std::isnan(back[i].omega1));
        else
            CHECK(back[i].omega1 == rows[i].omega1);
    }
    const auto grids = io::grids_from_rows(back, OmegaMetric::omega2);
    CHECK(grids.seeds.size() == 2);
    CHECK(grids.grids[1](0, 2) == rows[9 + 2].omega2);

    std::istringstream bare("beta1,beta2,omega\n0.9,0.9,1\n0.9,0.99,2\n0.99,0.9,3\n0.99,0.99,0.5\n");
    const auto single = io::read_omega_rows(bare);
    CHECK(single[3].omega1 == 0.5);
    CHECK(io::grids_from_rows(single, OmegaMetric::omega1).grids.size() == 1);

    std::istringstream missing("beta1,beta2,omega\n0.9,0.9,1\n0.9,0.99,2\n0.99,0.9,3\n");
    const auto partial = io::read_omega_rows(missing);
    CHECK_THROWS_AS(io::grids_from_rows(partial, OmegaMetric::omega1), StructuralError);
    std::istringstream badnum("beta1,beta2,omega\n0.9,0.9,1\n0.9,abc,2\n");
    try {
        io::read_omega_rows(badnum);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream nocol("beta1,omega\n0.9,1\n");
    CHECK_THROWS_AS(io::read_omega_rows(nocol), ParseError);
}

TEST_CASE("run trace round trip") {
    RunTrace t;
    for (std::uint64_t k = 0; k < 5; ++k) {
        t.step.push_back(k);
        t.loss.push_back(1.0 / static_cast<double>(k + 3));
        t.norm_r.push_back(std::sqrt(static_cast<double>(k)));
    }
    std::stringstream ss;
    io::write_run_trace(ss, t);
    const auto back = io::read_run_trace(ss);
    CHECK(back.step == t.step);
    CHECK(back.loss == t.loss);
    CHECK(back.norm_r == t.norm_r);
}

TEST_CASE("flow trace and remainder CSV columns") {
    TimeScales ts;
    const auto g = GradientSignal::uniform(ScalarSignal::constant(1.0), 2);
    const auto tr = integrate_flow(g, ts, FlowState::uniform(2, 1.0, 1.0), 1.0, 0.1);
    std::stringstream ss;
    io::write_flow_trace(ss, tr);
    const auto t = io::read_csv(ss);
    CHECK(t.header == std::vector<std::string>{"t", "m_0", "m_1", "v_0", "v_1", "R_0", "R_1", "norm_R"});
    CHECK(t.rows.size() == tr.samples.size());
    std::vector<RemainderReport> reps(1);
    std::stringstream rs;
    io::write_remainder_reports(rs, reps);
    const auto r = io::read_csv(rs);
    CHECK(r.header == std::vector<std::string>{"channel", "delta0", "remainder", "bound", "fitted_order"});
    CHECK(r.rows.size() == 3);
}

TEST_CASE("manifest hashes and mirrors") {
    const fs::path dir = fs::temp_directory_path() / "scalelab_io_manifest";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(io::sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    io::RunManifest m;
    m.command = "flow";
    m.version = "1";
    m.seeds = {0, 4};
    m.config["tau1"] = "1";
    m.add_file(dir, "abc.txt");
    m.write(dir);
    CHECK(fs::exists(dir / "manifest.json"));
    std::ifstream in(dir / "manifest.txt");
    const auto back = io::read_manifest_text(in);
    CHECK(back.command == "flow");
    CHECK(back.seeds == m.seeds);
    CHECK(back.config == m.config);
    CHECK(back.files == m.files);
    fs::remove_all(dir);
}

TEST_CASE("svg chart") {
    std::ostringstream os;
    const std::vector<io::SvgSeries> s{{"a", {0.0, 1.0, 2.0}, {1.0, 0.5, 0.25}}};
    io::write_svg_chart(os, s, "title", "x", "y");
    CHECK(os.str().find("<svg") == 0);
    CHECK(os.str().find("polyline") != std::string::npos);
}
