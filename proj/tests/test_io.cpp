#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "ucbsde/io.hpp"

using namespace ucbsde;
namespace fs = std::filesystem;

namespace {
std::size_t count(std::string const& text, std::string const& needle)
{
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
        ++n;
    return n;
}

std::string svg_of(SweepTable const& t)
{
    std::ostringstream os;
    emit_svg(os, t);
    return os.str();
}

SweepTable random_table(SplitMix64& gen)
{
    NormalStream noise(gen());
    SweepTable t;
    t.metadata = {{"experiment", "sweep-c2"}, {"x", "c2"}, {"seed", std::to_string(gen())}};
    long rows = static_cast<long>(gen() % 30);
    for (long i = 0; i < rows; ++i)
    {
        SweepRow row;
        row.x = noise() * 10;
        row.method = "method" + std::to_string(gen() % 3);
        row.mean = noise() * std::pow(10.0, static_cast<double>(gen() % 40) - 20);
        if (gen() % 4)
            row.std_error = std::abs(noise()) / 3;
        row.reps = 1 + static_cast<long>(gen() % 100000);
        t.rows.push_back(row);
    }
    return t;
}
}  // namespace

TEST_CASE("CSV round trip preserves every field", "[io][property]")
{
    SplitMix64 gen(10);
    for (int trial = 0; trial < 200; ++trial)
    {
        auto t = random_table(gen);
        std::stringstream ss;
        write_csv(ss, t);
        CHECK(read_csv(ss) == t);
    }
}

TEST_CASE("CSV layout", "[io]")
{
    SweepTable t;
    t.metadata = {{"x", "N"}, {"seed", "1"}};
    t.rows.push_back({45, "discrete@c2=3.6", 0.1, std::nullopt, 1});
    std::ostringstream os;
    write_csv(os, t);
    CHECK(os.str()
          == "# x=N\n# seed=1\nx,method,mean,stderr,reps\n"
             "45,discrete@c2=3.6,0.10000000000000001,,1\n");
}

TEST_CASE("empty table writes only the header", "[io]")
{
    SweepTable t;
    std::stringstream ss;
    write_csv(ss, t);
    CHECK(ss.str() == "x,method,mean,stderr,reps\n");
    CHECK(read_csv(ss) == t);
}

TEST_CASE("malformed CSV is rejected with a line number", "[io]")
{
    auto parse = [](std::string const& text) {
        std::istringstream is(text);
        return read_csv(is, "t.csv");
    };
    std::string const head = "# x=c2\nx,method,mean,stderr,reps\n";
    CHECK_THROWS_WITH(parse(head + "1,m,nan,0.1,10\n"), Catch::Matchers::ContainsSubstring("t.csv:3"));
    CHECK_THROWS_AS(parse(head + "1,m,NaN,0.1,10\n"), ParseError);
    CHECK_THROWS_AS(parse(head + "1,m,inf,0.1,10\n"), ParseError);
    CHECK_THROWS_AS(parse(head + "1,m,0.5,-0.1,10\n"), ParseError);
    CHECK_THROWS_AS(parse(head + "1,m,0.5,0.1,0\n"), ParseError);
    CHECK_THROWS_AS(parse(head + "1,m,0.5,0.1\n"), ParseError);
    CHECK_THROWS_AS(parse(head + "1,,0.5,0.1,3\n"), ParseError);
    CHECK_THROWS_AS(parse(head + "x1,m,0.5,0.1,3\n"), ParseError);
    CHECK_THROWS_AS(parse("x,method,mean\n"), ParseError);
    CHECK_THROWS_AS(parse("# no equals sign\nx,method,mean,stderr,reps\n"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("unwritable labels are refused", "[io]")
{
    SweepTable t;
    t.rows.push_back({1, "a,b", 0.1, 0.0, 2});
    std::ostringstream os;
    CHECK_THROWS_AS(write_csv(os, t), std::invalid_argument);
}

TEST_CASE("file I/O failures name the path", "[io]")
{
    CHECK_THROWS_WITH(read_csv(std::string("/nonexistent/dir/in.csv")),
                      Catch::Matchers::ContainsSubstring("/nonexistent/dir/in.csv"));
    CHECK_THROWS_WITH(write_csv(SweepTable{}, "/nonexistent/dir/out.csv"),
                      Catch::Matchers::ContainsSubstring("/nonexistent/dir/out.csv"));

    auto path = fs::temp_directory_path() / "ucbsde_io_test.csv";
    SweepTable t;
    t.metadata = {{"x", "c2"}};
    t.rows.push_back({0.2, "limit@h=1e-3", 0.123456789012345678, 0.001, 10000});
    write_csv(t, path.string());
    CHECK(read_csv(path.string()) == t);
    fs::remove(path);
}

TEST_CASE("SVG has one polyline and legend entry per method", "[io]")
{
    SweepTable one;
    one.metadata = {{"x", "c2"}};
    one.rows = {{0, "a", 0.1, 0.0, 1}, {1, "a", 0.5, 0.0, 1}};
    auto s1 = svg_of(one);
    CHECK(count(s1, "<polyline") == 1);
    auto pts_begin = s1.find("points=\"");
    auto pts = s1.substr(pts_begin + 8, s1.find('"', pts_begin + 8) - pts_begin - 8);
    CHECK(count(pts, ",") == 2);
    CHECK(s1.find(">c2</text>") != std::string::npos);
    CHECK(s1.find(">normalized regret</text>") != std::string::npos);

    SweepTable four;
    four.metadata = {{"x", "c2"}};
    for (auto m : {"discrete@N=200", "discrete@N=400", "limit@h=1e-3", "limit@h=5e-4"})
        for (double x : {0.0, 1.0, 2.0})
            four.rows.push_back({x, m, x * 0.1, 0.01, 10});
    auto s4 = svg_of(four);
    CHECK(count(s4, "<polyline") == 4);
    auto legend = s4.substr(s4.find("class=\"legend\""));
    CHECK(count(legend, "<text") == 4);
    for (auto m : {"discrete@N=200", "discrete@N=400", "limit@h=1e-3", "limit@h=5e-4"})
        CHECK(legend.find(m) != std::string::npos);

    CHECK(svg_of(four) == s4);
    CHECK_THROWS_AS(svg_of(SweepTable{}), std::domain_error);
}

TEST_CASE("SVG escapes labels", "[io]")
{
    SweepTable t;
    t.rows = {{0, "a<b&c", 0.1, 0.0, 1}, {1, "a<b&c", 0.2, 0.0, 1}};
    auto s = svg_of(t);
    CHECK(s.find("a&lt;b&amp;c") != std::string::npos);
    CHECK(s.find("a<b") == std::string::npos);
}
