#include "cli.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gribov::cli;
namespace fs = std::filesystem;

namespace {

struct Scratch
{
    fs::path dir;
    Scratch()
    {
        dir = fs::temp_directory_path() / ("gribov_cli_" + std::to_string(std::rand()));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }

    std::string write(const std::string& name, const std::string& text) const
    {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    }
    std::string read(const std::string& name) const
    {
        std::stringstream ss;
        ss << std::ifstream(dir / name).rdbuf();
        return ss.str();
    }
};

int invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "gribov_lab");
    std::vector<char*> argv;
    for (std::string& a : args)
        argv.push_back(a.data());
    return main_entry(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, sep);)
        out.push_back(cell);
    return out;
}

} // namespace

TEST_CASE("trace-formula at zero coupling closes exactly")
{
    Scratch s;
    const std::string cfg =
        s.write("a.json", R"({"command":"trace-formula","params":{"lambda":0},"grids":{"n_min":4,"n_max":8}})");
    const std::string out = (s.dir / "a.csv").string();
    REQUIRE(invoke({"--config", cfg, "--out", out}) == 0);
    std::stringstream ss(s.read("a.csv"));
    std::string line;
    std::getline(ss, line);
    const std::vector<std::string> header = split(line, ',');
    REQUIRE(header.size() == 16);
    CHECK(header.front() == "n");
    CHECK(header[7] == "gap");
    CHECK(header.back() == "valid");
    int rows = 0;
    while (std::getline(ss, line)) {
        const std::vector<std::string> cells = split(line, ',');
        REQUIRE(cells.size() == 16);
        CHECK(std::stod(cells[7]) < 1e-12);
        CHECK(cells[15] == "true");
        ++rows;
    }
    CHECK(rows == 5);
}

TEST_CASE("config errors exit 1 and name every field")
{
    Scratch s;
    const std::string bad = s.write(
        "bad.json", R"({"command":"semigroup","grids":{"report":"schatten","p":[-1],"extra":2},"colour":1})");
    CHECK(invoke({"--config", bad}) == 1);
    try {
        load_config(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string all = e.what();
        CHECK(all.find("grids.p[0]") != std::string::npos);
        CHECK(all.find("grids.extra") != std::string::npos);
        CHECK(all.find("colour") != std::string::npos);
        CHECK(e.errors().size() == 3);
    }
    // keys that belong to another command are rejected too
    CHECK_THROWS_AS(parse_config(R"({"command":"trotter","grids":{"nodes":64}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"command":"nope"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"params":{}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"command":"spectrum","trunc":{"dim":2}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"command":"trace-formula","trunc":{"dim":40},"grids":{"n_max":12}})"),
                    ConfigError);
    CHECK(invoke({"--config", (s.dir / "missing.json").string()}) == 1);
}

TEST_CASE("hypothesis guards exit 1")
{
    Scratch s;
    const std::string cfg = s.write(
        "acc.json", R"({"command":"diagnostics","params":{"mu":-1},"trunc":{"offset":1},"grids":{"check":"accretivity"}})");
    CHECK(invoke({"--config", cfg, "--out", (s.dir / "acc.csv").string()}) == 1);
}

TEST_CASE("flags override config and output is deterministic")
{
    Scratch s;
    const std::string cfg = s.write(
        "b.json",
        R"({"command":"diagnostics","seed":1,"grids":{"check":"relative-bound","epsilon":[1],"dims":[12,24],"samples":300,"starts":4}})");
    const std::string o1 = (s.dir / "1.csv").string(), o2 = (s.dir / "2.csv").string();
    REQUIRE(invoke({"--config", cfg, "--out", o1, "--threads", "2", "--seed", "99"}) == 0);
    REQUIRE(invoke({"--config", cfg, "--out", o2, "--threads", "1", "--seed", "99"}) == 0);
    CHECK(s.read("1.csv") == s.read("2.csv"));

    const std::string oj = (s.dir / "b.json.out").string();
    REQUIRE(invoke({"--config", cfg, "--out", oj, "--format", "json", "--seed", "99"}) == 0);
    const nlohmann::json doc = nlohmann::json::parse(s.read("b.json.out"));
    CHECK(doc["command"] == "diagnostics");
    CHECK(doc["rows"].size() == 2);
    CHECK(doc["meta"]["seed"] == 99);
    CHECK(doc["any_invalid"] == false);
    CHECK(doc["rows"][1]["stabilized"] == true);
}

TEST_CASE("JSON output round-trips through a parser")
{
    RunConfig c = parse_config(R"({"command":"semigroup","trunc":{"dim":16},"grids":{"report":"schatten","t":[0.5],"p":[1,2]}})");
    const Report r = run(c);
    REQUIRE(r.rows.size() == 2);
    const nlohmann::json doc = nlohmann::json::parse(emit(r, Format::json));
    CHECK(doc["columns"].size() == 3);
    CHECK(doc["rows"][0]["norm"].get<double>() == std::get<double>(r.rows[0][2]));
    CHECK(doc["meta"]["report"] == "schatten");
}

TEST_CASE("non-finite cells")
{
    Report r;
    r.command = "spectrum";
    r.columns = {"x"};
    r.rows = {{std::numeric_limits<double>::quiet_NaN()}, {std::numeric_limits<double>::infinity()}};
    CHECK(emit(r, Format::csv) == "x\nnan\ninf\n");
    const nlohmann::json doc = nlohmann::json::parse(emit(r, Format::json));
    CHECK(doc["rows"][0]["x"].is_null());
}

TEST_CASE("every command runs on a small grid")
{
    for (const char* text :
         {R"({"command":"spectrum","trunc":{"dim":12},"grids":{"count":5}})",
          R"({"command":"semigroup","trunc":{"dim":12},"grids":{"report":"asymptotics"}})",
          R"({"command":"semigroup","trunc":{"dim":12},"grids":{"report":"i2","t":[0.01]}})",
          R"({"command":"semigroup","trunc":{"dim":12},"grids":{"report":"dyson","t":[0.1],"order":3}})",
          R"({"command":"trotter","trunc":{"dim":12},"grids":{"t":[1],"steps":[2,4]}})",
          R"({"command":"diagnostics","grids":{"check":"subordination","dims":[10,20]}})",
          R"({"command":"diagnostics","trunc":{"dim":64},"grids":{"check":"carleman","window":[8,32]}})",
          R"({"command":"diagnostics","grids":{"check":"small-t","t":[0.001,0.01]}})"}) {
        CAPTURE(text);
        const Report r = run(parse_config(text));
        CHECK(!r.rows.empty());
        for (const auto& row : r.rows)
            CHECK(row.size() == r.columns.size());
        CHECK(!r.any_invalid);
    }
}
