#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "air/builder.hpp"
#include "air/serialize.hpp"
#include "air/xlsx.hpp"

using namespace air;
namespace fs = std::filesystem;

namespace {

const std::string kSample = std::string(AIR_FIXTURE_DIR) + "/sample.xlsx";

struct Run {
    int status = -1;
    std::string out;
};

/// Runs the CLI through the shell with stderr discarded unless redirected
/// by `args` itself.
Run air_cli(const std::string& args, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(AIR_CLI) + "' " + args;
    if (cmd.find("2>") == std::string::npos) cmd += " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int status = pclose(p);
    r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "air_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
    auto p = scratch(name);
    std::ofstream(p) << text;
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("analyze prints the library listing") {
    auto r = air_cli("analyze '" + kSample + "' --threshold 2");
    CHECK(r.status == 0);
    CHECK(r.out == to_listing(build_graph(load_workbook(kSample), 2)));
    CHECK(r.out.find("FORMULA GROUP: (PXII.Pdd PXII!D2:D30)\n\tRAW GROUP: (PXII.Idd PXII!B2:B30)\n") !=
          std::string::npos);
}

TEST_CASE("threshold comes from the option, then AIR_THRESHOLD, then 0") {
    auto t0 = to_listing(build_graph(load_workbook(kSample), 0));
    auto t2 = to_listing(build_graph(load_workbook(kSample), 2));
    CHECK(air_cli("analyze '" + kSample + "'").out == t0);
    CHECK(air_cli("analyze '" + kSample + "'", "AIR_THRESHOLD=2").out == t2);
    CHECK(air_cli("analyze '" + kSample + "' -t 0", "AIR_THRESHOLD=2").out == t0);
    CHECK(air_cli("analyze '" + kSample + "'", "AIR_THRESHOLD=abc").status == 1);
}

TEST_CASE("json and dot formats match the library") {
    auto g = build_graph(load_workbook(kSample), 2);
    CHECK(air_cli("analyze '" + kSample + "' -t 2 -f json").out == to_json(g));
    CHECK(air_cli("analyze '" + kSample + "' -t 2 -f dot").out == to_dot(g));
    auto out = scratch("graph.json");
    CHECK(air_cli("analyze '" + kSample + "' -t 2 -f json -o '" + out.string() + "'").status == 0);
    CHECK(from_json(read_file(out)) == g);
}

TEST_CASE("show answers group and cell queries") {
    auto r = air_cli("show '" + kSample + "' -t 2 --group Clipper.Ptotal");
    CHECK(r.status == 0);
    CHECK(r.out.rfind("FORMULA GROUP: (Clipper.Ptotal Clipper!H2:H30)\n", 0) == 0);
    CHECK(r.out.find("formula: =SUM(Clipper.Pdd,Clipper.PCS)\n") != std::string::npos);
    CHECK(r.out.find("\tFORMULA GROUP: (Clipper.PCS Clipper!G2:G30)\n") != std::string::npos);

    r = air_cli("show '" + kSample + "' -t 2 --cell Flash!B30");
    CHECK(r.status == 0);
    CHECK(r.out.rfind("RAW GROUP: (Flash.IIO Flash!B2:B30)\n", 0) == 0);
}

TEST_CASE("exit codes") {
    CHECK(air_cli("analyze /nonexistent/file.xlsx").status == 1);
    CHECK(air_cli("analyze '" + write_file("bad.xlsx", "not a zip").string() + "'").status == 1);
    CHECK(air_cli("show '" + kSample + "' --group Nope.Nope").status == 2);
    CHECK(air_cli("show '" + kSample + "' --cell Flash!A1").status == 2);
    CHECK(air_cli("show '" + kSample + "' --cell Nowhere!A1").status == 2);
    CHECK(air_cli("show '" + kSample + "'").status == 2);
    CHECK(air_cli("analyze '" + kSample + "' -f yaml").status == 2);
    CHECK(air_cli("frobnicate").status == 2);
}

TEST_CASE("diagnostics go to stderr") {
    auto r = air_cli("show '" + kSample + "' --group Nope.Nope 2>&1");
    CHECK(r.status == 2);
    CHECK(r.out.find("Nope.Nope") != std::string::npos);
}

TEST_CASE("edit applies a script and saves") {
    auto script = write_file("case.air",
                             "# case-study edits\n"
                             "set Clipper.Ptotal =(Clipper.PCS + PXII.Pdd)*2 * Flash.PM\n"
                             "\n"
                             "add Summary Rdd2 E2:E30 =cos(PXII.Ptotal * Flash.Ptotal)\n"
                             "set Summary.avg =average(Summary.Pavg[1:28])\n"
                             "set Clipper.Pdd =Clipper.Idd * Clipper.Vdd * 2\n");
    auto out = scratch("edited.xlsx");
    fs::remove(out);
    auto r = air_cli("edit '" + kSample + "' -t 2 -s '" + script.string() + "' -o '" + out.string() + "'");
    CHECK(r.status == 0);
    auto m = load_workbook(out);
    CHECK(m.find(parse_cell_address("Clipper!D2"))->formula == std::optional<std::string>("=B2*C2*2"));
    CHECK(m.find(parse_cell_address("Summary!E2"))->formula ==
          std::optional<std::string>("=COS(PXII!K2*Flash!H2)"));
    auto shown = air_cli("show '" + out.string() + "' -t 2 --group Summary.Rdd2");
    CHECK(shown.status == 0);
    CHECK(shown.out.rfind("FORMULA GROUP: (Summary.Rdd2 Summary!E2:E30)\n", 0) == 0);
}

TEST_CASE("an empty script reproduces the input model") {
    auto script = write_file("empty.air", "# nothing\n\n");
    auto out = scratch("same.xlsx");
    CHECK(air_cli("edit '" + kSample + "' -s '" + script.string() + "' -o '" + out.string() + "'").status == 0);
    CHECK(load_workbook(out) == load_workbook(kSample));
}

TEST_CASE("a failing script line aborts with its number and writes nothing") {
    auto script = write_file("bad.air",
                             "set Clipper.Pdd =Clipper.Idd * Clipper.Vdd * 2\n"
                             "# comment\n"
                             "set Clipper.Idd =1\n");
    auto out = scratch("never.xlsx");
    fs::remove(out);
    auto r = air_cli("edit '" + kSample + "' -t 2 -s '" + script.string() + "' -o '" + out.string() + "' 2>&1");
    CHECK(r.status == 2);
    CHECK(r.out.find("line 3:") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    script = write_file("unknown.air", "frob Clipper.Pdd =1\n");
    r = air_cli("edit '" + kSample + "' -s '" + script.string() + "' -o '" + out.string() + "' 2>&1");
    CHECK(r.status == 2);
    CHECK(r.out.find("line 1: unknown command 'frob'") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    CHECK(air_cli("edit '" + kSample + "' -s /nonexistent.air -o '" + out.string() + "'").status == 1);
}
