#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "coex/cli.hpp"
#include "support/test_util.hpp"

using namespace coex;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string spec(const char* name) { return testutil::data_path(std::string("specs/") + name); }

fs::path fresh_dir(const char* tag) {
    fs::path dir = fs::temp_directory_path() / (std::string("coex_cli_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("derive writes the four canonical files") {
    fs::path out = fresh_dir("derive");
    auto result = run_cli({"derive", "--spec", spec("v1_sel4.dl"), "--out", out.string()});
    CHECK(result.code == 0);
    for (const char* name : {"get.dl", "putdelta_prime.dl", "undef.dl", "get_prime.dl"}) {
        CAPTURE(name);
        CHECK(testutil::read_file((out / name).string()) ==
              testutil::read_file(testutil::data_path(std::string("golden/") + name)));
    }
}

TEST_CASE("derive on the identity spec leaves undef without rules") {
    fs::path out = fresh_dir("derive_id");
    auto result = run_cli({"derive", "--spec", spec("identity.dl"), "--out", out.string()});
    CHECK(result.code == 0);
    std::string undef = testutil::read_file((out / "undef.dl").string());
    CHECK(undef.find(":-") == std::string::npos);
    CHECK(undef.find("v_ud") != std::string::npos);
}

TEST_CASE("derive reports fragment violations as step 1 failures") {
    fs::path out = fresh_dir("derive_bad");
    auto result = run_cli({"derive", "--spec", spec("join_shaped.dl"), "--out", out.string()});
    CHECK(result.code == 1);
    CHECK(result.err.find("fragment violation") != std::string::npos);
    CHECK(result.err.find("step 1") != std::string::npos);
}

TEST_CASE("verify passes the worked example and prints one line per law") {
    auto result = run_cli({"verify", "--spec", spec("v1_sel4.dl"), "--max", "8", "--max-size", "2"});
    CHECK(result.code == 0);
    CHECK(result.out.find("GetPut: pass") != std::string::npos);
    CHECK(result.out.find("PutGet: pass") != std::string::npos);
    CHECK(result.out.find("Totality: pass") != std::string::npos);
}

TEST_CASE("verify fails against a corrupted get file") {
    fs::path dir = fresh_dir("verify_corrupt");
    fs::path corrupt = dir / "get.dl";
    {
        std::ofstream file(corrupt);
        file << "source s/1.\nview v1/1.\nv1(X) :- s(X), 5 < X.\n";
    }
    auto result = run_cli({"verify", "--spec", spec("v1_sel4.dl"), "--get", corrupt.string(),
                           "--max", "8", "--max-size", "2"});
    CHECK(result.code == 1);
    CHECK(result.out.find("FAIL") != std::string::npos);
    CHECK(result.out.find("given:") != std::string::npos);
}

TEST_CASE("verify of an empty spec passes vacuously with a warning") {
    auto result = run_cli({"verify", "--spec", spec("empty.dl")});
    CHECK(result.code == 0);
    CHECK(result.err.find("warning") != std::string::npos);
    CHECK(result.out.find("0 cases") != std::string::npos);
}

TEST_CASE("verify writes the machine-readable report") {
    fs::path dir = fresh_dir("verify_json");
    fs::path json = dir / "report.json";
    auto result = run_cli({"verify", "--spec", spec("v1_sel4.dl"), "--max", "6", "--max-size",
                           "1", "--json", json.string()});
    CHECK(result.code == 0);
    std::string text = testutil::read_file(json.string());
    CHECK(text.find("\"law\": \"GetPut\"") != std::string::npos);
    CHECK(text.find("\"outcome\": \"pass\"") != std::string::npos);
    CHECK(text.find("\"cases\"") != std::string::npos);
}

TEST_CASE("simulate replays the scenario scripts") {
    auto result =
        run_cli({"simulate", "--script", testutil::data_path("scripts/fig2b.cosx")});
    CHECK(result.code == 0);
    CHECK(result.out.find("[physical]") != std::string::npos);

    auto bad = run_cli({"simulate", "--script", testutil::data_path("scripts/fig2e_bad.cosx")});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("--- expected") != std::string::npos);
}

TEST_CASE("simulate propagates script errors with line numbers") {
    fs::path dir = fresh_dir("sim_err");
    fs::path script = dir / "bad.cosx";
    {
        std::ofstream file(script);
        file << "register ver1\nbogus command\n";
    }
    auto result = run_cli({"simulate", "--script", script.string()});
    CHECK(result.code == 1);
    CHECK(result.err.find("line 2") != std::string::npos);

    auto missing = run_cli({"simulate", "--script", (dir / "nosuch.cosx").string()});
    CHECK(missing.code == 2);
}

TEST_CASE("an empty script exits zero with no output") {
    fs::path dir = fresh_dir("sim_empty");
    fs::path script = dir / "empty.cosx";
    { std::ofstream file(script); }
    auto result = run_cli({"simulate", "--script", script.string()});
    CHECK(result.code == 0);
    CHECK(result.out.empty());
}

TEST_CASE("emit-sql matches the committed snapshots byte for byte") {
    fs::path out = fresh_dir("sql");
    auto result = run_cli({"emit-sql", "--spec", spec("v1_sel4.dl"), "--out", out.string()});
    CHECK(result.code == 0);
    for (const char* name : {"v1.view.sql", "v1.triggers.sql"}) {
        CAPTURE(name);
        CHECK(testutil::read_file((out / name).string()) ==
              testutil::read_file(testutil::data_path(std::string("sql/") + name)));
    }
    // Re-running produces identical bytes.
    auto again = run_cli({"emit-sql", "--spec", spec("v1_sel4.dl"), "--out", out.string()});
    CHECK(again.code == 0);
    CHECK(testutil::read_file((out / "v1.view.sql").string()) ==
          testutil::read_file(testutil::data_path("sql/v1.view.sql")));
}

TEST_CASE("verify handles string key columns and sampled mode") {
    auto keyed = run_cli({"verify", "--spec", spec("v1_sel4_pk.dl"), "--strings", "a,b", "--max",
                          "6", "--max-size", "1"});
    CHECK(keyed.code == 0);
    CHECK(keyed.out.find("Totality: pass") != std::string::npos);

    auto sampled = run_cli({"verify", "--spec", spec("v1_sel4.dl"), "--mode", "sampled",
                            "--samples", "200", "--seed", "7"});
    CHECK(sampled.code == 0);

    auto sampled_bad = run_cli({"verify", "--spec", spec("v1_sel4_weak.dl"), "--mode", "sampled",
                                "--samples", "200", "--seed", "7"});
    CHECK(sampled_bad.code == 1);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"derive"}).code == 2);                       // missing --spec
    CHECK(run_cli({"derive", "--spec", "/nonexistent.dl"}).code == 2);
    CHECK(run_cli({}).code == 2);
}
