#include "qclab/cli.hpp"
#include "qclab/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

using qclab::Json;

const std::string kData = QCLAB_TEST_DATA;

std::string data(const std::string& name) { return kData + "/" + name; }

struct Result {
  int code;
  std::string out;
  std::string err;
  Json report() const { return Json::parse(out); }
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qclab::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qclab_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<std::string> with_workers(std::vector<std::string> args, int w) {
  args.push_back("--workers");
  args.push_back(std::to_string(w));
  return args;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("distributional depth of OR under uniform is zero") {
    const auto r = run({"measure", "dist", "--fn", data("or2.json"), "--dist", data("uniform2.json"), "--eps", "1/3"});
    REQUIRE(r.code == qclab::cli::kOk);
    const auto j = r.report();
    CHECK(j["depth"] == 0);
    CHECK(j["error"] == "1/4");
    CHECK(j["command"] == "measure dist");
    CHECK(j["config"]["eps"] == "1/3");
    CHECK(j.contains("version"));
  }

  TEST_CASE("chi star of the OR pair is 4/3") {
    const auto r = run({"chi", "star", "--fn", data("or2.json"), "--mu0", data("p00.json"), "--mu1", data("u3.json")});
    REQUIRE(r.code == qclab::cli::kOk);
    CHECK(r.report()["value"] == "4/3");
    const auto mix = run({"chi", "star", "--fn", data("xor2.json"), "--dist", data("uniform2.json"), "--table"});
    CHECK(mix.report()["value"] == "2");
    CHECK(mix.report()["dp_table"].size() > 0);
  }

  TEST_CASE("claim32 over 100 instances passes") {
    const auto r = run({"verify", "claim32", "--instances", "100", "--seed", "7", "--tol", "1e-9"});
    CHECK(r.code == qclab::cli::kOk);
    const auto j = r.report();
    CHECK(j["max_discrepancy"] == "0");
    CHECK(j["pass"] == true);
  }

  TEST_CASE("randomized complexity report carries witnesses and gap") {
    const auto j = run({"measure", "rand", "--fn", data("or2.json"), "--eps", "1/3"}).report();
    CHECK(j["depth"] == 1);
    CHECK(j["value"] == "1/3");
    CHECK(j["gap"] == "0");
    CHECK(j["certificate"]["bits"] == 2);
    CHECK(!j["algorithm"].empty());
    CHECK(run({"measure", "detdepth", "--fn", data("xor2.json")}).report()["depth"] == 2);
  }

  TEST_CASE("float mode reports numbers") {
    const auto j = run({"chi", "star", "--fn", data("or2.json"), "--mu0", data("p00.json"), "--mu1", data("u3.json"),
                        "--mode", "float"})
                       .report();
    CHECK(j["value"].get<double>() == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  }

  TEST_CASE("exit codes") {
    using namespace qclab::cli;
    CHECK(run({"--help"}).code == kOk);
    CHECK(run({"frobnicate"}).code == kPrecondition);
    CHECK(run({"measure", "dist", "--fn", data("missing.json"), "--dist", data("uniform2.json")}).code == kPrecondition);
    CHECK(run({"measure", "dist", "--fn", data("or2.json"), "--dist", data("uniform2.json"), "--tol", "0"}).code ==
          kPrecondition);
    CHECK(run({"measure", "dist", "--fn", data("or2.json"), "--dist", data("uniform2.json"), "--mode", "fast"}).code ==
          kPrecondition);
    // Stochastic commands demand a seed.
    CHECK(run({"verify", "claim32", "--instances", "3"}).code == kPrecondition);
    // Width mismatch between function and distribution.
    CHECK(run({"measure", "dist", "--fn", data("id1.json"), "--dist", data("uniform2.json")}).code == kPrecondition);
    const auto fail = run({"verify", "infobound", "--samples", "50", "--seed", "1", "--constant", "1e6"});
    CHECK(fail.code == kVerificationFailed);
    CHECK(fail.report()["status"] == "verification-failed");
    CHECK(run({"verify", "infobound", "--samples", "200", "--seed", "1"}).code == kOk);
    CHECK(run({"verify", "deltasum", "--fn", data("or2.json"), "--dist", data("uniform2.json")}).code == kOk);
  }

  TEST_CASE("reports are byte-identical across worker counts") {
    const std::vector<std::vector<std::string>> commands = {
        {"chi", "search", "--fn", data("or2.json"), "--restarts", "6", "--seed", "11"},
        {"verify", "claim32", "--instances", "20", "--seed", "3"},
        {"verify", "infobound", "--samples", "300", "--seed", "4", "--mode", "float"},
        {"simulate", "q", "--fn", data("xor2.json"), "--mu0", data("xor_mu0.json"), "--mu1", data("xor_mu1.json"),
         "--tree", data("parity4.json"), "--z", "01", "--runs", "500", "--seed", "2"},
        {"compose", "experiment", "--f", data("xor2_rel.json"), "--g", data("xor2.json"), "--mu0", data("xor_mu0.json"),
         "--mu1", data("xor_mu1.json"), "--eta", data("uniform2.json"), "--tree", data("parity4.json"), "--runs", "400",
         "--seed", "8"},
    };
    for (const auto& cmd : commands) {
      CAPTURE(cmd[0] + " " + cmd[1]);
      const auto one = run(with_workers(cmd, 1));
      const auto four = run(with_workers(cmd, 4));
      REQUIRE(one.code == qclab::cli::kOk);
      CHECK(one.out == four.out);
      CHECK(one.out == run(cmd).out);
    }
    ::setenv("QCLAB_WORKERS", "3", 1);
    const auto env = run(commands[1]);
    ::unsetenv("QCLAB_WORKERS");
    CHECK(env.out == run(commands[1]).out);
  }

  TEST_CASE("output file, CSV sidecar and transcripts") {
    const auto report = scratch("sim.json");
    const auto jsonl = scratch("sim.jsonl");
    std::filesystem::remove(scratch("sim.csv"));
    const auto r = run({"simulate", "p", "--fn", data("or2.json"), "--mu0", data("p00.json"), "--mu1", data("u3.json"),
                        "--tree", data("or2_tree.json"), "--z", "1", "--runs", "4000", "--seed", "5", "--output",
                        report.string(), "--transcripts", jsonl.string()});
    REQUIRE(r.code == qclab::cli::kOk);
    CHECK(r.out.empty());
    const auto j = Json::parse(slurp(report));
    CHECK(j["expected_conflict_queries"] == "4/3");
    CHECK(j["within_3se"] == true);
    CHECK(!j["config"].contains("output"));
    const auto csv = slurp(scratch("sim.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4001);
    const auto lines = slurp(jsonl);
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 4000);
    CHECK(Json::parse(lines.substr(0, lines.find('\n')))["run"] == 0);
  }

  TEST_CASE("compose build and diagnostics") {
    const auto b = run({"compose", "build", "--f", data("xor2_rel.json"), "--g", data("xor2.json")}).report();
    CHECK(b["relation"]["n"] == 4);
    CHECK(b["relation"]["outputs"][3] == Json::array({"0"}));
    const auto info = run({"diag", "info", "--fn", data("id1.json"), "--dist", data("uniform1.json")}).report();
    CHECK(info["holds"] == true);
    CHECK(info["literal_holds"] == false);
    CHECK(info["balance"] == "1/4");
    const auto tr = run({"diag", "truncate", "--fn", data("or2.json"), "--dist", data("uniform2.json")}).report();
    CHECK(tr["budget"] == 18);
    CHECK(tr["error"] == "0");
    const auto ds = run({"diag", "deltasum", "--fn", data("or2.json"), "--dist", data("uniform2.json"), "--horizon", "3"})
                        .report();
    CHECK(ds["profile"]["expectation"] == Json::array({"2/3", "1", "1"}));
  }
}
