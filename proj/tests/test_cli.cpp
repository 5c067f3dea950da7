#include <doctest.h>

#include <fstream>
#include <sstream>

#include "mcensus/cli.hpp"
#include "mcensus/json_io.hpp"

using namespace mcensus;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int const code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

Json run_json(std::vector<std::string> args) {
  auto const r = run_cli(std::move(args));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return Json::parse(r.out);
}

// Timing is the one field allowed to vary between runs.
Json masked(Json j) {
  if (j.is_object() && j.contains("ms")) j["ms"] = 0;
  return j;
}

std::string golden_path(std::string const& name) { return std::string(MCENSUS_GOLDEN_DIR) + "/" + name + ".json"; }

void check_golden(std::string const& name, std::vector<std::string> args, int want_code = 0) {
  auto const r = run_cli(std::move(args));
  CHECK(r.code == want_code);
  auto const got = masked(Json::parse(r.out));
  if (std::getenv("MCENSUS_UPDATE_GOLDEN")) {
    std::ofstream(golden_path(name)) << got.dump(2) << '\n';
    return;
  }
  std::ifstream in(golden_path(name));
  REQUIRE_MESSAGE(in.good(), "missing golden file " << golden_path(name));
  auto const want = Json::parse(in);
  CHECK_MESSAGE(got == want, name << ":\n" << got.dump(2));
}

}  // namespace

TEST_CASE("documented command lines") {
  auto const q2 = run_json({"count-extensions", "--local-degree", "1", "--p", "2", "--q", "2", "--target", "4"});
  CHECK(q2["nu"] == "16");

  auto const b = run_json(
      {"count-epi", "--model", "preset", "--name", "borromean", "--p", "2", "--target", "4", "--method", "oracle"});
  CHECK(b["epi"] == "3072");
  CHECK(b["nu"] == "8");

  auto const r = run_json({"count-epi", "--model", "preset", "--name", "ram01", "--p", "2", "--target", "4"});
  CHECK(r["nu"] == "224");
}

TEST_CASE("formula and oracle agree through the command line") {
  for (std::vector<std::string> model : {std::vector<std::string>{"--model", "demushkin", "--d", "3", "--q", "2"},
                                         {"--model", "demushkin", "--d", "3", "--q", "2", "--f", "2"},
                                         {"--model", "free", "--d", "2", "--p", "3"},
                                         {"--model", "preset", "--name", "borromean"}}) {
    for (std::string target : {"2", "3", "4"}) {
      if (model[1] == "free" && target == "4") continue;
      auto args = model;
      args.insert(args.begin(), "count-epi");
      args.insert(args.end(), {"--target", target});
      auto formula = args, oracle = args;
      formula.insert(formula.end(), {"--method", "formula"});
      oracle.insert(oracle.end(), {"--method", "oracle"});
      auto const f = run_json(formula);
      auto const o = run_json(oracle);
      CHECK(f["epi"] == o["epi"]);
      CHECK(f["nu"] == o["nu"]);
    }
  }
}

TEST_CASE("exit codes") {
  CHECK(run_cli({}).code == cli::kValidation);
  CHECK(run_cli({"no-such-command"}).code == cli::kValidation);
  CHECK(run_cli({"count-epi", "--model", "demushkin", "--d", "3", "--p", "3", "--q", "3"}).code == cli::kValidation);
  CHECK(run_cli({"count-epi", "--model", "preset", "--name", "missing"}).code == cli::kValidation);
  CHECK(run_cli({"count-epi", "--model", "free", "--d", "6", "--method", "oracle", "--budget", "100"}).code ==
        cli::kBudget);
  CHECK(run_cli({"count-epi", "--model", "free", "--d", "3", "--target", "7"}).code == cli::kValidation);
  CHECK(run_cli({"count-epi", "--help"}).code == cli::kOk);
}

TEST_CASE("errors are machine-readable with --json") {
  auto const r = run_cli({"count-epi", "--model", "demushkin", "--d", "3", "--p", "3", "--q", "3", "--json"});
  CHECK(r.code == cli::kValidation);
  auto const j = Json::parse(r.out);
  CHECK(j.contains("error"));
  CHECK(j["kind"] == "validation");

  auto const b = run_cli({"count-epi", "--model", "free", "--d", "6", "--method", "oracle", "--budget", "100", "--json"});
  CHECK(b.code == cli::kBudget);
  CHECK(Json::parse(b.out)["state_space"] == "68719476736");
}

TEST_CASE("CSV output") {
  auto const r = run_cli({"count-epi", "--model", "preset", "--name", "ram01", "--csv"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("model,p,target,method,tmp,epi,nu,ms\nram01,2,4,formula,168,86016,224,", 0) == 0);
}

TEST_CASE("massey, tmp and z1 subcommands") {
  auto const m = run_json({"massey", "--model", "preset", "--name", "counterexample1", "--chars",
                           "1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1"});
  CHECK(m["defined"] == false);
  CHECK(m["cups_vanish"] == true);
  CHECK(run_cli({"massey", "--model", "preset", "--name", "counterexample1", "--chars", "1,0;0,1"}).code ==
        cli::kValidation);

  auto const k = run_json({"massey", "--model", "demushkin", "--d", "3", "--q", "2", "--k", "3"});
  CHECK(k["failures"].empty());

  auto const t = run_json({"tmp", "--model", "preset", "--name", "borromean", "--list"});
  CHECK(t["tmp"] == "6");
  CHECK(t["triples"].size() == 6);

  auto const z = run_json({"z1", "--model", "free", "--d", "3", "--class", "any"});
  CHECK(z["z1"] == "512");
}

TEST_CASE("configuration files") {
  std::string const path = "mcensus_cli_test.conf";
  std::ofstream(path) << "# small budget\nbudget = 10\nthreads = 2\n";
  CHECK(run_cli({"count-epi", "--model", "free", "--d", "3", "--method", "oracle", "--config", path}).code ==
        cli::kBudget);
  std::ofstream(path) << "colour = blue\n";
  CHECK(run_cli({"count-epi", "--model", "free", "--d", "3", "--config", path}).code == cli::kValidation);
  std::remove(path.c_str());
}

TEST_CASE("file inputs") {
  std::string const pres = "mcensus_cli_pres.json";
  std::ofstream(pres) << R"({"rank": 3, "name": "onerel",
    "relators": [["prod", ["pow", ["gen", 1], 2], ["comm", ["gen", 2], ["gen", 3]]]]})";
  auto const o = run_json({"count-epi", "--model", "file", "--file", pres, "--method", "oracle"});
  CHECK(o["epi"] == "6144");
  CHECK(run_cli({"count-epi", "--model", "file", "--file", pres}).code == cli::kValidation);
  std::remove(pres.c_str());

  std::string const redei = "mcensus_cli_redei.json";
  std::ofstream(redei) << R"({"primes": [5, 13, 17], "symbols": [{"triple": [1, 2, 3], "value": -1}], "default": 1})";
  auto const r = run_json({"tmp", "--model", "file", "--file", redei});
  CHECK(r.contains("tmp"));
  std::remove(redei.c_str());
}

TEST_CASE("golden JSON outputs") {
  check_golden("local_q2", {"count-extensions", "--local-degree", "1", "--p", "2", "--q", "2", "--target", "4"});
  check_golden("borromean_oracle", {"count-epi", "--model", "preset", "--name", "borromean", "--method", "oracle"});
  check_golden("df_tmp_sum", {"count-epi", "--model", "df", "--d", "3", "--q", "2", "--e", "1", "--method", "tmp-sum"});
  check_golden("d2_tmp_list", {"tmp", "--model", "demushkin", "--d", "3", "--q", "2", "--f", "2", "--list"});
  check_golden("error_d1_odd", {"count-epi", "--model", "demushkin", "--d", "3", "--p", "3", "--q", "3", "--json"},
               cli::kValidation);
}
