// Copyright 2026 The forkcore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace forkcore;
using namespace forkcore::testing;

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("forkcore-tests-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out);
  out << text;
}

CliResult run_cli(const std::string& args, const std::string& stdin_text = "",
                  const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path dir = scratch_dir();
  const fs::path in = dir / ("stdin-" + std::to_string(counter));
  const fs::path out = dir / ("stdout-" + std::to_string(counter));
  const fs::path err = dir / ("stderr-" + std::to_string(counter));
  ++counter;
  spill(in, stdin_text);
  const std::string command = env_prefix + std::string(FORKCORE_CLI_PATH) + " " + args + " < " +
                              in.string() + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

fs::path write_profile(const std::string& name, const Profile& profile) {
  const fs::path path = scratch_dir() / name;
  spill(path, profile_to_json(profile).dump(2) + "\n");
  return path;
}

}  // namespace

TEST_CASE("profile documents round-trip through JSON") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const int n = 1 + static_cast<int>(seed % 6);
    const int m = 2 + static_cast<int>(seed % 3);
    const Profile p = random_profile(seed * 733, n, m);
    const Profile back = profile_from_json(profile_to_json(p));
    CHECK(back.alternatives() == p.alternatives());
    for (int agent = 0; agent < n; ++agent) CHECK(back.order(agent) == p.order(agent));
  }
}

TEST_CASE("assignment documents round-trip through JSON") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int n = 1 + static_cast<int>(seed % 6);
    const Profile p = random_profile(seed * 197, n);
    const Assignment f = random_placement(p, seed);
    CHECK(assignment_from_json(assignment_to_json(f, p), p) == f);
  }
}

TEST_CASE("profile parser accepts the documented shapes") {
  const auto doc = parse_json_text(R"({
    "n": 2, "alternatives": ["A","B"],
    "agents": [{"id": 1, "threshold": {"preferred": "B", "j": 1}},
               {"id": 0, "ranking": [["A",2],["A",1],["B",2],["B",1]]}]
  })", "fixture");
  const Profile p = profile_from_json(doc);
  CHECK(p.order(0) == order_from_letters("AABB", 2));
  CHECK(p.order(1) == expand_threshold({1, 1}, 2));
}

TEST_CASE("profile parser rejects malformed documents") {
  auto rejects = [](const std::string& text, const std::string& needle) {
    try {
      profile_from_json(parse_json_text(text, "fixture"));
      FAIL("expected a validation error for: " << text);
    } catch (const validation_error& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  rejects(R"({"n": 2, "alternatives": ["A","B"], "agents": []})", "expected n");
  rejects(R"({"n": 1, "alternatives": ["A","B"],
              "agents": [{"id": 0, "ranking": [["A",1],["B",1]],
                          "threshold": {"preferred": "A", "j": 1}}]})",
          "exactly one");
  rejects(R"({"n": 2, "alternatives": ["A","B"],
              "agents": [{"id": 0, "ranking": [["A",2],["A",1],["B",2],["B",1]]},
                         {"id": 0, "ranking": [["A",2],["A",1],["B",2],["B",1]]}]})",
          "duplicate agent id");
  rejects(R"({"n": 1, "alternatives": ["A","B"],
              "agents": [{"id": 0, "ranking": [["A",1],["C",1]]}]})",
          "unknown alternative");
  rejects(R"({"n": 2, "alternatives": ["A","B"],
              "agents": [{"id": 0, "ranking": [["A",1],["A",2],["B",2],["B",1]]},
                         {"id": 1, "ranking": [["A",2],["A",1],["B",2],["B",1]]}]})",
          "monotonicity");
}

TEST_CASE("cli: solve, unique, stable-enum, check and classify on fixtures") {
  const fs::path stable = write_profile("stable.json", forked_pair());
  const fs::path nonfork = write_profile("nonfork.json", cohesive_pair());

  const CliResult ra = run_cli("solve --input " + stable.string() + " --rule RA");
  REQUIRE(ra.exit_code == 0);
  const ojson ra_doc = parse_json_text(ra.out, "solve output");
  CHECK(ra_doc["placement"]["0"] == "A");
  CHECK(ra_doc["placement"]["1"] == "B");
  CHECK(ra_doc["sizes"]["A"] == 1);

  const CliResult rb = run_cli("solve --input " + stable.string() + " --rule RB");
  REQUIRE(rb.exit_code == 0);
  CHECK(parse_json_text(rb.out, "solve output") == ra_doc);

  const fs::path trace_path = scratch_dir() / "trace.json";
  const CliResult traced =
      run_cli("solve --input " + stable.string() + " --trace " + trace_path.string());
  REQUIRE(traced.exit_code == 0);
  const ojson trace = parse_json_text(slurp(trace_path), "trace");
  CHECK(trace["rule"] == "RA");
  CHECK(trace["iterations"].size() == 1);
  CHECK(trace["iterations"][0]["k"] == 1);

  const CliResult unique = run_cli("unique --input " + stable.string());
  REQUIRE(unique.exit_code == 0);
  CHECK(parse_json_text(unique.out, "unique")["unique"] == true);
  CHECK(parse_json_text(run_cli("unique --input " + nonfork.string()).out, "unique")["unique"] ==
        false);

  const CliResult enumerated = run_cli("stable-enum --input " + nonfork.string());
  REQUIRE(enumerated.exit_code == 0);
  const ojson enum_doc = parse_json_text(enumerated.out, "stable-enum");
  CHECK(enum_doc["count"] == 2);
  CHECK(enum_doc["stable"][0]["placement"]["0"] == "A");
  CHECK(enum_doc["stable"][1]["placement"]["0"] == "B");

  // The solve output feeds straight back into check.
  const fs::path assignment_path = scratch_dir() / "assignment.json";
  spill(assignment_path, ra.out);
  const CliResult check_ok = run_cli("check --input " + stable.string() + " --assignment " +
                                     assignment_path.string());
  REQUIRE(check_ok.exit_code == 0);
  CHECK(parse_json_text(check_ok.out, "check")["stable"] == true);

  const fs::path forked_assignment = scratch_dir() / "forked.json";
  spill(forked_assignment, R"({"placement": {"0": "A", "1": "B"}})");
  const CliResult check_bad = run_cli("check --input " + nonfork.string() + " --assignment " +
                                      forked_assignment.string());
  REQUIRE(check_bad.exit_code == 0);
  const ojson bad_doc = parse_json_text(check_bad.out, "check");
  CHECK(bad_doc["stable"] == false);
  CHECK(bad_doc["witness"]["target"] == "A");
  CHECK(bad_doc["witness"]["target_size"] == 2);
  CHECK(bad_doc["witness"]["movers"] == ojson::array({1}));

  const CliResult classified = run_cli("classify --input " + nonfork.string());
  REQUIRE(classified.exit_code == 0);
  const ojson cls = parse_json_text(classified.out, "classify");
  CHECK(cls["profile"]["cohesive"] == true);
  CHECK(cls["profile"]["tag"] == "minimally-interleaving");
  CHECK(cls["profile"]["ra_rb_agree"] == false);
  CHECK(cls["agents"][0]["degree"] == 1);
}

TEST_CASE("cli: generate, manipulate, solve-multi, witness-no-stable and audit") {
  const fs::path generated = scratch_dir() / "generated.json";
  const CliResult gen = run_cli("generate --n 4 --m 2 --class non-critically-interleaving "
                                "--seed 11 --out " + generated.string());
  REQUIRE(gen.exit_code == 0);
  const Profile gen_profile = load_profile_file(generated.string());
  CHECK(gen_profile.n() == 4);
  for (int agent = 0; agent < 4; ++agent) CHECK(classify_order(gen_profile.order(agent)).nci);

  // Identical invocations produce byte-identical output.
  const CliResult gen_a = run_cli("generate --n 3 --class k-interleaving:1 --seed 5");
  const CliResult gen_b = run_cli("generate --n 3 --class k-interleaving:1 --seed 5");
  REQUIRE(gen_a.exit_code == 0);
  CHECK(gen_a.out == gen_b.out);

  const fs::path nonfork = write_profile("nonfork2.json", cohesive_pair());
  const CliResult manip = run_cli("manipulate --input " + nonfork.string() +
                                  " --rule RA --max-coalition 1");
  REQUIRE(manip.exit_code == 0);
  const ojson manip_doc = parse_json_text(manip.out, "manipulate");
  CHECK(manip_doc["found"] == true);
  CHECK(manip_doc["coalition"] == ojson::array({1}));
  CHECK(manip_doc["manipulated_outcome"]["placement"]["0"] == "B");
  CHECK(manip_doc["improvement"]["1"]["honest"] == ojson::array({"A", 2}));

  const fs::path stable = write_profile("stable2.json", forked_pair());
  const CliResult no_manip = run_cli("manipulate --input " + stable.string() +
                                     " --max-coalition 2");
  REQUIRE(no_manip.exit_code == 0);
  CHECK(parse_json_text(no_manip.out, "manipulate")["found"] == false);

  const fs::path witness = scratch_dir() / "witness.json";
  REQUIRE(run_cli("witness-no-stable --out " + witness.string()).exit_code == 0);
  const Profile witness_profile = load_profile_file(witness.string());
  CHECK(witness_profile.m() == 3);
  const CliResult multi = run_cli("solve-multi --input " + witness.string());
  REQUIRE(multi.exit_code == 0);
  CHECK(parse_json_text(multi.out, "solve-multi")["found"] == false);
  const CliResult multi_ok = run_cli("solve-multi --input " + stable.string());
  REQUIRE(multi_ok.exit_code == 0);
  CHECK(parse_json_text(multi_ok.out, "solve-multi")["placement"]["1"] == "B");

  const fs::path corpus = scratch_dir() / "corpus";
  fs::create_directories(corpus);
  spill(corpus / "a-stable.json", profile_to_json(forked_pair()).dump(2) + "\n");
  spill(corpus / "b-nonfork.json", profile_to_json(cohesive_pair()).dump(2) + "\n");
  const fs::path csv_path = scratch_dir() / "audit.csv";
  const CliResult audit = run_cli("audit --corpus " + corpus.string() + " --rule RA " +
                                  "--max-coalition 2 --csv " + csv_path.string());
  REQUIRE(audit.exit_code == 0);
  const ojson audit_doc = parse_json_text(audit.out, "audit");
  REQUIRE(audit_doc["rows"].size() == 2);
  CHECK(audit_doc["rows"][0]["id"] == "a-stable.json");
  CHECK(audit_doc["rows"][0]["manipulable"] == false);
  CHECK(audit_doc["rows"][1]["manipulable"] == true);
  CHECK(audit_doc["crosstab"]["unique_clean"] == 1);
  CHECK(audit_doc["crosstab"]["multi_manipulable"] == 1);
  const std::string csv = slurp(csv_path);
  CHECK(csv.find("profile id,n,stable count,unique?,manipulable?,witness coalition size") !=
        std::string::npos);
  CHECK(csv.find("b-nonfork.json,2,2,no,yes,1") != std::string::npos);
}

TEST_CASE("cli: elicitation transcripts, simulated and interactive") {
  const fs::path stable = write_profile("stable3.json", forked_pair());
  const fs::path out = scratch_dir() / "elicit.json";
  const CliResult simulated =
      run_cli("elicit --input " + stable.string() + " --out " + out.string());
  REQUIRE(simulated.exit_code == 0);
  CHECK(simulated.out.find("Q agent=0 a=2 b=0") != std::string::npos);
  CHECK(simulated.out.find("A agent=1 1") != std::string::npos);
  const ojson doc = parse_json_text(slurp(out), "elicit");
  CHECK(doc["assignment"]["placement"]["1"] == "B");
  CHECK(doc["stats"]["total_queries"] == 3);
  CHECK(doc["stats"]["rounds"] == 2);

  // Interactive: agent 0 declines, agent 1 joins alone; second round agent 0
  // declines again. One malformed answer exercises the re-prompt.
  const CliResult interactive =
      run_cli("elicit --interactive --n 2", "oops\nnone\n1\nnone\n");
  REQUIRE(interactive.exit_code == 0);
  CHECK(interactive.out.find("Q agent=0 a=2 b=0") != std::string::npos);
  CHECK(interactive.err.find("expected an integer") != std::string::npos);

  const CliResult aborted = run_cli("elicit --interactive --n 2", "x\ny\nz\n");
  CHECK(aborted.exit_code == 1);
  CHECK(aborted.err.find("three malformed answers") != std::string::npos);

  const CliResult nci = run_cli("elicit --input " + stable.string() + " --nci");
  REQUIRE(nci.exit_code == 0);
  CHECK(nci.out.find("Q agent=0 top") != std::string::npos);
  CHECK(nci.out.find("\"total_queries\": 4") != std::string::npos);

  // Interactive two-query session: agent 0 stays loyal to A, agent 1 to B.
  const CliResult nci_interactive =
      run_cli("elicit --interactive --nci --n 2", "A\n1\nB\n1\n");
  REQUIRE(nci_interactive.exit_code == 0);
  CHECK(nci_interactive.out.find("Q agent=0 loyalty") != std::string::npos);
  CHECK(nci_interactive.out.find("\"1\": \"B\"") != std::string::npos);
}

TEST_CASE("cli: exit codes distinguish domain errors from usage and caps") {
  CHECK(run_cli("solve --input /nonexistent/missing.json").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("solve").exit_code == 2);  // missing required option

  const fs::path witness = scratch_dir() / "witness2.json";
  REQUIRE(run_cli("witness-no-stable --out " + witness.string()).exit_code == 0);
  CHECK(run_cli("solve --input " + witness.string()).exit_code == 1);  // m != 2

  const fs::path sample = write_profile("ruleless.json", forked_pair());
  CHECK(run_cli("solve --input " + sample.string() + " --rule RC").exit_code == 1);
  CHECK(run_cli("generate --n 3 --class k-interleaving:3 --seed 1").exit_code == 1);
  CHECK(run_cli("generate --n 3 --class nonsense --seed 1").exit_code == 1);

  const fs::path stable = write_profile("stable4.json", forked_pair());
  const CliResult capped = run_cli("stable-enum --input " + stable.string() + " --max-size 3");
  CHECK(capped.exit_code == 2);
  CHECK(capped.err.find("cap") != std::string::npos);

  // FORKCORE_CAP has the same effect as --max-size.
  const CliResult env_capped =
      run_cli("stable-enum --input " + stable.string(), "", "FORKCORE_CAP=3 ");
  CHECK(env_capped.exit_code == 2);
  // An explicit --max-size wins over the environment.
  const CliResult flag_wins =
      run_cli("stable-enum --input " + stable.string() + " --max-size 100", "", "FORKCORE_CAP=3 ");
  CHECK(flag_wins.exit_code == 0);
}

TEST_CASE("cli output is byte-deterministic") {
  const fs::path nonfork = write_profile("nonfork3.json", cohesive_pair());
  const CliResult first = run_cli("classify --input " + nonfork.string());
  const CliResult second = run_cli("classify --input " + nonfork.string());
  REQUIRE(first.exit_code == 0);
  CHECK(first.out == second.out);

  const CliResult enum_a = run_cli("stable-enum --input " + nonfork.string());
  const CliResult enum_b = run_cli("stable-enum --input " + nonfork.string());
  CHECK(enum_a.out == enum_b.out);
}
