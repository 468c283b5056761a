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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forkcore/forkcore.hpp"

namespace {

using namespace forkcore;

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 domain/validation errors, 2 cap/usage errors.
constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> max_size;
  int threads = 1;

  std::uint64_t cap() const {
    if (max_size) return *max_size;
    if (const char* env = std::getenv("FORKCORE_CAP")) {
      try {
        return std::stoull(env);
      } catch (const std::exception&) {
        throw cap_error("FORKCORE_CAP is not a number: " + std::string(env));
      }
    }
    return kDefaultCap;
  }
};

void emit(const ojson& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw validation_error("cannot write '" + out_path + "'");
    out << text;
  }
}

Rule parse_rule(const std::string& name) {
  if (name == "RA") return Rule::RA;
  if (name == "RB") return Rule::RB;
  throw validation_error("unknown rule '" + name + "' (expected RA or RB)");
}

ClassRequest parse_class(const std::string& name) {
  const auto colon = name.find(':');
  const std::string tag_name = colon == std::string::npos ? name : name.substr(0, colon);
  const auto tag = class_tag_from_string(tag_name);
  if (!tag) throw validation_error("unknown preference class '" + name + "'");
  ClassRequest request{*tag, 0};
  if (*tag == ClassTag::k_interleaving) {
    if (colon == std::string::npos) {
      throw validation_error("k-interleaving needs a degree, e.g. k-interleaving:2");
    }
    try {
      request.k = std::stoi(name.substr(colon + 1));
    } catch (const std::exception&) {
      throw validation_error("invalid k-interleaving degree in '" + name + "'");
    }
  } else if (colon != std::string::npos) {
    throw validation_error("class '" + tag_name + "' does not take a parameter");
  }
  return request;
}

/// Oracle driven by stdin for the interactive elicitation session.
/// Malformed answers are re-prompted up to three times, then abort.
class InteractiveOracle final : public AgentOracle {
 public:
  InteractiveOracle(int agent, int n) : agent_(agent), n_(n) {}

  std::optional<int> answer_min_join(int a, int b) override {
    const std::string prompt =
        "Q agent=" + std::to_string(agent_) + " a=" + std::to_string(a) +
        " b=" + std::to_string(b);
    for (int attempt = 0; attempt < 3; ++attempt) {
      std::cout << prompt << "\n" << std::flush;
      std::string line;
      if (!std::getline(std::cin, line)) {
        throw validation_error("input ended during the elicitation session");
      }
      if (line == "none") return std::nullopt;
      try {
        const int j = std::stoi(line);
        if (j >= 1 && j <= a) return j;
      } catch (const std::exception&) {
      }
      std::cerr << "expected an integer in [1," << a << "] or 'none'\n";
    }
    throw validation_error("agent " + std::to_string(agent_) +
                           ": three malformed answers, aborting the session");
  }

  int answer_top_alternative() override {
    for (int attempt = 0; attempt < 3; ++attempt) {
      std::cout << "Q agent=" << agent_ << " top\n" << std::flush;
      std::string line;
      if (!std::getline(std::cin, line)) {
        throw validation_error("input ended during the elicitation session");
      }
      if (line == "A") return 0;
      if (line == "B") return 1;
      std::cerr << "expected A or B\n";
    }
    throw validation_error("agent " + std::to_string(agent_) +
                           ": three malformed answers, aborting the session");
  }

  int answer_loyalty() override {
    for (int attempt = 0; attempt < 3; ++attempt) {
      std::cout << "Q agent=" << agent_ << " loyalty\n" << std::flush;
      std::string line;
      if (!std::getline(std::cin, line)) {
        throw validation_error("input ended during the elicitation session");
      }
      try {
        const int j = std::stoi(line);
        if (j >= 1 && j <= n_) return j;
      } catch (const std::exception&) {
      }
      std::cerr << "expected an integer in [1," << n_ << "]\n";
    }
    throw validation_error("agent " + std::to_string(agent_) +
                           ": three malformed answers, aborting the session");
  }

 private:
  int agent_;
  int n_;
};

/// Truthful oracle that echoes the session transcript, so simulated and
/// interactive runs print the same kind of log.
class EchoingOracle final : public AgentOracle {
 public:
  EchoingOracle(int agent, PreferenceOrder order) : agent_(agent), inner_(std::move(order)) {}

  std::optional<int> answer_min_join(int a, int b) override {
    const auto j = inner_.answer_min_join(a, b);
    std::cout << "Q agent=" << agent_ << " a=" << a << " b=" << b << "\n";
    std::cout << "A agent=" << agent_ << " " << (j ? std::to_string(*j) : std::string("none"))
              << "\n";
    return j;
  }
  int answer_top_alternative() override {
    const int top = inner_.answer_top_alternative();
    std::cout << "Q agent=" << agent_ << " top\n";
    std::cout << "A agent=" << agent_ << " " << (top == 0 ? "A" : "B") << "\n";
    return top;
  }
  int answer_loyalty() override {
    const int j = inner_.answer_loyalty();
    std::cout << "Q agent=" << agent_ << " loyalty\n";
    std::cout << "A agent=" << agent_ << " " << j << "\n";
    return j;
  }

 private:
  int agent_;
  TruthfulOracle inner_;
};

ojson classification_json(const Profile& profile) {
  ojson agents = ojson::array();
  for (int agent = 0; agent < profile.n(); ++agent) {
    const OrderClass cls = classify_order(profile.order(agent));
    ojson entry{{"id", agent},
                {"tag", to_string(cls.tag)},
                {"degree", cls.degree},
                {"preferred", profile.alternative_label(cls.preferred)},
                {"loyalty", cls.loyalty},
                {"nci", cls.nci}};
    if (cls.nci) entry["nci_threshold"] = cls.nci_threshold;
    agents.push_back(std::move(entry));
  }

  int profile_degree = 0;
  bool all_nci = true;
  for (int agent = 0; agent < profile.n(); ++agent) {
    const OrderClass cls = classify_order(profile.order(agent));
    profile_degree = std::max(profile_degree, cls.degree);
    all_nci = all_nci && cls.nci;
  }
  ClassTag profile_tag = ClassTag::k_interleaving;
  if (profile_degree == 0) {
    profile_tag = ClassTag::non_interleaving;
  } else if (profile_degree == 1) {
    profile_tag = ClassTag::minimally_interleaving;
  } else if (all_nci) {
    profile_tag = ClassTag::non_critically_interleaving;
  }

  const CohesionResult cohesion = is_cohesive(profile);
  ojson summary{{"tag", to_string(profile_tag)},
                {"degree", profile_degree},
                {"nci", all_nci},
                {"cohesive", cohesion.cohesive}};
  if (cohesion.witness) {
    summary["cohesive_witness"] = profile.alternative_label(*cohesion.witness);
  }
  summary["prop1_unique"] = check_prop1_uniqueness(profile);
  if (all_nci) summary["prop2_unique"] = check_prop2_uniqueness(profile);
  summary["ra_rb_agree"] = is_unique_stable(profile);

  return ojson{{"agents", std::move(agents)}, {"profile", std::move(summary)}};
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

int run(int argc, char** argv) {
  CLI::App app{"forkcore: stable assignments for communities that may fork"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // allow --max-size/--threads after the subcommand

  GlobalOptions global;
  app.add_option("--max-size", global.max_size,
                 "Raise the enumeration/search cap (default " + std::to_string(kDefaultCap) +
                     "; env FORKCORE_CAP)");
  app.add_option("--threads", global.threads, "Worker threads (current engines are sequential)")
      ->check(CLI::PositiveNumber);

  // solve
  std::string solve_input, solve_out, solve_trace, solve_rule = "RA";
  auto* solve_cmd = app.add_subcommand("solve", "Run a greedy rule on a two-alternative problem");
  solve_cmd->add_option("--input", solve_input, "Profile JSON")->required();
  solve_cmd->add_option("--rule", solve_rule, "RA or RB");
  solve_cmd->add_option("--out", solve_out, "Write the assignment here instead of stdout");
  solve_cmd->add_option("--trace", solve_trace, "Also write the solver trace JSON here");

  // solve-multi
  std::string multi_input, multi_out;
  auto* multi_cmd = app.add_subcommand("solve-multi", "Exhaustive stable search for any m");
  multi_cmd->add_option("--input", multi_input, "Profile JSON")->required();
  multi_cmd->add_option("--out", multi_out, "Output path");

  // check
  std::string check_input, check_assignment, check_out;
  auto* check_cmd = app.add_subcommand("check", "Check the stability of an assignment");
  check_cmd->add_option("--input", check_input, "Profile JSON")->required();
  check_cmd->add_option("--assignment", check_assignment, "Assignment JSON")->required();
  check_cmd->add_option("--out", check_out, "Output path");

  // stable-enum
  std::string enum_input, enum_out;
  auto* enum_cmd = app.add_subcommand("stable-enum", "Enumerate all stable assignments");
  enum_cmd->add_option("--input", enum_input, "Profile JSON")->required();
  enum_cmd->add_option("--out", enum_out, "Output path");

  // unique
  std::string unique_input, unique_out;
  auto* unique_cmd = app.add_subcommand("unique", "Detect whether the stable assignment is unique");
  unique_cmd->add_option("--input", unique_input, "Profile JSON")->required();
  unique_cmd->add_option("--out", unique_out, "Output path");

  // elicit
  std::string elicit_input, elicit_out;
  int elicit_n = 0;
  bool elicit_interactive = false, elicit_nci = false;
  auto* elicit_cmd = app.add_subcommand("elicit", "Query-driven solve (simulated or interactive)");
  elicit_cmd->add_option("--input", elicit_input, "Profile JSON for simulated truthful oracles");
  elicit_cmd->add_flag("--interactive", elicit_interactive, "Read answers from stdin");
  elicit_cmd->add_option("--n", elicit_n, "Agent count for interactive sessions");
  elicit_cmd->add_flag("--nci", elicit_nci, "Use the two-query threshold protocol");
  elicit_cmd->add_option("--out", elicit_out, "Write assignment + query stats here");

  // classify
  std::string classify_input, classify_out;
  auto* classify_cmd = app.add_subcommand("classify", "Classify orders and profile structure");
  classify_cmd->add_option("--input", classify_input, "Profile JSON")->required();
  classify_cmd->add_option("--out", classify_out, "Output path");

  // generate
  int gen_n = 0, gen_m = 2;
  std::uint64_t gen_seed = 0;
  std::string gen_class = "monotone-general", gen_out;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a seeded profile from a class");
  gen_cmd->add_option("--n", gen_n, "Agent count")->required();
  gen_cmd->add_option("--m", gen_m, "Alternative count");
  gen_cmd->add_option("--class", gen_class,
                      "non-interleaving | minimally-interleaving | k-interleaving:<k> | "
                      "non-critically-interleaving | monotone-general");
  gen_cmd->add_option("--seed", gen_seed, "Seed");
  gen_cmd->add_option("--out", gen_out, "Output path");

  // manipulate
  std::string manip_input, manip_out, manip_rule = "RA";
  int manip_coalition = 1;
  auto* manip_cmd = app.add_subcommand("manipulate", "Search for a profitable coalition misreport");
  manip_cmd->add_option("--input", manip_input, "Profile JSON")->required();
  manip_cmd->add_option("--rule", manip_rule, "RA or RB");
  manip_cmd->add_option("--max-coalition", manip_coalition, "Largest coalition size to try");
  manip_cmd->add_option("--out", manip_out, "Output path");

  // audit
  std::string audit_corpus, audit_out, audit_csv, audit_rule = "RA";
  int audit_coalition = 1;
  auto* audit_cmd = app.add_subcommand("audit", "Audit a directory of profiles");
  audit_cmd->add_option("--corpus", audit_corpus, "Directory of profile *.json files")->required();
  audit_cmd->add_option("--rule", audit_rule, "RA or RB");
  audit_cmd->add_option("--max-coalition", audit_coalition, "Largest coalition size to try");
  audit_cmd->add_option("--out", audit_out, "JSON summary path");
  audit_cmd->add_option("--csv", audit_csv, "Also write the cross-tab CSV here");

  // witness-no-stable
  std::string witness_out;
  auto* witness_cmd =
      app.add_subcommand("witness-no-stable", "Emit a three-alternative profile with no stable assignment");
  witness_cmd->add_option("--out", witness_out, "Output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::uint64_t cap = global.cap();

  if (solve_cmd->parsed()) {
    const Profile profile = load_profile_file(solve_input);
    const SolveResult result = solve(profile, parse_rule(solve_rule));
    if (!solve_trace.empty()) emit(trace_to_json(result.trace), solve_trace);
    emit(assignment_to_json(result.assignment, profile), solve_out);
  } else if (multi_cmd->parsed()) {
    const Profile profile = load_profile_file(multi_input);
    const auto found = find_stable_exhaustive(profile, cap);
    if (found) {
      emit(assignment_to_json(*found, profile), multi_out);
    } else {
      emit(ojson{{"found", false}}, multi_out);
    }
  } else if (check_cmd->parsed()) {
    const Profile profile = load_profile_file(check_input);
    const Assignment assignment = assignment_from_json(load_json_file(check_assignment), profile);
    const StabilityResult result = is_stable(profile, assignment);
    ojson doc{{"stable", result.stable}};
    if (result.witness) doc["witness"] = witness_to_json(*result.witness, profile);
    emit(doc, check_out);
  } else if (enum_cmd->parsed()) {
    const Profile profile = load_profile_file(enum_input);
    const auto stable = enumerate_stable(profile, cap);
    ojson list = ojson::array();
    for (const Assignment& s : stable) list.push_back(assignment_to_json(s, profile));
    emit(ojson{{"count", stable.size()}, {"stable", std::move(list)}}, enum_out);
  } else if (unique_cmd->parsed()) {
    const Profile profile = load_profile_file(unique_input);
    emit(ojson{{"unique", is_unique_stable(profile)}}, unique_out);
  } else if (elicit_cmd->parsed()) {
    if (elicit_interactive == !elicit_input.empty()) {
      throw cap_error("elicit needs exactly one of --input or --interactive");
    }
    std::vector<std::unique_ptr<AgentOracle>> oracles;
    std::vector<std::string> labels = {"A", "B"};
    if (elicit_interactive) {
      if (elicit_n < 1) throw cap_error("--interactive requires --n >= 1");
      for (int agent = 0; agent < elicit_n; ++agent) {
        oracles.push_back(std::make_unique<InteractiveOracle>(agent, elicit_n));
      }
    } else {
      const Profile profile = load_profile_file(elicit_input);
      detail::require_two_alternatives(profile, "elicitation");
      labels = profile.alternatives();
      for (int agent = 0; agent < profile.n(); ++agent) {
        oracles.push_back(std::make_unique<EchoingOracle>(agent, profile.order(agent)));
      }
    }
    std::vector<AgentOracle*> pointers = oracle_pointers(oracles);
    const ElicitResult result = elicit_nci ? run_elicited_nci(pointers) : run_elicited(pointers);
    ojson placement = ojson::object();
    for (int agent = 0; agent < result.assignment.n(); ++agent) {
      placement[std::to_string(agent)] = labels[result.assignment.alternative_of(agent)];
    }
    ojson sizes = ojson::object();
    for (int alt = 0; alt < 2; ++alt) sizes[labels[alt]] = result.assignment.community_size(alt);
    emit(ojson{{"assignment", ojson{{"placement", std::move(placement)}, {"sizes", std::move(sizes)}}},
               {"stats", query_stats_to_json(result.stats)}},
         elicit_out);
  } else if (classify_cmd->parsed()) {
    const Profile profile = load_profile_file(classify_input);
    detail::require_two_alternatives(profile, "classification");
    emit(classification_json(profile), classify_out);
  } else if (gen_cmd->parsed()) {
    const Profile profile = generate_profile(gen_n, gen_m, parse_class(gen_class), gen_seed);
    emit(profile_to_json(profile), gen_out);
  } else if (manip_cmd->parsed()) {
    const Profile profile = load_profile_file(manip_input);
    const auto report =
        find_manipulation(profile, parse_rule(manip_rule), manip_coalition, {cap});
    emit(report ? report_to_json(*report, profile) : ojson{{"found", false}}, manip_out);
  } else if (audit_cmd->parsed()) {
    std::vector<Profile> corpus;
    std::vector<std::string> ids;
    std::vector<std::filesystem::path> paths;
    if (!std::filesystem::is_directory(audit_corpus)) {
      throw validation_error("'" + audit_corpus + "' is not a directory");
    }
    for (const auto& entry : std::filesystem::directory_iterator(audit_corpus)) {
      if (entry.path().extension() == ".json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& path : paths) {
      corpus.push_back(load_profile_file(path.string()));
      ids.push_back(path.filename().string());
    }
    const AuditSummary summary =
        audit_strategyproofness(corpus, parse_rule(audit_rule), audit_coalition, {cap}, ids);
    ojson rows = ojson::array();
    std::string csv = "profile id,n,stable count,unique?,manipulable?,witness coalition size\n";
    for (const AuditRow& row : summary.rows) {
      ojson entry{{"id", row.id},
                  {"n", row.n},
                  {"stable_count", row.stable_count},
                  {"unique", row.unique},
                  {"manipulable", row.manipulable}};
      if (row.witness_coalition_size) entry["witness_coalition_size"] = *row.witness_coalition_size;
      rows.push_back(std::move(entry));
      csv += csv_escape(row.id) + "," + std::to_string(row.n) + "," +
             std::to_string(row.stable_count) + "," + (row.unique ? "yes" : "no") + "," +
             (row.manipulable ? "yes" : "no") + "," +
             (row.witness_coalition_size ? std::to_string(*row.witness_coalition_size) : "") + "\n";
    }
    if (!audit_csv.empty()) {
      std::ofstream out(audit_csv);
      if (!out) throw validation_error("cannot write '" + audit_csv + "'");
      out << csv;
    }
    emit(ojson{{"rows", std::move(rows)},
               {"crosstab",
                ojson{{"unique_clean", summary.unique_clean},
                      {"unique_manipulable", summary.unique_manipulable},
                      {"multi_clean", summary.multi_clean},
                      {"multi_manipulable", summary.multi_manipulable}}}},
         audit_out);
  } else if (witness_cmd->parsed()) {
    emit(profile_to_json(no_stable_witness()), witness_out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const cap_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const forkcore::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}
