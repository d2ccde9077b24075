#ifndef SHIFTEQ_CLI_HPP
#define SHIFTEQ_CLI_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shifteq/ck_rep.hpp"
#include "shifteq/invariants.hpp"
#include "shifteq/search.hpp"
#include "shifteq/version.hpp"

namespace shifteq::cli {

struct ExecResult {
  int exit_code = 0;
  std::string output;  // exact bytes for stdout
};

struct Inputs {
  json pair;     // { "A": matrix, "B": matrix }
  json witness;  // schema depends on the subcommand
  json budget;
  std::uint32_t depth = 6;
  unsigned workers = 1;
  std::int64_t seed = 0;
};

struct HandlerOut {
  int exit_code = 0;
  json result;
  CheckList checks;
};

inline int exit_code_for(errc c) {
  switch (c) {
    case errc::not_elementary:
    case errc::middle_mismatch:
    case errc::broken_chain:
    case errc::invalid_underlying_se:
    case errc::invalid_witness:
    case errc::block_mismatch:
      return 1;  // well-formed input, refuted content
    default:
      return 2;
  }
}

namespace detail {

inline std::pair<NonnegMatrix, NonnegMatrix> parse_pair(const json& jp) {
  if (!jp.is_object() || !jp.contains("A") || !jp.contains("B"))
    fail(errc::invalid_input, "field 'pair' must contain matrices A and B");
  return {matrix_from_json(jp.at("A"), "A"), matrix_from_json(jp.at("B"), "B")};
}

inline json checks_to_json(const CheckList& checks) {
  json a = json::array();
  for (const auto& [name, ok] : checks) a.push_back(json::array({name, ok}));
  return a;
}

inline json relation_report_to_json(const RelationReport& r) {
  return json{{"pass", r.pass},
              {"vacuous_warning", r.vacuous},
              {"checked", r.checked},
              {"excluded", r.excluded},
              {"failures", r.failures}};
}

template <class T, class WitnessToJson, class ChecksOf>
HandlerOut search_out(const SearchResult<T>& res, WitnessToJson&& wj, ChecksOf&& checks_of) {
  HandlerOut out;
  out.result = json{{"status", status_name(res.status)},
                    {"nodes", res.nodes},
                    {"bound_dominates", res.bound_dominates},
                    {"witness", nullptr}};
  if (res.status == SearchStatus::Found) {
    out.result["witness"] = wj(*res.witness);
    out.checks = checks_of(*res.witness);
    out.exit_code = all_pass(out.checks) ? 0 : 2;  // a found witness must re-verify
  } else {
    out.exit_code = 1;
  }
  return out;
}

inline SearchBudget budget_of(const Inputs& in) {
  SearchBudget b;
  if (!in.budget.is_null()) b = budget_from_json(in.budget);
  b.seed = in.seed;
  return b;
}

inline CSEWitness parse_cse_bundle(const json& jw, NonnegMatrix& a_out, NonnegMatrix& b_out) {
  CSEWitness c = cse_witness_from_json(jw);
  a_out = c.matrix_a();
  b_out = c.matrix_b();
  if (jw.contains("A") && matrix_from_json(jw.at("A"), "A") != a_out)
    fail(errc::invalid_input, "field 'A' disagrees with the witness path spaces");
  if (jw.contains("B") && matrix_from_json(jw.at("B"), "B") != b_out)
    fail(errc::invalid_input, "field 'B' disagrees with the witness path spaces");
  return c;
}

}  // namespace detail

/// Dispatches one subcommand on parsed inputs. Pure: no file or terminal
/// I/O, so certificates can be replayed byte-for-byte.
inline HandlerOut run_command(const std::string& cmd, const Inputs& in) {
  using detail::parse_pair;
  HandlerOut out;

  if (cmd == "verify-se") {
    auto [a, b] = parse_pair(in.pair);
    SEWitness w = se_witness_from_json(in.witness);
    out.checks = verify_se_checks(a, b, w);
    bool ok = verify_se(a, b, w);
    out.result = json{{"verified", ok}};
    out.exit_code = ok ? 0 : 1;
    return out;
  }

  if (cmd == "verify-cse") {
    auto [a, b] = parse_pair(in.pair);
    CSEWitness c = cse_witness_from_json(in.witness);
    out.checks = verify_cse_checks(a, b, c);
    bool ok = verify_cse(a, b, c);
    out.result = json{{"verified", ok}};
    out.exit_code = ok ? 0 : 1;
    return out;
  }

  if (cmd == "derived-identities") {
    auto [a, b] = parse_pair(in.pair);
    CSEWitness c = cse_witness_from_json(in.witness);
    if (!verify_cse(a, b, c))
      fail(errc::invalid_witness, "derived identities require a verified compatible witness");
    out.checks = derived_identity_checks(c);
    bool ok = all_pass(out.checks);
    out.result = json{{"verified", ok}};
    out.exit_code = ok ? 0 : 1;
    return out;
  }

  if (cmd == "sse-to-cse") {
    auto [a, b] = parse_pair(in.pair);
    ElementaryStep step = step_from_json(in.witness);
    CSEWitness c = sse_step_to_cse(a, b, step);
    out.checks = verify_cse_checks(a, b, c);
    out.result = cse_witness_to_json(a, b, c);
    out.exit_code = all_pass(out.checks) ? 0 : 2;
    return out;
  }

  if (cmd == "compose-cse") {
    if (!in.witness.is_object() || !in.witness.contains("first") ||
        !in.witness.contains("second"))
      fail(errc::invalid_input, "field 'witness' must contain 'first' and 'second' bundles");
    NonnegMatrix a, b1, b2, c;
    CSEWitness w1 = detail::parse_cse_bundle(in.witness.at("first"), a, b1);
    CSEWitness w2 = detail::parse_cse_bundle(in.witness.at("second"), b2, c);
    if (!verify_cse(a, b1, w1) || !verify_cse(b2, c, w2))
      fail(errc::invalid_witness, "both inputs must be verified compatible witnesses");
    CSEWitness comp = compose_cse(w1, w2);
    out.checks = verify_cse_checks(a, c, comp);
    out.result = cse_witness_to_json(a, c, comp);
    out.exit_code = all_pass(out.checks) ? 0 : 2;
    return out;
  }

  if (cmd == "chain-to-cse") {
    auto [a, b] = parse_pair(in.pair);
    SSEChain chain = chain_from_json(in.witness);
    if (chain.start != a)
      fail(errc::broken_chain, "chain start differs from matrix A of the pair");
    CSEWitness c = chain_to_cse(chain, b);
    out.checks = verify_cse_checks(a, b, c);
    out.result = cse_witness_to_json(a, b, c);
    out.exit_code = all_pass(out.checks) ? 0 : 2;
    return out;
  }

  if (cmd == "search-elementary") {
    auto [a, b] = parse_pair(in.pair);
    auto res = search_elementary(a, b, detail::budget_of(in), in.workers);
    return detail::search_out(
        res, [&](const ElementaryStep& s) { return step_to_json(s); },
        [&](const ElementaryStep& s) {
          CheckList cs;
          cs.emplace_back("A == R*S", multiply(s.R, s.S) == a);
          cs.emplace_back("B == S*R", multiply(s.S, s.R) == b);
          return cs;
        });
  }

  if (cmd == "search-sse") {
    auto [a, b] = parse_pair(in.pair);
    auto res = search_sse_chain(a, b, detail::budget_of(in), in.workers);
    return detail::search_out(
        res, [&](const SSEChain& chain) { return chain_to_json(chain); },
        [&](const SSEChain& chain) {
          CheckList cs;
          bool ends_at_b = false;
          try {
            ends_at_b = chain.validate() == b;
          } catch (const Error&) {
          }
          cs.emplace_back("chain validates and ends at B", ends_at_b);
          cs.emplace_back("chain starts at A", chain.start == a);
          return cs;
        });
  }

  if (cmd == "search-se") {
    auto [a, b] = parse_pair(in.pair);
    auto res = search_se_witness(a, b, detail::budget_of(in), in.workers);
    return detail::search_out(
        res, [&](const SEWitness& w) { return se_witness_to_json(a, b, w); },
        [&](const SEWitness& w) { return verify_se_checks(a, b, w); });
  }

  if (cmd == "search-cse") {
    auto [a, b] = parse_pair(in.pair);
    SEWitness w = se_witness_from_json(in.witness);
    auto res = search_compatible_iso(a, b, w, detail::budget_of(in), in.workers);
    return detail::search_out(
        res, [&](const CSEWitness& c) { return cse_witness_to_json(a, b, c); },
        [&](const CSEWitness& c) { return verify_cse_checks(a, b, c); });
  }

  if (cmd == "invariants") {
    auto [a, b] = parse_pair(in.pair);
    ObstructionReport rep = se_obstruction_report(a, b);
    out.checks.emplace_back("char polys away from zero equal", rep.char_a == rep.char_b);
    out.checks.emplace_back("bowen-franks groups equal", rep.bf_a == rep.bf_b);
    out.checks.emplace_back("eventual ranks equal",
                            rep.dim_a.eventual_rank == rep.dim_b.eventual_rank);
    out.checks.emplace_back("dimension actions conjugate within search bound",
                            rep.conjugator.has_value());
    out.result = to_json(rep);
    out.exit_code = rep.verdict == Verdict::Inconclusive ? 0 : 1;
    return out;
  }

  if (cmd == "rep-build" || cmd == "rep-verify" || cmd == "rep-twist") {
    NonnegMatrix a, b;
    CSEWitness c = detail::parse_cse_bundle(in.witness, a, b);
    TruncatedRep rep = build_representation(c, in.depth);
    if (cmd == "rep-twist") {
      if (!in.witness.contains("twist"))
        fail(errc::invalid_input,
             "field 'twist' (a root of unity as 'num/den') is required for rep-twist");
      rep = twist_representation(rep, weight_from_string(in.witness.at("twist")));
    }
    std::uint32_t margin = static_cast<std::uint32_t>(c.se.m);
    RelationReport ck = verify_ck_relations(rep, margin);
    RelationReport rse = verify_rse_equations(rep, c, margin);
    out.checks.emplace_back("cuntz-krieger relations at margin " + std::to_string(margin),
                            ck.pass);
    out.checks.emplace_back("representation equations at margin " + std::to_string(margin),
                            rse.pass);
    out.checks.emplace_back("vertex projections coincide across families",
                            vertex_projections_coincide(rep));
    json verification{{"ck", detail::relation_report_to_json(ck)},
                      {"rse", detail::relation_report_to_json(rse)}};
    if (cmd == "rep-verify") {
      out.result = verification;
    } else {
      out.result = rep_dump(rep);
      out.result["verification"] = verification;
    }
    out.exit_code = all_pass(out.checks) ? 0 : 1;
    return out;
  }

  fail(errc::invalid_input, "unknown subcommand '" + cmd + "'");
}

inline json make_certificate(const std::string& cmd, const Inputs& in,
                             const HandlerOut& h) {
  json inputs = json::object();
  if (!in.pair.is_null()) inputs["pair"] = in.pair;
  if (!in.witness.is_null()) inputs["witness"] = in.witness;
  if (!in.budget.is_null()) inputs["budget"] = in.budget;
  inputs["depth"] = in.depth;
  return json{{"command", cmd},
              {"inputs", inputs},
              {"result", h.result},
              {"checks", detail::checks_to_json(h.checks)},
              {"tool_version", kToolVersion},
              {"seed", in.seed}};
}

/// Re-runs a certificate's command on its recorded inputs and compares the
/// regenerated result and checks byte-for-byte. A tool version mismatch is
/// reported through `version_warning` but the comparison still runs.
inline bool certificate_roundtrip(const json& cert, bool* version_warning = nullptr) {
  if (!cert.is_object() || !cert.contains("command") || !cert.contains("inputs") ||
      !cert.contains("result"))
    fail(errc::invalid_input, "certificate must have command/inputs/result");
  if (version_warning)
    *version_warning =
        !cert.contains("tool_version") || cert.at("tool_version") != json(kToolVersion);
  Inputs in;
  const json& ji = cert.at("inputs");
  if (ji.contains("pair")) in.pair = ji.at("pair");
  if (ji.contains("witness")) in.witness = ji.at("witness");
  if (ji.contains("budget")) in.budget = ji.at("budget");
  if (ji.contains("depth")) in.depth = ji.at("depth").get<std::uint32_t>();
  if (cert.contains("seed")) in.seed = cert.at("seed").get<std::int64_t>();
  HandlerOut h;
  try {
    h = run_command(cert.at("command").get<std::string>(), in);
  } catch (const Error&) {
    return false;
  }
  bool same_result = h.result.dump() == cert.at("result").dump();
  bool same_checks = !cert.contains("checks") ||
                     detail::checks_to_json(h.checks).dump() == cert.at("checks").dump();
  return same_result && same_checks;
}

inline json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(errc::invalid_input, "cannot open file '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    fail(errc::invalid_input, "file '" + path + "' is not valid JSON: " + e.what());
  }
  return j;
}

inline const std::vector<std::string>& known_subcommands() {
  static const std::vector<std::string> cmds = {
      "verify-se",      "verify-cse", "derived-identities", "sse-to-cse", "compose-cse",
      "chain-to-cse",   "search-elementary", "search-sse", "search-se", "search-cse",
      "invariants",     "rep-build",  "rep-verify",         "rep-twist"};
  return cmds;
}

inline std::string usage_text() {
  std::ostringstream os;
  os << "usage: shifteq <subcommand> [--pair FILE] [--witness FILE] [--budget FILE]\n"
     << "                [--depth N] [--workers N] [--seed N] [--out FILE]\n"
     << "subcommands:\n";
  for (const auto& c : known_subcommands()) os << "  " << c << "\n";
  os << "exit codes: 0 verified/found, 1 refuted/none-within-budget, 2 usage or input "
        "error\n";
  return os.str();
}

/// Full CLI entry point: parses argv, runs the subcommand, emits the
/// certificate (and writes it to --out when given). Deterministic: identical
/// argv, input files and seed produce identical bytes.
inline ExecResult execute(const std::vector<std::string>& argv) {
  auto error_out = [](int code, const std::string& kind, const std::string& detail) {
    json e{{"error", {{"code", kind}, {"detail", detail}}}};
    return ExecResult{code, e.dump(2) + "\n"};
  };

  if (argv.empty()) return ExecResult{2, usage_text()};
  const std::string cmd = argv[0];
  if (cmd == "--help" || cmd == "help") return ExecResult{0, usage_text()};
  bool known = false;
  for (const auto& c : known_subcommands()) known = known || c == cmd;
  if (!known) return error_out(2, "InvalidInput", "unknown subcommand '" + cmd + "'");

  std::string pair_file, witness_file, budget_file, out_file;
  Inputs in;
  try {
    for (std::size_t i = 1; i < argv.size(); i += 2) {
      const std::string& flag = argv[i];
      if (i + 1 >= argv.size())
        fail(errc::invalid_input, "flag '" + flag + "' needs a value");
      const std::string& val = argv[i + 1];
      if (flag == "--pair") pair_file = val;
      else if (flag == "--witness") witness_file = val;
      else if (flag == "--budget") budget_file = val;
      else if (flag == "--out") out_file = val;
      else if (flag == "--depth") in.depth = static_cast<std::uint32_t>(std::stoul(val));
      else if (flag == "--workers") in.workers = static_cast<unsigned>(std::stoul(val));
      else if (flag == "--seed") in.seed = static_cast<std::int64_t>(std::stoll(val));
      else fail(errc::invalid_input, "unknown flag '" + flag + "'");
    }
    if (!pair_file.empty()) in.pair = load_json_file(pair_file);
    if (!witness_file.empty()) in.witness = load_json_file(witness_file);
    if (!budget_file.empty()) in.budget = load_json_file(budget_file);
  } catch (const Error& e) {
    return error_out(2, errc_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_out(2, "InvalidInput", e.what());
  }

  try {
    HandlerOut h = run_command(cmd, in);
    json cert = make_certificate(cmd, in, h);
    std::string bytes = cert.dump(2) + "\n";
    if (!out_file.empty()) {
      std::ofstream f(out_file, std::ios::binary);
      if (!f) return error_out(2, "InvalidInput", "cannot write file '" + out_file + "'");
      f << bytes;
    }
    return ExecResult{h.exit_code, bytes};
  } catch (const Error& e) {
    return error_out(exit_code_for(e.code()), errc_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_out(2, "InternalError", e.what());
  }
}

}  // namespace shifteq::cli

#endif
