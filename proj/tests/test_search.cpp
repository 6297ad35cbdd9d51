#include <doctest.h>

#include <fstream>
#include <sstream>

#include "eml/bootstrap.hpp"
#include "eml/eval.hpp"
#include "eml/shortest.hpp"

using namespace eml;

namespace {

/// Stack-valid strings of length k over `leaves` + 'E', by brute force.
int brute_count(int k, const std::string& leaves) {
  const std::string alpha = leaves + "E";
  int total = 0;
  std::string s(static_cast<std::size_t>(k), ' ');
  const auto rec = [&](auto&& self, int pos, int depth) -> void {
    if (pos == k) {
      total += depth == 1;
      return;
    }
    for (char c : alpha) {
      if (c == 'E' && depth < 2) continue;
      s[static_cast<std::size_t>(pos)] = c;
      self(self, pos + 1, c == 'E' ? depth - 1 : depth + 1);
    }
  };
  rec(rec, 0, 0);
  return total;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("bootstrap") {
  TEST_CASE("enumeration counts match brute force") {
    const Basis b = Basis::builtin("eml");
    for (int k = 1; k <= 9; ++k) {
      INFO(k);
      CHECK(enumerate_expressions(b, k, std::vector<std::string>{}).size() == static_cast<std::size_t>(brute_count(k, "1")));
      CHECK(enumerate_expressions(b, k, std::vector<std::string>{"x"}).size() ==
            static_cast<std::size_t>(brute_count(k, "1x")));
    }
    CHECK(enumerate_expressions(b, 5, std::vector<std::string>{}).size() == 2);
  }

  TEST_CASE("sieve accepts the known witnesses and rejects near misses") {
    const Basis b = Basis::builtin("eml");
    CHECK(sieve_match(b, RpnProgram::parse_compact("11E"), Target::from_expression("e", "e")));
    CHECK(sieve_match(b, RpnProgram::parse_compact("11xE1EE"), Target::from_expression("ln", "ln(x)")));
    CHECK(sieve_match(b, RpnProgram::parse_compact("x1E"), Target::from_expression("exp", "exp(x)")));
    CHECK_FALSE(sieve_match(b, RpnProgram::parse_compact("1x1EE"), Target::from_expression("negx", "-x")));
    CHECK_FALSE(sieve_match(b, RpnProgram::parse_compact("x1E"), Target::from_expression("x", "x")));
    CHECK_FALSE(sieve_match(b, RpnProgram::parse_compact("11E"), Target::from_expression("pi", "pi")));
    // e - ln(e^e) = 0
    CHECK(sieve_match(b, RpnProgram::parse_compact("111E1EE"), Target::from_expression("0", "0")));
  }

  TEST_CASE("Newman basis reaches -x at K=7") {
    const Basis b("newman", {}, {"x"}, {"suc", "pre", "inv"}, {});
    const Target t = Target::from_expression("neg", "-x");
    const std::vector<std::string> vars{"x"};
    for (int k = 1; k < 7; ++k) {
      for (const auto& p : enumerate_expressions(b, k, vars)) REQUIRE_FALSE(sieve_match(b, p, t));
    }
    std::vector<std::string> found;
    for (const auto& p : enumerate_expressions(b, 7, vars)) {
      if (sieve_match(b, p, t)) found.push_back(p.to_string());
    }
    CHECK(!found.empty());
    CHECK(std::find(found.begin(), found.end(), "x inv suc inv pre inv suc") != found.end());
  }

  TEST_CASE("first round of the EML bootstrap finds e") {
    VerifyOptions o;
    o.parallel = false;
    o.k_max = 3;
    o.k_ceiling = 3;
    const auto c = verify_base_set(Basis::builtin("eml"), TargetSet::from_names(std::vector<std::string>{"e", "exp"}), o);
    CHECK(c.complete());
    REQUIRE(c.find("e") != nullptr);
    CHECK(c.find("e")->rpn == "11E");
    CHECK(c.find("e")->round == 1);
  }

  TEST_CASE("a small Wolfram-style basis builds 0") {
    VerifyOptions o;
    o.parallel = false;
    o.k_max = 5;
    o.k_ceiling = 5;
    const Basis b("mini", {"-1", "1"}, {"x", "y"}, {}, {"+", "*"});
    const auto c = verify_base_set(b, TargetSet::from_names(std::vector<std::string>{"0", "2", "minus"}), o);
    CHECK(c.complete());
    CHECK(c.find("0")->k == 3);
  }

  TEST_CASE("the shipped chain replays and re-verifies") {
    const Basis eml = Basis::builtin("eml");
    const auto chain = chain_from_jsonl(read_file(std::string(EML_FORGE_DATA_DIR) + "/eml_chain.jsonl"), "eml");
    CHECK(chain.entries.size() == 36);
    CHECK(chain.complete());
    const Basis full = replay(eml, chain);
    // Entries already in the initial basis (1, x, y) are not re-added.
    for (const auto& e : chain.entries) CHECK(full.find(e.name) >= 0);
    CHECK(full.size() == eml.size() + 33);
    const auto rv = reverify(eml, chain, TargetSet::calculator());
    for (const auto& r : rv) {
      INFO(r.name);
      CHECK(r.ok);
      CHECK(r.points == 10);
      CHECK(r.float_rel <= 1e-8);
      CHECK(r.big_rel <= 1e-40);
    }
    const auto ex = export_chain(eml, chain);
    CHECK(ex.nodes == 38);
    CHECK(ex.table.verify().empty());
  }
}

TEST_SUITE("shortest") {
  TEST_CASE("small golden sizes") {
    SearchOptions o;
    o.parallel = false;
    const auto k_of = [&](const char* name, bool ext = true) {
      SearchTask t{TargetSet::from_names(std::vector<std::string>{name}).targets().at(0), 15, ext, false};
      return shortest(t, o).k;
    };
    CHECK(k_of("e") == 3);
    CHECK(k_of("exp") == 3);
    CHECK(k_of("ln") == 7);
    CHECK(k_of("0") == 7);
    CHECK(k_of("x-y") == 11);
    CHECK(k_of("-1") == 15);
    CHECK(k_of("1/x") == 15);
    CHECK(k_of("0", false) == 7);
    CHECK(k_of("x-y", false) == 11);
  }

  TEST_CASE("witnesses are minimal and correct") {
    SearchOptions o;
    o.parallel = false;
    const Target ln = Target::from_expression("ln", "ln(x)");
    const auto r = shortest(SearchTask{ln, 11, true, false}, o);
    REQUIRE(r.k == 7);
    CHECK(r.k_reached == 7);
    REQUIRE(!r.witnesses.empty());
    CHECK(r.witnesses.front().to_compact() == "11xE1EE");
    const Basis b = Basis::builtin("eml");
    for (const auto& w : r.witnesses) CHECK(sieve_match(b, w, ln));
    // Nothing smaller matches.
    for (int k = 1; k < 7; k += 2) {
      for (const auto& p : enumerate_expressions(b, k, std::vector<std::string>{"x"})) CHECK_FALSE(sieve_match(b, p, ln));
    }
  }

  TEST_CASE("non-trivial x") {
    SearchOptions o;
    o.parallel = false;
    const Target x = Target::from_expression("x", "x");
    CHECK(shortest(SearchTask{x, 15, true, false}, o).k == 1);
    const auto r = shortest(SearchTask{x, 15, true, true}, o);
    CHECK(r.k == 9);
    for (const auto& w : r.witnesses) {
      CHECK(std::abs(eval(w, EvalContext().bind("x", 0.37)) - 0.37) < 1e-14);
    }
  }

  TEST_CASE("serial and parallel search agree") {
    const Target t = Target::from_expression("x-y", "x - y");
    SearchOptions a, b;
    a.parallel = false;
    b.parallel = true;
    const auto ra = shortest(SearchTask{t, 13, true, false}, a);
    const auto rb = shortest(SearchTask{t, 13, true, false}, b);
    CHECK(ra.k == rb.k);
    CHECK(ra.witnesses == rb.witnesses);
    CHECK(ra.enumerated == rb.enumerated);
    CHECK(ra.pruned == rb.pruned);
  }

  TEST_CASE("canonical pruning keeps one program per value class") {
    PruneMemo memo(search_domain(Target::from_expression("exp", "exp(x)")));
    CHECK(canonical_prune(RpnProgram::parse_compact("x1E"), memo));
    CHECK_FALSE(canonical_prune(RpnProgram::parse_compact("x1E"), memo));
    // ln(exp(x)) = x at real positive points, so it falls in x's class.
    CHECK(canonical_prune(RpnProgram::parse_compact("x"), memo));
    CHECK_FALSE(canonical_prune(RpnProgram::parse_compact("11x1EE1EE"), memo));
    PruneMemo finite(search_domain(Target::from_expression("exp", "exp(x)")), false);
    // eml(1, 0) = e - ln 0 = +inf: never canonical without extended reals.
    const auto inf = RpnProgram::parse_compact("1111E1EEE");
    CHECK_FALSE(is_finite(finite.values(inf)[0]));
    CHECK_FALSE(canonical_prune(inf, finite));
    PruneMemo extended(search_domain(Target::from_expression("exp", "exp(x)")), true);
    CHECK(canonical_prune(inf, extended));
  }
}
