// Flat population model: expression helpers, the .ff text format, and the
// translation from a validated agent model to the flat form.

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "frontend_util.hpp"
#include "piff/flatspec.hpp"
#include "piff/quadform.hpp"
#include "piff/translate.hpp"

using namespace piff;

namespace {

// Independent copy of the predicate fingerprint used in flat state names,
// so the naming scheme is pinned down by the tests rather than assumed.
std::string pdigest(const std::string& canon) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 16777619u;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%08x", h);
  return buf;
}

CheckedModel load_inline(const std::string& src) {
  auto checked = check_source(src);
  REQUIRE_MESSAGE(checked.model.has_value(), checked.diags.render());
  return std::move(*checked.model);
}

RawPoly row_poly(const FlatSpec& spec, const FlatState& s) {
  const int n = static_cast<int>(spec.states.size());
  RawPoly acc = RawPoly::constant_poly(n, 0);
  for (const FlatSummand& sm : s.summands) acc += flat_expr_poly(spec.actions[sm.action].def, n);
  return acc;
}

// every row of the flat model must carry total probability one as a
// polynomial identity on the occupancy simplex
void require_rows_stochastic(const FlatSpec& spec) {
  const int n = static_cast<int>(spec.states.size());
  const QuadForm unit = QuadForm::one(n);
  for (const FlatState& s : spec.states) {
    INFO("state ", s.name);
    CHECK(QuadForm::canonicalize(row_poly(spec, s)) == unit);
  }
}

int state_of(const FlatSpec& spec, const std::string& name) {
  auto it = spec.state_idx.find(name);
  REQUIRE_MESSAGE(it != spec.state_idx.end(), "no flat state named " << name);
  return it->second;
}

} // namespace

TEST_CASE("flat expression helpers normalize as they build") {
  FFExpr f = FFExpr::frc_sum({3, 1, 3, 0});
  CHECK(f.members == std::vector<int>{0, 1, 3});

  CHECK(FFExpr::add({}).k == FFExpr::K::Const);
  CHECK(FFExpr::add({}).c == 0);
  FFExpr single = FFExpr::add({FFExpr::constant(Rational(2, 7))});
  CHECK(single.k == FFExpr::K::Const);
  CHECK(single.c == Rational(2, 7));

  // constant folding and unit elimination in products
  FFExpr prod = FFExpr::mul(FFExpr::constant(Rational(1, 2)), FFExpr::constant(Rational(2, 3)));
  CHECK(prod.k == FFExpr::K::Const);
  CHECK(prod.c == Rational(1, 3));
  FFExpr kept = FFExpr::mul(FFExpr::constant(1), FFExpr::frc_sum({2}));
  CHECK(kept.k == FFExpr::K::FrcSum);

  const int dim = 4;
  RawPoly scaled = flat_expr_poly(
      FFExpr::mul(FFExpr::constant(Rational(1, 5)), FFExpr::frc_sum({0, 2})), dim);
  RawPoly expect = RawPoly::frc_sum(dim, {0, 2}).scaled(Rational(1, 5));
  CHECK((scaled - expect).is_zero());

  RawPoly rest = flat_expr_poly(
      FFExpr::sub(FFExpr::constant(1), FFExpr::frc_sum({1, 3})), dim);
  CHECK(rest.constant == 1);
  CHECK(rest.linear.at(1) == -1);
  CHECK(rest.degree() == 1);

  RawPoly pair = flat_expr_poly(FFExpr::mul(FFExpr::frc_sum({0}), FFExpr::frc_sum({1, 2})), dim);
  CHECK(pair.degree() == 2);

  FFExpr cubic = FFExpr::mul(FFExpr::mul(FFExpr::frc_sum({0}), FFExpr::frc_sum({1})),
                             FFExpr::frc_sum({2}));
  CHECK_THROWS_AS(flat_expr_poly(cubic, dim), DegreeOverflow);
}

TEST_CASE("flat format survives a print/parse round trip") {
  FlatSpec spec;
  spec.states.resize(3);
  spec.states[0].name = "Hub@x=1@eps";
  spec.states[1].name = "Sink";
  spec.states[2].name = "Hub@x=1@init";
  spec.actions.push_back({"go_1_0", FFExpr::constant(Rational(1, 2))});
  spec.actions.push_back(
      {"drain_2_1", FFExpr::sub(FFExpr::constant(1), FFExpr::frc_sum({0, 1}))});
  spec.states[0].summands = {{0, 1}, {1, 2}};
  spec.states[2].summands = {{0, 1}, {1, 2}};
  spec.init = {{2, 3}, {1, 1}};

  std::string text = print_ff(spec);
  FFParseResult back = parse_ff(text, "round.ff");
  REQUIRE_MESSAGE(back.spec.has_value(), back.diags.render());
  const FlatSpec& b = *back.spec;

  REQUIRE(b.states.size() == 3);
  REQUIRE(b.actions.size() == 2);
  CHECK(b.states[0].name == "Hub@x=1@eps");
  CHECK(b.states[1].summands.empty());
  CHECK(b.states[2].summands.size() == 2);
  CHECK(b.states[2].summands[0].action == 0);
  CHECK(b.states[2].summands[0].target == 1);
  CHECK(b.init == std::vector<std::pair<int, long>>{{2, 3}, {1, 1}});
  CHECK(b.population() == 4);

  // metadata is recovered from well-formed names and left empty otherwise
  REQUIRE(b.states[0].agent.has_value());
  CHECK(*b.states[0].agent == "Hub");
  REQUIRE(b.states[0].store.has_value());
  CHECK(b.states[0].store->at("x") == "1");
  CHECK(!b.states[1].agent.has_value());
  CHECK(!b.states[1].store.has_value());

  // action definitions came through as the same polynomials
  CHECK((flat_expr_poly(b.actions[0].def, 3) - flat_expr_poly(spec.actions[0].def, 3)).is_zero());
  CHECK((flat_expr_poly(b.actions[1].def, 3) - flat_expr_poly(spec.actions[1].def, 3)).is_zero());

  // printing the reparsed model reproduces the text byte for byte
  CHECK(print_ff(b) == text);
}

TEST_CASE("flat format parser reports malformed input") {
  auto rejects = [](const std::string& src, const std::string& needle) {
    FFParseResult r = parse_ff(src, "bad.ff");
    INFO("source: ", src);
    INFO("diagnostics: ", r.diags.render());
    CHECK(!r.spec.has_value());
    CHECK(has_error_containing(r.diags, needle));
  };

  rejects("state S { foo.S };", "unknown action 'foo'");
  rejects("action a: 1; state S { a.T };", "unknown target state 'T'");
  rejects("state S {}; state S {};", "state 'S' is declared twice");
  rejects("action a: 1; action a: 2; state S {};", "action 'a' is declared twice");
  rejects("action a: frc(Z); state S { a.S };", "frc of unknown state 'Z'");
  rejects("state S {}; init T:5;", "init names unknown state 'T'");
  rejects("state S {}; init S:2, S:3;", "appears twice in init");
  rejects("state S {}; init S:2.5;", "agent counts must be integers");
  rejects("action a: 1/0; state S { a.S };", "zero denominator");
  rejects("blah;", "expected 'action', 'state' or 'init'");
  rejects("state S {}; %", "unexpected character '%'");
}

TEST_CASE("hand-checked exchange model flattens to the expected text") {
  // One attribute value, so a single store: P emits tok with rate 1/4 and
  // moves to Q; Q absorbs a tok and returns to P. Every piece of the flat
  // model below (state grid, outbox fingerprints, action names, rate
  // expressions, pruning) was worked out by hand from those rules.
  CheckedModel m = load_inline(
      "attype U enum O;\n"
      "attribute u : U;\n"
      "const a = 0.25;\n"
      "update Id\n"
      "  my.u := my.u with 1;\n"
      "endupdate;\n"
      "state P {\n"
      "  [true] a :: tok*[true]<> Id . Q +\n"
      "  rest :: np*[false]<> Id . P\n"
      "};\n"
      "state Q {\n"
      "  [true] 1 :: tok*[true]() Id . P +\n"
      "  rest :: wt*[false]<> Id . Q\n"
      "};\n"
      "init N = 4;\n"
      "(P, u = O) * 2;\n"
      "(Q, u = O) * 2;\n");

  FlatSpec spec = translate(m);

  const std::string tt = pdigest("tt"), ff = pdigest("ff");
  const std::string peps = "P@u=O@eps";
  const std::string pnp = "P@u=O@u=O|" + ff + "|np";
  const std::string qtok = "Q@u=O@u=O|" + tt + "|tok";
  const std::string qwt = "Q@u=O@u=O|" + ff + "|wt";

  std::string expected =
      "# flat population model: 6 states, 4 actions, population 4\n"
      "action tok_1_0: 1/4;\n"
      "action np_2_1: (1-1/4);\n"
      "action tok_3_2: frc(" + qtok + ");\n"
      "action wt_4_3: (1-frc(" + qtok + "));\n"
      "state " + peps + " {\n"
      "  tok_1_0." + qtok + " +\n"
      "  np_2_1." + pnp + "\n"
      "};\n"
      "state " + pnp + " {\n"
      "  tok_1_0." + qtok + " +\n"
      "  np_2_1." + pnp + "\n"
      "};\n"
      "state " + qtok + " {\n"
      "  tok_3_2." + peps + " +\n"
      "  wt_4_3." + qwt + "\n"
      "};\n"
      "state " + qwt + " {\n"
      "  tok_3_2." + peps + " +\n"
      "  wt_4_3." + qwt + "\n"
      "};\n"
      "state P@u=O@init {\n"
      "  tok_1_0." + qtok + " +\n"
      "  np_2_1." + pnp + "\n"
      "};\n"
      "state Q@u=O@init {\n"
      "  tok_3_2." + peps + " +\n"
      "  wt_4_3." + qwt + "\n"
      "};\n"
      "init P@u=O@init:2, Q@u=O@init:2;\n";

  CHECK(print_ff(spec) == expected);
  require_rows_stochastic(spec);

  // without pruning the full grid appears: 2 agent states x 1 store x
  // (empty + 3 full outboxes) plus the two init states
  TranslateOptions keep_all;
  keep_all.prune = false;
  FlatSpec full = translate(m, keep_all);
  CHECK(full.states.size() == 10);
  CHECK(full.actions.size() == 4);
  require_rows_stochastic(full);
  // the tok-laden P variant is only reachable as a rumor, never as a state
  CHECK(full.state_idx.count("P@u=O@u=O|" + tt + "|tok") == 1);
  CHECK(spec.state_idx.count("P@u=O@u=O|" + tt + "|tok") == 0);
}

TEST_CASE("grid walk model translates with exact rates") {
  CheckedModel m = load_model(si_path());

  FlatSpec spec = translate(m);
  const int n = static_cast<int>(spec.states.size());
  CHECK(n == 38);
  CHECK(spec.actions.size() == 48);
  CHECK(spec.population() == 100);
  require_rows_stochastic(spec);

  // init mass sits on the dedicated init states
  REQUIRE(spec.init.size() == 2);
  CHECK(spec.states[spec.init[0].first].name == "S@loc=A@init");
  CHECK(spec.init[0].second == 90);
  CHECK(spec.states[spec.init[1].first].name == "I@loc=A@init");
  CHECK(spec.init[1].second == 10);

  // agent-wise composition of the reachable flat space
  int s_states = 0, i_states = 0;
  for (const FlatState& s : spec.states) {
    REQUIRE(s.agent.has_value());
    REQUIRE(s.store.has_value());
    if (*s.agent == "S") ++s_states;
    if (*s.agent == "I") ++i_states;
    CHECK(s.summands.size() == 6); // 2 summands, 3 movement targets each
  }
  CHECK(s_states == 25);
  CHECK(i_states == 13);

  // infection from a susceptible at site A into site B carries rate
  // frc(all infected states) * P(move A -> B) = frc(I...) * 1/5
  std::vector<int> infected;
  for (int i = 0; i < n; ++i)
    if (*spec.states[i].agent == "I") infected.push_back(i);
  const std::string target_name = "I@loc=B@loc=A|" + pdigest("ff") + "|inf";
  const FlatState& from = spec.states[state_of(spec, "S@loc=A@init")];
  int hits = 0;
  for (const FlatSummand& sm : from.summands) {
    if (spec.states[sm.target].name != target_name) continue;
    ++hits;
    CHECK(spec.actions[sm.action].name.rfind("inf_", 0) == 0);
    RawPoly expect = RawPoly::frc_sum(n, infected).scaled(Rational(1, 5));
    CHECK((flat_expr_poly(spec.actions[sm.action].def, n) - expect).is_zero());
  }
  CHECK(hits == 1);

  // the behaviour of a component never depends on what sits in its outbox:
  // all reachable variants of (S, loc=A) share one summand list
  const FlatState& ref = spec.states[state_of(spec, "S@loc=A@init")];
  int variants = 0;
  for (const FlatState& s : spec.states)
    if (*s.agent == "S" && s.store->at("loc") == "A") {
      ++variants;
      CHECK(s.summands == ref.summands);
    }
  CHECK(variants == 7); // init + 3 nsc senders + 3 rec senders

  // translated text reparses to the same model and is print-stable
  std::string text = print_ff(spec);
  FFParseResult back = parse_ff(text, "si.ff");
  REQUIRE_MESSAGE(back.spec.has_value(), back.diags.render());
  CHECK(back.spec->states.size() == spec.states.size());
  CHECK(back.spec->init == spec.init);
  CHECK(print_ff(*back.spec) == text);
}

TEST_CASE("grid walk translation keeps the whole grid when asked") {
  CheckedModel m = load_model(si_path());
  TranslateOptions keep_all;
  keep_all.prune = false;
  FlatSpec full = translate(m, keep_all);

  // 2 agent states x 4 stores x (empty + 12 full outboxes) + 2 init states
  CHECK(full.states.size() == 106);
  CHECK(full.actions.size() == 48);
  require_rows_stochastic(full);
  CHECK(full.state_idx.count("S@loc=A@eps") == 1);

  // outbox independence across the whole grid, init states included
  std::map<std::pair<std::string, std::string>, std::vector<FlatSummand>> seen;
  for (const FlatState& s : full.states) {
    auto key = std::make_pair(*s.agent, s.store->at("loc"));
    auto [it, fresh] = seen.emplace(key, s.summands);
    if (!fresh) CHECK(s.summands == it->second);
  }
  CHECK(seen.size() == 8);

  // translation is deterministic
  CheckedModel again = load_model(si_path());
  CHECK(print_ff(translate(again, keep_all)) == print_ff(full));
  CHECK(print_ff(translate(again)) == print_ff(translate(m)));
}

TEST_CASE("relay model translates its communication structure") {
  CheckedModel m = load_model(relay_path());

  TranslateOptions keep_all;
  keep_all.prune = false;
  FlatSpec full = translate(m, keep_all);
  CHECK(full.states.size() == 30); // 2 x 2 x 7 grid + 2 init states
  CHECK(full.actions.size() == 13);
  require_rows_stochastic(full);

  FlatSpec spec = translate(m);
  const int n = static_cast<int>(spec.states.size());
  CHECK(n == 14);
  CHECK(spec.actions.size() == 13);
  CHECK(spec.population() == 10);
  require_rows_stochastic(spec);

  // receiving couples two occupancy measures, so some rate is degree 2
  int quadratic = 0;
  for (const FlatAction& a : spec.actions)
    if (flat_expr_poly(a.def, n).degree() == 2) ++quadratic;
  CHECK(quadratic > 0);

  // a busy node in zone X drains pings at recv_p * frc(zone X states)
  // * frc(outstanding pings addressed to zone X)
  std::vector<int> zone_x, ping_x;
  const std::string ping_tag = "@zone=X|" + pdigest("(zone=X)") + "|ping";
  for (int i = 0; i < n; ++i) {
    const FlatState& s = spec.states[i];
    if (s.store.has_value() && s.store->at("zone") == "X") zone_x.push_back(i);
    const std::string& nm = s.name;
    if (nm.size() >= ping_tag.size() &&
        nm.compare(nm.size() - ping_tag.size(), ping_tag.size(), ping_tag) == 0)
      ping_x.push_back(i);
  }
  REQUIRE(!ping_x.empty());

  const std::string busy_x = "Busy@zone=X@zone=Y|" + pdigest("ff") + "|busy";
  const FlatState& busy = spec.states[state_of(spec, busy_x)];
  int receives = 0;
  for (const FlatSummand& sm : busy.summands) {
    const FlatAction& a = spec.actions[sm.action];
    if (a.name.rfind("ping_", 0) != 0) continue;
    ++receives;
    CHECK(spec.states[sm.target].name == "Idle@zone=X@eps");
    RawPoly expect = RawPoly::frc_sum(n, zone_x)
                         .scaled(Rational(1, 2))
                         .mul(RawPoly::frc_sum(n, ping_x));
    CHECK((flat_expr_poly(a.def, n) - expect).is_zero());
  }
  CHECK(receives == 1);

  std::string text = print_ff(spec);
  FFParseResult back = parse_ff(text, "relay.ff");
  REQUIRE_MESSAGE(back.spec.has_value(), back.diags.render());
  CHECK(print_ff(*back.spec) == text);
}
