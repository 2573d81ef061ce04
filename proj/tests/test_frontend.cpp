#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frontend_util.hpp"
#include "piff/token.hpp"

using namespace piff;

TEST_CASE("lexer: keywords, operators and positions") {
  DiagnosticList diags;
  diags.file = "lex.piff";
  auto toks = tokenize("state S {\n  [x <= 2] 0.5 :: a*[true]<> U . S\n};", diags);
  CHECK(diags.items.empty());
  REQUIRE(toks.size() >= 5);
  CHECK(toks[0].kind == Tok::KwState);
  CHECK(toks[1].kind == Tok::Ident);
  CHECK(toks[1].text == "S");
  CHECK(toks[2].kind == Tok::LBrace);
  CHECK(toks[3].kind == Tok::LBracket);
  CHECK(toks[3].pos.line == 2);
  CHECK(toks[3].pos.col == 3);
  CHECK(toks[5].kind == Tok::Le);
  CHECK(toks.back().kind == Tok::End);

  // both comment styles vanish, tracking lines
  DiagnosticList d2;
  d2.file = "lex.piff";
  auto t2 = tokenize("// line comment\n/* block\n   spanning */ attype", d2);
  CHECK(d2.items.empty());
  REQUIRE(t2.size() == 2);
  CHECK(t2[0].kind == Tok::KwAttype);
  CHECK(t2[0].pos.line == 3);

  DiagnosticList d3;
  d3.file = "lex.piff";
  tokenize("const @ = 1;", d3);
  CHECK(has_error_containing(d3, "illegal character '@'"));

  DiagnosticList d4;
  d4.file = "lex.piff";
  tokenize("/* never closed", d4);
  CHECK(has_error_containing(d4, "unterminated block comment"));
}

TEST_CASE("parser: print/reparse round-trip is the identity on the bundled models") {
  for (const auto& path : {si_path(), relay_path()}) {
    CAPTURE(path);
    auto first = parse_model(read_file(path), path);
    REQUIRE_MESSAGE(first.ast.has_value(), first.diags.render());
    std::string printed = print_model(*first.ast);
    auto second = parse_model(printed, "printed");
    REQUIRE_MESSAGE(second.ast.has_value(), second.diags.render());
    CHECK_MESSAGE(equal(*first.ast, *second.ast), printed);
  }
}

TEST_CASE("parser: recovers at declaration boundaries and reports every error") {
  auto r = parse_model("attype T enum V1 V2;\nconst c = ;\n", "bad.piff");
  CHECK(!r.ast.has_value());
  CHECK(r.diags.items.size() >= 2);
  // positions point at the offending line
  CHECK(r.diags.items[0].pos.line == 1);
  CHECK(r.diags.items[1].pos.line == 2);
}

TEST_CASE("parser: decimal literals survive exactly") {
  auto r = check_source(
      "attype T enum V1;\n"
      "const c = 0.6;\n"
      "attribute a : T;\n"
      "update U my.a := my.a with 1 endupdate;\n"
      "state Z { [true] c :: go*[false]<> U . Z };\n"
      "init N = 10; (Z, a = V1) * 10;\n");
  REQUIRE_MESSAGE(r.model.has_value(), r.diags.render());
  const Value& c = r.model->consts.at("c");
  REQUIRE(c.kind == Value::Kind::Rat);
  CHECK(c.rat == Rational(3) / 5);
}

TEST_CASE("validator: accepts the SI model and freezes its constants") {
  CheckedModel m = load_model(si_path());
  CHECK(m.enum_types.size() == 1);
  CHECK(m.enum_types[0].values == std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(m.attrs.size() == 1);
  CHECK(m.states.size() == 2);
  CHECK(m.state_idx.at("S") == 0);
  CHECK(m.state_idx.at("I") == 1);
  CHECK(m.funcs.size() == 9);
  CHECK(m.updates.size() == 1);

  CHECK(m.consts.at("H").rat == Rational(3) / 5);
  CHECK(m.consts.at("L").rat == Rational(2) / 5);
  CHECK(m.consts.at("Hdiv2").rat == Rational(3) / 10);
  CHECK(m.consts.at("Ldiv2").rat == Rational(1) / 5);
  CHECK(m.consts.at("ii").rat == Rational(4) / 5);
  CHECK(m.consts.at("ir").rat == Rational(1) / 5);

  CHECK(m.init_total == 100);
  REQUIRE(m.init_entries.size() == 2);
  CHECK(std::get<0>(m.init_entries[0]) == 0);
  CHECK(std::get<2>(m.init_entries[0]) == 90);
  CHECK(std::get<0>(m.init_entries[1]) == 1);
  CHECK(std::get<2>(m.init_entries[1]) == 10);
  CHECK(m.store_text(std::get<1>(m.init_entries[0])) == "loc=A");
}

TEST_CASE("validator: action occurrence ids follow source order") {
  CheckedModel m = load_model(si_path());
  CHECK(!m.annotated);
  annotate_actions(m);
  REQUIRE(m.annotated);
  REQUIRE(m.annotations.size() == 2);
  CHECK(m.annotations[0] == std::vector<int>{1, 2});
  CHECK(m.annotations[1] == std::vector<int>{3, 4});
  annotate_actions(m); // idempotent
  CHECK(m.annotations[0] == std::vector<int>{1, 2});
  CHECK(m.annotations[1] == std::vector<int>{3, 4});
}

namespace {

// a minimal healthy model; the rejection battery splices broken pieces
// into copies of it
const char* kHead = "attype T enum V1, V2;\nattribute a : T;\n";
const char* kTail =
    "update U my.a := my.a with 1 endupdate;\n"
    "state Z { [true] 1 :: go*[false]<> U . Z };\n"
    "init N = 10; (Z, a = V1) * 10;\n";

std::string model_with(const std::string& extra) { return kHead + extra + kTail; }

} // namespace

TEST_CASE("validator: the healthy skeleton itself passes") {
  auto r = check_source(model_with(""));
  CHECK_MESSAGE(r.model.has_value(), r.diags.render());
}

TEST_CASE("validator: rejection battery") {
  struct Bad {
    const char* what;
    std::string src;
    const char* needle;
  };
  const Bad cases[] = {
      {"duplicate attype", model_with("attype T enum V3;\n"), "attype 'T' is declared twice"},
      {"enum value reuse across attypes", model_with("attype T2 enum V1;\n"),
       "already declared by attype 'T'"},
      {"attribute of unknown type", model_with("attribute b : Nope;\n"),
       "needs a declared attype"},
      {"duplicate const", model_with("const c = 1;\nconst c = 2;\n"),
       "const 'c' is declared twice"},
      {"const dividing by zero", model_with("const c = 1 / 0;\n"), "division by zero"},
      {"unknown name in const", model_with("const c = d + 1;\n"),
       "unknown name 'd' in a constant expression"},
      {"const forward reference", model_with("const c = d;\nconst d = 1;\n"),
       "unknown name 'd'"},
      {"duplicate function", model_with("func F(x : T) : T; x endfunc;\n"
                                        "func F(x : T) : T; x endfunc;\n"),
       "function 'F' is declared twice"},
      {"case key of wrong type", model_with("func F(x : T) : T; case x of Nope : V1 endfunc;\n"),
       "case key 'Nope' is not a value of attype 'T'"},
      {"duplicate case row",
       model_with("func F(x : T) : T; case x of V1 : V1; V1 : V2; V2 : V1 endfunc;\n"),
       "two case rows for the same values"},
      {"mutual recursion", model_with("func F(x : T) : T; G(x) endfunc;\n"
                                      "func G(x : T) : T; F(x) endfunc;\n"),
       "is recursive"},
      {"self recursion", model_with("func F(x : T) : T; F(x) endfunc;\n"), "is recursive"},
      {"update of undeclared attribute",
       model_with("update V my.b := V1 with 1 endupdate;\n"),
       "assigns undeclared attribute 'b'"},
      {"update assigning twice in a branch",
       model_with("update V my.a := V1, my.a := V2 with 1 endupdate;\n"),
       "assigns attribute 'a' twice in one branch"},
      {"update mass below one", model_with("update V my.a := V1 with 0.5 endupdate;\n"),
       "sum to 1/2, expected 1"},
      {"update branch probability above one",
       model_with("update V my.a := V1 with 2 endupdate;\n"), "outside [0,1]"},
      {"occupancy in a guard",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [frc(Z) <= 1] 1 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "occupancy term 'frc' is not allowed in a guard"},
      {"occupancy in a communication predicate",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[frc(Z) <= 1]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "occupancy term 'frc' is not allowed in a communication predicate"},
      {"bare attribute in a guard",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [a = V1] 1 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "write 'my.a' for the local value"},
      {"bare attribute nested in a predicate call",
       kHead + std::string("func F(x : T) : T; x endfunc;\n"
                           "update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[F(a) = V1]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "write 'my.a' for the local value"},
      {"numeric coefficient above one",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 2 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "outside [0,1]"},
      {"non-numeric coefficient",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] V1 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "must be a number or a numeric const"},
      {"occupancy of an unknown state",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] frc(Q) :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "frc(Q) does not name a declared state"},
      {"undeclared target state",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[false]<> U . Nope };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "targets undeclared state 'Nope'"},
      {"two rest summands",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { rest :: go*[false]<> U . Z + rest :: ho*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "more than one rest summand"},
      {"input action on a rest summand",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { rest :: go*[true]() U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "rest summand must carry an output action"},
      {"action with undeclared update",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[false]<> Missing . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "uses undeclared update 'Missing'"},
      {"missing init",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[false]<> U . Z };\n"),
       "no init declaration"},
      {"init counts off",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 4;\n"),
       "sum to 4, declared population is 10"},
      {"init entry missing an attribute",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z) * 10;\n"),
       "does not assign attribute 'a'"},
      {"init entry with a foreign value",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = Nope) * 10;\n"),
       "'Nope' is not a value of attype 'T'"},
      {"duplicate init entry",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 5; (Z, a = V1) * 5;\n"),
       "duplicate init entry"},
      {"init entry for unknown state",
       kHead + std::string("update U my.a := my.a with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Nope, a = V1) * 10;\n"),
       "undeclared state 'Nope'"},
      {"incomplete case table caught over the full store space",
       kHead + std::string("func F(x : T) : T; case x of V1 : V2 endfunc;\n"
                           "update U my.a := F(my.a) with 1 endupdate;\n"
                           "state Z { [true] 1 :: go*[false]<> U . Z };\n"
                           "init N = 10; (Z, a = V1) * 10;\n"),
       "case table of 'F' has no row for (V2)"},
  };
  for (const auto& bad : cases) {
    CAPTURE(bad.what);
    auto r = check_source(bad.src);
    CHECK_MESSAGE(!r.model.has_value(), bad.what);
    CHECK_MESSAGE(has_error_containing(r.diags, bad.needle),
                  bad.what << " — diagnostics were:\n" << r.diags.render());
  }
}

TEST_CASE("validator: comparisons across attypes are reported with the store") {
  auto r = check_source(
      "attype T enum V1, V2;\nattype T2 enum W1;\n"
      "attribute a : T;\nattribute b : T2;\n"
      "update U my.a := my.a with 1 endupdate;\n"
      "state Z { [my.a = W1] 1 :: go*[false]<> U . Z };\n"
      "init N = 10; (Z, a = V1, b = W1) * 10;\n");
  CHECK(!r.model.has_value());
  CHECK_MESSAGE(has_error_containing(r.diags, "different enum types"), r.diags.render());
  CHECK_MESSAGE(has_error_containing(r.diags, "guard of summand 1 of state 'Z'"),
                r.diags.render());
}
