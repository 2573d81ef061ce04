#include <cstdlib>

#include "piff/ast.hpp"
#include "piff/token.hpp"

namespace piff {

namespace {

ExprPtr make(ExprKind kind, SourcePos pos) {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->pos = pos;
  return e;
}

// Raised on a syntax error after the diagnostic is recorded; the declaration
// loop catches it and resynchronises.
struct SyntaxError {};

class Parser {
public:
  Parser(std::vector<Token> toks, DiagnosticList& diags)
      : toks_(std::move(toks)), diags_(diags) {}

  std::optional<ModelAST> parse() {
    ModelAST ast;
    while (!at(Tok::End)) {
      try {
        parse_decl(ast);
      } catch (const SyntaxError&) {
        synchronise();
      }
    }
    if (diags_.has_errors()) return std::nullopt;
    return std::optional<ModelAST>(std::move(ast));
  }

private:
  std::vector<Token> toks_;
  DiagnosticList& diags_;
  size_t i_ = 0;

  const Token& cur() const { return toks_[i_]; }
  const Token& peek(size_t k = 1) const {
    return toks_[std::min(i_ + k, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  Token take() { return toks_[i_++]; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    ++i_;
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) {
    diags_.error(cur().pos, msg);
    throw SyntaxError{};
  }
  Token expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + token_name(k) + " " + what + ", found " +
                     (cur().kind == Tok::Ident || cur().kind == Tok::Number
                          ? "'" + cur().text + "'"
                          : token_name(cur().kind)));
    return take();
  }
  std::string expect_ident(const char* what) { return expect(Tok::Ident, what).text; }

  void synchronise() {
    // skip to the start of the next declaration
    while (!at(Tok::End)) {
      switch (cur().kind) {
        case Tok::KwAttype: case Tok::KwConst: case Tok::KwAttribute:
        case Tok::KwFunc: case Tok::KwUpdate: case Tok::KwState: case Tok::KwInit:
          return;
        case Tok::Semi:
        case Tok::RBrace:
          ++i_;
          return;
        default:
          ++i_;
      }
    }
  }

  void parse_decl(ModelAST& ast) {
    switch (cur().kind) {
      case Tok::KwAttype: parse_attype(ast); return;
      case Tok::KwConst: parse_const(ast); return;
      case Tok::KwAttribute: parse_attribute(ast); return;
      case Tok::KwFunc: parse_func(ast); return;
      case Tok::KwUpdate: parse_update(ast); return;
      case Tok::KwState: parse_state(ast); return;
      case Tok::KwInit: parse_init(ast); return;
      default:
        fail("expected a declaration (attype, const, attribute, func, update, state or init)");
    }
  }

  void parse_attype(ModelAST& ast) {
    AttrTypeDecl d;
    d.pos = take().pos;
    d.name = expect_ident("after 'attype'");
    expect(Tok::KwEnum, "in attype declaration");
    d.values.push_back(expect_ident("as enum value"));
    while (accept(Tok::Comma)) d.values.push_back(expect_ident("as enum value"));
    expect(Tok::Semi, "after attype declaration");
    ast.attr_types.push_back(std::move(d));
  }

  void parse_const(ModelAST& ast) {
    ConstDecl d;
    d.pos = take().pos;
    d.name = expect_ident("after 'const'");
    expect(Tok::Eq, "in const declaration");
    d.value = parse_const_expr();
    expect(Tok::Semi, "after const declaration");
    ast.consts.push_back(std::move(d));
  }

  void parse_attribute(ModelAST& ast) {
    AttrDecl d;
    d.pos = take().pos;
    d.name = expect_ident("after 'attribute'");
    expect(Tok::Colon, "in attribute declaration");
    d.type = expect_ident("as attribute type");
    expect(Tok::Semi, "after attribute declaration");
    ast.attributes.push_back(std::move(d));
  }

  void parse_func(ModelAST& ast) {
    FuncDecl d;
    d.pos = take().pos;
    d.name = expect_ident("after 'func'");
    expect(Tok::LParen, "in function signature");
    if (!at(Tok::RParen)) {
      do {
        std::string pname = expect_ident("as parameter name");
        expect(Tok::Colon, "in parameter declaration");
        d.params.emplace_back(pname, expect_ident("as parameter type"));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "after parameters");
    expect(Tok::Colon, "before result type");
    if (accept(Tok::KwFloat))
      d.result_type = "float";
    else
      d.result_type = expect_ident("as result type");
    expect(Tok::Semi, "after function signature");
    if (at(Tok::KwCase)) {
      take();
      // subject: the parameter tuple, checked against the signature
      std::vector<std::string> subject;
      if (accept(Tok::LParen)) {
        subject.push_back(expect_ident("as case subject"));
        while (accept(Tok::Comma)) subject.push_back(expect_ident("as case subject"));
        expect(Tok::RParen, "after case subject");
      } else {
        subject.push_back(expect_ident("as case subject"));
      }
      if (subject.size() != d.params.size()) {
        diags_.error(cur().pos, "case subject does not match the parameter list of '" + d.name + "'");
        throw SyntaxError{};
      }
      for (size_t k = 0; k < subject.size(); ++k) {
        if (subject[k] != d.params[k].first) {
          diags_.error(cur().pos, "case subject '" + subject[k] + "' does not match parameter '" +
                                      d.params[k].first + "'");
          throw SyntaxError{};
        }
      }
      expect(Tok::KwOf, "in case table");
      d.rows.push_back(parse_case_row(d.params.size()));
      while (accept(Tok::Semi)) {
        if (at(Tok::KwEndfunc)) break; // trailing separator
        d.rows.push_back(parse_case_row(d.params.size()));
      }
    } else {
      d.body = parse_value_expr();
    }
    expect(Tok::KwEndfunc, "to close the function");
    accept(Tok::Semi);
    ast.funcs.push_back(std::move(d));
  }

  CaseRow parse_case_row(size_t arity) {
    CaseRow row;
    row.pos = cur().pos;
    if (accept(Tok::LParen)) {
      row.keys.push_back(expect_ident("as case key"));
      while (accept(Tok::Comma)) row.keys.push_back(expect_ident("as case key"));
      expect(Tok::RParen, "after case key tuple");
    } else {
      row.keys.push_back(expect_ident("as case key"));
    }
    if (row.keys.size() != arity) {
      diags_.error(row.pos, "case key arity mismatch");
      throw SyntaxError{};
    }
    expect(Tok::Colon, "in case row");
    row.value = parse_value_expr();
    return row;
  }

  void parse_update(ModelAST& ast) {
    UpdateDecl d;
    d.pos = take().pos;
    d.name = expect_ident("after 'update'");
    while (!at(Tok::KwEndupdate)) {
      UpdateBranch br;
      br.pos = cur().pos;
      do {
        expect(Tok::KwMy, "in store assignment");
        expect(Tok::Dot, "after 'my'");
        std::string attr = expect_ident("as attribute name");
        expect(Tok::Assign, "in store assignment");
        br.assigns.emplace_back(attr, parse_value_expr());
      } while (accept(Tok::Comma));
      expect(Tok::KwWith, "before the branch probability");
      br.prob = parse_value_expr();
      d.branches.push_back(std::move(br));
      if (!accept(Tok::Semi)) break; // last branch may omit the separator
    }
    expect(Tok::KwEndupdate, "to close the update");
    accept(Tok::Semi);
    ast.updates.push_back(std::move(d));
  }

  void parse_state(ModelAST& ast) {
    StateEq eq;
    eq.pos = take().pos;
    eq.name = expect_ident("after 'state'");
    expect(Tok::LBrace, "to open the state equation");
    eq.summands.push_back(parse_summand());
    while (accept(Tok::Plus)) eq.summands.push_back(parse_summand());
    expect(Tok::RBrace, "to close the state equation");
    accept(Tok::Semi);
    ast.states.push_back(std::move(eq));
  }

  Summand parse_summand() {
    Summand s;
    s.pos = cur().pos;
    if (accept(Tok::KwRest)) {
      s.is_rest = true;
    } else {
      expect(Tok::LBracket, "to open the summand guard");
      s.guard = parse_bool_expr();
      expect(Tok::RBracket, "after the summand guard");
      s.prob = parse_prob_expr();
    }
    expect(Tok::DblColon, "before the summand action");
    s.action = parse_action();
    expect(Tok::Dot, "before the target state");
    s.target = expect_ident("as target state");
    return s;
  }

  Action parse_action() {
    Action a;
    a.pos = cur().pos;
    a.label = expect_ident("as action label");
    expect(Tok::Star, "after the action label");
    expect(Tok::LBracket, "to open the action predicate");
    a.pred = parse_bool_expr();
    expect(Tok::RBracket, "after the action predicate");
    if (accept(Tok::OutMark)) {
      a.is_output = true;
    } else if (accept(Tok::LParen)) {
      expect(Tok::RParen, "in input marker '()'");
      a.is_output = false;
    } else {
      fail("expected '<>' (output) or '()' (input) after the action predicate");
    }
    a.update = expect_ident("as store update name");
    return a;
  }

  void parse_init(ModelAST& ast) {
    InitDecl d;
    d.pos = take().pos;
    Token n = expect(Tok::Ident, "('N') after 'init'");
    if (n.text != "N") {
      diags_.error(n.pos, "expected 'N = <count>' after 'init'");
      throw SyntaxError{};
    }
    expect(Tok::Eq, "in the population size clause");
    d.total = parse_count();
    expect(Tok::Semi, "after the population size");
    while (at(Tok::LParen)) {
      InitEntry e;
      e.pos = take().pos;
      e.state = expect_ident("as initial state");
      while (accept(Tok::Comma)) {
        std::string attr = expect_ident("as attribute name");
        expect(Tok::Eq, "in initial store literal");
        e.assigns.emplace_back(attr, expect_ident("as attribute value"));
      }
      expect(Tok::RParen, "after the initial store literal");
      expect(Tok::Star, "before the multiplicity");
      e.count = parse_count();
      expect(Tok::Semi, "after the init entry");
      d.entries.push_back(std::move(e));
    }
    if (ast.init) {
      diags_.error(d.pos, "duplicate init declaration");
      throw SyntaxError{};
    }
    ast.init = std::move(d);
  }

  long parse_count() {
    Token t = expect(Tok::Number, "as a population count");
    if (t.text.find('.') != std::string::npos) {
      diags_.error(t.pos, "population counts must be integers");
      throw SyntaxError{};
    }
    return std::strtol(t.text.c_str(), nullptr, 10);
  }

  // ---- expressions ----

  ExprPtr number_atom() {
    Token t = take();
    auto e = make(ExprKind::Number, t.pos);
    e->text = t.text;
    e->num = rational_from_decimal(t.text);
    return e;
  }

  ExprPtr ident_atom() {
    Token t = take();
    auto e = make(ExprKind::Ident, t.pos);
    e->name = t.text;
    return e;
  }

  // constant definitions: arithmetic over literals, earlier consts and enum values
  ExprPtr parse_const_expr() { return parse_const_add(); }

  ExprPtr parse_const_add() {
    auto lhs = parse_const_mul();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      Token op = take();
      auto node = make(ExprKind::Call, op.pos);
      node->name = op.kind == Tok::Plus ? "+" : "-";
      node->args.push_back(std::move(lhs));
      node->args.push_back(parse_const_mul());
      lhs = std::move(node);
    }
    return lhs;
  }

  ExprPtr parse_const_mul() {
    auto lhs = parse_const_atom();
    while (at(Tok::Star) || at(Tok::Slash)) {
      Token op = take();
      auto node = make(ExprKind::Call, op.pos);
      node->name = op.kind == Tok::Star ? "*" : "/";
      node->args.push_back(std::move(lhs));
      node->args.push_back(parse_const_atom());
      lhs = std::move(node);
    }
    return lhs;
  }

  ExprPtr parse_const_atom() {
    if (at(Tok::Number)) return number_atom();
    if (at(Tok::Ident)) return ident_atom();
    if (accept(Tok::Minus)) {
      auto node = make(ExprKind::Call, cur().pos);
      node->name = "neg";
      node->args.push_back(parse_const_atom());
      return node;
    }
    if (accept(Tok::LParen)) {
      auto e = parse_const_expr();
      expect(Tok::RParen, "in constant expression");
      return e;
    }
    fail("expected a constant expression");
  }

  // value expressions: literals, names, my.attr, function application
  ExprPtr parse_value_expr() {
    if (at(Tok::Number)) return number_atom();
    if (at(Tok::KwTrue) || at(Tok::KwFalse)) {
      Token t = take();
      auto e = make(ExprKind::BoolLit, t.pos);
      e->bval = t.kind == Tok::KwTrue;
      return e;
    }
    if (at(Tok::KwMy)) return parse_my_attr();
    if (at(Tok::Ident)) {
      if (peek().kind == Tok::LParen) {
        Token callee = take();
        take(); // '('
        auto e = make(ExprKind::Call, callee.pos);
        e->name = callee.text;
        if (!at(Tok::RParen)) {
          e->args.push_back(parse_value_expr());
          while (accept(Tok::Comma)) e->args.push_back(parse_value_expr());
        }
        expect(Tok::RParen, "after function arguments");
        return e;
      }
      return ident_atom();
    }
    fail("expected a value expression");
  }

  ExprPtr parse_my_attr() {
    Token my = expect(Tok::KwMy, "in attribute reference");
    expect(Tok::Dot, "after 'my'");
    auto e = make(ExprKind::MyAttr, my.pos);
    e->name = expect_ident("as attribute name");
    return e;
  }

  // boolean expressions: guards and communication predicates
  ExprPtr parse_bool_expr() {
    auto lhs = parse_bool_term();
    while (at(Tok::AndAnd)) {
      Token op = take();
      auto node = make(ExprKind::And, op.pos);
      node->args.push_back(std::move(lhs));
      node->args.push_back(parse_bool_term());
      lhs = std::move(node);
    }
    return lhs;
  }

  ExprPtr parse_bool_term() {
    if (at(Tok::Not)) {
      Token op = take();
      auto node = make(ExprKind::Not, op.pos);
      node->args.push_back(parse_bool_term());
      return node;
    }
    if (at(Tok::LParen)) {
      take();
      auto e = parse_bool_expr();
      expect(Tok::RParen, "in boolean expression");
      return e;
    }
    if (at(Tok::KwTrue) || at(Tok::KwFalse)) {
      Token t = take();
      auto e = make(ExprKind::BoolLit, t.pos);
      e->bval = t.kind == Tok::KwTrue;
      return e;
    }
    // comparison
    auto lhs = parse_cmp_operand();
    CmpOp op;
    switch (cur().kind) {
      case Tok::Eq: op = CmpOp::Eq; break;
      case Tok::Ne: op = CmpOp::Ne; break;
      case Tok::Le: op = CmpOp::Le; break;
      case Tok::Lt: op = CmpOp::Lt; break;
      case Tok::Ge: op = CmpOp::Ge; break;
      case Tok::Gt: op = CmpOp::Gt; break;
      default: fail("expected a comparison operator");
    }
    Token opt = take();
    auto node = make(ExprKind::Cmp, opt.pos);
    node->cmp = op;
    node->args.push_back(std::move(lhs));
    node->args.push_back(parse_cmp_operand());
    return node;
  }

  ExprPtr parse_cmp_operand() {
    if (at(Tok::KwFrc)) return parse_frc(); // syntactically fine, validation rejects it
    return parse_value_expr();              // literals, names, my.attr, function calls
  }

  ExprPtr parse_frc() {
    Token kw = expect(Tok::KwFrc, "in occupancy term");
    expect(Tok::LParen, "after 'frc'");
    auto e = make(ExprKind::Frc, kw.pos);
    // single identifier: a state-fraction term; anything else: a store predicate
    if (at(Tok::Ident) && peek().kind == Tok::RParen) {
      e->name = take().text;
    } else {
      e->args.push_back(parse_bool_expr());
    }
    expect(Tok::RParen, "after the frc argument");
    return e;
  }

  // restricted probability grammar: e_p | e_p * frc(..) | frc(..)
  ProbExpr parse_prob_expr() {
    ProbExpr p;
    if (at(Tok::KwFrc)) {
      p.frc = parse_frc();
      return p;
    }
    if (at(Tok::Number))
      p.coeff = number_atom();
    else if (at(Tok::Ident))
      p.coeff = ident_atom();
    else
      fail("expected a probability expression (constant and/or frc term)");
    if (accept(Tok::Star)) {
      if (!at(Tok::KwFrc))
        fail("only a single frc factor may follow the probability constant");
      p.frc = parse_frc();
    }
    return p;
  }
};

} // namespace

ParseResult parse_model(std::string_view source, std::string file_name) {
  ParseResult result;
  result.diags.file = std::move(file_name);
  auto tokens = tokenize(source, result.diags);
  Parser parser(std::move(tokens), result.diags);
  auto ast = parser.parse();
  if (ast) {
    ast->source_name = result.diags.file;
    result.ast = std::move(ast);
  }
  return result;
}

} // namespace piff
