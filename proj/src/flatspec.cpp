#include "piff/flatspec.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>
#include <tuple>

#include "piff/rational.hpp"

namespace piff {

FFExpr FFExpr::constant(Rational r) {
  FFExpr e;
  e.k = K::Const;
  e.c = std::move(r);
  return e;
}

FFExpr FFExpr::frc_sum(std::vector<int> idx) {
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  FFExpr e;
  e.k = K::FrcSum;
  e.members = std::move(idx);
  return e;
}

FFExpr FFExpr::add(std::vector<FFExpr> kids) {
  if (kids.empty()) return constant(0);
  if (kids.size() == 1) return std::move(kids[0]);
  FFExpr e;
  e.k = K::Add;
  e.kids = std::move(kids);
  return e;
}

FFExpr FFExpr::sub(FFExpr lhs, FFExpr rhs) {
  FFExpr e;
  e.k = K::Sub;
  e.kids.push_back(std::move(lhs));
  e.kids.push_back(std::move(rhs));
  return e;
}

FFExpr FFExpr::mul(FFExpr lhs, FFExpr rhs) {
  if (lhs.k == K::Const && rhs.k == K::Const) return constant(lhs.c * rhs.c);
  if (lhs.k == K::Const && lhs.c == 1) return rhs;
  if (rhs.k == K::Const && rhs.c == 1) return lhs;
  FFExpr e;
  e.k = K::Mul;
  if (lhs.k == K::Mul)
    e.kids = std::move(lhs.kids);
  else
    e.kids.push_back(std::move(lhs));
  if (rhs.k == K::Mul)
    for (auto& kid : rhs.kids) e.kids.push_back(std::move(kid));
  else
    e.kids.push_back(std::move(rhs));
  return e;
}

RawPoly flat_expr_poly(const FFExpr& e, int dim) {
  switch (e.k) {
    case FFExpr::K::Const:
      return RawPoly::constant_poly(dim, e.c);
    case FFExpr::K::FrcSum:
      return RawPoly::frc_sum(dim, e.members);
    case FFExpr::K::Add: {
      RawPoly acc = RawPoly::constant_poly(dim, 0);
      for (const auto& kid : e.kids) acc += flat_expr_poly(kid, dim);
      return acc;
    }
    case FFExpr::K::Sub:
      return flat_expr_poly(e.kids[0], dim) - flat_expr_poly(e.kids[1], dim);
    case FFExpr::K::Mul: {
      RawPoly acc = flat_expr_poly(e.kids[0], dim);
      for (size_t i = 1; i < e.kids.size(); ++i) acc = acc.mul(flat_expr_poly(e.kids[i], dim));
      return acc;
    }
  }
  return RawPoly::constant_poly(dim, 0);
}

std::string ffexpr_text(const FFExpr& e, const FlatSpec& spec) {
  std::ostringstream os;
  switch (e.k) {
    case FFExpr::K::Const:
      os << to_string(e.c);
      break;
    case FFExpr::K::FrcSum:
      if (e.members.empty()) {
        os << "0";
      } else if (e.members.size() == 1) {
        os << "frc(" << spec.states[e.members[0]].name << ")";
      } else {
        os << "(";
        for (size_t i = 0; i < e.members.size(); ++i) {
          if (i) os << "+";
          os << "frc(" << spec.states[e.members[i]].name << ")";
        }
        os << ")";
      }
      break;
    case FFExpr::K::Add:
    case FFExpr::K::Sub: {
      const char* sep = e.k == FFExpr::K::Add ? "+" : "-";
      os << "(";
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) os << sep;
        os << ffexpr_text(e.kids[i], spec);
      }
      os << ")";
      break;
    }
    case FFExpr::K::Mul:
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) os << "*";
        os << ffexpr_text(e.kids[i], spec);
      }
      break;
  }
  return os.str();
}

std::string print_ff(const FlatSpec& spec) {
  std::ostringstream os;
  os << "# flat population model: " << spec.states.size() << " states, " << spec.actions.size()
     << " actions, population " << spec.population() << "\n";
  for (const auto& a : spec.actions)
    os << "action " << a.name << ": " << ffexpr_text(a.def, spec) << ";\n";
  for (const auto& s : spec.states) {
    if (s.summands.empty()) {
      os << "state " << s.name << " {};\n";
      continue;
    }
    os << "state " << s.name << " {\n";
    for (size_t i = 0; i < s.summands.size(); ++i) {
      os << "  " << spec.actions[s.summands[i].action].name << "."
         << spec.states[s.summands[i].target].name;
      os << (i + 1 < s.summands.size() ? " +\n" : "\n");
    }
    os << "};\n";
  }
  if (!spec.init.empty()) {
    os << "init ";
    for (size_t i = 0; i < spec.init.size(); ++i) {
      if (i) os << ", ";
      os << spec.states[spec.init[i].first].name << ":" << spec.init[i].second;
    }
    os << ";\n";
  }
  return os.str();
}

namespace {

// ---- tokenizer for the flat format ----

enum class FTok { Ident, Number, Colon, Semi, LBrace, RBrace, LParen, RParen,
                  Plus, Minus, Star, Slash, Comma, Dot, End };

struct FToken {
  FTok kind;
  std::string text;
  SourcePos pos;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' || c == '=' ||
         c == '&' || c == '|';
}

std::vector<FToken> ff_tokenize(std::string_view src, DiagnosticList& diags) {
  std::vector<FToken> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](FTok k, std::string text, SourcePos p) { out.push_back({k, std::move(text), p}); };
  while (i < src.size()) {
    char c = src[i];
    SourcePos pos{line, col};
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (ident_start(c)) {
      size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      push(FTok::Ident, std::string(src.substr(i, j - i)), pos);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() &&
             (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.'))
        ++j;
      push(FTok::Number, std::string(src.substr(i, j - i)), pos);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    FTok k;
    switch (c) {
      case ':': k = FTok::Colon; break;
      case ';': k = FTok::Semi; break;
      case '{': k = FTok::LBrace; break;
      case '}': k = FTok::RBrace; break;
      case '(': k = FTok::LParen; break;
      case ')': k = FTok::RParen; break;
      case '+': k = FTok::Plus; break;
      case '-': k = FTok::Minus; break;
      case '*': k = FTok::Star; break;
      case '/': k = FTok::Slash; break;
      case ',': k = FTok::Comma; break;
      case '.': k = FTok::Dot; break;
      default:
        diags.error(pos, std::string("unexpected character '") + c + "'");
        ++col;
        ++i;
        continue;
    }
    push(k, std::string(1, c), pos);
    ++col;
    ++i;
  }
  out.push_back({FTok::End, "", {line, col}});
  return out;
}

// ---- unresolved parse tree (frc targets still by name) ----

struct PExpr {
  FFExpr::K k = FFExpr::K::Const;
  Rational c;
  std::string frc_name;
  SourcePos pos;
  std::vector<PExpr> kids;
};

struct PState {
  std::string name;
  std::vector<std::pair<std::string, std::string>> summands; // (action, target)
  std::vector<SourcePos> summand_pos;
  SourcePos pos;
};

struct PAction {
  std::string name;
  PExpr def;
  SourcePos pos;
};

struct FFSyntaxError {};

class FFParser {
public:
  FFParser(std::vector<FToken> toks, DiagnosticList& diags)
      : toks_(std::move(toks)), diags_(diags) {}

  void parse_file(std::vector<PAction>& actions, std::vector<PState>& states,
                  std::vector<std::tuple<std::string, long, SourcePos>>& init) {
    while (!at(FTok::End)) {
      try {
        if (at_kw("action")) {
          parse_action(actions);
        } else if (at_kw("state")) {
          parse_state(states);
        } else if (at_kw("init")) {
          parse_init(init);
        } else {
          diags_.error(cur().pos, "expected 'action', 'state' or 'init'");
          throw FFSyntaxError{};
        }
      } catch (const FFSyntaxError&) {
        while (!at(FTok::End) && !accept(FTok::Semi)) take();
      }
    }
  }

private:
  std::vector<FToken> toks_;
  DiagnosticList& diags_;
  size_t i_ = 0;

  const FToken& cur() const { return toks_[i_]; }
  const FToken& take() { return toks_[i_ == toks_.size() - 1 ? i_ : i_++]; }
  bool at(FTok k) const { return cur().kind == k; }
  bool at_kw(const char* kw) const { return at(FTok::Ident) && cur().text == kw; }
  bool accept(FTok k) {
    if (!at(k)) return false;
    take();
    return true;
  }
  const FToken& expect(FTok k, const char* what) {
    if (!at(k)) {
      diags_.error(cur().pos, std::string("expected ") + what);
      throw FFSyntaxError{};
    }
    return take();
  }

  void parse_action(std::vector<PAction>& actions) {
    PAction a;
    a.pos = take().pos;
    a.name = expect(FTok::Ident, "an action name").text;
    expect(FTok::Colon, "':' after the action name");
    a.def = parse_expr();
    expect(FTok::Semi, "';' after the action definition");
    actions.push_back(std::move(a));
  }

  void parse_state(std::vector<PState>& states) {
    PState s;
    s.pos = take().pos;
    s.name = expect(FTok::Ident, "a state name").text;
    expect(FTok::LBrace, "'{' after the state name");
    if (!at(FTok::RBrace)) {
      do {
        SourcePos pos = cur().pos;
        std::string action = expect(FTok::Ident, "an action name").text;
        expect(FTok::Dot, "'.' between action and target");
        std::string target = expect(FTok::Ident, "a target state").text;
        s.summands.emplace_back(std::move(action), std::move(target));
        s.summand_pos.push_back(pos);
      } while (accept(FTok::Plus));
    }
    expect(FTok::RBrace, "'}' after the summands");
    accept(FTok::Semi);
    states.push_back(std::move(s));
  }

  void parse_init(std::vector<std::tuple<std::string, long, SourcePos>>& init) {
    take();
    do {
      SourcePos pos = cur().pos;
      std::string name = expect(FTok::Ident, "a state name").text;
      expect(FTok::Colon, "':' before the count");
      const FToken& n = expect(FTok::Number, "an agent count");
      if (n.text.find('.') != std::string::npos) {
        diags_.error(n.pos, "agent counts must be integers");
        throw FFSyntaxError{};
      }
      init.emplace_back(std::move(name), std::strtol(n.text.c_str(), nullptr, 10), pos);
    } while (accept(FTok::Comma));
    expect(FTok::Semi, "';' after the init line");
  }

  PExpr parse_expr() {
    PExpr lhs = parse_term();
    while (at(FTok::Plus) || at(FTok::Minus)) {
      bool plus = take().kind == FTok::Plus;
      // sums stay n-ary so a reprint matches the printer's flat form
      if (plus && lhs.k == FFExpr::K::Add) {
        lhs.kids.push_back(parse_term());
        continue;
      }
      PExpr node;
      node.k = plus ? FFExpr::K::Add : FFExpr::K::Sub;
      node.pos = lhs.pos;
      node.kids.push_back(std::move(lhs));
      node.kids.push_back(parse_term());
      lhs = std::move(node);
    }
    return lhs;
  }

  PExpr parse_term() {
    PExpr lhs = parse_factor();
    while (at(FTok::Star)) {
      take();
      PExpr node;
      node.k = FFExpr::K::Mul;
      node.pos = lhs.pos;
      node.kids.push_back(std::move(lhs));
      node.kids.push_back(parse_factor());
      lhs = std::move(node);
    }
    return lhs;
  }

  PExpr parse_factor() {
    if (at(FTok::Number)) {
      FToken num = take();
      PExpr e;
      e.k = FFExpr::K::Const;
      e.pos = num.pos;
      try {
        e.c = rational_from_decimal(num.text);
        if (accept(FTok::Slash)) {
          const FToken& den = expect(FTok::Number, "a denominator");
          Rational d = rational_from_decimal(den.text);
          if (d == 0) {
            diags_.error(den.pos, "zero denominator");
            throw FFSyntaxError{};
          }
          e.c /= d;
        }
      } catch (const std::invalid_argument& ex) {
        diags_.error(num.pos, ex.what());
        throw FFSyntaxError{};
      }
      return e;
    }
    if (at_kw("frc")) {
      PExpr e;
      e.k = FFExpr::K::FrcSum;
      e.pos = take().pos;
      expect(FTok::LParen, "'(' after frc");
      e.frc_name = expect(FTok::Ident, "a state name").text;
      expect(FTok::RParen, "')' after the frc argument");
      return e;
    }
    if (accept(FTok::LParen)) {
      PExpr e = parse_expr();
      expect(FTok::RParen, "')'");
      return e;
    }
    diags_.error(cur().pos, "expected a number, frc(...) or a parenthesised expression");
    throw FFSyntaxError{};
  }
};

// flat state names minted by the translator look like agent@store@digest;
// reconstruct the metadata when the pattern fits
void derive_metadata(FlatState& s) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (size_t i = 0; i <= s.name.size(); ++i) {
    if (i == s.name.size() || s.name[i] == '@') {
      parts.push_back(s.name.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() != 3 || parts[0].empty() || parts[2].empty()) return;
  std::map<std::string, std::string> store;
  const std::string& st = parts[1];
  size_t pos = 0;
  while (pos < st.size()) {
    size_t amp = st.find('&', pos);
    if (amp == std::string::npos) amp = st.size();
    std::string item = st.substr(pos, amp - pos);
    size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size()) return; // not ours
    store[item.substr(0, eq)] = item.substr(eq + 1);
    pos = amp + 1;
  }
  s.agent = parts[0];
  s.store = std::move(store);
}

FFExpr resolve_expr(const PExpr& p, const FlatSpec& spec, DiagnosticList& diags, bool& ok) {
  switch (p.k) {
    case FFExpr::K::Const:
      return FFExpr::constant(p.c);
    case FFExpr::K::FrcSum: {
      auto it = spec.state_idx.find(p.frc_name);
      if (it == spec.state_idx.end()) {
        diags.error(p.pos, "frc of unknown state '" + p.frc_name + "'");
        ok = false;
        return FFExpr::constant(0);
      }
      return FFExpr::frc_sum({it->second});
    }
    default: {
      std::vector<FFExpr> kids;
      kids.reserve(p.kids.size());
      for (const auto& kid : p.kids) kids.push_back(resolve_expr(kid, spec, diags, ok));
      if (p.k == FFExpr::K::Add) return FFExpr::add(std::move(kids));
      if (p.k == FFExpr::K::Sub) return FFExpr::sub(std::move(kids[0]), std::move(kids[1]));
      FFExpr acc = std::move(kids[0]);
      for (size_t i = 1; i < kids.size(); ++i) acc = FFExpr::mul(std::move(acc), std::move(kids[i]));
      return acc;
    }
  }
}

} // namespace

FFParseResult parse_ff(std::string_view source, std::string file_name) {
  FFParseResult result;
  result.diags.file = std::move(file_name);
  auto toks = ff_tokenize(source, result.diags);

  std::vector<PAction> pactions;
  std::vector<PState> pstates;
  std::vector<std::tuple<std::string, long, SourcePos>> pinit;
  FFParser(std::move(toks), result.diags).parse_file(pactions, pstates, pinit);

  FlatSpec spec;
  for (auto& ps : pstates) {
    if (!spec.state_idx.emplace(ps.name, static_cast<int>(spec.states.size())).second) {
      result.diags.error(ps.pos, "state '" + ps.name + "' is declared twice");
      continue;
    }
    FlatState fs;
    fs.name = ps.name;
    derive_metadata(fs);
    spec.states.push_back(std::move(fs));
  }
  for (auto& pa : pactions) {
    if (!spec.action_idx.emplace(pa.name, static_cast<int>(spec.actions.size())).second) {
      result.diags.error(pa.pos, "action '" + pa.name + "' is declared twice");
      continue;
    }
    bool ok = true;
    FlatAction fa;
    fa.name = pa.name;
    fa.def = resolve_expr(pa.def, spec, result.diags, ok);
    spec.actions.push_back(std::move(fa));
  }
  for (auto& ps : pstates) {
    auto si = spec.state_idx.find(ps.name);
    if (si == spec.state_idx.end()) continue; // duplicate, already reported
    FlatState& fs = spec.states[si->second];
    if (!fs.summands.empty()) continue; // duplicate name pointing at the first
    for (size_t j = 0; j < ps.summands.size(); ++j) {
      const auto& [aname, tname] = ps.summands[j];
      auto ai = spec.action_idx.find(aname);
      auto ti = spec.state_idx.find(tname);
      if (ai == spec.action_idx.end())
        result.diags.error(ps.summand_pos[j], "unknown action '" + aname + "'");
      if (ti == spec.state_idx.end())
        result.diags.error(ps.summand_pos[j], "unknown target state '" + tname + "'");
      if (ai != spec.action_idx.end() && ti != spec.state_idx.end())
        fs.summands.push_back({ai->second, ti->second});
    }
  }
  std::set<int> init_seen;
  for (const auto& [name, count, pos] : pinit) {
    auto si = spec.state_idx.find(name);
    if (si == spec.state_idx.end()) {
      result.diags.error(pos, "init names unknown state '" + name + "'");
      continue;
    }
    if (!init_seen.insert(si->second).second) {
      result.diags.error(pos, "state '" + name + "' appears twice in init");
      continue;
    }
    spec.init.emplace_back(si->second, count);
  }

  if (!result.diags.has_errors()) result.spec = std::move(spec);
  return result;
}

} // namespace piff
