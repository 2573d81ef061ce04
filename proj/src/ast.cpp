#include "piff/ast.hpp"

#include <sstream>

namespace piff {

ExprPtr clone(const Expr& e) {
  auto c = std::make_unique<Expr>();
  c->kind = e.kind;
  c->pos = e.pos;
  c->bval = e.bval;
  c->num = e.num;
  c->text = e.text;
  c->name = e.name;
  c->cmp = e.cmp;
  c->res = e.res;
  c->res_a = e.res_a;
  c->res_b = e.res_b;
  for (const auto& a : e.args) c->args.push_back(clone(*a));
  return c;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::BoolLit:
      if (a.bval != b.bval) return false;
      break;
    case ExprKind::Number:
      if (a.num != b.num) return false;
      break;
    case ExprKind::Ident:
    case ExprKind::MyAttr:
    case ExprKind::Call:
    case ExprKind::Frc:
      if (a.name != b.name) return false;
      break;
    case ExprKind::Cmp:
      if (a.cmp != b.cmp) return false;
      break;
    case ExprKind::Not:
    case ExprKind::And:
      break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!equal(*a.args[i], *b.args[i])) return false;
  return true;
}

namespace {

const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Le: return "<=";
    case CmpOp::Lt: return "<";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "?";
}

void print_expr(std::ostream& out, const Expr& e);

void print_paren_arg(std::ostream& out, const Expr& e) {
  bool need = e.kind == ExprKind::And || e.kind == ExprKind::Cmp ||
              (e.kind == ExprKind::Call &&
               (e.name == "+" || e.name == "-" || e.name == "*" || e.name == "/"));
  if (need) out << '(';
  print_expr(out, e);
  if (need) out << ')';
}

void print_expr(std::ostream& out, const Expr& e) {
  switch (e.kind) {
    case ExprKind::BoolLit:
      out << (e.bval ? "true" : "false");
      return;
    case ExprKind::Number:
      out << (e.text.empty() ? to_string(e.num) : e.text);
      return;
    case ExprKind::Ident:
      out << e.name;
      return;
    case ExprKind::MyAttr:
      out << "my." << e.name;
      return;
    case ExprKind::Call:
      if (e.name == "+" || e.name == "-" || e.name == "*" || e.name == "/") {
        print_paren_arg(out, *e.args[0]);
        out << ' ' << e.name << ' ';
        print_paren_arg(out, *e.args[1]);
        return;
      }
      if (e.name == "neg") {
        out << '-';
        print_paren_arg(out, *e.args[0]);
        return;
      }
      out << e.name << '(';
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) out << ", ";
        print_expr(out, *e.args[i]);
      }
      out << ')';
      return;
    case ExprKind::Cmp:
      print_paren_arg(out, *e.args[0]);
      out << ' ' << cmp_text(e.cmp) << ' ';
      print_paren_arg(out, *e.args[1]);
      return;
    case ExprKind::Not:
      out << '!';
      if (e.args[0]->kind == ExprKind::Cmp || e.args[0]->kind == ExprKind::And) {
        out << '(';
        print_expr(out, *e.args[0]);
        out << ')';
      } else {
        print_expr(out, *e.args[0]);
      }
      return;
    case ExprKind::And:
      print_paren_arg(out, *e.args[0]);
      out << " && ";
      print_paren_arg(out, *e.args[1]);
      return;
    case ExprKind::Frc:
      out << "frc(";
      if (!e.name.empty())
        out << e.name;
      else
        print_expr(out, *e.args[0]);
      out << ')';
      return;
  }
}

void print_summand(std::ostream& out, const Summand& s) {
  if (s.is_rest) {
    out << "rest";
  } else {
    out << '[';
    print_expr(out, *s.guard);
    out << "] ";
    if (s.prob.coeff) {
      print_expr(out, *s.prob.coeff);
      if (s.prob.frc) out << " * ";
    }
    if (s.prob.frc) print_expr(out, *s.prob.frc);
  }
  out << " :: " << s.action.label << "*[";
  print_expr(out, *s.action.pred);
  out << ']' << (s.action.is_output ? "<>" : "()") << ' ' << s.action.update << " . "
      << s.target;
}

} // namespace

std::string print_model(const ModelAST& ast) {
  std::ostringstream out;
  for (const auto& t : ast.attr_types) {
    out << "attype " << t.name << " enum ";
    for (size_t i = 0; i < t.values.size(); ++i) {
      if (i) out << ',';
      out << t.values[i];
    }
    out << ";\n";
  }
  for (const auto& c : ast.consts) {
    out << "const " << c.name << " = ";
    print_expr(out, *c.value);
    out << ";\n";
  }
  for (const auto& a : ast.attributes)
    out << "attribute " << a.name << " : " << a.type << ";\n";
  for (const auto& f : ast.funcs) {
    out << "func " << f.name << '(';
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) out << ", ";
      out << f.params[i].first << ':' << f.params[i].second;
    }
    out << "):" << f.result_type << ";\n";
    if (f.body) {
      out << "  ";
      print_expr(out, *f.body);
      out << '\n';
    } else {
      out << "  case ";
      if (f.params.size() == 1) {
        out << f.params[0].first;
      } else {
        out << '(';
        for (size_t i = 0; i < f.params.size(); ++i) {
          if (i) out << ',';
          out << f.params[i].first;
        }
        out << ')';
      }
      out << " of\n";
      for (size_t r = 0; r < f.rows.size(); ++r) {
        out << "    ";
        if (f.rows[r].keys.size() == 1) {
          out << f.rows[r].keys[0];
        } else {
          out << '(';
          for (size_t i = 0; i < f.rows[r].keys.size(); ++i) {
            if (i) out << ',';
            out << f.rows[r].keys[i];
          }
          out << ')';
        }
        out << " : ";
        print_expr(out, *f.rows[r].value);
        out << (r + 1 < f.rows.size() ? ";\n" : "\n");
      }
    }
    out << "endfunc;\n";
  }
  for (const auto& u : ast.updates) {
    out << "update " << u.name << '\n';
    for (size_t b = 0; b < u.branches.size(); ++b) {
      out << "  ";
      const auto& br = u.branches[b];
      for (size_t i = 0; i < br.assigns.size(); ++i) {
        if (i) out << ", ";
        out << "my." << br.assigns[i].first << " := ";
        print_expr(out, *br.assigns[i].second);
      }
      out << " with ";
      print_expr(out, *br.prob);
      out << (b + 1 < u.branches.size() ? ";\n" : "\n");
    }
    out << "endupdate;\n";
  }
  for (const auto& st : ast.states) {
    out << "state " << st.name << " {\n";
    for (size_t i = 0; i < st.summands.size(); ++i) {
      out << "  ";
      print_summand(out, st.summands[i]);
      out << (i + 1 < st.summands.size() ? " +\n" : "\n");
    }
    out << "}\n";
  }
  if (ast.init) {
    out << "init N = " << ast.init->total << ";\n";
    for (const auto& e : ast.init->entries) {
      out << '(' << e.state;
      for (const auto& [a, v] : e.assigns) out << ", " << a << " = " << v;
      out << ") * " << e.count << ";\n";
    }
  }
  return out.str();
}

namespace {

bool equal_prob(const ProbExpr& a, const ProbExpr& b) {
  if (static_cast<bool>(a.coeff) != static_cast<bool>(b.coeff)) return false;
  if (a.coeff && !equal(*a.coeff, *b.coeff)) return false;
  if (static_cast<bool>(a.frc) != static_cast<bool>(b.frc)) return false;
  if (a.frc && !equal(*a.frc, *b.frc)) return false;
  return true;
}

} // namespace

bool equal(const ModelAST& a, const ModelAST& b) {
  if (a.attr_types.size() != b.attr_types.size() || a.consts.size() != b.consts.size() ||
      a.attributes.size() != b.attributes.size() || a.funcs.size() != b.funcs.size() ||
      a.updates.size() != b.updates.size() || a.states.size() != b.states.size())
    return false;
  for (size_t i = 0; i < a.attr_types.size(); ++i)
    if (a.attr_types[i].name != b.attr_types[i].name ||
        a.attr_types[i].values != b.attr_types[i].values)
      return false;
  for (size_t i = 0; i < a.consts.size(); ++i)
    if (a.consts[i].name != b.consts[i].name || !equal(*a.consts[i].value, *b.consts[i].value))
      return false;
  for (size_t i = 0; i < a.attributes.size(); ++i)
    if (a.attributes[i].name != b.attributes[i].name || a.attributes[i].type != b.attributes[i].type)
      return false;
  for (size_t i = 0; i < a.funcs.size(); ++i) {
    const auto& fa = a.funcs[i];
    const auto& fb = b.funcs[i];
    if (fa.name != fb.name || fa.params != fb.params || fa.result_type != fb.result_type)
      return false;
    if (static_cast<bool>(fa.body) != static_cast<bool>(fb.body)) return false;
    if (fa.body && !equal(*fa.body, *fb.body)) return false;
    if (fa.rows.size() != fb.rows.size()) return false;
    for (size_t r = 0; r < fa.rows.size(); ++r)
      if (fa.rows[r].keys != fb.rows[r].keys || !equal(*fa.rows[r].value, *fb.rows[r].value))
        return false;
  }
  for (size_t i = 0; i < a.updates.size(); ++i) {
    const auto& ua = a.updates[i];
    const auto& ub = b.updates[i];
    if (ua.name != ub.name || ua.branches.size() != ub.branches.size()) return false;
    for (size_t k = 0; k < ua.branches.size(); ++k) {
      const auto& ba = ua.branches[k];
      const auto& bb = ub.branches[k];
      if (ba.assigns.size() != bb.assigns.size()) return false;
      for (size_t j = 0; j < ba.assigns.size(); ++j)
        if (ba.assigns[j].first != bb.assigns[j].first ||
            !equal(*ba.assigns[j].second, *bb.assigns[j].second))
          return false;
      if (!equal(*ba.prob, *bb.prob)) return false;
    }
  }
  for (size_t i = 0; i < a.states.size(); ++i) {
    const auto& sa = a.states[i];
    const auto& sb = b.states[i];
    if (sa.name != sb.name || sa.summands.size() != sb.summands.size()) return false;
    for (size_t k = 0; k < sa.summands.size(); ++k) {
      const auto& x = sa.summands[k];
      const auto& y = sb.summands[k];
      if (x.is_rest != y.is_rest || x.target != y.target) return false;
      if (!x.is_rest) {
        if (!equal(*x.guard, *y.guard) || !equal_prob(x.prob, y.prob)) return false;
      }
      if (x.action.is_output != y.action.is_output || x.action.label != y.action.label ||
          x.action.update != y.action.update || !equal(*x.action.pred, *y.action.pred))
        return false;
    }
  }
  if (a.init.has_value() != b.init.has_value()) return false;
  if (a.init) {
    if (a.init->total != b.init->total || a.init->entries.size() != b.init->entries.size())
      return false;
    for (size_t i = 0; i < a.init->entries.size(); ++i) {
      const auto& x = a.init->entries[i];
      const auto& y = b.init->entries[i];
      if (x.state != y.state || x.assigns != y.assigns || x.count != y.count) return false;
    }
  }
  return true;
}

} // namespace piff
