#include "piff/semantics.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace piff {

std::string CheckedModel::store_text(const Store& s) const {
  std::ostringstream os;
  for (size_t i = 0; i < attrs.size(); ++i) {
    if (i) os << '&';
    os << attrs[i].name << '=' << enum_value_name(attrs[i].type, s.vals[i]);
  }
  return os.str();
}

std::string CheckedModel::value_text(const Value& v) const {
  switch (v.kind) {
    case Value::Kind::Bool: return v.b ? "true" : "false";
    case Value::Kind::Rat: return v.rat.str();
    case Value::Kind::Enum: return enum_value_name(v.enum_type, v.enum_val);
  }
  return "?";
}

void annotate_actions(CheckedModel& model) {
  model.annotations.assign(model.states.size(), {});
  int next = 1;
  for (size_t s = 0; s < model.states.size(); ++s) {
    model.annotations[s].assign(model.states[s]->summands.size(), 0);
    for (size_t j = 0; j < model.states[s]->summands.size(); ++j)
      model.annotations[s][j] = next++;
  }
  model.annotated = true;
}

namespace {

struct EvalCtx {
  const CheckedModel& m;
  const Store& store;
  const FuncDecl* fn = nullptr;             // enclosing function, for params
  const std::vector<Value>* params = nullptr;
};

Value eval_expr(const Expr& e, const EvalCtx& ctx);

Value apply_function(const FuncDecl& fn, std::vector<Value> args, const EvalCtx& outer) {
  if (args.size() != fn.params.size())
    throw EvalError("function '" + fn.name + "' expects " + std::to_string(fn.params.size()) +
                    " arguments");
  EvalCtx inner{outer.m, outer.store, &fn, &args};
  if (fn.body) return eval_expr(*fn.body, inner);
  // case table lookup: keys are enum value names
  for (const auto& row : fn.rows) {
    bool hit = true;
    for (size_t i = 0; i < row.keys.size() && hit; ++i) {
      auto it = outer.m.enum_value_idx.find(row.keys[i]);
      if (it == outer.m.enum_value_idx.end() ||
          !(args[i] == Value::enumv(it->second.first, it->second.second)))
        hit = false;
    }
    if (hit) return eval_expr(*row.value, inner);
  }
  std::ostringstream os;
  os << "case table of '" << fn.name << "' has no row for (";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) os << ',';
    os << outer.m.value_text(args[i]);
  }
  os << ')';
  throw EvalError(os.str());
}

int cmp_values(const Value& a, const Value& b, const CheckedModel& m, SourcePos pos) {
  if (a.kind == Value::Kind::Rat && b.kind == Value::Kind::Rat)
    return a.rat < b.rat ? -1 : a.rat == b.rat ? 0 : 1;
  if (a.kind == Value::Kind::Enum && b.kind == Value::Kind::Enum) {
    if (a.enum_type != b.enum_type)
      throw EvalError("comparison of values of different enum types at line " +
                      std::to_string(pos.line));
    return a.enum_val < b.enum_val ? -1 : a.enum_val == b.enum_val ? 0 : 1;
  }
  if (a.kind == Value::Kind::Bool && b.kind == Value::Kind::Bool)
    return a.b == b.b ? 0 : (a.b ? 1 : -1);
  (void)m;
  throw EvalError("comparison of incompatible values at line " + std::to_string(pos.line));
}

bool apply_cmp(CmpOp op, int c) {
  switch (op) {
    case CmpOp::Eq: return c == 0;
    case CmpOp::Ne: return c != 0;
    case CmpOp::Le: return c <= 0;
    case CmpOp::Lt: return c < 0;
    case CmpOp::Ge: return c >= 0;
    case CmpOp::Gt: return c > 0;
  }
  return false;
}

Value require_bool(Value v, SourcePos pos) {
  if (v.kind != Value::Kind::Bool)
    throw EvalError("expected a boolean at line " + std::to_string(pos.line));
  return v;
}

Value eval_expr(const Expr& e, const EvalCtx& ctx) {
  switch (e.kind) {
    case ExprKind::BoolLit:
      return Value::boolean(e.bval);
    case ExprKind::Number:
      return Value::rational(e.num);
    case ExprKind::Ident:
      switch (e.res) {
        case NameRes::Param:
          if (!ctx.params) throw EvalError("parameter '" + e.name + "' outside a function body");
          return (*ctx.params)[e.res_a];
        case NameRes::EnumValue:
          return Value::enumv(e.res_a, e.res_b);
        case NameRes::Const:
          return ctx.m.consts.at(e.name);
        case NameRes::Attr:
          throw EvalError("bare attribute '" + e.name +
                          "' is only meaningful in a communication predicate");
        default:
          throw EvalError("unresolved name '" + e.name + "'");
      }
    case ExprKind::MyAttr:
      return Value::enumv(ctx.m.attrs[e.res_a].type, ctx.store.vals[e.res_a]);
    case ExprKind::Call: {
      if (e.name == "+" || e.name == "-" || e.name == "*" || e.name == "/" || e.name == "neg") {
        // constant arithmetic (const declarations only)
        Value l = eval_expr(*e.args[0], ctx);
        if (e.name == "neg") {
          if (l.kind != Value::Kind::Rat) throw EvalError("negation of a non-numeric value");
          return Value::rational(-l.rat);
        }
        Value r = eval_expr(*e.args[1], ctx);
        if (l.kind != Value::Kind::Rat || r.kind != Value::Kind::Rat)
          throw EvalError("arithmetic on non-numeric values");
        if (e.name == "+") return Value::rational(l.rat + r.rat);
        if (e.name == "-") return Value::rational(l.rat - r.rat);
        if (e.name == "*") return Value::rational(l.rat * r.rat);
        if (r.rat == 0) throw EvalError("division by zero in constant expression");
        return Value::rational(l.rat / r.rat);
      }
      auto it = ctx.m.funcs.find(e.name);
      if (it == ctx.m.funcs.end()) throw EvalError("unknown function '" + e.name + "'");
      std::vector<Value> args;
      args.reserve(e.args.size());
      for (const auto& a : e.args) args.push_back(eval_expr(*a, ctx));
      return apply_function(*it->second, std::move(args), ctx);
    }
    case ExprKind::Cmp: {
      Value l = eval_expr(*e.args[0], ctx);
      Value r = eval_expr(*e.args[1], ctx);
      return Value::boolean(apply_cmp(e.cmp, cmp_values(l, r, ctx.m, e.pos)));
    }
    case ExprKind::Not:
      return Value::boolean(!require_bool(eval_expr(*e.args[0], ctx), e.pos).b);
    case ExprKind::And: {
      Value l = require_bool(eval_expr(*e.args[0], ctx), e.pos);
      if (!l.b) return Value::boolean(false);
      return Value::boolean(require_bool(eval_expr(*e.args[1], ctx), e.pos).b);
    }
    case ExprKind::Frc:
      throw EvalError("occupancy term in a locally evaluated expression");
  }
  throw EvalError("malformed expression");
}

ClosedPred::Operand actualize_operand(const Expr& e, const EvalCtx& ctx) {
  ClosedPred::Operand op;
  if (e.kind == ExprKind::Ident && e.res == NameRes::Attr) {
    op.is_attr = true;
    op.attr = e.res_a;
    return op;
  }
  op.v = eval_expr(e, ctx);
  return op;
}

ClosedPred actualize_pred(const Expr& e, const EvalCtx& ctx) {
  ClosedPred p;
  switch (e.kind) {
    case ExprKind::BoolLit:
      p.k = ClosedPred::K::Lit;
      p.lit = e.bval;
      return p;
    case ExprKind::Cmp:
      p.k = ClosedPred::K::Cmp;
      p.op = e.cmp;
      p.lhs = actualize_operand(*e.args[0], ctx);
      p.rhs = actualize_operand(*e.args[1], ctx);
      return p;
    case ExprKind::Not:
      p.k = ClosedPred::K::Not;
      p.kids.push_back(actualize_pred(*e.args[0], ctx));
      return p;
    case ExprKind::And:
      p.k = ClosedPred::K::And;
      p.kids.push_back(actualize_pred(*e.args[0], ctx));
      p.kids.push_back(actualize_pred(*e.args[1], ctx));
      return p;
    default:
      throw EvalError("expression is not a communication predicate");
  }
}

Value operand_value(const ClosedPred::Operand& op, const Store& partner, const CheckedModel& m) {
  if (!op.is_attr) return op.v;
  return Value::enumv(m.attrs[op.attr].type, partner.vals[op.attr]);
}

} // namespace

Value eval_local(const Expr& e, const Store& store, const CheckedModel& m) {
  return eval_expr(e, EvalCtx{m, store});
}

ClosedPred eval_local_pred(const Expr& pred, const Store& store, const CheckedModel& m) {
  return actualize_pred(pred, EvalCtx{m, store});
}

bool sat_remote(const ClosedPred& pred, const Store& partner, const CheckedModel& m) {
  switch (pred.k) {
    case ClosedPred::K::Lit:
      return pred.lit;
    case ClosedPred::K::Cmp: {
      Value l = operand_value(pred.lhs, partner, m);
      Value r = operand_value(pred.rhs, partner, m);
      return apply_cmp(pred.op, cmp_values(l, r, m, {}));
    }
    case ClosedPred::K::Not:
      return !sat_remote(pred.kids[0], partner, m);
    case ClosedPred::K::And:
      return sat_remote(pred.kids[0], partner, m) && sat_remote(pred.kids[1], partner, m);
  }
  return false;
}

std::string ClosedPred::canonical(const CheckedModel& m) const {
  switch (k) {
    case K::Lit:
      return lit ? "tt" : "ff";
    case K::Cmp: {
      auto opnd = [&](const Operand& o) {
        return o.is_attr ? m.attrs[o.attr].name : m.value_text(o.v);
      };
      const char* sym = "";
      switch (op) {
        case CmpOp::Eq: sym = "="; break;
        case CmpOp::Ne: sym = "!="; break;
        case CmpOp::Le: sym = "<="; break;
        case CmpOp::Lt: sym = "<"; break;
        case CmpOp::Ge: sym = ">="; break;
        case CmpOp::Gt: sym = ">"; break;
      }
      return "(" + opnd(lhs) + sym + opnd(rhs) + ")";
    }
    case K::Not:
      return "!" + kids[0].canonical(m);
    case K::And:
      return "(" + kids[0].canonical(m) + "&&" + kids[1].canonical(m) + ")";
  }
  return "?";
}

StoreDistribution eval_update(const std::string& update, const Store& store,
                              const CheckedModel& m) {
  auto it = m.updates.find(update);
  if (it == m.updates.end()) throw EvalError("unknown update '" + update + "'");
  std::map<Store, Rational> acc;
  Rational total = 0;
  for (const auto& br : it->second->branches) {
    Value p = eval_local(*br.prob, store, m);
    if (p.kind != Value::Kind::Rat)
      throw EvalError("branch probability of update '" + update + "' is not numeric");
    if (p.rat < 0 || p.rat > 1)
      throw EvalError("branch probability " + p.rat.str() + " of update '" + update +
                      "' at store " + m.store_text(store) + " is outside [0,1]");
    if (p.rat == 0) continue; // zero-probability branches contribute nothing
    Store target = store;    // unassigned attributes carry over
    for (const auto& [attr, rhs] : br.assigns) {
      int ai = m.attr_idx.at(attr);
      Value v = eval_local(*rhs, store, m);
      if (v.kind != Value::Kind::Enum || v.enum_type != m.attrs[ai].type)
        throw EvalError("assignment to '" + attr + "' in update '" + update +
                        "' does not produce a value of its type");
      target.vals[ai] = v.enum_val;
    }
    acc[target] += p.rat;
    total += p.rat;
  }
  if (total != 1)
    throw EvalError("branch probabilities of update '" + update + "' at store " +
                    m.store_text(store) + " sum to " + total.str() + ", expected 1");
  StoreDistribution dist(acc.begin(), acc.end());
  return dist;
}

std::vector<Store> enumerate_stores(const CheckedModel& m) {
  std::vector<Store> out;
  Store cur;
  cur.vals.assign(m.attrs.size(), 0);
  while (true) {
    out.push_back(cur);
    int k = static_cast<int>(m.attrs.size()) - 1;
    for (; k >= 0; --k) {
      int limit = static_cast<int>(m.enum_types[m.attrs[k].type].values.size());
      if (++cur.vals[k] < limit) break;
      cur.vals[k] = 0;
    }
    if (k < 0) break;
  }
  return out;
}

int OutboxSet::index_of(int sender_store, const std::string& canon,
                        const std::string& label) const {
  for (size_t i = 0; i < full.size(); ++i)
    if (full[i].sender_store == sender_store && full[i].label == label &&
        full[i].pred_canon == canon)
      return static_cast<int>(i) + 1;
  return -2; // not found; callers treat this as an internal error
}

OutboxSet enumerate_outboxes(const CheckedModel& m, const std::vector<Store>& stores) {
  // every output action occurrence, actualized at every possible sender store
  std::map<std::tuple<int, std::string, std::string>, ClosedPred> seen;
  for (const auto* eq : m.states) {
    for (const auto& s : eq->summands) {
      if (!s.action.is_output) continue;
      for (size_t g = 0; g < stores.size(); ++g) {
        ClosedPred cp = eval_local_pred(*s.action.pred, stores[g], m);
        std::string canon = cp.canonical(m);
        seen.emplace(std::tuple{static_cast<int>(g), s.action.label, canon}, std::move(cp));
      }
    }
  }
  OutboxSet set;
  for (auto& [key, cp] : seen) {
    Outbox ob;
    ob.sender_store = std::get<0>(key);
    ob.label = std::get<1>(key);
    ob.pred_canon = std::get<2>(key);
    ob.pred = std::move(cp);
    set.full.push_back(std::move(ob));
  }
  std::sort(set.full.begin(), set.full.end(), [](const Outbox& a, const Outbox& b) {
    return std::tie(a.sender_store, a.label, a.pred_canon) <
           std::tie(b.sender_store, b.label, b.pred_canon);
  });
  return set;
}

std::vector<ComponentState> enumerate_component_states(const CheckedModel& m,
                                                       const std::vector<Store>& stores,
                                                       const OutboxSet& outboxes) {
  std::vector<ComponentState> out;
  out.reserve(m.states.size() * stores.size() * outboxes.count());
  for (int c = 0; c < static_cast<int>(m.states.size()); ++c)
    for (int g = 0; g < static_cast<int>(stores.size()); ++g)
      for (int o = 0; o < outboxes.count(); ++o)
        out.push_back({c, g, o});
  return out;
}

} // namespace piff
