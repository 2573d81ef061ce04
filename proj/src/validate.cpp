#include "piff/checked_model.hpp"
#include "piff/semantics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace piff {
namespace {

std::string summand_name(const CheckedModel& m, int state, int idx) {
  return "summand " + std::to_string(idx + 1) + " of state '" + m.states[state]->name + "'";
}

class Validator {
public:
  explicit Validator(std::shared_ptr<ModelAST> ast) : ast_(std::move(ast)) {
    diags_.file = ast_->source_name;
  }

  ValidateResult run() {
    collect_types();
    collect_consts();
    collect_attrs();
    collect_funcs();
    collect_updates();
    collect_states();
    resolve_funcs();
    resolve_updates();
    resolve_states();
    collect_init();
    if (!diags_.has_errors()) check_recursion();
    if (!diags_.has_errors()) {
      m_.ast = ast_;
      dynamic_checks();
    }
    ValidateResult r;
    r.diags = std::move(diags_);
    if (!r.diags.has_errors()) r.model = std::move(m_);
    return r;
  }

private:
  std::shared_ptr<ModelAST> ast_;
  CheckedModel m_;
  DiagnosticList diags_;

  void err(SourcePos pos, std::string msg) { diags_.error(pos, std::move(msg)); }

  void collect_types() {
    for (const auto& t : ast_->attr_types) {
      if (m_.enum_type_idx.count(t.name)) {
        err(t.pos, "attype '" + t.name + "' is declared twice");
        continue;
      }
      int ti = static_cast<int>(m_.enum_types.size());
      m_.enum_type_idx[t.name] = ti;
      EnumTypeInfo info;
      info.name = t.name;
      for (const auto& v : t.values) {
        if (m_.enum_value_idx.count(v)) {
          // value names form one global namespace so that bare identifiers
          // in expressions stay unambiguous
          err(t.pos, "enum value '" + v + "' is already declared by attype '" +
                         m_.enum_types[m_.enum_value_idx[v].first].name + "'");
          continue;
        }
        int vi = static_cast<int>(info.values.size());
        info.value_idx[v] = vi;
        info.values.push_back(v);
        m_.enum_value_idx[v] = {ti, vi};
      }
      m_.enum_types.push_back(std::move(info));
    }
  }

  void collect_consts() {
    for (auto& c : ast_->consts) {
      if (m_.consts.count(c.name)) {
        err(c.pos, "const '" + c.name + "' is declared twice");
        continue;
      }
      if (m_.enum_value_idx.count(c.name)) {
        err(c.pos, "const '" + c.name + "' collides with an enum value of the same name");
        continue;
      }
      if (!resolve_const_expr(*c.value)) continue;
      try {
        Store dummy;
        m_.consts.emplace(c.name, eval_local(*c.value, dummy, m_));
      } catch (const EvalError& e) {
        err(c.pos, "const '" + c.name + "': " + e.what());
      }
    }
  }

  bool resolve_const_expr(Expr& e) {
    switch (e.kind) {
      case ExprKind::Number:
        return true;
      case ExprKind::Ident: {
        auto ev = m_.enum_value_idx.find(e.name);
        if (ev != m_.enum_value_idx.end()) {
          e.res = NameRes::EnumValue;
          e.res_a = ev->second.first;
          e.res_b = ev->second.second;
          return true;
        }
        if (m_.consts.count(e.name)) { // earlier consts only: no forward refs
          e.res = NameRes::Const;
          return true;
        }
        err(e.pos, "unknown name '" + e.name + "' in a constant expression");
        return false;
      }
      case ExprKind::Call: {
        bool ok = true;
        for (auto& a : e.args) ok = resolve_const_expr(*a) && ok;
        return ok;
      }
      default:
        err(e.pos, "constant expressions are built from numbers, names and arithmetic");
        return false;
    }
  }

  void collect_attrs() {
    for (const auto& a : ast_->attributes) {
      if (m_.attr_idx.count(a.name)) {
        err(a.pos, "attribute '" + a.name + "' is declared twice");
        continue;
      }
      auto ti = m_.enum_type_idx.find(a.type);
      if (ti == m_.enum_type_idx.end()) {
        err(a.pos, "attribute '" + a.name + "' needs a declared attype, got '" + a.type + "'");
        continue;
      }
      m_.attr_idx[a.name] = static_cast<int>(m_.attrs.size());
      m_.attrs.push_back({a.name, ti->second});
    }
  }

  void collect_funcs() {
    for (const auto& f : ast_->funcs) {
      if (m_.funcs.count(f.name)) {
        err(f.pos, "function '" + f.name + "' is declared twice");
        continue;
      }
      std::set<std::string> seen;
      for (const auto& [pname, ptype] : f.params) {
        if (!seen.insert(pname).second)
          err(f.pos, "function '" + f.name + "' repeats parameter '" + pname + "'");
        if (!m_.enum_type_idx.count(ptype))
          err(f.pos, "parameter '" + pname + "' of function '" + f.name +
                         "' needs a declared attype, got '" + ptype + "'");
      }
      if (!f.is_prob() && !m_.enum_type_idx.count(f.result_type))
        err(f.pos, "function '" + f.name + "' returns undeclared attype '" + f.result_type + "'");
      m_.funcs[f.name] = &f;
    }
  }

  void collect_updates() {
    for (const auto& u : ast_->updates) {
      if (m_.updates.count(u.name)) {
        err(u.pos, "update '" + u.name + "' is declared twice");
        continue;
      }
      for (const auto& br : u.branches) {
        std::set<std::string> seen;
        for (const auto& [attr, rhs] : br.assigns) {
          (void)rhs;
          if (!m_.attr_idx.count(attr))
            err(br.pos, "update '" + u.name + "' assigns undeclared attribute '" + attr + "'");
          else if (!seen.insert(attr).second)
            err(br.pos, "update '" + u.name + "' assigns attribute '" + attr + "' twice in one branch");
        }
      }
      m_.updates[u.name] = &u;
    }
  }

  void collect_states() {
    for (const auto& s : ast_->states) {
      if (m_.state_idx.count(s.name)) {
        err(s.pos, "state '" + s.name + "' is declared twice");
        continue;
      }
      m_.state_idx[s.name] = static_cast<int>(m_.states.size());
      m_.states.push_back(&s);
    }
  }

  // Value contexts: function bodies, update right-hand sides and
  // probabilities, guards. Identifiers resolve param > enum value > const.
  bool resolve_value(Expr& e, const FuncDecl* scope, const std::string& where) {
    switch (e.kind) {
      case ExprKind::BoolLit:
      case ExprKind::Number:
        return true;
      case ExprKind::Ident: {
        if (scope) {
          for (size_t i = 0; i < scope->params.size(); ++i)
            if (scope->params[i].first == e.name) {
              e.res = NameRes::Param;
              e.res_a = static_cast<int>(i);
              return true;
            }
        }
        auto ev = m_.enum_value_idx.find(e.name);
        if (ev != m_.enum_value_idx.end()) {
          e.res = NameRes::EnumValue;
          e.res_a = ev->second.first;
          e.res_b = ev->second.second;
          return true;
        }
        if (m_.consts.count(e.name)) {
          e.res = NameRes::Const;
          return true;
        }
        if (m_.attr_idx.count(e.name))
          err(e.pos, "attribute '" + e.name + "' cannot be used bare in " + where +
                         "; write 'my." + e.name + "' for the local value");
        else
          err(e.pos, "unknown name '" + e.name + "' in " + where);
        return false;
      }
      case ExprKind::MyAttr: {
        auto it = m_.attr_idx.find(e.name);
        if (it == m_.attr_idx.end()) {
          err(e.pos, "undeclared attribute 'my." + e.name + "'");
          return false;
        }
        e.res = NameRes::Attr;
        e.res_a = it->second;
        return true;
      }
      case ExprKind::Call: {
        bool ok = true;
        if (e.name != "+" && e.name != "-" && e.name != "*" && e.name != "/" &&
            e.name != "neg") {
          auto it = m_.funcs.find(e.name);
          if (it == m_.funcs.end()) {
            err(e.pos, "unknown function '" + e.name + "'");
            ok = false;
          } else if (it->second->params.size() != e.args.size()) {
            err(e.pos, "function '" + e.name + "' takes " +
                           std::to_string(it->second->params.size()) + " arguments, got " +
                           std::to_string(e.args.size()));
            ok = false;
          }
        }
        for (auto& a : e.args) ok = resolve_value(*a, scope, where) && ok;
        return ok;
      }
      case ExprKind::Cmp:
      case ExprKind::Not:
      case ExprKind::And: {
        bool ok = true;
        for (auto& a : e.args) ok = resolve_value(*a, scope, where) && ok;
        return ok;
      }
      case ExprKind::Frc:
        err(e.pos, "occupancy term 'frc' is not allowed in " + where);
        return false;
    }
    return false;
  }

  // Communication predicates: bare identifiers name the partner's attributes
  // first, then enum values, then consts. Partner attributes are legal only
  // as whole comparison operands — inside calls everything is local.
  bool resolve_pred(Expr& e, const std::string& where) {
    switch (e.kind) {
      case ExprKind::BoolLit:
        return true;
      case ExprKind::Not:
      case ExprKind::And: {
        bool ok = true;
        for (auto& a : e.args) ok = resolve_pred(*a, where) && ok;
        return ok;
      }
      case ExprKind::Cmp: {
        bool ok = true;
        for (auto& a : e.args) {
          if (a->kind == ExprKind::Ident) {
            auto it = m_.attr_idx.find(a->name);
            if (it != m_.attr_idx.end()) {
              a->res = NameRes::Attr;
              a->res_a = it->second;
              continue;
            }
          }
          if (a->kind == ExprKind::Frc) {
            err(a->pos, "occupancy term 'frc' is not allowed in " + where);
            ok = false;
            continue;
          }
          ok = resolve_value(*a, nullptr, where) && ok;
        }
        return ok;
      }
      case ExprKind::Frc:
        err(e.pos, "occupancy term 'frc' is not allowed in " + where);
        return false;
      default:
        err(e.pos, "expression cannot be used as " + where);
        return false;
    }
  }

  void resolve_funcs() {
    for (auto& f : ast_->funcs) {
      std::string where = "the body of function '" + f.name + "'";
      if (f.body) {
        resolve_value(*f.body, &f, where);
        continue;
      }
      std::set<std::vector<std::string>> seen;
      for (auto& row : f.rows) {
        if (row.keys.size() != f.params.size()) {
          err(row.pos, "case row of function '" + f.name + "' matches " +
                           std::to_string(row.keys.size()) + " values, function has " +
                           std::to_string(f.params.size()) + " parameters");
          continue;
        }
        for (size_t i = 0; i < row.keys.size(); ++i) {
          auto ev = m_.enum_value_idx.find(row.keys[i]);
          int want = -1;
          if (auto ti = m_.enum_type_idx.find(f.params[i].second); ti != m_.enum_type_idx.end())
            want = ti->second;
          if (ev == m_.enum_value_idx.end() || ev->second.first != want)
            err(row.pos, "case key '" + row.keys[i] + "' is not a value of attype '" +
                             f.params[i].second + "'");
        }
        if (!seen.insert(row.keys).second)
          err(row.pos, "function '" + f.name + "' has two case rows for the same values");
        resolve_value(*row.value, &f, where);
      }
    }
  }

  void resolve_updates() {
    for (auto& u : ast_->updates) {
      for (auto& br : u.branches) {
        for (auto& [attr, rhs] : br.assigns)
          resolve_value(*rhs, nullptr, "an update assignment");
        resolve_value(*br.prob, nullptr, "an update probability");
      }
    }
  }

  void resolve_states() {
    for (auto& s : ast_->states) {
      int rests = 0;
      for (size_t j = 0; j < s.summands.size(); ++j) {
        auto& sm = s.summands[j];
        std::string who = "summand " + std::to_string(j + 1) + " of state '" + s.name + "'";
        if (!m_.state_idx.count(sm.target))
          err(sm.pos, who + " targets undeclared state '" + sm.target + "'");
        if (sm.is_rest) {
          if (++rests > 1) err(sm.pos, "state '" + s.name + "' has more than one rest summand");
          if (!sm.action.is_output)
            err(sm.action.pos, "a rest summand must carry an output action");
        } else {
          resolve_value(*sm.guard, nullptr, "a guard");
          if (sm.prob.coeff) {
            Expr& c = *sm.prob.coeff;
            if (c.kind == ExprKind::Number) {
              if (c.num < 0 || c.num > 1)
                err(c.pos, "coefficient " + c.num.str() + " of " + who + " is outside [0,1]");
            } else if (resolve_value(c, nullptr, "a summand coefficient")) {
              const Value* v =
                  c.res == NameRes::Const ? &m_.consts.at(c.name) : nullptr;
              if (!v || v->kind != Value::Kind::Rat)
                err(c.pos, "coefficient of " + who + " must be a number or a numeric const");
              else if (v->rat < 0 || v->rat > 1)
                err(c.pos, "coefficient '" + c.name + "' = " + v->rat.str() + " of " + who +
                               " is outside [0,1]");
            }
          }
          if (sm.prob.frc) resolve_frc(*sm.prob.frc);
        }
        if (!m_.updates.count(sm.action.update))
          err(sm.action.pos, who + " uses undeclared update '" + sm.action.update + "'");
        resolve_pred(*sm.action.pred, "a communication predicate");
      }
    }
  }

  void resolve_frc(Expr& e) {
    if (e.name.empty()) {
      resolve_pred(*e.args[0], "a communication predicate");
      return;
    }
    auto it = m_.state_idx.find(e.name);
    if (it == m_.state_idx.end()) {
      err(e.pos, "frc(" + e.name + ") does not name a declared state");
      return;
    }
    e.res = NameRes::State;
    e.res_a = it->second;
  }

  void collect_init() {
    if (!ast_->init) {
      err({}, "model has no init declaration");
      return;
    }
    const InitDecl& init = *ast_->init;
    if (init.total <= 0) err(init.pos, "population size must be positive");
    m_.init_total = init.total;
    long sum = 0;
    std::set<std::pair<int, Store>> seen;
    for (const auto& entry : init.entries) {
      auto si = m_.state_idx.find(entry.state);
      if (si == m_.state_idx.end()) {
        err(entry.pos, "init entry names undeclared state '" + entry.state + "'");
        continue;
      }
      Store store;
      store.vals.assign(m_.attrs.size(), -1);
      bool ok = true;
      for (const auto& [attr, value] : entry.assigns) {
        auto ai = m_.attr_idx.find(attr);
        if (ai == m_.attr_idx.end()) {
          err(entry.pos, "init entry assigns undeclared attribute '" + attr + "'");
          ok = false;
          continue;
        }
        if (store.vals[ai->second] >= 0) {
          err(entry.pos, "init entry assigns attribute '" + attr + "' twice");
          ok = false;
          continue;
        }
        auto ev = m_.enum_value_idx.find(value);
        if (ev == m_.enum_value_idx.end() || ev->second.first != m_.attrs[ai->second].type) {
          err(entry.pos, "'" + value + "' is not a value of attype '" +
                             m_.enum_types[m_.attrs[ai->second].type].name + "'");
          ok = false;
          continue;
        }
        store.vals[ai->second] = ev->second.second;
      }
      for (size_t i = 0; i < m_.attrs.size(); ++i)
        if (store.vals[i] < 0) {
          err(entry.pos, "init entry does not assign attribute '" + m_.attrs[i].name + "'");
          ok = false;
        }
      if (!ok) continue;
      if (!seen.insert({si->second, store}).second) {
        err(entry.pos, "duplicate init entry for (" + entry.state + ", " +
                           m_.store_text(store) + ")");
        continue;
      }
      sum += entry.count;
      m_.init_entries.emplace_back(si->second, store, entry.count);
    }
    if (!diags_.has_errors() && sum != init.total)
      err(init.pos, "init entry counts sum to " + std::to_string(sum) +
                        ", declared population is " + std::to_string(init.total));
  }

  void calls_of(const Expr& e, std::set<std::string>& out) {
    if (e.kind == ExprKind::Call && m_.funcs.count(e.name)) out.insert(e.name);
    for (const auto& a : e.args) calls_of(*a, out);
  }

  void check_recursion() {
    std::map<std::string, std::set<std::string>> graph;
    for (const auto& [name, f] : m_.funcs) {
      auto& edges = graph[name];
      if (f->body) calls_of(*f->body, edges);
      for (const auto& row : f->rows) calls_of(*row.value, edges);
    }
    // colors: 0 unvisited, 1 on stack, 2 done
    std::map<std::string, int> color;
    std::vector<std::string> stack;
    auto dfs = [&](auto&& self, const std::string& n) -> bool {
      color[n] = 1;
      stack.push_back(n);
      for (const auto& callee : graph[n]) {
        if (color[callee] == 1) {
          std::ostringstream os;
          os << "function '" << callee << "' is recursive (";
          for (auto it = std::find(stack.begin(), stack.end(), callee); it != stack.end(); ++it)
            os << *it << " -> ";
          os << callee << ")";
          err(m_.funcs.at(callee)->pos, os.str());
          return true;
        }
        if (color[callee] == 0 && self(self, callee)) return true;
      }
      stack.pop_back();
      color[n] = 2;
      return false;
    };
    for (const auto& [name, f] : m_.funcs) {
      (void)f;
      if (color[name] == 0 && dfs(dfs, name)) return; // first cycle is enough
    }
  }

  // Evaluate everything the translator will evaluate, over every store (and
  // store pair for predicates), so later stages can assume totality.
  void dynamic_checks() {
    std::vector<Store> stores = enumerate_stores(m_);
    for (const auto& [name, u] : m_.updates) {
      for (const auto& store : stores) {
        try {
          eval_update(name, store, m_);
        } catch (const EvalError& e) {
          err(u->pos, e.what());
          break;
        }
      }
    }
    for (size_t si = 0; si < m_.states.size(); ++si) {
      const StateEq& s = *m_.states[si];
      for (size_t j = 0; j < s.summands.size(); ++j) {
        const Summand& sm = s.summands[j];
        std::string who = summand_name(m_, static_cast<int>(si), static_cast<int>(j));
        if (!sm.is_rest) {
          for (const auto& store : stores) {
            try {
              Value g = eval_local(*sm.guard, store, m_);
              if (g.kind != Value::Kind::Bool) {
                err(sm.pos, "guard of " + who + " is not boolean at store " +
                                m_.store_text(store));
                break;
              }
            } catch (const EvalError& e) {
              err(sm.pos, "guard of " + who + " at store " + m_.store_text(store) + ": " +
                              e.what());
              break;
            }
          }
          if (sm.prob.frc && sm.prob.frc->name.empty())
            check_pred(*sm.prob.frc->args[0], stores,
                       "occupancy predicate of " + who);
        }
        check_pred(*sm.action.pred, stores, "communication predicate of " + who);
      }
    }
  }

  void check_pred(const Expr& pred, const std::vector<Store>& stores, const std::string& who) {
    for (const auto& store : stores) {
      try {
        ClosedPred cp = eval_local_pred(pred, store, m_);
        for (const auto& partner : stores) sat_remote(cp, partner, m_);
      } catch (const EvalError& e) {
        err(pred.pos, who + " at store " + m_.store_text(store) + ": " + e.what());
        return;
      }
    }
  }
};

} // namespace

ValidateResult validate_model(std::shared_ptr<ModelAST> ast) {
  return Validator(std::move(ast)).run();
}

} // namespace piff
