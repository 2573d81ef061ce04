#include "piff/translate.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <stdexcept>

#include "piff/semantics.hpp"

namespace piff {
namespace {

uint32_t fnv1a32(std::string_view s) {
  uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

std::string pred_digest(const std::string& canon) {
  char buf[10];
  std::snprintf(buf, sizeof buf, "p%08x", fnv1a32(canon));
  return buf;
}

// everything a summand contributes at one (agent state, store) pair; the
// outbox slot of the source is irrelevant by construction, so the same
// emission list is shared by all outbox variants
struct Emission {
  FFExpr base;             // probability factor without the store update
  StoreDistribution dist;  // update outcomes
  int target_state;
  int target_outbox;       // outputs: the freshly written outbox; inputs: empty
  std::string label;
  int iota;
};

void remap_members(FFExpr& e, const std::vector<int>& remap) {
  if (e.k == FFExpr::K::FrcSum) {
    std::vector<int> kept;
    for (int i : e.members)
      if (remap[i] >= 0) kept.push_back(remap[i]);
    e.members = std::move(kept);
    return;
  }
  for (auto& kid : e.kids) remap_members(kid, remap);
}

} // namespace

FlatSpec translate(CheckedModel& m, const TranslateOptions& opts) {
  annotate_actions(m);
  const std::vector<Store> stores = enumerate_stores(m);
  const OutboxSet outboxes = enumerate_outboxes(m, stores);
  const int C = static_cast<int>(m.states.size());
  const int S = static_cast<int>(stores.size());
  const int B = outboxes.count();
  const int omega = C * S * B;

  std::map<Store, int> store_idx;
  for (int g = 0; g < S; ++g) store_idx[stores[g]] = g;

  const int total = omega + static_cast<int>(m.init_entries.size());
  auto grid_idx = [&](int c, int g, int o) { return (c * S + g) * B + o; };

  // flat-state tables: index -> (agent, store, outbox), names, metadata
  std::vector<int> flat_agent(total), flat_store(total), flat_outbox(total);
  FlatSpec spec;
  spec.states.resize(total);
  auto outbox_digest = [&](int o) -> std::string {
    if (o == kOutboxEmpty) return "eps";
    const Outbox& ob = outboxes.full[o - 1];
    return m.store_text(stores[ob.sender_store]) + "|" + pred_digest(ob.pred_canon) + "|" +
           ob.label;
  };
  auto fill_state = [&](int idx, int c, int g, const std::string& digest) {
    flat_agent[idx] = c;
    flat_store[idx] = g;
    FlatState& fs = spec.states[idx];
    fs.name = m.states[c]->name + "@" + m.store_text(stores[g]) + "@" + digest;
    fs.agent = m.states[c]->name;
    std::map<std::string, std::string> meta;
    for (size_t a = 0; a < m.attrs.size(); ++a)
      meta[m.attrs[a].name] = m.enum_value_name(m.attrs[a].type, stores[g].vals[a]);
    fs.store = std::move(meta);
  };
  for (int c = 0; c < C; ++c)
    for (int g = 0; g < S; ++g)
      for (int o = 0; o < B; ++o) {
        int idx = grid_idx(c, g, o);
        fill_state(idx, c, g, outbox_digest(o));
        flat_outbox[idx] = o;
      }
  for (size_t k = 0; k < m.init_entries.size(); ++k) {
    int idx = omega + static_cast<int>(k);
    const auto& [c, store, count] = m.init_entries[k];
    (void)count;
    fill_state(idx, c, store_idx.at(store), "init");
    flat_outbox[idx] = kOutboxInit;
  }

  // occupancy sets
  std::vector<std::vector<int>> agent_members(C);
  for (int i = 0; i < total; ++i) agent_members[flat_agent[i]].push_back(i);
  auto pred_members = [&](const ClosedPred& cp) {
    std::vector<int> out;
    std::vector<char> store_ok(S);
    for (int g = 0; g < S; ++g) store_ok[g] = sat_remote(cp, stores[g], m);
    for (int i = 0; i < total; ++i)
      if (store_ok[flat_store[i]]) out.push_back(i);
    return out;
  };

  // per-(agent state, store) emission lists, shared across outbox variants
  std::vector<std::vector<FlatSummand>> per_cg(C * S);
  int seq = 0;
  for (int c = 0; c < C; ++c) {
    const StateEq& eq = *m.states[c];
    for (int g = 0; g < S; ++g) {
      const Store& store = stores[g];
      std::vector<Emission> emissions;
      std::vector<FFExpr> active; // q_j of enabled non-rest summands
      int rest_at = -1;
      for (size_t j = 0; j < eq.summands.size(); ++j) {
        const Summand& sm = eq.summands[j];
        if (sm.is_rest) {
          rest_at = static_cast<int>(emissions.size());
          emissions.push_back({}); // placeholder, filled below
          continue;
        }
        if (!eval_local(*sm.guard, store, m).b) continue;

        FFExpr r = FFExpr::constant(1);
        if (sm.prob.coeff) {
          const Expr& ce = *sm.prob.coeff;
          r = FFExpr::constant(ce.kind == ExprKind::Number ? ce.num
                                                           : m.consts.at(ce.name).rat);
        }
        if (sm.prob.frc) {
          const Expr& fe = *sm.prob.frc;
          std::vector<int> members =
              fe.name.empty() ? pred_members(eval_local_pred(*fe.args[0], store, m))
                              : agent_members[fe.res_a];
          r = FFExpr::mul(std::move(r), FFExpr::frc_sum(std::move(members)));
        }

        Emission em;
        em.label = sm.action.label;
        em.iota = m.annotations[c][j];
        em.target_state = m.state_idx.at(sm.target);
        em.dist = eval_update(sm.action.update, store, m);
        ClosedPred pred = eval_local_pred(*sm.action.pred, store, m);
        if (sm.action.is_output) {
          em.target_outbox = outboxes.index_of(g, pred.canonical(m), sm.action.label);
          if (em.target_outbox < 0)
            throw std::logic_error("translate: outbox missing from the enumeration");
          em.base = std::move(r);
        } else {
          // partners: full outboxes with this label whose stored predicate
          // accepts me and whose sender's store passes my own predicate
          std::vector<int> match; // component outbox indices
          for (size_t f = 0; f < outboxes.full.size(); ++f) {
            const Outbox& ob = outboxes.full[f];
            if (ob.label != sm.action.label) continue;
            if (!sat_remote(ob.pred, store, m)) continue;
            if (!sat_remote(pred, stores[ob.sender_store], m)) continue;
            match.push_back(static_cast<int>(f) + 1);
          }
          std::vector<int> members;
          for (int i = 0; i < total; ++i)
            if (std::find(match.begin(), match.end(), flat_outbox[i]) != match.end())
              members.push_back(i);
          em.target_outbox = kOutboxEmpty;
          em.base = FFExpr::mul(std::move(r), FFExpr::frc_sum(std::move(members)));
        }
        active.push_back(em.base);
        emissions.push_back(std::move(em));
      }
      // fill the rest placeholder now that every enabled q_j is known
      if (rest_at >= 0) {
        for (size_t j = 0; j < eq.summands.size(); ++j) {
          const Summand& sm = eq.summands[j];
          if (!sm.is_rest) continue;
          Emission em;
          em.label = sm.action.label;
          em.iota = m.annotations[c][j];
          em.target_state = m.state_idx.at(sm.target);
          em.dist = eval_update(sm.action.update, store, m);
          ClosedPred pred = eval_local_pred(*sm.action.pred, store, m);
          em.target_outbox = outboxes.index_of(g, pred.canonical(m), sm.action.label);
          if (em.target_outbox < 0)
            throw std::logic_error("translate: outbox missing from the enumeration");
          em.base = FFExpr::sub(FFExpr::constant(1), FFExpr::add(active));
          emissions[rest_at] = std::move(em);
          break;
        }
      }

      std::vector<FlatSummand>& list = per_cg[c * S + g];
      for (const Emission& em : emissions) {
        for (const auto& [target_store, p] : em.dist) {
          FFExpr def = FFExpr::mul(em.base, FFExpr::constant(p));
          if (flat_expr_poly(def, total).is_zero()) continue; // nothing ever happens here
          int target = grid_idx(em.target_state, store_idx.at(target_store), em.target_outbox);
          std::string name =
              em.label + "_" + std::to_string(em.iota) + "_" + std::to_string(seq++);
          int aidx = static_cast<int>(spec.actions.size());
          spec.actions.push_back({std::move(name), std::move(def)});
          list.push_back({aidx, target});
        }
      }
    }
  }

  for (int c = 0; c < C; ++c)
    for (int g = 0; g < S; ++g)
      for (int o = 0; o < B; ++o) spec.states[grid_idx(c, g, o)].summands = per_cg[c * S + g];
  for (size_t k = 0; k < m.init_entries.size(); ++k) {
    int idx = omega + static_cast<int>(k);
    const auto& [c, store, count] = m.init_entries[k];
    spec.states[idx].summands = per_cg[c * S + store_idx.at(store)];
    spec.init.emplace_back(idx, count);
  }

  if (opts.prune) {
    std::vector<char> keep(total, 0);
    std::deque<int> frontier;
    for (const auto& [idx, count] : spec.init) {
      (void)count;
      keep[idx] = 1;
      frontier.push_back(idx);
    }
    while (!frontier.empty()) {
      int i = frontier.front();
      frontier.pop_front();
      for (const FlatSummand& s : spec.states[i].summands)
        if (!keep[s.target]) {
          keep[s.target] = 1;
          frontier.push_back(s.target);
        }
    }
    std::vector<int> remap(total, -1);
    int next = 0;
    for (int i = 0; i < total; ++i)
      if (keep[i]) remap[i] = next++;

    std::vector<char> action_used(spec.actions.size(), 0);
    std::vector<FlatState> kept_states;
    kept_states.reserve(next);
    for (int i = 0; i < total; ++i) {
      if (!keep[i]) continue;
      FlatState fs = std::move(spec.states[i]);
      for (FlatSummand& s : fs.summands) {
        s.target = remap[s.target];
        action_used[s.action] = 1;
      }
      kept_states.push_back(std::move(fs));
    }
    std::vector<int> action_remap(spec.actions.size(), -1);
    std::vector<FlatAction> kept_actions;
    for (size_t a = 0; a < spec.actions.size(); ++a) {
      if (!action_used[a]) continue;
      action_remap[a] = static_cast<int>(kept_actions.size());
      FlatAction fa = std::move(spec.actions[a]);
      remap_members(fa.def, remap);
      kept_actions.push_back(std::move(fa));
    }
    for (FlatState& fs : kept_states)
      for (FlatSummand& s : fs.summands) s.action = action_remap[s.action];
    for (auto& [idx, count] : spec.init) idx = remap[idx];
    spec.states = std::move(kept_states);
    spec.actions = std::move(kept_actions);
  }

  spec.state_idx.clear();
  spec.action_idx.clear();
  for (size_t i = 0; i < spec.states.size(); ++i)
    spec.state_idx[spec.states[i].name] = static_cast<int>(i);
  for (size_t a = 0; a < spec.actions.size(); ++a)
    if (!spec.action_idx.emplace(spec.actions[a].name, static_cast<int>(a)).second)
      throw std::logic_error("translate: duplicate action name " + spec.actions[a].name);
  if (spec.state_idx.size() != spec.states.size())
    throw std::logic_error("translate: duplicate flat state names");

  return spec;
}

} // namespace piff
