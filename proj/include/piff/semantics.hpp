#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "piff/checked_model.hpp"

namespace piff {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A communication predicate after local actualization: my.attr references,
// constants and function-free value expressions are folded to values; bare
// attribute names remain and refer to the store the predicate is later
// checked against.
struct ClosedPred {
  enum class K { Lit, Cmp, Not, And };
  struct Operand {
    bool is_attr = false;
    int attr = -1;
    Value v;
  };
  K k = K::Lit;
  bool lit = false;
  CmpOp op = CmpOp::Eq;
  Operand lhs, rhs;
  std::vector<ClosedPred> kids;

  std::string canonical(const CheckedModel& m) const; // stable identity text
};

// Local evaluation under a store: literals, constants, my.attr lookups,
// function application, guards. Occupancy terms are rejected.
Value eval_local(const Expr& e, const Store& store, const CheckedModel& m);

// Local actualization of a communication predicate (the my.*-elimination
// half of local evaluation).
ClosedPred eval_local_pred(const Expr& pred, const Store& store, const CheckedModel& m);

// Satisfaction of an actualized predicate against a partner store.
bool sat_remote(const ClosedPred& pred, const Store& partner, const CheckedModel& m);

// Probability-weighted target stores of a store update at a given source
// store. Zero-probability branches are dropped; the masses sum to 1 exactly.
using StoreDistribution = std::vector<std::pair<Store, Rational>>;
StoreDistribution eval_update(const std::string& update, const Store& store,
                              const CheckedModel& m);

// All stores, lexicographic in attribute declaration order.
std::vector<Store> enumerate_stores(const CheckedModel& m);

// A written outbox: the sender's store at send time, the actualized
// predicate, and the message label.
struct Outbox {
  int sender_store = -1;
  std::string label;
  ClosedPred pred;
  std::string pred_canon;
};

// Outbox universe. Index 0 is the empty outbox; full outboxes are 1-based
// into `full`, deduplicated and sorted by (sender store, label, predicate).
// The translator additionally uses index -1 for the initial outbox, which
// matches no input and exists only for initial component states.
struct OutboxSet {
  std::vector<Outbox> full;
  int count() const { return static_cast<int>(full.size()) + 1; }
  int index_of(int sender_store, const std::string& canon, const std::string& label) const;
};

OutboxSet enumerate_outboxes(const CheckedModel& m, const std::vector<Store>& stores);

constexpr int kOutboxEmpty = 0;
constexpr int kOutboxInit = -1;

struct ComponentState {
  int state = -1;
  int store = -1;
  int outbox = kOutboxEmpty;
  auto operator<=>(const ComponentState&) const = default;
};

// The component state space: states x stores x ({empty} + written outboxes),
// in that nesting order. Initial-outbox states are not part of this
// enumeration; the translator appends them for the initial population.
std::vector<ComponentState> enumerate_component_states(const CheckedModel& m,
                                                       const std::vector<Store>& stores,
                                                       const OutboxSet& outboxes);

} // namespace piff
