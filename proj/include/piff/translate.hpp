#pragma once

#include "piff/checked_model.hpp"
#include "piff/flatspec.hpp"

namespace piff {

struct TranslateOptions {
  bool prune = true; // drop states unreachable from the initial population
};

// Flattening: every (agent state, store, outbox) combination becomes one DTMC
// state, every summand becomes a family of actions (one per store the update
// can produce) whose definitions are occupancy polynomials. The outbox slot
// records what an agent emitted last step so that receivers can count
// matching senders; agents that have not moved yet sit in distinguished
// initial states. Action definitions that are identically zero are removed.
FlatSpec translate(CheckedModel& model, const TranslateOptions& opts = {});

} // namespace piff
