#pragma once

// Probabilistic bisimulation on occupancy-dependent transition matrices.
// Equivalence of two states demands equal labels and, for every block of the
// partition, symbolically equal cumulative transition polynomials — decided
// exactly on canonical forms, never numerically.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>
#include "piff/polymatrix.hpp"

namespace piff {

// raised when a quotient entry cannot be written over block aggregates
struct NotLumpable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Partition {
  // each block sorted ascending; blocks ordered by their smallest member,
  // which doubles as the block's stable id and its quotient representative
  std::vector<std::vector<int>> blocks;
  std::vector<int> block_of; // state index -> index into blocks
  int size() const { return static_cast<int>(blocks.size()); }
};

// normalizes blocks (sorting, ordering, reverse map); asserts a disjoint cover
Partition make_partition(std::vector<std::vector<int>> blocks, int n_states);

// one block per distinct label set; an empty map means "all states alike"
Partition initial_partition(const LabelMap& labels, int n_states);

// coarsest refinement of the label partition under which all states of a
// block have equal class-cumulative rows; deterministic splitter-queue order
Partition refine_partition(const PolyMatrix& m, const LabelMap& labels);

// rewrite p as a form over the block-aggregate variables M_Q = sum of the
// block's occupancies; throws NotLumpable naming the first offending
// coefficient pair
QuadForm rewrite_in_classes(const QuadForm& p, const Partition& part);

// deterministic block names derived from shared label sets ("QSh" for {Sh});
// numeric suffixes disambiguate repeated sets
std::vector<std::string> block_names(const Partition& part, const LabelMap& labels);

struct Quotient {
  PolyMatrix matrix;   // one state per block, labels and metadata inherited
  Partition partition; // over the original state space
};

// requires a bisimulation partition (as produced by refine_partition);
// throws NotLumpable if some class sum is not aggregate-expressible
Quotient quotient_model(const PolyMatrix& m, const LabelMap& labels, const Partition& part);

nlohmann::json partition_to_json(const Partition& part, const PolyMatrix& m,
                                 const std::vector<std::string>& names);

} // namespace piff
