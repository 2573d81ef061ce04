#pragma once

// Atomic-proposition definition files: each line names a proposition and
// gives a membership predicate over a state's origin metadata, e.g.
//
//   Sh := state in {S} and loc in {A, C}
//
// Propositions are evaluated against the agent/store annotations carried by
// a PolyMatrix, yielding the label map used for partition refinement.

#include <optional>
#include <string>
#include <vector>

#include "piff/diagnostics.hpp"
#include "piff/polymatrix.hpp"

namespace piff {

struct LabelAtom {
  bool on_state = false; // true: tests the agent state name
  std::string attr;      // attribute name when on_state is false
  std::vector<std::string> values;
};

struct LabelDef {
  std::string name;
  std::vector<LabelAtom> atoms; // conjunction
  SourcePos pos;
};

struct LabelFile {
  std::vector<LabelDef> defs;
};

struct LabelParseResult {
  std::optional<LabelFile> file;
  DiagnosticList diags;
};

LabelParseResult parse_labels(std::string_view src, std::string file_name);

// Evaluation fails when a definition needs metadata a state does not carry;
// that is an error, not a silent "false".
struct LabelApplyResult {
  std::optional<LabelMap> labels;
  DiagnosticList diags;
};

LabelApplyResult apply_labels(const LabelFile& file, const PolyMatrix& m);

} // namespace piff
