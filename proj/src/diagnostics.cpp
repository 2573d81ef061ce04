#include "piff/diagnostics.hpp"

#include <sstream>

namespace piff {

std::string DiagnosticList::render() const {
  std::ostringstream out;
  for (const auto& d : items) {
    out << file << ':' << d.pos.line << ':' << d.pos.col << ": "
        << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.message << '\n';
  }
  return out.str();
}

} // namespace piff
