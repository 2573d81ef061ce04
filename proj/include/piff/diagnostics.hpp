#pragma once

#include <string>
#include <vector>

namespace piff {

struct SourcePos {
  int line = 0; // 1-based; 0 means "no position"
  int col = 0;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourcePos pos;
  std::string message;
};

// Accumulated per compilation unit; rendered as "file:line:col: severity: message".
struct DiagnosticList {
  std::string file;
  std::vector<Diagnostic> items;

  void error(SourcePos pos, std::string msg) {
    items.push_back({Severity::Error, pos, std::move(msg)});
  }
  void warning(SourcePos pos, std::string msg) {
    items.push_back({Severity::Warning, pos, std::move(msg)});
  }
  bool has_errors() const {
    for (const auto& d : items)
      if (d.severity == Severity::Error) return true;
    return false;
  }
  std::string render() const;
};

} // namespace piff
