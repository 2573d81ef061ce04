#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>

#include "doctest.h"
#include "piff/ast.hpp"
#include "piff/checked_model.hpp"

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string si_path() { return std::string(PIFF_MODELS_DIR) + "/si.piff"; }
inline std::string relay_path() { return std::string(PIFF_MODELS_DIR) + "/relay.piff"; }

// parse + validate, requiring success
inline piff::CheckedModel load_model(const std::string& path) {
  auto parsed = piff::parse_model(read_file(path), path);
  REQUIRE_MESSAGE(parsed.ast.has_value(), parsed.diags.render());
  auto checked =
      piff::validate_model(std::make_shared<piff::ModelAST>(std::move(*parsed.ast)));
  REQUIRE_MESSAGE(checked.model.has_value(), checked.diags.render());
  return std::move(*checked.model);
}

// parse (must succeed) + validate, returning whatever diagnostics came out
inline piff::ValidateResult check_source(const std::string& src) {
  auto parsed = piff::parse_model(src, "test.piff");
  REQUIRE_MESSAGE(parsed.ast.has_value(), parsed.diags.render());
  return piff::validate_model(std::make_shared<piff::ModelAST>(std::move(*parsed.ast)));
}

inline bool has_error_containing(const piff::DiagnosticList& d, const std::string& needle) {
  for (const auto& item : d.items)
    if (item.severity == piff::Severity::Error &&
        item.message.find(needle) != std::string::npos)
      return true;
  return false;
}
