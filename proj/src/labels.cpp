#include "piff/labels.hpp"

#include <algorithm>
#include <cctype>

namespace piff {

namespace {

struct LineScanner {
  std::string_view text;
  int line;
  size_t i = 0;

  void skip_space() {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
  }
  SourcePos pos() const { return {line, static_cast<int>(i) + 1}; }
  bool done() {
    skip_space();
    return i >= text.size();
  }
  bool take(char c) {
    skip_space();
    if (i < text.size() && text[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  bool take_assign() {
    skip_space();
    if (i + 1 < text.size() && text[i] == ':' && text[i + 1] == '=') {
      i += 2;
      return true;
    }
    return false;
  }
  std::string ident() {
    skip_space();
    size_t start = i;
    auto ok = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    while (i < text.size() && ok(text[i])) ++i;
    return std::string(text.substr(start, i - start));
  }
};

} // namespace

LabelParseResult parse_labels(std::string_view src, std::string file_name) {
  LabelParseResult result;
  result.diags.file = std::move(file_name);
  LabelFile file;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= src.size()) {
    size_t eol = src.find('\n', pos);
    if (eol == std::string_view::npos) eol = src.size();
    std::string_view line = src.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);

    LineScanner sc{line, line_no};
    if (sc.done()) continue;

    LabelDef def;
    def.pos = sc.pos();
    def.name = sc.ident();
    if (def.name.empty()) {
      result.diags.error(sc.pos(), "expected a proposition name");
      continue;
    }
    if (!sc.take_assign()) {
      result.diags.error(sc.pos(), "expected ':=' after '" + def.name + "'");
      continue;
    }
    bool bad = false;
    for (;;) {
      LabelAtom atom;
      SourcePos apos = sc.pos();
      std::string field = sc.ident();
      if (field.empty()) {
        result.diags.error(apos, "expected 'state' or an attribute name");
        bad = true;
        break;
      }
      atom.on_state = field == "state";
      if (!atom.on_state) atom.attr = field;
      std::string kw = sc.ident();
      if (kw != "in" || !sc.take('{')) {
        result.diags.error(sc.pos(), "expected \"in {\" after '" + field + "'");
        bad = true;
        break;
      }
      do {
        std::string v = sc.ident();
        if (v.empty()) {
          result.diags.error(sc.pos(), "expected a value name in the membership set");
          bad = true;
          break;
        }
        atom.values.push_back(std::move(v));
      } while (sc.take(','));
      if (bad || !sc.take('}')) {
        if (!bad) result.diags.error(sc.pos(), "expected '}'");
        bad = true;
        break;
      }
      def.atoms.push_back(std::move(atom));
      if (sc.done()) break;
      std::string conj = sc.ident();
      if (conj != "and") {
        result.diags.error(sc.pos(), "expected 'and' or end of line");
        bad = true;
        break;
      }
    }
    if (bad) continue;
    bool dup = std::any_of(file.defs.begin(), file.defs.end(),
                           [&](const LabelDef& d) { return d.name == def.name; });
    if (dup) {
      result.diags.error(def.pos, "proposition '" + def.name + "' is defined twice");
      continue;
    }
    file.defs.push_back(std::move(def));
  }

  if (!result.diags.has_errors()) result.file = std::move(file);
  return result;
}

LabelApplyResult apply_labels(const LabelFile& file, const PolyMatrix& m) {
  LabelApplyResult result;
  LabelMap labels(m.dim());

  for (const LabelDef& def : file.defs) {
    for (int i = 0; i < m.dim(); ++i) {
      bool holds = true;
      for (const LabelAtom& atom : def.atoms) {
        const std::string* value = nullptr;
        if (atom.on_state) {
          if (!m.agent[i]) {
            result.diags.error(def.pos, "proposition '" + def.name +
                                            "' tests the agent state, but '" +
                                            m.states[i] + "' carries no such metadata");
            holds = false;
            break;
          }
          value = &*m.agent[i];
        } else {
          bool have = false;
          if (m.store[i]) {
            auto attr_it = m.store[i]->find(atom.attr);
            if (attr_it != m.store[i]->end()) {
              value = &attr_it->second;
              have = true;
            }
          }
          if (!have) {
            result.diags.error(def.pos, "proposition '" + def.name + "' tests attribute '" +
                                            atom.attr + "', but '" + m.states[i] +
                                            "' carries no value for it");
            holds = false;
            break;
          }
        }
        if (std::find(atom.values.begin(), atom.values.end(), *value) == atom.values.end()) {
          holds = false;
          break;
        }
      }
      if (holds) labels[i].push_back(def.name);
    }
    if (result.diags.has_errors()) break;
  }

  for (auto& aps : labels) std::sort(aps.begin(), aps.end());
  if (!result.diags.has_errors()) result.labels = std::move(labels);
  return result;
}

} // namespace piff
