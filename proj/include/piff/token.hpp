#pragma once

#include <string>
#include <vector>

#include "piff/diagnostics.hpp"

namespace piff {

enum class Tok {
  // keywords
  KwAttype, KwEnum, KwConst, KwAttribute, KwFunc, KwEndfunc, KwCase, KwOf,
  KwUpdate, KwEndupdate, KwWith, KwState, KwInit, KwRest, KwTrue, KwFalse,
  KwFrc, KwMy, KwFloat,
  // literals / names
  Ident, Number,
  // punctuation
  Semi, Comma, Dot, LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Assign,      // :=
  DblColon,    // ::
  Colon,
  OutMark,     // <>
  InMark,      // ()  (lexed as LParen RParen by the parser, not a token)
  Eq, Ne, Le, Lt, Ge, Gt,
  Plus, Minus, Star, Slash,
  Not, AndAnd,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

// Lexes PiFF source. Illegal characters are reported with their position and
// skipped so later phases still see a token stream.
std::vector<Token> tokenize(std::string_view source, DiagnosticList& diags);

const char* token_name(Tok kind);

} // namespace piff
