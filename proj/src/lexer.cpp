#include "piff/token.hpp"

#include <cctype>
#include <map>

namespace piff {

namespace {

const std::map<std::string, Tok, std::less<>> kKeywords = {
    {"attype", Tok::KwAttype},       {"enum", Tok::KwEnum},
    {"const", Tok::KwConst},         {"attribute", Tok::KwAttribute},
    {"func", Tok::KwFunc},           {"endfunc", Tok::KwEndfunc},
    {"case", Tok::KwCase},           {"of", Tok::KwOf},
    {"update", Tok::KwUpdate},       {"endupdate", Tok::KwEndupdate},
    {"with", Tok::KwWith},           {"state", Tok::KwState},
    {"init", Tok::KwInit},           {"rest", Tok::KwRest},
    {"true", Tok::KwTrue},           {"false", Tok::KwFalse},
    {"frc", Tok::KwFrc},             {"my", Tok::KwMy},
    {"float", Tok::KwFloat},
};

} // namespace

const char* token_name(Tok kind) {
  switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Assign: return "':='";
    case Tok::DblColon: return "'::'";
    case Tok::Colon: return "':'";
    case Tok::OutMark: return "'<>'";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'!='";
    case Tok::Le: return "'<='";
    case Tok::Lt: return "'<'";
    case Tok::Ge: return "'>='";
    case Tok::Gt: return "'>'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Not: return "'!'";
    case Tok::AndAnd: return "'&&'";
    case Tok::End: return "end of input";
    default: return "keyword";
  }
}

std::vector<Token> tokenize(std::string_view src, DiagnosticList& diags) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto peek = [&](size_t k = 0) -> char { return i + k < src.size() ? src[i + k] : '\0'; };
  auto advance = [&] {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  auto push = [&](Tok kind, std::string text, SourcePos pos) {
    out.push_back({kind, std::move(text), pos});
  };

  while (i < src.size()) {
    char c = peek();
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < src.size() && peek() != '\n') advance();
      continue;
    }
    if (c == '/' && peek(1) == '*') {
      SourcePos pos{line, col};
      advance();
      advance();
      while (i < src.size() && !(peek() == '*' && peek(1) == '/')) advance();
      if (i >= src.size()) {
        diags.error(pos, "unterminated block comment");
        break;
      }
      advance();
      advance();
      continue;
    }

    SourcePos pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
        word += peek();
        advance();
      }
      auto kw = kKeywords.find(word);
      push(kw == kKeywords.end() ? Tok::Ident : kw->second, word, pos);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        num += peek();
        advance();
      }
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        num += '.';
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          num += peek();
          advance();
        }
      }
      push(Tok::Number, num, pos);
      continue;
    }

    auto two = [&](char a, char b) { return c == a && peek(1) == b; };
    if (two(':', '=')) { advance(); advance(); push(Tok::Assign, ":=", pos); continue; }
    if (two(':', ':')) { advance(); advance(); push(Tok::DblColon, "::", pos); continue; }
    if (two('<', '>')) { advance(); advance(); push(Tok::OutMark, "<>", pos); continue; }
    if (two('<', '=')) { advance(); advance(); push(Tok::Le, "<=", pos); continue; }
    if (two('>', '=')) { advance(); advance(); push(Tok::Ge, ">=", pos); continue; }
    if (two('!', '=')) { advance(); advance(); push(Tok::Ne, "!=", pos); continue; }
    if (two('&', '&')) { advance(); advance(); push(Tok::AndAnd, "&&", pos); continue; }

    Tok kind;
    switch (c) {
      case ';': kind = Tok::Semi; break;
      case ',': kind = Tok::Comma; break;
      case '.': kind = Tok::Dot; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '{': kind = Tok::LBrace; break;
      case '}': kind = Tok::RBrace; break;
      case '[': kind = Tok::LBracket; break;
      case ']': kind = Tok::RBracket; break;
      case ':': kind = Tok::Colon; break;
      case '=': kind = Tok::Eq; break;
      case '<': kind = Tok::Lt; break;
      case '>': kind = Tok::Gt; break;
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case '/': kind = Tok::Slash; break;
      case '!': kind = Tok::Not; break;
      default:
        diags.error(pos, std::string("illegal character '") + c + "'");
        advance();
        continue;
    }
    advance();
    push(kind, std::string(1, c), pos);
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

} // namespace piff
