#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dar/errors.hpp"

namespace dar::engine {

// Thrown for malformed token streams (unterminated string/comment). The
// executor path converts this into a syntax_error outcome; the AI-call
// scanner reports it as parse_error.
class TokenError : public DarError {
 public:
  explicit TokenError(const std::string& m) : DarError("syntax_error", m) {}
};

enum class TokenKind { Ident, QuotedIdent, Number, String, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;   // raw slice for idents/numbers/punct, decoded for strings
  std::string upper;  // uppercased ident text, empty otherwise
  size_t begin = 0;   // byte offset of first char
  size_t end = 0;     // one past last char

  bool is_punct(const char* p) const {
    return kind == TokenKind::Punct && text == p;
  }
  bool is_kw(const char* kw) const {
    return kind == TokenKind::Ident && upper == kw;
  }
};

// Tokenizes the documented SQL subset: identifiers ("quoted" with ""-escape),
// numbers, 'string literals' with ''-escape, punctuation (incl. <= >= <> !=
// ||), -- line comments and /* block comments */. Comments never produce
// tokens; offsets index into the original text so call sites can be spliced.
std::vector<Token> tokenize(const std::string& sql);

}  // namespace dar::engine
