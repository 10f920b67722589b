#pragma once

#include <string>

#include "dar/engine/ast.hpp"
#include "dar/engine/tokenizer.hpp"

namespace dar::engine {

class SyntaxError : public DarError {
 public:
  explicit SyntaxError(const std::string& m) : DarError("syntax_error", m) {}
};

// Parses one SELECT statement (optionally ';'-terminated). The grammar is
// the documented dialect subset; see docs/dialect.md. Throws SyntaxError /
// TokenError on malformed input.
SelectStmt parse_select(const std::string& sql);

}  // namespace dar::engine
