#include "dar/engine/tokenizer.hpp"

#include <cctype>

namespace dar::engine {

namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::vector<Token> tokenize(const std::string& sql) {
  std::vector<Token> out;
  size_t i = 0;
  const size_t n = sql.size();

  while (i < n) {
    char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    // -- line comment
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    // /* block comment */
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      size_t start = i;
      i += 2;
      while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
      if (i + 1 >= n) {
        throw TokenError("unterminated block comment at offset " +
                         std::to_string(start));
      }
      i += 2;
      continue;
    }
    // 'string literal' with '' escape
    if (c == '\'') {
      size_t start = i;
      ++i;
      std::string value;
      bool closed = false;
      while (i < n) {
        if (sql[i] == '\'') {
          if (i + 1 < n && sql[i + 1] == '\'') {
            value.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        value.push_back(sql[i]);
        ++i;
      }
      if (!closed) {
        throw TokenError("unterminated string literal at offset " +
                         std::to_string(start));
      }
      Token t;
      t.kind = TokenKind::String;
      t.text = std::move(value);
      t.begin = start;
      t.end = i;
      out.push_back(std::move(t));
      continue;
    }
    // "quoted identifier" with "" escape
    if (c == '"') {
      size_t start = i;
      ++i;
      std::string value;
      bool closed = false;
      while (i < n) {
        if (sql[i] == '"') {
          if (i + 1 < n && sql[i + 1] == '"') {
            value.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        value.push_back(sql[i]);
        ++i;
      }
      if (!closed) {
        throw TokenError("unterminated quoted identifier at offset " +
                         std::to_string(start));
      }
      Token t;
      t.kind = TokenKind::QuotedIdent;
      t.text = std::move(value);
      t.begin = start;
      t.end = i;
      out.push_back(std::move(t));
      continue;
    }
    // number: digits [. digits] [e[+-]digits], or .5 form
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n &&
         std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      size_t start = i;
      while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      if (i < n && sql[i] == '.') {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      }
      if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
        size_t save = i;
        ++i;
        if (i < n && (sql[i] == '+' || sql[i] == '-')) ++i;
        if (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) {
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        } else {
          i = save;  // 'e' belongs to a following identifier
        }
      }
      Token t;
      t.kind = TokenKind::Number;
      t.text = sql.substr(start, i - start);
      t.begin = start;
      t.end = i;
      out.push_back(std::move(t));
      continue;
    }
    if (ident_start(c)) {
      size_t start = i;
      while (i < n && ident_char(sql[i])) ++i;
      Token t;
      t.kind = TokenKind::Ident;
      t.text = sql.substr(start, i - start);
      t.upper.reserve(t.text.size());
      for (char ch : t.text) {
        t.upper.push_back(
            static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
      }
      t.begin = start;
      t.end = i;
      out.push_back(std::move(t));
      continue;
    }
    // punctuation, two-char operators first
    {
      size_t start = i;
      std::string p;
      auto two = (i + 1 < n) ? sql.substr(i, 2) : std::string();
      if (two == "<=" || two == ">=" || two == "<>" || two == "!=" ||
          two == "||") {
        p = two;
        i += 2;
      } else {
        static const std::string kSingle = "(),.*+-/%<>=;";
        if (kSingle.find(c) == std::string::npos) {
          throw TokenError(std::string("unexpected character '") + c +
                           "' at offset " + std::to_string(i));
        }
        p = std::string(1, c);
        ++i;
      }
      Token t;
      t.kind = TokenKind::Punct;
      t.text = std::move(p);
      t.begin = start;
      t.end = i;
      out.push_back(std::move(t));
    }
  }

  Token end;
  end.kind = TokenKind::End;
  end.begin = n;
  end.end = n;
  out.push_back(std::move(end));
  return out;
}

}  // namespace dar::engine
