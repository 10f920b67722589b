#include <map>

#include "dar/aisql/shim.hpp"
#include "dar/engine/tokenizer.hpp"

namespace dar::aisql {

namespace {

using engine::Token;
using engine::TokenKind;

const std::map<std::string, AiOutputType>& function_table() {
  static const std::map<std::string, AiOutputType> kFunctions = {
      {"ML.GENERATE_TEXT", AiOutputType::Text},
      {"AI.GENERATE", AiOutputType::Text},
      {"AI.GENERATE_BOOL", AiOutputType::Bool},
      {"AI.GENERATE_TABLE", AiOutputType::Table},
      {"AI.GENERATE_DOUBLE", AiOutputType::Double},
  };
  return kFunctions;
}

}  // namespace

std::vector<AiCallSite> scan_ai_calls(const std::string& sql_text) {
  std::vector<Token> toks;
  try {
    toks = engine::tokenize(sql_text);
  } catch (const engine::TokenError& e) {
    throw ParseError(e.what());
  }

  std::vector<AiCallSite> sites;
  size_t i = 0;
  while (i + 3 < toks.size()) {
    // IDENT '.' IDENT '(' with the dotted name in the function table
    if (toks[i].kind != TokenKind::Ident || !toks[i + 1].is_punct(".") ||
        toks[i + 2].kind != TokenKind::Ident || !toks[i + 3].is_punct("(")) {
      ++i;
      continue;
    }
    std::string name = toks[i].upper + "." + toks[i + 2].upper;
    auto it = function_table().find(name);
    if (it == function_table().end()) {
      ++i;
      continue;
    }

    AiCallSite site;
    site.function = name;
    site.output_type = it->second;
    site.begin = toks[i].begin;

    // Walk to the matching close paren, splitting top-level arguments.
    size_t j = i + 4;
    int depth = 1;
    std::vector<std::pair<size_t, size_t>> arg_spans;  // token index ranges
    size_t arg_start = j;
    size_t close = 0;
    while (true) {
      if (toks[j].kind == TokenKind::End) {
        throw ParseError("unbalanced parentheses in " + name + " at offset " +
                         std::to_string(site.begin));
      }
      if (toks[j].is_punct("(")) depth++;
      if (toks[j].is_punct(")")) {
        depth--;
        if (depth == 0) {
          if (j > arg_start) arg_spans.emplace_back(arg_start, j);
          close = j;
          break;
        }
      }
      if (depth == 1 && toks[j].is_punct(",")) {
        arg_spans.emplace_back(arg_start, j);
        arg_start = j + 1;
      }
      ++j;
    }
    site.end = toks[close].end;

    size_t expected = site.output_type == AiOutputType::Table ? 2 : 1;
    if (arg_spans.size() != expected) {
      throw ParseError(name + " expects " + std::to_string(expected) +
                       " argument(s), got " + std::to_string(arg_spans.size()));
    }
    const auto& [pb, pe] = arg_spans[0];
    site.prompt_expr = sql_text.substr(toks[pb].begin,
                                       toks[pe - 1].end - toks[pb].begin);
    if (site.output_type == AiOutputType::Table) {
      const auto& [sb, se] = arg_spans[1];
      if (se - sb != 1 || toks[sb].kind != TokenKind::String) {
        throw ParseError(name + " schema argument must be a string literal");
      }
      site.table_schema = toks[sb].text;
    }

    sites.push_back(std::move(site));
    i = close + 1;  // outermost call wins; nested calls surface in rewrite
  }
  return sites;
}

}  // namespace dar::aisql
