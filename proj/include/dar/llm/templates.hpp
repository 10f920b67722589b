#pragma once

#include <map>
#include <set>
#include <string>

#include "dar/errors.hpp"

namespace dar::llm {

struct Template {
  std::string id;
  std::string text;
  std::set<std::string> variables;  // the {{placeholders}} found in text
};

// Prompt templates are versioned plain-text files (prompts/*.txt), embedded
// at build time; a directory can override them at runtime. Rendering binds
// variables exactly: a placeholder without a binding, or a binding without a
// placeholder, is an error — this is what enforces the drafting agent's
// information boundary.
class TemplateRegistry {
 public:
  static TemplateRegistry builtin();

  void add(const std::string& id, const std::string& text);
  void load_directory(const std::string& dir);  // *.txt, name = template id

  bool has(const std::string& id) const { return templates_.count(id) > 0; }
  const Template& get(const std::string& id) const;

  std::string render(const std::string& id,
                     const std::map<std::string, std::string>& vars) const;

  // 0.2 for SQL-producing and structured-output roles, 0.7 for narrative.
  double default_temperature(const std::string& id) const;

 private:
  std::map<std::string, Template> templates_;
};

}  // namespace dar::llm
