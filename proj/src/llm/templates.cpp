#include "dar/llm/templates.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dar_prompts_data.hpp"

namespace dar::llm {

namespace {

std::set<std::string> scan_placeholders(const std::string& text) {
  std::set<std::string> vars;
  size_t i = 0;
  while ((i = text.find("{{", i)) != std::string::npos) {
    size_t end = text.find("}}", i + 2);
    if (end == std::string::npos) break;
    vars.insert(text.substr(i + 2, end - i - 2));
    i = end + 2;
  }
  return vars;
}

}  // namespace

TemplateRegistry TemplateRegistry::builtin() {
  TemplateRegistry reg;
  for (const auto& [name, text] : embedded::kPromptFiles) {
    reg.add(std::string(name), std::string(text));
  }
  return reg;
}

void TemplateRegistry::add(const std::string& id, const std::string& text) {
  Template t;
  t.id = id;
  t.text = text;
  t.variables = scan_placeholders(text);
  templates_[id] = std::move(t);
}

void TemplateRegistry::load_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw ConfigError("prompt directory not found: " + dir);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::ostringstream buf;
    buf << in.rdbuf();
    add(entry.path().stem().string(), buf.str());
  }
}

const Template& TemplateRegistry::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw DarError("unknown_template", "no template named '" + id + "'");
  }
  return it->second;
}

std::string TemplateRegistry::render(
    const std::string& id,
    const std::map<std::string, std::string>& vars) const {
  const Template& t = get(id);
  for (const auto& v : t.variables) {
    if (!vars.count(v)) {
      throw DarError("template_var_mismatch",
                     "template '" + id + "' needs variable '" + v + "'");
    }
  }
  for (const auto& [k, _] : vars) {
    if (!t.variables.count(k)) {
      throw DarError("template_var_mismatch",
                     "template '" + id + "' does not accept variable '" + k +
                         "'");
    }
  }
  std::string out = t.text;
  for (const auto& [k, v] : vars) {
    std::string needle = "{{" + k + "}}";
    size_t i = 0;
    while ((i = out.find(needle, i)) != std::string::npos) {
      out.replace(i, needle.size(), v);
      i += v.size();
    }
  }
  return out;
}

double TemplateRegistry::default_temperature(const std::string& id) const {
  if (id == "draft" || id == "revise" || id == "lint_repair") return 0.7;
  return 0.2;
}

}  // namespace dar::llm
