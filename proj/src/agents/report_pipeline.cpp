#include "dar/agents/report_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace dar::agents {

const std::vector<std::string> kDefaultSections = {
    "Executive Summary", "Data Overview", "Patterns & Trends", "Anomalies",
    "Recommendations"};

namespace {

std::string join_errors(const std::vector<std::string>& errs) {
  std::ostringstream out;
  for (size_t i = 0; i < errs.size(); ++i) {
    if (i) out << "; ";
    out << errs[i];
  }
  return out.str();
}

std::string outline_prompt_text(const ReportOutline& outline) {
  std::ostringstream out;
  for (size_t i = 0; i < outline.sections.size(); ++i) {
    const auto& s = outline.sections[i];
    out << (i + 1) << ". " << s.title;
    if (!s.intent.empty()) out << " -- " << s.intent;
    if (!s.evidence_subtasks.empty()) {
      out << " (evidence:";
      for (const auto& id : s.evidence_subtasks) out << " Q" << id;
      out << ")";
    }
    out << "\n";
  }
  return out.str();
}

std::string results_prompt_text(const std::vector<ValidatedResult>& results) {
  std::ostringstream out;
  for (const auto& r : results) {
    out << "[" << r.marker << "] subtask " << r.subtask_id << ": "
        << r.candidate.sql_text << "\n"
        << r.summary << "\n";
  }
  return out.str();
}

bool has_numeral(const std::string& sentence) {
  for (char c : sentence) {
    if (std::isdigit(static_cast<unsigned char>(c))) return true;
  }
  // Spelled fractions count as numeric claims too.
  static const char* kFractions[] = {"half", "third", "quarter",
                                     "two-thirds", "three-quarters"};
  std::string low;
  low.reserve(sentence.size());
  for (char c : sentence) {
    low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (const char* f : kFractions) {
    size_t pos = low.find(f);
    while (pos != std::string::npos) {
      bool left_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(
                                      low[pos - 1]));
      size_t end = pos + std::string(f).size();
      bool right_ok = end >= low.size() ||
                      !std::isalpha(static_cast<unsigned char>(low[end]));
      if (left_ok && right_ok) return true;
      pos = low.find(f, pos + 1);
    }
  }
  return false;
}

// Extracts marker tokens like [Q2] from a chunk of text.
std::vector<std::string> find_markers(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while ((i = text.find("[Q", i)) != std::string::npos) {
    size_t close = text.find(']', i);
    if (close == std::string::npos) break;
    std::string token = text.substr(i + 1, close - i - 1);
    bool ok = token.size() > 1;
    for (size_t k = 1; k < token.size() && ok; ++k) {
      char c = token[k];
      if (std::isspace(static_cast<unsigned char>(c))) ok = false;
    }
    if (ok) out.push_back(token);
    i = close + 1;
  }
  return out;
}

}  // namespace

std::vector<LintFinding> lint_draft(
    const std::string& markdown,
    const std::map<std::string, int>& evidence_index) {
  std::vector<LintFinding> findings;
  std::istringstream in(markdown);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = line;
    size_t b = t.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    if (t[b] == '#') continue;  // headings are labels, not claims
    // Split the line into sentences at . ! ? boundaries.
    std::vector<std::string> sentences;
    std::string cur;
    for (size_t i = 0; i < t.size(); ++i) {
      cur.push_back(t[i]);
      if (t[i] == '.' || t[i] == '!' || t[i] == '?') {
        // A marker directly after the period stays with this sentence.
        size_t j = i + 1;
        while (j < t.size() && t[j] == ' ') ++j;
        if (j < t.size() && t[j] == '[') {
          size_t close = t.find(']', j);
          if (close != std::string::npos &&
              t.compare(j, 2, "[Q") == 0) {
            cur += t.substr(i + 1, close - i);
            i = close;
          }
        }
        sentences.push_back(cur);
        cur.clear();
      }
    }
    if (!cur.empty()) sentences.push_back(cur);

    for (const auto& s : sentences) {
      if (!has_numeral(s)) continue;
      std::vector<std::string> markers = find_markers(s);
      bool resolvable = false;
      for (const auto& m : markers) {
        if (evidence_index.count(m)) {
          resolvable = true;
          break;
        }
      }
      if (!resolvable) {
        findings.push_back(
            {s, markers.empty()
                    ? "numeric claim without an evidence marker"
                    : "markers do not resolve to validated queries"});
      }
    }
  }
  return findings;
}

ReportOutline plan_structure(SessionState& session, llm::Gateway& gateway,
                             const ResearchPlan& plan,
                             const std::vector<ValidatedResult>& results) {
  if (results.empty()) {
    throw DarError("no_validated_results",
                   "structure planning needs at least one validated result");
  }
  std::ostringstream skeleton;
  for (const auto& s : kDefaultSections) skeleton << "- " << s << "\n";

  llm::LlmRequest req;
  req.template_id = "outline";
  req.variables["objective"] = session.brief().objective;
  req.variables["results"] = results_prompt_text(results);
  req.variables["default_sections"] = skeleton.str();
  req.shape = llm::LlmRequest::Shape::Structured;
  req.schema_id = "outline.v1";

  llm::LlmResponse res = gateway.generate(session, req);
  ReportOutline outline = outline_from_json(res.parsed);
  std::vector<std::string> errors = outline.violations(plan);
  if (!errors.empty()) {
    std::string joined = join_errors(errors);
    llm::LlmRequest repair = req;
    repair.context_suffix = "Your previous outline was invalid: " + joined +
                            "\nProduce a corrected outline.";
    res = gateway.generate(session, repair);
    outline = outline_from_json(res.parsed);
    errors = outline.violations(plan);
    if (!errors.empty()) {
      throw DarError("outline_invalid",
                     "outline failed validation after repair: " + joined);
    }
  }
  return outline;
}

std::string render_draft_prompt(const llm::TemplateRegistry& templates,
                                const ReportOutline& outline,
                                const std::vector<ValidatedResult>& results,
                                const SchemaCatalog& catalog) {
  return templates.render("draft",
                          {{"outline", outline_prompt_text(outline)},
                           {"results", results_prompt_text(results)},
                           {"catalog", catalog.to_prompt_text()}});
}

ReportDraft draft(SessionState& session, llm::Gateway& gateway,
                  const ReportOutline& outline,
                  const std::vector<ValidatedResult>& results,
                  const SchemaCatalog& catalog) {
  if (results.empty()) {
    throw DarError("no_validated_results",
                   "drafting needs at least one validated result");
  }
  ReportDraft d;
  for (const auto& r : results) d.evidence_index[r.marker] = r.history_index;

  llm::LlmRequest req;
  req.template_id = "draft";
  req.variables["outline"] = outline_prompt_text(outline);
  req.variables["results"] = results_prompt_text(results);
  req.variables["catalog"] = catalog.to_prompt_text();
  llm::LlmResponse res;
  try {
    res = gateway.generate(session, req);
  } catch (const DarError& e) {
    if (e.code() == "template_var_mismatch") {
      throw DarError("boundary_violation", e.what());
    }
    throw;
  }
  d.markdown = res.text;
  d.revision_index = 0;

  std::vector<LintFinding> findings = lint_draft(d.markdown, d.evidence_index);
  if (!findings.empty()) {
    std::ostringstream lint_text;
    for (const auto& f : findings) {
      lint_text << "- " << f.problem << ": " << f.sentence << "\n";
    }
    llm::LlmRequest repair;
    repair.template_id = "lint_repair";
    repair.variables["draft"] = d.markdown;
    repair.variables["lint_errors"] = lint_text.str();
    res = gateway.generate(session, repair);
    d.markdown = res.text;
    findings = lint_draft(d.markdown, d.evidence_index);
    if (!findings.empty()) {
      throw DarError("unevidenced_claim",
                     "draft still fails the evidence lint after repair: " +
                         findings.front().sentence);
    }
  }
  return d;
}

QualityAssessment assess_quality(SessionState& session, llm::Gateway& gateway,
                                 const ReportDraft& draft) {
  if (draft.markdown.empty()) {
    throw DarError("empty_draft", "cannot assess an empty draft");
  }
  llm::LlmRequest req;
  req.template_id = "quality";
  req.variables["draft"] = draft.markdown;
  req.shape = llm::LlmRequest::Shape::Structured;
  req.schema_id = "quality.v1";
  llm::LlmResponse res = gateway.generate(session, req);
  return assessment_from_json(res.parsed);
}

EscalationDecision escalation_route(const QualityAssessment& assessment,
                                    const EscalationConfig& config,
                                    int revision_index) {
  if (assessment.score() >= config.theta) return EscalationDecision::Proceed;
  if (revision_index < config.max_revisions) return EscalationDecision::Revise;
  return EscalationDecision::ForcedProceed;
}

ReportDraft revise(SessionState& session, llm::Gateway& gateway,
                   const ReportDraft& current,
                   const QualityAssessment& assessment,
                   const EscalationConfig& config) {
  if (current.revision_index >= config.max_revisions) {
    throw DarError("iterations_exhausted",
                   "revision bound reached (" +
                       std::to_string(config.max_revisions) + ")");
  }
  llm::LlmRequest req;
  req.template_id = "revise";
  req.variables["draft"] = current.markdown;
  req.variables["feedback"] = assessment.feedback;
  llm::LlmResponse res = gateway.generate(session, req);

  ReportDraft d;
  d.markdown = res.text;
  d.evidence_index = current.evidence_index;
  d.revision_index = current.revision_index + 1;
  session.count_revision();

  std::vector<LintFinding> findings = lint_draft(d.markdown, d.evidence_index);
  if (!findings.empty()) {
    std::ostringstream lint_text;
    for (const auto& f : findings) {
      lint_text << "- " << f.problem << ": " << f.sentence << "\n";
    }
    llm::LlmRequest repair;
    repair.template_id = "lint_repair";
    repair.variables["draft"] = d.markdown;
    repair.variables["lint_errors"] = lint_text.str();
    res = gateway.generate(session, repair);
    d.markdown = res.text;
    findings = lint_draft(d.markdown, d.evidence_index);
    if (!findings.empty()) {
      throw DarError("unevidenced_claim",
                     "revision still fails the evidence lint after repair: " +
                         findings.front().sentence);
    }
  }
  return d;
}

namespace {

std::string one_line_sql(const std::string& sql) {
  std::string out;
  bool ws = false;
  for (char c : sql) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      ws = true;
      continue;
    }
    if (ws && !out.empty()) out.push_back(' ');
    ws = false;
    out.push_back(c);
  }
  return out;
}

// Sections of the draft keyed by "## " heading.
std::vector<std::pair<std::string, std::string>> split_sections(
    const std::string& markdown) {
  std::vector<std::pair<std::string, std::string>> sections;
  std::istringstream in(markdown);
  std::string line;
  std::string title;
  std::string body;
  bool in_section = false;
  std::string preamble;
  while (std::getline(in, line)) {
    if (line.rfind("## ", 0) == 0) {
      if (in_section) {
        sections.emplace_back(title, body);
      } else if (!preamble.empty()) {
        sections.emplace_back("", preamble);
      }
      title = line.substr(3);
      while (!title.empty() && (title.back() == ' ' || title.back() == '\r')) {
        title.pop_back();
      }
      body.clear();
      in_section = true;
      continue;
    }
    if (in_section) {
      body += line + "\n";
    } else {
      preamble += line + "\n";
    }
  }
  if (in_section) {
    sections.emplace_back(title, body);
  } else if (!preamble.empty()) {
    sections.emplace_back("", preamble);
  }
  return sections;
}

std::string trim_trailing(const std::string& s) {
  size_t e = s.find_last_not_of(" \t\r\n");
  if (e == std::string::npos) return "";
  return s.substr(0, e + 1);
}

}  // namespace

ComposedReport compose(const ReportDraft& draft, const ReportOutline& outline,
                       const std::vector<ValidatedResult>& results,
                       const RunMetrics& metrics, bool below_threshold) {
  ComposedReport report;
  report.below_threshold = below_threshold;

  // Footnote numbers by first appearance in the draft.
  std::vector<std::string> order;
  for (const auto& m : find_markers(draft.markdown)) {
    if (std::find(order.begin(), order.end(), m) == order.end() &&
        draft.evidence_index.count(m)) {
      order.push_back(m);
    }
  }
  std::map<std::string, int> footnote;
  for (size_t i = 0; i < order.size(); ++i) {
    footnote[order[i]] = static_cast<int>(i) + 1;
  }

  std::string body = draft.markdown;
  for (const auto& [marker, n] : footnote) {
    std::string from = "[" + marker + "]";
    std::string to = "[^" + std::to_string(n) + "]";
    size_t i = 0;
    while ((i = body.find(from, i)) != std::string::npos) {
      body.replace(i, from.size(), to);
      i += to.size();
    }
  }

  // Reassemble the body strictly in outline order; sections the draft did
  // not produce get an explicit placeholder, extras keep their draft order.
  auto sections = split_sections(body);
  std::ostringstream assembled;
  std::vector<bool> used(sections.size(), false);
  for (size_t i = 0; i < sections.size(); ++i) {
    if (sections[i].first.empty()) {
      assembled << trim_trailing(sections[i].second) << "\n\n";
      used[i] = true;
      break;  // only the leading preamble
    }
  }
  for (const auto& os : outline.sections) {
    bool found = false;
    for (size_t i = 0; i < sections.size(); ++i) {
      if (!used[i] && sections[i].first == os.title) {
        assembled << "## " << os.title << "\n"
                  << trim_trailing(sections[i].second) << "\n\n";
        used[i] = true;
        found = true;
        break;
      }
    }
    if (!found) {
      assembled << "## " << os.title << "\n_No findings._\n\n";
    }
  }
  for (size_t i = 0; i < sections.size(); ++i) {
    if (!used[i] && !sections[i].first.empty()) {
      assembled << "## " << sections[i].first << "\n"
                << trim_trailing(sections[i].second) << "\n\n";
    }
  }

  std::ostringstream out;
  out << "```dar-run\n";
  out << "analysis_time_s: "
      << static_cast<int64_t>(std::llround(metrics.analysis_time_s())) << "\n";
  out << "report_time_s: "
      << static_cast<int64_t>(std::llround(metrics.report_time_s())) << "\n";
  out << "total_time_s: "
      << static_cast<int64_t>(std::llround(metrics.total_time_s())) << "\n";
  out << "llm_calls: " << metrics.llm_calls << "\n";
  out << "sql_executions: " << metrics.sql_executions << "\n";
  out << "revisions: " << metrics.revisions << "\n";
  out << "below_threshold: " << (below_threshold ? "true" : "false") << "\n";
  out << "```\n\n";
  out << "# Research Report\n\n";
  out << assembled.str();

  out << "## Evidence\n\n";
  for (const auto& marker : order) {
    int n = footnote[marker];
    const ValidatedResult* vr = nullptr;
    for (const auto& r : results) {
      if (r.marker == marker) {
        vr = &r;
        break;
      }
    }
    out << "[^" << n << "]: " << marker;
    if (vr) {
      out << " — `" << one_line_sql(vr->candidate.sql_text) << "` — rows: "
          << vr->outcome.rows.size();
      if (vr->outcome.truncated) out << " (truncated)";
    }
    out << "\n";
  }

  report.markdown = out.str();
  return report;
}

ReportRunResult run_report_pipeline(SessionState& session,
                                    llm::Gateway& gateway,
                                    const ResearchPlan& plan,
                                    const std::vector<ValidatedResult>& results,
                                    const SchemaCatalog& catalog,
                                    const EscalationConfig& config,
                                    const RunMetrics& metrics_so_far) {
  ReportRunResult out;
  ReportOutline outline = plan_structure(session, gateway, plan, results);
  ReportDraft current = draft(session, gateway, outline, results, catalog);

  while (true) {
    QualityAssessment qa = assess_quality(session, gateway, current);
    out.assessments.push_back(qa);
    EscalationDecision decision =
        escalation_route(qa, config, current.revision_index);
    if (decision != EscalationDecision::Revise) {
      RunMetrics snapshot = metrics_so_far;
      snapshot.llm_calls = session.counters().llm_calls;
      snapshot.sql_executions = session.counters().sql_executions;
      snapshot.revisions = session.counters().revision_iterations;
      out.report = compose(current, outline, results, snapshot,
                           decision == EscalationDecision::ForcedProceed);
      out.final_draft = std::move(current);
      out.revisions = out.final_draft.revision_index;
      return out;
    }
    current = revise(session, gateway, current, qa, config);
  }
}

}  // namespace dar::agents
