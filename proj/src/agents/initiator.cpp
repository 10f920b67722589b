#include "dar/agents/initiator.hpp"

#include <cctype>
#include <sstream>

namespace dar::agents {

namespace {

std::string lower(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

// An entity is grounded when it names a dataset, a table, or a column.
bool entity_in_catalog(const SchemaCatalog& catalog, const std::string& name) {
  std::string n = lower(name);
  for (const auto& ds : catalog.datasets) {
    if (lower(ds.id) == n) return true;
    for (const auto& t : ds.tables) {
      if (lower(t.id) == n) return true;
      for (const auto& c : t.columns) {
        if (lower(c.name) == n) return true;
      }
    }
  }
  return false;
}

std::string constraints_text(const BriefConstraints& c) {
  std::ostringstream out;
  out << "max_query_cost: " << c.max_query_cost
      << ", max_wall_time_s: " << c.max_wall_time_s
      << ", max_llm_calls: " << c.max_llm_calls;
  return out.str();
}

}  // namespace

nlohmann::json to_json(const ResearchIntent& i) {
  nlohmann::json goals = nlohmann::json::array();
  for (const auto& g : i.analysis_goals) {
    goals.push_back({{"goal", g.goal}, {"entities", g.entities}});
  }
  return {{"analysis_goals", goals},
          {"entities_of_interest", i.entities_of_interest},
          {"deliverable", i.deliverable},
          {"dropped_goals", i.dropped_goals}};
}

ResearchIntent intent_from_json(const nlohmann::json& j) {
  ResearchIntent i;
  for (const auto& gj : j.at("analysis_goals")) {
    IntentGoal g;
    g.goal = gj.at("goal").get<std::string>();
    g.entities = gj.value("entities", std::vector<std::string>{});
    i.analysis_goals.push_back(std::move(g));
  }
  i.entities_of_interest =
      j.value("entities_of_interest", std::vector<std::string>{});
  i.deliverable = j.value("deliverable", "report");
  i.dropped_goals = j.value("dropped_goals", std::vector<std::string>{});
  return i;
}

ResearchIntent infer_intent(SessionState& session, llm::Gateway& gateway,
                            const ResearchBrief& brief,
                            const SchemaCatalog& catalog) {
  llm::LlmRequest req;
  req.template_id = "intent";
  req.variables["objective"] = brief.objective;
  req.variables["catalog"] = catalog.to_prompt_text();
  req.shape = llm::LlmRequest::Shape::Structured;
  req.schema_id = "intent.v1";
  llm::LlmResponse res = gateway.generate(session, req);

  ResearchIntent intent;
  for (const auto& gj : res.parsed.at("analysis_goals")) {
    IntentGoal g;
    g.goal = gj.at("goal").get<std::string>();
    g.entities = gj.value("entities", std::vector<std::string>{});
    bool grounded = false;
    for (const auto& e : g.entities) {
      if (entity_in_catalog(catalog, e)) {
        grounded = true;
        break;
      }
    }
    if (grounded) {
      intent.analysis_goals.push_back(std::move(g));
    } else {
      session.append_log("note", "dropped ungrounded goal: " + g.goal);
      intent.dropped_goals.push_back(g.goal);
    }
  }
  intent.entities_of_interest =
      res.parsed.value("entities_of_interest", std::vector<std::string>{});
  return intent;
}

ResearchPlan generate_plan(SessionState& session, llm::Gateway& gateway,
                           const ResearchIntent& intent,
                           const SchemaCatalog& catalog,
                           const BriefConstraints& constraints,
                           const PlannerConfig& config) {
  if (catalog.empty()) {
    throw DarError("empty_catalog", "cannot plan against an empty catalog");
  }

  std::ostringstream goals;
  for (const auto& g : intent.analysis_goals) {
    goals << "- " << g.goal << "\n";
  }

  llm::LlmRequest req;
  req.template_id = "plan";
  req.variables["objective"] = session.brief().objective;
  req.variables["goals"] = goals.str();
  req.variables["catalog"] = catalog.to_prompt_text();
  req.variables["constraints"] = constraints_text(constraints);
  req.variables["min_subtasks"] = std::to_string(config.min_subtasks);
  req.variables["max_subtasks"] = std::to_string(config.max_subtasks);
  req.shape = llm::LlmRequest::Shape::Structured;
  req.schema_id = "plan.v1";

  auto check = [&](const ResearchPlan& p) {
    std::vector<std::string> errs = p.violations(catalog);
    int n = static_cast<int>(p.subtasks.size());
    if (n < config.min_subtasks || n > config.max_subtasks) {
      errs.push_back("plan must have between " +
                     std::to_string(config.min_subtasks) + " and " +
                     std::to_string(config.max_subtasks) + " subtasks, got " +
                     std::to_string(n));
    }
    return errs;
  };

  llm::LlmResponse res = gateway.generate(session, req);
  ResearchPlan plan = plan_from_json(res.parsed);
  std::vector<std::string> errors = check(plan);
  if (!errors.empty()) {
    std::ostringstream joined;
    for (size_t i = 0; i < errors.size(); ++i) {
      if (i) joined << "; ";
      joined << errors[i];
    }
    llm::LlmRequest repair = req;
    repair.context_suffix =
        "Your previous plan was invalid: " + joined.str() +
        "\nProduce a corrected plan. Reply with the JSON object only.";
    res = gateway.generate(session, repair);
    plan = plan_from_json(res.parsed);
    errors = check(plan);
    if (!errors.empty()) {
      throw DarError("plan_invalid",
                     "plan failed validation after repair: " + joined.str());
    }
  }

  if (plan.budget_allocation.empty() && !plan.subtasks.empty()) {
    double share = 1.0 / static_cast<double>(plan.subtasks.size());
    for (const auto& st : plan.subtasks) plan.budget_allocation[st.id] = share;
  }
  return plan;
}

}  // namespace dar::agents
