#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dar/core/session.hpp"
#include "dar/core/types.hpp"
#include "dar/llm/gateway.hpp"

namespace dar::agents {

struct IntentGoal {
  std::string goal;
  std::vector<std::string> entities;
};

struct ResearchIntent {
  std::vector<IntentGoal> analysis_goals;       // grounded goals only
  std::vector<std::string> entities_of_interest;
  std::string deliverable = "report";
  std::vector<std::string> dropped_goals;       // ungrounded, kept for the log
};

nlohmann::json to_json(const ResearchIntent& i);
ResearchIntent intent_from_json(const nlohmann::json& j);

// Parses the brief into a structured intent grounded in the catalog. A goal
// whose entities name nothing in the catalog is dropped with a logged note;
// the run proceeds on the remaining goals.
ResearchIntent infer_intent(SessionState& session, llm::Gateway& gateway,
                            const ResearchBrief& brief,
                            const SchemaCatalog& catalog);

struct PlannerConfig {
  int min_subtasks = 3;
  int max_subtasks = 8;
};

// The plan generator: one structured request, machine-checked against the
// plan invariants, one repair re-prompt carrying the violations, then
// DarError("plan_invalid"). Budget allocation defaults to an even split.
ResearchPlan generate_plan(SessionState& session, llm::Gateway& gateway,
                           const ResearchIntent& intent,
                           const SchemaCatalog& catalog,
                           const BriefConstraints& constraints,
                           const PlannerConfig& config);

}  // namespace dar::agents
