#include <doctest.h>

#include "dar/llm/gateway.hpp"
#include "support/test_util.hpp"

using namespace dar;
using namespace dar::llm;

TEST_SUITE("llm") {

TEST_CASE("template render binds variables exactly") {
  TemplateRegistry reg;
  reg.add("t", "Hello {{name}}, goal: {{goal}}");
  CHECK(reg.render("t", {{"name", "A"}, {"goal", "B"}}) ==
        "Hello A, goal: B");
  CHECK_THROWS_AS(reg.render("t", {{"name", "A"}}), DarError);
  CHECK_THROWS_AS(
      reg.render("t", {{"name", "A"}, {"goal", "B"}, {"extra", "C"}}),
      DarError);
  CHECK_THROWS_AS(reg.render("nope", {}), DarError);
}

TEST_CASE("builtin templates cover every agent role") {
  TemplateRegistry reg = TemplateRegistry::builtin();
  for (const char* id :
       {"intent", "plan", "understand", "generate_sql", "review", "outline",
        "draft", "quality", "revise", "lint_repair", "repair", "ai_text",
        "ai_bool", "ai_double", "ai_table"}) {
    CHECK_MESSAGE(reg.has(id), "missing template: " << id);
  }
  CHECK(reg.default_temperature("generate_sql") == doctest::Approx(0.2));
  CHECK(reg.default_temperature("draft") == doctest::Approx(0.7));
}

TEST_CASE("scripted backend: order, consume_once, miss") {
  auto backend = test::scripted({
      test::rule("A", "x", true),
      test::rule("A", "y"),
  });
  ChatRequest req;
  req.prompt = "A prompt";
  CHECK(backend->complete(req) == "x");  // first rule wins
  CHECK(backend->complete(req) == "y");  // consumed rule falls through
  CHECK(backend->complete(req) == "y");
  req.prompt = "unmatched";
  CHECK_THROWS_AS(backend->complete(req), ScriptedMiss);
  CHECK(backend->invocations() == 3);
}

TEST_CASE("gateway echoes scripted rule and counts the call") {
  auto backend = test::scripted({test::rule("plan", "R1")});
  Gateway gw = test::make_gateway(backend);
  SessionState s = SessionState::new_session(test::make_brief(10));

  LlmRequest req;
  req.template_id = "ai_text";
  req.variables["prompt"] = "make a plan";
  LlmResponse res = gw.generate(s, req);
  CHECK(res.text == "R1");
  CHECK(res.provider_id == "scripted");
  CHECK(s.counters().llm_calls == 1);
  CHECK(backend->invocations() == 1);
  // request and response both land in the conversation log
  REQUIRE(s.conversation_log().size() == 3);
  CHECK(s.conversation_log()[1].role == "user");
  CHECK(s.conversation_log()[2].role == "assistant");
  CHECK(s.conversation_log()[2].content == "R1");
}

TEST_CASE("budget boundary: no call is issued at the limit") {
  auto backend = test::scripted({test::rule("", "ok")});
  Gateway gw = test::make_gateway(backend);
  SessionState s = SessionState::new_session(test::make_brief(1));

  LlmRequest req;
  req.template_id = "ai_text";
  req.variables["prompt"] = "x";
  gw.generate(s, req);
  CHECK_THROWS_AS(gw.generate(s, req), BudgetExhausted);
  CHECK(backend->invocations() == 1);
  CHECK(s.counters().llm_calls == 1);
}

TEST_CASE("call accounting equals backend invocations across shapes") {
  auto backend = test::scripted({
      test::rule("previous reply was not valid", "{\"grounding\":0.5,"
                 "\"coverage\":0.5,\"coherence\":0.5,\"actionability\":0.5,"
                 "\"feedback\":\"fixed\"}"),
      test::rule("evaluator", "not json at all"),
  });
  Gateway gw = test::make_gateway(backend);
  SessionState s = SessionState::new_session(test::make_brief(10));

  LlmRequest req;
  req.template_id = "quality";
  req.variables["draft"] = "text";
  req.shape = LlmRequest::Shape::Structured;
  req.schema_id = "quality.v1";
  LlmResponse res = gw.generate(s, req);  // one repair round
  CHECK(res.parsed["feedback"] == "fixed");
  CHECK(s.counters().llm_calls == 2);
  CHECK(backend->invocations() == 2);
}

TEST_CASE("structured reply invalid twice surfaces schema_violation") {
  auto backend = test::scripted({test::rule("", "still not json")});
  Gateway gw = test::make_gateway(backend);
  SessionState s = SessionState::new_session(test::make_brief(10));

  LlmRequest req;
  req.template_id = "quality";
  req.variables["draft"] = "text";
  req.shape = LlmRequest::Shape::Structured;
  req.schema_id = "quality.v1";
  CHECK_THROWS_AS(gw.generate(s, req), SchemaViolation);
  CHECK(s.counters().llm_calls == 2);  // original + repair, both counted
}

TEST_CASE("schema range enforcement rejects out-of-range sub-scores") {
  auto backend = test::scripted({test::rule(
      "", "{\"grounding\":1.2,\"coverage\":0.5,\"coherence\":0.5,"
          "\"actionability\":0.5,\"feedback\":\"\"}")});
  Gateway gw = test::make_gateway(backend);
  SessionState s = SessionState::new_session(test::make_brief(10));
  LlmRequest req;
  req.template_id = "quality";
  req.variables["draft"] = "text";
  req.shape = LlmRequest::Shape::Structured;
  req.schema_id = "quality.v1";
  CHECK_THROWS_AS(gw.generate(s, req), SchemaViolation);
}

TEST_CASE("determinism: same rules and inputs give identical responses") {
  auto run_once = [] {
    auto backend = test::scripted({
        test::rule("one", "first", true),
        test::rule("one", "second"),
        test::rule("two", "other"),
    });
    Gateway gw = test::make_gateway(backend);
    SessionState s = SessionState::new_session(test::make_brief(10));
    std::string all;
    for (const char* p : {"one a", "two b", "one c"}) {
      LlmRequest req;
      req.template_id = "ai_text";
      req.variables["prompt"] = p;
      all += gw.generate(s, req).text + "|";
    }
    return all;
  };
  CHECK(run_once() == run_once());
  CHECK(run_once() == "first|other|second|");
}

TEST_CASE("request parameter ranges are enforced") {
  auto backend = test::scripted({test::rule("", "ok")});
  Gateway gw = test::make_gateway(backend);
  SessionState s = SessionState::new_session(test::make_brief(10));
  LlmRequest req;
  req.template_id = "ai_text";
  req.variables["prompt"] = "x";
  req.temperature = 3.0;
  CHECK_THROWS_AS(gw.generate(s, req), DarError);
  req.temperature = 0.5;
  req.max_output_tokens = 0;
  CHECK_THROWS_AS(gw.generate(s, req), DarError);
  CHECK(backend->invocations() == 0);
}

TEST_CASE("json extraction tolerates fences and prose") {
  CHECK(extract_json_object("```json\n{\"a\": 1}\n```")["a"] == 1);
  CHECK(extract_json_object("Sure! {\"a\": {\"b\": 2}} done")["a"]["b"] == 2);
  CHECK(extract_json_object("{\"s\": \"br } ace\"}")["s"] == "br } ace");
  CHECK_THROWS(extract_json_object("no json here"));
}

}  // TEST_SUITE
