#include <gtest/gtest.h>

#include <functional>
#include <regex>

#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"
#include "schemagate/values.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace schemagate;
using testsupport::Gen;
using testsupport::load_json;
using testsupport::load_tool;
using testsupport::load_workflow;

namespace {

bool has_check(const Diagnostics& diags, std::string_view check) {
  return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.check == check; });
}

const Diagnostic* find_check(const Diagnostics& diags, std::string_view check) {
  for (const auto& d : diags) {
    if (d.check == check) return &d;
  }
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------- types

TEST(SemanticTypeParse, ListOfStrAlias) {
  auto t = parse_semantic_type("list[str]");
  ASSERT_EQ(t.kind(), TypeKind::kList);
  ASSERT_NE(t.element(), nullptr);
  EXPECT_EQ(t.element()->kind(), TypeKind::kString);
  EXPECT_EQ(t.render(), "list[string]");
}

TEST(SemanticTypeParse, BaseString) {
  auto t = parse_semantic_type("string");
  EXPECT_EQ(t.kind(), TypeKind::kString);
  EXPECT_EQ(t.element(), nullptr);
}

TEST(SemanticTypeParse, DeclaredColumns) {
  auto t = parse_semantic_type("dataframe{yield_strength,creep_life}");
  ASSERT_EQ(t.kind(), TypeKind::kDataFrame);
  EXPECT_FALSE(t.dynamic_columns());
  EXPECT_EQ(t.columns(), (std::set<std::string>{"creep_life", "yield_strength"}));
  EXPECT_EQ(parse_semantic_type(t.render()), t);
}

TEST(SemanticTypeParse, AliasesNormalise) {
  EXPECT_EQ(parse_semantic_type("int"), SemanticType::integer());
  EXPECT_EQ(parse_semantic_type("float"), SemanticType::number());
  EXPECT_EQ(parse_semantic_type("bool"), SemanticType::boolean());
  EXPECT_EQ(parse_semantic_type("model-ref"), SemanticType::model_ref());
  EXPECT_EQ(parse_semantic_type("dataset-ref"), SemanticType::dataset_ref());
  EXPECT_TRUE(parse_semantic_type("dataframe").dynamic_columns());
}

TEST(SemanticTypeParse, SyntaxErrorsCarryTokenAndPosition) {
  struct Case {
    const char* text;
    std::size_t position;
  };
  for (const Case& c : {Case{"lst[str]", 0}, Case{"list[", 5}, Case{"list[list[str]]", 5}, Case{"dataframe{}", 10},
                        Case{"dataframe{a,a}", 12}, Case{"string extra", 7}, Case{"", 0}}) {
    try {
      parse_semantic_type(c.text);
      ADD_FAILURE() << "accepted " << c.text;
    } catch (const TypeSyntaxError& e) {
      EXPECT_EQ(e.code(), "SyntaxError");
      EXPECT_EQ(e.position(), c.position) << c.text << ": " << e.what();
    }
  }
}

TEST(SemanticTypeParse, RenderParseIdentityOnGeneratedTypes) {
  Gen gen(11);
  for (int i = 0; i < 2000; ++i) {
    auto t = gen.expr_type();
    EXPECT_EQ(parse_semantic_type(t.render()), t) << t.render();
  }
}

TEST(TypesCompatible, Examples) {
  EXPECT_TRUE(types_compatible(SemanticType::dataframe(), SemanticType::dataframe()));
  EXPECT_TRUE(types_compatible(SemanticType::string(), SemanticType::string()));
  EXPECT_FALSE(types_compatible(SemanticType::dataframe({"composition", "hardness"}),
                                SemanticType::dataframe({"yield_strength"})));
  EXPECT_TRUE(types_compatible(SemanticType::integer(), SemanticType::number()));
  EXPECT_FALSE(types_compatible(SemanticType::number(), SemanticType::integer()));
  EXPECT_TRUE(types_compatible(SemanticType::list(SemanticType::integer()), SemanticType::list(SemanticType::number())));
  EXPECT_FALSE(types_compatible(SemanticType::list(SemanticType::string()), SemanticType::dataframe()));
}

TEST(TypesCompatible, ReflexiveAndDynamicIsTop) {
  Gen gen(12);
  for (int i = 0; i < 2000; ++i) {
    auto t = gen.slot_type();
    EXPECT_TRUE(types_compatible(t, t)) << t.render();
    if (t.kind() == TypeKind::kDataFrame) {
      EXPECT_TRUE(types_compatible(t, SemanticType::dataframe())) << t.render();
      EXPECT_TRUE(types_compatible(SemanticType::dataframe(), t)) << t.render();
    }
  }
}

TEST(TypesCompatible, ColumnContainmentMatchesSubsetOracle) {
  Gen gen(13);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e"};
  for (int i = 0; i < 2000; ++i) {
    std::set<std::string> s, t;
    for (const auto& c : pool) {
      if (gen.coin()) s.insert(c);
      if (gen.coin(0.3)) t.insert(c);
    }
    if (s.empty() || t.empty()) continue;
    const bool subset = std::includes(s.begin(), s.end(), t.begin(), t.end());
    EXPECT_EQ(types_compatible(SemanticType::dataframe(s), SemanticType::dataframe(t)), subset);
    std::set<std::string> diff;
    std::set_difference(t.begin(), t.end(), s.begin(), s.end(), std::inserter(diff, diff.end()));
    EXPECT_EQ(missing_columns(SemanticType::dataframe(s), SemanticType::dataframe(t)), diff);
  }
}

// ---------------------------------------------------------------- tool documents

TEST(ToolDocument, ReferenceToolParses) {
  auto parsed = parse_tool_definition(load_json("tools/materials_property_predictor.json"));
  ASSERT_TRUE(parsed.ok()) << render_diagnostic(parsed.diagnostics().front());
  const auto& t = parsed.value();
  EXPECT_EQ(t.id, "materials_property_predictor");
  EXPECT_EQ(t.version, (SemVer{2, 1, 0}));
  EXPECT_EQ(t.dependencies, std::vector<std::string>{"data_loader"});
  ASSERT_EQ(t.parameters.size(), 3u);
  EXPECT_EQ(t.parameters[1].type, SemanticType::list(SemanticType::string()));
  ASSERT_TRUE(t.parameters[2].allowed_values.has_value());
  EXPECT_EQ(t.parameters[2].allowed_values->size(), 3u);
  ASSERT_NE(t.io.output("metrics"), nullptr);
  EXPECT_EQ(t.io.output("metrics")->type.keys(), (std::vector<std::string>{"r2_score", "rmse"}));
  EXPECT_TRUE(t.io.input("dataset")->type.dynamic_columns());
  EXPECT_TRUE(t.requires_network);
  EXPECT_EQ(t.provenance.maintainer, "ml-team@example.org");
}

TEST(ToolDocument, MissingDescriptionIsDocumentationCompleteness) {
  auto doc = load_json("tools/materials_property_predictor.json");
  doc.erase("description");
  auto parsed = parse_tool_definition(doc);
  ASSERT_FALSE(parsed.ok());
  auto* d = find_check(parsed.diagnostics(), checks::kDocumentationCompleteness);
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->severity, Severity::kError);
}

TEST(ToolDocument, TwoComponentVersionRejected) {
  auto doc = load_json("tools/materials_property_predictor.json");
  doc["version"] = "2.1";
  auto parsed = parse_tool_definition(doc);
  ASSERT_FALSE(parsed.ok());
  EXPECT_TRUE(has_check(parsed.diagnostics(), checks::kVersionFormat));
}

TEST(ToolDocument, VersionGrammarMatchesRegexOracle) {
  const std::regex oracle(R"((0|[1-9][0-9]*)\.(0|[1-9][0-9]*)\.(0|[1-9][0-9]*))");
  Gen gen(21);
  const std::string alphabet = "0123456789..a-";
  auto doc = load_json("tools/data_loader.json");
  for (int i = 0; i < 3000; ++i) {
    std::string v;
    for (int k = 0, n = gen.uniform(1, 8); k < n; ++k) v += alphabet[static_cast<std::size_t>(gen.uniform(0, 13))];
    doc["version"] = v;
    auto parsed = parse_tool_definition(doc);
    EXPECT_EQ(parsed.ok(), std::regex_match(v, oracle)) << v;
    EXPECT_EQ(SemVer::parse(v).has_value(), std::regex_match(v, oracle)) << v;
  }
}

TEST(ToolDocument, UnknownFieldRejected) {
  auto doc = load_json("tools/data_loader.json");
  doc["owner"] = "someone";
  auto parsed = parse_tool_definition(doc);
  ASSERT_FALSE(parsed.ok());
  EXPECT_EQ(parsed.diagnostics().front().check, checks::kSchemaStructure);
  EXPECT_EQ(parsed.diagnostics().front().location, "owner");
}

TEST(ToolDocument, DiagnosticsAreCollectedNotFailFast) {
  auto doc = load_json("tools/materials_property_predictor.json");
  doc["version"] = "2.1";
  doc["parameters"][0]["type"] = "strnig";
  doc["extra"] = 1;
  auto parsed = parse_tool_definition(doc);
  ASSERT_FALSE(parsed.ok());
  EXPECT_TRUE(has_check(parsed.diagnostics(), checks::kVersionFormat));
  EXPECT_TRUE(has_check(parsed.diagnostics(), checks::kTypeSyntax));
  EXPECT_TRUE(has_check(parsed.diagnostics(), checks::kSchemaStructure));
}

TEST(ToolDocument, ParameterSlotCollisionRejected) {
  auto doc = load_json("tools/materials_property_predictor.json");
  doc["input_schema"]["dataset_id"] = Json{{"type", "string"}};
  auto parsed = parse_tool_definition(doc);
  ASSERT_FALSE(parsed.ok());
  EXPECT_TRUE(has_check(parsed.diagnostics(), checks::kParameterConsistency));
}

TEST(ToolDocument, CanonicalRenderingUsesDocumentKeyOrder) {
  const auto tool = load_tool("tools/materials_property_predictor.json");
  const auto text = canonical_text(tool);
  const auto doc = Json::parse(text);
  std::vector<std::string> keys;
  for (const auto& item : doc.items()) keys.push_back(item.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"id", "name", "description", "version", "parameters", "input_schema",
                                            "output_schema", "dependencies", "domain_tags", "provenance",
                                            "estimated_duration", "requires_network"}));
  EXPECT_EQ(text.substr(0, 4), "{\n  ");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
  auto again = parse_tool_definition_text(text);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again.value(), tool);
  EXPECT_EQ(canonical_text(again.value()), text);
}

// ---------------------------------------------------------------- workflow documents

TEST(WorkflowDocument, ReferenceWorkflowParses) {
  auto parsed = parse_workflow_definition(load_json("workflows/basic_data_analysis.json"));
  ASSERT_TRUE(parsed.ok()) << render_diagnostic(parsed.diagnostics().front());
  const auto& wf = parsed.value();
  EXPECT_EQ(wf.workflow_id, "basic_data_analysis");
  EXPECT_EQ(wf.steps.size(), 3u);
  EXPECT_EQ(wf.parameter_mappings.size(), 2u);
  EXPECT_EQ(wf.edges.size(), 2u);
  EXPECT_EQ(wf.version, kDefaultWorkflowVersion);
  ASSERT_EQ(wf.parameters.size(), 2u);
  EXPECT_EQ(wf.parameters[0].name, "dataset_file");
  EXPECT_TRUE(wf.parameters[0].required);
  EXPECT_EQ(wf.parameters[1].default_value, Json("remove"));
  EXPECT_EQ(wf.metadata.complexity, std::optional<std::string>("simple"));
  EXPECT_EQ(wf.steps[1].parameters["operations"], Json({"remove_duplicates", "handle_missing"}));
}

TEST(WorkflowDocument, EmptyStepsRejected) {
  auto doc = load_json("workflows/basic_data_analysis.json");
  doc["steps"] = Json::array();
  doc["parameter_mappings"] = Json::array();
  doc["edges"] = Json::array();
  auto parsed = parse_workflow_definition(doc);
  ASSERT_FALSE(parsed.ok());
  EXPECT_TRUE(has_check(parsed.diagnostics(), checks::kNonemptySteps));
}

TEST(WorkflowDocument, DanglingEdgeTargetLocated) {
  auto doc = load_json("workflows/basic_data_analysis.json");
  doc["edges"][0]["target_node_id"] = "analyse";
  auto parsed = parse_workflow_definition(doc);
  ASSERT_FALSE(parsed.ok());
  auto* d = find_check(parsed.diagnostics(), checks::kDanglingReference);
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->location, "edges[0].target_node_id");
}

TEST(WorkflowDocument, ReferenceResolutionMatchesOracle) {
  // Oracle: every endpoint name is checked against the set of step ids.
  Gen gen(31);
  for (int i = 0; i < 500; ++i) {
    auto wf = gen.workflow();
    std::set<std::string> ids;
    for (const auto& s : wf.steps) ids.insert(s.step_id);
    std::size_t expected = 0;
    if (gen.coin()) {
      if (!wf.edges.empty() && gen.coin()) {
        wf.edges.front().target_node_id = "ghost";
      } else if (!wf.parameter_mappings.empty()) {
        wf.parameter_mappings.front().from_step = "ghost";
      }
    }
    for (const auto& e : wf.edges) expected += !ids.count(e.source_node_id) + !ids.count(e.target_node_id);
    for (const auto& m : wf.parameter_mappings) expected += !ids.count(m.from_step) + !ids.count(m.to_step);
    auto parsed = parse_workflow_definition(to_document(wf));
    std::size_t dangling = 0;
    if (!parsed.ok()) {
      for (const auto& d : parsed.diagnostics()) dangling += d.check == checks::kDanglingReference;
    }
    EXPECT_EQ(dangling, expected);
  }
}

TEST(WorkflowDocument, CanonicalRenderingRoundTrips) {
  for (const char* path : {"workflows/basic_data_analysis.json", "workflows/alloy_inverse_design.json"}) {
    const auto wf = load_workflow(path);
    const auto text = canonical_text(wf);
    auto again = parse_workflow_definition_text(text);
    ASSERT_TRUE(again.ok()) << path;
    EXPECT_EQ(again.value(), wf) << path;
    EXPECT_EQ(canonical_text(again.value()), text) << path;
  }
}

// ---------------------------------------------------------------- round trip and mutation properties

TEST(RoundTrip, ThousandGeneratedTools) {
  Gen gen(1001);
  for (int i = 0; i < 1000; ++i) {
    const auto tool = gen.tool();
    ASSERT_TRUE(check_tool_invariants(tool).empty()) << render_diagnostic(check_tool_invariants(tool).front());
    auto parsed = parse_tool_definition_text(canonical_text(tool));
    ASSERT_TRUE(parsed.ok()) << canonical_text(tool) << render_diagnostic(parsed.diagnostics().front());
    EXPECT_EQ(parsed.value(), tool) << canonical_text(tool);
  }
}

TEST(RoundTrip, ThousandGeneratedWorkflows) {
  Gen gen(1002);
  for (int i = 0; i < 1000; ++i) {
    const auto wf = gen.workflow();
    auto parsed = parse_workflow_definition_text(canonical_text(wf));
    ASSERT_TRUE(parsed.ok()) << canonical_text(wf) << render_diagnostic(parsed.diagnostics().front());
    EXPECT_EQ(parsed.value(), wf) << canonical_text(wf);
  }
}

namespace {

using Mutation = std::function<void(Json&, Gen&)>;

Json& first_param(Json& doc) {
  if (doc["parameters"].empty()) {
    doc["parameters"].push_back(Json{{"name", "added"}, {"type", "string"}, {"description", "x"}, {"required", false}});
  }
  return doc["parameters"][0];
}

const std::vector<std::pair<std::string, Mutation>>& tool_mutations() {
  static const std::vector<std::pair<std::string, Mutation>> m = {
      {"unknown top-level field", [](Json& d, Gen&) { d["colour"] = "blue"; }},
      {"bad identifier", [](Json& d, Gen&) { d["id"] = "9-lives"; }},
      {"two-part version", [](Json& d, Gen&) { d["version"] = "2.1"; }},
      {"leading zero version", [](Json& d, Gen&) { d["version"] = "01.0.0"; }},
      {"empty description", [](Json& d, Gen&) { d["description"] = ""; }},
      {"missing name", [](Json& d, Gen&) { d.erase("name"); }},
      {"bad type syntax", [](Json& d, Gen&) { first_param(d)["type"] = "strnig"; }},
      {"blank parameter description", [](Json& d, Gen&) { first_param(d)["description"] = " "; }},
      {"required with default",
       [](Json& d, Gen&) {
         auto& p = first_param(d);
         p["required"] = true;
         p["examples"] = Json::array({"x"});
         p["type"] = "string";
         p.erase("allowed_values");
         p.erase("validation_rules");
         p["default"] = "x";
       }},
      {"default outside allowed",
       [](Json& d, Gen&) {
         auto& p = first_param(d);
         p["type"] = "string";
         p["required"] = false;
         p.erase("examples");
         p.erase("validation_rules");
         p["allowed_values"] = Json::array({"a", "b"});
         p["default"] = "c";
       }},
      {"duplicate allowed value",
       [](Json& d, Gen&) {
         auto& p = first_param(d);
         p["type"] = "string";
         p.erase("default");
         p.erase("examples");
         p.erase("validation_rules");
         p["allowed_values"] = Json::array({"a", "a"});
       }},
      {"mistyped example",
       [](Json& d, Gen&) {
         auto& p = first_param(d);
         p["type"] = "integer";
         p.erase("default");
         p.erase("allowed_values");
         p.erase("validation_rules");
         p["examples"] = Json::array({"seven"});
       }},
      {"required without example",
       [](Json& d, Gen&) {
         auto& p = first_param(d);
         p["required"] = true;
         p.erase("default");
         p.erase("examples");
       }},
      {"duplicate parameter name",
       [](Json& d, Gen&) {
         auto p = first_param(d);
         d["parameters"].push_back(p);
       }},
      {"self dependency", [](Json& d, Gen&) { d["dependencies"].push_back(d["id"]); }},
      {"duplicate dependency",
       [](Json& d, Gen&) {
         d["dependencies"].push_back("dep_x");
         d["dependencies"].push_back("dep_x");
       }},
      {"negative duration", [](Json& d, Gen&) { d["estimated_duration"] = -1.0; }},
      {"non-boolean network flag", [](Json& d, Gen&) { d["requires_network"] = "yes"; }},
      {"empty column list", [](Json& d, Gen&) { d["output_schema"]["frame"] = Json{{"type", "dataframe"}, {"columns", Json::array()}}; }},
      {"unknown slot key", [](Json& d, Gen&) { d["input_schema"]["frame"] = Json{{"type", "dataframe"}, {"unit", "kg"}}; }},
      {"parameter collides with input",
       [](Json& d, Gen&) {
         auto name = first_param(d)["name"];
         d["input_schema"][name.get<std::string>()] = Json{{"type", "string"}};
       }},
  };
  return m;
}

const std::vector<std::pair<std::string, Mutation>>& workflow_mutations() {
  static const std::vector<std::pair<std::string, Mutation>> m = {
      {"unknown top-level field", [](Json& d, Gen&) { d["owner"] = "x"; }},
      {"no steps",
       [](Json& d, Gen&) {
         d["steps"] = Json::array();
         d["edges"] = Json::array();
         d["parameter_mappings"] = Json::array();
       }},
      {"duplicate step id", [](Json& d, Gen&) { d["steps"].push_back(d["steps"][0]); }},
      {"dangling dependency", [](Json& d, Gen&) { d["steps"][0]["dependencies"].push_back("ghost"); }},
      {"self dependency", [](Json& d, Gen&) { d["steps"][0]["dependencies"].push_back(d["steps"][0]["step_id"]); }},
      {"mapping to itself",
       [](Json& d, Gen&) {
         auto s = d["steps"][0]["step_id"];
         d["parameter_mappings"].push_back(
             Json{{"from_step", s}, {"from_parameter", "a"}, {"to_step", s}, {"to_parameter", "b"}, {"description", ""}});
       }},
      {"dangling edge",
       [](Json& d, Gen&) {
         d["edges"].push_back(Json{{"edge_id", "e_ghost"},
                                   {"source_node_id", d["steps"][0]["step_id"]},
                                   {"target_node_id", "ghost"},
                                   {"source_output", "a"},
                                   {"target_input", "b"}});
       }},
      {"duplicate edge id",
       [](Json& d, Gen&) {
         auto s = d["steps"][0]["step_id"];
         Json e{{"edge_id", "e_dup"}, {"source_node_id", s}, {"target_node_id", "ghost"}, {"source_output", "a"},
                {"target_input", "b"}};
         d["edges"].push_back(e);
         d["edges"].push_back(e);
       }},
      {"bad workflow parameter type", [](Json& d, Gen&) { d["parameters"]["wp_bad"] = Json{{"type", "lst[str]"}}; }},
      {"unknown rule", [](Json& d, Gen&) { d["parameters"]["wp_bad"] = Json{{"type", "string"}, {"validation_rules", Json{{"regex", "x"}}}}; }},
      {"step unknown key", [](Json& d, Gen&) { d["steps"][0]["retries"] = 3; }},
      {"bad version", [](Json& d, Gen&) { d["version"] = "v1"; }},
      {"metadata unknown key", [](Json& d, Gen&) { d["metadata"]["owner"] = "x"; }},
      {"step parameters not an object", [](Json& d, Gen&) { d["steps"][0]["parameters"] = Json::array(); }},
  };
  return m;
}

}  // namespace

TEST(Mutation, EveryToolMutationOfTheFixtureIsRejected) {
  Gen gen(41);
  for (const auto& [name, mutate] : tool_mutations()) {
    auto doc = load_json("tools/materials_property_predictor.json");
    mutate(doc, gen);
    auto parsed = parse_tool_definition(doc);
    EXPECT_FALSE(parsed.ok()) << name;
  }
}

TEST(Mutation, EveryWorkflowMutationOfTheFixtureIsRejected) {
  Gen gen(42);
  for (const auto& [name, mutate] : workflow_mutations()) {
    auto doc = load_json("workflows/basic_data_analysis.json");
    mutate(doc, gen);
    EXPECT_FALSE(parse_workflow_definition(doc).ok()) << name;
  }
}

TEST(Mutation, RandomMutationsOfGeneratedDefinitionsAreRejected) {
  Gen gen(43);
  for (int i = 0; i < 1000; ++i) {
    const auto& [tname, tmut] = gen.pick(tool_mutations());
    Json tdoc = to_document(gen.tool());
    tmut(tdoc, gen);
    auto tp = parse_tool_definition(tdoc);
    ASSERT_FALSE(tp.ok()) << tname << "\n" << tdoc.dump(2);
    for (const auto& d : tp.diagnostics()) EXPECT_TRUE(is_registered_check(d.check)) << d.check;

    const auto& [wname, wmut] = gen.pick(workflow_mutations());
    Json wdoc = to_document(gen.workflow());
    wmut(wdoc, gen);
    auto wp = parse_workflow_definition(wdoc);
    ASSERT_FALSE(wp.ok()) << wname << "\n" << wdoc.dump(2);
    for (const auto& d : wp.diagnostics()) EXPECT_TRUE(is_registered_check(d.check)) << d.check;
  }
}

// ---------------------------------------------------------------- values

TEST(ValidateValue, AllowedValueAccepted) {
  const auto tool = load_tool("tools/materials_property_predictor.json");
  const auto* p = find_parameter(tool.parameters, "validation_strategy");
  ASSERT_NE(p, nullptr);
  EXPECT_TRUE(validate_value("5-fold", *p).empty());
  auto bad = validate_value("7-fold", *p);
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0].check, checks::kAllowedValues);
}

TEST(ValidateValue, EmptyDatasetFileViolatesNotEmpty) {
  const auto wf = load_workflow("workflows/basic_data_analysis.json");
  const auto* p = find_parameter(wf.parameters, "dataset_file");
  auto diags = validate_value("", *p);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].check, checks::kNotEmpty);
  EXPECT_EQ(diags[0].severity, Severity::kError);
}

TEST(ValidateValue, IntegerCandidatesAccepted) {
  const auto wf = load_workflow("workflows/alloy_inverse_design.json");
  const auto* p = find_parameter(wf.parameters, "n_candidates");
  EXPECT_TRUE(validate_value(50, *p).empty());
  auto fifty = validate_value("fifty", *p);
  ASSERT_EQ(fifty.size(), 1u);
  EXPECT_EQ(fifty[0].check, checks::kTypeMismatch);
  EXPECT_EQ(validate_value(0, *p).at(0).check, checks::kMin);
  EXPECT_EQ(validate_value(50.5, *p).at(0).check, checks::kTypeMismatch);
}

TEST(ValidateValue, ConstraintBoundsApplyToEveryLeaf) {
  const auto wf = load_workflow("workflows/alloy_inverse_design.json");
  const auto* p = find_parameter(wf.parameters, "constraints");
  const auto params = load_json("params/alloy_inverse_design.json");
  EXPECT_TRUE(validate_value(params["constraints"], *p).empty());
  auto over = validate_value(Json{{"Cr", Json{{"max", 150}}}}, *p);
  ASSERT_EQ(over.size(), 1u);
  EXPECT_EQ(over[0].check, checks::kMax);
  EXPECT_NE(over[0].location.find("Cr.max"), std::string::npos);
  EXPECT_EQ(validate_value(Json::array({1}), *p).at(0).check, checks::kTypeMismatch);
}

TEST(ValidateValue, MissingRequiredValue) {
  const auto wf = load_workflow("workflows/alloy_inverse_design.json");
  auto diags = validate_value(nullptr, *find_parameter(wf.parameters, "target_properties"));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].check, checks::kRequired);
  EXPECT_TRUE(validate_value(nullptr, *find_parameter(wf.parameters, "model_id")).empty());
}

TEST(ValidateValue, DefaultsAreSelfConsistent) {
  for (const char* id : testsupport::kFixtureTools) {
    for (const auto& p : load_tool(std::string("tools/") + id + ".json").parameters) {
      if (p.default_value) EXPECT_TRUE(validate_value(*p.default_value, p).empty()) << id << "." << p.name;
    }
  }
  for (const char* path : {"workflows/basic_data_analysis.json", "workflows/alloy_inverse_design.json"}) {
    for (const auto& p : load_workflow(path).parameters) {
      if (p.default_value) EXPECT_TRUE(validate_value(*p.default_value, p).empty()) << path << "." << p.name;
    }
  }
  Gen gen(51);
  for (int i = 0; i < 2000; ++i) {
    auto p = gen.parameter("p", true);
    if (p.default_value) EXPECT_TRUE(validate_value(*p.default_value, p).empty()) << p.default_value->dump();
  }
}
