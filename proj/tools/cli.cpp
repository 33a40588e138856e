#include "schemagate/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>

#include "schemagate/api.hpp"
#include "schemagate/bundle.hpp"
#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"
#include "schemagate/fsutil.hpp"
#include "schemagate/replay.hpp"
#include "schemagate/runtime.hpp"

namespace schemagate {

namespace {

struct Options {
  std::string registry_dir;
  std::string run_dir;
  std::string format = "text";
};

/// Thrown by commands that have already rendered their failure.
struct Exit {
  int code;
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  bool doc() const { return opts_.format == "doc"; }

  RuntimeConfig config(std::optional<std::uint64_t> seed = std::nullopt) const {
    RuntimeConfig c;
    if (!opts_.registry_dir.empty()) c.registry_dir = opts_.registry_dir;
    if (!opts_.run_dir.empty()) c.run_dir = opts_.run_dir;
    c.seed = seed;
    return c;
  }

  Registry registry() const { return Registry(config().registry_dir); }
  RunStore store() const { return RunStore(config().run_dir); }

  void emit(const Json& document, const std::string& text) {
    if (doc()) {
      out_ << render_document(document);
    } else {
      out_ << text;
    }
  }

  static Json read_json(const std::string& path) {
    const auto text = read_file(path);
    try {
      return Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw InvalidDocument(path + " is not JSON", {error_at(checks::kSchemaStructure, path, e.what())});
    }
  }

  static SemVer parse_version(const std::string& text) {
    auto v = SemVer::parse(text);
    if (!v) throw InvalidDocument("bad version", {error_at(checks::kVersionFormat, "version", "'" + text + "' is not a semantic version")});
    return *v;
  }

  int report(const AdmissionReport& r) {
    emit(to_document(r), render_report_text(r));
    if (!r.admitted) {
      for (const auto& c : r.checks) {
        for (const auto& d : c.diagnostics) {
          if (d.severity == Severity::kError) err_ << render_diagnostic(d) << "\n";
        }
      }
    }
    return r.admitted ? kExitOk : kExitValidation;
  }

  // ------------------------------------------------------------ tool / workflow

  int tool_add(const std::string& file, const std::string& endpoint, bool validate_only) {
    auto reg = registry();
    const auto doc = read_json(file);
    std::optional<HealthProbe> probe;
    const auto id = doc.is_object() ? doc.value("id", std::string{}) : std::string{};
    probe = endpoint.empty() ? HealthProbe::declared_stub(id) : HealthProbe::endpoint_ping(id, endpoint);
    if (!validate_only) return report(reg.admit_tool_document(doc, probe));
    auto decoded = decode_tool_definition(doc);
    if (!decoded.tool || has_errors(decoded.diagnostics)) {
      AdmissionReport r;
      r.candidate_id = id;
      r.checks.push_back({std::string(checks::kParameterConsistency), decoded.diagnostics});
      return report(r);
    }
    return report(reg.evaluate_tool(*decoded.tool, *probe));
  }

  int workflow_add(const std::string& file, bool validate_only) {
    auto reg = registry();
    auto parsed = parse_workflow_definition(read_json(file));
    if (!parsed) throw InvalidDocument(file + " is not a valid workflow document", parsed.diagnostics());
    return report(validate_only ? reg.evaluate_workflow(parsed.value()) : reg.admit_workflow(parsed.value()));
  }

  int list(bool tools) {
    auto reg = registry();
    const auto entries = tools ? reg.list_tools() : reg.list_workflows();
    Json docs = Json::array();
    std::string text = "ID                              VERSION   STATUS\n";
    for (const auto& e : entries) {
      docs.push_back({{"id", e.id}, {"version", e.version.str()}, {"status", status_name(e.status)},
                      {"content_hash", e.content_hash}, {"admitted_at", e.admitted_at}});
      std::string id = e.id;
      id.resize(std::max<std::size_t>(id.size(), 32), ' ');
      std::string version = e.version.str();
      version.resize(std::max<std::size_t>(version.size(), 10), ' ');
      text += id + version + std::string(status_name(e.status)) + "\n";
    }
    emit(Json{{tools ? "tools" : "workflows", docs}}, text);
    return kExitOk;
  }

  int retire(bool tool, const std::string& id, const std::string& version) {
    auto reg = registry();
    const auto v = parse_version(version);
    if (tool) {
      reg.retire_tool(id, v);
    } else {
      reg.retire_workflow(id, v);
    }
    emit(Json{{"id", id}, {"version", v.str()}, {"status", "retired"}}, id + " " + v.str() + " retired\n");
    return kExitOk;
  }

  // ------------------------------------------------------------ datasets / registry

  int dataset_add(const std::string& file, const std::string& name, const std::string& id) {
    auto reg = registry();
    auto d = reg.datasets().add(file, name.empty() ? std::nullopt : std::optional(name),
                                id.empty() ? std::nullopt : std::optional(id));
    emit(to_document(d), d.dataset_id + "  " + d.name + "  " + std::to_string(d.row_count) + " rows\n");
    return kExitOk;
  }

  int dataset_list() {
    auto reg = registry();
    Json docs = Json::array();
    std::string text;
    for (const auto& d : reg.datasets().list()) {
      docs.push_back(to_document(d));
      text += d.dataset_id + "  " + d.name + "  " + std::to_string(d.row_count) + " rows\n";
    }
    emit(Json{{"datasets", docs}}, text);
    return kExitOk;
  }

  int registry_load(const std::string& dir) {
    auto reg = registry();
    auto r = load_bundle(reg, dir);
    Json doc = {{"tools", Json::array()}, {"workflows", Json::array()}, {"datasets", Json::array()},
                {"skipped", r.skipped}};
    std::string text;
    for (const auto& t : r.tools) {
      doc["tools"].push_back(to_document(t));
      text += render_report_text(t);
    }
    for (const auto& w : r.workflows) {
      doc["workflows"].push_back(to_document(w));
      text += render_report_text(w);
    }
    for (const auto& d : r.datasets) {
      doc["datasets"].push_back(to_document(d));
      text += "dataset " + d.name + " (" + d.dataset_id + ")\n";
    }
    for (const auto& s : r.skipped) text += "already present: " + s + "\n";
    emit(doc, text);
    return r.ok() ? kExitOk : kExitValidation;
  }

  int registry_check() {
    auto reg = registry();
    auto issues = reg.integrity_scan();
    Json doc = Json::array();
    std::string text;
    for (const auto& i : issues) {
      doc.push_back({{"kind", i.kind}, {"id", i.id}, {"version", i.version.str()}, {"message", i.message}});
      text += i.kind + " " + i.id + " " + i.version.str() + ": " + i.message + "\n";
    }
    emit(Json{{"issues", doc}}, issues.empty() ? "registry intact\n" : text);
    if (!issues.empty()) {
      err_ << "integrity scan found " << issues.size() << " issue(s)\n";
      return kExitStore;
    }
    return kExitOk;
  }

  // ------------------------------------------------------------ run

  int run(const std::string& workflow_id, const std::string& params_file, const std::string& version,
          bool approve, std::optional<std::uint64_t> seed) {
    Runtime rt(config(seed));
    Json params = params_file.empty() ? Json::object() : read_json(params_file);
    auto& gate = rt.gate();
    const auto sid = gate.open_session();
    auto proposal = gate.propose(sid, workflow_id, version.empty() ? std::nullopt : std::optional(parse_version(version)),
                                 params);
    const auto& inv = proposal.invocation;
    if (inv.state != InvocationState::kValidated) {
      for (const auto& p : proposal.prompts) {
        err_ << "prompt: " << p.parameter << " (" << prompt_reason_name(p.reason) << ", expected " << p.expected
             << "): " << p.message << "\n";
      }
      for (const auto& d : proposal.workflow_diagnostics) err_ << render_diagnostic(d) << "\n";
      if (doc()) out_ << render_document(to_document(proposal));
      return kExitValidation;
    }
    if (!approve) {
      err_ << "invocation " << inv.invocation_id << " is validated; pass --approve to dispatch it\n";
      if (doc()) out_ << render_document(to_document(proposal));
      return kExitValidation;
    }
    gate.approve(sid, inv.invocation_id);
    const auto run_id = gate.dispatch(sid, inv.invocation_id);
    auto record = rt.executor().wait(run_id);
    emit(to_document(record), run_id + "\n" + render_run_text(record));
    return record.status == RunStatus::kSucceeded ? kExitOk : kExitValidation;
  }

  // ------------------------------------------------------------ session replay

  int replay(const std::string& file) {
    const auto text = read_file(file);
    Json script = Json::object();
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
      try {
        script = Json::parse(text);
      } catch (const Json::parse_error& e) {
        throw InvalidDocument(file + " is not JSON", {error_at(checks::kSchemaStructure, file, e.what())});
      }
    }
    check_script(script);
    Runtime rt(config(script_seed(script)));
    auto result = replay_session(script, rt.gate());
    emit(to_document(result), render_replay_table(result));
    if (!result.passed) {
      err_ << "divergence at " << *result.divergence << "\n";
      return kExitValidation;
    }
    return kExitOk;
  }

  // ------------------------------------------------------------ runs

  int runs_show(const std::string& id) {
    auto st = store();
    auto record = st.load(id);
    if (!record) throw NotFound("run '" + id + "' does not exist");
    emit(to_document(*record), render_run_text(*record));
    return kExitOk;
  }

  int runs_compare(const std::string& a, const std::string& b) {
    auto st = store();
    auto ra = st.load(a);
    if (!ra) throw NotFound("run '" + a + "' does not exist");
    auto rb = st.load(b);
    if (!rb) throw NotFound("run '" + b + "' does not exist");
    auto cmp = compare_records(*ra, *rb);
    emit(to_document(cmp), render_comparison_text(cmp));
    return kExitOk;
  }

  int runs_list(const std::string& workflow_id, const std::string& status, const std::string& since) {
    RunFilter filter;
    if (!workflow_id.empty()) filter.workflow_id = workflow_id;
    if (!since.empty()) filter.since = since;
    if (!status.empty()) {
      filter.status = parse_run_status(status);
      if (!filter.status) {
        throw InvalidDocument("bad status", {error_at(checks::kAllowedValues, "status", "unknown run status '" + status + "'")});
      }
    }
    Json docs = Json::array();
    std::string text;
    for (const auto& s : store().query(filter)) {
      docs.push_back(to_document(s));
      text += s.run_id + "  " + s.workflow_id + " " + s.version.str() + "  " + std::string(run_status_name(s.status)) +
              "  " + s.started_at + "\n";
    }
    emit(Json{{"runs", docs}}, text);
    return kExitOk;
  }

  // ------------------------------------------------------------ serve

  int serve(const std::string& bind, const std::string& planner_spec) {
    auto colon = bind.rfind(':');
    const auto host = colon == std::string::npos ? bind : bind.substr(0, colon);
    const int port = colon == std::string::npos ? 8080 : std::stoi(bind.substr(colon + 1));
    Runtime rt(config());
    auto planner = planner_spec.empty() ? std::make_shared<ScriptedPlanner>(std::vector<ScriptedPlanner::Rule>{})
                                        : make_planner(planner_spec);
    ApiService service(rt, planner);
    err_ << "serving on " << host << ":" << port << "\n";
    if (!service.listen(host, port)) {
      err_ << "cannot listen on " << bind << "\n";
      return kExitStore;
    }
    return kExitOk;
  }

  Options opts_;

 private:
  std::ostream& out_;
  std::ostream& err_;
};

void print_diagnostics(std::ostream& err, const Diagnostics& diags) {
  for (const auto& d : diags) err << render_diagnostic(d) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  CLI::App app{"Schema-gated workflow orchestration engine", argv.empty() ? "schemagate" : argv[0]};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--registry-dir", cli.opts_.registry_dir, "Registry root (default $SCHEMAGATE_REGISTRY_DIR or ./registry)");
  app.add_option("--run-dir", cli.opts_.run_dir, "Run store root (default $SCHEMAGATE_RUN_DIR or ./run-store)");
  app.add_option("--format", cli.opts_.format, "Output format")->check(CLI::IsMember({"text", "doc"}));
  app.fallthrough();

  std::function<int()> action;
  std::string file, endpoint, id, version, name, params, dir, a, b, status, since, bind = "127.0.0.1:8080", planner;
  bool approve = false;
  std::optional<std::uint64_t> seed;

  for (const bool tool : {true, false}) {
    auto* kind = app.add_subcommand(tool ? "tool" : "workflow", tool ? "Tool definitions" : "Workflow definitions");
    kind->require_subcommand(1);
    for (const bool validate : {false, true}) {
      auto* sub = kind->add_subcommand(validate ? "validate" : "add",
                                       validate ? "Run the admission checks without storing" : "Admit and publish");
      sub->add_option("file", file, "Definition document")->required();
      if (tool) sub->add_option("--probe-endpoint", endpoint, "Ping this endpoint instead of trusting a declared stub");
      sub->callback([&, tool, validate] {
        action = [&, tool, validate] { return tool ? cli.tool_add(file, endpoint, validate) : cli.workflow_add(file, validate); };
      });
    }
    kind->add_subcommand("list", "List entries")->callback([&, tool] { action = [&, tool] { return cli.list(tool); }; });
    auto* retire = kind->add_subcommand("retire", "Retire a published version");
    retire->add_option("id", id)->required();
    retire->add_option("version", version)->required();
    retire->callback([&, tool] { action = [&, tool] { return cli.retire(tool, id, version); }; });
  }

  auto* dataset = app.add_subcommand("dataset", "Registered datasets");
  dataset->require_subcommand(1);
  auto* dadd = dataset->add_subcommand("add", "Register a CSV file");
  dadd->add_option("file", file)->required()->check(CLI::ExistingFile);
  dadd->add_option("--name", name);
  dadd->add_option("--id", id);
  dadd->callback([&] { action = [&] { return cli.dataset_add(file, name, id); }; });
  dataset->add_subcommand("list", "List datasets")->callback([&] { action = [&] { return cli.dataset_list(); }; });

  auto* registry = app.add_subcommand("registry", "Registry maintenance");
  registry->require_subcommand(1);
  auto* load = registry->add_subcommand("load", "Admit tools/, workflows/ and datasets/ from a directory");
  load->add_option("dir", dir)->required()->check(CLI::ExistingDirectory);
  load->callback([&] { action = [&] { return cli.registry_load(dir); }; });
  registry->add_subcommand("check", "Integrity scan")->callback([&] { action = [&] { return cli.registry_check(); }; });

  auto* run = app.add_subcommand("run", "Validate, approve and execute a workflow headlessly");
  run->add_option("workflow_id", id)->required();
  run->add_option("--params", params, "Flat document of workflow-level parameters");
  run->add_option("--version", version);
  run->add_flag("--approve", approve, "Approve the validated invocation (required to dispatch)");
  run->add_option("--seed", seed, "Seed ids, clocks and adapters");
  run->callback([&] { action = [&] { return cli.run(id, params, version, approve, seed); }; });

  auto* session = app.add_subcommand("session", "Scripted sessions");
  session->require_subcommand(1);
  auto* replay = session->add_subcommand("replay", "Replay a session script against the gate");
  replay->add_option("script", file)->required();
  replay->callback([&] { action = [&] { return cli.replay(file); }; });

  auto* runs = app.add_subcommand("runs", "Run records");
  runs->require_subcommand(1);
  auto* show = runs->add_subcommand("show", "Show a run record");
  show->add_option("id", id)->required();
  show->callback([&] { action = [&] { return cli.runs_show(id); }; });
  auto* compare = runs->add_subcommand("compare", "Compare two runs");
  compare->add_option("a", a)->required();
  compare->add_option("b", b)->required();
  compare->callback([&] { action = [&] { return cli.runs_compare(a, b); }; });
  auto* rlist = runs->add_subcommand("list", "List runs, newest first");
  rlist->add_option("--workflow-id", id);
  rlist->add_option("--status", status);
  rlist->add_option("--since", since);
  rlist->callback([&] { action = [&] { return cli.runs_list(id, status, since); }; });

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--planner", planner, "scripted:<file> or remote");
  serve->callback([&] { action = [&] { return cli.serve(bind, planner); }; });

  try {
    std::vector<std::string> args(argv.rbegin(), argv.rend());
    if (!args.empty()) args.pop_back();
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const DiagnosticError& e) {
    err << e.code() << ": " << e.what() << "\n";
    print_diagnostics(err, e.diagnostics());
    return kExitValidation;
  } catch (const Error& e) {
    err << e.code() << ": " << e.what() << "\n";
    const auto& code = e.code();
    if (code == "NotFound" || code == "StorageError" || code == "IntegrityError" || code == "ExecutorUnavailable") {
      return kExitStore;
    }
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "StorageError: " << e.what() << "\n";
    return kExitStore;
  } catch (const Json::exception& e) {
    err << "InvalidDocument: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace schemagate
