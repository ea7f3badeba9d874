#include "tabprompt/app.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tabprompt/checkpoint.hpp"
#include "tabprompt/csv.hpp"
#include "tabprompt/errors.hpp"

namespace tabprompt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::unique_ptr<TaskLM> make_tasklm(const RunConfig& config, const TaskSpec& task) {
  if (config.tasklm.backend == TaskLMBackend::Remote) {
    return std::make_unique<RemoteTaskLM>(config.tasklm.remote, config.tasklm.max_prompt_chars,
                                          config.tasklm.answer_regex);
  }
  OracleSpec spec;
  spec.gold_answers = task.gold;
  spec.informative_columns = config.oracle.informative_columns;
  spec.order_sensitive = config.oracle.order_sensitive;
  spec.p_correct_satisfied = config.oracle.p_correct_satisfied;
  spec.p_correct_otherwise = config.oracle.p_correct_otherwise;
  spec.fewshot_sensitive = config.oracle.fewshot_sensitive;
  spec.seed = config.oracle.seed;
  return std::make_unique<OracleTaskLM>(std::move(spec), config.tasklm.max_prompt_chars);
}

CorruptionSettings corruption_settings(const RunConfig& config) {
  CorruptionSettings s = config.corruption;
  if (s.column.empty()) s.column = config.task.target;
  if (s.column.empty()) throw ConfigError("corruption.column", "required (or set task.target)");
  return s;
}

std::string description_of(const RunConfig& config, const Table& table) {
  return config.dataset.description.empty() ? table.description : config.dataset.description;
}

}  // namespace

Workspace open_workspace(const RunConfig& config) {
  validate_config(config);
  Workspace ws;
  ws.config = config;
  ws.fingerprint = config_fingerprint(config);
  ws.table = load_csv(config.resolve(config.dataset.path), config.dataset.description);

  switch (config.task.kind) {
    case TaskKind::DataImputation:
      ws.task = make_imputation_task(ws.table, config.task.target);
      break;
    case TaskKind::EntityMatching:
      ws.task = make_matching_task(ws.table, config.task.label_column);
      break;
    case TaskKind::ErrorDetection: {
      CorruptionReport report;
      if (!config.task.error_report.empty()) {
        report = read_report(config.resolve(config.task.error_report));
      } else {
        auto [corrupted, r] = inject_errors(ws.table, corruption_settings(config));
        ws.table = std::move(corrupted);
        report = std::move(r);
      }
      ws.task = make_detection_task(ws.table, config.task.target,
                                    report.error_flags(ws.table.num_rows(), config.task.target));
      break;
    }
  }
  validate_task(ws.task, ws.table);
  ws.splits = make_splits(ws.table, config.splits.ratios, config.splits.seed);
  ws.embedder = make_embedder(config.embedder);
  ws.tasklm = make_tasklm(config, ws.task);
  return ws;
}

fs::path run_directory(const RunConfig& config) {
  return config.resolve(config.output_dir) / config_fingerprint(config) /
         ("seed-" + std::to_string(config.seed));
}

RunLog::RunLog(const fs::path& dir) : path_(dir / "run.log") { fs::create_directories(dir); }

void RunLog::event(const std::string& name, const std::string& json_fields) {
  json j = json::parse(json_fields);
  j["event"] = name;
  j["time"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::system_clock::now().time_since_epoch())
                  .count();
  std::ofstream out(path_, std::ios::app);
  out << j.dump() << '\n';
}

IngestSummary run_ingest(const RunConfig& config) {
  Workspace ws = open_workspace(config);
  const fs::path dir = run_directory(config);
  RunLog log(dir);
  IngestSummary s{ws.table.num_rows(), ws.table.columns(), ws.splits};
  json j;
  j["fingerprint"] = ws.fingerprint;
  j["dataset"] = ws.table.name;
  j["rows"] = s.rows;
  j["columns"] = s.columns;
  j["task"] = to_string(ws.task.kind);
  j["splits"] = {{"train", s.splits.train}, {"validation", s.splits.validation}, {"test", s.splits.test}};
  write_text(dir / "ingest.json", j.dump(2) + "\n");
  log.event("ingest", json{{"fingerprint", ws.fingerprint}, {"rows", s.rows}}.dump());
  return s;
}

CorruptionReport run_corrupt(const RunConfig& config) {
  validate_config(config);
  const Table clean = load_csv(config.resolve(config.dataset.path), config.dataset.description);
  auto [corrupted, report] = inject_errors(clean, corruption_settings(config));
  const fs::path dir = run_directory(config);
  RunLog log(dir);
  write_text(dir / "corrupted.csv", to_csv(corrupted));
  write_text(dir / "corruption_report.jsonl", report_to_jsonl(report));
  log.event("corrupt", json{{"fingerprint", config_fingerprint(config)},
                            {"entries", report.entries.size()}}
                           .dump());
  return report;
}

TrainArtifacts run_train(const RunConfig& config, bool resume) {
  Workspace ws = open_workspace(config);
  const fs::path dir = run_directory(config);
  RunLog log(dir);
  TrainConfig tc = config.train;
  tc.seed = config.seed;

  const std::string description = description_of(config, ws.table);
  const auto actions = ws.task.candidate_columns(*ws.table.schema);
  ColumnPolicy policy(description, actions, tc.policy);
  ColumnEnvironment env(description, actions, tc.max_steps);
  PromptAssembler assembler(ws.table, ws.task, ws.splits.validation, *ws.embedder);
  TaskLMRewardProbe probe(assembler, *ws.tasklm, tc.fewshot);

  const fs::path ckpt_path = dir / "checkpoint.json";
  std::optional<TrainerCheckpoint> start;
  if (resume && fs::exists(ckpt_path)) {
    start = load_checkpoint(ckpt_path);
    if (start->fingerprint != ws.fingerprint) {
      throw ConfigError("--resume", "checkpoint fingerprint " + start->fingerprint +
                                        " does not match config fingerprint " + ws.fingerprint);
    }
    log.event("resume", json{{"next_episode", start->next_episode}}.dump());
  }
  log.event("train_start", json{{"fingerprint", ws.fingerprint}, {"seed", config.seed}}.dump());

  auto on_episode = [&](const TrainerCheckpoint& ck) {
    TrainerCheckpoint tagged = ck;
    tagged.fingerprint = ws.fingerprint;
    save_checkpoint(tagged, ckpt_path);
    const auto& ep = ck.log.episodes.back();
    log.event("episode", json{{"episode", ep.episode},
                              {"return", ep.undiscounted_return},
                              {"chosen", ep.chosen}}
                             .dump());
  };
  TrainArtifacts out;
  out.result = train(policy, env, probe, ws.splits.train, tc, start, on_episode);
  out.policy = extract_policy(out.result.params.weights, policy, env);

  write_text(dir / "episodes.jsonl", episode_log_to_jsonl(out.result.log));
  write_text(dir / "policy.json",
             json{{"fingerprint", ws.fingerprint}, {"seed", config.seed}, {"columns", out.policy}}.dump(2) +
                 "\n");
  log.event("train_done", json{{"policy", out.policy}}.dump());
  return out;
}

ColumnSequence load_trained_policy(const RunConfig& config) {
  const fs::path path = run_directory(config) / "policy.json";
  if (!fs::exists(path)) {
    throw DataError("no trained policy for fingerprint " + config_fingerprint(config) + " seed " +
                    std::to_string(config.seed) + " (expected " + path.string() + "); run `train` first");
  }
  const json j = json::parse(read_text(path));
  if (j.at("fingerprint").get<std::string>() != config_fingerprint(config)) {
    throw DataError("policy file " + path.string() + " belongs to another configuration");
  }
  return j.at("columns").get<ColumnSequence>();
}

std::vector<EvalReport> run_evaluate(const RunConfig& config, const std::vector<std::string>& conditions) {
  std::vector<ConditionKind> kinds;
  const auto& names = conditions.empty() ? config.conditions : conditions;
  for (std::size_t i = 0; i < names.size(); ++i) {
    try {
      kinds.push_back(parse_condition(names[i]));
    } catch (const ConfigError&) {
      throw ConfigError("conditions[" + std::to_string(i) + "]", "unknown condition '" + names[i] + "'");
    }
  }
  Workspace ws = open_workspace(config);
  const fs::path dir = run_directory(config);
  RunLog log(dir);
  std::vector<EvalReport> reports;
  for (ConditionKind kind : kinds) {
    Condition cond{kind, {}};
    if (kind == ConditionKind::RlcsClfs) {
      cond.columns = load_trained_policy(config);
    } else if (kind != ConditionKind::Baseline) {
      if (config.manual_columns.empty()) {
        throw ConfigError("manual_columns", std::string(to_string(kind)) + " needs manual_columns");
      }
      cond.columns = config.manual_columns;
    }
    EvalReport report = run_condition(ws.context(), cond, config.k_fewshot, config.seed);
    report.fingerprint = ws.fingerprint;
    write_text(dir / "reports" / (report.condition + ".json"), report_to_json(report) + "\n");
    log.event("evaluate", json{{"condition", report.condition}, {"value", report.value}}.dump());
    reports.push_back(std::move(report));
  }
  write_text(dir / "summary.csv", summary_csv(reports));
  return reports;
}

SweepSummary run_sweep(const RunConfig& config) {
  Workspace ws = open_workspace(config);
  const fs::path dir = run_directory(config);
  RunLog log(dir);
  ColumnSequence columns = config.sweep.columns.empty() ? config.manual_columns : config.sweep.columns;
  if (columns.empty()) throw ConfigError("sweep.columns", "required (or set manual_columns)");
  SweepOptions options;
  options.limit = config.sweep.limit;
  options.subset_mode = config.sweep.subset_mode;
  options.fewshot = {config.k_fewshot, config.sweep.fewshot_method};
  options.seed = config.seed;
  SweepSummary s = permutation_sweep(ws.context(), columns, options);
  write_text(dir / "sweep.csv", sweep_to_csv(s));
  write_text(dir / "sweep_summary.json", json{{"fingerprint", ws.fingerprint},
                                              {"evaluated", s.entries.size()},
                                              {"min", s.min},
                                              {"q1", s.q1},
                                              {"median", s.median},
                                              {"q3", s.q3},
                                              {"max", s.max}}
                                                 .dump(2) +
                                             "\n");
  log.event("sweep", json{{"evaluated", s.entries.size()}, {"min", s.min}, {"max", s.max}}.dump());
  return s;
}

std::string run_build_prompt(const RunConfig& config, std::optional<std::size_t> row,
                             const std::vector<std::string>& columns) {
  Workspace ws = open_workspace(config);
  std::vector<std::string> cols = columns;
  if (cols.empty()) cols = config.manual_columns;
  if (cols.empty()) cols = ws.task.candidate_columns(*ws.table.schema);
  std::size_t r = 0;
  if (row) {
    r = *row;
    if (r >= ws.table.num_rows()) {
      throw DataError("row " + std::to_string(r) + " out of range (table has " +
                      std::to_string(ws.table.num_rows()) + " rows)");
    }
  } else {
    if (ws.splits.test.empty()) throw DataError("test split is empty");
    r = ws.splits.test.front();
  }
  PromptAssembler assembler(ws.table, ws.task, ws.splits.validation, *ws.embedder);
  return assembler.render(r, cols, FewshotSettings{config.k_fewshot, FewshotMethod::CL}, config.seed).text;
}

}  // namespace tabprompt
