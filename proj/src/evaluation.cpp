#include "tabprompt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "tabprompt/csv.hpp"
#include "tabprompt/errors.hpp"
#include "tabprompt/hash.hpp"
#include "tabprompt/random.hpp"

namespace tabprompt {

std::string_view to_string(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::Baseline: return "Baseline";
    case ConditionKind::McsRfs: return "MCS-RFS";
    case ConditionKind::McsNfs: return "MCS-NFS";
    case ConditionKind::McsClfs: return "MCS-CLFS";
    case ConditionKind::RlcsClfs: return "RLCS-CLFS";
  }
  return "?";
}

ConditionKind parse_condition(std::string_view name) {
  for (auto k : {ConditionKind::Baseline, ConditionKind::McsRfs, ConditionKind::McsNfs,
                 ConditionKind::McsClfs, ConditionKind::RlcsClfs}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("conditions", "unknown condition '" + std::string(name) + "'");
}

double accuracy(std::span<const EvalRecord> records) {
  if (records.empty()) throw DataError("accuracy of an empty record set");
  std::size_t hits = 0;
  for (const auto& r : records) hits += r.matched ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double f1_macro(const std::vector<bool>& predictions, const std::vector<bool>& golds) {
  if (predictions.size() != golds.size()) {
    throw DataError("f1_macro: " + std::to_string(predictions.size()) + " predictions for " +
                    std::to_string(golds.size()) + " gold labels");
  }
  double total = 0.0;
  int classes = 0;
  for (bool cls : {false, true}) {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
      const bool g = golds[i] == cls;
      const bool p = predictions[i] == cls;
      support += g;
      tp += g && p;
      fp += !g && p;
      fn += g && !p;
    }
    if (support == 0) continue;
    total += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    ++classes;
  }
  return classes == 0 ? 0.0 : total / classes;
}

std::string_view metric_name(TaskKind kind) {
  return kind == TaskKind::DataImputation ? "accuracy" : "f1_macro";
}

double compute_metric(TaskKind kind, std::span<const EvalRecord> records) {
  if (kind == TaskKind::DataImputation) return accuracy(records);
  if (records.empty()) throw DataError("metric of an empty record set");
  std::vector<bool> preds, golds;
  for (const auto& r : records) {
    preds.push_back(normalize_answer(r.output) == "yes");
    golds.push_back(normalize_answer(r.expected) == "yes");
  }
  return f1_macro(preds, golds);
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

SeedRun evaluate_columns(const EvalContext& ctx, std::span<const std::string> columns,
                         const FewshotSettings& fewshot, std::uint64_t seed) {
  if (ctx.splits.test.empty()) throw DataError("test split is empty");
  if (ctx.splits.validation.empty() && fewshot.k > 0) {
    throw DataError("validation split (the few-shot pool) is empty");
  }
  PromptAssembler assembler(ctx.table, ctx.task, ctx.splits.validation, ctx.embedder);
  std::vector<RenderedPrompt> prompts;
  prompts.reserve(ctx.splits.test.size());
  for (std::size_t row : ctx.splits.test) {
    prompts.push_back(assembler.render(row, columns, fewshot, mix64(seed) ^ row));
  }
  const auto outputs = ctx.tasklm.complete_batch(prompts);

  SeedRun run;
  run.seed = seed;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    run.records.push_back({prompts[i].row_id, prompts[i].hash(), outputs[i], prompts[i].expected,
                           matches(outputs[i], prompts[i].expected)});
  }
  run.metric = compute_metric(ctx.task.kind, run.records);
  return run;
}

EvalReport run_condition(const EvalContext& ctx, const Condition& condition, std::size_t k_fewshot,
                         std::uint64_t seed) {
  EvalReport report;
  report.dataset = ctx.table.name;
  report.task = ctx.task.kind;
  report.condition = std::string(to_string(condition.kind));
  report.metric_name = std::string(metric_name(ctx.task.kind));

  FewshotSettings fewshot{k_fewshot, FewshotMethod::CL};
  std::size_t seeds = 1;
  switch (condition.kind) {
    case ConditionKind::Baseline:
      report.columns = ctx.task.candidate_columns(*ctx.table.schema);
      fewshot.method = FewshotMethod::Random;
      seeds = kRandomConditionSeeds;
      break;
    case ConditionKind::McsRfs:
      fewshot.method = FewshotMethod::Random;
      seeds = kRandomConditionSeeds;
      report.columns = condition.columns;
      break;
    case ConditionKind::McsNfs:
      fewshot.method = FewshotMethod::NL;
      report.columns = condition.columns;
      break;
    case ConditionKind::McsClfs:
      report.columns = condition.columns;
      break;
    case ConditionKind::RlcsClfs:
      if (condition.columns.empty()) {
        throw DataError("RLCS-CLFS needs the column sequence of a trained checkpoint");
      }
      report.columns = condition.columns;
      break;
  }
  if (report.columns.empty()) {
    throw ConfigError("manual_columns", std::string(to_string(condition.kind)) + " needs columns");
  }
  report.fewshot_method = std::string(to_string(fewshot.method));

  std::vector<double> metrics;
  for (std::size_t s = 0; s < seeds; ++s) {
    report.runs.push_back(evaluate_columns(ctx, report.columns, fewshot, seed + s));
    metrics.push_back(report.runs.back().metric);
  }
  std::tie(report.value, report.stddev) = mean_std(metrics);
  return report;
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

std::vector<ColumnSequence> all_orderings(const ColumnSequence& columns) {
  std::vector<std::size_t> idx(columns.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<ColumnSequence> out;
  do {
    ColumnSequence seq;
    for (std::size_t i : idx) seq.push_back(columns[i]);
    out.push_back(std::move(seq));
  } while (std::next_permutation(idx.begin(), idx.end()));
  return out;
}

double count_sequences(std::size_t n, bool subsets) {
  double total = 0.0;
  double falling = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    falling *= static_cast<double>(n - k + 1);
    if (subsets || k == n) total += falling;
  }
  return total;
}

}  // namespace

SweepSummary permutation_sweep(const EvalContext& ctx, const ColumnSequence& columns,
                               const SweepOptions& options) {
  const std::size_t n = columns.size();
  if (n == 0) throw DataError("permutation sweep needs at least one column");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (columns[i] == columns[j]) throw DataError("duplicate sweep column '" + columns[i] + "'");
    }
  }
  const double total = count_sequences(n, options.subset_mode);
  std::vector<ColumnSequence> sequences;
  if (options.limit == 0 || total <= static_cast<double>(options.limit)) {
    if (n > 8) throw DataError("exhaustive sweep is limited to 8 columns; set a permutation limit");
    if (options.subset_mode) {
      for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        ColumnSequence subset;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask & (1u << i)) subset.push_back(columns[i]);
        }
        for (auto& s : all_orderings(subset)) sequences.push_back(std::move(s));
      }
    } else {
      sequences = all_orderings(columns);
    }
  } else {
    Rng rng(options.seed);
    std::set<ColumnSequence> seen;
    while (sequences.size() < options.limit) {
      ColumnSequence seq = columns;
      rng.shuffle(seq);
      if (options.subset_mode) seq.resize(1 + rng.below(n));
      if (seen.insert(seq).second) sequences.push_back(std::move(seq));
    }
  }

  SweepSummary summary;
  std::vector<double> values;
  for (auto& seq : sequences) {
    const double m = evaluate_columns(ctx, seq, options.fewshot, options.seed).metric;
    values.push_back(m);
    summary.entries.push_back({std::move(seq), m});
  }
  std::sort(values.begin(), values.end());
  summary.min = values.front();
  summary.max = values.back();
  summary.q1 = quantile(values, 0.25);
  summary.median = quantile(values, 0.5);
  summary.q3 = quantile(values, 0.75);
  return summary;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["dataset"] = r.dataset;
  j["task"] = to_string(r.task);
  j["condition"] = r.condition;
  j["columns"] = r.columns;
  j["fewshot_method"] = r.fewshot_method;
  j["metric"] = r.metric_name;
  j["value"] = r.value;
  j["stddev"] = r.stddev;
  j["fingerprint"] = r.fingerprint;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : r.runs) {
    nlohmann::ordered_json jr;
    jr["seed"] = run.seed;
    jr["metric"] = run.metric;
    jr["records"] = nlohmann::ordered_json::array();
    for (const auto& rec : run.records) {
      jr["records"].push_back({{"row", rec.row},
                               {"prompt_hash", rec.prompt_hash},
                               {"output", rec.output},
                               {"expected", rec.expected},
                               {"matched", rec.matched}});
    }
    j["runs"].push_back(std::move(jr));
  }
  return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.task = parse_task_kind(j.at("task").get<std::string>());
    r.condition = j.at("condition").get<std::string>();
    r.columns = j.at("columns").get<ColumnSequence>();
    r.fewshot_method = j.at("fewshot_method").get<std::string>();
    r.metric_name = j.at("metric").get<std::string>();
    r.value = j.at("value").get<double>();
    r.stddev = j.at("stddev").get<double>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    for (const auto& jr : j.at("runs")) {
      SeedRun run;
      run.seed = jr.at("seed").get<std::uint64_t>();
      run.metric = jr.at("metric").get<double>();
      for (const auto& rec : jr.at("records")) {
        run.records.push_back({rec.at("row").get<std::size_t>(), rec.at("prompt_hash").get<std::string>(),
                               rec.at("output").get<std::string>(), rec.at("expected").get<std::string>(),
                               rec.at("matched").get<bool>()});
      }
      r.runs.push_back(std::move(run));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed evaluation report: ") + e.what());
  }
}

std::string summary_csv(std::span<const EvalReport> reports) {
  std::string out = "dataset,task,condition,metric,value,stddev\n";
  for (const auto& r : reports) {
    out += format_csv_field(r.dataset) + "," + std::string(to_string(r.task)) + "," + r.condition + "," +
           r.metric_name + "," + nlohmann::json(r.value).dump() + "," + nlohmann::json(r.stddev).dump() + "\n";
  }
  return out;
}

std::string sweep_to_csv(const SweepSummary& summary) {
  std::string out = "columns,metric\n";
  for (const auto& e : summary.entries) {
    std::string cols;
    for (std::size_t i = 0; i < e.columns.size(); ++i) cols += (i ? "|" : "") + e.columns[i];
    out += format_csv_field(cols) + "," + nlohmann::json(e.metric).dump() + "\n";
  }
  return out;
}

}  // namespace tabprompt
