#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "tabprompt/errors.hpp"
#include "tabprompt/hash.hpp"
#include "tabprompt/evaluation.hpp"
#include "tabprompt/synthetic.hpp"

using namespace tabprompt;

namespace {

EvalRecord rec(bool matched, std::string out = "x", std::string expected = "x") {
  return EvalRecord{0, "h", std::move(out), std::move(expected), matched};
}

struct SyntheticRun {
  Table table;
  TaskSpec task;
  DatasetSplits splits;
  DeterministicEmbedder embedder{64, 0};
  std::unique_ptr<OracleTaskLM> lm;

  explicit SyntheticRun(std::vector<std::string> informative, bool fewshot_sensitive = false,
                        double p_otherwise = 0.0) {
    SyntheticSpec spec;
    spec.rows = 80;
    table = make_synthetic_table(spec);
    task = make_imputation_task(table, "label");
    splits = make_splits(table, {}, 1);
    OracleSpec o;
    o.gold_answers = task.gold;
    o.informative_columns = std::move(informative);
    o.fewshot_sensitive = fewshot_sensitive;
    o.p_correct_otherwise = p_otherwise;
    lm = std::make_unique<OracleTaskLM>(o, 100000);
  }

  EvalContext ctx() { return EvalContext{table, task, splits, embedder, *lm}; }
};

}  // namespace

TEST(Accuracy, HandChecks) {
  const std::vector<EvalRecord> all{rec(true), rec(true)};
  EXPECT_EQ(accuracy(all), 1.0);
  const std::vector<EvalRecord> half{rec(true), rec(false), rec(true), rec(false), rec(true), rec(false)};
  EXPECT_EQ(accuracy(half), 0.5);
  EXPECT_THROW(accuracy(std::vector<EvalRecord>{}), DataError);
}

TEST(F1Macro, HandChecks) {
  EXPECT_EQ(f1_macro({true, false, true}, {true, false, true}), 1.0);
  EXPECT_EQ(f1_macro({true, false, true, false}, {true, true, false, false}), 0.5);
  EXPECT_EQ(f1_macro({true, true}, {true, true}), 1.0);
  EXPECT_THROW(f1_macro({true}, {true, false}), DataError);
}

TEST(F1Macro, SingleGoldClassEqualsPlainF1) {
  // Golds all positive: macro reduces to the positive-class F1.
  const std::vector<bool> golds{true, true, true, true};
  const std::vector<bool> preds{true, false, true, false};
  const double tp = 2, fp = 0, fn = 2;
  EXPECT_DOUBLE_EQ(f1_macro(preds, golds), 2 * tp / (2 * tp + fp + fn));
}

TEST(F1Macro, BoundedOnRandomInputs) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    std::vector<bool> p, g;
    for (std::size_t k = 0; k < 1 + rng.below(10); ++k) {
      p.push_back(rng.below(2));
      g.push_back(rng.below(2));
    }
    const double f = f1_macro(p, g);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Metric, BinaryTasksUseF1OverAnswers) {
  const std::vector<EvalRecord> records{rec(true, "Yes.", "yes"), rec(false, "no", "yes"),
                                        rec(false, "yes", "no"), rec(true, "no", "no")};
  EXPECT_EQ(metric_name(TaskKind::ErrorDetection), "f1_macro");
  EXPECT_EQ(metric_name(TaskKind::DataImputation), "accuracy");
  EXPECT_EQ(compute_metric(TaskKind::EntityMatching, records), 0.5);
}

TEST(MeanStd, PopulationDeviation) {
  const std::vector<double> v{1.0, 2.0, 3.0};
  const auto [m, s] = mean_std(v);
  EXPECT_DOUBLE_EQ(m, 2.0);
  EXPECT_DOUBLE_EQ(s, std::sqrt(2.0 / 3.0));
}

TEST(Conditions, NamesRoundTrip) {
  for (const char* name : {"Baseline", "MCS-RFS", "MCS-NFS", "MCS-CLFS", "RLCS-CLFS"}) {
    EXPECT_EQ(to_string(parse_condition(name)), name);
  }
  EXPECT_THROW(parse_condition("MCS"), ConfigError);
}

TEST(RunCondition, BaselineUsesAllColumnsInDatasetOrder) {
  SyntheticRun run({"c3", "c7"});
  const auto report = run_condition(run.ctx(), {ConditionKind::Baseline, {}}, 3, 0);
  EXPECT_EQ(report.columns, run.task.candidate_columns(*run.table.schema));
  EXPECT_EQ(report.fewshot_method, "random");
  EXPECT_EQ(report.runs.size(), kRandomConditionSeeds);
  EXPECT_EQ(report.runs[0].records.size(), run.splits.test.size());
  // Dataset order satisfies (c3, c7): the oracle always answers correctly.
  EXPECT_EQ(report.value, 1.0);
  EXPECT_EQ(report.stddev, 0.0);
}

TEST(RunCondition, ReportRecomputesExactly) {
  SyntheticRun run({"c7", "c3"}, false, 0.4);
  auto report = run_condition(run.ctx(), {ConditionKind::McsRfs, {"c7", "c3", "c1"}}, 2, 3);
  report.fingerprint = "f";
  const EvalReport back = report_from_json(report_to_json(report));
  EXPECT_EQ(back, report);
  std::vector<double> metrics;
  for (const auto& r : back.runs) {
    EXPECT_EQ(compute_metric(back.task, r.records), r.metric);
    metrics.push_back(compute_metric(back.task, r.records));
  }
  EXPECT_EQ(mean_std(metrics).first, back.value);
}

TEST(RunCondition, NlAndClDifferOnlyInFewshots) {
  SyntheticRun run({"c3"});
  const ColumnSequence cols{"c3", "c1"};
  PromptAssembler assembler(run.table, run.task, run.splits.validation, run.embedder);
  for (std::size_t row : run.splits.test) {
    const auto nl = assembler.render(row, cols, {3, FewshotMethod::NL}, 0).text;
    const auto cl = assembler.render(row, cols, {3, FewshotMethod::CL}, 0).text;
    const auto tail = [](const std::string& t) { return t.substr(t.find("Test Example: ")); };
    const auto head = [](const std::string& t) { return t.substr(0, t.find('\n')); };
    EXPECT_EQ(tail(nl), tail(cl));
    EXPECT_EQ(head(nl), head(cl));
  }
}

TEST(RunCondition, RecordsCarryPromptHashes) {
  SyntheticRun run({"c3"});
  const ColumnSequence cols{"c3"};
  const auto report = run_condition(run.ctx(), {ConditionKind::McsClfs, cols}, 1, 9);
  PromptAssembler assembler(run.table, run.task, run.splits.validation, run.embedder);
  const auto& first = report.runs[0].records[0];
  EXPECT_EQ(first.row, run.splits.test[0]);
  EXPECT_EQ(first.prompt_hash, assembler.render(first.row, cols, {1, FewshotMethod::CL}, mix64(9) ^ first.row).hash());
}

TEST(RunCondition, Errors) {
  SyntheticRun run({"c3"});
  EXPECT_THROW(run_condition(run.ctx(), {ConditionKind::RlcsClfs, {}}, 3, 0), DataError);
  EXPECT_THROW(run_condition(run.ctx(), {ConditionKind::McsClfs, {}}, 3, 0), ConfigError);
  run.splits.test.clear();
  EXPECT_THROW(run_condition(run.ctx(), {ConditionKind::McsClfs, {"c3"}}, 3, 0), DataError);
}

TEST(RunCondition, DeterministicAcrossRuns) {
  SyntheticRun a({"c7", "c3"}, true, 0.3), b({"c7", "c3"}, true, 0.3);
  const Condition cond{ConditionKind::McsRfs, {"c7", "c3"}};
  EXPECT_EQ(report_to_json(run_condition(a.ctx(), cond, 3, 5)), report_to_json(run_condition(b.ctx(), cond, 3, 5)));
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_EQ(quantile(v, 0.0), 1.0);
  EXPECT_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), DataError);
}

TEST(Sweep, TwoColumnsOrderSensitive) {
  SyntheticRun run({"c3", "c7"});
  SweepOptions opt;
  const auto s = permutation_sweep(run.ctx(), {"c3", "c7"}, opt);
  ASSERT_EQ(s.entries.size(), 2u);
  for (const auto& e : s.entries) {
    const bool forward = e.columns == ColumnSequence{"c3", "c7"};
    EXPECT_EQ(e.metric, forward ? 1.0 : 0.0);
  }
  EXPECT_EQ(s.min, 0.0);
  EXPECT_EQ(s.max, 1.0);
}

TEST(Sweep, SubsetModeEnumeratesAllOrderedSubsets) {
  SyntheticRun run({"c3"});
  SweepOptions opt;
  opt.subset_mode = true;
  const auto s = permutation_sweep(run.ctx(), {"c1", "c3", "c5"}, opt);
  EXPECT_EQ(s.entries.size(), 15u);  // 3 + 6 + 6
  std::set<ColumnSequence> uniq;
  for (const auto& e : s.entries) uniq.insert(e.columns);
  EXPECT_EQ(uniq.size(), 15u);
}

TEST(Sweep, LimitAndSizeRules) {
  SyntheticRun run({"c3"});
  SweepOptions opt;
  const ColumnSequence nine{"c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8"};
  EXPECT_THROW(permutation_sweep(run.ctx(), nine, opt), DataError);
  opt.limit = 7;
  opt.seed = 3;
  const auto s = permutation_sweep(run.ctx(), nine, opt);
  EXPECT_EQ(s.entries.size(), 7u);
  EXPECT_THROW(permutation_sweep(run.ctx(), {"c1", "c1"}, SweepOptions{}), DataError);
}

TEST(Reports, SummaryCsvHasOneLinePerReport) {
  EvalReport r;
  r.dataset = "d,1";
  r.condition = "Baseline";
  r.metric_name = "accuracy";
  r.value = 0.5;
  const std::vector<EvalReport> reports{r, r};
  const std::string csv = summary_csv(reports);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.find("\"d,1\",DI,Baseline,accuracy,0.5,0.0"), std::string::npos) << csv;
}
