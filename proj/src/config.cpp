#include "tabprompt/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tabprompt/errors.hpp"
#include "tabprompt/evaluation.hpp"
#include "tabprompt/hash.hpp"

namespace tabprompt {

using nlohmann::json;

namespace {

/// Walks one JSON object, recording problems instead of throwing so that
/// every bad field is reported at once.
class Reader {
 public:
  Reader(const json& object, std::string path, std::vector<std::pair<std::string, std::string>>& errors)
      : object_(object), path_(std::move(path)), errors_(errors) {
    if (!object_.is_object()) fail("", "expected an object");
  }

  ~Reader() {
    if (!object_.is_object()) return;
    for (const auto& [key, _] : object_.items()) {
      if (!seen_.count(key)) fail(key, "unknown field");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      fail(key, "wrong type");
    }
  }

  void get_nonneg(const std::string& key, std::uint64_t& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_unsigned()) {
      fail(key, "expected a non-negative integer");
      return;
    }
    out = v->get<std::uint64_t>();
  }

  void get_size(const std::string& key, std::size_t& out) {
    std::uint64_t v = out;
    get_nonneg(key, v);
    out = static_cast<std::size_t>(v);
  }

  void get_int(const std::string& key, int& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer()) {
      fail(key, "expected an integer");
      return;
    }
    out = v->get<int>();
  }

  /// Parses a string-valued enum with `parse`, which throws on bad input.
  template <typename T, typename F>
  void get_enum(const std::string& key, T& out, F parse) {
    std::string text;
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) {
      fail(key, "expected a string");
      return;
    }
    try {
      out = parse(v->get<std::string>());
    } catch (const Error& e) {
      fail(key, e.what());
    }
  }

  void child(const std::string& key, const std::function<void(Reader&)>& body) {
    const json* v = find(key);
    if (!v) return;
    Reader sub(*v, join(key), errors_);
    if (v->is_object()) body(sub);
  }

  void fail(const std::string& key, const std::string& message) {
    errors_.emplace_back(join(key), message);
  }

  std::string join(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!object_.is_object()) return nullptr;
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  const json& object_;
  std::string path_;
  std::vector<std::pair<std::string, std::string>>& errors_;
  std::set<std::string> seen_;
};

EmbedderBackend parse_embedder_backend(std::string_view s) {
  if (s == "remote") return EmbedderBackend::Remote;
  if (s == "deterministic-test") return EmbedderBackend::DeterministicTest;
  throw ConfigError("backend", "expected \"remote\" or \"deterministic-test\", got \"" + std::string(s) + "\"");
}

std::string_view to_string(EmbedderBackend b) {
  return b == EmbedderBackend::Remote ? "remote" : "deterministic-test";
}

TaskLMBackend parse_tasklm_backend(std::string_view s) {
  if (s == "remote") return TaskLMBackend::Remote;
  if (s == "oracle") return TaskLMBackend::Oracle;
  throw ConfigError("backend", "expected \"remote\" or \"oracle\", got \"" + std::string(s) + "\"");
}

std::string_view to_string(TaskLMBackend b) { return b == TaskLMBackend::Remote ? "remote" : "oracle"; }

void read_remote(Reader& r, RemoteSettings& s) {
  r.get("endpoint", s.endpoint);
  r.get("timeout_seconds", s.timeout_seconds);
  r.get_int("retries", s.retries);
  r.get_int("max_in_flight", s.max_in_flight);
}

json remote_json(const RemoteSettings& s) {
  return {{"endpoint", s.endpoint},
          {"timeout_seconds", s.timeout_seconds},
          {"retries", s.retries},
          {"max_in_flight", s.max_in_flight}};
}

json to_json_value(const RunConfig& c) {
  json j;
  j["dataset"] = {{"path", c.dataset.path}, {"description", c.dataset.description}};
  j["task"] = {{"kind", to_string(c.task.kind)},
               {"target", c.task.target},
               {"label_column", c.task.label_column},
               {"error_report", c.task.error_report}};
  j["splits"] = {{"train", c.splits.ratios.train},
                 {"validation", c.splits.ratios.validation},
                 {"test", c.splits.ratios.test},
                 {"seed", c.splits.seed}};
  j["corruption"] = {{"column", c.corruption.column},
                     {"semantic_rate", c.corruption.semantic_rate},
                     {"syntactic_rate", c.corruption.syntactic_rate},
                     {"seed", c.corruption.seed}};
  j["embedder"] = remote_json(c.embedder.remote);
  j["embedder"]["backend"] = to_string(c.embedder.backend);
  j["embedder"]["dimension"] = c.embedder.dimension;
  j["embedder"]["cache_capacity"] = c.embedder.cache_capacity;
  j["embedder"]["seed"] = c.embedder.seed;
  j["tasklm"] = remote_json(c.tasklm.remote);
  j["tasklm"]["backend"] = to_string(c.tasklm.backend);
  j["tasklm"]["max_prompt_chars"] = c.tasklm.max_prompt_chars;
  j["tasklm"]["answer_regex"] = c.tasklm.answer_regex;
  j["oracle"] = {{"informative_columns", c.oracle.informative_columns},
                 {"order_sensitive", c.oracle.order_sensitive},
                 {"p_correct_satisfied", c.oracle.p_correct_satisfied},
                 {"p_correct_otherwise", c.oracle.p_correct_otherwise},
                 {"fewshot_sensitive", c.oracle.fewshot_sensitive},
                 {"seed", c.oracle.seed}};
  const TrainConfig& t = c.train;
  j["train"] = {{"gamma", t.gamma},
                {"learning_rate", t.learning_rate},
                {"batch_size", t.batch_size},
                {"episodes", t.episodes},
                {"epsilon", t.epsilon},
                {"buffer_capacity", t.buffer_capacity},
                {"max_steps", t.max_steps},
                {"alpha", t.alpha},
                {"rows_per_reward", t.rows_per_reward},
                {"fewshot_k", t.fewshot.k},
                {"fewshot_method", to_string(t.fewshot.method)},
                {"policy",
                 {{"dimension", t.policy.dimension},
                  {"heads", t.policy.heads},
                  {"encoder_layers", t.policy.encoder_layers},
                  {"encoder_seed", t.policy.encoder_seed}}}};
  j["conditions"] = c.conditions;
  j["manual_columns"] = c.manual_columns;
  j["k_fewshot"] = c.k_fewshot;
  j["sweep"] = {{"columns", c.sweep.columns},
                {"limit", c.sweep.limit},
                {"subset_mode", c.sweep.subset_mode},
                {"fewshot_method", to_string(c.sweep.fewshot_method)}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

RunConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }

  RunConfig c;
  std::vector<std::pair<std::string, std::string>> errors;
  {
    Reader r(root, "", errors);
    r.child("dataset", [&](Reader& d) {
      d.get("path", c.dataset.path);
      d.get("description", c.dataset.description);
    });
    r.child("task", [&](Reader& t) {
      t.get_enum("kind", c.task.kind, parse_task_kind);
      t.get("target", c.task.target);
      t.get("label_column", c.task.label_column);
      t.get("error_report", c.task.error_report);
    });
    r.child("splits", [&](Reader& s) {
      s.get("train", c.splits.ratios.train);
      s.get("validation", c.splits.ratios.validation);
      s.get("test", c.splits.ratios.test);
      s.get_nonneg("seed", c.splits.seed);
    });
    r.child("corruption", [&](Reader& s) {
      s.get("column", c.corruption.column);
      s.get("semantic_rate", c.corruption.semantic_rate);
      s.get("syntactic_rate", c.corruption.syntactic_rate);
      s.get_nonneg("seed", c.corruption.seed);
    });
    r.child("embedder", [&](Reader& e) {
      e.get_enum("backend", c.embedder.backend, parse_embedder_backend);
      read_remote(e, c.embedder.remote);
      e.get_size("dimension", c.embedder.dimension);
      e.get_size("cache_capacity", c.embedder.cache_capacity);
      e.get_nonneg("seed", c.embedder.seed);
    });
    r.child("tasklm", [&](Reader& t) {
      t.get_enum("backend", c.tasklm.backend, parse_tasklm_backend);
      read_remote(t, c.tasklm.remote);
      t.get_size("max_prompt_chars", c.tasklm.max_prompt_chars);
      t.get("answer_regex", c.tasklm.answer_regex);
    });
    r.child("oracle", [&](Reader& o) {
      o.get("informative_columns", c.oracle.informative_columns);
      o.get("order_sensitive", c.oracle.order_sensitive);
      o.get("p_correct_satisfied", c.oracle.p_correct_satisfied);
      o.get("p_correct_otherwise", c.oracle.p_correct_otherwise);
      o.get("fewshot_sensitive", c.oracle.fewshot_sensitive);
      o.get_nonneg("seed", c.oracle.seed);
    });
    r.child("train", [&](Reader& t) {
      TrainConfig& tc = c.train;
      t.get("gamma", tc.gamma);
      t.get("learning_rate", tc.learning_rate);
      t.get_size("batch_size", tc.batch_size);
      t.get_size("episodes", tc.episodes);
      t.get("epsilon", tc.epsilon);
      t.get_size("buffer_capacity", tc.buffer_capacity);
      t.get_size("max_steps", tc.max_steps);
      t.get("alpha", tc.alpha);
      t.get_size("rows_per_reward", tc.rows_per_reward);
      t.get_size("fewshot_k", tc.fewshot.k);
      t.get_enum("fewshot_method", tc.fewshot.method, parse_fewshot_method);
      t.child("policy", [&](Reader& p) {
        p.get_size("dimension", tc.policy.dimension);
        p.get_size("heads", tc.policy.heads);
        p.get_size("encoder_layers", tc.policy.encoder_layers);
        p.get_nonneg("encoder_seed", tc.policy.encoder_seed);
      });
    });
    r.get("conditions", c.conditions);
    r.get("manual_columns", c.manual_columns);
    r.get_size("k_fewshot", c.k_fewshot);
    r.child("sweep", [&](Reader& s) {
      s.get("columns", c.sweep.columns);
      s.get_size("limit", c.sweep.limit);
      s.get("subset_mode", c.sweep.subset_mode);
      s.get_enum("fewshot_method", c.sweep.fewshot_method, parse_fewshot_method);
    });
    r.get("output_dir", c.output_dir);
    r.get_nonneg("seed", c.seed);
  }

  for (std::size_t i = 0; i < c.conditions.size(); ++i) {
    try {
      parse_condition(c.conditions[i]);
    } catch (const ConfigError& e) {
      errors.emplace_back("conditions[" + std::to_string(i) + "]",
                          "unknown condition '" + c.conditions[i] + "'");
    }
  }
  try {
    c.train.seed = c.seed;
    c.train.validate();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    errors.emplace_back(e.field(), what.substr(std::min(what.size(), e.field().size() + 2)));
  }

  if (!errors.empty()) {
    std::string message;
    for (const auto& [field, what] : errors) message += "\n  " + field + ": " + what;
    throw ConfigError(errors.front().first, "invalid configuration:" + message);
  }
  return c;
}

std::string config_to_json(const RunConfig& config) { return to_json_value(config).dump(2); }

void apply_env_overrides(RunConfig& config) {
  auto env = [](const char* name) -> const char* {
    const char* v = std::getenv(name);
    return (v && *v) ? v : nullptr;
  };
  if (const char* v = env("TABPROMPT_EMBED_ENDPOINT")) config.embedder.remote.endpoint = v;
  if (const char* v = env("TABPROMPT_TASKLM_ENDPOINT")) config.tasklm.remote.endpoint = v;
  if (const char* v = env("TABPROMPT_EMBED_BACKEND")) config.embedder.backend = parse_embedder_backend(v);
  if (const char* v = env("TABPROMPT_TASKLM_BACKEND")) config.tasklm.backend = parse_tasklm_backend(v);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig config = config_from_json(buf.str());
  apply_env_overrides(config);
  config.base_dir = path.parent_path();
  return config;
}

void validate_config(const RunConfig& c) {
  if (c.dataset.path.empty()) throw ConfigError("dataset.path", "required");
  if (!std::filesystem::exists(c.resolve(c.dataset.path))) {
    throw ConfigError("dataset.path", "file not found: " + c.resolve(c.dataset.path).string());
  }
  if (c.task.kind == TaskKind::EntityMatching) {
    if (c.task.label_column.empty()) throw ConfigError("task.label_column", "required for EM");
  } else if (c.task.target.empty()) {
    throw ConfigError("task.target", "required for DI and ED");
  }
  if (!c.task.error_report.empty() && !std::filesystem::exists(c.resolve(c.task.error_report))) {
    throw ConfigError("task.error_report", "file not found: " + c.resolve(c.task.error_report).string());
  }
  for (double rate : {c.corruption.semantic_rate, c.corruption.syntactic_rate}) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("corruption", "rates must lie in [0, 1]");
  }
  if (c.corruption.semantic_rate + c.corruption.syntactic_rate > 1.0) {
    throw ConfigError("corruption", "semantic_rate + syntactic_rate exceeds 1");
  }
  auto check_remote = [](const RemoteSettings& s, const std::string& field) {
    if (s.endpoint.empty()) throw ConfigError(field + ".endpoint", "required for the remote backend");
    if (!(s.timeout_seconds > 0)) throw ConfigError(field + ".timeout_seconds", "must be positive");
    if (s.retries < 0) throw ConfigError(field + ".retries", "must be non-negative");
    if (s.max_in_flight < 1) throw ConfigError(field + ".max_in_flight", "must be at least 1");
  };
  if (c.embedder.backend == EmbedderBackend::Remote) check_remote(c.embedder.remote, "embedder");
  if (c.tasklm.backend == TaskLMBackend::Remote) check_remote(c.tasklm.remote, "tasklm");
  if (c.embedder.dimension == 0) throw ConfigError("embedder.dimension", "must be positive");
  for (double p : {c.oracle.p_correct_satisfied, c.oracle.p_correct_otherwise}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("oracle", "probabilities must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < c.conditions.size(); ++i) {
    try {
      parse_condition(c.conditions[i]);
    } catch (const ConfigError&) {
      throw ConfigError("conditions[" + std::to_string(i) + "]", "unknown condition '" + c.conditions[i] + "'");
    }
  }
  TrainConfig t = c.train;
  t.validate();
}

std::string config_fingerprint(const RunConfig& config) {
  json j = to_json_value(config);
  j.erase("seed");
  j.erase("output_dir");
  return hash_hex(j.dump());
}

}  // namespace tabprompt
