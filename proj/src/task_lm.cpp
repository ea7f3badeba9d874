#include "tabprompt/task_lm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>

#include <json.hpp>

#include "tabprompt/errors.hpp"
#include "tabprompt/hash.hpp"

namespace tabprompt {

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  if (!out.empty() && (out.back() == '.' || out.back() == '!' || out.back() == '?')) {
    out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
  }
  return out;
}

bool matches(std::string_view output, std::string_view expected) {
  return normalize_answer(output) == normalize_answer(expected);
}

bool oracle_satisfied(const RenderedPrompt& prompt, const OracleSpec& spec) {
  const auto shown = parse_test_columns(prompt.text);
  std::size_t last = 0;
  for (std::size_t i = 0; i < spec.informative_columns.size(); ++i) {
    auto it = std::find(shown.begin(), shown.end(), spec.informative_columns[i]);
    if (it == shown.end()) return false;
    const auto pos = static_cast<std::size_t>(it - shown.begin());
    if (spec.order_sensitive && i > 0 && pos < last) return false;
    last = pos;
  }
  if (spec.fewshot_sensitive) {
    const auto& gold = spec.gold_answers[prompt.row_id];
    return std::any_of(prompt.fewshot_ids.begin(), prompt.fewshot_ids.end(), [&](std::size_t id) {
      return id < spec.gold_answers.size() && matches(spec.gold_answers[id], gold);
    });
  }
  return true;
}

std::string oracle_complete(const RenderedPrompt& prompt, const OracleSpec& spec) {
  const auto& gold = spec.gold_answers;
  if (prompt.row_id >= gold.size()) {
    throw DataError("oracle cannot identify test row " + std::to_string(prompt.row_id));
  }
  const std::uint64_t h = mix64(fnv1a64(prompt.text) ^ mix64(spec.seed));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  const double p = oracle_satisfied(prompt, spec) ? spec.p_correct_satisfied : spec.p_correct_otherwise;
  const std::string& answer = gold[prompt.row_id];
  if (u < p) return answer;

  // Distractor: the first differing gold answer scanning from a hashed offset.
  const std::string target = normalize_answer(answer);
  const std::size_t n = gold.size();
  const std::size_t start = static_cast<std::size_t>(mix64(h) % n);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t j = (start + step) % n;
    if (j != prompt.row_id && normalize_answer(gold[j]) != target) return gold[j];
  }
  if (target == "yes") return "no";
  if (target == "no") return "yes";
  return "unknown";
}

TranscriptLog::TranscriptLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw DataError("cannot open transcript " + path.string());
}

void TranscriptLog::record(const RenderedPrompt& prompt, std::string_view backend,
                           double latency_ms, std::string_view output) {
  nlohmann::ordered_json j;
  j["prompt_hash"] = prompt.hash();
  j["row_id"] = prompt.row_id;
  j["backend"] = backend;
  j["latency_ms"] = latency_ms;
  j["output"] = output;
  std::lock_guard lock(mutex_);
  out_ << j.dump() << '\n';
  out_.flush();
}

void TaskLM::check_length(const RenderedPrompt& prompt) const {
  if (prompt.text.size() > max_prompt_chars_) {
    throw DataError("prompt of " + std::to_string(prompt.text.size()) + " chars exceeds limit " +
                    std::to_string(max_prompt_chars_));
  }
}

std::string TaskLM::traced_generate(const RenderedPrompt& prompt) {
  const auto start = std::chrono::steady_clock::now();
  std::string out = generate(prompt);
  ++calls_;
  if (transcript_) {
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    transcript_->record(prompt, backend_name(), elapsed.count(), out);
  }
  return out;
}

std::string TaskLM::complete(const RenderedPrompt& prompt) {
  check_length(prompt);
  return traced_generate(prompt);
}

std::vector<std::string> TaskLM::complete_batch(std::span<const RenderedPrompt> prompts) {
  for (const auto& p : prompts) check_length(p);
  std::vector<std::string> out;
  out.reserve(prompts.size());
  for (const auto& p : prompts) out.push_back(traced_generate(p));
  return out;
}

OracleTaskLM::OracleTaskLM(OracleSpec spec, std::size_t max_prompt_chars)
    : TaskLM(max_prompt_chars), spec_(std::move(spec)) {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(spec_.p_correct_satisfied) || !prob_ok(spec_.p_correct_otherwise)) {
    throw ConfigError("tasklm.oracle", "probabilities must lie in [0, 1]");
  }
  if (spec_.gold_answers.empty()) throw ConfigError("tasklm.oracle", "oracle needs gold answers");
}

std::string OracleTaskLM::generate(const RenderedPrompt& prompt) {
  return oracle_complete(prompt, spec_);
}

RemoteTaskLM::RemoteTaskLM(RemoteSettings settings, std::size_t max_prompt_chars,
                           std::string answer_regex)
    : TaskLM(max_prompt_chars), client_(std::move(settings)) {
  if (!answer_regex.empty()) {
    try {
      answer_regex_.emplace(answer_regex);
    } catch (const std::regex_error& e) {
      throw ConfigError("tasklm.answer_regex", e.what());
    }
  }
}

std::string RemoteTaskLM::generate(const RenderedPrompt& prompt) {
  nlohmann::json request{{"prompt", prompt.text}};
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(client_.post(request.dump()));
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what());
  }
  if (!response.is_object() || !response.contains("completion") || !response["completion"].is_string()) {
    throw TransportError("completion response lacks a string \"completion\" field");
  }
  std::string completion = response["completion"].get<std::string>();
  if (answer_regex_) {
    std::smatch m;
    if (!std::regex_search(completion, m, *answer_regex_)) return {};
    return m.size() > 1 ? m[1].str() : m[0].str();
  }
  return completion.substr(0, completion.find('\n'));
}

std::vector<std::string> RemoteTaskLM::complete_batch(std::span<const RenderedPrompt> prompts) {
  for (const auto& p : prompts) check_length(p);
  std::vector<std::string> out(prompts.size());
  std::vector<std::exception_ptr> errors(prompts.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers =
      std::min<std::size_t>(prompts.size(), static_cast<std::size_t>(client_.settings().max_in_flight));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < prompts.size(); i = next++) {
        try {
          out[i] = traced_generate(prompts[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace tabprompt
