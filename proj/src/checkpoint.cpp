#include "tabprompt/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tabprompt/errors.hpp"

namespace tabprompt {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw DataError("matrix data size mismatch");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[static_cast<std::size_t>(i * cols + j2)].get<double>();
  }
  return m;
}

json weights_to_json(const AttentionWeights& w) {
  json heads = json::array();
  for (const auto& h : w.heads) {
    heads.push_back({{"query", matrix_to_json(h.query)},
                     {"key", matrix_to_json(h.key)},
                     {"value", matrix_to_json(h.value)}});
  }
  return json{{"heads", std::move(heads)}, {"output", matrix_to_json(w.output)}};
}

AttentionWeights weights_from_json(const json& j) {
  AttentionWeights w;
  for (const auto& h : j.at("heads")) {
    w.heads.push_back({matrix_from_json(h.at("query")), matrix_from_json(h.at("key")),
                       matrix_from_json(h.at("value"))});
  }
  w.output = matrix_from_json(j.at("output"));
  return w;
}

json state_to_json(const MDPState& s) { return json{{"description", s.description}, {"chosen", s.chosen}}; }

MDPState state_from_json(const json& j) {
  return MDPState{j.at("description").get<std::string>(), j.at("chosen").get<std::vector<std::string>>()};
}

json episode_to_json(const EpisodeRecord& e) {
  json steps = json::array();
  for (const auto& s : e.steps) {
    steps.push_back({{"action", s.action},
                     {"reward", s.reward},
                     {"matched", s.matched},
                     {"q_values", s.q_values},
                     {"prompt_hashes", s.prompt_hashes}});
  }
  return json{{"episode", e.episode},
              {"reward_rows", e.reward_rows},
              {"chosen", e.chosen},
              {"discounted_return", e.discounted_return},
              {"undiscounted_return", e.undiscounted_return},
              {"mean_loss", e.mean_loss},
              {"updates", e.updates},
              {"steps", std::move(steps)}};
}

EpisodeRecord episode_from_json(const json& j) {
  EpisodeRecord e;
  e.episode = j.at("episode").get<std::size_t>();
  e.reward_rows = j.at("reward_rows").get<std::vector<std::size_t>>();
  e.chosen = j.at("chosen").get<std::vector<std::string>>();
  e.discounted_return = j.at("discounted_return").get<double>();
  e.undiscounted_return = j.at("undiscounted_return").get<double>();
  e.mean_loss = j.at("mean_loss").get<double>();
  e.updates = j.at("updates").get<std::size_t>();
  for (const auto& s : j.at("steps")) {
    StepRecord step;
    step.action = s.at("action").get<std::string>();
    step.reward = s.at("reward").get<double>();
    step.matched = s.at("matched").get<bool>();
    step.q_values = s.at("q_values").get<std::vector<double>>();
    step.prompt_hashes = s.at("prompt_hashes").get<std::vector<std::string>>();
    e.steps.push_back(std::move(step));
  }
  return e;
}

}  // namespace

std::string checkpoint_to_json(const TrainerCheckpoint& c) {
  json buffer = json::array();
  for (const auto& t : c.buffer) {
    buffer.push_back({{"state", state_to_json(t.state)},
                      {"action", t.action},
                      {"reward", t.reward},
                      {"next_state", state_to_json(t.next_state)},
                      {"terminal", t.terminal}});
  }
  json episodes = json::array();
  for (const auto& e : c.log.episodes) episodes.push_back(episode_to_json(e));
  json j{{"format", "tabprompt-checkpoint"},
         {"version", kCheckpointVersion},
         {"fingerprint", c.fingerprint},
         {"params",
          {{"weights", weights_to_json(c.params.weights)},
           {"first_moment", weights_to_json(c.params.optimizer.first_moment)},
           {"second_moment", weights_to_json(c.params.optimizer.second_moment)},
           {"step", c.params.optimizer.step}}},
         {"buffer", std::move(buffer)},
         {"rng_state", c.rng_state},
         {"next_episode", c.next_episode},
         {"log", {{"seed", c.log.seed}, {"episodes", std::move(episodes)}}}};
  return j.dump();
}

TrainerCheckpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "tabprompt-checkpoint") throw DataError("not a checkpoint file");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  }
  try {
    TrainerCheckpoint c;
    c.fingerprint = j.at("fingerprint").get<std::string>();
    const auto& p = j.at("params");
    c.params.weights = weights_from_json(p.at("weights"));
    c.params.optimizer.first_moment = weights_from_json(p.at("first_moment"));
    c.params.optimizer.second_moment = weights_from_json(p.at("second_moment"));
    c.params.optimizer.step = p.at("step").get<std::int64_t>();
    for (const auto& t : j.at("buffer")) {
      c.buffer.push_back(Transition{state_from_json(t.at("state")), t.at("action").get<std::string>(),
                                    t.at("reward").get<double>(), state_from_json(t.at("next_state")),
                                    t.at("terminal").get<bool>()});
    }
    c.rng_state = j.at("rng_state").get<std::string>();
    c.next_episode = j.at("next_episode").get<std::size_t>();
    c.log.seed = j.at("log").at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("log").at("episodes")) c.log.episodes.push_back(episode_from_json(e));
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const TrainerCheckpoint& checkpoint, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp);
    out << checkpoint_to_json(checkpoint);
  }
  std::filesystem::rename(tmp, path);
}

TrainerCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

std::string episode_log_to_jsonl(const EpisodeLog& log) {
  std::string out;
  for (const auto& e : log.episodes) {
    json j = episode_to_json(e);
    j["seed"] = log.seed;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

EpisodeLog episode_log_from_jsonl(const std::string& text) {
  EpisodeLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    log.seed = j.value("seed", log.seed);
    log.episodes.push_back(episode_from_json(j));
  }
  return log;
}

}  // namespace tabprompt
