#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tabprompt {

/// Whitespace-and-punctuation tokenizer over a closed vocabulary. Runs of
/// alphanumeric (or non-ASCII) bytes form one token; every punctuation
/// character is a token of its own. Id 0 is "<unk>".
class Tokenizer {
 public:
  static constexpr int kUnknown = 0;

  explicit Tokenizer(std::vector<std::string> vocabulary);

  /// Vocabulary of every piece occurring in `texts`, in first-seen order.
  static Tokenizer build(std::span<const std::string> texts);

  static std::vector<std::string> split(std::string_view text);
  std::vector<int> tokenize(std::string_view text) const;

  int id(std::string_view piece) const;
  const std::string& piece(int id) const { return vocabulary_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return vocabulary_.size(); }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace tabprompt
