#include "tabprompt/tokenizer.hpp"

#include <cctype>

#include "tabprompt/errors.hpp"

namespace tabprompt {

Tokenizer::Tokenizer(std::vector<std::string> vocabulary) : vocabulary_(std::move(vocabulary)) {
  if (vocabulary_.empty() || vocabulary_.front() != "<unk>") {
    throw ModelError("tokenizer vocabulary must start with <unk>");
  }
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!ids_.emplace(vocabulary_[i], static_cast<int>(i)).second) {
      throw ModelError("duplicate vocabulary entry '" + vocabulary_[i] + "'");
    }
  }
}

Tokenizer Tokenizer::build(std::span<const std::string> texts) {
  std::vector<std::string> vocab{"<unk>"};
  std::unordered_map<std::string, int> seen{{"<unk>", 0}};
  for (const auto& text : texts) {
    for (auto& piece : split(text)) {
      if (seen.emplace(piece, static_cast<int>(vocab.size())).second) vocab.push_back(piece);
    }
  }
  return Tokenizer(std::move(vocab));
}

std::vector<std::string> Tokenizer::split(std::string_view text) {
  std::vector<std::string> pieces;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) pieces.push_back(std::move(word));
    word.clear();
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      pieces.emplace_back(1, static_cast<char>(c));
    } else {
      word.push_back(static_cast<char>(c));
    }
  }
  flush();
  return pieces;
}

std::vector<int> Tokenizer::tokenize(std::string_view text) const {
  std::vector<int> out;
  for (const auto& piece : split(text)) out.push_back(id(piece));
  return out;
}

int Tokenizer::id(std::string_view piece) const {
  auto it = ids_.find(std::string(piece));
  return it == ids_.end() ? kUnknown : it->second;
}

}  // namespace tabprompt
