#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace textclf {

// Token universe. Line number in the vocab file is the id.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, std::string continuation_prefix = "##");

  static Vocabulary from_file(const std::string& path);

  std::size_t size() const { return tokens_.size(); }
  std::int32_t unk_id() const { return unk_id_; }
  const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::string& continuation_prefix() const { return continuation_prefix_; }

  // -1 when absent
  std::int32_t lookup(const std::string& token) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::string continuation_prefix_;
  std::int32_t unk_id_ = -1;
};

struct TokenSequence {
  std::vector<std::int32_t> ids;     // subword ids
  std::vector<std::string> words;    // pre-subword words (GloVe path)
};

// Lowercase, strip control characters and accents, split punctuation.
std::vector<std::string> basic_tokenize(const std::string& text);

// Greedy longest-prefix WordPiece. Whole word maps to [unk] when any
// position fails to match or the word exceeds kMaxWordChars.
std::vector<std::int32_t> wordpiece_split(const std::string& word, const Vocabulary& vocab);

inline constexpr std::size_t kMaxWordChars = 200;

TokenSequence encode(const std::string& text, const Vocabulary& vocab);

}  // namespace textclf
