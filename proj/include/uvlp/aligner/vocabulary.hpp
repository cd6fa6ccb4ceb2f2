#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace uvlp {

/// Word-level vocabulary. Ids 0..4 are the specials, in this order.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kCls = 2;
  static constexpr std::size_t kSep = 3;
  static constexpr std::size_t kMask = 4;
  static constexpr std::size_t kSpecialCount = 5;

  Vocabulary();
  /// Specials followed by `words` (duplicates and specials skipped, order kept).
  explicit Vocabulary(const std::vector<std::string>& words);

  /// Specials followed by every distinct word of `texts`, sorted.
  static Vocabulary from_texts(const std::vector<std::string>& texts);

  std::size_t size() const { return words_.size(); }
  std::size_t id(std::string_view word) const;
  const std::string& word(std::size_t id) const { return words_.at(id); }
  bool contains(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }

  std::vector<std::size_t> encode(const std::vector<std::string>& words) const;

 private:
  void add(const std::string& w);

  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Lowercases and splits on anything that is not a letter, digit or apostrophe.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace uvlp
