#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace uvlp {

enum class Pos : std::uint8_t { Other, Determiner, Adjective, Noun };

/// Part-of-speech lexicon: closed-class determiners plus open noun and
/// adjective lists. Unknown words tag as Other.
class Lexicon {
 public:
  /// The built-in word lists shared with the synthetic world generator.
  static const Lexicon& builtin();

  static std::span<const std::string_view> builtin_nouns();
  static std::span<const std::string_view> builtin_adjectives();
  static std::span<const std::string_view> builtin_determiners();

  Lexicon() = default;
  void add(std::string_view word, Pos pos);

  Pos tag(std::string_view word) const;
  std::vector<Pos> tag(const std::vector<std::string>& words) const;

 private:
  std::unordered_map<std::string, Pos> entries_;
};

}  // namespace uvlp
