#include "uvlp/aligner/lexicon.hpp"

#include <array>

namespace uvlp {
namespace {

constexpr std::string_view kDeterminers[] = {
    "a", "an", "the", "this", "that", "these", "those", "some", "my", "his", "her", "their"};

constexpr std::string_view kAdjectives[] = {
    "young", "old",   "red",   "blue",  "green", "small", "large", "white", "black", "brown",
    "tall",  "short", "round", "empty", "wooden", "shiny", "dark", "bright", "yellow", "striped"};

constexpr std::string_view kNouns[] = {
    "dog",      "cat",      "woman",    "man",      "child",   "couch",    "sofa",     "table",
    "chair",    "lamp",     "bowl",     "cup",      "plate",   "bottle",   "window",   "door",
    "car",      "bicycle",  "bus",      "truck",    "boat",    "train",    "tree",     "flower",
    "bird",     "horse",    "cow",      "sheep",    "ball",    "kite",     "umbrella", "bag",
    "hat",      "shirt",    "shoe",     "book",     "phone",   "laptop",   "clock",    "vase",
    "bed",      "pillow",   "blanket",  "rug",      "mirror",  "sink",     "oven",     "fridge",
    "bench",    "fence",    "road",     "sign",     "pole",    "beach",    "wave",     "rock",
    "mountain", "cloud",    "sun",      "river",    "bridge",  "house",    "roof",     "wall",
    "floor",    "banana",   "apple",    "orange",   "pizza",   "cake",     "sandwich", "spoon",
    "fork",     "knife",    "guitar",   "piano",    "drum",    "camera",   "helmet",   "glove",
    "jacket",   "scarf",    "basket",   "box",      "candle",  "painting", "shelf",    "desk",
    "keyboard", "mouse",    "monitor",  "tv",       "remote",  "toy",      "doll",     "teddy",
    "elephant", "giraffe",  "zebra",    "bear",     "duck",    "fish",     "frog",     "rabbit",
    "tower",    "statue",   "fountain", "lantern",  "ladder",  "bucket",   "barrel",   "tent",
    "sail",     "anchor",   "rope",     "net",      "wheel",   "engine",   "saddle",   "carpet"};

Lexicon make_builtin() {
  Lexicon lex;
  for (auto w : kDeterminers) lex.add(w, Pos::Determiner);
  for (auto w : kAdjectives) lex.add(w, Pos::Adjective);
  for (auto w : kNouns) lex.add(w, Pos::Noun);
  return lex;
}

}  // namespace

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = make_builtin();
  return lex;
}

std::span<const std::string_view> Lexicon::builtin_nouns() { return kNouns; }
std::span<const std::string_view> Lexicon::builtin_adjectives() { return kAdjectives; }
std::span<const std::string_view> Lexicon::builtin_determiners() { return kDeterminers; }

void Lexicon::add(std::string_view word, Pos pos) { entries_[std::string(word)] = pos; }

Pos Lexicon::tag(std::string_view word) const {
  auto it = entries_.find(std::string(word));
  return it == entries_.end() ? Pos::Other : it->second;
}

std::vector<Pos> Lexicon::tag(const std::vector<std::string>& words) const {
  std::vector<Pos> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(tag(w));
  return out;
}

}  // namespace uvlp
