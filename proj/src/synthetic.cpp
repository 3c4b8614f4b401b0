#include "ripple/synthetic.hpp"

#include "ripple/errors.hpp"
#include "ripple/random.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string_view>

namespace ripple {

void SyntheticConfig::validate() const {
  if (clusters < 2) throw ValidationError("synthetic data needs at least 2 clusters");
  if (spam_keywords < 1) throw ValidationError("spam keyword set must be non-empty");
  if (spam_keywords + normal_keywords >= clusters) {
    throw ValidationError("keywords must leave at least one filler cluster");
  }
  if (train_size < 1 || test_size < 1) throw ValidationError("split sizes must be positive");
  if (!(spam_fraction > 0.0 && spam_fraction < 1.0)) throw ValidationError("spam_fraction must be in (0, 1)");
  if (min_length < 2 || max_length < min_length) throw ValidationError("invalid text length range");
  if (phrase_length < 1 || phrases < 1) throw ValidationError("texts need at least one keyword phrase");
  if (keyword_noise < 0.0 || keyword_noise > 1.0) throw ValidationError("keyword_noise must be in [0, 1]");
}

namespace {

constexpr std::array<std::string_view, 21> kInitials = {
    "b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h", "j", "q", "x", "zh", "ch", "sh", "r", "z", "c", "s"};
constexpr std::array<std::string_view, 30> kFinals = {
    "a",  "o",   "e",  "ai",  "ei",  "ao",   "ou",  "an",  "en",   "ang",
    "eng", "ong", "i", "ia",  "ie",  "iao",  "iu",  "ian", "in",   "iang",
    "ing", "u",   "ua", "uo", "uai", "ui",   "uan", "un",  "uang", "iong"};

Syllable random_syllable(Rng& rng) {
  return {std::string(kInitials[rng.below(kInitials.size())]), std::string(kFinals[rng.below(kFinals.size())]),
          static_cast<int>(1 + rng.below(4))};
}

std::string random_stroke(Rng& rng) {
  const std::size_t n = 8 + rng.below(7);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('1' + rng.below(5)));
  return s;
}

// One substitution, insertion or deletion away from `s`, kept in the middle
// so that a long common substring survives.
std::string edit_stroke(const std::string& s, Rng& rng) {
  std::string out = s;
  const std::size_t pos = s.size() / 3 + rng.below(s.size() / 3 + 1);
  switch (rng.below(3)) {
    case 0: {
      char c;
      do c = static_cast<char>('1' + rng.below(5));
      while (c == out[pos]);
      out[pos] = c;
      break;
    }
    case 1: out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), static_cast<char>('1' + rng.below(5))); break;
    default: out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos)); break;
  }
  return out;
}

std::string random_zhengma(Rng& rng) {
  const std::size_t n = 3 + rng.below(2);
  std::string s;
  while (s.size() < n) {
    const char c = static_cast<char>('A' + rng.below(26));
    if (s.find(c) == std::string::npos) s.push_back(c);
  }
  return s;
}

// Replaces one letter with a letter not already present.
std::string edit_zhengma(const std::string& s, Rng& rng) {
  std::string out = s;
  char c;
  do c = static_cast<char>('A' + rng.below(26));
  while (out.find(c) != std::string::npos);
  out[rng.below(out.size())] = c;
  return out;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SyntheticCorpus out;
  const std::size_t members = 1 + config.variants_per_cluster;
  for (std::size_t c = 0; c < config.clusters; ++c) {
    CharacterRecord base;
    base.character = static_cast<char32_t>(0x4E00 + c * members);
    base.pinyins = {random_syllable(rng)};
    base.stroke = random_stroke(rng);
    base.zhengma = random_zhengma(rng);
    out.base.push_back(base.character);
    out.table.push_back(base);
    for (std::size_t m = 1; m < members; ++m) {
      CharacterRecord v;
      v.character = static_cast<char32_t>(base.character + m);
      if (m % 2 == 1) {
        // Homophone: same syllable with another tone, unrelated glyph.
        Syllable s = base.pinyins[0];
        s.tone = 1 + static_cast<int>((static_cast<std::size_t>(s.tone) + rng.below(3)) % 4);
        v.pinyins = {s};
        v.stroke = random_stroke(rng);
        v.zhengma = random_zhengma(rng);
      } else {
        // Homograph: near-identical glyph codes, unrelated sound.
        v.pinyins = {random_syllable(rng)};
        v.stroke = edit_stroke(base.stroke, rng);
        v.zhengma = edit_zhengma(base.zhengma, rng);
      }
      out.table.push_back(std::move(v));
    }
  }

  std::vector<char32_t> order = out.base;
  shuffle(std::span(order), rng);
  out.spam_keywords.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.spam_keywords));
  out.normal_keywords.assign(order.begin() + static_cast<std::ptrdiff_t>(config.spam_keywords),
                             order.begin() + static_cast<std::ptrdiff_t>(config.spam_keywords + config.normal_keywords));
  const std::vector<char32_t> filler(order.begin() + static_cast<std::ptrdiff_t>(config.spam_keywords + config.normal_keywords),
                                     order.end());

  // Filler with contiguous keyword phrases of the text's own class, so
  // keywords co-occur with each other the way sensitive words cluster in
  // real spam.
  auto make_text = [&](Label label) {
    const std::size_t length = config.min_length + rng.below(config.max_length - config.min_length + 1);
    const auto& own = label == classifier::kSpam ? out.spam_keywords : out.normal_keywords;
    const auto& other = label == classifier::kSpam ? out.normal_keywords : out.spam_keywords;
    std::vector<std::u32string> pieces;
    for (std::size_t k = 0; !own.empty() && k < config.phrases; ++k) {
      std::u32string p;
      for (std::size_t i = 0; i < config.phrase_length; ++i) p.push_back(own[rng.below(own.size())]);
      pieces.push_back(std::move(p));
    }
    if (!other.empty() && rng.bernoulli(config.keyword_noise)) pieces.push_back(std::u32string(1, other[rng.below(other.size())]));
    std::size_t used = 0;
    for (const auto& p : pieces) used += p.size();
    const std::size_t fill = length > used ? length - used : 0;
    // insertion points into the filler, one per piece
    std::vector<std::size_t> at(pieces.size());
    for (auto& x : at) x = rng.below(fill + 1);
    std::sort(at.begin(), at.end());
    std::u32string text;
    std::size_t piece = 0;
    for (std::size_t i = 0; i <= fill; ++i) {
      while (piece < pieces.size() && at[piece] == i) text += pieces[piece++];
      if (i < fill) text.push_back(filler[rng.below(filler.size())]);
    }
    return LabeledText{label, std::move(text)};
  };
  auto make_split = [&](std::size_t n) {
    std::vector<LabeledText> split;
    split.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      split.push_back(make_text(rng.bernoulli(config.spam_fraction) ? classifier::kSpam : classifier::kNormal));
    }
    return split;
  };
  out.train = make_split(config.train_size);
  out.test = make_split(config.test_size);
  return out;
}

}  // namespace ripple
