#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ripple {

// One pinyin syllable: initial consonant (may be empty), final, tone 1-5
// where 5 is the neutral tone.
struct Syllable {
  std::string initial;
  std::string final_;
  int tone = 5;

  bool operator==(const Syllable&) const = default;
};

// Parses "luo3" style syllables. Throws ValidationError.
Syllable parse_syllable(std::string_view text);
std::string to_string(const Syllable& s);

struct CharacterRecord {
  char32_t character = 0;
  std::vector<Syllable> pinyins;
  std::string stroke;   // digits 1-5
  std::string zhengma;  // letters A-Z

  bool operator==(const CharacterRecord&) const = default;
};

// Tab-separated table, one record per line:
//   char <TAB> pinyin1[,pinyin2...] <TAB> stroke <TAB> zhengma
// Blank lines and lines starting with '#' are skipped. Throws ParseError
// carrying the 1-based line number.
std::vector<CharacterRecord> parse_encoding_table(std::istream& in);
std::vector<CharacterRecord> load_encoding_table(const std::filesystem::path& path);
void write_encoding_table(std::ostream& out, std::span<const CharacterRecord> records);

struct PinyinWeights {
  double initial = 0.4;
  double final_ = 0.4;
  double tone = 0.2;

  void validate() const;
};

double pinyin_similarity(const Syllable& a, const Syllable& b, const PinyinWeights& w = {});

// Polyphones: best score over all syllable pairs.
double pinyin_similarity(std::span<const Syllable> a, std::span<const Syllable> b,
                         const PinyinWeights& w = {});

std::size_t longest_common_substring(std::string_view a, std::string_view b);
std::size_t longest_common_subsequence(std::string_view a, std::string_view b);

// Mean of the longest-common-substring and longest-common-subsequence
// lengths, each normalized by the longer code.
double stroke_similarity(std::string_view a, std::string_view b);

// Jaccard index over the sets of code letters.
double zhengma_similarity(std::string_view a, std::string_view b);

void validate_stroke(std::string_view code);
void validate_zhengma(std::string_view code);

}  // namespace ripple
