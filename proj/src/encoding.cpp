#include "ripple/encoding.hpp"

#include "ripple/errors.hpp"
#include "ripple/text.hpp"

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace ripple {

namespace {

// Two-letter initials first so "zh" wins over "z".
constexpr std::array<std::string_view, 23> kInitials = {
    "zh", "ch", "sh", "b", "p", "m", "f", "d", "t", "n", "l", "g",
    "k",  "h",  "j",  "q", "x", "r", "z", "c", "s", "y", "w"};

bool is_lower_ascii(char c) { return c >= 'a' && c <= 'z'; }

}  // namespace

Syllable parse_syllable(std::string_view text) {
  if (text.size() < 2) throw ValidationError("malformed pinyin '" + std::string(text) + "'");
  const char digit = text.back();
  if (digit < '0' || digit > '9') {
    throw ValidationError("pinyin '" + std::string(text) + "' has no tone digit");
  }
  if (digit < '1' || digit > '5') {
    throw ValidationError("invalid tone digit in '" + std::string(text) + "'");
  }
  std::string_view letters = text.substr(0, text.size() - 1);
  for (char c : letters) {
    if (!is_lower_ascii(c) && c != 'v') {
      throw ValidationError("malformed pinyin '" + std::string(text) + "'");
    }
  }
  Syllable s;
  s.tone = digit - '0';
  const bool nasal = letters == "m" || letters == "n" || letters == "ng";
  for (std::string_view ini : kInitials) {
    if (nasal) break;
    if (letters.substr(0, ini.size()) == ini && letters.size() > ini.size()) {
      s.initial = std::string(ini);
      break;
    }
  }
  s.final_ = std::string(letters.substr(s.initial.size()));
  if (s.final_.empty() || (!nasal && std::string_view("aeiouv").find(s.final_[0]) == std::string_view::npos)) {
    throw ValidationError("pinyin '" + std::string(text) + "' has no final");
  }
  return s;
}

std::string to_string(const Syllable& s) {
  return s.initial + s.final_ + std::to_string(s.tone);
}

void validate_stroke(std::string_view code) {
  if (code.empty()) throw ValidationError("empty stroke code");
  for (char c : code) {
    if (c < '1' || c > '5') throw ValidationError("invalid stroke code '" + std::string(code) + "'");
  }
}

void validate_zhengma(std::string_view code) {
  if (code.empty()) throw ValidationError("empty zhengma code");
  for (char c : code) {
    if (c < 'A' || c > 'Z') throw ValidationError("invalid zhengma code '" + std::string(code) + "'");
  }
}

std::vector<CharacterRecord> parse_encoding_table(std::istream& in) {
  std::vector<CharacterRecord> records;
  std::unordered_set<char32_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    try {
      const auto cols = split(line.back() == '\r' ? std::string_view(line).substr(0, line.size() - 1)
                                                  : std::string_view(line),
                              '\t');
      if (cols.size() != 4) throw ValidationError("expected 4 tab-separated columns");
      const std::u32string ch = utf8_decode(trim(cols[0]));
      if (ch.size() != 1) throw ValidationError("first column must be a single character");

      CharacterRecord rec;
      rec.character = ch[0];
      for (std::string_view p : split(trim(cols[1]), ',')) rec.pinyins.push_back(parse_syllable(trim(p)));
      rec.stroke = std::string(trim(cols[2]));
      rec.zhengma = std::string(trim(cols[3]));
      validate_stroke(rec.stroke);
      validate_zhengma(rec.zhengma);
      if (!seen.insert(rec.character).second) {
        throw ValidationError("duplicate character '" + utf8_encode(rec.character) + "'");
      }
      records.push_back(std::move(rec));
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return records;
}

std::vector<CharacterRecord> load_encoding_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open encoding table " + path.string());
  return parse_encoding_table(in);
}

void write_encoding_table(std::ostream& out, std::span<const CharacterRecord> records) {
  for (const auto& r : records) {
    out << utf8_encode(r.character) << '\t';
    for (std::size_t i = 0; i < r.pinyins.size(); ++i) {
      if (i) out << ',';
      out << to_string(r.pinyins[i]);
    }
    out << '\t' << r.stroke << '\t' << r.zhengma << '\n';
  }
}

void PinyinWeights::validate() const {
  if (initial < 0 || final_ < 0 || tone < 0) throw ValidationError("pinyin weights must be non-negative");
  if (std::abs(initial + final_ + tone - 1.0) > 1e-9) throw ValidationError("pinyin weights must sum to 1");
}

double pinyin_similarity(const Syllable& a, const Syllable& b, const PinyinWeights& w) {
  w.validate();
  double score = 0.0;
  if (a.initial == b.initial) score += w.initial;
  if (a.final_ == b.final_) score += w.final_;
  if (a.tone == b.tone) score += w.tone;
  return std::min(score, 1.0);
}

double pinyin_similarity(std::span<const Syllable> a, std::span<const Syllable> b,
                         const PinyinWeights& w) {
  double best = 0.0;
  for (const auto& x : a)
    for (const auto& y : b) best = std::max(best, pinyin_similarity(x, y, w));
  return best;
}

std::size_t longest_common_substring(std::string_view a, std::string_view b) {
  // Rolling row of run lengths ending at (i, j).
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

std::size_t longest_common_subsequence(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double stroke_similarity(std::string_view a, std::string_view b) {
  validate_stroke(a);
  validate_stroke(b);
  const auto longest = static_cast<double>(std::max(a.size(), b.size()));
  const auto substring = static_cast<double>(longest_common_substring(a, b));
  const auto subsequence = static_cast<double>(longest_common_subsequence(a, b));
  return (substring / longest + subsequence / longest) / 2.0;
}

double zhengma_similarity(std::string_view a, std::string_view b) {
  validate_zhengma(a);
  validate_zhengma(b);
  std::bitset<256> sa, sb;
  for (char c : a) sa.set(static_cast<unsigned char>(c));
  for (char c : b) sb.set(static_cast<unsigned char>(c));
  return static_cast<double>((sa & sb).count()) / static_cast<double>((sa | sb).count());
}

}  // namespace ripple
