#include "ripple/dataset.hpp"

#include "ripple/errors.hpp"
#include "ripple/text.hpp"

#include <fstream>

namespace ripple {

std::string_view label_name(Label label) { return label == classifier::kSpam ? "spam" : "normal"; }

std::optional<Label> parse_label(std::string_view name) {
  if (name == "spam") return classifier::kSpam;
  if (name == "normal") return classifier::kNormal;
  return std::nullopt;
}

std::vector<LabeledText> parse_dataset(std::istream& in) {
  std::vector<LabeledText> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected 'label<TAB>text'");
    const auto label = parse_label(trim(std::string_view(line).substr(0, tab)));
    if (!label) throw ParseError(line_no, "label must be 'spam' or 'normal'");
    try {
      out.push_back({*label, utf8_decode(std::string_view(line).substr(tab + 1))});
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
    if (out.back().text.empty()) throw ParseError(line_no, "empty text");
  }
  return out;
}

std::vector<LabeledText> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return parse_dataset(in);
}

void write_dataset(std::ostream& out, std::span<const LabeledText> data) {
  for (const auto& t : data) out << label_name(t.label) << '\t' << utf8_encode(t.text) << '\n';
}

void save_dataset(const std::filesystem::path& path, std::span<const LabeledText> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset(out, data);
}

std::unordered_set<char32_t> character_set(std::span<const LabeledText> data) {
  std::unordered_set<char32_t> out;
  for (const auto& t : data) out.insert(t.text.begin(), t.text.end());
  return out;
}

Vocabulary::Vocabulary(std::vector<char32_t> characters) : characters_(std::move(characters)) {
  for (std::size_t i = 0; i < characters_.size(); ++i) {
    if (!index_.emplace(characters_[i], static_cast<std::uint32_t>(i)).second) {
      throw ValidationError("duplicate vocabulary character");
    }
  }
}

std::uint32_t Vocabulary::id(char32_t c) const {
  auto it = index_.find(c);
  return it == index_.end() ? oov() : it->second;
}

std::vector<std::uint32_t> Vocabulary::encode(std::u32string_view text) const {
  std::vector<std::uint32_t> ids;
  ids.reserve(text.size());
  for (char32_t c : text) ids.push_back(id(c));
  return ids;
}

std::vector<classifier::Example> to_examples(const Vocabulary& vocab, std::span<const LabeledText> data) {
  std::vector<classifier::Example> out;
  out.reserve(data.size());
  for (const auto& t : data) out.push_back({vocab.encode(t.text), t.label});
  return out;
}

}  // namespace ripple
