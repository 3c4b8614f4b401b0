#pragma once

#include "ripple/classifier.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace ripple {

using classifier::Label;

struct LabeledText {
  Label label = classifier::kNormal;
  std::u32string text;

  bool operator==(const LabeledText&) const = default;
};

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);

// One example per line: "spam|normal <TAB> text", UTF-8.
std::vector<LabeledText> parse_dataset(std::istream& in);
std::vector<LabeledText> load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, std::span<const LabeledText> data);
void save_dataset(const std::filesystem::path& path, std::span<const LabeledText> data);

std::unordered_set<char32_t> character_set(std::span<const LabeledText> data);

// Character -> token id. Graph vertices keep their vertex index; extra
// characters follow; anything else maps to the trailing out-of-vocabulary id.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<char32_t> characters);

  std::size_t size() const noexcept { return characters_.size(); }
  // Table width including the out-of-vocabulary column.
  std::size_t table_size() const noexcept { return characters_.size() + 1; }
  std::uint32_t oov() const noexcept { return static_cast<std::uint32_t>(characters_.size()); }
  const std::vector<char32_t>& characters() const noexcept { return characters_; }

  std::uint32_t id(char32_t c) const;
  std::vector<std::uint32_t> encode(std::u32string_view text) const;

 private:
  std::vector<char32_t> characters_;
  std::unordered_map<char32_t, std::uint32_t> index_;
};

std::vector<classifier::Example> to_examples(const Vocabulary& vocab,
                                             std::span<const LabeledText> data);

}  // namespace ripple
