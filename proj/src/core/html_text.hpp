#pragma once

// Lenient HTML tokenizer and visible-text extraction. Nothing here throws on
// malformed markup.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace webprf::html {

struct Token {
  enum class Kind { kText, kStartTag, kEndTag, kComment };
  Kind kind = Kind::kText;
  std::string name;  // lowercase tag name
  std::vector<std::pair<std::string, std::string>> attributes;  // names lowercase, values decoded
  std::string_view raw;  // text content (undecoded) for kText / kComment
  bool self_closing = false;

  const std::string* attribute(std::string_view key) const;
  // True when the class attribute contains cls as a whole word.
  bool has_class(std::string_view cls) const;
};

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view html) : s_(html) {}
  bool next(Token& token);
  std::size_t offset() const noexcept { return pos_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::string raw_text_end_;  // set after <script> / <style>
};

// Decodes named (HTML 4 Latin-1 set plus common typographic entities) and
// numeric character references. Unknown references are kept verbatim.
std::string decode_entities(std::string_view text);

bool is_block_element(std::string_view tag);

// Visible text: drops script, style and head content and comments, removes
// tags, turns block boundaries into spaces, decodes entities and collapses
// whitespace. Output never contains '<' directly followed by a letter, '/'
// or '!'.
std::string extract_page_text(std::string_view html);

// Visible text of an already isolated fragment (no head/script handling
// beyond dropping script and style).
std::string fragment_text(std::string_view html);

}  // namespace webprf::html
