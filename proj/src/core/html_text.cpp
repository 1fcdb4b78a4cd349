#include "core/html_text.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <string>
#include <unordered_map>

#include "core/strings.hpp"

namespace webprf::html {
namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

void append_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Latin-1 entities in code point order starting at U+00A0.
constexpr std::array<const char*, 96> kLatin1 = {
    "nbsp",   "iexcl",  "cent",   "pound",  "curren", "yen",    "brvbar", "sect",
    "uml",    "copy",   "ordf",   "laquo",  "not",    "shy",    "reg",    "macr",
    "deg",    "plusmn", "sup2",   "sup3",   "acute",  "micro",  "para",   "middot",
    "cedil",  "sup1",   "ordm",   "raquo",  "frac14", "frac12", "frac34", "iquest",
    "Agrave", "Aacute", "Acirc",  "Atilde", "Auml",   "Aring",  "AElig",  "Ccedil",
    "Egrave", "Eacute", "Ecirc",  "Euml",   "Igrave", "Iacute", "Icirc",  "Iuml",
    "ETH",    "Ntilde", "Ograve", "Oacute", "Ocirc",  "Otilde", "Ouml",   "times",
    "Oslash", "Ugrave", "Uacute", "Ucirc",  "Uuml",   "Yacute", "THORN",  "szlig",
    "agrave", "aacute", "acirc",  "atilde", "auml",   "aring",  "aelig",  "ccedil",
    "egrave", "eacute", "ecirc",  "euml",   "igrave", "iacute", "icirc",  "iuml",
    "eth",    "ntilde", "ograve", "oacute", "ocirc",  "otilde", "ouml",   "divide",
    "oslash", "ugrave", "uacute", "ucirc",  "uuml",   "yacute", "thorn",  "yuml",
};

const std::unordered_map<std::string_view, char32_t>& entity_table() {
  static const auto table = [] {
    std::unordered_map<std::string_view, char32_t> t = {
        {"quot", 34},     {"amp", 38},      {"apos", 39},     {"lt", 60},
        {"gt", 62},       {"OElig", 338},   {"oelig", 339},   {"Scaron", 352},
        {"scaron", 353},  {"Yuml", 376},    {"fnof", 402},    {"circ", 710},
        {"tilde", 732},   {"ensp", 8194},   {"emsp", 8195},   {"thinsp", 8201},
        {"zwnj", 8204},   {"zwj", 8205},    {"lrm", 8206},    {"rlm", 8207},
        {"ndash", 8211},  {"mdash", 8212},  {"lsquo", 8216},  {"rsquo", 8217},
        {"sbquo", 8218},  {"ldquo", 8220},  {"rdquo", 8221},  {"bdquo", 8222},
        {"dagger", 8224}, {"Dagger", 8225}, {"bull", 8226},   {"hellip", 8230},
        {"permil", 8240}, {"prime", 8242},  {"Prime", 8243},  {"lsaquo", 8249},
        {"rsaquo", 8250}, {"euro", 8364},   {"trade", 8482},  {"larr", 8592},
        {"uarr", 8593},   {"rarr", 8594},   {"darr", 8595},   {"harr", 8596},
    };
    for (std::size_t i = 0; i < kLatin1.size(); ++i)
      t.emplace(kLatin1[i], static_cast<char32_t>(0xA0 + i));
    return t;
  }();
  return table;
}

// Entities browsers accept without the trailing ';'.
bool legacy_entity(std::string_view name) {
  return name == "amp" || name == "lt" || name == "gt" || name == "quot" || name == "nbsp";
}

bool is_raw_text_element(std::string_view name) { return name == "script" || name == "style"; }

bool is_void_element(std::string_view name) {
  static constexpr std::string_view kVoid[] = {"area", "base", "br",   "col",   "embed",
                                               "hr",   "img",  "input", "link", "meta",
                                               "param", "source", "track", "wbr"};
  return std::find(std::begin(kVoid), std::end(kVoid), name) != std::end(kVoid);
}

std::string collapse(std::string_view text) {
  std::string plain(text);
  for (auto pos = plain.find("\xC2\xA0"); pos != std::string::npos; pos = plain.find("\xC2\xA0", pos))
    plain.replace(pos, 2, " ");
  std::string out = detail::squeeze_spaces(plain);
  // A decoded "&lt;" must not read as markup downstream.
  std::string safe;
  safe.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    safe.push_back(out[i]);
    if (out[i] == '<' && i + 1 < out.size() &&
        (is_alpha(out[i + 1]) || out[i + 1] == '/' || out[i + 1] == '!'))
      safe.push_back(' ');
  }
  return safe;
}

// Shared body of extract_page_text and fragment_text.
std::string visible_text(std::string_view html, bool drop_head) {
  Tokenizer tok(html);
  Token t;
  std::string out;
  out.reserve(html.size() / 2);
  std::string skip_until;  // end tag that closes the ignored element
  while (tok.next(t)) {
    if (!skip_until.empty()) {
      if (t.kind == Token::Kind::kEndTag && t.name == skip_until) {
        skip_until.clear();
        out.push_back(' ');
      } else if (skip_until == "head" && t.kind == Token::Kind::kStartTag && t.name == "body") {
        // <head> left open: the body still counts.
        skip_until.clear();
        out.push_back(' ');
      }
      continue;
    }
    switch (t.kind) {
      case Token::Kind::kText:
        out += decode_entities(t.raw);
        break;
      case Token::Kind::kComment:
        out.push_back(' ');
        break;
      case Token::Kind::kStartTag:
        if (is_raw_text_element(t.name) || (drop_head && t.name == "head" && !t.self_closing)) {
          if (!t.self_closing) skip_until = t.name;
        } else if (is_block_element(t.name)) {
          out.push_back(' ');
        }
        break;
      case Token::Kind::kEndTag:
        if (is_block_element(t.name)) out.push_back(' ');
        break;
    }
  }
  return collapse(out);
}

}  // namespace

const std::string* Token::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes)
    if (k == key) return &v;
  return nullptr;
}

bool Token::has_class(std::string_view cls) const {
  const std::string* value = attribute("class");
  if (!value) return false;
  for (auto word : detail::split_ws(*value))
    if (word == cls) return true;
  return false;
}

bool Tokenizer::next(Token& token) {
  token = Token{};
  if (pos_ >= s_.size()) return false;

  if (!raw_text_end_.empty()) {
    // Inside <script>/<style>: everything up to the matching end tag is text.
    std::size_t p = pos_;
    std::size_t end = std::string_view::npos;
    while ((p = s_.find("</", p)) != std::string_view::npos) {
      std::size_t n = raw_text_end_.size();
      if (p + 2 + n <= s_.size()) {
        bool match = true;
        for (std::size_t k = 0; k < n; ++k)
          if (lower(s_[p + 2 + k]) != raw_text_end_[k]) match = false;
        char after = p + 2 + n < s_.size() ? s_[p + 2 + n] : '>';
        if (match && !is_alpha(after)) {
          end = p;
          break;
        }
      }
      p += 2;
    }
    raw_text_end_.clear();
    if (end == std::string_view::npos) end = s_.size();
    if (end > pos_) {
      token.kind = Token::Kind::kText;
      token.raw = s_.substr(pos_, end - pos_);
      pos_ = end;
      return true;
    }
  }

  if (s_[pos_] != '<' || pos_ + 1 >= s_.size() ||
      !(is_alpha(s_[pos_ + 1]) || s_[pos_ + 1] == '/' || s_[pos_ + 1] == '!' ||
        s_[pos_ + 1] == '?')) {
    // Text run up to the next plausible tag start.
    std::size_t p = pos_ + 1;
    while (true) {
      p = s_.find('<', p);
      if (p == std::string_view::npos || p + 1 >= s_.size()) {
        p = s_.size();
        break;
      }
      char c = s_[p + 1];
      if (is_alpha(c) || c == '/' || c == '!' || c == '?') break;
      ++p;
    }
    token.kind = Token::Kind::kText;
    token.raw = s_.substr(pos_, p - pos_);
    pos_ = p;
    return true;
  }

  if (s_.compare(pos_, 4, "<!--") == 0) {
    std::size_t end = s_.find("-->", pos_ + 4);
    token.kind = Token::Kind::kComment;
    if (end == std::string_view::npos) {
      token.raw = s_.substr(pos_ + 4);
      pos_ = s_.size();
    } else {
      token.raw = s_.substr(pos_ + 4, end - pos_ - 4);
      pos_ = end + 3;
    }
    return true;
  }
  if (s_[pos_ + 1] == '!' || s_[pos_ + 1] == '?') {
    // Doctype, CDATA, processing instruction.
    std::size_t end = s_.find('>', pos_);
    token.kind = Token::Kind::kComment;
    token.raw = s_.substr(pos_ + 2, (end == std::string_view::npos ? s_.size() : end) - pos_ - 2);
    pos_ = end == std::string_view::npos ? s_.size() : end + 1;
    return true;
  }

  bool closing = s_[pos_ + 1] == '/';
  std::size_t p = pos_ + (closing ? 2 : 1);
  std::size_t name_start = p;
  while (p < s_.size() && !detail::is_space(s_[p]) && s_[p] != '>' && s_[p] != '/') ++p;
  token.kind = closing ? Token::Kind::kEndTag : Token::Kind::kStartTag;
  token.name.reserve(p - name_start);
  for (std::size_t k = name_start; k < p; ++k) token.name.push_back(lower(s_[k]));

  // Attributes; quoted values may contain '>'.
  while (p < s_.size() && s_[p] != '>') {
    if (detail::is_space(s_[p])) {
      ++p;
      continue;
    }
    if (s_[p] == '/') {
      token.self_closing = true;
      ++p;
      continue;
    }
    std::size_t a = p;
    while (p < s_.size() && !detail::is_space(s_[p]) && s_[p] != '=' && s_[p] != '>' &&
           !(s_[p] == '/' && p + 1 < s_.size() && s_[p + 1] == '>'))
      ++p;
    std::string key;
    for (std::size_t k = a; k < p; ++k) key.push_back(lower(s_[k]));
    while (p < s_.size() && detail::is_space(s_[p])) ++p;
    std::string value;
    if (p < s_.size() && s_[p] == '=') {
      ++p;
      while (p < s_.size() && detail::is_space(s_[p])) ++p;
      if (p < s_.size() && (s_[p] == '"' || s_[p] == '\'')) {
        char q = s_[p++];
        std::size_t close = s_.find(q, p);
        if (close == std::string_view::npos) close = s_.size();
        value = decode_entities(s_.substr(p, close - p));
        p = std::min(close + 1, s_.size());
      } else {
        std::size_t v = p;
        while (p < s_.size() && !detail::is_space(s_[p]) && s_[p] != '>') ++p;
        value = decode_entities(s_.substr(v, p - v));
      }
    }
    if (!key.empty()) token.attributes.emplace_back(std::move(key), std::move(value));
  }
  pos_ = p < s_.size() ? p + 1 : s_.size();
  if (p > 0 && p < s_.size() && s_[p - 1] == '/') token.self_closing = true;
  if (!closing && is_void_element(token.name)) token.self_closing = true;
  if (!closing && !token.self_closing && is_raw_text_element(token.name))
    raw_text_end_ = token.name;
  return true;
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c != '&') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (j < text.size() && text[j] == '#') {
      ++j;
      bool hex = j < text.size() && (text[j] == 'x' || text[j] == 'X');
      if (hex) ++j;
      std::size_t digits = j;
      while (j < text.size() && (hex ? std::isxdigit(static_cast<unsigned char>(text[j]))
                                     : std::isdigit(static_cast<unsigned char>(text[j]))))
        ++j;
      if (j == digits || j - digits > 8) {
        out.push_back('&');
        ++i;
        continue;
      }
      std::uint32_t cp = 0;
      std::from_chars(text.data() + digits, text.data() + j, cp, hex ? 16 : 10);
      if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
      append_utf8(cp, out);
      if (j < text.size() && text[j] == ';') ++j;
      i = j;
      continue;
    }
    while (j < text.size() && j - i <= 10 &&
           (is_alpha(text[j]) || std::isdigit(static_cast<unsigned char>(text[j]))))
      ++j;
    std::string_view name = text.substr(i + 1, j - i - 1);
    bool semicolon = j < text.size() && text[j] == ';';
    const auto& table = entity_table();
    auto it = table.find(name);
    if (it != table.end() && (semicolon || legacy_entity(name))) {
      append_utf8(it->second, out);
      i = semicolon ? j + 1 : j;
    } else {
      out.push_back('&');
      ++i;
    }
  }
  return out;
}

bool is_block_element(std::string_view tag) {
  static constexpr std::string_view kBlock[] = {
      "address", "article", "aside",  "blockquote", "body",    "br",     "caption", "dd",
      "details", "dialog",  "div",    "dl",         "dt",      "fieldset", "figcaption",
      "figure",  "footer",  "form",   "h1",         "h2",      "h3",     "h4",      "h5",
      "h6",      "header",  "hr",     "html",       "li",      "main",   "nav",     "ol",
      "option",  "p",       "pre",    "section",    "summary", "table",  "tbody",   "td",
      "tfoot",   "th",      "thead",  "title",      "tr",      "ul",     "select",  "textarea",
      "img",     "iframe",  "noscript"};
  return std::find(std::begin(kBlock), std::end(kBlock), tag) != std::end(kBlock);
}

std::string extract_page_text(std::string_view html) { return visible_text(html, true); }

std::string fragment_text(std::string_view html) { return visible_text(html, false); }

}  // namespace webprf::html
