#pragma once

// Text normalization: tokenize, drop stopwords, Porter-stem.

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace webprf::text {

using TermSequence = std::vector<std::string>;

class StopwordList {
 public:
  StopwordList() = default;
  StopwordList(std::string name, const std::vector<std::string>& words);

  // The 179-word English list shipped with NLTK.
  static StopwordList english();
  // One word per line; '#' starts a comment; entries are lowercased.
  static StopwordList load(std::istream& in, std::string name);
  static StopwordList load_file(const std::string& path);

  bool contains(std::string_view word) const;
  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return words_.size(); }
  std::vector<std::string> words() const;  // sorted

 private:
  std::string name_;
  std::unordered_set<std::string> words_;
};

// Lowercased maximal runs of letters and digits; everything else separates.
// Input is UTF-8; invalid bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

// Porter (1980) suffix stripping, steps 1a to 5b. Tokens of length <= 2
// and tokens that are not ASCII alphanumeric with at least one letter are
// returned unchanged.
std::string porter_stem(std::string_view token);

TermSequence preprocess(std::string_view text, const StopwordList& stopwords);

}  // namespace webprf::text
