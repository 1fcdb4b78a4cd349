#include <algorithm>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/strings.hpp"
#include "core/textprep.hpp"

namespace webprf::text {
namespace {

// Mirrors data/stopwords_english.txt.
const char* const kEnglish[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're",
    "you've", "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he",
    "him", "his", "himself", "she", "she's", "her", "hers", "herself", "it",
    "it's", "its", "itself", "they", "them", "their", "theirs", "themselves",
    "what", "which", "who", "whom", "this", "that", "that'll", "these", "those",
    "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if",
    "or", "because", "as", "until", "while", "of", "at", "by", "for", "with",
    "about", "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
    "under", "again", "further", "then", "once", "here", "there", "when", "where",
    "why", "how", "all", "any", "both", "each", "few", "more", "most", "other",
    "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than", "too",
    "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've",
    "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn",
    "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn",
    "hasn't", "haven", "haven't", "isn", "isn't", "ma", "mightn", "mightn't",
    "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
    "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn",
    "wouldn't",
};

}  // namespace

StopwordList::StopwordList(std::string name, const std::vector<std::string>& words)
    : name_(std::move(name)) {
  for (const auto& w : words) {
    std::string lw = detail::to_lower_ascii(detail::trim(w));
    if (!lw.empty()) words_.insert(std::move(lw));
  }
}

StopwordList StopwordList::english() {
  return StopwordList("english", std::vector<std::string>(std::begin(kEnglish), std::end(kEnglish)));
}

StopwordList StopwordList::load(std::istream& in, std::string name) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto w = detail::trim(line);
    if (!w.empty()) words.emplace_back(w);
  }
  return StopwordList(std::move(name), words);
}

StopwordList StopwordList::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword list " + path);
  return load(in, path);
}

bool StopwordList::contains(std::string_view word) const {
  return words_.find(std::string(word)) != words_.end();
}

std::vector<std::string> StopwordList::words() const {
  std::vector<std::string> out(words_.begin(), words_.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace webprf::text
