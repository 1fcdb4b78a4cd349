// Porter, M.F. "An algorithm for suffix stripping", Program 14(3), 1980.
// Rules follow the published list (ABLI -> ABLE in step 2, no LOGI rule).

#include <algorithm>
#include <string>
#include <string_view>

#include "core/textprep.hpp"

namespace webprf::text {
namespace {

class Stemmer {
 public:
  explicit Stemmer(std::string_view word) : b_(word) {}

  std::string run() {
    step1ab();
    if (b_.size() > 2) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_;
  }

 private:
  std::string b_;
  // Length of the stem once a suffix matched in ends().
  std::size_t j_ = 0;

  bool cons(std::size_t i) const {
    switch (b_[i]) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b_[0, len).
  int measure(std::size_t len) const {
    int n = 0;
    std::size_t i = 0;
    while (true) {
      if (i >= len) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i >= len) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i >= len) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  int m() const { return measure(j_); }

  bool vowel_in_stem() const {
    for (std::size_t i = 0; i < j_; ++i)
      if (!cons(i)) return true;
    return false;
  }

  // *d: b_[0, len) ends with a double consonant.
  bool double_cons(std::size_t len) const {
    if (len < 2) return false;
    if (b_[len - 1] != b_[len - 2]) return false;
    return cons(len - 1);
  }

  // *o: b_[0, len) ends consonant-vowel-consonant, last not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3) return false;
    std::size_t i = len - 1;
    if (!cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view suffix) {
    if (suffix.size() > b_.size()) return false;
    if (b_.compare(b_.size() - suffix.size(), suffix.size(), suffix) != 0) return false;
    j_ = b_.size() - suffix.size();
    return true;
  }

  void set_to(std::string_view replacement) {
    b_.resize(j_);
    b_ += replacement;
  }

  void replace_if_m0(std::string_view replacement) {
    if (m() > 0) set_to(replacement);
  }

  void step1ab() {
    if (b_.back() == 's') {
      if (ends("sses")) {
        set_to("ss");
      } else if (ends("ies")) {
        set_to("i");
      } else if (b_.size() >= 2 && b_[b_.size() - 2] != 's') {
        b_.pop_back();
      }
    }
    if (ends("eed")) {
      if (m() > 0) b_.pop_back();
      return;
    }
    if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      b_.resize(j_);
      j_ = b_.size();
      if (ends("at")) {
        set_to("ate");
      } else if (ends("bl")) {
        set_to("ble");
      } else if (ends("iz")) {
        set_to("ize");
      } else if (double_cons(b_.size())) {
        char ch = b_.back();
        if (ch != 'l' && ch != 's' && ch != 'z') b_.pop_back();
      } else {
        j_ = b_.size();
        if (measure(b_.size()) == 1 && cvc(b_.size())) b_ += 'e';
      }
    }
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_.back() = 'i';
  }

  void step2() {
    if (b_.size() < 2) return;
    switch (b_[b_.size() - 2]) {
      case 'a':
        if (ends("ational")) return replace_if_m0("ate");
        if (ends("tional")) return replace_if_m0("tion");
        return;
      case 'c':
        if (ends("enci")) return replace_if_m0("ence");
        if (ends("anci")) return replace_if_m0("ance");
        return;
      case 'e':
        if (ends("izer")) return replace_if_m0("ize");
        return;
      case 'l':
        if (ends("abli")) return replace_if_m0("able");
        if (ends("alli")) return replace_if_m0("al");
        if (ends("entli")) return replace_if_m0("ent");
        if (ends("eli")) return replace_if_m0("e");
        if (ends("ousli")) return replace_if_m0("ous");
        return;
      case 'o':
        if (ends("ization")) return replace_if_m0("ize");
        if (ends("ation")) return replace_if_m0("ate");
        if (ends("ator")) return replace_if_m0("ate");
        return;
      case 's':
        if (ends("alism")) return replace_if_m0("al");
        if (ends("iveness")) return replace_if_m0("ive");
        if (ends("fulness")) return replace_if_m0("ful");
        if (ends("ousness")) return replace_if_m0("ous");
        return;
      case 't':
        if (ends("aliti")) return replace_if_m0("al");
        if (ends("iviti")) return replace_if_m0("ive");
        if (ends("biliti")) return replace_if_m0("ble");
        return;
      default:
        return;
    }
  }

  void step3() {
    switch (b_.back()) {
      case 'e':
        if (ends("icate")) return replace_if_m0("ic");
        if (ends("ative")) return replace_if_m0("");
        if (ends("alize")) return replace_if_m0("al");
        return;
      case 'i':
        if (ends("iciti")) return replace_if_m0("ic");
        return;
      case 'l':
        if (ends("ical")) return replace_if_m0("ic");
        if (ends("ful")) return replace_if_m0("");
        return;
      case 's':
        if (ends("ness")) return replace_if_m0("");
        return;
      default:
        return;
    }
  }

  void step4() {
    if (b_.size() < 2) return;
    bool matched = false;
    switch (b_[b_.size() - 2]) {
      case 'a':
        matched = ends("al");
        break;
      case 'c':
        matched = ends("ance") || ends("ence");
        break;
      case 'e':
        matched = ends("er");
        break;
      case 'i':
        matched = ends("ic");
        break;
      case 'l':
        matched = ends("able") || ends("ible");
        break;
      case 'n':
        matched = ends("ant") || ends("ement") || ends("ment") || ends("ent");
        break;
      case 'o':
        if (ends("ion")) {
          matched = j_ > 0 && (b_[j_ - 1] == 's' || b_[j_ - 1] == 't');
        } else {
          matched = ends("ou");
        }
        break;
      case 's':
        matched = ends("ism");
        break;
      case 't':
        matched = ends("ate") || ends("iti");
        break;
      case 'u':
        matched = ends("ous");
        break;
      case 'v':
        matched = ends("ive");
        break;
      case 'z':
        matched = ends("ize");
        break;
      default:
        break;
    }
    if (matched && m() > 1) b_.resize(j_);
  }

  void step5() {
    j_ = b_.size();
    if (b_.back() == 'e') {
      std::size_t stem = b_.size() - 1;
      int a = measure(stem);
      if (a > 1 || (a == 1 && !cvc(stem))) b_.pop_back();
    }
    if (b_.back() == 'l' && double_cons(b_.size()) && measure(b_.size()) > 1) b_.pop_back();
  }
};

bool stemmable(std::string_view token) {
  bool letter = false;
  for (char c : token) {
    if (c >= 'a' && c <= 'z') {
      letter = true;
    } else if (!(c >= '0' && c <= '9')) {
      return false;
    }
  }
  return letter;
}

}  // namespace

std::string porter_stem(std::string_view token) {
  if (token.size() <= 2 || !stemmable(token)) return std::string(token);
  return Stemmer(token).run();
}

}  // namespace webprf::text
