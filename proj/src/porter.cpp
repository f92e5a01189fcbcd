#include "mbti/porter.hpp"

#include <algorithm>
#include <array>

namespace mbti::features {

namespace {

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// Rule tables. Within a table the first suffix that matches decides the
// outcome, whether or not its measure condition then holds.
constexpr std::array<Rule, 21> kStep2 = {{
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
    {"izer", "ize"},    {"bli", "ble"},     {"alli", "al"},     {"entli", "ent"},
    {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
    {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
    {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    {"logi", "log"},
}};

constexpr std::array<Rule, 7> kStep3 = {{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
    {"ical", "ic"},  {"ful", ""},   {"ness", ""},
}};

constexpr std::array<std::string_view, 19> kStep4 = {
    "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
    "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
};

class Stemmer {
 public:
  explicit Stemmer(std::string_view w) : b_(w), k_(static_cast<int>(w.size()) - 1) {}

  std::string run() {
    if (k_ <= 1) return b_;
    step1ab();
    if (k_ > 0) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_.substr(0, static_cast<std::size_t>(k_ + 1));
  }

 private:
  std::string b_;
  int k_;      // last index of the current word
  int j_ = 0;  // last index of the stem before a matched suffix

  char at(int i) const { return b_[static_cast<std::size_t>(i)]; }

  bool cons(int i) const {
    switch (at(i)) {
      case 'a': case 'e': case 'i': case 'o': case 'u': return false;
      case 'y': return i == 0 || !cons(i - 1);
      default: return true;
    }
  }

  // Number of VC sequences in b[0..j].
  int measure() const {
    int n = 0;
    int i = 0;
    for (;;) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    for (;;) {
      for (;;) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      for (;;) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i)
      if (!cons(i)) return true;
    return false;
  }

  bool double_cons(int j) const { return j >= 1 && at(j) == at(j - 1) && cons(j); }

  // consonant-vowel-consonant ending at i, last consonant not w, x or y
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    char ch = at(i);
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view s) {
    const int len = static_cast<int>(s.size());
    if (len > k_ + 1) return false;
    if (std::string_view(b_).substr(static_cast<std::size_t>(k_ - len + 1), s.size()) != s)
      return false;
    j_ = k_ - len;
    return true;
  }

  void set_to(std::string_view s) {
    b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
    k_ = j_ + static_cast<int>(s.size());
  }

  void replace_if_measured(std::string_view s) {
    if (measure() > 0) set_to(s);
  }

  void step1ab() {
    if (at(k_) == 's') {
      if (ends("sses")) {
        k_ -= 2;
      } else if (ends("ies")) {
        set_to("i");
      } else if (at(k_ - 1) != 's') {
        --k_;
      }
    }
    if (ends("eed")) {
      if (measure() > 0) --k_;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      if (ends("at")) {
        set_to("ate");
      } else if (ends("bl")) {
        set_to("ble");
      } else if (ends("iz")) {
        set_to("ize");
      } else if (double_cons(k_)) {
        --k_;
        char ch = at(k_);
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
      } else {
        j_ = k_;
        if (measure() == 1 && cvc(k_)) set_to("e");
      }
    }
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
  }

  template <std::size_t N>
  void apply_table(const std::array<Rule, N>& rules) {
    for (const auto& r : rules) {
      if (ends(r.suffix)) {
        replace_if_measured(r.replacement);
        return;
      }
    }
  }

  void step2() { apply_table(kStep2); }
  void step3() { apply_table(kStep3); }

  void step4() {
    for (auto suffix : kStep4) {
      if (!ends(suffix)) continue;
      if (suffix == "ion" && !(j_ >= 0 && (at(j_) == 's' || at(j_) == 't'))) continue;
      if (measure() > 1) k_ = j_;
      return;
    }
  }

  void step5() {
    j_ = k_;
    if (at(k_) == 'e') {
      const int a = measure();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (at(k_) == 'l' && double_cons(k_) && measure() > 1) --k_;
  }
};

}  // namespace

std::string porter_stem(std::string_view word) {
  const bool plain = std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; });
  if (!plain) return std::string(word);
  return Stemmer(word).run();
}

}  // namespace mbti::features
