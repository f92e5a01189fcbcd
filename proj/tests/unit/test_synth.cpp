#include "doctest.h"

#include <set>

#include "mbti/corpus.hpp"
#include "mbti/error.hpp"
#include "mbti/features.hpp"
#include "mbti/synth.hpp"

using namespace mbti;
using namespace mbti::synth;

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto sp = s.find(' ', start);
    if (sp == std::string::npos) sp = s.size();
    out.push_back(s.substr(start, sp - start));
    start = sp + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("pseudo-words survive the text pipeline unchanged") {
  const auto words = make_words(2000 + 16 * 200, 0);
  CHECK(std::set<std::string>(words.begin(), words.end()).size() == words.size());
  const features::TextPipeline pipe;
  for (const auto& w : words) {
    CAPTURE(w);
    REQUIRE(pipe.terms(w) == std::vector<std::string>{w});
    CHECK_FALSE(corpus::contains_type_token(w));
  }
  CHECK(make_words(3, 10) == std::vector<std::string>(words.begin() + 10, words.begin() + 13));
}

TEST_CASE("generate: shape, labels, lengths, determinism") {
  SynthSpec spec;
  spec.docs_per_class = 30;
  spec.seed = 7;
  const auto docs = generate(spec);
  REQUIRE(docs.size() == 16 * 30);
  std::array<int, 16> per{};
  std::set<std::string> ids, authors;
  std::size_t venue_hits = 0;
  for (const auto& d : docs) {
    REQUIRE(d.label);
    ++per[static_cast<std::size_t>(d.label->index())];
    ids.insert(d.id);
    authors.insert(d.author);
    const auto n = split_words(d.body).size();
    CHECK(n >= spec.min_doc_length);
    CHECK(n <= spec.max_doc_length);
    if (corpus::CleanConfig::default_mbti_subreddits().contains(d.subreddit)) ++venue_hits;
    CHECK(std::holds_alternative<corpus::CleanComment>(corpus::clean(d)));
  }
  for (int c : per) CHECK(c == 30);
  CHECK(ids.size() == docs.size());
  CHECK(authors.size() <= 16 * spec.authors_per_class);
  CHECK(venue_hits > 0);
  CHECK(venue_hits < docs.size() / 3);
  CHECK(generate(spec) == docs);
  spec.seed = 8;
  CHECK_FALSE(generate(spec) == docs);
}

TEST_CASE("generate: the extremes of distinctiveness") {
  SynthSpec spec;
  spec.docs_per_class = 20;
  spec.shared_vocab = 50;
  spec.class_vocab = 10;
  const auto shared = make_words(50, 0);
  const std::set<std::string> shared_set(shared.begin(), shared.end());

  spec.distinctiveness = 0.0;
  for (const auto& d : generate(spec))
    for (const auto& w : split_words(d.body)) CHECK(shared_set.contains(w));

  spec.distinctiveness = 1.0;
  for (const auto& d : generate(spec)) {
    const auto own = make_words(10, 50 + static_cast<std::size_t>(d.label->index()) * 10);
    const std::set<std::string> own_set(own.begin(), own.end());
    for (const auto& w : split_words(d.body)) CHECK(own_set.contains(w));
  }

  spec.distinctiveness = 0.5;
  std::size_t from_class = 0, total = 0;
  for (const auto& d : generate(spec))
    for (const auto& w : split_words(d.body)) {
      from_class += !shared_set.contains(w);
      ++total;
    }
  const double share = static_cast<double>(from_class) / static_cast<double>(total);
  CHECK(share > 0.45);
  CHECK(share < 0.55);
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.distinctiveness = 1.5;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.distinctiveness = 0.5;
  spec.docs_per_class = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.docs_per_class = 1;
  spec.min_doc_length = 30;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.min_doc_length = 10;
  spec.shared_vocab = 100000;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.shared_vocab = 10;
  CHECK(spec.to_json()["docs_per_class"] == 1);
}
