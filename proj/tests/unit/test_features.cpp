#include "doctest.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "mbti/error.hpp"
#include "mbti/features.hpp"
#include "mbti/io.hpp"
#include "mbti/porter.hpp"
#include "test_util.hpp"

using namespace mbti;
using namespace mbti::features;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize: examples") {
  CHECK(tokenize("I think people would know") == Tokens{"i", "think", "people", "would", "know"});
  CHECK(tokenize("see https://x.y now") == Tokens{"see", "now"});
  CHECK(tokenize("&amp; fun") == Tokens{"fun"});
  CHECK(tokenize("") == Tokens{});
  CHECK(tokenize("  ...  ") == Tokens{});
  CHECK(tokenize("don't stop") == Tokens{"don", "t", "stop"});
  CHECK(tokenize("abc123 x2") == Tokens{"abc123", "x2"});
  CHECK(tokenize("Über CAFÉ") == Tokens{"über", "café"});
  CHECK(tokenize("visit www.example.com today") == Tokens{"visit", "today"});
  CHECK(tokenize("a&b; c") == Tokens{"a", "c"});
  CHECK(tokenize("R&D team") == Tokens{"r", "d", "team"});
}

TEST_CASE("tokenize: flags") {
  TokenizerConfig keep;
  keep.strip_urls = false;
  keep.strip_html_entities = false;
  keep.lowercase = false;
  CHECK(tokenize("see https://x.y now", keep) == Tokens{"see", "https", "x", "y", "now"});
  CHECK(tokenize("&amp; Fun", keep) == Tokens{"amp", "Fun"});

  CHECK(tokenize("so fun 😀 yes") == Tokens{"so", "fun", "😀", "yes"});
  CHECK(tokenize("ok👍🏽!") == Tokens{"ok", "👍"});
  TokenizerConfig strip;
  strip.strip_emoji = true;
  CHECK(tokenize("so fun 😀 yes ❤️", strip) == Tokens{"so", "fun", "yes"});
}

TEST_CASE("tokenize: hand-checked entity list") {
  std::ifstream in(testutil::fixture("html_entities.txt"));
  REQUIRE(in);
  std::string e;
  int n = 0;
  while (std::getline(in, e)) {
    if (e.empty() || e[0] == '#') continue;
    CAPTURE(e);
    CHECK(tokenize(e + " fun") == Tokens{"fun"});
    CHECK(tokenize("x" + e + "y") == Tokens{"x", "y"});
    ++n;
  }
  CHECK(n >= 10);
  CHECK(tokenize("&notanentity fun") == Tokens{"notanentity", "fun"});
  CHECK(tokenize("&#; fun") == Tokens{"fun"});
}

TEST_CASE("tokenizer config validation") {
  TokenizerConfig c;
  CHECK_NOTHROW(c.validate());
  c.ngram_hi = 3;
  CHECK_NOTHROW(c.validate());
  c.ngram_hi = 4;
  CHECK_THROWS_AS(c.validate(), Error);
  c.ngram_lo = 2;
  c.ngram_hi = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c.ngram_lo = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("stop words") {
  const auto en = Lexicon::english();
  CHECK(en.size() > 100);
  CHECK(remove_stopwords({"i", "think", "people"}, en) == Tokens{"think", "people"});
  CHECK(remove_stopwords({}, en).empty());
  CHECK(remove_stopwords({"cat", "dog"}, en) == Tokens{"cat", "dog"});
  const auto custom = Lexicon::parse("# comment\nfoo\n  bar  \n\n");
  CHECK(custom.size() == 2);
  CHECK(remove_stopwords({"foo", "x", "bar"}, custom) == Tokens{"x"});
  CHECK_THROWS_AS(Lexicon::load("/nonexistent/stopwords.txt"), Error);
}

TEST_CASE("porter: reference vocabulary") {
  std::ifstream in(testutil::fixture("porter_vocabulary.tsv"));
  REQUIRE(in);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const auto word = line.substr(0, tab);
    CAPTURE(word);
    CHECK(porter_stem(word) == line.substr(tab + 1));
    const auto s = stem(word);
    CHECK(stem(s) == s);
    ++n;
  }
  CHECK(n > 300);
  CHECK(stem("feeling") == "feel");
  CHECK(stem("people") == "peopl");
  CHECK(stem("a") == "a");
  CHECK(stem("") == "");
  CHECK(porter_stem("Running") == "Running");
}

TEST_CASE("porter: stem is a fixed point on its own outputs for pipeline vocabulary") {
  const char* text =
      "Generalizations about personalities are rarely helpful, but organizational "
      "psychologists keep conditioning their hypotheses on relational agreements "
      "and operational effectiveness; sensationalism vs. rationalizations";
  for (const auto& t : tokenize(text)) {
    const auto s = stem(t);
    CAPTURE(t);
    CHECK(stem(s) == s);
  }
}

TEST_CASE("n-grams") {
  CHECK(make_ngrams({"a", "b", "c"}, 1, 1) == Tokens{"a", "b", "c"});
  CHECK(make_ngrams({"a", "b", "c"}, 1, 2) == Tokens{"a", "b", "c", "a b", "b c"});
  CHECK(make_ngrams({"a", "b", "c"}, 3, 3) == Tokens{"a b c"});
  CHECK(make_ngrams({"a"}, 2, 3).empty());
}

TEST_CASE("pipeline order and manifest form") {
  TextPipeline p;
  CHECK(p.terms("I was feeling the people") == Tokens{"feel", "peopl"});
  p.tokenizer.ngram_hi = 2;
  CHECK(p.terms("I was feeling the people") == Tokens{"feel", "peopl", "feel peopl"});
  p.stem = false;
  p.remove_stopwords = false;
  CHECK(p.terms("the people") == Tokens{"the", "people", "the people"});
  const auto j = p.to_json();
  CHECK(j["order"] == std::string(TextPipeline::kOrder));
  const auto back = TextPipeline::from_json(j);
  CHECK(back.terms("the people") == p.terms("the people"));
  CHECK(back.to_json() == j);
}

TEST_CASE("vocabulary fitting") {
  TextPipeline raw;
  raw.remove_stopwords = false;
  raw.stem = false;
  const std::vector<Tokens> docs = {raw.terms("a b"), raw.terms("b c")};
  auto v = Vocabulary::fit(docs, 1);
  CHECK(v.size() == 3);
  CHECK(v.terms() == Tokens{"a", "b", "c"});
  CHECK(v.index("b") == 1u);
  CHECK(v.df(1) == 2);
  v = Vocabulary::fit(docs, 2);
  CHECK(v.size() == 1);
  CHECK(v.term(0) == "b");
  CHECK(Vocabulary::fit(docs, 1, 0.5).terms() == Tokens{"a", "c"});
  CHECK_THROWS_AS(Vocabulary::fit(std::vector<Tokens>{}, 1), Error);

  const auto text = Vocabulary::fit(docs, 1).to_text();
  CHECK(text == "a\t0\t1\nb\t1\t2\nc\t2\t1\n");
  CHECK(Vocabulary::from_text(text) == Vocabulary::fit(docs, 1));
}

TEST_CASE("document frequency counters merge associatively") {
  const std::vector<Tokens> docs = {{"a", "b", "a"}, {"b"}, {"c", "d"}, {"a"}, {"d", "d"}};
  DfCounter all;
  for (const auto& d : docs) all.add(d);
  DfCounter left, right, mid;
  left.add(docs[0]);
  left.add(docs[1]);
  mid.add(docs[2]);
  right.add(docs[3]);
  right.add(docs[4]);
  DfCounter l1 = left;
  l1.merge(mid);
  l1.merge(right);
  DfCounter r1 = mid;
  r1.merge(right);
  DfCounter r2 = left;
  r2.merge(r1);
  CHECK(l1.counts() == all.counts());
  CHECK(r2.counts() == all.counts());
  CHECK(l1.documents() == 5);
  CHECK(all.counts().at("a") == 2);
  CHECK(all.counts().at("d") == 2);
  CHECK(Vocabulary::fit(l1, 2) == Vocabulary::fit(docs, 2));
}

TEST_CASE("vectorize") {
  const auto v = Vocabulary::fit(std::vector<Tokens>{{"a", "b"}, {"b", "c"}}, 2);
  const auto x = vectorize({"b", "b", "d"}, v);
  REQUIRE(x.entries.size() == 1);
  CHECK(x.entries[0] == std::pair<std::uint32_t, double>{0, 2.0});
  CHECK(x.dim == 1);
  CHECK(x.valid());
  CHECK(x.sum() == 2.0);

  const auto full = Vocabulary::fit(std::vector<Tokens>{{"a", "b"}, {"b", "c"}}, 1);
  const Tokens doc = {"c", "a", "c", "b", "zz"};
  const auto y = vectorize(doc, full);
  CHECK(y.valid());
  CHECK(y.sum() == 4.0);
  CHECK(y.sum() < static_cast<double>(doc.size()));
  CHECK(vectorize({"a", "b"}, full).sum() == 2.0);
  CHECK(vectorize({}, full).entries.empty());

  SparseVector bad;
  bad.dim = 3;
  bad.entries = {{1, 1.0}, {1, 2.0}};
  CHECK_FALSE(bad.valid());
  bad.entries = {{3, 1.0}};
  CHECK_FALSE(bad.valid());
  bad.entries = {{0, 0.0}};
  CHECK_FALSE(bad.valid());
}
