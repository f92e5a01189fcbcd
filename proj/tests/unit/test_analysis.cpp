#include "doctest.h"

#include <numeric>

#include "mbti/analysis.hpp"
#include "mbti/error.hpp"
#include "mbti/io.hpp"
#include "mbti/rng.hpp"
#include "test_util.hpp"

using namespace mbti;
using namespace mbti::analysis;
using testutil::record;

namespace {

std::vector<LanguageProfile> toy_profiles() {
  return {{"aa", {"x", "xx", "xxx"}}, {"bb", {"y", "yy", "yyy"}}};
}

}  // namespace

TEST_CASE("built-in profiles") {
  const auto p = default_profiles();
  REQUIRE(p.size() >= 5);
  for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i - 1].code < p[i].code);
  for (const auto& l : p) CHECK_FALSE(l.stopwords.empty());
  CHECK(std::any_of(p.begin(), p.end(), [](const auto& l) { return l.code == "en"; }));
}

TEST_CASE("detect_language: examples") {
  const auto p = default_profiles();
  const auto en = detect_language("the quick brown fox and the dog", p);
  CHECK(en.code == "en");
  CHECK(en.confidence > 0.3);
  const auto und = detect_language("xyzzy qwfp", p);
  CHECK(und.code == "und");
  CHECK(und.confidence == 0.0);
  CHECK(detect_language("", p).code == "und");
  CHECK(detect_language("der Hund und die Katze sind nicht hier", p).code == "de");
  CHECK(detect_language("el perro y el gato no están en la casa", p).code == "es");
  CHECK_THROWS_AS(detect_language("the", {}), Error);
}

TEST_CASE("detect_language: equal hits go to the earlier profile") {
  const auto p = toy_profiles();
  const auto d = detect_language("x xx y yy", p);
  CHECK(d.code == "aa");
  CHECK(d.confidence == 0.0);
  std::vector<LanguageProfile> rev = {p[1], p[0]};
  CHECK(detect_language("x xx y yy", rev).code == "bb");
}

TEST_CASE("detect_language: thresholds") {
  const auto p = toy_profiles();
  CHECK(detect_language("x q", p).code == "und");  // one hit
  CHECK(detect_language("x xx q w e r t z u i o p a s d f g h j k l", p).code == "und");  // 2/21 < 0.1
  CHECK(detect_language("x xx q w e r t z u i o p a s d f g h j k", p).code == "aa");  // 2/20 = 0.1
  DetectConfig loose;
  loose.min_hits = 1;
  loose.min_rate = 0.0;
  CHECK(detect_language("x q", p, loose).code == "aa");
}

TEST_CASE("profiles from a directory") {
  testutil::TempDir dir;
  io::write_file(dir / "zz.txt", "foo\nbar\n");
  io::write_file(dir / "aa.txt", "# header\nbaz\n");
  io::write_file(dir / "notes.md", "ignored");
  const auto p = load_profiles(dir.path());
  REQUIRE(p.size() == 2);
  CHECK(p[0].code == "aa");
  CHECK(p[1].stopwords.contains("bar"));
  testutil::TempDir empty;
  CHECK_THROWS_AS(load_profiles(empty.path()), Error);
  CHECK_THROWS_AS(load_profiles(empty / "missing"), Error);
}

TEST_CASE("language distribution") {
  std::vector<corpus::CleanComment> recs = {
      record("1", "a", "INTP", "the cat and the dog are here"),
      record("2", "a", "INTP", "I think that it is the best of them"),
      record("3", "b", "INTP", "what you do is up to you and me"),
      record("4", "b", "INTP", "xyzzy qwfp"),
      record("5", "c", "ENFJ", "der Hund und die Katze sind nicht hier"),
  };
  const auto p = default_profiles();
  auto d = language_distribution(recs, parse_type("INTP"), p);
  REQUIRE(d.size() == 2);
  CHECK(d[0] == std::pair<std::string, double>{"en", 0.75});
  CHECK(d[1] == std::pair<std::string, double>{"und", 0.25});
  CHECK(language_distribution(recs, parse_type("ENFJ"), p) ==
        std::vector<std::pair<std::string, double>>{{"de", 1.0}});
  CHECK_THROWS_AS(language_distribution(recs, parse_type("ISTJ"), p), Error);

  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    rng.shuffle(std::span(recs));
    CHECK(language_distribution(recs, parse_type("INTP"), p) == d);
  }
  double s = 0;
  for (const auto& [c, f] : d) s += f;
  CHECK(std::abs(s - 1.0) <= 1e-12);
  CHECK(distribution_csv(d) == "language,fraction\nen,0.75\nund,0.25\n");
}

TEST_CASE("bow ranking") {
  BowConfig cfg;
  cfg.english_only = false;  // the one-line example carries no stop words to detect a language from
  const std::vector<corpus::CleanComment> one = {record("1", "a", "INTP", "think think people")};
  const auto p = default_profiles();
  auto r = bow_ranking(one, parse_type("INTP"), cfg, p);
  REQUIRE(r.terms.size() == 2);
  CHECK(r.label == "INTP");
  CHECK(r.terms[0].term == "think");
  CHECK(r.terms[0].count == 2);
  CHECK(r.terms[1].term == "people");
  CHECK(r.terms[1].stem == "peopl");
  CHECK(r.terms[1].count == 1);
  CHECK(r.terms[0].share == doctest::Approx(2.0 / 3.0));

  cfg.english_only = true;
  CHECK(bow_ranking(one, parse_type("INTP"), cfg, p).terms.empty());
  CHECK_THROWS_AS(bow_ranking(one, parse_type("ESTP"), cfg, p), Error);

  std::vector<corpus::CleanComment> docs = {
      record("1", "a", "INTP", "I think people would know what they make of the thinking"),
      record("2", "a", "INTP", "people would think that they know the things they make"),
      record("3", "a", "INTP", "der Hund und die Katze sind nicht hier Hund Hund"),
      record("4", "a", "ISFJ", "people people people and the cake"),
  };
  cfg.top_k = 3;
  r = bow_ranking(docs, parse_type("INTP"), cfg, p);
  REQUIRE(r.terms.size() == 3);
  CHECK(r.terms[0].stem == "think");
  CHECK(r.terms[0].count == 3);
  CHECK(r.terms[0].term == "think");
  for (const auto& t : r.terms) CHECK(t.stem != "hund");
  double share = 0;
  for (std::size_t i = 0; i < r.terms.size(); ++i) {
    share += r.terms[i].share;
    if (i) CHECK(r.terms[i - 1].count >= r.terms[i].count);
  }
  CHECK(share <= 1.0);

  cfg.top_k = 1000;
  const auto full = bow_ranking(docs, parse_type("INTP"), cfg, p);
  CHECK(full.terms.size() < 1000);
  auto doubled = docs;
  doubled.insert(doubled.end(), docs.begin(), docs.end());
  std::reverse(doubled.begin(), doubled.end());
  const auto d2 = bow_ranking(doubled, parse_type("INTP"), cfg, p);
  REQUIRE(d2.terms.size() == full.terms.size());
  for (std::size_t i = 0; i < full.terms.size(); ++i) {
    CHECK(d2.terms[i].stem == full.terms[i].stem);
    CHECK(d2.terms[i].count == 2 * full.terms[i].count);
  }
  CHECK(ranking_csv(r).rfind("term,stem,count,share\nthink,think,3,", 0) == 0);
}

TEST_CASE("bar chart") {
  const auto svg = bar_chart_svg({{"en", 0.75}, {"und", 0.25}}, "INTP");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find(">en<") != std::string::npos);
  CHECK(svg.find("width=\"300\"") != std::string::npos);
  CHECK(svg.find("width=\"100\"") != std::string::npos);
  CHECK(bar_chart_svg({}, "empty").find("</svg>") != std::string::npos);
}
