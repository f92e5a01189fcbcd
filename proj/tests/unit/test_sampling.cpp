#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mbti/error.hpp"
#include "mbti/io.hpp"
#include "mbti/rng.hpp"
#include "mbti/sampling.hpp"
#include "test_util.hpp"

using namespace mbti;
using namespace mbti::sampling;
using corpus::CleanComment;
using corpus::Origin;

namespace {

// `per_class[c]` records of class c; every third record sits in an MBTI venue.
std::vector<CleanComment> make_corpus(const std::array<std::size_t, 16>& per_class, std::size_t authors = 7) {
  std::vector<CleanComment> out;
  std::size_t n = 0;
  for (std::size_t c = 0; c < 16; ++c)
    for (std::size_t k = 0; k < per_class[c]; ++k, ++n) {
      const auto code = MbtiType::from_index(static_cast<int>(c)).str();
      out.push_back(testutil::record("r" + std::to_string(n), code + "-a" + std::to_string(k % authors),
                                     code.c_str(), "body " + std::to_string(n),
                                     n % 3 == 0 ? Origin::MbtiSubreddit : Origin::Other));
    }
  return out;
}

std::array<std::size_t, 16> filled(std::size_t v) {
  std::array<std::size_t, 16> a{};
  a.fill(v);
  return a;
}

}  // namespace

TEST_CASE("balanced: total 32 gives exactly 2 per class") {
  const auto corpus = make_corpus(filled(5));
  SampleSpec spec;
  spec.total_size = 32;
  spec.seed = 3;
  const auto s = draw_sample(corpus, spec);
  CHECK(s.records.size() == 32);
  for (auto c : s.class_counts) CHECK(c == 2);
  std::set<std::string> ids;
  for (const auto& r : s.records) ids.insert(r.comment.id);
  CHECK(ids.size() == 32);
}

TEST_CASE("balanced: per-class cap and validation") {
  const auto corpus = make_corpus(filled(4));
  SampleSpec spec;
  spec.per_class_cap = 3;
  const auto s = draw_sample(corpus, spec);
  CHECK(s.records.size() == 48);
  CHECK(s.spec.total_size == 48);
  spec.per_class_cap.reset();
  spec.total_size = 30;
  CHECK_THROWS_AS(draw_sample(corpus, spec), Error);
  spec.total_size = 0;
  CHECK_THROWS_AS(draw_sample(corpus, spec), Error);
}

TEST_CASE("balanced: a scarce class raises a capacity error naming it") {
  auto counts = filled(10);
  counts[static_cast<std::size_t>(parse_type("ISTJ").index())] = 3;
  counts[static_cast<std::size_t>(parse_type("ENFJ").index())] = 1;
  const auto corpus = make_corpus(counts);
  SampleSpec spec;
  spec.per_class_cap = 5;
  try {
    draw_sample(corpus, spec);
    FAIL("expected a capacity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Capacity);
    const std::string msg = e.what();
    CHECK(msg.find("ISTJ short by 2") != std::string::npos);
    CHECK(msg.find("ENFJ short by 4") != std::string::npos);
    CHECK(msg.find("INTP") == std::string::npos);
  }
}

TEST_CASE("subsets filter on origin") {
  const auto corpus = make_corpus(filled(30));
  SampleSpec spec;
  spec.per_class_cap = 5;
  spec.subset = Subset::MbtiOnly;
  for (const auto& r : draw_sample(corpus, spec).records) CHECK(r.origin == Origin::MbtiSubreddit);
  spec.subset = Subset::NoMbti;
  for (const auto& r : draw_sample(corpus, spec).records) CHECK(r.origin == Origin::Other);
  spec.per_class_cap = 11;
  spec.subset = Subset::MbtiOnly;
  CHECK_THROWS_AS(draw_sample(corpus, spec), Error);
  CHECK(parse_subset("mbti-only") == Subset::MbtiOnly);
  CHECK(parse_subset("no-mbti") == Subset::NoMbti);
  CHECK_THROWS_AS(parse_subset("some"), Error);
  CHECK(parse_strategy("proportionate") == Strategy::Proportionate);
}

TEST_CASE("largest remainder: exact sums and the earlier class wins ties") {
  std::array<std::size_t, 16> avail{};
  avail[0] = 1;
  avail[1] = 1;
  avail[2] = 1;
  auto t = largest_remainder(avail, 2);
  CHECK(t[0] == 1);
  CHECK(t[1] == 1);
  CHECK(t[2] == 0);
  avail = filled(0);
  avail[3] = 50;
  avail[7] = 30;
  avail[9] = 20;
  t = largest_remainder(avail, 7);
  // 3.5, 2.1, 1.4 -> floors 3, 2, 1 and the largest remainder goes to class 3
  CHECK(t[3] == 4);
  CHECK(t[7] == 2);
  CHECK(t[9] == 1);
  CHECK(largest_remainder(filled(0), 5) == filled(0));
}

TEST_CASE("proportionate: targets within one of the exact share, sum exact") {
  std::array<std::size_t, 16> counts{};
  for (std::size_t c = 0; c < 16; ++c) counts[c] = 3 + c * 7;
  const auto corpus = make_corpus(counts);
  const double n = static_cast<double>(corpus.size());
  for (std::size_t total : {1u, 17u, 100u, 333u}) {
    SampleSpec spec;
    spec.strategy = Strategy::Proportionate;
    spec.total_size = total;
    spec.seed = total;
    const auto s = draw_sample(corpus, spec);
    CHECK(s.records.size() == total);
    CHECK(std::accumulate(s.class_counts.begin(), s.class_counts.end(), std::size_t{0}) == total);
    for (std::size_t c = 0; c < 16; ++c)
      CHECK(std::abs(static_cast<double>(s.class_counts[c]) - static_cast<double>(total) * counts[c] / n) < 1.0);
  }
  SampleSpec spec;
  spec.strategy = Strategy::Proportionate;
  spec.total_size = corpus.size() + 1;
  CHECK_THROWS_AS(draw_sample(corpus, spec), Error);
}

TEST_CASE("determinism and seed sensitivity") {
  const auto corpus = make_corpus(filled(20));
  SampleSpec spec;
  spec.total_size = 64;
  spec.seed = 11;
  const auto a = draw_sample(corpus, spec);
  const auto b = draw_sample(corpus, spec);
  CHECK(corpus::to_jsonl(a.records) == corpus::to_jsonl(b.records));
  spec.seed = 12;
  CHECK(corpus::to_jsonl(draw_sample(corpus, spec).records) != corpus::to_jsonl(a.records));
}

TEST_CASE("sampling without replacement is uniform within a class") {
  std::array<std::size_t, 16> counts = filled(1);
  counts[0] = 4;
  const auto corpus = make_corpus(counts);
  std::map<std::string, int> hits;
  SampleSpec spec;
  spec.per_class_cap = 1;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    spec.seed = seed;
    ++hits[draw_sample(corpus, spec).records.front().comment.id];
  }
  CHECK(hits.size() == 4);
  for (const auto& [id, n] : hits) CHECK(std::abs(n - 1000) < 120);
}

TEST_CASE("author statistics") {
  using testutil::record;
  std::vector<CleanComment> one;
  for (int i = 0; i < 4; ++i) one.push_back(record(std::to_string(i), "solo", "INTP"));
  auto s = author_stats(one);
  CHECK(s.mean == 4.0);
  CHECK(s.median == 4);

  std::vector<CleanComment> mixed;
  const std::pair<const char*, int> per[] = {{"a", 1}, {"b", 2}, {"c", 3}, {"d", 10}};
  int id = 0;
  for (auto [a, n] : per)
    for (int k = 0; k < n; ++k) mixed.push_back(record(std::to_string(id++), a, "ENFP"));
  s = author_stats(mixed);
  CHECK(s.mean == 4.0);
  CHECK(s.median == 2);

  std::vector<CleanComment> singles;
  for (int i = 0; i < 5; ++i) singles.push_back(record(std::to_string(i), "u" + std::to_string(i), "ESTJ"));
  s = author_stats(singles);
  CHECK(s.mean == 1.0);
  CHECK(s.median == 1);

  try {
    author_stats({});
    FAIL("expected EmptySample");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySample);
  }
}

TEST_CASE("split sizes") {
  CHECK(split_sizes(100000, {0.64, 0.16, 0.20}) == std::array<std::size_t, 3>{64000, 16000, 20000});
  CHECK(split_sizes(10, {0.8, 0.1, 0.1}) == std::array<std::size_t, 3>{8, 1, 1});
  CHECK(split_sizes(0, {}) == std::array<std::size_t, 3>{0, 0, 0});
  for (std::size_t n = 0; n < 200; ++n) {
    const auto s = split_sizes(n, {});
    CHECK(s[0] + s[1] + s[2] == n);
  }
  CHECK_THROWS_AS(split_sizes(10, {0.5, 0.5, 0.5}), Error);
  CHECK_THROWS_AS(split_sizes(10, {1.2, -0.1, -0.1}), Error);
}

TEST_CASE("split: disjoint, covering, stratified for balanced samples, deterministic") {
  const auto corpus = make_corpus(filled(40));
  SampleSpec spec;
  spec.per_class_cap = 25;
  const auto s = draw_sample(corpus, spec);
  const Proportions p{0.64, 0.16, 0.20};
  const auto sp = split(s, p, 5);
  CHECK(sp == split(s, p, 5));
  CHECK_FALSE(sp == split(s, p, 6));
  std::set<std::string> all;
  for (const auto* part : {&sp.train, &sp.dev, &sp.test}) all.insert(part->begin(), part->end());
  CHECK(all.size() == 400);
  CHECK(sp.train.size() + sp.dev.size() + sp.test.size() == 400);
  std::map<std::string, int> label_of;
  for (const auto& r : s.records) label_of[r.comment.id] = r.comment.label->index();
  const auto per_class = split_sizes(25, p);
  for (const auto [part, want] : {std::pair{&sp.train, per_class[0]}, std::pair{&sp.dev, per_class[1]},
                                  std::pair{&sp.test, per_class[2]}}) {
    std::array<std::size_t, 16> c{};
    for (const auto& id : *part) ++c[static_cast<std::size_t>(label_of[id])];
    for (auto v : c) CHECK(v == want);
  }

  SampleSpec prop;
  prop.strategy = Strategy::Proportionate;
  prop.total_size = 10;
  const auto ps = draw_sample(corpus, prop);
  const auto psp = split(ps, {0.8, 0.1, 0.1}, 1);
  CHECK(psp.train.size() == 8);
  CHECK(psp.dev.size() == 1);
  CHECK(psp.test.size() == 1);
}

TEST_CASE("written sample files form the exchange contract") {
  const auto corpus = make_corpus(filled(6));
  SampleSpec spec;
  spec.total_size = 64;
  spec.seed = 9;
  const auto s = draw_sample(corpus, spec);
  const auto sp = split(s, {}, 2);
  testutil::TempDir dir;
  write_sample(dir.path(), s, &sp);
  const auto loaded = read_sample(dir.path());
  CHECK(loaded.records == s.records);
  const auto& m = loaded.manifest;
  CHECK(m["format"] == "mbti-sample/1");
  CHECK(m["rng"] == std::string(Rng::kName));
  CHECK(m["seed"] == 9);
  CHECK(m["class_counts"]["INTP"] == 4);
  CHECK(m["record_count"] == 64);
  CHECK(m["records_sha256"] == io::sha256_file(dir / "records.jsonl"));
  CHECK(m["split"]["sizes"][0] == sp.train.size());
  CHECK(m["split"]["stratified"] == true);
  CHECK(read_ids(dir / "train.ids") == sp.train);
  CHECK(read_ids(dir / "test.ids") == sp.test);

  testutil::TempDir again;
  write_sample(again.path(), draw_sample(corpus, spec), &sp);
  for (const char* f : {"records.jsonl", "sample.json", "train.ids", "dev.ids", "test.ids"})
    CHECK(io::read_file(dir / f) == io::read_file(again / f));
}

TEST_CASE("proportionate share converges on a 100k corpus") {
  std::array<std::size_t, 16> counts{};
  for (std::size_t c = 0; c < 16; ++c) counts[c] = 1000 + 700 * c;  // 100k total
  REQUIRE(std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == 100000);
  const auto corpus = make_corpus(counts, 50);
  for (std::size_t total : {1000u, 10000u, 50000u}) {
    SampleSpec spec;
    spec.strategy = Strategy::Proportionate;
    spec.total_size = total;
    const auto s = draw_sample(corpus, spec);
    for (std::size_t c = 0; c < 16; ++c)
      CHECK(std::abs(static_cast<double>(s.class_counts[c]) / total - counts[c] / 100000.0) <= 0.02);
  }
}
