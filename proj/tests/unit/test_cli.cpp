#include "doctest.h"

#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mbti/cli.hpp"
#include "mbti/corpus.hpp"
#include "mbti/harvest.hpp"
#include "mbti/io.hpp"
#include "test_util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using mbti::io::read_file;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result mbti_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = mbti::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& path) { return path.string(); }

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = mbti::io::sha256_file(e.path());
  return out;
}

// synth -> clean -> sample -> train (full16, dominant8) -> predict -> evaluate/merge-eval -> report
void pipeline(const fs::path& d) {
  auto ok = [](const Result& r) {
    INFO(r.err);
    REQUIRE(r.code == 0);
  };
  ok(mbti_run({"synth", "--out", p(d / "raw.jsonl"), "--lambda", "0.6", "--docs-per-class", "40", "--seed", "3"}));
  ok(mbti_run({"clean", "--in", p(d / "raw.jsonl"), "--out", p(d / "clean.jsonl"), "--report", p(d / "clean.json")}));
  ok(mbti_run({"sample", "--in", p(d / "clean.jsonl"), "--out-dir", p(d / "sample"), "--total", "480", "--seed", "5"}));
  ok(mbti_run({"train", "--sample-dir", p(d / "sample"), "--out", p(d / "models/full16.json")}));
  ok(mbti_run({"train", "--sample-dir", p(d / "sample"), "--space", "dominant8", "--model", "logreg", "--epochs",
               "3", "--seed", "2", "--out", p(d / "models/dominant8.json")}));
  ok(mbti_run({"predict", "--model", p(d / "models/full16.json"), "--sample-dir", p(d / "sample"), "--out",
               p(d / "preds/full16.csv")}));
  ok(mbti_run({"predict", "--model", p(d / "models/dominant8.json"), "--sample-dir", p(d / "sample"), "--out",
               p(d / "preds/dominant8.csv")}));
  ok(mbti_run({"evaluate", "--pred", p(d / "preds/full16.csv"), "--out", p(d / "eval/full16.json"), "--confusion",
               p(d / "eval/full16_confusion.csv"), "--heatmap", p(d / "eval/full16.svg")}));
  ok(mbti_run({"merge-eval", "--pred", p(d / "preds/full16.csv"), "--space", "dominant8", "--out",
               p(d / "eval/merged_dominant8.json"), "--specialized", p(d / "preds/dominant8.csv")}));
  ok(mbti_run({"report", "--run-dir", p(d)}));
}

}  // namespace

TEST_CASE("usage errors produce JSON on stderr and exit code 2") {
  auto r = mbti_run({"clean", "--bogus"});
  CHECK(r.code == 2);
  const auto j = json::parse(r.err);
  CHECK(j.contains("error"));
  CHECK(j.contains("message"));

  r = mbti_run({"clean", "--in", "/nonexistent/raw.jsonl", "--out", "/tmp/x.jsonl"});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"].is_string());

  r = mbti_run({"frobnicate"});
  CHECK(r.code == 2);

  testutil::TempDir d;
  mbti::io::write_file(d / "bad.csv", "id,gold,predicted,E,I\nx,E,E,0.5,0.6\n");
  r = mbti_run({"evaluate", "--pred", p(d / "bad.csv"), "--out", p(d / "m.json")});
  CHECK(r.code == 1);
  CHECK(json::parse(r.err)["error"] == "SchemaError");

  r = mbti_run({"report", "--run-dir", p(d / "nothing")});
  CHECK(r.code == 1);
  CHECK(json::parse(r.err)["error"] == "IoError");
}

TEST_CASE("labels prints every label space") {
  const auto r = mbti_run({"labels"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["full16"].size() == 16);
  CHECK(j["dominant8"][0] == "Fe");
}

TEST_CASE("clean: report totals balance") {
  testutil::TempDir d;
  std::string raw;
  const std::string long_body = "A body that is long enough to pass the minimum length rule, as an INTP.";
  const char* bodies[] = {"[deleted]", "http://example.com", "short", long_body.c_str(), long_body.c_str()};
  for (int i = 0; i < 5; ++i)
    raw += json{{"id", std::to_string(i)}, {"author", "a"}, {"subreddit", i == 4 ? "intp" : "books"},
                {"created_utc", i}, {"body", bodies[i]}, {"label", "INTP"}}.dump() + "\n";
  raw += "{broken\n";
  mbti::io::write_file(d / "raw.jsonl", raw);
  const auto r = mbti_run({"clean", "--in", p(d / "raw.jsonl"), "--out", p(d / "clean.jsonl"), "--report",
                           p(d / "clean.json")});
  REQUIRE(r.code == 0);
  const auto rep = json::parse(read_file(d / "clean.json"));
  CHECK(rep["input"] == 5);
  CHECK(rep["output"] == 2);
  CHECK(rep["rejected"]["deleted_removed"] == 1);
  CHECK(rep["rejected"]["link_prefix"] == 1);
  CHECK(rep["rejected"]["too_short"] == 1);
  CHECK(rep["masked_tokens"] == 2);
  CHECK(rep["ingest_rejected"] == 1);
  const auto cleaned = mbti::corpus::read_clean_jsonl(d / "clean.jsonl");
  REQUIRE(cleaned.size() == 2);
  CHECK(cleaned[1].origin == mbti::corpus::Origin::MbtiSubreddit);
  CHECK_FALSE(mbti::corpus::contains_type_token(cleaned[0].comment.body));
  const auto manifest = json::parse(read_file(d / "manifest.json"));
  const auto& c = manifest["commands"]["clean"];
  CHECK(c["inputs"][0]["sha256"] == mbti::io::sha256_file(d / "raw.jsonl"));
  CHECK(c["config"]["min-length"] == "50");
  CHECK(c["config_sha256"].get<std::string>().size() == 64);
}

TEST_CASE("config file sections and flag precedence") {
  testutil::TempDir d;
  mbti::io::write_file(d / "run.toml", "[synth]\ndocs-per-class = 3\nseed = 11\n\n[clean]\nmin-length = 10\n");
  auto r = mbti_run({"--config", p(d / "run.toml"), "synth", "--out", p(d / "a.jsonl")});
  REQUIRE(r.code == 0);
  auto docs = mbti::io::read_lines(d / "a.jsonl");
  CHECK(docs.size() == 48);
  r = mbti_run({"--config", p(d / "run.toml"), "synth", "--out", p(d / "b.jsonl"), "--docs-per-class", "2"});
  REQUIRE(r.code == 0);
  CHECK(mbti::io::read_lines(d / "b.jsonl").size() == 32);
  CHECK(json::parse(read_file(d / "manifest.json"))["commands"]["synth"]["seed"] == 11);

  mbti::io::write_file(d / "bad.toml", "[synth]\nno-such-key = 1\n");
  r = mbti_run({"--config", p(d / "bad.toml"), "synth", "--out", p(d / "c.jsonl")});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err).contains("error"));
}

TEST_CASE("merge-eval reports Dominant8 metrics") {
  testutil::TempDir d;
  mbti::io::write_file(d / "labels.txt", "");
  std::string csv = "id,gold,predicted";
  for (const auto& t : mbti::MbtiType::all()) csv += "," + t.str();
  csv += "\n";
  auto row = [&](const char* id, const char* gold, const char* pred) {
    csv += std::string(id) + "," + gold + "," + pred;
    for (const auto& t : mbti::MbtiType::all()) csv += t.str() == pred ? ",1" : ",0";
    csv += "\n";
  };
  row("a", "INTP", "ISTP");
  row("b", "INTP", "ESFJ");
  mbti::io::write_file(d / "full16.csv", csv);
  auto r = mbti_run({"merge-eval", "--pred", p(d / "full16.csv"), "--space", "dominant8", "--out", p(d / "m.json")});
  REQUIRE(r.code == 0);
  auto m = json::parse(read_file(d / "m.json"));
  CHECK(m["space"] == "dominant8");
  CHECK(m["accuracy"] == 0.5);
  CHECK(m["merge_mode"] == "argmax-map");

  r = mbti_run({"evaluate", "--merge-from-16", "--pred", p(d / "full16.csv"), "--space", "axis-ie", "--mode",
                "score-sum", "--out", p(d / "ie.json")});
  REQUIRE(r.code == 0);
  m = json::parse(read_file(d / "ie.json"));
  CHECK(m["space"] == "axis-ie");
  CHECK(m["merge_mode"] == "score-sum");

  r = mbti_run({"merge-eval", "--pred", p(d / "full16.csv"), "--out", p(d / "x.json")});
  CHECK(r.code == 2);
}

TEST_CASE("end-to-end pipeline: outputs, determinism, and a read-only report") {
  testutil::TempDir d;
  pipeline(d.path());
  for (const char* f : {"sample/sample.json", "sample/train.ids", "models/full16.json", "models/full16.vocab.tsv",
                        "preds/full16.csv", "eval/full16.json", "eval/full16_confusion.csv", "eval/full16.svg",
                        "eval/merged_dominant8.json", "eval/comparison.json", "eval/comparison.md", "report.md",
                        "manifest.json", "sample/manifest.json", "eval/manifest.json"})
    CHECK_MESSAGE(fs::exists(d / f), f);

  const auto sample = json::parse(read_file(d / "sample/sample.json"));
  CHECK(sample["class_counts"]["ESTP"] == 30);
  const auto vocab = mbti::io::read_lines(d / "models/full16.vocab.tsv");
  REQUIRE_FALSE(vocab.empty());
  CHECK(std::count(vocab[0].begin(), vocab[0].end(), '\t') == 2);
  const auto merged = json::parse(read_file(d / "eval/merged_dominant8.json"));
  CHECK(merged["space"] == "dominant8");
  const auto cmp = json::parse(read_file(d / "eval/comparison.json"));
  CHECK(cmp["a"] == "merged-full16");
  CHECK(cmp["b"] == "specialized");
  const auto report = read_file(d / "report.md");
  CHECK(report.find("## Samples") != std::string::npos);
  CHECK(report.find("## Metrics") != std::string::npos);
  CHECK(report.find("## Comparisons") != std::string::npos);
  CHECK(report.find("merged-full16") != std::string::npos);

  // Rerunning everything reproduces every file byte for byte.
  const auto first = snapshot(d.path());
  pipeline(d.path());
  CHECK(snapshot(d.path()) == first);

  // report reads artifacts and writes only report.md and its own manifest entry.
  const auto manifest_before = json::parse(read_file(d / "manifest.json"));
  fs::remove(d / "report.md");
  REQUIRE(mbti_run({"report", "--run-dir", p(d.path())}).code == 0);
  auto after = snapshot(d.path());
  auto before = first;
  for (auto* m : {&before, &after}) {
    m->erase("report.md");
    m->erase("manifest.json");
  }
  CHECK(after == before);
  auto manifest_after = json::parse(read_file(d / "manifest.json"));
  manifest_after["commands"].erase("report");
  auto expected = manifest_before;
  expected["commands"].erase("report");
  CHECK(manifest_after == expected);
  CHECK(read_file(d / "report.md") == report);
}

TEST_CASE("analysis subcommands") {
  testutil::TempDir d;
  std::string raw;
  const char* en = "I think that the people would know what they make of it and the rest";
  const char* de = "der Hund und die Katze sind nicht hier, aber sie ist mit dem Hund da";
  for (int i = 0; i < 6; ++i)
    raw += mbti::corpus::to_json(mbti::corpus::CleanComment{
                                     {std::to_string(i), "a", "books", i, i < 4 ? en : de, mbti::parse_type("INTP")},
                                     false, mbti::corpus::Origin::Other})
               .dump() +
           "\n";
  mbti::io::write_file(d / "c.jsonl", raw);
  auto r = mbti_run({"analyze-lang", "--in", p(d / "c.jsonl"), "--out-dir", p(d / "lang")});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto csv = read_file(d / "lang/lang_INTP.csv");
  CHECK(csv.rfind("language,fraction\nen,", 0) == 0);
  CHECK(csv.find("de,") != std::string::npos);
  CHECK(fs::exists(d / "lang/lang_INTP.svg"));
  r = mbti_run({"analyze-bow", "--in", p(d / "c.jsonl"), "--out-dir", p(d / "bow"), "--top-k", "3"});
  REQUIRE(r.code == 0);
  const auto lines = mbti::io::read_lines(d / "bow/bow_INTP.csv");
  CHECK(lines.size() == 4);
  CHECK(read_file(d / "bow/bow_INTP.csv").find("hund") == std::string::npos);
}

TEST_CASE("harvest subcommand against the mock archive") {
  std::vector<json> records = {
      {{"id", "1"}, {"author", "alice"}, {"subreddit", "mbti"}, {"created_utc", 10}, {"body", "hi"}, {"author_flair_text", "INTP"}},
      {{"id", "2"}, {"author", "bob"}, {"subreddit", "mbti"}, {"created_utc", 11}, {"body", "yo"}, {"author_flair_text", "ENFJ"}},
      {{"id", "3"}, {"author", "alice"}, {"subreddit", "books"}, {"created_utc", 12}, {"body", "a book"}},
  };
  mbti::harvest::MockArchive mock(records);
  mock.start();
  testutil::TempDir d;
  const auto r = mbti_run({"harvest", "--url", mock.url(), "--rate", "500", "--out", p(d / "comments.jsonl"),
                           "--report", p(d / "harvest.json")});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto comments = mbti::corpus::ingest(d / "comments.jsonl", {});
  REQUIRE(comments.size() == 3);
  CHECK(comments[0].author == "alice");
  CHECK(comments[0].label->str() == "INTP");
  CHECK(comments[2].label->str() == "ENFJ");
  CHECK(mbti::io::read_lines(d / "users.jsonl").size() == 2);
  CHECK_FALSE(fs::exists(d / "comments.jsonl.partial"));
  CHECK(json::parse(read_file(d / "harvest.json"))["requests"].get<int>() > 0);
}
