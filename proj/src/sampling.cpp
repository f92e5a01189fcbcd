#include "mbti/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mbti/error.hpp"
#include "mbti/io.hpp"
#include "mbti/rng.hpp"

namespace mbti::sampling {

using nlohmann::json;

std::string_view subset_name(Subset s) {
  switch (s) {
    case Subset::Total: return "total";
    case Subset::MbtiOnly: return "mbti-only";
    case Subset::NoMbti: return "no-mbti";
  }
  return "?";
}

std::string_view strategy_name(Strategy s) {
  return s == Strategy::Balanced ? "balanced" : "proportionate";
}

Subset parse_subset(std::string_view s) {
  if (s == "total") return Subset::Total;
  if (s == "mbti-only" || s == "mbti_only" || s == "mbtionly") return Subset::MbtiOnly;
  if (s == "no-mbti" || s == "no_mbti" || s == "nombti") return Subset::NoMbti;
  throw Error(ErrorCode::InvalidArgument, "unknown subset: " + std::string(s));
}

Strategy parse_strategy(std::string_view s) {
  if (s == "balanced") return Strategy::Balanced;
  if (s == "proportionate") return Strategy::Proportionate;
  throw Error(ErrorCode::InvalidArgument, "unknown strategy: " + std::string(s));
}

void SampleSpec::validate() const {
  if (strategy == Strategy::Balanced) {
    if (per_class_cap) {
      if (*per_class_cap == 0) throw Error(ErrorCode::InvalidArgument, "per_class_cap must be positive");
    } else if (total_size == 0 || total_size % 16 != 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "balanced sample needs total_size divisible by 16 or a per-class cap (total_size=" +
                      std::to_string(total_size) + ")");
    }
  } else if (total_size == 0) {
    throw Error(ErrorCode::InvalidArgument, "proportionate sample needs total_size > 0");
  }
}

json SampleSpec::to_json() const {
  return json{{"subset", subset_name(subset)},
              {"strategy", strategy_name(strategy)},
              {"total_size", total_size},
              {"per_class_cap", per_class_cap ? json(*per_class_cap) : json(nullptr)},
              {"seed", seed}};
}

__extension__ typedef unsigned __int128 u128;

std::array<std::size_t, 16> largest_remainder(const std::array<std::size_t, 16>& available,
                                              std::size_t total) {
  const std::uint64_t n = std::accumulate(available.begin(), available.end(), std::uint64_t{0});
  std::array<std::size_t, 16> out{};
  if (n == 0) return out;
  std::array<std::uint64_t, 16> rem{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 16; ++c) {
    const auto num = static_cast<u128>(total) * available[c];
    out[c] = static_cast<std::size_t>(num / n);
    rem[c] = static_cast<std::uint64_t>(num % n);
    assigned += out[c];
  }
  std::array<std::size_t, 16> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < total && k < 16; ++k, ++assigned) ++out[order[k]];
  return out;
}

namespace {

bool in_subset(const corpus::CleanComment& c, Subset s) {
  switch (s) {
    case Subset::Total: return true;
    case Subset::MbtiOnly: return c.origin == corpus::Origin::MbtiSubreddit;
    case Subset::NoMbti: return c.origin == corpus::Origin::Other;
  }
  return false;
}

}  // namespace

Sample draw_sample(const std::vector<corpus::CleanComment>& corpus, const SampleSpec& spec) {
  spec.validate();
  std::array<std::vector<std::size_t>, 16> pools;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& c = corpus[i];
    if (!in_subset(c, spec.subset)) continue;
    if (!c.comment.label)
      throw Error(ErrorCode::Schema, "record '" + c.comment.id + "' has no label");
    pools[static_cast<std::size_t>(c.comment.label->index())].push_back(i);
  }
  std::array<std::size_t, 16> available{};
  for (std::size_t c = 0; c < 16; ++c) available[c] = pools[c].size();

  Sample out;
  out.spec = spec;
  std::array<std::size_t, 16> targets{};
  if (spec.strategy == Strategy::Balanced) {
    const std::size_t per = spec.per_class_cap ? *spec.per_class_cap : spec.total_size / 16;
    targets.fill(per);
    out.spec.total_size = per * 16;
  } else {
    const std::size_t n = std::accumulate(available.begin(), available.end(), std::size_t{0});
    if (spec.total_size > n)
      throw Error(ErrorCode::Capacity, "subset " + std::string(subset_name(spec.subset)) + " has " +
                                           std::to_string(n) + " records, " +
                                           std::to_string(spec.total_size) + " requested");
    targets = largest_remainder(available, spec.total_size);
  }

  std::string shortfalls;
  for (std::size_t c = 0; c < 16; ++c) {
    if (available[c] >= targets[c]) continue;
    if (!shortfalls.empty()) shortfalls += ", ";
    shortfalls += MbtiType::from_index(static_cast<int>(c)).str() + " short by " +
                  std::to_string(targets[c] - available[c]) + " (has " +
                  std::to_string(available[c]) + ", needs " + std::to_string(targets[c]) + ")";
  }
  if (!shortfalls.empty())
    throw Error(ErrorCode::Capacity, "insufficient records: " + shortfalls);

  Rng rng(spec.seed);
  for (std::size_t c = 0; c < 16; ++c) {
    auto& pool = pools[c];
    // Partial Fisher-Yates: the first targets[c] slots are a uniform draw
    // without replacement.
    for (std::size_t i = 0; i < targets[c]; ++i) {
      std::size_t j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      out.records.push_back(corpus[pool[i]]);
    }
    out.class_counts[c] = targets[c];
  }
  if (!out.records.empty()) out.author_stats = author_stats(out.records);
  return out;
}

AuthorStats author_stats(const std::vector<corpus::CleanComment>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptySample, "author statistics of an empty sample");
  std::map<std::string, std::size_t> per_author;
  for (const auto& r : records) ++per_author[r.comment.author];
  std::vector<std::size_t> counts;
  counts.reserve(per_author.size());
  for (const auto& [a, n] : per_author) counts.push_back(n);
  std::sort(counts.begin(), counts.end());
  AuthorStats s;
  s.mean = static_cast<double>(records.size()) / static_cast<double>(counts.size());
  s.median = counts[(counts.size() - 1) / 2];
  return s;
}

void Proportions::validate() const {
  if (train < 0 || dev < 0 || test < 0 || std::abs(train + dev + test - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "split proportions must be non-negative and sum to 1");
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const Proportions& p) {
  p.validate();
  const std::array<double, 3> share = {p.train, p.dev, p.test};
  std::array<std::size_t, 3> out{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = share[k] * static_cast<double>(n);
    out[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[k] = exact - static_cast<double>(out[k]);
    assigned += out[k];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3, ++assigned) ++out[order[k]];
  return out;
}

Split split(const Sample& s, const Proportions& p, std::uint64_t seed) {
  p.validate();
  Split out;
  out.proportions = p;
  out.seed = seed;
  Rng rng(seed);

  auto deal = [&](std::vector<std::string>& ids) {
    rng.shuffle(std::span(ids));
    const auto sizes = split_sizes(ids.size(), p);
    auto it = ids.begin();
    out.train.insert(out.train.end(), it, it + static_cast<std::ptrdiff_t>(sizes[0]));
    it += static_cast<std::ptrdiff_t>(sizes[0]);
    out.dev.insert(out.dev.end(), it, it + static_cast<std::ptrdiff_t>(sizes[1]));
    it += static_cast<std::ptrdiff_t>(sizes[1]);
    out.test.insert(out.test.end(), it, ids.end());
  };

  if (s.spec.strategy == Strategy::Balanced) {
    std::array<std::vector<std::string>, 16> by_class;
    for (const auto& r : s.records) {
      const int c = r.comment.label ? r.comment.label->index() : 0;
      by_class[static_cast<std::size_t>(c)].push_back(r.comment.id);
    }
    for (auto& ids : by_class) deal(ids);
    rng.shuffle(std::span(out.train));
    rng.shuffle(std::span(out.dev));
    rng.shuffle(std::span(out.test));
  } else {
    std::vector<std::string> ids;
    ids.reserve(s.records.size());
    for (const auto& r : s.records) ids.push_back(r.comment.id);
    deal(ids);
  }
  return out;
}

json sample_manifest(const Sample& s) {
  json counts = json::object();
  for (std::size_t c = 0; c < 16; ++c)
    counts[MbtiType::from_index(static_cast<int>(c)).str()] = s.class_counts[c];
  return json{{"format", "mbti-sample/1"},
              {"rng", Rng::kName},
              {"seed", s.spec.seed},
              {"spec", s.spec.to_json()},
              {"record_count", s.records.size()},
              {"class_counts", counts},
              {"author_stats", {{"mean", s.author_stats.mean}, {"median", s.author_stats.median}}},
              {"records", "records.jsonl"}};
}

namespace {

std::string ids_text(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += id + '\n';
  return out;
}

}  // namespace

void write_sample(const std::filesystem::path& dir, const Sample& s, const Split* sp) {
  std::filesystem::create_directories(dir);
  const std::string records = corpus::to_jsonl(s.records);
  io::write_file(dir / "records.jsonl", records);
  json manifest = sample_manifest(s);
  manifest["records_sha256"] = io::sha256_hex(records);
  if (sp) {
    io::write_file(dir / "train.ids", ids_text(sp->train));
    io::write_file(dir / "dev.ids", ids_text(sp->dev));
    io::write_file(dir / "test.ids", ids_text(sp->test));
    manifest["split"] = json{
        {"seed", sp->seed},
        {"rng", Rng::kName},
        {"stratified", s.spec.strategy == Strategy::Balanced},
        {"proportions", {sp->proportions.train, sp->proportions.dev, sp->proportions.test}},
        {"sizes", {sp->train.size(), sp->dev.size(), sp->test.size()}},
        {"files", {"train.ids", "dev.ids", "test.ids"}}};
  }
  io::write_file(dir / "sample.json", manifest.dump(2) + "\n");
}

LoadedSample read_sample(const std::filesystem::path& dir) {
  LoadedSample out;
  try {
    out.manifest = json::parse(io::read_file(dir / "sample.json"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, "bad sample manifest in " + dir.string() + ": " + e.what());
  }
  const auto records = out.manifest.value("records", std::string("records.jsonl"));
  out.records = corpus::read_clean_jsonl(dir / records);
  return out;
}

std::vector<std::string> read_ids(const std::filesystem::path& path) { return io::read_lines(path); }

}  // namespace mbti::sampling
