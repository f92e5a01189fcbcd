#include "mbti/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mbti/analysis.hpp"
#include "mbti/classify.hpp"
#include "mbti/corpus.hpp"
#include "mbti/error.hpp"
#include "mbti/evaluate.hpp"
#include "mbti/features.hpp"
#include "mbti/harvest.hpp"
#include "mbti/io.hpp"
#include "mbti/manifest.hpp"
#include "mbti/sampling.hpp"
#include "mbti/synth.hpp"

namespace mbti::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDataDirEnv = "MBTI_DATA_DIR";

fs::path parent_dir(const fs::path& file) {
  auto p = file.parent_path();
  return p.empty() ? fs::path(".") : p;
}

// Every option of the subcommand with its resolved value (flag, config file
// or default), keyed by long name.
json effective_config(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* o : sub.get_options()) {
    if (o->get_lnames().empty()) continue;
    const auto& name = o->get_lnames().front();
    if (name == "help") continue;
    if (o->count() > 0) {
      const auto& r = o->results();
      j[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      j[name] = o->get_default_str();
    }
  }
  return j;
}

std::string fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::vector<MbtiType> parse_labels(const std::vector<std::string>& raw) {
  std::vector<MbtiType> out;
  for (const auto& s : raw) out.push_back(parse_type(s));
  return out;
}

std::vector<MbtiType> present_labels(const std::vector<corpus::CleanComment>& records) {
  std::array<bool, 16> seen{};
  for (const auto& r : records)
    if (r.comment.label) seen[static_cast<std::size_t>(r.comment.label->index())] = true;
  std::vector<MbtiType> out;
  for (const auto& t : MbtiType::all())
    if (seen[static_cast<std::size_t>(t.index())]) out.push_back(t);
  return out;
}

std::vector<analysis::LanguageProfile> profiles_from(const std::string& dir) {
  if (!dir.empty()) return analysis::load_profiles(dir);
  if (const char* env = std::getenv(kDataDirEnv); env && *env) {
    const fs::path p = fs::path(env) / "languages";
    if (fs::is_directory(p)) return analysis::load_profiles(p);
  }
  return analysis::default_profiles();
}

std::vector<std::string> ids_for_split(const fs::path& sample_dir, const std::string& split) {
  if (split == "all") return {};
  const auto path = sample_dir / (split + ".ids");
  if (!fs::exists(path))
    throw Error(ErrorCode::Io, "split file not found: " + path.string());
  return sampling::read_ids(path);
}

std::vector<corpus::CleanComment> select(const std::vector<corpus::CleanComment>& records,
                                         const std::vector<std::string>& ids) {
  if (ids.empty()) return records;
  std::map<std::string, const corpus::CleanComment*> by_id;
  for (const auto& r : records) by_id[r.comment.id] = &r;
  std::vector<corpus::CleanComment> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::Schema, "split id not in sample: " + id);
    out.push_back(*it->second);
  }
  return out;
}

// ---------------------------------------------------------------- harvest

struct HarvestOpts {
  std::string url;
  std::string endpoint = "/comments";
  std::vector<std::string> subreddits = {"mbti"};
  std::size_t page_size = 100;
  double rate = 1.0;
  std::int64_t from_utc = 0;
  std::int64_t to_utc = std::numeric_limits<std::int64_t>::max();
  int retries = 3;
  int backoff_ms = 250;
  int timeout_s = 30;
  std::string checkpoint;
  std::size_t enrich_target = 0;
  std::string users_in;
  std::string users_out;
  std::string out;
  std::string report;
};

void cmd_harvest(const HarvestOpts& o, const CLI::App& sub, std::ostream& log) {
  harvest::HarvestConfig cfg;
  cfg.base_url = o.url;
  cfg.endpoint = o.endpoint;
  cfg.subreddits = o.subreddits;
  cfg.page_size = o.page_size;
  cfg.rate_limit = o.rate;
  cfg.from_utc = o.from_utc;
  cfg.to_utc = o.to_utc;
  cfg.max_retries = o.retries;
  cfg.backoff = std::chrono::milliseconds(o.backoff_ms);
  cfg.timeout = std::chrono::seconds(o.timeout_s);
  if (!o.checkpoint.empty()) cfg.checkpoint = o.checkpoint;
  cfg.validate();

  const fs::path out = o.out;
  const fs::path dir = parent_dir(out);
  fs::create_directories(dir);
  harvest::HarvestStats stats;

  std::vector<harvest::UserLabel> users;
  if (!o.users_in.empty()) {
    for (const auto& line : io::read_lines(o.users_in)) users.push_back(harvest::user_from_json(json::parse(line)));
  } else {
    try {
      users = harvest::harvest_users(cfg, &stats);
      if (o.enrich_target > 0) users = harvest::enrich_rare_classes(users, o.enrich_target, cfg, &stats);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Http && cfg.checkpoint)
        throw Error(ErrorCode::Http, std::string(e.what()) + "; rerun with --checkpoint " +
                                         cfg.checkpoint->string() + " to resume");
      throw;
    }
  }
  const fs::path users_out = o.users_out.empty() ? dir / "users.jsonl" : fs::path(o.users_out);
  std::string users_text;
  for (const auto& u : users) users_text += harvest::to_json(u).dump() + "\n";
  io::write_file(users_out, users_text);

  // Comments stream into a partial file that survives interruptions; the
  // final file is its deduplicated, sorted form.
  const fs::path partial = out.string() + ".partial";
  if (!cfg.checkpoint) fs::remove(partial);
  {
    std::ofstream sink(partial, std::ios::app | std::ios::binary);
    if (!sink) throw Error(ErrorCode::Io, "cannot write " + partial.string());
    harvest::harvest_comments(users, cfg, [&](const corpus::Comment& c) {
      sink << corpus::to_json(c).dump() << "\n";
      sink.flush();
    }, &stats);
  }
  std::map<std::string, corpus::Comment> by_id;
  for (const auto& line : io::read_lines(partial)) {
    auto c = corpus::comment_from_json(json::parse(line));
    by_id.emplace(c.id, std::move(c));
  }
  std::vector<corpus::Comment> comments;
  comments.reserve(by_id.size());
  for (auto& [id, c] : by_id) comments.push_back(std::move(c));
  std::sort(comments.begin(), comments.end(), [](const auto& a, const auto& b) {
    return std::tie(a.author, a.created_utc, a.id) < std::tie(b.author, b.created_utc, b.id);
  });
  io::write_file(out, corpus::to_jsonl(comments));

  if (stats.failed_users.empty()) {
    fs::remove(partial);
    if (cfg.checkpoint) fs::remove(*cfg.checkpoint);
  } else {
    log << "harvest: " << stats.failed_users.size()
        << " user(s) failed; rerun with the same checkpoint to resume\n";
  }

  RunManifest m{"harvest", effective_config(sub), {}, std::nullopt, {users_out, out}};
  if (!o.users_in.empty()) m.inputs.push_back(o.users_in);
  if (!o.report.empty()) {
    json rep = stats.to_json();
    rep["users"] = users.size();
    rep["records"] = comments.size();
    io::write_file(o.report, rep.dump(2) + "\n");
    m.outputs.push_back(o.report);
  }
  m.write(dir);
}

// ------------------------------------------------------------------ clean

struct CleanOpts {
  std::string in;
  std::string out;
  std::string report;
  std::size_t min_length = 50;
  std::string mask_token = "[TYPE]";
  std::string subreddits;
  corpus::FieldMap fields;
};

void cmd_clean(const CleanOpts& o, const CLI::App& sub) {
  corpus::CleanConfig cfg;
  cfg.min_length = o.min_length;
  cfg.mask_token = o.mask_token;
  if (!o.subreddits.empty()) cfg.mbti_subreddits = corpus::CleanConfig::load_subreddits(o.subreddits);

  corpus::CommentReader reader(o.in, o.fields);
  corpus::CleanReport report;
  std::string out_text;
  std::vector<corpus::Comment> batch;
  auto flush = [&] {
    for (const auto& c : corpus::clean_all(batch, cfg, report)) out_text += corpus::to_json(c).dump() + "\n";
    batch.clear();
  };
  while (auto c = reader.next()) {
    batch.push_back(std::move(*c));
    if (batch.size() >= 4096) flush();
  }
  flush();
  io::write_file(o.out, out_text);

  RunManifest m{"clean", effective_config(sub), {o.in}, std::nullopt, {o.out}};
  if (!o.report.empty()) {
    json rep = report.to_json();
    rep["ingest_rejected"] = reader.rejects().size();
    json rej = json::array();
    for (const auto& r : reader.rejects()) rej.push_back({{"line", r.line}, {"reason", r.reason}});
    rep["ingest_rejects"] = rej;
    io::write_file(o.report, rep.dump(2) + "\n");
    m.outputs.push_back(o.report);
  }
  m.write(parent_dir(o.out));
}

// ----------------------------------------------------------------- sample

struct SampleOpts {
  std::string in;
  std::string out_dir;
  std::string subset = "total";
  std::string strategy = "balanced";
  std::size_t total = 0;
  std::size_t cap = 0;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  bool has_split_seed = false;
  double train = 0.64, dev = 0.16, test = 0.20;
  bool no_split = false;
};

void cmd_sample(const SampleOpts& o, const CLI::App& sub) {
  sampling::SampleSpec spec;
  spec.subset = sampling::parse_subset(o.subset);
  spec.strategy = sampling::parse_strategy(o.strategy);
  spec.total_size = o.total;
  if (o.cap > 0) spec.per_class_cap = o.cap;
  spec.seed = o.seed;
  const auto records = corpus::read_clean_jsonl(o.in);
  const auto sample = sampling::draw_sample(records, spec);
  const fs::path dir = o.out_dir;
  std::vector<fs::path> outputs = {dir / "records.jsonl", dir / "sample.json"};
  if (o.no_split) {
    sampling::write_sample(dir, sample);
  } else {
    const auto sp = sampling::split(sample, {o.train, o.dev, o.test}, o.has_split_seed ? o.split_seed : o.seed);
    sampling::write_sample(dir, sample, &sp);
    for (const char* f : {"train.ids", "dev.ids", "test.ids"}) outputs.push_back(dir / f);
  }
  RunManifest{"sample", effective_config(sub), {o.in}, o.seed, outputs}.write(dir);
}

// ------------------------------------------------------------------ train

struct TrainOpts {
  std::string sample_dir;
  std::string space = "full16";
  std::string model = "nb";
  double alpha = 1.0;
  double lr = 0.1;
  int epochs = 20;
  std::size_t batch = 32;
  std::size_t min_df = 2;
  double max_df = 1.0;
  int ngram_lo = 1, ngram_hi = 1;
  bool keep_stopwords = false;
  bool no_stem = false;
  bool strip_emoji = false;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_train(const TrainOpts& o, const CLI::App& sub, std::ostream& log) {
  const fs::path dir = o.sample_dir;
  const auto loaded = sampling::read_sample(dir);
  const Granularity g = parse_granularity(o.space);
  const LabelSpace space(g);

  features::TextPipeline pipe;
  pipe.tokenizer.ngram_lo = o.ngram_lo;
  pipe.tokenizer.ngram_hi = o.ngram_hi;
  pipe.tokenizer.strip_emoji = o.strip_emoji;
  pipe.tokenizer.validate();
  pipe.remove_stopwords = !o.keep_stopwords;
  pipe.stem = !o.no_stem;

  const bool has_split = fs::exists(dir / "train.ids");
  const auto train = select(loaded.records, has_split ? sampling::read_ids(dir / "train.ids")
                                                       : std::vector<std::string>{});
  if (train.empty()) throw Error(ErrorCode::EmptySample, "training split is empty");
  std::vector<corpus::CleanComment> dev;
  if (has_split && fs::exists(dir / "dev.ids")) dev = select(loaded.records, sampling::read_ids(dir / "dev.ids"));

  auto label_of = [&](const corpus::CleanComment& r) {
    if (!r.comment.label) throw Error(ErrorCode::Schema, "record '" + r.comment.id + "' has no label");
    return space.index_of(*r.comment.label);
  };

  features::DfCounter df;
  std::vector<std::vector<std::string>> docs;
  docs.reserve(train.size());
  for (const auto& r : train) {
    docs.push_back(pipe.terms(r.comment.body));
    df.add(docs.back());
  }
  auto vocab = features::Vocabulary::fit(df, o.min_df, o.max_df);
  std::vector<features::SparseVector> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < train.size(); ++i) {
    x.push_back(features::vectorize(docs[i], vocab));
    y.push_back(label_of(train[i]));
  }

  json manifest = {{"sample_records_sha256", loaded.manifest.value("records_sha256", "")},
                   {"space", space.name()},
                   {"train_size", train.size()},
                   {"vocabulary_size", vocab.size()},
                   {"min_df", o.min_df},
                   {"max_df", o.max_df},
                   {"seed", o.seed}};
  classify::Model::Impl impl;
  if (o.model == "nb") {
    impl = classify::train_nb(x, y, g, o.alpha);
  } else if (o.model == "logreg") {
    classify::LogRegConfig lc{o.lr, o.epochs, o.batch, o.seed};
    std::vector<features::SparseVector> dx;
    std::vector<int> dy;
    for (const auto& r : dev) {
      dx.push_back(features::vectorize(pipe.terms(r.comment.body), vocab));
      dy.push_back(label_of(r));
    }
    std::optional<classify::DevSet> dset;
    if (!dx.empty()) dset = classify::DevSet{dx, dy};
    auto m = classify::train_logreg(x, y, g, lc, dset);
    for (std::size_t e = 0; e < m.train_loss.size(); ++e) {
      log << "epoch " << (e + 1) << " train_loss " << io::format_double(m.train_loss[e]);
      if (e < m.dev_loss.size()) log << " dev_loss " << io::format_double(m.dev_loss[e]);
      log << "\n";
    }
    impl = std::move(m);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown model kind: " + o.model + " (nb, logreg)");
  }
  const auto vocab_path = fs::path(o.out).replace_extension(".vocab.tsv");
  io::write_file(vocab_path, vocab.to_text());
  classify::Model model(std::move(impl), pipe, std::move(vocab), manifest);
  model.save(o.out);
  RunManifest{"train", effective_config(sub), {dir / "records.jsonl", dir / "sample.json"}, o.seed,
              {o.out, vocab_path}}
      .write(parent_dir(o.out));
}

// ---------------------------------------------------------------- predict

struct PredictOpts {
  std::vector<std::string> models;
  std::string sample_dir;
  std::string in;
  std::string split = "test";
  std::string out;
};

void cmd_predict(const PredictOpts& o, const CLI::App& sub) {
  std::vector<corpus::CleanComment> records;
  std::vector<fs::path> inputs(o.models.begin(), o.models.end());
  if (!o.sample_dir.empty()) {
    const auto loaded = sampling::read_sample(o.sample_dir);
    records = select(loaded.records, ids_for_split(o.sample_dir, o.split));
    inputs.push_back(fs::path(o.sample_dir) / "records.jsonl");
  } else if (!o.in.empty()) {
    records = corpus::read_clean_jsonl(o.in);
    inputs.push_back(o.in);
  } else {
    throw Error(ErrorCode::Config, "predict needs --sample-dir or --in");
  }
  std::vector<classify::Model> models;
  for (const auto& p : o.models) models.push_back(classify::Model::load(p));
  classify::PredictionSet preds;
  if (models.size() == 1) {
    preds = classify::predict_batch(models.front(), records);
  } else if (models.size() == 4) {
    std::vector<const classify::Model*> ptrs;
    for (const auto& m : models) ptrs.push_back(&m);
    preds = classify::predict_ensemble(ptrs, records);
  } else {
    throw Error(ErrorCode::Config, "predict takes one model or four axis models, got " +
                                       std::to_string(models.size()));
  }
  io::write_file(o.out, preds.to_csv());
  RunManifest{"predict", effective_config(sub), inputs, std::nullopt, {o.out}}.write(parent_dir(o.out));
}

// --------------------------------------------------------------- evaluate

struct EvalOpts {
  std::string pred;
  std::string space;
  std::string mode = "argmax-map";
  std::string out;
  std::string confusion;
  std::string heatmap;
  std::string normalize = "row";
  std::string specialized;
  std::string compare_out;
  bool merge_from_16 = false;
};

evaluate::Normalize parse_normalize(const std::string& s) {
  if (s == "none") return evaluate::Normalize::None;
  if (s == "row") return evaluate::Normalize::Row;
  throw Error(ErrorCode::InvalidArgument, "unknown normalization: " + s + " (none, row)");
}

void write_scored(const evaluate::Scored& sc, const EvalOpts& o, std::vector<fs::path>& outputs) {
  io::write_file(o.out, sc.report.to_json().dump(2) + "\n");
  outputs.push_back(o.out);
  if (!o.confusion.empty()) {
    io::write_file(o.confusion, sc.confusion.to_csv());
    outputs.push_back(o.confusion);
  }
  if (!o.heatmap.empty()) {
    io::write_file(o.heatmap, evaluate::heatmap_svg(sc.confusion, parse_normalize(o.normalize),
                                                    std::string(granularity_name(sc.report.space))));
    outputs.push_back(o.heatmap);
  }
}

void cmd_evaluate(const EvalOpts& o, const CLI::App& sub, bool merge_only) {
  merge_only = merge_only || o.merge_from_16;
  auto preds = classify::PredictionSet::read(o.pred, merge_only ? std::optional(Granularity::Full16) : std::nullopt);
  std::string mode_name;
  if (!o.space.empty()) {
    const auto target = parse_granularity(o.space);
    if (target != preds.space) {
      if (preds.space != Granularity::Full16)
        throw Error(ErrorCode::SpaceMismatch, "predictions are " + std::string(granularity_name(preds.space)) +
                                                  "; only full16 predictions can be merged into " + o.space);
      const auto mode = evaluate::parse_merge_mode(o.mode);
      preds = evaluate::merge_predictions(preds, target, mode);
      mode_name = evaluate::merge_mode_name(mode);
    }
  } else if (merge_only) {
    throw Error(ErrorCode::Config, "merging full16 predictions needs --space");
  }
  auto sc = evaluate::score(preds);
  sc.report.merge_mode = mode_name;
  std::vector<fs::path> outputs;
  write_scored(sc, o, outputs);

  std::vector<fs::path> inputs = {o.pred};
  if (!o.specialized.empty()) {
    const auto spec_preds = classify::PredictionSet::read(o.specialized, preds.space);
    const auto spec_sc = evaluate::score(spec_preds);
    const auto cmp = evaluate::compare(sc.report, spec_sc.report,
                                       mode_name.empty() ? "model" : "merged-full16", "specialized");
    const fs::path base = o.compare_out.empty() ? parent_dir(o.out) / "comparison" : fs::path(o.compare_out);
    io::write_file(base.string() + ".json", cmp.to_json().dump(2) + "\n");
    io::write_file(base.string() + ".md", cmp.to_markdown());
    outputs.push_back(base.string() + ".json");
    outputs.push_back(base.string() + ".md");
    inputs.push_back(o.specialized);
  }
  RunManifest{merge_only ? "merge-eval" : "evaluate", effective_config(sub), inputs, std::nullopt, outputs}
      .write(parent_dir(o.out));
}

// --------------------------------------------------------------- analysis

struct AnalyzeOpts {
  std::string in;
  std::vector<std::string> labels;
  std::string profiles;
  std::size_t min_hits = 2;
  double min_rate = 0.1;
  std::size_t top_k = 20;
  bool all_languages = false;
  std::string out_dir;
};

void cmd_analyze_lang(const AnalyzeOpts& o, const CLI::App& sub) {
  const auto records = corpus::read_clean_jsonl(o.in);
  const auto profiles = profiles_from(o.profiles);
  const auto labels = o.labels.empty() ? present_labels(records) : parse_labels(o.labels);
  analysis::DetectConfig dc{o.min_hits, o.min_rate};
  const fs::path dir = o.out_dir;
  json summary = json::object();
  std::vector<fs::path> outputs;
  for (const auto& t : labels) {
    const auto dist = analysis::language_distribution(records, t, profiles, dc);
    json d = json::array();
    for (const auto& [code, f] : dist) d.push_back({{"language", code}, {"fraction", f}});
    summary[t.str()] = d;
    const auto csv = dir / ("lang_" + t.str() + ".csv");
    const auto svg = dir / ("lang_" + t.str() + ".svg");
    io::write_file(csv, analysis::distribution_csv(dist));
    io::write_file(svg, analysis::bar_chart_svg(dist, "Languages: " + t.str()));
    outputs.push_back(csv);
    outputs.push_back(svg);
  }
  io::write_file(dir / "languages.json", json{{"format", "mbti-languages/1"}, {"classes", summary}}.dump(2) + "\n");
  outputs.push_back(dir / "languages.json");
  RunManifest{"analyze-lang", effective_config(sub), {o.in}, std::nullopt, outputs}.write(dir);
}

void cmd_analyze_bow(const AnalyzeOpts& o, const CLI::App& sub) {
  const auto records = corpus::read_clean_jsonl(o.in);
  const auto profiles = profiles_from(o.profiles);
  const auto labels = o.labels.empty() ? present_labels(records) : parse_labels(o.labels);
  analysis::BowConfig bc;
  bc.top_k = o.top_k;
  bc.english_only = !o.all_languages;
  const fs::path dir = o.out_dir;
  json summary = json::object();
  std::vector<fs::path> outputs;
  for (const auto& t : labels) {
    const auto ranking = analysis::bow_ranking(records, t, bc, profiles);
    json terms = json::array();
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& tc : ranking.terms) {
      terms.push_back({{"term", tc.term}, {"stem", tc.stem}, {"count", tc.count}, {"share", tc.share}});
      bars.emplace_back(tc.term, tc.share);
    }
    summary[t.str()] = terms;
    const auto csv = dir / ("bow_" + t.str() + ".csv");
    const auto svg = dir / ("bow_" + t.str() + ".svg");
    io::write_file(csv, analysis::ranking_csv(ranking));
    io::write_file(svg, analysis::bar_chart_svg(bars, "Top terms: " + t.str()));
    outputs.push_back(csv);
    outputs.push_back(svg);
  }
  io::write_file(dir / "bow.json", json{{"format", "mbti-bow/1"}, {"classes", summary}}.dump(2) + "\n");
  outputs.push_back(dir / "bow.json");
  RunManifest{"analyze-bow", effective_config(sub), {o.in}, std::nullopt, outputs}.write(dir);
}

// ----------------------------------------------------------------- report

std::string render_sample(const fs::path& rel, const json& s) {
  const auto& spec = s.at("spec");
  std::string out = "### Sample `" + rel.generic_string() + "`\n\n";
  out += "| subset | strategy | records | seed | comments per author (mean) | comments per author (median) |\n";
  out += "|---|---|---:|---:|---:|---:|\n";
  out += "| " + spec.at("subset").get<std::string>() + " | " + spec.at("strategy").get<std::string>() + " | " +
         std::to_string(s.at("record_count").get<std::size_t>()) + " | " + s.at("seed").dump() + " | " +
         fixed(s.at("author_stats").at("mean").get<double>(), 2) + " | " +
         std::to_string(s.at("author_stats").at("median").get<std::size_t>()) + " |\n\n";
  std::string head = "|", rule = "|", row = "|";
  for (const auto& [label, n] : s.at("class_counts").items()) {
    head += " " + label + " |";
    rule += "---:|";
    row += " " + n.dump() + " |";
  }
  out += head + "\n" + rule + "\n" + row + "\n";
  if (s.contains("split")) {
    const auto& sz = s["split"].at("sizes");
    out += "\nSplit (train/dev/test): " + sz[0].dump() + " / " + sz[1].dump() + " / " + sz[2].dump() + "\n";
  }
  return out + "\n";
}

std::string render_comparison(const fs::path& rel, const json& c) {
  std::string out = "### Comparison `" + rel.generic_string() + "`\n\n";
  out += "| " + c.at("space").get<std::string>() + " | " + c.at("a").get<std::string>() + " | " +
         c.at("b").get<std::string>() + " | delta |\n|---|---:|---:|---:|\n";
  for (const auto& r : c.at("rows")) {
    const double d = r.at("delta").get<double>();
    out += "| " + r.at("row").get<std::string>() + " | " + fixed(r.at("a").get<double>()) + " | " +
           fixed(r.at("b").get<double>()) + " | " + (d >= 0 ? "+" : "") + fixed(d) + " |\n";
  }
  return out + "\n";
}

void cmd_report(const std::string& run_dir, const std::string& out_arg, const CLI::App& sub) {
  const fs::path root = run_dir;
  if (!fs::is_directory(root)) throw Error(ErrorCode::Io, "run directory not found: " + run_dir);
  const fs::path out = out_arg.empty() ? root / "report.md" : fs::path(out_arg);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::string samples, metrics_rows, comparisons;
  std::vector<fs::path> inputs;
  for (const auto& f : files) {
    auto j = json::parse(io::read_file(f), nullptr, false);
    if (!j.is_object()) continue;
    const auto format = j.value("format", "");
    const auto rel = fs::relative(f, root);
    if (format == "mbti-sample/1") {
      samples += render_sample(rel, j);
    } else if (format == "mbti-metrics/1") {
      metrics_rows += "| `" + rel.generic_string() + "` | " + j.at("space").get<std::string>() + " | " +
                      j.value("merge_mode", "-") + " | " + fixed(j.at("macro_f1").get<double>()) + " | " +
                      fixed(j.at("accuracy").get<double>()) + " | " + fixed(j.at("chance").get<double>()) +
                      " | " + j.at("total").dump() + " |\n";
    } else if (format == "mbti-comparison/1") {
      comparisons += render_comparison(rel, j);
    } else {
      continue;
    }
    inputs.push_back(f);
  }
  if (inputs.empty()) throw Error(ErrorCode::Io, "no sample, metrics or comparison artifacts under " + run_dir);

  std::string md = "# Run report\n\n";
  if (!samples.empty()) md += "## Samples\n\n" + samples;
  if (!metrics_rows.empty())
    md += "## Metrics\n\n| file | space | merge | macro-F1 | accuracy | chance | n |\n"
          "|---|---|---|---:|---:|---:|---:|\n" + metrics_rows + "\n";
  if (!comparisons.empty()) md += "## Comparisons\n\n" + comparisons;
  io::write_file(out, md);
  RunManifest{"report", effective_config(sub), inputs, std::nullopt, {out}}.write(parent_dir(out));
}

// ------------------------------------------------------------------ synth

struct SynthOpts {
  synth::SynthSpec spec;
  std::string out;
};

void cmd_synth(const SynthOpts& o, const CLI::App& sub) {
  io::write_file(o.out, corpus::to_jsonl(synth::generate(o.spec)));
  RunManifest{"synth", effective_config(sub), {}, o.spec.seed, {o.out}}.write(parent_dir(o.out));
}

// ---------------------------------------------------------------------------

void write_error(std::ostream& err, std::string_view code, std::string_view message) {
  err << json{{"error", code}, {"message", message}}.dump() << "\n";
}

int run_app(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MBTI corpus-to-classifier toolkit", "mbti"};
  app.set_version_flag("--version", tool_version());
  app.set_config("--config", "", "TOML config file; [section] per subcommand; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  HarvestOpts ho;
  auto* harvest = app.add_subcommand("harvest", "Collect flair-labeled users and their comments");
  harvest->add_option("--url", ho.url, "Archive base URL")->envname(harvest::kBaseUrlEnv);
  harvest->add_option("--endpoint", ho.endpoint, "Comment search path under the base URL");
  harvest->add_option("--subreddit", ho.subreddits, "Subreddits scanned for flairs");
  harvest->add_option("--page-size", ho.page_size, "Records per request")->check(CLI::Range(1, 1000));
  harvest->add_option("--rate", ho.rate, "Requests per second");
  harvest->add_option("--from", ho.from_utc, "Window start (unix seconds)");
  harvest->add_option("--to", ho.to_utc, "Window end (unix seconds)");
  harvest->add_option("--retries", ho.retries, "Retries per request");
  harvest->add_option("--backoff-ms", ho.backoff_ms, "Initial retry backoff");
  harvest->add_option("--timeout", ho.timeout_s, "Request timeout in seconds");
  harvest->add_option("--checkpoint", ho.checkpoint, "Checkpoint file for resumable runs");
  harvest->add_option("--enrich-target", ho.enrich_target, "Scan type subreddits for classes below this user count");
  harvest->add_option("--users-in", ho.users_in, "Skip user discovery and read users JSONL")->check(CLI::ExistingFile);
  harvest->add_option("--users-out", ho.users_out, "Users JSONL (default: users.jsonl next to --out)");
  harvest->add_option("--out", ho.out, "Comments JSONL")->required();
  harvest->add_option("--report", ho.report, "Harvest statistics JSON");

  CleanOpts co;
  auto* clean = app.add_subcommand("clean", "Filter and mask raw comments");
  clean->add_option("--in", co.in, "Raw comments JSONL")->required()->check(CLI::ExistingFile);
  clean->add_option("--out", co.out, "Cleaned JSONL")->required();
  clean->add_option("--report", co.report, "Cleaning report JSON");
  clean->add_option("--min-length", co.min_length, "Minimum body length in characters");
  clean->add_option("--mask-token", co.mask_token, "Replacement for type mentions");
  clean->add_option("--mbti-subreddits", co.subreddits, "File of MBTI venue subreddits")->check(CLI::ExistingFile);
  clean->add_option("--id-field", co.fields.id);
  clean->add_option("--author-field", co.fields.author);
  clean->add_option("--subreddit-field", co.fields.subreddit);
  clean->add_option("--time-field", co.fields.created_utc);
  clean->add_option("--body-field", co.fields.body);
  clean->add_option("--label-field", co.fields.label);

  SampleOpts so;
  auto* sample = app.add_subcommand("sample", "Draw a balanced or proportionate sample and split it");
  sample->add_option("--in", so.in, "Cleaned JSONL")->required()->check(CLI::ExistingFile);
  sample->add_option("--out-dir", so.out_dir, "Sample directory")->required();
  sample->add_option("--subset", so.subset, "total | mbti-only | no-mbti");
  sample->add_option("--strategy", so.strategy, "balanced | proportionate");
  sample->add_option("--total", so.total, "Sample size");
  sample->add_option("--cap", so.cap, "Per-class count for balanced samples");
  sample->add_option("--seed", so.seed);
  auto* split_seed = sample->add_option("--split-seed", so.split_seed, "Defaults to --seed");
  sample->add_option("--train", so.train);
  sample->add_option("--dev", so.dev);
  sample->add_option("--test", so.test);
  sample->add_flag("--no-split", so.no_split, "Write the sample without split files");

  TrainOpts to;
  auto* train = app.add_subcommand("train", "Train a bag-of-words classifier on a sample");
  train->add_option("--sample-dir", to.sample_dir)->required()->check(CLI::ExistingDirectory);
  train->add_option("--space", to.space, "full16 | dominant8 | firsttwo8 | axis-ie | axis-ns | axis-tf | axis-pj");
  train->add_option("--model", to.model, "nb | logreg");
  train->add_option("--alpha", to.alpha, "Naive Bayes smoothing");
  train->add_option("--lr", to.lr, "Logistic regression learning rate");
  train->add_option("--epochs", to.epochs);
  train->add_option("--batch", to.batch);
  train->add_option("--min-df", to.min_df);
  train->add_option("--max-df", to.max_df);
  train->add_option("--ngram-lo", to.ngram_lo);
  train->add_option("--ngram-hi", to.ngram_hi);
  train->add_flag("--keep-stopwords", to.keep_stopwords);
  train->add_flag("--no-stem", to.no_stem);
  train->add_flag("--strip-emoji", to.strip_emoji);
  train->add_option("--seed", to.seed);
  train->add_option("--out", to.out, "Model JSON")->required();

  PredictOpts po;
  auto* predict = app.add_subcommand("predict", "Score records with one model or a four-axis ensemble");
  predict->add_option("--model", po.models, "Model JSON; give four axis models for an ensemble")
      ->required()->check(CLI::ExistingFile);
  predict->add_option("--sample-dir", po.sample_dir)->check(CLI::ExistingDirectory);
  predict->add_option("--in", po.in, "Cleaned JSONL instead of a sample")->check(CLI::ExistingFile);
  predict->add_option("--split", po.split, "train | dev | test | all");
  predict->add_option("--out", po.out, "Prediction CSV")->required();

  EvalOpts eval_o, merge_o;
  auto* evaluate = app.add_subcommand("evaluate", "Metrics and confusion matrix for a prediction CSV");
  auto* merge_eval = app.add_subcommand("merge-eval", "Evaluate full16 predictions merged into a coarser space");
  for (auto [s, eo] : {std::pair{evaluate, &eval_o}, std::pair{merge_eval, &merge_o}}) {
    s->add_option("--pred", eo->pred, "Prediction CSV")->required()->check(CLI::ExistingFile);
    s->add_option("--space", eo->space, "Target space; full16 predictions are merged into it");
    s->add_option("--mode", eo->mode, "argmax-map | score-sum");
    s->add_option("--out", eo->out, "Metrics JSON")->required();
    s->add_option("--confusion", eo->confusion, "Confusion matrix CSV");
    s->add_option("--heatmap", eo->heatmap, "Confusion heatmap SVG");
    s->add_option("--normalize", eo->normalize, "none | row");
    s->add_option("--specialized", eo->specialized, "Predictions of a model trained on the target space")
        ->check(CLI::ExistingFile);
    s->add_option("--compare-out", eo->compare_out, "Comparison path prefix (.json and .md)");
  }
  evaluate->add_flag("--merge-from-16", eval_o.merge_from_16, "Require full16 predictions and merge them into --space");

  AnalyzeOpts lang_o, bow_o;
  auto* analyze_lang = app.add_subcommand("analyze-lang", "Per-class language distribution");
  auto* analyze_bow = app.add_subcommand("analyze-bow", "Per-class top terms");
  for (auto [s, ao] : {std::pair{analyze_lang, &lang_o}, std::pair{analyze_bow, &bow_o}}) {
    s->add_option("--in", ao->in, "Cleaned JSONL")->required()->check(CLI::ExistingFile);
    s->add_option("--label", ao->labels, "Classes to analyze (default: all present)");
    s->add_option("--profiles", ao->profiles, "Directory of <code>.txt stop-word profiles")
        ->check(CLI::ExistingDirectory);
    s->add_option("--out-dir", ao->out_dir)->required();
  }
  analyze_lang->add_option("--min-hits", lang_o.min_hits);
  analyze_lang->add_option("--min-rate", lang_o.min_rate);
  analyze_bow->add_option("--top-k", bow_o.top_k);
  analyze_bow->add_flag("--all-languages", bow_o.all_languages, "Count non-English documents too");

  std::string run_dir, report_out;
  auto* report = app.add_subcommand("report", "Render a markdown summary of existing artifacts");
  report->add_option("--run-dir", run_dir)->required();
  report->add_option("--out", report_out, "Markdown path (default: <run-dir>/report.md)");

  SynthOpts sy;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth_cmd->add_option("--out", sy.out, "Comments JSONL")->required();
  synth_cmd->add_option("--lambda", sy.spec.distinctiveness, "Class-vocabulary share in [0, 1]");
  synth_cmd->add_option("--docs-per-class", sy.spec.docs_per_class);
  synth_cmd->add_option("--shared-vocab", sy.spec.shared_vocab);
  synth_cmd->add_option("--class-vocab", sy.spec.class_vocab);
  synth_cmd->add_option("--min-length", sy.spec.min_doc_length);
  synth_cmd->add_option("--max-length", sy.spec.max_doc_length);
  synth_cmd->add_option("--authors-per-class", sy.spec.authors_per_class);
  synth_cmd->add_option("--venue-share", sy.spec.mbti_venue_share);
  synth_cmd->add_option("--seed", sy.spec.seed);

  std::string labels_out;
  auto* labels = app.add_subcommand("labels", "Print the label spaces as JSON");
  labels->add_option("--out", labels_out);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << "\n";
    return 0;
  } catch (const CLI::ConfigError& e) {
    write_error(err, "ConfigError", e.what());
    return 2;
  } catch (const CLI::FileError& e) {
    write_error(err, "ConfigError", e.what());
    return 2;
  } catch (const CLI::ParseError& e) {
    write_error(err, "UsageError", e.what());
    return 2;
  }

  try {
    if (*harvest) cmd_harvest(ho, *harvest, err);
    else if (*clean) cmd_clean(co, *clean);
    else if (*sample) {
      so.has_split_seed = split_seed->count() > 0;
      cmd_sample(so, *sample);
    }
    else if (*train) cmd_train(to, *train, err);
    else if (*predict) cmd_predict(po, *predict);
    else if (*evaluate) cmd_evaluate(eval_o, *evaluate, false);
    else if (*merge_eval) cmd_evaluate(merge_o, *merge_eval, true);
    else if (*analyze_lang) cmd_analyze_lang(lang_o, *analyze_lang);
    else if (*analyze_bow) cmd_analyze_bow(bow_o, *analyze_bow);
    else if (*report) cmd_report(run_dir, report_out, *report);
    else if (*synth_cmd) cmd_synth(sy, *synth_cmd);
    else if (*labels) {
      if (labels_out.empty()) out << label_spaces_json() << "\n";
      else io::write_file(labels_out, label_spaces_json() + "\n");
    }
  } catch (const Error& e) {
    write_error(err, to_string(e.code()), e.what());
    return e.code() == ErrorCode::Config ? 2 : 1;
  } catch (const json::exception& e) {
    write_error(err, "SchemaError", e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    write_error(err, "IoError", e.what());
    return 1;
  } catch (const std::exception& e) {
    write_error(err, "InternalError", e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_app(args, out, err);
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_app(std::move(args), std::cout, std::cerr);
}

}  // namespace mbti::cli
