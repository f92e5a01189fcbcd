#include "mbti/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mbti/error.hpp"
#include "mbti/io.hpp"

namespace mbti::corpus {

using nlohmann::json;

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::string require_string(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw Error(ErrorCode::Schema, "missing field '" + key + "'");
  if (!it->is_string()) throw Error(ErrorCode::Schema, "field '" + key + "' is not a string");
  return it->get<std::string>();
}

std::int64_t require_time(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw Error(ErrorCode::Schema, "missing field '" + key + "'");
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number_float()) return static_cast<std::int64_t>(it->get<double>());
  if (it->is_string()) {
    const auto s = it->get<std::string>();
    std::size_t used = 0;
    try {
      auto v = std::stoll(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::Schema, "field '" + key + "' is not an integer timestamp");
}

struct Cleaned {
  CleanResult result;
  std::size_t mask_count = 0;
};

Cleaned clean_impl(const Comment& c, bool already_masked, const CleanConfig& cfg) {
  const std::string_view body = trim(c.body);
  if (body == "[deleted]" || body == "[removed]") return {RejectRule::DeletedRemoved, 0};
  if (body.starts_with("http") || body.starts_with("r/")) return {RejectRule::LinkPrefix, 0};
  if (utf8_length(body) < cfg.min_length) return {RejectRule::TooShort, 0};

  auto masked = mask_types(body, cfg.mask_token);
  CleanComment out;
  out.comment = c;
  out.comment.body = std::move(masked.text);
  out.masked = already_masked || masked.count > 0;
  out.origin = cfg.mbti_subreddits.contains(lower(c.subreddit)) ? Origin::MbtiSubreddit
                                                                 : Origin::Other;
  return {std::move(out), masked.count};
}

}  // namespace

CommentReader::CommentReader(const std::filesystem::path& path, FieldMap fields)
    : in_(path, std::ios::binary), fields_(std::move(fields)) {
  if (!in_) throw Error(ErrorCode::Io, "cannot open corpus " + path.string());
}

std::optional<Comment> CommentReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      if (!j.is_object()) throw Error(ErrorCode::Schema, "record is not a JSON object");
      Comment c = comment_from_json(j, fields_);
      if (!seen_ids_.insert(c.id).second)
        throw Error(ErrorCode::Schema, "duplicate id '" + c.id + "'");
      return c;
    } catch (const json::exception& e) {
      rejects_.push_back({line_no_, std::string("malformed JSON: ") + e.what()});
    } catch (const Error& e) {
      rejects_.push_back({line_no_, e.what()});
    }
  }
  return std::nullopt;
}

std::vector<Comment> ingest(const std::filesystem::path& path, const FieldMap& fields,
                            std::vector<IngestReject>* rejects) {
  CommentReader reader(path, fields);
  std::vector<Comment> out;
  while (auto c = reader.next()) out.push_back(std::move(*c));
  if (rejects) *rejects = reader.rejects();
  return out;
}

Comment comment_from_json(const json& j, const FieldMap& f) {
  Comment c;
  c.id = require_string(j, f.id);
  if (c.id.empty()) throw Error(ErrorCode::Schema, "empty id");
  c.author = require_string(j, f.author);
  c.subreddit = require_string(j, f.subreddit);
  c.created_utc = require_time(j, f.created_utc);
  c.body = require_string(j, f.body);
  if (auto it = j.find(f.label); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::Schema, "field '" + f.label + "' is not a string");
    c.label = parse_type(it->get<std::string>());
  }
  return c;
}

json to_json(const Comment& c) {
  json j = json::object();
  j["id"] = c.id;
  j["author"] = c.author;
  j["subreddit"] = c.subreddit;
  j["created_utc"] = c.created_utc;
  j["body"] = c.body;
  j["label"] = c.label ? json(c.label->str()) : json(nullptr);
  return j;
}

json to_json(const CleanComment& c) {
  json j = to_json(c.comment);
  j["masked"] = c.masked;
  j["origin"] = c.origin == Origin::MbtiSubreddit ? "mbti" : "other";
  return j;
}

CleanComment clean_comment_from_json(const json& j) {
  CleanComment c;
  c.comment = comment_from_json(j);
  c.masked = j.value("masked", false);
  const auto origin = j.value("origin", std::string("other"));
  if (origin != "mbti" && origin != "other")
    throw Error(ErrorCode::Schema, "unknown origin '" + origin + "'");
  c.origin = origin == "mbti" ? Origin::MbtiSubreddit : Origin::Other;
  return c;
}

std::vector<CleanComment> read_clean_jsonl(const std::filesystem::path& path) {
  std::vector<CleanComment> out;
  std::size_t n = 0;
  for (const auto& line : io::read_lines(path)) {
    ++n;
    try {
      out.push_back(clean_comment_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Schema, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string to_jsonl(const std::vector<CleanComment>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::string to_jsonl(const std::vector<Comment>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::string_view rule_name(RejectRule r) {
  switch (r) {
    case RejectRule::DeletedRemoved: return "deleted_removed";
    case RejectRule::LinkPrefix: return "link_prefix";
    case RejectRule::TooShort: return "too_short";
  }
  return "?";
}

std::set<std::string> CleanConfig::default_mbti_subreddits() {
  std::set<std::string> s{"mbti"};
  for (const auto& t : MbtiType::all()) s.insert(lower(t.str()));
  return s;
}

std::set<std::string> CleanConfig::load_subreddits(const std::filesystem::path& path) {
  std::set<std::string> s;
  for (const auto& line : io::read_lines(path)) {
    auto name = trim(line);
    if (name.empty() || name.front() == '#') continue;
    if (name.starts_with("r/")) name.remove_prefix(2);
    s.insert(lower(name));
  }
  return s;
}

MaskResult mask_types(std::string_view text, std::string_view token) {
  MaskResult out;
  out.text.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const bool left_ok = i == 0 || !is_word_char(text[i - 1]);
    MbtiType t;
    if (left_ok && i + 4 <= text.size() && try_parse_type(text.substr(i, 4), t)) {
      std::size_t end = i + 4;
      auto boundary = [&](std::size_t p) { return p == text.size() || !is_word_char(text[p]); };
      if (!boundary(end) && (text[end] == 's' || text[end] == 'S') && boundary(end + 1)) ++end;
      if (boundary(end)) {
        out.text += token;
        ++out.count;
        i = end;
        continue;
      }
    }
    out.text += text[i];
    ++i;
  }
  return out;
}

bool contains_type_token(std::string_view text) { return mask_types(text, "").count > 0; }

CleanResult clean(const Comment& c, const CleanConfig& cfg) {
  return clean_impl(c, false, cfg).result;
}

CleanResult clean(const CleanComment& c, const CleanConfig& cfg) {
  return clean_impl(c.comment, c.masked, cfg).result;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

void CleanReport::add(const CleanResult& r, std::size_t mask_count) {
  ++input;
  if (const auto* rule = std::get_if<RejectRule>(&r)) {
    ++rejected[static_cast<std::size_t>(*rule)];
    return;
  }
  ++output;
  masked_tokens += mask_count;
  if (mask_count > 0) ++masked_comments;
}

void CleanReport::merge(const CleanReport& o) {
  input += o.input;
  output += o.output;
  for (std::size_t i = 0; i < rejected.size(); ++i) rejected[i] += o.rejected[i];
  masked_tokens += o.masked_tokens;
  masked_comments += o.masked_comments;
}

json CleanReport::to_json() const {
  json rej = json::object();
  for (auto r : kRejectRules) rej[std::string(rule_name(r))] = count(r);
  return json{{"input", input},
              {"output", output},
              {"rejected", rej},
              {"masked_tokens", masked_tokens},
              {"masked_comments", masked_comments}};
}

std::vector<CleanComment> clean_all(const std::vector<Comment>& in, const CleanConfig& cfg,
                                    CleanReport& report) {
  std::vector<CleanComment> out;
  for (const auto& c : in) {
    auto r = clean_impl(c, false, cfg);
    report.add(r.result, r.mask_count);
    if (auto* cc = std::get_if<CleanComment>(&r.result)) out.push_back(std::move(*cc));
  }
  return out;
}

}  // namespace mbti::corpus
