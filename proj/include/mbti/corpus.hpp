#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mbti/label_algebra.hpp"

namespace mbti::corpus {

struct Comment {
  std::string id;
  std::string author;
  std::string subreddit;
  std::int64_t created_utc = 0;
  std::string body;
  std::optional<MbtiType> label;

  friend bool operator==(const Comment&, const Comment&) = default;
};

enum class Origin { MbtiSubreddit, Other };

struct CleanComment {
  Comment comment;
  bool masked = false;
  Origin origin = Origin::Other;

  friend bool operator==(const CleanComment&, const CleanComment&) = default;
};

/// JSON field names for each Comment member; the defaults are the canonical
/// corpus format written by `harvest` and `synth`.
struct FieldMap {
  std::string id = "id";
  std::string author = "author";
  std::string subreddit = "subreddit";
  std::string created_utc = "created_utc";
  std::string body = "body";
  std::string label = "label";
};

struct IngestReject {
  std::size_t line = 0;
  std::string reason;
};

/// Streams Comments from a JSONL file in file order. Malformed lines and
/// duplicate ids go to rejects() and reading continues.
class CommentReader {
 public:
  CommentReader(const std::filesystem::path& path, FieldMap fields = {});

  std::optional<Comment> next();
  const std::vector<IngestReject>& rejects() const { return rejects_; }

 private:
  std::ifstream in_;
  FieldMap fields_;
  std::size_t line_no_ = 0;
  std::unordered_set<std::string> seen_ids_;
  std::vector<IngestReject> rejects_;
};

std::vector<Comment> ingest(const std::filesystem::path& path, const FieldMap& fields,
                            std::vector<IngestReject>* rejects = nullptr);

nlohmann::json to_json(const Comment& c);
nlohmann::json to_json(const CleanComment& c);
Comment comment_from_json(const nlohmann::json& j, const FieldMap& fields = {});
CleanComment clean_comment_from_json(const nlohmann::json& j);

/// Reads a file written by write_clean_jsonl.
std::vector<CleanComment> read_clean_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<CleanComment>& records);
std::string to_jsonl(const std::vector<Comment>& records);

enum class RejectRule { DeletedRemoved, LinkPrefix, TooShort };
inline constexpr std::array<RejectRule, 3> kRejectRules = {
    RejectRule::DeletedRemoved, RejectRule::LinkPrefix, RejectRule::TooShort};
std::string_view rule_name(RejectRule r);

struct CleanConfig {
  std::size_t min_length = 50;
  std::string mask_token = "[TYPE]";
  /// Lowercased subreddit names that count as MBTI venues.
  std::set<std::string> mbti_subreddits = default_mbti_subreddits();

  static std::set<std::string> default_mbti_subreddits();
  /// One name per line; '#' comments allowed.
  static std::set<std::string> load_subreddits(const std::filesystem::path& path);
};

struct MaskResult {
  std::string text;
  std::size_t count = 0;
};

/// Replaces each of the 16 codes appearing as a word token (ASCII
/// alphanumerics are word characters; an optional trailing "s" is absorbed)
/// with `token`.
MaskResult mask_types(std::string_view text, std::string_view token = "[TYPE]");

/// True when `text` still contains a maskable token.
bool contains_type_token(std::string_view text);

using CleanResult = std::variant<CleanComment, RejectRule>;

/// deleted/removed -> link prefix -> min length -> mask.
CleanResult clean(const Comment& c, const CleanConfig& cfg = {});
/// Re-cleaning an accepted record keeps its masked flag.
CleanResult clean(const CleanComment& c, const CleanConfig& cfg = {});

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

struct CleanReport {
  std::size_t input = 0;
  std::size_t output = 0;
  std::array<std::size_t, 3> rejected{};
  std::size_t masked_tokens = 0;
  std::size_t masked_comments = 0;

  void add(const CleanResult& r, std::size_t mask_count);
  void merge(const CleanReport& other);
  std::size_t rejected_total() const { return rejected[0] + rejected[1] + rejected[2]; }
  bool balanced() const { return input == output + rejected_total(); }
  std::size_t count(RejectRule r) const { return rejected[static_cast<std::size_t>(r)]; }

  nlohmann::json to_json() const;
};

/// Cleans a batch and tallies the report.
std::vector<CleanComment> clean_all(const std::vector<Comment>& in, const CleanConfig& cfg,
                                    CleanReport& report);

}  // namespace mbti::corpus
