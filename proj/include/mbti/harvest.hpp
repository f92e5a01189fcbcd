#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbti/corpus.hpp"
#include "mbti/label_algebra.hpp"

namespace mbti::harvest {

/// Environment variable consulted when no base URL is configured.
inline constexpr const char* kBaseUrlEnv = "MBTI_ARCHIVE_URL";

struct HarvestConfig {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string endpoint = "/comments";
  std::size_t page_size = 100;
  double rate_limit = 1.0;  // requests per second
  std::int64_t from_utc = 0;
  std::int64_t to_utc = std::numeric_limits<std::int64_t>::max();
  std::vector<std::string> subreddits = {"mbti"};
  int max_retries = 3;
  std::chrono::milliseconds backoff{250};
  std::chrono::seconds timeout{30};
  std::optional<std::filesystem::path> checkpoint;

  /// page_size in [1, 1000], positive rate, non-empty window, resolvable URL.
  void validate() const;
  /// base_url, falling back to $MBTI_ARCHIVE_URL.
  std::string resolved_base_url() const;
};

struct UserLabel {
  std::string author;
  MbtiType label;
  std::string source_subreddit;
  std::int64_t observed_utc = 0;

  friend bool operator==(const UserLabel&, const UserLabel&) = default;
};

nlohmann::json to_json(const UserLabel& u);
UserLabel user_from_json(const nlohmann::json& j);

struct HarvestStats {
  std::size_t requests = 0;
  std::size_t retries = 0;
  std::size_t unparseable_flairs = 0;
  std::size_t ambiguous_users = 0;
  std::size_t comments = 0;
  std::vector<std::string> failed_users;

  nlohmann::json to_json() const;
};

enum class FlairParse { None, Type, Ambiguous };

/// First 4-letter token that parses as a type, case-insensitive. A flair
/// naming two different types is Ambiguous.
FlairParse parse_flair(std::string_view flair, MbtiType& out);

/// Cursor-paginated JSON archive client. Requests are sequential and spaced
/// to honor the configured rate; failures retry with exponential backoff.
class ArchiveClient {
 public:
  explicit ArchiveClient(const HarvestConfig& cfg);
  ~ArchiveClient();
  ArchiveClient(const ArchiveClient&) = delete;
  ArchiveClient& operator=(const ArchiveClient&) = delete;

  /// One page of records, newest first, strictly older than `before`.
  /// Query keys: subreddit or author, before, after, size.
  std::vector<nlohmann::json> page(const std::string& key, const std::string& value,
                                   std::int64_t before, HarvestStats* stats);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Users whose flair in the configured subreddits names exactly one type.
/// Throws Error(Http) after retries; with a checkpoint configured the run can
/// be resumed.
std::vector<UserLabel> harvest_users(const HarvestConfig& cfg, HarvestStats* stats = nullptr);

using CommentSink = std::function<void(const corpus::Comment&)>;

/// Streams each user's comments (in author order; within a user by
/// created_utc then id), every comment labeled with the user's label. A user
/// whose fetch fails after retries is recorded in stats.failed_users and the
/// stream continues; a checkpoint keeps the partial state for resumption.
void harvest_comments(const std::vector<UserLabel>& users, const HarvestConfig& cfg,
                      const CommentSink& sink, HarvestStats* stats = nullptr);
std::vector<corpus::Comment> harvest_comments(const std::vector<UserLabel>& users,
                                              const HarvestConfig& cfg,
                                              HarvestStats* stats = nullptr);

/// For every class with fewer than `per_class_target` users, scans the
/// type-named subreddit. A flair there wins over the venue; existing users
/// are kept as they are.
std::vector<UserLabel> enrich_rare_classes(const std::vector<UserLabel>& users,
                                           std::size_t per_class_target, const HarvestConfig& cfg,
                                           HarvestStats* stats = nullptr);

/// In-process archive serving a fixture of comment records; logs the arrival
/// time of every request. Used by tests and the mbti-mock-archive tool.
class MockArchive {
 public:
  explicit MockArchive(std::vector<nlohmann::json> records, std::string endpoint = "/comments");
  ~MockArchive();
  MockArchive(const MockArchive&) = delete;
  MockArchive& operator=(const MockArchive&) = delete;

  /// Binds to 127.0.0.1 (port 0 picks a free port) and serves in a thread.
  void start(int port = 0);
  void stop();
  /// Blocks serving on the calling thread.
  void listen_blocking(const std::string& host, int port);

  int port() const { return port_; }
  std::string url() const;

  /// Requests number `n` onwards (1-based) fail with HTTP 503 until reset.
  void fail_from_request(std::size_t n);
  /// Every request for this author fails with HTTP 503.
  void fail_author(const std::string& author);
  void clear_failures();

  std::vector<std::chrono::steady_clock::time_point> request_times() const;
  std::size_t request_count() const;

  static std::vector<nlohmann::json> load_fixture(const std::filesystem::path& jsonl);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace mbti::harvest
