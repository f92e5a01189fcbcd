#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "mbti/corpus.hpp"

namespace testutil {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(MBTI_FIXTURES) / name;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mbti-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline mbti::corpus::CleanComment record(std::string id, std::string author, const char* type,
                                         std::string body = "placeholder body text",
                                         mbti::corpus::Origin origin = mbti::corpus::Origin::Other) {
  mbti::corpus::CleanComment c;
  c.comment.id = std::move(id);
  c.comment.author = std::move(author);
  c.comment.subreddit = origin == mbti::corpus::Origin::MbtiSubreddit ? "mbti" : "books";
  c.comment.created_utc = 1'600'000'000;
  c.comment.body = std::move(body);
  c.comment.label = mbti::parse_type(type);
  c.origin = origin;
  return c;
}

}  // namespace testutil
