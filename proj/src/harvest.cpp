#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "mbti/harvest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>

#include "mbti/error.hpp"
#include "mbti/io.hpp"

namespace mbti::harvest {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kCheckpointFormat = "mbti-harvest-checkpoint/1";
constexpr const char* kFlairField = "author_flair_text";

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool skipped_author(const std::string& a) {
  return a.empty() || a == "[deleted]" || a == "AutoModerator";
}

std::int64_t ts_of(const json& r) {
  const auto it = r.find("created_utc");
  if (it == r.end()) return 0;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number()) return static_cast<std::int64_t>(it->get<double>());
  if (it->is_string()) return std::stoll(it->get<std::string>());
  return 0;
}

std::string id_of(const json& r) {
  const auto it = r.find("id");
  if (it == r.end()) return {};
  return it->is_string() ? it->get<std::string>() : it->dump();
}

std::string str_field(const json& r, const char* key) {
  const auto it = r.find(key);
  return it != r.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

struct Url {
  std::string scheme_host_port;
  std::string prefix;
};

Url split_url(const std::string& base) {
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorCode::Config, "base URL needs a scheme: " + base);
  const auto path_start = base.find('/', scheme_end + 3);
  Url u;
  u.scheme_host_port = base.substr(0, path_start);
  if (path_start != std::string::npos) u.prefix = base.substr(path_start);
  while (!u.prefix.empty() && u.prefix.back() == '/') u.prefix.pop_back();
  return u;
}

// Persistent harvest state: per-stream cursors, per-stream author
// observations and comments of users still in progress.
class Checkpoint {
 public:
  explicit Checkpoint(const std::optional<std::filesystem::path>& path) : path_(path) {
    data_ = {{"format", kCheckpointFormat}, {"streams", json::object()},
             {"observations", json::object()}, {"pending", json::object()}};
    if (path_ && std::filesystem::exists(*path_)) {
      json loaded;
      try {
        loaded = json::parse(io::read_file(*path_));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::Schema, "unreadable checkpoint " + path_->string() + ": " + e.what());
      }
      if (loaded.value("format", "") != kCheckpointFormat)
        throw Error(ErrorCode::Schema, "not a harvest checkpoint: " + path_->string());
      for (const char* k : {"streams", "observations", "pending"})
        if (loaded.contains(k)) data_[k] = loaded[k];
    }
  }

  json& stream(const std::string& key) {
    auto& s = data_["streams"][key];
    if (s.is_null()) s = {{"before", nullptr}, {"boundary", json::array()}, {"complete", false}};
    return s;
  }
  json& observations(const std::string& key) {
    auto& o = data_["observations"][key];
    if (o.is_null()) o = json::object();
    return o;
  }
  json& pending(const std::string& author) {
    auto& p = data_["pending"][author];
    if (p.is_null()) p = json::array();
    return p;
  }
  bool has_pending(const std::string& author) const { return data_["pending"].contains(author); }
  void drop_pending(const std::string& author) { data_["pending"].erase(author); }

  void save() const {
    if (path_) io::write_file(*path_, data_.dump(1) + "\n");
  }

 private:
  std::optional<std::filesystem::path> path_;
  json data_;
};

// Walks one cursor-paginated stream from the newest record in the window to
// the oldest. Records sharing the boundary timestamp are refetched with the
// next page and filtered by id.
template <typename OnPage>
void walk_stream(ArchiveClient& client, const HarvestConfig& cfg, Checkpoint& cp,
                 const std::string& key, const std::string& value, HarvestStats* stats,
                 OnPage&& on_page) {
  const std::string stream_key = key + ":" + value;
  auto& st = cp.stream(stream_key);
  if (st["complete"].get<bool>()) return;
  std::int64_t before = st["before"].is_null()
                            ? (cfg.to_utc == std::numeric_limits<std::int64_t>::max() ? cfg.to_utc
                                                                                     : cfg.to_utc + 1)
                            : st["before"].get<std::int64_t>();
  std::set<std::string> boundary = st["boundary"].get<std::set<std::string>>();

  while (true) {
    auto records = client.page(key, value, before, stats);
    std::vector<json> fresh;
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (auto& r : records) {
      const auto ts = ts_of(r);
      lo = std::min(lo, ts);
      hi = std::max(hi, ts);
      if (ts < cfg.from_utc || ts > cfg.to_utc) continue;
      if (boundary.contains(id_of(r))) continue;
      fresh.push_back(std::move(r));
    }
    if (records.empty() || fresh.empty() || lo < cfg.from_utc) {
      on_page(fresh);
      st["complete"] = true;
      cp.save();
      return;
    }
    on_page(fresh);
    std::set<std::string> next_boundary;
    for (const auto& r : fresh)
      if (ts_of(r) == lo) next_boundary.insert(id_of(r));
    if (hi > lo) {
      before = lo + 1;
    } else {
      // A full page of one timestamp; step past it.
      before = lo;
      next_boundary.clear();
    }
    boundary = std::move(next_boundary);
    st["before"] = before;
    st["boundary"] = boundary;
    cp.save();
  }
}

void observe(json& obs, const json& record, HarvestStats* stats) {
  const auto author = str_field(record, "author");
  if (skipped_author(author)) return;
  auto& entry = obs[author];
  if (entry.is_null()) entry = {{"types", json::array()}, {"observed_utc", ts_of(record)}};
  entry["observed_utc"] = std::max(entry["observed_utc"].get<std::int64_t>(), ts_of(record));
  const auto flair = str_field(record, kFlairField);
  if (flair.empty()) return;
  MbtiType t;
  switch (parse_flair(flair, t)) {
    case FlairParse::None:
      if (stats) ++stats->unparseable_flairs;
      return;
    case FlairParse::Ambiguous:
      entry["ambiguous"] = true;
      return;
    case FlairParse::Type: {
      auto types = entry["types"].get<std::set<std::string>>();
      types.insert(t.str());
      entry["types"] = types;
      return;
    }
  }
}

struct Observed {
  std::set<std::string> types;
  bool ambiguous = false;
  std::int64_t observed_utc = 0;
  std::string flair_source;
  std::set<std::string> venues;
};

// Folds observations of several streams, in the given order, into one
// record per author.
std::map<std::string, Observed> fold(Checkpoint& cp, const std::vector<std::string>& subreddits) {
  std::map<std::string, Observed> out;
  for (const auto& sub : subreddits) {
    for (const auto& [author, e] : cp.observations("subreddit:" + sub).items()) {
      auto& o = out[author];
      o.venues.insert(sub);
      o.observed_utc = std::max(o.observed_utc, e["observed_utc"].get<std::int64_t>());
      if (e.value("ambiguous", false)) o.ambiguous = true;
      for (const auto& t : e["types"]) {
        o.types.insert(t.get<std::string>());
        if (o.flair_source.empty()) o.flair_source = sub;
      }
    }
  }
  return out;
}

}  // namespace

void HarvestConfig::validate() const {
  if (page_size < 1 || page_size > 1000)
    throw Error(ErrorCode::Config, "page_size must be in [1, 1000], got " + std::to_string(page_size));
  if (!(rate_limit > 0.0) || !std::isfinite(rate_limit))
    throw Error(ErrorCode::Config, "rate_limit must be a positive number of requests per second");
  if (from_utc > to_utc) throw Error(ErrorCode::Config, "time window is empty (from_utc > to_utc)");
  if (max_retries < 0) throw Error(ErrorCode::Config, "max_retries must be >= 0");
  const auto url = resolved_base_url();
  if (!url.starts_with("http://") && !url.starts_with("https://"))
    throw Error(ErrorCode::Config, "base URL must start with http:// or https://");
}

std::string HarvestConfig::resolved_base_url() const {
  if (!base_url.empty()) return base_url;
  if (const char* env = std::getenv(kBaseUrlEnv); env && *env) return env;
  throw Error(ErrorCode::Config, std::string("no archive URL: set base_url or $") + kBaseUrlEnv);
}

nlohmann::json to_json(const UserLabel& u) {
  return {{"author", u.author},
          {"label", u.label.str()},
          {"source_subreddit", u.source_subreddit},
          {"observed_utc", u.observed_utc}};
}

UserLabel user_from_json(const nlohmann::json& j) {
  try {
    return {j.at("author").get<std::string>(), parse_type(j.at("label").get<std::string>()),
            j.value("source_subreddit", ""), j.value("observed_utc", std::int64_t{0})};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("bad user record: ") + e.what());
  }
}

nlohmann::json HarvestStats::to_json() const {
  return {{"requests", requests},
          {"retries", retries},
          {"unparseable_flairs", unparseable_flairs},
          {"ambiguous_users", ambiguous_users},
          {"comments", comments},
          {"failed_users", failed_users}};
}

FlairParse parse_flair(std::string_view flair, MbtiType& out) {
  std::optional<MbtiType> found;
  std::size_t i = 0;
  while (i < flair.size()) {
    if (!std::isalpha(static_cast<unsigned char>(flair[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < flair.size() && std::isalpha(static_cast<unsigned char>(flair[j]))) ++j;
    const bool plural = j - i == 5 && (flair[j - 1] == 's' || flair[j - 1] == 'S');
    if (j - i == 4 || plural) {
      MbtiType t;
      if (try_parse_type(flair.substr(i, 4), t)) {
        if (!found) {
          found = t;
        } else if (!(*found == t)) {
          return FlairParse::Ambiguous;
        }
      }
    }
    i = j;
  }
  if (!found) return FlairParse::None;
  out = *found;
  return FlairParse::Type;
}

struct ArchiveClient::Impl {
  HarvestConfig cfg;
  Url url;
  std::unique_ptr<httplib::Client> http;
  std::chrono::nanoseconds interval{};
  std::optional<Clock::time_point> last;

  void pace() {
    if (last) {
      const auto ready = *last + interval;
      const auto now = Clock::now();
      if (now < ready) std::this_thread::sleep_for(ready - now);
    }
    last = Clock::now();
  }
};

ArchiveClient::ArchiveClient(const HarvestConfig& cfg) : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  impl_->cfg = cfg;
  impl_->url = split_url(cfg.resolved_base_url());
  impl_->http = std::make_unique<httplib::Client>(impl_->url.scheme_host_port);
  impl_->http->set_connection_timeout(cfg.timeout);
  impl_->http->set_read_timeout(cfg.timeout);
  impl_->http->set_keep_alive(true);
  impl_->interval = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::duration<double>(1.0 / cfg.rate_limit));
}

ArchiveClient::~ArchiveClient() = default;

std::vector<nlohmann::json> ArchiveClient::page(const std::string& key, const std::string& value,
                                                std::int64_t before, HarvestStats* stats) {
  auto& im = *impl_;
  httplib::Params params{{key, value},
                         {"before", std::to_string(before)},
                         {"size", std::to_string(im.cfg.page_size)}};
  if (im.cfg.from_utc > std::numeric_limits<std::int64_t>::min())
    params.emplace("after", std::to_string(im.cfg.from_utc - 1));
  const std::string path = im.url.prefix + im.cfg.endpoint;

  std::string last_error;
  for (int attempt = 0; attempt <= im.cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      if (stats) ++stats->retries;
      std::this_thread::sleep_for(im.cfg.backoff * (1 << std::min(attempt - 1, 16)));
    }
    im.pace();
    if (stats) ++stats->requests;
    auto res = im.http->Get(path, params, httplib::Headers{});
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      auto body = json::parse(res->body);
      const json* data = body.is_array() ? &body : nullptr;
      if (body.is_object() && body.contains("data") && body["data"].is_array()) data = &body["data"];
      if (!data) {
        last_error = "response has no data array";
        continue;
      }
      std::vector<json> out;
      for (auto& r : *data)
        if (r.is_object()) out.push_back(std::move(r));
      return out;
    } catch (const json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
    }
  }
  throw Error(ErrorCode::Http, key + "=" + value + " before=" + std::to_string(before) + ": " +
                                   last_error + " after " + std::to_string(im.cfg.max_retries) +
                                   " retries");
}

std::vector<UserLabel> harvest_users(const HarvestConfig& cfg, HarvestStats* stats) {
  ArchiveClient client(cfg);
  Checkpoint cp(cfg.checkpoint);
  for (const auto& sub : cfg.subreddits) {
    auto& obs = cp.observations("subreddit:" + sub);
    walk_stream(client, cfg, cp, "subreddit", sub, stats, [&](const std::vector<json>& page) {
      for (const auto& r : page) observe(obs, r, stats);
    });
  }
  std::vector<UserLabel> out;
  for (const auto& [author, o] : fold(cp, cfg.subreddits)) {
    if (o.types.empty() && !o.ambiguous) continue;
    if (o.ambiguous || o.types.size() > 1) {
      if (stats) ++stats->ambiguous_users;
      continue;
    }
    out.push_back({author, parse_type(*o.types.begin()), o.flair_source, o.observed_utc});
  }
  return out;
}

void harvest_comments(const std::vector<UserLabel>& users, const HarvestConfig& cfg,
                      const CommentSink& sink, HarvestStats* stats) {
  ArchiveClient client(cfg);
  Checkpoint cp(cfg.checkpoint);
  std::vector<const UserLabel*> order;
  for (const auto& u : users) order.push_back(&u);
  std::sort(order.begin(), order.end(),
            [](const UserLabel* a, const UserLabel* b) { return a->author < b->author; });
  std::unordered_set<std::string> emitted;

  for (const auto* u : order) {
    const std::string key = "author:" + u->author;
    if (cp.stream(key)["complete"].get<bool>() && !cp.has_pending(u->author)) continue;
    auto& pending = cp.pending(u->author);
    try {
      walk_stream(client, cfg, cp, "author", u->author, stats, [&](const std::vector<json>& page) {
        for (const auto& r : page) pending.push_back(r);
      });
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Http) throw;
      std::cerr << "harvest: skipping user " << u->author << ": " << e.what() << "\n";
      if (stats) stats->failed_users.push_back(u->author);
      continue;
    }
    std::vector<corpus::Comment> comments;
    for (const auto& r : pending) {
      try {
        auto c = corpus::comment_from_json(r);
        if (c.author != u->author) continue;
        c.label = u->label;
        comments.push_back(std::move(c));
      } catch (const Error& e) {
        std::cerr << "harvest: dropping record of " << u->author << ": " << e.what() << "\n";
      }
    }
    std::sort(comments.begin(), comments.end(), [](const auto& a, const auto& b) {
      return std::tie(a.created_utc, a.id) < std::tie(b.created_utc, b.id);
    });
    for (const auto& c : comments) {
      if (!emitted.insert(c.id).second) continue;
      if (stats) ++stats->comments;
      sink(c);
    }
    cp.drop_pending(u->author);
    cp.save();
  }
}

std::vector<corpus::Comment> harvest_comments(const std::vector<UserLabel>& users,
                                              const HarvestConfig& cfg, HarvestStats* stats) {
  std::vector<corpus::Comment> out;
  harvest_comments(users, cfg, [&](const corpus::Comment& c) { out.push_back(c); }, stats);
  return out;
}

std::vector<UserLabel> enrich_rare_classes(const std::vector<UserLabel>& users,
                                           std::size_t per_class_target, const HarvestConfig& cfg,
                                           HarvestStats* stats) {
  std::array<std::size_t, 16> counts{};
  std::set<std::string> known;
  for (const auto& u : users) {
    ++counts[static_cast<std::size_t>(u.label.index())];
    known.insert(u.author);
  }
  std::vector<std::string> venues;
  for (const auto& t : MbtiType::all())
    if (counts[static_cast<std::size_t>(t.index())] < per_class_target) venues.push_back(lower(t.str()));
  if (venues.empty()) return users;

  ArchiveClient client(cfg);
  Checkpoint cp(cfg.checkpoint);
  for (const auto& sub : venues) {
    auto& obs = cp.observations("subreddit:" + sub);
    walk_stream(client, cfg, cp, "subreddit", sub, stats, [&](const std::vector<json>& page) {
      for (const auto& r : page) observe(obs, r, stats);
    });
  }

  std::vector<UserLabel> out = users;
  for (const auto& [author, o] : fold(cp, venues)) {
    if (known.contains(author)) continue;
    if (o.ambiguous || o.types.size() > 1) {
      if (stats) ++stats->ambiguous_users;
      continue;
    }
    if (o.types.size() == 1) {
      out.push_back({author, parse_type(*o.types.begin()), o.flair_source, o.observed_utc});
    } else if (o.venues.size() == 1) {
      out.push_back({author, parse_type(*o.venues.begin()), *o.venues.begin(), o.observed_utc});
    } else {
      if (stats) ++stats->ambiguous_users;
    }
  }
  std::sort(out.begin(), out.end(),
            [](const UserLabel& a, const UserLabel& b) { return a.author < b.author; });
  return out;
}

// ---------------------------------------------------------------------------

struct MockArchive::Impl {
  std::vector<json> records;
  std::string endpoint;
  httplib::Server server;
  mutable std::mutex mu;
  std::vector<Clock::time_point> times;
  std::size_t fail_from = 0;
  std::set<std::string> failing_authors;

  void handle(const httplib::Request& req, httplib::Response& res) {
    std::size_t n;
    {
      std::lock_guard lock(mu);
      times.push_back(Clock::now());
      n = times.size();
      const bool fail = (fail_from && n >= fail_from) ||
                        (req.has_param("author") && failing_authors.contains(req.get_param_value("author")));
      if (fail) {
        res.status = 503;
        res.set_content(R"({"error":"unavailable"})", "application/json");
        return;
      }
    }
    auto num = [&](const char* k, std::int64_t dflt) {
      if (!req.has_param(k)) return dflt;
      try {
        return static_cast<std::int64_t>(std::stoll(req.get_param_value(k)));
      } catch (const std::exception&) {
        return dflt;
      }
    };
    const auto before = num("before", std::numeric_limits<std::int64_t>::max());
    const auto after = num("after", std::numeric_limits<std::int64_t>::min());
    const auto size = static_cast<std::size_t>(std::clamp<std::int64_t>(num("size", 25), 1, 1000));
    const std::string sub = req.has_param("subreddit") ? lower(req.get_param_value("subreddit")) : "";
    const std::string author = req.has_param("author") ? req.get_param_value("author") : "";

    std::vector<const json*> hits;
    for (const auto& r : records) {
      const auto ts = ts_of(r);
      if (ts >= before || ts <= after) continue;
      if (!sub.empty() && lower(str_field(r, "subreddit")) != sub) continue;
      if (!author.empty() && str_field(r, "author") != author) continue;
      hits.push_back(&r);
    }
    std::sort(hits.begin(), hits.end(), [](const json* a, const json* b) {
      const auto ta = ts_of(*a), tb = ts_of(*b);
      if (ta != tb) return ta > tb;
      return id_of(*a) > id_of(*b);
    });
    if (hits.size() > size) hits.resize(size);
    json data = json::array();
    for (const auto* r : hits) data.push_back(*r);
    res.set_content(json{{"data", data}}.dump(), "application/json");
  }
};

MockArchive::MockArchive(std::vector<nlohmann::json> records, std::string endpoint)
    : impl_(std::make_unique<Impl>()) {
  impl_->records = std::move(records);
  impl_->endpoint = std::move(endpoint);
  impl_->server.Get(impl_->endpoint, [this](const httplib::Request& req, httplib::Response& res) {
    impl_->handle(req, res);
  });
}

MockArchive::~MockArchive() { stop(); }

void MockArchive::start(int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else if (impl_->server.bind_to_port("127.0.0.1", port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) throw Error(ErrorCode::Io, "mock archive could not bind a port");
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void MockArchive::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

void MockArchive::listen_blocking(const std::string& host, int port) {
  port_ = port;
  if (!impl_->server.listen(host, port))
    throw Error(ErrorCode::Io, "mock archive could not listen on " + host + ":" + std::to_string(port));
}

std::string MockArchive::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

void MockArchive::fail_from_request(std::size_t n) {
  std::lock_guard lock(impl_->mu);
  impl_->fail_from = n;
}

void MockArchive::fail_author(const std::string& author) {
  std::lock_guard lock(impl_->mu);
  impl_->failing_authors.insert(author);
}

void MockArchive::clear_failures() {
  std::lock_guard lock(impl_->mu);
  impl_->fail_from = 0;
  impl_->failing_authors.clear();
}

std::vector<std::chrono::steady_clock::time_point> MockArchive::request_times() const {
  std::lock_guard lock(impl_->mu);
  return impl_->times;
}

std::size_t MockArchive::request_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->times.size();
}

std::vector<nlohmann::json> MockArchive::load_fixture(const std::filesystem::path& jsonl) {
  std::vector<json> out;
  std::size_t n = 0;
  for (const auto& line : io::read_lines(jsonl)) {
    ++n;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Schema, jsonl.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mbti::harvest
