#include "mbti/features.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "mbti/error.hpp"
#include "mbti/io.hpp"
#include "mbti/porter.hpp"

namespace mbti::data {
const std::map<std::string, std::string_view>& embedded_files();
}

namespace mbti::features {

namespace {

// Decodes one UTF-8 sequence at `pos`; malformed bytes decode as U+FFFD and
// consume a single byte.
char32_t decode(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) {
    return i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80;
  };
  auto bits = [&](std::size_t i) { return static_cast<char32_t>(s[i] & 0x3F); };
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
    char32_t cp = (static_cast<char32_t>(b0 & 0x1F) << 6) | bits(pos + 1);
    pos += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
    char32_t cp = (static_cast<char32_t>(b0 & 0x0F) << 12) | (bits(pos + 1) << 6) | bits(pos + 2);
    pos += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
    char32_t cp = (static_cast<char32_t>(b0 & 0x07) << 18) | (bits(pos + 1) << 12) |
                  (bits(pos + 2) << 6) | bits(pos + 3);
    pos += 4;
    return cp;
  }
  ++pos;
  return 0xFFFD;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_emoji(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
         (cp >= 0x2300 && cp <= 0x23FF) || (cp >= 0x2B00 && cp <= 0x2BFF);
}

// Joiners and presentation selectors never form tokens on their own.
bool is_emoji_glue(char32_t cp) {
  return cp == 0x200D || (cp >= 0xFE00 && cp <= 0xFE0F) || (cp >= 0x1F3FB && cp <= 0x1F3FF);
}

bool is_word(char32_t cp) {
  if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) != 0;
  if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows, dingbats
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xD800 && cp <= 0xF8FF) return false;  // surrogates, private use
  if (cp >= 0xFE00 && cp <= 0xFE6F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;
  if (cp >= 0x1F000) return false;
  return true;
}

char32_t to_lower(char32_t cp) {
  if (cp < 0x80) return static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x17F && cp != 0x130 && cp != 0x131 && cp != 0x138 && cp != 0x149 &&
      cp != 0x17F) {
    const bool odd_lower = (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
    if (odd_lower) return (cp % 2 == 1) ? cp + 1 : cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != prefix[i]) return false;
  return true;
}

bool ascii_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Length of a URL starting at pos (runs to the next whitespace), or 0.
std::size_t url_span(std::string_view s, std::size_t pos) {
  const bool at_start = pos == 0 || !ascii_alnum(s[pos - 1]);
  if (!starts_with_ci(s, pos, "http://") && !starts_with_ci(s, pos, "https://") &&
      !(at_start && starts_with_ci(s, pos, "www.")))
    return 0;
  std::size_t end = pos;
  while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end]))) ++end;
  return end - pos;
}

// Length of "&name;", "&#123;" or "&#x1F;" at pos, or 0.
std::size_t entity_span(std::string_view s, std::size_t pos) {
  if (s[pos] != '&') return 0;
  std::size_t i = pos + 1;
  std::size_t body = 0;
  if (i < s.size() && s[i] == '#') {
    ++i;
    const bool hex = i < s.size() && (s[i] == 'x' || s[i] == 'X');
    if (hex) ++i;
    while (i < s.size() && body < 8 &&
           (hex ? std::isxdigit(static_cast<unsigned char>(s[i])) != 0
                : std::isdigit(static_cast<unsigned char>(s[i])) != 0)) {
      ++i;
      ++body;
    }
  } else {
    if (i >= s.size() || !std::isalpha(static_cast<unsigned char>(s[i]))) return 0;
    while (i < s.size() && body < 32 && ascii_alnum(s[i])) {
      ++i;
      ++body;
    }
  }
  if (body == 0 || i >= s.size() || s[i] != ';') return 0;
  return i + 1 - pos;
}

}  // namespace

void TokenizerConfig::validate() const {
  if (ngram_lo < 1 || ngram_lo > ngram_hi || ngram_hi > 3)
    throw Error(ErrorCode::InvalidArgument, "ngram range must satisfy 1 <= lo <= hi <= 3, got [" +
                                                std::to_string(ngram_lo) + ", " +
                                                std::to_string(ngram_hi) + "]");
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (cfg.strip_urls) {
      if (auto n = url_span(text, pos)) {
        flush();
        pos += n;
        continue;
      }
    }
    if (cfg.strip_html_entities) {
      if (auto n = entity_span(text, pos)) {
        flush();
        pos += n;
        continue;
      }
    }
    char32_t cp = decode(text, pos);
    if (is_word(cp)) {
      encode(cfg.lowercase ? to_lower(cp) : cp, cur);
      continue;
    }
    flush();
    if (is_emoji(cp) && !cfg.strip_emoji && !is_emoji_glue(cp)) {
      std::string e;
      encode(cp, e);
      tokens.push_back(std::move(e));
    }
  }
  flush();
  return tokens;
}

Lexicon Lexicon::parse(std::string_view text) {
  std::unordered_set<std::string> words;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (!line.empty() && line.front() != '#') words.emplace(line);
    start = nl + 1;
  }
  return Lexicon(std::move(words));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw Error(ErrorCode::Io, "stop-word lexicon not found: " + path.string());
  return parse(io::read_file(path));
}

Lexicon Lexicon::english() {
  static const Lexicon en = parse(data::embedded_files().at("stopwords/en.txt"));
  return en;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const Lexicon& lexicon) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!lexicon.contains(t)) out.push_back(t);
  return out;
}

std::string stem(std::string_view token) {
  // A single Porter pass is not idempotent (agreed -> agre -> agr); iterate.
  std::string cur(token);
  for (int i = 0; i < 16; ++i) {
    std::string next = porter_stem(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

std::vector<std::string> make_ngrams(const std::vector<std::string>& tokens, int lo, int hi) {
  std::vector<std::string> out;
  for (int n = lo; n <= hi; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < un; ++k) {
        g += ' ';
        g += tokens[i + k];
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::vector<std::string> TextPipeline::terms(std::string_view text) const {
  auto tokens = tokenize(text, tokenizer);
  if (remove_stopwords) tokens = features::remove_stopwords(tokens, stopwords);
  if (stem)
    for (auto& t : tokens) t = features::stem(t);
  if (tokenizer.ngram_lo == 1 && tokenizer.ngram_hi == 1) return tokens;
  return make_ngrams(tokens, tokenizer.ngram_lo, tokenizer.ngram_hi);
}

nlohmann::json TextPipeline::to_json() const {
  return nlohmann::json{{"order", std::string(kOrder)},
                        {"lowercase", tokenizer.lowercase},
                        {"strip_urls", tokenizer.strip_urls},
                        {"strip_html_entities", tokenizer.strip_html_entities},
                        {"strip_emoji", tokenizer.strip_emoji},
                        {"ngram_range", {tokenizer.ngram_lo, tokenizer.ngram_hi}},
                        {"remove_stopwords", remove_stopwords},
                        {"stem", stem}};
}

TextPipeline TextPipeline::from_json(const nlohmann::json& j) {
  if (j.value("order", std::string(kOrder)) != kOrder)
    throw Error(ErrorCode::Schema, "unsupported text pipeline order");
  TextPipeline p;
  p.tokenizer.lowercase = j.at("lowercase").get<bool>();
  p.tokenizer.strip_urls = j.at("strip_urls").get<bool>();
  p.tokenizer.strip_html_entities = j.at("strip_html_entities").get<bool>();
  p.tokenizer.strip_emoji = j.at("strip_emoji").get<bool>();
  p.tokenizer.ngram_lo = j.at("ngram_range").at(0).get<int>();
  p.tokenizer.ngram_hi = j.at("ngram_range").at(1).get<int>();
  p.tokenizer.validate();
  p.remove_stopwords = j.at("remove_stopwords").get<bool>();
  p.stem = j.at("stem").get<bool>();
  return p;
}

void DfCounter::add(const std::vector<std::string>& doc_terms) {
  ++documents_;
  std::vector<std::string> uniq = doc_terms;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  for (auto& t : uniq) ++df_[std::move(t)];
}

void DfCounter::merge(const DfCounter& other) {
  documents_ += other.documents_;
  for (const auto& [t, n] : other.df_) df_[t] += n;
}

Vocabulary Vocabulary::fit(const DfCounter& counts, std::size_t min_df, double max_df) {
  if (counts.documents() == 0) throw Error(ErrorCode::InvalidArgument, "cannot fit a vocabulary on an empty corpus");
  if (max_df <= 0.0 || max_df > 1.0)
    throw Error(ErrorCode::InvalidArgument, "max_df must be in (0, 1]");
  const double cap = max_df * static_cast<double>(counts.documents());
  Vocabulary v;
  for (const auto& [term, df] : counts.counts()) {
    if (df < min_df || static_cast<double>(df) > cap) continue;
    v.index_.emplace(term, static_cast<std::uint32_t>(v.terms_.size()));
    v.terms_.push_back(term);
    v.df_.push_back(df);
  }
  return v;
}

Vocabulary Vocabulary::fit(const std::vector<std::vector<std::string>>& docs, std::size_t min_df,
                           double max_df) {
  DfCounter c;
  for (const auto& d : docs) c.add(d);
  return fit(c, min_df, max_df);
}

std::optional<std::uint32_t> Vocabulary::index(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i)
    out += terms_[i] + '\t' + std::to_string(i) + '\t' + std::to_string(df_[i]) + '\n';
  return out;
}

Vocabulary Vocabulary::from_text(std::string_view text) {
  Vocabulary v;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos)
      throw Error(ErrorCode::Schema, "vocabulary line " + std::to_string(line_no) + ": expected 3 fields");
    std::string term(line.substr(0, t1));
    const auto idx = std::stoul(std::string(line.substr(t1 + 1, t2 - t1 - 1)));
    const auto df = std::stoul(std::string(line.substr(t2 + 1)));
    if (idx != v.terms_.size())
      throw Error(ErrorCode::Schema, "vocabulary line " + std::to_string(line_no) + ": indices must be dense");
    v.index_.emplace(term, static_cast<std::uint32_t>(idx));
    v.terms_.push_back(std::move(term));
    v.df_.push_back(df);
  }
  return v;
}

double SparseVector::sum() const {
  double s = 0.0;
  for (const auto& [i, v] : entries) s += v;
  return s;
}

bool SparseVector::valid() const {
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].first >= dim || entries[k].second <= 0.0) return false;
    if (k > 0 && entries[k - 1].first >= entries[k].first) return false;
  }
  return true;
}

SparseVector vectorize(const std::vector<std::string>& terms, const Vocabulary& vocab) {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : terms)
    if (auto idx = vocab.index(t)) counts[*idx] += 1.0;
  SparseVector v;
  v.dim = vocab.size();
  v.entries.assign(counts.begin(), counts.end());
  return v;
}

}  // namespace mbti::features
