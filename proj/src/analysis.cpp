#include "mbti/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "mbti/error.hpp"
#include "mbti/io.hpp"

namespace mbti::data {
const std::map<std::string, std::string_view>& embedded_files();
}

namespace mbti::analysis {

namespace {

std::unordered_set<std::string> word_set(std::string_view text) {
  std::unordered_set<std::string> words;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string w(text.substr(start, nl - start));
    while (!w.empty() && (w.back() == '\r' || w.back() == ' ')) w.pop_back();
    if (!w.empty() && w.front() != '#') words.insert(std::move(w));
    start = nl + 1;
  }
  return words;
}

features::TokenizerConfig detection_tokenizer() {
  features::TokenizerConfig cfg;
  cfg.strip_emoji = true;
  return cfg;
}

}  // namespace

std::vector<LanguageProfile> default_profiles() {
  std::vector<LanguageProfile> out;
  for (const auto& [name, content] : data::embedded_files()) {
    if (!name.starts_with("languages/")) continue;
    std::string code = name.substr(10);
    code = code.substr(0, code.size() - 4);
    out.push_back({code, word_set(content)});
  }
  return out;
}

std::vector<LanguageProfile> load_profiles(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::Io, "language profile directory not found: " + dir.string());
  std::vector<LanguageProfile> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    auto words = word_set(io::read_file(entry.path()));
    if (words.empty()) continue;
    out.push_back({entry.path().stem().string(), std::move(words)});
  }
  if (out.empty()) throw Error(ErrorCode::Io, "no language profiles in " + dir.string());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.code < b.code; });
  return out;
}

Detection detect_language(std::string_view text, const std::vector<LanguageProfile>& profiles,
                          const DetectConfig& cfg) {
  if (profiles.empty()) throw Error(ErrorCode::InvalidArgument, "no language profiles");
  const auto tokens = features::tokenize(text, detection_tokenizer());
  if (tokens.empty()) return {"und", 0.0};

  std::vector<std::size_t> hits(profiles.size(), 0);
  for (std::size_t p = 0; p < profiles.size(); ++p)
    for (const auto& t : tokens)
      if (profiles[p].stopwords.contains(t)) ++hits[p];

  std::size_t best = 0;
  for (std::size_t p = 1; p < profiles.size(); ++p)
    if (hits[p] > hits[best]) best = p;
  std::size_t runner_up = 0;
  for (std::size_t p = 0; p < profiles.size(); ++p)
    if (p != best) runner_up = std::max(runner_up, hits[p]);

  const auto n = static_cast<double>(tokens.size());
  const double rate = static_cast<double>(hits[best]) / n;
  if (hits[best] < cfg.min_hits || rate < cfg.min_rate) return {"und", 0.0};
  return {profiles[best].code, rate - static_cast<double>(runner_up) / n};
}

std::vector<std::pair<std::string, double>> language_distribution(
    const std::vector<corpus::CleanComment>& records, MbtiType label,
    const std::vector<LanguageProfile>& profiles, const DetectConfig& cfg) {
  std::map<std::string, std::size_t> counts;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.comment.label != label) continue;
    ++counts[detect_language(r.comment.body, profiles, cfg).code];
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptySample, "no records for class " + label.str());
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [code, c] : sorted)
    out.emplace_back(code, static_cast<double>(c) / static_cast<double>(n));
  return out;
}

TermRanking bow_ranking(const std::vector<corpus::CleanComment>& records, MbtiType label,
                        const BowConfig& cfg, const std::vector<LanguageProfile>& profiles) {
  const auto stopwords = features::Lexicon::english();
  std::map<std::string, std::size_t> stem_counts;
  std::map<std::string, std::map<std::string, std::size_t>> surface;
  std::size_t total = 0;
  std::size_t docs = 0;
  for (const auto& r : records) {
    if (r.comment.label != label) continue;
    ++docs;
    if (cfg.english_only && detect_language(r.comment.body, profiles).code != "en") continue;
    for (const auto& tok : features::remove_stopwords(features::tokenize(r.comment.body, cfg.tokenizer), stopwords)) {
      auto s = features::stem(tok);
      ++stem_counts[s];
      ++surface[s][tok];
      ++total;
    }
  }
  if (docs == 0) throw Error(ErrorCode::EmptySample, "no records for class " + label.str());

  TermRanking out;
  out.label = label.str();
  for (const auto& [s, c] : stem_counts) {
    const auto& forms = surface[s];
    auto best = std::max_element(forms.begin(), forms.end(), [](const auto& a, const auto& b) {
      return a.second < b.second;  // first maximum wins, so ties go to the smaller form
    });
    out.terms.push_back({best->first, s, c, static_cast<double>(c) / static_cast<double>(total)});
  }
  std::stable_sort(out.terms.begin(), out.terms.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  if (out.terms.size() > cfg.top_k) out.terms.resize(cfg.top_k);
  return out;
}

std::string distribution_csv(const std::vector<std::pair<std::string, double>>& dist) {
  std::string out = "language,fraction\n";
  for (const auto& [code, f] : dist) out += code + "," + io::format_double(f) + "\n";
  return out;
}

std::string ranking_csv(const TermRanking& r) {
  std::string out = "term,stem,count,share\n";
  for (const auto& t : r.terms)
    out += io::csv_escape(t.term) + "," + io::csv_escape(t.stem) + "," + std::to_string(t.count) + "," +
           io::format_double(t.share) + "\n";
  return out;
}

std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars,
                          std::string_view title) {
  double vmax = 0.0;
  for (const auto& b : bars) vmax = std::max(vmax, b.second);
  const int row = 18;
  const int label_w = 110;
  const int bar_w = 300;
  const int height = 30 + static_cast<int>(bars.size()) * row;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(label_w + bar_w + 80) +
                    "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<text x=\"4\" y=\"14\" font-size=\"12\">" + std::string(title) + "</text>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const int y = 24 + static_cast<int>(i) * row;
    const int w = vmax > 0.0 ? static_cast<int>(bars[i].second / vmax * bar_w) : 0;
    char value[32];
    std::snprintf(value, sizeof value, "%.4g", bars[i].second);
    svg += "<text x=\"" + std::to_string(label_w - 4) + "\" y=\"" + std::to_string(y + 12) +
           "\" text-anchor=\"end\">" + bars[i].first + "</text>\n";
    svg += "<rect x=\"" + std::to_string(label_w) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
           std::to_string(w) + "\" height=\"" + std::to_string(row - 4) + "\" fill=\"#4a78b5\"/>\n";
    svg += "<text x=\"" + std::to_string(label_w + w + 4) + "\" y=\"" + std::to_string(y + 12) + "\">" +
           value + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace mbti::analysis
