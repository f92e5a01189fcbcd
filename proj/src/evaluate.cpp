#include "mbti/evaluate.hpp"

#include <algorithm>
#include <cstdio>

#include "mbti/error.hpp"
#include "mbti/io.hpp"

namespace mbti::evaluate {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(Granularity g)
    : space(g), counts(LabelSpace(g).size(), std::vector<std::size_t>(LabelSpace(g).size(), 0)) {}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts)
    for (auto v : row) t += v;
  return t;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.space != space) throw Error(ErrorCode::SpaceMismatch, "cannot merge confusion matrices of different spaces");
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < counts.size(); ++j) counts[i][j] += other.counts[i][j];
}

std::string ConfusionMatrix::to_csv() const {
  const LabelSpace labels(space);
  std::string out = "gold\\predicted";
  for (const auto& l : labels.labels()) out += "," + l;
  out += '\n';
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out += labels.label(i);
    for (auto v : counts[i]) out += "," + std::to_string(v);
    out += '\n';
  }
  return out;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const LabelSpace labels(cm.space);
  const std::size_t k = cm.size();
  MetricsReport r;
  r.space = cm.space;
  r.total = cm.total();
  r.chance = 1.0 / static_cast<double>(k);
  std::size_t trace = 0;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = cm.counts[c][c];
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += cm.counts[o][c];
      actual += cm.counts[c][o];
    }
    trace += tp;
    ClassMetrics m;
    m.label = labels.label(c);
    m.support = actual;
    m.precision_undefined = predicted == 0;
    m.recall_undefined = actual == 0;
    m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    f1_sum += m.f1;
    r.per_class.push_back(std::move(m));
  }
  r.macro_f1 = f1_sum / static_cast<double>(k);
  r.accuracy = r.total ? static_cast<double>(trace) / static_cast<double>(r.total) : 0.0;
  // Single-label: micro precision = micro recall = accuracy.
  r.micro_f1 = r.accuracy;
  return r;
}

json MetricsReport::to_json() const {
  json classes = json::array();
  for (const auto& c : per_class)
    classes.push_back({{"label", c.label},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support},
                       {"precision_undefined", c.precision_undefined},
                       {"recall_undefined", c.recall_undefined}});
  json j = {{"format", "mbti-metrics/1"},
            {"space", granularity_name(space)},
            {"total", total},
            {"f1", macro_f1},
            {"macro_f1", macro_f1},
            {"micro_f1", micro_f1},
            {"accuracy", accuracy},
            {"chance", chance},
            {"per_class", classes}};
  if (!merge_mode.empty()) j["merge_mode"] = merge_mode;
  return j;
}

MetricsReport MetricsReport::from_json(const json& j) {
  MetricsReport r;
  r.space = parse_granularity(j.at("space").get<std::string>());
  r.total = j.at("total").get<std::size_t>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.micro_f1 = j.at("micro_f1").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.chance = j.at("chance").get<double>();
  r.merge_mode = j.value("merge_mode", std::string());
  for (const auto& c : j.at("per_class")) {
    ClassMetrics m;
    m.label = c.at("label").get<std::string>();
    m.precision = c.at("precision").get<double>();
    m.recall = c.at("recall").get<double>();
    m.f1 = c.at("f1").get<double>();
    m.support = c.at("support").get<std::size_t>();
    m.precision_undefined = c.value("precision_undefined", false);
    m.recall_undefined = c.value("recall_undefined", false);
    r.per_class.push_back(std::move(m));
  }
  return r;
}

Scored score(const classify::PredictionSet& predictions) {
  ConfusionMatrix cm(predictions.space);
  const auto k = static_cast<int>(cm.size());
  for (const auto& r : predictions.records) {
    if (r.gold < 0 || r.gold >= k)
      throw Error(ErrorCode::LabelOutsideSpace, "record '" + r.id + "' has no gold label in " +
                                                    std::string(granularity_name(predictions.space)));
    if (r.predicted < 0 || r.predicted >= k)
      throw Error(ErrorCode::LabelOutsideSpace, "record '" + r.id + "' has a prediction outside " +
                                                    std::string(granularity_name(predictions.space)));
    cm.add(static_cast<std::size_t>(r.gold), static_cast<std::size_t>(r.predicted));
  }
  return {cm, metrics(cm)};
}

std::string_view merge_mode_name(MergeMode m) {
  return m == MergeMode::ArgmaxMap ? "argmax-map" : "score-sum";
}

MergeMode parse_merge_mode(std::string_view s) {
  if (s == "argmax-map") return MergeMode::ArgmaxMap;
  if (s == "score-sum") return MergeMode::ScoreSum;
  throw Error(ErrorCode::InvalidArgument, "unknown merge mode: " + std::string(s));
}

classify::PredictionSet merge_predictions(const classify::PredictionSet& full16, Granularity target,
                                          MergeMode mode) {
  if (full16.space != Granularity::Full16)
    throw Error(ErrorCode::SpaceMismatch, "merging needs full16 predictions");
  const LabelSpace to(target);
  std::array<int, 16> group{};
  for (int t = 0; t < 16; ++t) group[static_cast<std::size_t>(t)] = to.index_of(MbtiType::from_index(t));

  classify::PredictionSet out;
  out.space = target;
  out.records.reserve(full16.records.size());
  for (const auto& r : full16.records) {
    classify::PredictionRecord m;
    m.id = r.id;
    m.gold = r.gold >= 0 ? group[static_cast<std::size_t>(r.gold)] : -1;
    m.scores.assign(to.size(), 0.0);
    double z = 0.0;
    for (std::size_t t = 0; t < r.scores.size() && t < 16; ++t) {
      m.scores[static_cast<std::size_t>(group[t])] += r.scores[t];
      z += r.scores[t];
    }
    if (z > 0.0)
      for (auto& s : m.scores) s /= z;
    m.predicted = mode == MergeMode::ArgmaxMap ? group[static_cast<std::size_t>(r.predicted)]
                                               : static_cast<int>(classify::argmax(m.scores));
    out.records.push_back(std::move(m));
  }
  return out;
}

ConfusionMatrix block_sum(const ConfusionMatrix& full16, Granularity target) {
  if (full16.space != Granularity::Full16)
    throw Error(ErrorCode::SpaceMismatch, "block sums need a full16 matrix");
  const LabelSpace to(target);
  ConfusionMatrix out(target);
  for (int g = 0; g < 16; ++g)
    for (int p = 0; p < 16; ++p)
      out.add(static_cast<std::size_t>(to.index_of(MbtiType::from_index(g))),
              static_cast<std::size_t>(to.index_of(MbtiType::from_index(p))),
              full16.counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)]);
  return out;
}

Comparison compare(const MetricsReport& a, const MetricsReport& b, std::string name_a,
                   std::string name_b) {
  if (a.space != b.space)
    throw Error(ErrorCode::SpaceMismatch, "cannot compare " + std::string(granularity_name(a.space)) +
                                              " with " + std::string(granularity_name(b.space)));
  Comparison c;
  c.space = a.space;
  c.name_a = std::move(name_a);
  c.name_b = std::move(name_b);
  c.rows.push_back({"macro-F1", a.macro_f1, b.macro_f1, b.macro_f1 - a.macro_f1});
  c.rows.push_back({"accuracy", a.accuracy, b.accuracy, b.accuracy - a.accuracy});
  for (std::size_t i = 0; i < a.per_class.size() && i < b.per_class.size(); ++i)
    c.rows.push_back({a.per_class[i].label, a.per_class[i].f1, b.per_class[i].f1,
                      b.per_class[i].f1 - a.per_class[i].f1});
  return c;
}

json Comparison::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) rows_json.push_back({{"row", r.label}, {"a", r.a}, {"b", r.b}, {"delta", r.delta}});
  return {{"format", "mbti-comparison/1"},
          {"space", granularity_name(space)},
          {"a", name_a},
          {"b", name_b},
          {"rows", rows_json}};
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string signed_fixed(double v, int decimals) {
  std::string s = fixed(v, decimals);
  if (v >= 0.0 && s.front() != '-') s = "+" + s;
  return s;
}

}  // namespace

std::string Comparison::to_markdown() const {
  std::string out = "| " + std::string(granularity_name(space)) + " | " + name_a + " | " + name_b +
                    " | delta |\n|---|---:|---:|---:|\n";
  for (const auto& r : rows)
    out += "| " + r.label + " | " + fixed(r.a, 4) + " | " + fixed(r.b, 4) + " | " +
           signed_fixed(r.delta, 4) + " |\n";
  return out;
}

std::vector<std::vector<double>> heatmap_grid(const ConfusionMatrix& cm, Normalize n) {
  std::vector<std::vector<double>> grid(cm.size(), std::vector<double>(cm.size(), 0.0));
  for (std::size_t i = 0; i < cm.size(); ++i) {
    std::size_t row_total = 0;
    for (auto v : cm.counts[i]) row_total += v;
    for (std::size_t j = 0; j < cm.size(); ++j) {
      const auto v = static_cast<double>(cm.counts[i][j]);
      if (n == Normalize::None)
        grid[i][j] = v;
      else
        grid[i][j] = row_total ? v / static_cast<double>(row_total) : 0.0;
    }
  }
  return grid;
}

std::string heatmap_csv(const ConfusionMatrix& cm, Normalize n) {
  const LabelSpace labels(cm.space);
  const auto grid = heatmap_grid(cm, n);
  std::string out = "gold\\predicted";
  for (const auto& l : labels.labels()) out += "," + l;
  out += '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += labels.label(i);
    for (double v : grid[i]) out += "," + io::format_double(v);
    out += '\n';
  }
  return out;
}

std::string heatmap_svg(const ConfusionMatrix& cm, Normalize n, std::string_view title) {
  const LabelSpace labels(cm.space);
  const auto grid = heatmap_grid(cm, n);
  double vmax = 0.0;
  for (const auto& row : grid)
    for (double v : row) vmax = std::max(vmax, v);
  const int cell = 36;
  const int margin = 60;
  const int k = static_cast<int>(grid.size());
  const int size = margin + k * cell + 10;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) +
                    "\" height=\"" + std::to_string(size + 20) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  if (!title.empty())
    svg += "<text x=\"" + std::to_string(margin) + "\" y=\"14\" font-size=\"12\">" + std::string(title) + "</text>\n";
  for (int i = 0; i < k; ++i) {
    const auto& lab = labels.label(static_cast<std::size_t>(i));
    svg += "<text x=\"" + std::to_string(margin - 4) + "\" y=\"" +
           std::to_string(margin + 20 + i * cell + cell / 2) + "\" text-anchor=\"end\">" + lab + "</text>\n";
    svg += "<text x=\"" + std::to_string(margin + i * cell + cell / 2) + "\" y=\"" +
           std::to_string(margin + 14) + "\" text-anchor=\"middle\">" + lab + "</text>\n";
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double v = grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const double t = vmax > 0.0 ? v / vmax : 0.0;
      const int shade = 255 - static_cast<int>(t * 215.0);
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      const int x = margin + j * cell;
      const int y = margin + 20 + i * cell;
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
             std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" + fill +
             "\" stroke=\"#ccc\"/>\n";
      svg += "<text x=\"" + std::to_string(x + cell / 2) + "\" y=\"" + std::to_string(y + cell / 2 + 3) +
             "\" text-anchor=\"middle\">" + (n == Normalize::Row ? fixed(v, 2) : fixed(v, 0)) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace mbti::evaluate
