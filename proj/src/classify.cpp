#include "mbti/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mbti/error.hpp"
#include "mbti/io.hpp"
#include "mbti/rng.hpp"

namespace mbti::classify {

using nlohmann::json;

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (auto& v : out) {
    v = std::exp(v - mx);
    z += v;
  }
  for (auto& v : out) v /= z;
  return out;
}

namespace {

void check_labels(std::span<const int> y, std::size_t n_labels, std::size_t n_examples) {
  if (y.size() != n_examples)
    throw Error(ErrorCode::InvalidArgument, "label count does not match example count");
  for (int label : y)
    if (label < 0 || static_cast<std::size_t>(label) >= n_labels)
      throw Error(ErrorCode::LabelOutsideSpace, "label index out of range: " + std::to_string(label));
}

std::size_t common_dim(std::span<const SparseVector> x) {
  if (x.empty()) throw Error(ErrorCode::InvalidArgument, "no training examples");
  const std::size_t dim = x.front().dim;
  for (const auto& v : x)
    if (v.dim != dim)
      throw Error(ErrorCode::DimensionMismatch, "training vectors have different dimensions");
  return dim;
}

}  // namespace

NbModel train_nb(std::span<const SparseVector> x, std::span<const int> y, Granularity space,
                 double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
  const LabelSpace labels(space);
  const std::size_t n_labels = labels.size();
  const std::size_t dim = common_dim(x);
  check_labels(y, n_labels, x.size());

  std::vector<std::size_t> docs(n_labels, 0);
  std::vector<std::vector<double>> counts(n_labels, std::vector<double>(dim, 0.0));
  std::vector<double> totals(n_labels, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    ++docs[c];
    for (const auto& [idx, val] : x[i].entries) {
      counts[c][idx] += val;
      totals[c] += val;
    }
  }

  std::string missing;
  for (std::size_t c = 0; c < n_labels; ++c) {
    if (docs[c] > 0) continue;
    if (!missing.empty()) missing += ", ";
    missing += labels.label(c);
  }
  if (!missing.empty())
    throw Error(ErrorCode::MissingClass, "no training examples for: " + missing);

  NbModel m;
  m.space = space;
  m.alpha = alpha;
  m.dim = dim;
  m.log_prior.resize(n_labels);
  m.log_likelihood.assign(n_labels, std::vector<double>(dim, 0.0));
  const auto n = static_cast<double>(x.size());
  for (std::size_t c = 0; c < n_labels; ++c) {
    m.log_prior[c] = std::log(static_cast<double>(docs[c]) / n);
    const double denom = totals[c] + alpha * static_cast<double>(dim);
    for (std::size_t t = 0; t < dim; ++t)
      m.log_likelihood[c][t] = std::log((counts[c][t] + alpha) / denom);
  }
  return m;
}

std::vector<double> nb_scores(const NbModel& m, const SparseVector& v) {
  if (v.dim != m.dim)
    throw Error(ErrorCode::DimensionMismatch, "vector dimension " + std::to_string(v.dim) +
                                                  " does not match model dimension " +
                                                  std::to_string(m.dim));
  std::vector<double> logits = m.log_prior;
  for (std::size_t c = 0; c < logits.size(); ++c)
    for (const auto& [idx, val] : v.entries) logits[c] += val * m.log_likelihood[c][idx];
  return softmax(logits);
}

double logreg_objective(std::span<const double> weights, std::span<const double> bias,
                        std::size_t dim, std::span<const SparseVector> x, std::span<const int> y,
                        std::vector<double>* grad_w, std::vector<double>* grad_b) {
  const std::size_t n_labels = bias.size();
  if (weights.size() != n_labels * dim)
    throw Error(ErrorCode::DimensionMismatch, "weight matrix shape mismatch");
  check_labels(y, n_labels, x.size());
  if (grad_w) grad_w->assign(weights.size(), 0.0);
  if (grad_b) grad_b->assign(n_labels, 0.0);
  if (x.empty()) return 0.0;

  const double inv_n = 1.0 / static_cast<double>(x.size());
  double loss = 0.0;
  std::vector<double> logits(n_labels);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].dim != dim) throw Error(ErrorCode::DimensionMismatch, "example dimension mismatch");
    for (std::size_t c = 0; c < n_labels; ++c) {
      double z = bias[c];
      for (const auto& [idx, val] : x[i].entries) z += weights[c * dim + idx] * val;
      logits[c] = z;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    for (double z : logits) lse += std::exp(z - mx);
    lse = mx + std::log(lse);
    const auto gold = static_cast<std::size_t>(y[i]);
    loss += (lse - logits[gold]) * inv_n;
    if (!grad_w && !grad_b) continue;
    for (std::size_t c = 0; c < n_labels; ++c) {
      const double d = (std::exp(logits[c] - lse) - (c == gold ? 1.0 : 0.0)) * inv_n;
      if (grad_b) (*grad_b)[c] += d;
      if (grad_w)
        for (const auto& [idx, val] : x[i].entries) (*grad_w)[c * dim + idx] += d * val;
    }
  }
  return loss;
}

LogRegModel train_logreg(std::span<const SparseVector> x, std::span<const int> y,
                         Granularity space, const LogRegConfig& cfg, std::optional<DevSet> dev) {
  if (!(cfg.lr > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");
  if (cfg.epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (cfg.batch < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
  const std::size_t n_labels = LabelSpace(space).size();
  const std::size_t dim = common_dim(x);
  check_labels(y, n_labels, x.size());

  LogRegModel m;
  m.space = space;
  m.dim = dim;
  m.config = cfg;
  m.weights.assign(n_labels * dim, 0.0);
  m.bias.assign(n_labels, 0.0);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> logits(n_labels);
  std::vector<std::vector<double>> deltas;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      const double step = cfg.lr / static_cast<double>(end - start);
      // Residuals for the whole batch are taken at the pre-update weights.
      deltas.assign(end - start, std::vector<double>(n_labels));
      for (std::size_t k = start; k < end; ++k) {
        const auto& v = x[order[k]];
        for (std::size_t c = 0; c < n_labels; ++c) {
          double z = m.bias[c];
          for (const auto& [idx, val] : v.entries) z += m.weights[c * dim + idx] * val;
          logits[c] = z;
        }
        auto p = softmax(logits);
        p[static_cast<std::size_t>(y[order[k]])] -= 1.0;
        deltas[k - start] = std::move(p);
      }
      for (std::size_t k = start; k < end; ++k) {
        const auto& v = x[order[k]];
        const auto& d = deltas[k - start];
        for (std::size_t c = 0; c < n_labels; ++c) {
          m.bias[c] -= step * d[c];
          for (const auto& [idx, val] : v.entries) m.weights[c * dim + idx] -= step * d[c] * val;
        }
      }
    }
    const double loss = logreg_objective(m.weights, m.bias, dim, x, y);
    if (!std::isfinite(loss))
      throw Error(ErrorCode::Divergence, "training loss became non-finite at epoch " + std::to_string(epoch));
    m.train_loss.push_back(loss);
    if (dev && !dev->x.empty()) m.dev_loss.push_back(logreg_objective(m.weights, m.bias, dim, dev->x, dev->y));
  }
  return m;
}

std::vector<double> logreg_scores(const LogRegModel& m, const SparseVector& v) {
  if (v.dim != m.dim)
    throw Error(ErrorCode::DimensionMismatch, "vector dimension " + std::to_string(v.dim) +
                                                  " does not match model dimension " +
                                                  std::to_string(m.dim));
  std::vector<double> logits = m.bias;
  for (std::size_t c = 0; c < logits.size(); ++c)
    for (const auto& [idx, val] : v.entries) logits[c] += m.weights[c * m.dim + idx] * val;
  return softmax(logits);
}

// ---------------------------------------------------------------------------
// Prediction CSV

std::string PredictionSet::to_csv() const {
  const LabelSpace labels(space);
  std::string out = "id,gold,predicted";
  for (const auto& l : labels.labels()) out += "," + io::csv_escape(l);
  out += '\n';
  for (const auto& r : records) {
    out += io::csv_escape(r.id);
    out += ',';
    if (r.gold >= 0) out += labels.label(static_cast<std::size_t>(r.gold));
    out += ',';
    out += labels.label(static_cast<std::size_t>(r.predicted));
    for (double s : r.scores) out += "," + io::format_double(s);
    out += '\n';
  }
  return out;
}

PredictionSet PredictionSet::from_csv(std::string_view text, std::optional<Granularity> space) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      std::string line(text.substr(start, nl - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(std::move(line));
      start = nl + 1;
    }
  }
  if (lines.empty()) throw Error(ErrorCode::Schema, "prediction CSV is empty");
  const auto header = io::csv_split(lines[0]);
  if (header.size() < 4 || header[0] != "id" || header[1] != "gold" || header[2] != "predicted")
    throw Error(ErrorCode::Schema, "prediction CSV header must start with id,gold,predicted");
  const std::vector<std::string> label_cols(header.begin() + 3, header.end());

  std::optional<Granularity> found;
  for (auto g : kAllGranularities)
    if (LabelSpace(g).labels() == label_cols) found = g;
  if (!found) throw Error(ErrorCode::Schema, "score columns do not match any label space in canonical order");
  if (space && *space != *found)
    throw Error(ErrorCode::SpaceMismatch, "prediction CSV is in space " +
                                              std::string(granularity_name(*found)) + ", expected " +
                                              std::string(granularity_name(*space)));

  PredictionSet set;
  set.space = *found;
  const LabelSpace labels(*found);
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto fields = io::csv_split(lines[n]);
    const std::string where = "prediction CSV row " + std::to_string(n + 1);
    if (fields.size() != header.size())
      throw Error(ErrorCode::Schema, where + ": expected " + std::to_string(header.size()) + " fields");
    PredictionRecord r;
    r.id = fields[0];
    if (r.id.empty()) throw Error(ErrorCode::Schema, where + ": empty id");
    if (!fields[1].empty()) {
      r.gold = labels.find(fields[1]);
      if (r.gold < 0)
        throw Error(ErrorCode::LabelOutsideSpace, "record '" + r.id + "': gold label '" + fields[1] +
                                                      "' is not in " + std::string(labels.name()));
    }
    r.predicted = labels.find(fields[2]);
    if (r.predicted < 0)
      throw Error(ErrorCode::LabelOutsideSpace, "record '" + r.id + "': predicted label '" +
                                                    fields[2] + "' is not in " +
                                                    std::string(labels.name()));
    double sum = 0.0;
    for (std::size_t k = 3; k < fields.size(); ++k) {
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(fields[k], &used);
        if (used != fields[k].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw Error(ErrorCode::Schema, where + ": score '" + fields[k] + "' is not a number");
      }
      if (!std::isfinite(v) || v < 0.0)
        throw Error(ErrorCode::Schema, where + ": scores must be finite and non-negative");
      sum += v;
      r.scores.push_back(v);
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw Error(ErrorCode::Schema, where + ": scores sum to " + io::format_double(sum));
    set.records.push_back(std::move(r));
  }
  return set;
}

PredictionSet PredictionSet::read(const std::filesystem::path& path, std::optional<Granularity> space) {
  return from_csv(io::read_file(path), space);
}

// ---------------------------------------------------------------------------
// Model container

Model::Model(Impl impl, features::TextPipeline pipeline, features::Vocabulary vocab, json manifest)
    : impl_(std::move(impl)),
      pipeline_(std::move(pipeline)),
      vocab_(std::move(vocab)),
      manifest_(std::move(manifest)) {}

Granularity Model::space() const {
  return std::visit([](const auto& m) { return m.space; }, impl_);
}

std::string_view Model::kind() const {
  return std::holds_alternative<NbModel>(impl_) ? "nb" : "logreg";
}

std::vector<double> Model::scores(const SparseVector& v) const {
  if (v.dim != vocab_.size())
    throw Error(ErrorCode::DimensionMismatch, "vector dimension " + std::to_string(v.dim) +
                                                  " does not match vocabulary size " +
                                                  std::to_string(vocab_.size()));
  if (const auto* nb = std::get_if<NbModel>(&impl_)) return nb_scores(*nb, v);
  return logreg_scores(std::get<LogRegModel>(impl_), v);
}

SparseVector Model::featurize(std::string_view text) const {
  return features::vectorize(pipeline_.terms(text), vocab_);
}

PredictionRecord Model::predict(std::string id, int gold, const SparseVector& v) const {
  PredictionRecord r;
  r.id = std::move(id);
  r.gold = gold;
  r.scores = scores(v);
  r.predicted = static_cast<int>(argmax(r.scores));
  return r;
}

std::string Model::to_json_text() const {
  json j;
  j["format"] = "mbti-model";
  j["version"] = 1;
  j["kind"] = kind();
  j["space"] = granularity_name(space());
  j["labels"] = LabelSpace(space()).labels();
  j["manifest"] = manifest_;
  j["pipeline"] = pipeline_.to_json();
  json vocab = json::array();
  for (std::size_t i = 0; i < vocab_.size(); ++i) vocab.push_back({vocab_.term(i), vocab_.df(i)});
  j["vocabulary"] = std::move(vocab);
  if (const auto* nb = std::get_if<NbModel>(&impl_)) {
    j["params"] = {{"alpha", nb->alpha},
                   {"log_prior", nb->log_prior},
                   {"log_likelihood", nb->log_likelihood}};
  } else {
    const auto& lr = std::get<LogRegModel>(impl_);
    j["params"] = {{"lr", lr.config.lr},
                   {"epochs", lr.config.epochs},
                   {"batch", lr.config.batch},
                   {"seed", lr.config.seed},
                   {"weights", lr.weights},
                   {"bias", lr.bias},
                   {"train_loss", lr.train_loss},
                   {"dev_loss", lr.dev_loss}};
  }
  return j.dump() + "\n";
}

Model Model::from_json_text(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "mbti-model" || j.at("version") != 1)
      throw Error(ErrorCode::Schema, "not an mbti-model v1 file");
    const Granularity space = parse_granularity(j.at("space").get<std::string>());
    std::string vocab_text;
    std::size_t i = 0;
    for (const auto& e : j.at("vocabulary"))
      vocab_text += e.at(0).get<std::string>() + '\t' + std::to_string(i++) + '\t' +
                    std::to_string(e.at(1).get<std::size_t>()) + '\n';
    auto vocab = features::Vocabulary::from_text(vocab_text);
    auto pipeline = features::TextPipeline::from_json(j.at("pipeline"));
    const auto& p = j.at("params");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "nb") {
      NbModel m;
      m.space = space;
      m.alpha = p.at("alpha").get<double>();
      m.dim = vocab.size();
      m.log_prior = p.at("log_prior").get<std::vector<double>>();
      m.log_likelihood = p.at("log_likelihood").get<std::vector<std::vector<double>>>();
      return Model(std::move(m), std::move(pipeline), std::move(vocab), j.value("manifest", json::object()));
    }
    if (kind == "logreg") {
      LogRegModel m;
      m.space = space;
      m.dim = vocab.size();
      m.config.lr = p.at("lr").get<double>();
      m.config.epochs = p.at("epochs").get<int>();
      m.config.batch = p.at("batch").get<std::size_t>();
      m.config.seed = p.at("seed").get<std::uint64_t>();
      m.weights = p.at("weights").get<std::vector<double>>();
      m.bias = p.at("bias").get<std::vector<double>>();
      m.train_loss = p.at("train_loss").get<std::vector<double>>();
      m.dev_loss = p.at("dev_loss").get<std::vector<double>>();
      if (m.weights.size() != m.bias.size() * m.dim)
        throw Error(ErrorCode::Schema, "weight matrix does not match vocabulary");
      return Model(std::move(m), std::move(pipeline), std::move(vocab), j.value("manifest", json::object()));
    }
    throw Error(ErrorCode::Schema, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("bad model file: ") + e.what());
  }
}

void Model::save(const std::filesystem::path& path) const { io::write_file(path, to_json_text()); }

Model Model::load(const std::filesystem::path& path) { return from_json_text(io::read_file(path)); }

namespace {

std::vector<const corpus::CleanComment*> select(const std::vector<corpus::CleanComment>& records,
                                                const std::vector<std::string>& ids) {
  std::vector<const corpus::CleanComment*> out;
  if (ids.empty()) {
    for (const auto& r : records) out.push_back(&r);
    return out;
  }
  std::map<std::string_view, const corpus::CleanComment*> by_id;
  for (const auto& r : records) by_id.emplace(r.comment.id, &r);
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::Schema, "id '" + id + "' not found in sample");
    out.push_back(it->second);
  }
  return out;
}

int gold_index(const corpus::CleanComment& r, const LabelSpace& labels) {
  return r.comment.label ? labels.index_of(*r.comment.label) : -1;
}

}  // namespace

PredictionSet predict_batch(const Model& model, const std::vector<corpus::CleanComment>& records,
                            const std::vector<std::string>& ids) {
  PredictionSet set;
  set.space = model.space();
  const LabelSpace labels(set.space);
  for (const auto* r : select(records, ids))
    set.records.push_back(
        model.predict(r->comment.id, gold_index(*r, labels), model.featurize(r->comment.body)));
  return set;
}

PredictionRecord compose_axis_scores(std::string id, int gold,
                                     const std::array<std::vector<double>, 4>& axis_scores) {
  std::string code;
  for (std::size_t a = 0; a < 4; ++a) {
    const LabelSpace axis(kAxes[a]);
    if (axis_scores[a].size() != axis.size())
      throw Error(ErrorCode::DimensionMismatch, "axis score vector must have 2 entries");
    code += axis.label(argmax(axis_scores[a]));
  }
  const LabelSpace full(Granularity::Full16);
  PredictionRecord r;
  r.id = std::move(id);
  r.gold = gold;
  r.scores.assign(16, 1.0);
  double z = 0.0;
  for (std::size_t t = 0; t < 16; ++t) {
    const auto type = MbtiType::from_index(static_cast<int>(t));
    for (std::size_t a = 0; a < 4; ++a)
      r.scores[t] *= axis_scores[a][static_cast<std::size_t>(LabelSpace(kAxes[a]).index_of(type))];
    z += r.scores[t];
  }
  if (z > 0.0) {
    for (auto& s : r.scores) s /= z;
  } else {
    r.scores.assign(16, 1.0 / 16.0);
  }
  r.predicted = full.find(code);
  return r;
}

namespace {

std::array<const Model*, 4> order_axes(std::span<const Model* const> models) {
  std::array<const Model*, 4> by_axis{};
  for (const Model* m : models) {
    bool placed = false;
    for (std::size_t a = 0; a < 4; ++a) {
      if (m && m->space() == kAxes[a]) {
        if (by_axis[a])
          throw Error(ErrorCode::InvalidArgument,
                      "two models for " + std::string(granularity_name(kAxes[a])));
        by_axis[a] = m;
        placed = true;
      }
    }
    if (!placed)
      throw Error(ErrorCode::InvalidArgument, "ensemble member is not a binary axis model");
  }
  std::string missing;
  for (std::size_t a = 0; a < 4; ++a) {
    if (by_axis[a]) continue;
    if (!missing.empty()) missing += ", ";
    missing += granularity_name(kAxes[a]);
  }
  if (!missing.empty()) throw Error(ErrorCode::MissingClass, "ensemble is missing axis models: " + missing);
  return by_axis;
}

}  // namespace

PredictionRecord compose_binary_ensemble(std::span<const Model* const> models, std::string id,
                                         int gold, std::string_view text) {
  const auto by_axis = order_axes(models);
  std::array<std::vector<double>, 4> axis_scores;
  for (std::size_t a = 0; a < 4; ++a) axis_scores[a] = by_axis[a]->scores(by_axis[a]->featurize(text));
  return compose_axis_scores(std::move(id), gold, axis_scores);
}

PredictionSet predict_ensemble(std::span<const Model* const> models,
                               const std::vector<corpus::CleanComment>& records,
                               const std::vector<std::string>& ids) {
  order_axes(models);
  PredictionSet set;
  set.space = Granularity::Full16;
  const LabelSpace labels(Granularity::Full16);
  for (const auto* r : select(records, ids))
    set.records.push_back(
        compose_binary_ensemble(models, r->comment.id, gold_index(*r, labels), r->comment.body));
  return set;
}

}  // namespace mbti::classify
