#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "mbti/analysis.hpp"
#include "mbti/classify.hpp"
#include "mbti/cli.hpp"
#include "mbti/corpus.hpp"
#include "mbti/error.hpp"
#include "mbti/evaluate.hpp"
#include "mbti/features.hpp"
#include "mbti/label_algebra.hpp"
#include "mbti/sampling.hpp"
#include "mbti/synth.hpp"

namespace py = pybind11;
using nlohmann::json;

// Structured values cross the boundary as JSON text; the Python package
// decodes them.
PYBIND11_MODULE(_core, m) {
  m.doc() = "MBTI corpus-to-classifier toolkit core";

  py::register_exception<mbti::Error>(m, "MbtiError", PyExc_ValueError);

  m.def("version", [] { return std::string(MBTI_VERSION); });

  m.def("parse_type", [](const std::string& s) { return mbti::parse_type(s).str(); });
  m.def("opposite_type", [](const std::string& s) { return mbti::opposite_type(mbti::parse_type(s)).str(); });
  m.def("function_stack", [](const std::string& s) {
    std::vector<std::string> out;
    for (const auto& f : mbti::function_stack(mbti::parse_type(s)).functions) out.push_back(f.str());
    return out;
  });
  m.def("project", [](const std::string& type, const std::string& space) {
    return mbti::project(mbti::parse_type(type), mbti::parse_granularity(space));
  });
  m.def("label_spaces_json", &mbti::label_spaces_json);

  m.def("mask_types", [](const std::string& text, const std::string& token) {
    auto r = mbti::corpus::mask_types(text, token);
    return std::make_pair(r.text, r.count);
  }, py::arg("text"), py::arg("token") = "[TYPE]");
  m.def("clean_json", [](const std::string& comment_json, std::size_t min_length, const std::string& token) {
    mbti::corpus::CleanConfig cfg;
    cfg.min_length = min_length;
    cfg.mask_token = token;
    const auto c = mbti::corpus::comment_from_json(json::parse(comment_json));
    const auto r = mbti::corpus::clean(c, cfg);
    if (const auto* rule = std::get_if<mbti::corpus::RejectRule>(&r))
      return json{{"rejected", mbti::corpus::rule_name(*rule)}}.dump();
    return json{{"record", mbti::corpus::to_json(std::get<mbti::corpus::CleanComment>(r))}}.dump();
  }, py::arg("comment_json"), py::arg("min_length") = 50, py::arg("token") = "[TYPE]");

  m.def("tokenize", [](const std::string& text, bool lowercase, bool strip_urls, bool strip_emoji) {
    mbti::features::TokenizerConfig cfg;
    cfg.lowercase = lowercase;
    cfg.strip_urls = strip_urls;
    cfg.strip_emoji = strip_emoji;
    return mbti::features::tokenize(text, cfg);
  }, py::arg("text"), py::arg("lowercase") = true, py::arg("strip_urls") = true, py::arg("strip_emoji") = false);
  m.def("stem", [](const std::string& w) { return mbti::features::stem(w); });
  m.def("pipeline_terms", [](const std::string& text) { return mbti::features::TextPipeline{}.terms(text); });

  m.def("detect_language", [](const std::string& text) {
    static const auto profiles = mbti::analysis::default_profiles();
    auto d = mbti::analysis::detect_language(text, profiles);
    return std::make_pair(d.code, d.confidence);
  });

  m.def("split_sizes", [](std::size_t n, double train, double dev, double test) {
    const auto s = mbti::sampling::split_sizes(n, {train, dev, test});
    return std::vector<std::size_t>(s.begin(), s.end());
  }, py::arg("n"), py::arg("train") = 0.64, py::arg("dev") = 0.16, py::arg("test") = 0.20);

  m.def("score_csv", [](const std::string& csv) {
    return mbti::evaluate::score(mbti::classify::PredictionSet::from_csv(csv)).report.to_json().dump();
  });
  m.def("merge_csv", [](const std::string& csv, const std::string& space, const std::string& mode) {
    const auto p = mbti::classify::PredictionSet::from_csv(csv, mbti::Granularity::Full16);
    return mbti::evaluate::merge_predictions(p, mbti::parse_granularity(space), mbti::evaluate::parse_merge_mode(mode))
        .to_csv();
  }, py::arg("csv"), py::arg("space"), py::arg("mode") = "argmax-map");

  m.def("synth_jsonl", [](double distinctiveness, std::size_t docs_per_class, std::uint64_t seed) {
    mbti::synth::SynthSpec spec;
    spec.distinctiveness = distinctiveness;
    spec.docs_per_class = docs_per_class;
    spec.seed = seed;
    return mbti::corpus::to_jsonl(mbti::synth::generate(spec));
  }, py::arg("distinctiveness") = 0.5, py::arg("docs_per_class") = 100, py::arg("seed") = 0);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = mbti::cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
