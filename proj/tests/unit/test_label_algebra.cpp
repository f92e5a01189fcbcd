#include "doctest.h"

#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "mbti/error.hpp"
#include "mbti/label_algebra.hpp"

using namespace mbti;

namespace {

// Stacks derived by hand from the letter rules, one row per type.
const std::map<std::string, std::vector<std::string>> kHandStacks = {
    {"ENFJ", {"Fe", "Ni", "Se", "Ti"}}, {"ENFP", {"Ne", "Fi", "Te", "Si"}},
    {"ENTJ", {"Te", "Ni", "Se", "Fi"}}, {"ENTP", {"Ne", "Ti", "Fe", "Si"}},
    {"ESFJ", {"Fe", "Si", "Ne", "Ti"}}, {"ESFP", {"Se", "Fi", "Te", "Ni"}},
    {"ESTJ", {"Te", "Si", "Ne", "Fi"}}, {"ESTP", {"Se", "Ti", "Fe", "Ni"}},
    {"INFJ", {"Ni", "Fe", "Ti", "Se"}}, {"INFP", {"Fi", "Ne", "Si", "Te"}},
    {"INTJ", {"Ni", "Te", "Fi", "Se"}}, {"INTP", {"Ti", "Ne", "Si", "Fe"}},
    {"ISFJ", {"Si", "Fe", "Ti", "Ne"}}, {"ISFP", {"Fi", "Se", "Ni", "Te"}},
    {"ISTJ", {"Si", "Te", "Fi", "Ne"}}, {"ISTP", {"Ti", "Se", "Ni", "Fe"}},
};

std::vector<std::string> render(const FunctionStack& s) {
  std::vector<std::string> out;
  for (const auto& f : s.functions) out.push_back(f.str());
  return out;
}

}  // namespace

TEST_CASE("parse_type accepts the 16 codes case-insensitively") {
  const auto t = parse_type("INTP");
  CHECK(t.attitude() == Attitude::Introverted);
  CHECK(t.perceiving_pref() == Perceiving::Intuition);
  CHECK(t.judging_pref() == Judging::Thinking);
  CHECK(t.orientation() == Orientation::Perceiving);
  const auto e = parse_type("esfj");
  CHECK(e.str() == "ESFJ");
  CHECK(parse_type("  Infj \n").str() == "INFJ");
  for (const auto& x : MbtiType::all()) CHECK(parse_type(x.str()) == x);
}

TEST_CASE("parse_type rejects anything else with a position") {
  for (const char* bad : {"INXP", "", "INT", "INTPS", "I-TP", "IN TP", "ENTP!"}) {
    try {
      parse_type(bad);
      FAIL("accepted " << bad);
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::InvalidTypeCode);
    }
  }
  try {
    parse_type("INXP");
  } catch (const Error& err) {
    CHECK(std::string(err.what()).find("position 2") != std::string::npos);
  }
  MbtiType out;
  CHECK_FALSE(try_parse_type("INXP", out));
  CHECK(try_parse_type("intj", out));
  CHECK(out.str() == "INTJ");
}

TEST_CASE("exactly 16 distinct types in canonical order") {
  std::set<std::string> names;
  int i = 0;
  for (const auto& t : MbtiType::all()) {
    CHECK(t.index() == i);
    CHECK(MbtiType::from_index(i) == t);
    names.insert(t.str());
    ++i;
  }
  CHECK(names.size() == 16);
  CHECK(std::is_sorted(names.begin(), names.end()));
  CHECK(MbtiType::all().front().str() == "ENFJ");
  CHECK(MbtiType::all().back().str() == "ISTP");
}

TEST_CASE("cognitive functions: 8 values with two-letter names") {
  std::set<std::string> names;
  for (auto k : {FunctionKind::Thinking, FunctionKind::Feeling, FunctionKind::Sensing, FunctionKind::Intuition})
    for (auto d : {Attitude::Introverted, Attitude::Extroverted}) names.insert(CognitiveFunction{k, d}.str());
  CHECK(names == std::set<std::string>{"Fe", "Fi", "Ne", "Ni", "Se", "Si", "Te", "Ti"});
  CHECK(opposite(CognitiveFunction{FunctionKind::Thinking, Attitude::Introverted}).str() == "Fe");
  CHECK(opposite(CognitiveFunction{FunctionKind::Intuition, Attitude::Extroverted}).str() == "Si");
}

TEST_CASE("function stacks: table rows and hand derivation") {
  CHECK(render(function_stack(parse_type("ESFJ"))) == std::vector<std::string>{"Fe", "Si", "Ne", "Ti"});
  CHECK(render(function_stack(parse_type("INTP"))) == std::vector<std::string>{"Ti", "Ne", "Si", "Fe"});
  CHECK(render(function_stack(parse_type("ENFP"))) == std::vector<std::string>{"Ne", "Fi", "Te", "Si"});
  for (const auto& [code, stack] : kHandStacks) {
    CAPTURE(code);
    CHECK(render(function_stack(parse_type(code))) == stack);
  }
}

TEST_CASE("function stack invariants hold for all 16 types") {
  for (const auto& t : MbtiType::all()) {
    const auto s = function_stack(t);
    CAPTURE(t.str());
    CHECK(is_well_formed(s));
    CHECK(s.tertiary() == opposite(s.auxiliary()));
    CHECK(s.inferior() == opposite(s.dominant()));
    CHECK(s.dominant().direction != s.auxiliary().direction);
    CHECK(s.dominant().is_perceiving() != s.auxiliary().is_perceiving());
    // IE axis equals the dominant's direction.
    CHECK(project(t, Granularity::AxisIE) == (s.dominant().direction == Attitude::Introverted ? "I" : "E"));
  }
  FunctionStack broken = function_stack(parse_type("INTP"));
  std::swap(broken.functions[2], broken.functions[3]);
  CHECK_FALSE(is_well_formed(broken));
}

TEST_CASE("label spaces: sizes, projections and partitions") {
  const std::map<Granularity, std::size_t> sizes = {
      {Granularity::Full16, 16}, {Granularity::Dominant8, 8}, {Granularity::FirstTwo8, 8},
      {Granularity::AxisIE, 2},  {Granularity::AxisNS, 2},    {Granularity::AxisTF, 2},
      {Granularity::AxisPJ, 2}};
  for (auto g : kAllGranularities) {
    LabelSpace space(g);
    CHECK(space.size() == sizes.at(g));
    CHECK(std::is_sorted(space.labels().begin(), space.labels().end()));
    std::map<std::string, int> group_sizes;
    for (const auto& t : MbtiType::all()) {
      const auto label = project(t, g);
      CHECK(space.find(label) == space.index_of(t));
      ++group_sizes[label];
    }
    CHECK(group_sizes.size() == space.size());
    for (const auto& [label, n] : group_sizes) CHECK(n == static_cast<int>(16 / space.size()));
    CHECK(parse_granularity(granularity_name(g)) == g);
  }
  CHECK(project(parse_type("INTP"), Granularity::Dominant8) == "Ti");
  CHECK(project(parse_type("ENFP"), Granularity::FirstTwo8) == "FiNe");
  CHECK(project(parse_type("INFP"), Granularity::FirstTwo8) == "FiNe");
  CHECK(project(parse_type("INTP"), Granularity::AxisIE) == "I");
  CHECK(project(parse_type("ESFJ"), Granularity::AxisPJ) == "J");
  CHECK(project(parse_type("INTP"), Granularity::Full16) == "INTP");
  CHECK(LabelSpace(Granularity::FirstTwo8).labels() ==
        std::vector<std::string>{"FeNi", "FeSi", "FiNe", "FiSe", "NeTi", "NiTe", "SeTi", "SiTe"});
  CHECK(LabelSpace(Granularity::Dominant8).labels() ==
        std::vector<std::string>{"Fe", "Fi", "Ne", "Ni", "Se", "Si", "Te", "Ti"});
  CHECK(LabelSpace(Granularity::AxisIE).labels() == std::vector<std::string>{"E", "I"});
  CHECK(LabelSpace(Granularity::AxisTF).labels() == std::vector<std::string>{"F", "T"});
  CHECK(LabelSpace(Granularity::AxisIE).find("X") == -1);
}

TEST_CASE("group pairing rules") {
  // Dominant8 pairs differ only in the auxiliary's letter (T/F when the
  // dominant perceives, N/S when it judges); FirstTwo8 pairs only in I/E.
  for (const auto& a : MbtiType::all())
    for (const auto& b : MbtiType::all()) {
      if (a == b) continue;
      const auto sa = a.str(), sb = b.str();
      const bool dom_perceives = (sa[0] == 'E') == (sa[3] == 'P');
      const bool only_aux = sa[0] == sb[0] && sa[3] == sb[3] &&
                            (dom_perceives ? (sa[1] == sb[1] && sa[2] != sb[2])
                                           : (sa[1] != sb[1] && sa[2] == sb[2]));
      const bool only_ie = sa[0] != sb[0] && sa.substr(1) == sb.substr(1);
      CHECK((project(a, Granularity::Dominant8) == project(b, Granularity::Dominant8)) == only_aux);
      CHECK((project(a, Granularity::FirstTwo8) == project(b, Granularity::FirstTwo8)) == only_ie);
    }
}

TEST_CASE("opposite_type") {
  CHECK(opposite_type(parse_type("INTP")).str() == "ESFJ");
  CHECK(opposite_type(parse_type("ENFJ")).str() == "ISTP");
  for (const auto& t : MbtiType::all()) {
    CHECK(opposite_type(opposite_type(t)) == t);
    const auto s = function_stack(t);
    const auto o = function_stack(opposite_type(t));
    for (int i = 0; i < 4; ++i) {
      CHECK(o.functions[i] == opposite(s.functions[i]));
      CHECK(o.functions[i] == s.functions[3 - i]);
    }
    CHECK(project(t, Granularity::FirstTwo8) != project(opposite_type(t), Granularity::FirstTwo8));
  }
}

TEST_CASE("label-space JSON export") {
  const auto j = nlohmann::json::parse(label_spaces_json());
  CHECK(j.size() == 7);
  CHECK(j["full16"].size() == 16);
  CHECK(j["full16"][0] == "ENFJ");
  CHECK(j["dominant8"] == nlohmann::json({"Fe", "Fi", "Ne", "Ni", "Se", "Si", "Te", "Ti"}));
  CHECK(j["axis-pj"] == nlohmann::json({"J", "P"}));
}
