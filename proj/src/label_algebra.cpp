#include "mbti/label_algebra.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <nlohmann/json.hpp>

#include "mbti/error.hpp"

namespace mbti {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidTypeCode: return "InvalidTypeCode";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Schema: return "SchemaError";
    case ErrorCode::Capacity: return "CapacityError";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LabelOutsideSpace: return "LabelOutsideSpace";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::Http: return "HttpError";
    case ErrorCode::Config: return "ConfigError";
  }
  return "Error";
}

namespace {

std::string raw_code(const MbtiType& t) {
  std::string s(4, ' ');
  s[0] = t.attitude() == Attitude::Introverted ? 'I' : 'E';
  s[1] = t.perceiving_pref() == Perceiving::Intuition ? 'N' : 'S';
  s[2] = t.judging_pref() == Judging::Thinking ? 'T' : 'F';
  s[3] = t.orientation() == Orientation::Perceiving ? 'P' : 'J';
  return s;
}

std::array<MbtiType, 16> build_canonical() {
  std::array<MbtiType, 16> out;
  int k = 0;
  for (auto a : {Attitude::Introverted, Attitude::Extroverted})
    for (auto p : {Perceiving::Intuition, Perceiving::Sensing})
      for (auto j : {Judging::Thinking, Judging::Feeling})
        for (auto o : {Orientation::Perceiving, Orientation::Judging})
          out[k++] = MbtiType(a, p, j, o);
  std::sort(out.begin(), out.end(),
            [](const MbtiType& x, const MbtiType& y) { return raw_code(x) < raw_code(y); });
  return out;
}

// Dense key over the four binary fields.
int bits(const MbtiType& t) {
  return (static_cast<int>(t.attitude()) << 3) | (static_cast<int>(t.perceiving_pref()) << 2) |
         (static_cast<int>(t.judging_pref()) << 1) | static_cast<int>(t.orientation());
}

const std::array<int, 16>& bits_to_index() {
  static const std::array<int, 16> table = [] {
    std::array<int, 16> m{};
    const auto& all = MbtiType::all();
    for (int i = 0; i < 16; ++i) m[bits(all[i])] = i;
    return m;
  }();
  return table;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

const std::array<MbtiType, 16>& MbtiType::all() {
  static const std::array<MbtiType, 16> canonical = build_canonical();
  return canonical;
}

int MbtiType::index() const { return bits_to_index()[bits(*this)]; }

std::string MbtiType::str() const { return raw_code(*this); }

MbtiType MbtiType::from_index(int index) {
  if (index < 0 || index >= 16)
    throw Error(ErrorCode::InvalidArgument, "type index out of range: " + std::to_string(index));
  return all()[static_cast<std::size_t>(index)];
}

bool try_parse_type(std::string_view text, MbtiType& out) {
  if (text.size() != 4) return false;
  auto up = [](char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); };
  Attitude a;
  Perceiving p;
  Judging j;
  Orientation o;
  switch (up(text[0])) {
    case 'I': a = Attitude::Introverted; break;
    case 'E': a = Attitude::Extroverted; break;
    default: return false;
  }
  switch (up(text[1])) {
    case 'N': p = Perceiving::Intuition; break;
    case 'S': p = Perceiving::Sensing; break;
    default: return false;
  }
  switch (up(text[2])) {
    case 'T': j = Judging::Thinking; break;
    case 'F': j = Judging::Feeling; break;
    default: return false;
  }
  switch (up(text[3])) {
    case 'P': o = Orientation::Perceiving; break;
    case 'J': o = Orientation::Judging; break;
    default: return false;
  }
  out = MbtiType(a, p, j, o);
  return true;
}

MbtiType parse_type(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  std::string_view core = text.substr(begin, end - begin);

  MbtiType t;
  if (try_parse_type(core, t)) return t;

  std::string why;
  if (core.size() != 4) {
    why = "expected 4 letters, got " + std::to_string(core.size());
  } else {
    static constexpr std::string_view kAllowed[4] = {"IE", "NS", "TF", "PJ"};
    for (std::size_t i = 0; i < 4; ++i) {
      char c = static_cast<char>(std::toupper(static_cast<unsigned char>(core[i])));
      if (kAllowed[i].find(c) == std::string_view::npos) {
        why = "position " + std::to_string(begin + i) + ": '" + std::string(1, core[i]) +
              "' is not one of " + std::string(kAllowed[i]);
        break;
      }
    }
  }
  throw Error(ErrorCode::InvalidTypeCode,
              "invalid type code \"" + std::string(text) + "\": " + why);
}

MbtiType opposite_type(MbtiType t) {
  auto flip = [](auto v) { return static_cast<decltype(v)>(1 - static_cast<int>(v)); };
  return MbtiType(flip(t.attitude()), flip(t.perceiving_pref()), flip(t.judging_pref()),
                  flip(t.orientation()));
}

std::string CognitiveFunction::str() const {
  std::string s(2, ' ');
  switch (kind) {
    case FunctionKind::Thinking: s[0] = 'T'; break;
    case FunctionKind::Feeling: s[0] = 'F'; break;
    case FunctionKind::Sensing: s[0] = 'S'; break;
    case FunctionKind::Intuition: s[0] = 'N'; break;
  }
  s[1] = direction == Attitude::Introverted ? 'i' : 'e';
  return s;
}

CognitiveFunction opposite(CognitiveFunction f) {
  FunctionKind k = f.kind;
  switch (f.kind) {
    case FunctionKind::Thinking: k = FunctionKind::Feeling; break;
    case FunctionKind::Feeling: k = FunctionKind::Thinking; break;
    case FunctionKind::Sensing: k = FunctionKind::Intuition; break;
    case FunctionKind::Intuition: k = FunctionKind::Sensing; break;
  }
  Attitude d = f.direction == Attitude::Introverted ? Attitude::Extroverted : Attitude::Introverted;
  return {k, d};
}

FunctionStack function_stack(MbtiType t) {
  const FunctionKind perceiving =
      t.perceiving_pref() == Perceiving::Intuition ? FunctionKind::Intuition : FunctionKind::Sensing;
  const FunctionKind judging =
      t.judging_pref() == Judging::Thinking ? FunctionKind::Thinking : FunctionKind::Feeling;

  // The last letter picks which of the two middle letters is directed outward.
  const bool perceiving_outward = t.orientation() == Orientation::Perceiving;
  CognitiveFunction outward{perceiving_outward ? perceiving : judging, Attitude::Extroverted};
  CognitiveFunction inward{perceiving_outward ? judging : perceiving, Attitude::Introverted};

  const bool extrovert = t.attitude() == Attitude::Extroverted;
  CognitiveFunction dominant = extrovert ? outward : inward;
  CognitiveFunction auxiliary = extrovert ? inward : outward;
  return FunctionStack{{dominant, auxiliary, opposite(auxiliary), opposite(dominant)}};
}

bool is_well_formed(const FunctionStack& s) {
  const auto& f = s.functions;
  return f[2] == opposite(f[1]) && f[3] == opposite(f[0]) && f[0].direction != f[1].direction &&
         f[0].is_perceiving() != f[1].is_perceiving();
}

std::string_view granularity_name(Granularity g) {
  switch (g) {
    case Granularity::Full16: return "full16";
    case Granularity::Dominant8: return "dominant8";
    case Granularity::FirstTwo8: return "firsttwo8";
    case Granularity::AxisIE: return "axis-ie";
    case Granularity::AxisNS: return "axis-ns";
    case Granularity::AxisTF: return "axis-tf";
    case Granularity::AxisPJ: return "axis-pj";
  }
  return "?";
}

Granularity parse_granularity(std::string_view name) {
  std::string n;
  for (char c : name)
    if (c != '_' && c != '-') n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (auto g : kAllGranularities) {
    std::string canon;
    for (char c : granularity_name(g))
      if (c != '-') canon += c;
    if (n == canon) return g;
  }
  if (n == "ie") return Granularity::AxisIE;
  if (n == "ns") return Granularity::AxisNS;
  if (n == "tf") return Granularity::AxisTF;
  if (n == "pj") return Granularity::AxisPJ;
  throw Error(ErrorCode::InvalidArgument, "unknown label space: " + std::string(name));
}

std::string project(MbtiType t, Granularity space) {
  switch (space) {
    case Granularity::Full16: return t.str();
    case Granularity::Dominant8: return function_stack(t).dominant().str();
    case Granularity::FirstTwo8: {
      const auto stack = function_stack(t);
      std::string a = stack.dominant().str();
      std::string b = stack.auxiliary().str();
      return a < b ? a + b : b + a;
    }
    case Granularity::AxisIE: return t.str().substr(0, 1);
    case Granularity::AxisNS: return t.str().substr(1, 1);
    case Granularity::AxisTF: return t.str().substr(2, 1);
    case Granularity::AxisPJ: return t.str().substr(3, 1);
  }
  return {};
}

LabelSpace::LabelSpace(Granularity g) : granularity_(g) {
  std::vector<std::string> projected;
  for (const auto& t : MbtiType::all()) projected.push_back(project(t, g));
  labels_ = projected;
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  for (int i = 0; i < 16; ++i) projection_[i] = find(projected[i]);
}

int LabelSpace::find(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return -1;
  return static_cast<int>(it - labels_.begin());
}

int LabelSpace::index_of(MbtiType t) const { return projection_[t.index()]; }

std::string label_spaces_json() {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (auto g : kAllGranularities) doc[std::string(granularity_name(g))] = LabelSpace(g).labels();
  return doc.dump(2);
}

}  // namespace mbti
