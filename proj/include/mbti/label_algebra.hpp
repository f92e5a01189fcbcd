#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mbti {

enum class Attitude : std::uint8_t { Introverted, Extroverted };
enum class Perceiving : std::uint8_t { Intuition, Sensing };
enum class Judging : std::uint8_t { Thinking, Feeling };
enum class Orientation : std::uint8_t { Perceiving, Judging };

/// One of the sixteen four-letter codes.
class MbtiType {
 public:
  constexpr MbtiType() = default;
  constexpr MbtiType(Attitude a, Perceiving p, Judging j, Orientation o)
      : attitude_(a), perceiving_(p), judging_(j), orientation_(o) {}

  constexpr Attitude attitude() const { return attitude_; }
  constexpr Perceiving perceiving_pref() const { return perceiving_; }
  constexpr Judging judging_pref() const { return judging_; }
  constexpr Orientation orientation() const { return orientation_; }

  /// Position in the canonical (alphabetical) ordering of the 16 codes.
  int index() const;
  std::string str() const;

  static MbtiType from_index(int index);
  static const std::array<MbtiType, 16>& all();

  friend constexpr bool operator==(const MbtiType&, const MbtiType&) = default;

 private:
  Attitude attitude_ = Attitude::Introverted;
  Perceiving perceiving_ = Perceiving::Intuition;
  Judging judging_ = Judging::Thinking;
  Orientation orientation_ = Orientation::Perceiving;
};

/// Trimmed, case-insensitive parse. Throws Error(InvalidTypeCode) with the
/// offending position on anything that is not one of the 16 codes.
MbtiType parse_type(std::string_view text);

/// Non-throwing variant used by scanners (flair parsing, masking).
bool try_parse_type(std::string_view text, MbtiType& out);

MbtiType opposite_type(MbtiType t);

enum class FunctionKind : std::uint8_t { Thinking, Feeling, Sensing, Intuition };

struct CognitiveFunction {
  FunctionKind kind = FunctionKind::Thinking;
  Attitude direction = Attitude::Introverted;

  bool is_perceiving() const {
    return kind == FunctionKind::Sensing || kind == FunctionKind::Intuition;
  }
  /// "Ti", "Ne", ...
  std::string str() const;

  friend constexpr bool operator==(const CognitiveFunction&, const CognitiveFunction&) = default;
};

/// Flips T<->F or N<->S and the direction.
CognitiveFunction opposite(CognitiveFunction f);

/// dominant, auxiliary, tertiary, inferior
struct FunctionStack {
  std::array<CognitiveFunction, 4> functions;

  const CognitiveFunction& dominant() const { return functions[0]; }
  const CognitiveFunction& auxiliary() const { return functions[1]; }
  const CognitiveFunction& tertiary() const { return functions[2]; }
  const CognitiveFunction& inferior() const { return functions[3]; }

  friend bool operator==(const FunctionStack&, const FunctionStack&) = default;
};

FunctionStack function_stack(MbtiType t);

/// True when the stack satisfies the structural rules every derived stack obeys.
bool is_well_formed(const FunctionStack& stack);

enum class Granularity : std::uint8_t {
  Full16,
  Dominant8,
  FirstTwo8,
  AxisIE,
  AxisNS,
  AxisTF,
  AxisPJ,
};

inline constexpr std::array<Granularity, 7> kAllGranularities = {
    Granularity::Full16, Granularity::Dominant8, Granularity::FirstTwo8, Granularity::AxisIE,
    Granularity::AxisNS, Granularity::AxisTF,    Granularity::AxisPJ};

inline constexpr std::array<Granularity, 4> kAxes = {Granularity::AxisIE, Granularity::AxisNS,
                                                     Granularity::AxisTF, Granularity::AxisPJ};

/// "full16", "dominant8", "firsttwo8", "axis-ie", ...
std::string_view granularity_name(Granularity g);
Granularity parse_granularity(std::string_view name);

/// A label space: granularity plus its labels in canonical (alphabetical) order.
/// Label order is the tie-break order everywhere in the toolkit.
class LabelSpace {
 public:
  explicit LabelSpace(Granularity g);

  Granularity granularity() const { return granularity_; }
  std::string_view name() const { return granularity_name(granularity_); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  /// Index of a label string; -1 when absent.
  int find(std::string_view label) const;
  /// Index of the label a type projects to.
  int index_of(MbtiType t) const;

  friend bool operator==(const LabelSpace& a, const LabelSpace& b) {
    return a.granularity_ == b.granularity_;
  }

 private:
  Granularity granularity_;
  std::vector<std::string> labels_;
  std::array<int, 16> projection_{};
};

/// Label of `t` in the given space.
std::string project(MbtiType t, Granularity space);

/// {"full16": [...], "dominant8": [...], ...} as a JSON string.
std::string label_spaces_json();

}  // namespace mbti
