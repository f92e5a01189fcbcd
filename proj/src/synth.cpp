#include "mbti/synth.hpp"

#include <array>
#include <string_view>

#include "mbti/error.hpp"
#include "mbti/rng.hpp"

namespace mbti::synth {

namespace {

// No e, s, y, l, d, c: CVCVC words over these letters match no suffix rule.
constexpr std::string_view kConsonants = "bfgkmnprtvz";
constexpr std::string_view kVowels = "aiou";

constexpr std::array<std::string_view, 6> kOtherVenues = {"askreddit", "books",  "gaming",
                                                          "movies",    "science", "worldnews"};

}  // namespace

void SynthSpec::validate() const {
  if (!(distinctiveness >= 0.0 && distinctiveness <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "distinctiveness must be in [0, 1]");
  if (docs_per_class < 1) throw Error(ErrorCode::InvalidArgument, "docs_per_class must be >= 1");
  if (shared_vocab < 1 || class_vocab < 1)
    throw Error(ErrorCode::InvalidArgument, "vocabulary sizes must be >= 1");
  if (min_doc_length < 1 || min_doc_length > max_doc_length)
    throw Error(ErrorCode::InvalidArgument, "document length range is empty");
  if (authors_per_class < 1) throw Error(ErrorCode::InvalidArgument, "authors_per_class must be >= 1");
  if (!(mbti_venue_share >= 0.0 && mbti_venue_share <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "mbti_venue_share must be in [0, 1]");
  const std::size_t capacity = kConsonants.size() * kVowels.size() * kConsonants.size() *
                               kVowels.size() * kConsonants.size();
  if (shared_vocab + 16 * class_vocab > capacity)
    throw Error(ErrorCode::InvalidArgument, "vocabulary larger than the pseudo-word space");
}

nlohmann::json SynthSpec::to_json() const {
  return {{"distinctiveness", distinctiveness}, {"docs_per_class", docs_per_class},
          {"shared_vocab", shared_vocab},       {"class_vocab", class_vocab},
          {"min_doc_length", min_doc_length},   {"max_doc_length", max_doc_length},
          {"authors_per_class", authors_per_class}, {"mbti_venue_share", mbti_venue_share},
          {"seed", seed}};
}

std::vector<std::string> make_words(std::size_t n, std::size_t offset) {
  const std::size_t nc = kConsonants.size();
  const std::size_t nv = kVowels.size();
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t k = offset; k < offset + n; ++k) {
    std::size_t x = k;
    std::string w(5, ' ');
    w[4] = kConsonants[x % nc];
    x /= nc;
    w[3] = kVowels[x % nv];
    x /= nv;
    w[2] = kConsonants[x % nc];
    x /= nc;
    w[1] = kVowels[x % nv];
    x /= nv;
    w[0] = kConsonants[x % nc];
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<corpus::Comment> generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto shared = make_words(spec.shared_vocab, 0);
  std::vector<corpus::Comment> out;
  out.reserve(16 * spec.docs_per_class);
  const std::int64_t base_time = 1'600'000'000;
  for (int c = 0; c < 16; ++c) {
    const auto type = MbtiType::from_index(c);
    const auto own = make_words(spec.class_vocab, spec.shared_vocab + static_cast<std::size_t>(c) * spec.class_vocab);
    std::string venue = type.str();
    for (auto& ch : venue) ch = static_cast<char>(ch - 'A' + 'a');
    for (std::size_t d = 0; d < spec.docs_per_class; ++d) {
      const std::size_t len =
          spec.min_doc_length + rng.below(spec.max_doc_length - spec.min_doc_length + 1);
      std::string body;
      for (std::size_t t = 0; t < len; ++t) {
        if (t) body += ' ';
        const bool from_class = rng.uniform() < spec.distinctiveness;
        body += from_class ? own[rng.below(own.size())] : shared[rng.below(shared.size())];
      }
      corpus::Comment cm;
      cm.id = "syn" + std::to_string(spec.seed) + "-" + type.str() + "-" + std::to_string(d);
      cm.author = "synth_" + type.str() + "_" + std::to_string(rng.below(spec.authors_per_class));
      cm.subreddit = rng.uniform() < spec.mbti_venue_share
                         ? venue
                         : std::string(kOtherVenues[rng.below(kOtherVenues.size())]);
      cm.created_utc = base_time + static_cast<std::int64_t>(out.size()) * 60;
      cm.body = std::move(body);
      cm.label = type;
      out.push_back(std::move(cm));
    }
  }
  return out;
}

}  // namespace mbti::synth
