#pragma once

#include <functional>
#include <string>
#include <vector>

namespace wordorder {

using UnitString = std::vector<std::string>;

// A finite distribution over unit strings; the exact oracle the estimators
// are tested against.
class FiniteLanguage {
 public:
  // Throws DataError unless probabilities are positive, sum to 1 within
  // 1e-12, and strings are distinct.
  FiniteLanguage(std::vector<UnitString> strings,
                 std::vector<double> probabilities);

  const std::vector<UnitString>& strings() const { return strings_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  std::size_t size() const { return strings_.size(); }

  // Probability of exactly this string (0 if absent).
  double probability(const UnitString& s) const;
  // Total mass of strings having `prefix` as a prefix.
  double prefix_mass(const UnitString& prefix) const;

 private:
  std::vector<UnitString> strings_;
  std::vector<double> probabilities_;
};

// Exact conditional surprisals -log2 p(u_i | u_<i) for each unit, then the
// EOS decision, computed by enumeration. Throws DataError for strings with
// zero probability.
std::vector<double> exact_unit_surprisals(const FiniteLanguage& language,
                                          const UnitString& s);

// Shannon entropy of the string distribution, in bits.
double exact_entropy(const FiniteLanguage& language);

// Pushforward under f; colliding outputs' probabilities are summed.
FiniteLanguage transform_language(
    const FiniteLanguage& language,
    const std::function<UnitString(const UnitString&)>& f);

}  // namespace wordorder
