#include "wordorder/finite_language.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wordorder/errors.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

namespace {

bool is_prefix(const UnitString& prefix, const UnitString& s) {
  if (prefix.size() > s.size()) return false;
  return std::equal(prefix.begin(), prefix.end(), s.begin());
}

}  // namespace

FiniteLanguage::FiniteLanguage(std::vector<UnitString> strings,
                               std::vector<double> probabilities)
    : strings_(std::move(strings)), probabilities_(std::move(probabilities)) {
  if (strings_.size() != probabilities_.size())
    throw DataError("finite language: " + std::to_string(strings_.size()) +
                    " strings but " + std::to_string(probabilities_.size()) +
                    " probabilities");
  if (strings_.empty()) throw DataError("finite language: no strings");
  for (double p : probabilities_) {
    if (!(p > 0.0))
      throw DataError("finite language: probabilities must be positive");
  }
  double total = pairwise_sum(probabilities_);
  if (std::abs(total - 1.0) > 1e-12)
    throw DataError("finite language: probabilities sum to " +
                    format_double(total));
  auto sorted = strings_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DataError("finite language: duplicate string");
}

double FiniteLanguage::probability(const UnitString& s) const {
  for (std::size_t i = 0; i < strings_.size(); ++i)
    if (strings_[i] == s) return probabilities_[i];
  return 0.0;
}

double FiniteLanguage::prefix_mass(const UnitString& prefix) const {
  std::vector<double> parts;
  for (std::size_t i = 0; i < strings_.size(); ++i)
    if (is_prefix(prefix, strings_[i])) parts.push_back(probabilities_[i]);
  return pairwise_sum(parts);
}

std::vector<double> exact_unit_surprisals(const FiniteLanguage& language,
                                          const UnitString& s) {
  if (language.probability(s) <= 0.0) {
    std::string flat;
    for (const auto& u : s) {
      if (!flat.empty()) flat += ' ';
      flat += u;
    }
    throw DataError("string '" + flat + "' has zero probability");
  }
  std::vector<double> out;
  out.reserve(s.size() + 1);
  UnitString prefix;
  double prev_mass = 1.0;
  for (const auto& unit : s) {
    prefix.push_back(unit);
    double mass = language.prefix_mass(prefix);
    out.push_back(-std::log2(mass / prev_mass));
    prev_mass = mass;
  }
  // EOS: probability the string ends here rather than continuing.
  out.push_back(-std::log2(language.probability(s) / prev_mass));
  return out;
}

double exact_entropy(const FiniteLanguage& language) {
  std::vector<double> parts;
  for (double p : language.probabilities()) parts.push_back(-p * std::log2(p));
  return pairwise_sum(parts);
}

FiniteLanguage transform_language(
    const FiniteLanguage& language,
    const std::function<UnitString(const UnitString&)>& f) {
  std::map<UnitString, std::vector<double>> image;
  for (std::size_t i = 0; i < language.size(); ++i)
    image[f(language.strings()[i])].push_back(language.probabilities()[i]);
  std::vector<UnitString> strings;
  std::vector<double> probabilities;
  strings.reserve(image.size());
  for (auto& [s, parts] : image) {
    strings.push_back(s);
    probabilities.push_back(pairwise_sum(parts));
  }
  return FiniteLanguage(std::move(strings), std::move(probabilities));
}

}  // namespace wordorder
