#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace wordorder {

// Word-frequency table over preprocessed sentences. The sentence terminator
// "." is not counted: it is re-inserted after transforms and never reordered.
class FreqTable {
 public:
  void add(const std::string& word, std::uint64_t n = 1);
  // Counts every word except a final ".".
  void add_sentence(const std::vector<std::string>& words);
  void merge(const FreqTable& other);

  std::uint64_t count(const std::string& word) const;
  std::uint64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }
  const std::unordered_map<std::string, std::uint64_t>& counts() const {
    return counts_;
  }

  // "word<TAB>count" lines, sorted by count descending then word ascending.
  void save(std::ostream& out) const;
  static FreqTable load(std::istream& in);

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

}  // namespace wordorder
