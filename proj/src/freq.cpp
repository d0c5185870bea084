#include "wordorder/freq.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "wordorder/errors.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

void FreqTable::add(const std::string& word, std::uint64_t n) {
  counts_[word] += n;
  total_ += n;
}

void FreqTable::add_sentence(const std::vector<std::string>& words) {
  const std::size_t n = words.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 == n && words[i] == ".") break;
    add(words[i]);
  }
}

void FreqTable::merge(const FreqTable& other) {
  for (const auto& [word, n] : other.counts_) counts_[word] += n;
  total_ += other.total_;
}

std::uint64_t FreqTable::count(const std::string& word) const {
  auto it = counts_.find(word);
  return it == counts_.end() ? 0 : it->second;
}

void FreqTable::save(std::ostream& out) const {
  std::vector<std::pair<std::string, std::uint64_t>> rows(counts_.begin(),
                                                          counts_.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [word, n] : rows) out << word << '\t' << n << '\n';
}

FreqTable FreqTable::load(std::istream& in) {
  FreqTable table;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    long long n = 0;
    if (tab == std::string::npos || tab == 0 ||
        !parse_int(std::string_view(line).substr(tab + 1), n) || n < 0) {
      throw DataError("frequency table line " + std::to_string(line_no) +
                      ": expected 'word<TAB>count'");
    }
    const std::string word = line.substr(0, tab);
    if (table.counts_.count(word))
      throw DataError("frequency table line " + std::to_string(line_no) +
                      ": duplicate word '" + word + "'");
    table.add(word, static_cast<std::uint64_t>(n));
  }
  return table;
}

}  // namespace wordorder
