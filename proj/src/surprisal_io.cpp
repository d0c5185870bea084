#include "wordorder/surprisal_io.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "wordorder/errors.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

namespace {

std::string where(const SentenceRecord& sentence) {
  return "document '" + sentence.doc_id + "', sentence " +
         std::to_string(sentence.sent_idx);
}

struct RawRow {
  std::string doc_id;
  int sent_idx = 0;
  long long word_idx = 0;
  double surprisal = 0.0;
};

// Next non-comment row, or nullopt at EOF. Validates field shapes only.
std::optional<RawRow> next_row(std::istream& in, long long& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto fields = split(body, '\t');
    if (fields.size() != 5)
      throw DataError("surprisal line " + std::to_string(line_no) +
                      ": expected 5 tab-separated fields, found " +
                      std::to_string(fields.size()));
    RawRow row;
    row.doc_id = std::string(fields[0]);
    long long sent = 0;
    if (row.doc_id.empty() || !parse_int(fields[1], sent) || sent < 0)
      throw DataError("surprisal line " + std::to_string(line_no) +
                      ": bad doc_id or sent_idx");
    row.sent_idx = static_cast<int>(sent);
    if (!parse_int(fields[2], row.word_idx))
      throw DataError("surprisal line " + std::to_string(line_no) +
                      ": bad word_idx '" + std::string(fields[2]) + "'");
    if (!parse_double(fields[4], row.surprisal) ||
        !std::isfinite(row.surprisal) || row.surprisal < 0.0)
      throw DataError("surprisal line " + std::to_string(line_no) +
                      ": bad surprisal '" + std::string(fields[4]) + "'");
    return row;
  }
  return std::nullopt;
}

}  // namespace

SurprisalWriter::SurprisalWriter(std::ostream& out) : out_(out) {}

void SurprisalWriter::write_comment(const std::string& text) {
  out_ << "# " << text << "\n";
}

void SurprisalWriter::write(const SentenceRecord& sentence,
                            const SurprisalRecord& scores) {
  if (sentence.doc_id != scores.doc_id || sentence.sent_idx != scores.sent_idx)
    throw ContractError("surprisal record does not match sentence " +
                        where(sentence));
  if (sentence.words.size() != scores.surprisals.size())
    throw ContractError("surprisal count mismatch at " + where(sentence));
  for (std::size_t i = 0; i < sentence.words.size(); ++i)
    out_ << sentence.doc_id << '\t' << sentence.sent_idx << '\t' << i << '\t'
         << sentence.words[i] << '\t' << format_double(scores.surprisals[i])
         << '\n';
  if (scores.eos_surprisal)
    out_ << sentence.doc_id << '\t' << sentence.sent_idx << '\t' << -1 << '\t'
         << "<eos>" << '\t' << format_double(*scores.eos_surprisal) << '\n';
}

SurprisalImporter::SurprisalImporter(std::istream& in) : in_(in) {}

bool SurprisalImporter::fetch() {
  if (pending_) return true;
  auto row = next_row(in_, line_no_);
  if (!row) return false;
  pending_ = Row{std::move(row->doc_id), row->sent_idx, row->word_idx,
                 row->surprisal};
  return true;
}

SurprisalRecord SurprisalImporter::next(const SentenceRecord& sentence) {
  const std::size_t n_words = sentence.words.size();
  std::vector<double> sums(n_words, 0.0);
  std::vector<bool> seen(n_words, false);
  std::optional<double> eos;
  bool any = false;
  while (fetch() && pending_->doc_id == sentence.doc_id &&
         pending_->sent_idx == sentence.sent_idx) {
    any = true;
    const Row row = *pending_;
    pending_.reset();
    if (row.word_idx == -1) {
      eos = eos.value_or(0.0) + row.surprisal;
      continue;
    }
    if (row.word_idx < 0 || row.word_idx >= static_cast<long long>(n_words))
      throw DataError("alignment error at " + where(sentence) + ": word_idx " +
                      std::to_string(row.word_idx) + " outside 0.." +
                      std::to_string(n_words - 1));
    sums[static_cast<std::size_t>(row.word_idx)] += row.surprisal;
    seen[static_cast<std::size_t>(row.word_idx)] = true;
  }
  if (!any)
    throw DataError("alignment error at " + where(sentence) +
                    ": no surprisal rows");
  for (std::size_t i = 0; i < n_words; ++i)
    if (!seen[i])
      throw DataError("alignment error at " + where(sentence) + ": word " +
                      std::to_string(i) + " has no surprisal rows");
  SurprisalRecord out;
  out.doc_id = sentence.doc_id;
  out.sent_idx = sentence.sent_idx;
  out.surprisals = std::move(sums);
  out.eos_surprisal = eos;
  return out;
}

void SurprisalImporter::finish() {
  if (fetch())
    throw DataError("surprisal line " + std::to_string(line_no_) +
                    ": row for document '" + pending_->doc_id +
                    "', sentence " + std::to_string(pending_->sent_idx) +
                    " has no matching corpus sentence");
}

std::vector<SurprisalRecord> read_surprisal_records(std::istream& in) {
  std::vector<SurprisalRecord> out;
  long long line_no = 0;
  std::unordered_set<std::uint64_t> finished_docs;
  std::string doc;
  bool have_doc = false;
  int last_sent = -1;

  std::map<long long, double> sums;
  std::optional<double> eos;
  bool open = false;

  auto flush = [&](const std::string& flush_doc, int flush_sent) {
    SurprisalRecord record;
    record.doc_id = flush_doc;
    record.sent_idx = flush_sent;
    long long expect = 0;
    for (const auto& [idx, sum] : sums) {
      if (idx != expect)
        throw DataError("document '" + flush_doc + "', sentence " +
                        std::to_string(flush_sent) + ": word " +
                        std::to_string(expect) + " has no surprisal rows");
      record.surprisals.push_back(sum);
      ++expect;
    }
    record.eos_surprisal = eos;
    out.push_back(std::move(record));
    sums.clear();
    eos.reset();
    open = false;
  };

  while (auto row = next_row(in, line_no)) {
    const bool same_group =
        open && row->doc_id == doc && row->sent_idx == last_sent;
    if (!same_group) {
      if (open) flush(doc, last_sent);
      if (!have_doc || row->doc_id != doc) {
        if (have_doc) finished_docs.insert(fnv1a64(doc));
        if (finished_docs.count(fnv1a64(row->doc_id)))
          throw DataError("surprisal line " + std::to_string(line_no) +
                          ": document '" + row->doc_id +
                          "' reappears after it was closed");
        doc = row->doc_id;
        have_doc = true;
        last_sent = -1;
      }
      if (row->sent_idx <= last_sent)
        throw DataError("surprisal line " + std::to_string(line_no) +
                        ": sentence " + std::to_string(row->sent_idx) +
                        " after " + std::to_string(last_sent) +
                        " in document '" + doc + "'");
      last_sent = row->sent_idx;
      open = true;
    }
    if (row->word_idx == -1) {
      eos = eos.value_or(0.0) + row->surprisal;
    } else if (row->word_idx < 0) {
      throw DataError("surprisal line " + std::to_string(line_no) +
                      ": bad word_idx " + std::to_string(row->word_idx));
    } else {
      sums[row->word_idx] += row->surprisal;
    }
  }
  if (open) flush(doc, last_sent);
  return out;
}

}  // namespace wordorder
