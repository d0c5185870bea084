#pragma once

#include <optional>
#include <string>
#include <vector>

namespace wordorder {

// Per-word surprisals for one sentence, in bits. `surprisals` aligns with
// the sentence's words (terminator included); the EOS decision is kept
// out-of-band so metrics can exclude it.
struct SurprisalRecord {
  std::string doc_id;
  int sent_idx = 0;
  std::vector<double> surprisals;
  std::optional<double> eos_surprisal;

  bool operator==(const SurprisalRecord&) const = default;
};

}  // namespace wordorder
