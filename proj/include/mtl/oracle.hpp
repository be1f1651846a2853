// Ground-truth certain answers for arbitrary programs by model search.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "mtl/core.hpp"

namespace mtl {

struct Interpretation {
  std::map<std::string, TimestampSet> assignment;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every rule holds at every timestamp. Atoms missing from the assignment are
// read from the data.
bool is_model(const Program& program, const DataInstance& data, const Interpretation& interp);

struct OracleOptions {
  std::uint64_t budget = std::uint64_t(1) << 24;  // search nodes
  bool parallel = true;
};

struct OracleStats {
  std::uint64_t nodes = 0;
  std::uint64_t leaves = 0;
};

// Intersection of the atom's extension over all models; every timestamp when
// there is no model. Searches the tree of minimal ways to repair violated
// rules: every model contains a repair leaf, and every leaf is a model, so
// the intersection over leaves equals the intersection over models.
TimestampSet certain_answers_bruteforce(const Program& program, const std::string& atom,
                                        const DataInstance& data, OracleOptions options = {},
                                        OracleStats* stats = nullptr);

// Reference for tests: plain enumeration of every extension of the data over
// the program's atoms, column by column with per-timestamp rule checks.
// Throws BudgetExceeded when 2^(free atom-timestamp pairs) exceeds the budget.
TimestampSet certain_answers_enumerate(const Program& program, const std::string& atom,
                                       const DataInstance& data,
                                       std::uint64_t budget = std::uint64_t(1) << 24);

}  // namespace mtl
