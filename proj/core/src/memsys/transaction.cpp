#include "nvsim/memsys/transaction.hpp"

#include <stdexcept>

namespace nvsim::memsys {

std::string to_string(Source s) {
  switch (s.kind) {
    case Source::Kind::Core: return "core" + std::to_string(s.index);
    case Source::Kind::Accelerator: return "accel";
    case Source::Kind::Llc: return "llc";
  }
  return "unknown";
}

void validate(const MemTransaction& txn) {
  if (txn.size == 0) throw std::invalid_argument("transaction size must be positive");
  if (txn.source.kind == Source::Kind::Accelerator && txn.size % kMinBurstBytes != 0)
    throw std::invalid_argument("accelerator transaction size must be a multiple of 32 bytes");
  if (txn.complete_cycle && *txn.complete_cycle < txn.issue_cycle)
    throw std::invalid_argument("transaction completes before it was issued");
}

}  // namespace nvsim::memsys
