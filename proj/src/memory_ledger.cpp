#include "qfnlos/memory_ledger.hpp"

#include <algorithm>

namespace qfnlos {

MemoryLedger::MemoryLedger(MemoryLedger&& other) noexcept {
  std::lock_guard<std::mutex> lock(other.mu_);
  entries_ = std::move(other.entries_);
}

MemoryLedger& MemoryLedger::operator=(MemoryLedger&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    entries_ = std::move(other.entries_);
  }
  return *this;
}

void MemoryLedger::note(const std::string& name, std::size_t elements,
                        std::size_t bytes) {
  std::lock_guard<std::mutex> lock(mu_);
  for (Entry& e : entries_) {
    if (e.name == name) {
      e.elements = std::max(e.elements, elements);
      e.bytes = std::max(e.bytes, bytes);
      return;
    }
  }
  entries_.push_back({name, elements, bytes});
}

std::vector<MemoryLedger::Entry> MemoryLedger::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

std::size_t MemoryLedger::total_bytes() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t total = 0;
  for (const Entry& e : entries_) total += e.bytes;
  return total;
}

std::size_t MemoryLedger::max_entry_bytes() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t best = 0;
  for (const Entry& e : entries_) best = std::max(best, e.bytes);
  return best;
}

std::size_t MemoryLedger::max_entry_elements() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t best = 0;
  for (const Entry& e : entries_) best = std::max(best, e.elements);
  return best;
}

std::size_t MemoryLedger::bytes_of(const std::string& name) const {
  std::lock_guard<std::mutex> lock(mu_);
  for (const Entry& e : entries_)
    if (e.name == name) return e.bytes;
  return 0;
}

void MemoryLedger::clear() {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.clear();
}

}  // namespace qfnlos
