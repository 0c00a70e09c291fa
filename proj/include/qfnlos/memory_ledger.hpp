#pragma once

#include <cstddef>
#include <mutex>
#include <string>
#include <vector>

namespace qfnlos {

/// Exact byte accounting of the major numeric buffers of a pipeline run.
/// Entries are live-set maximums per buffer name, not cumulative allocations;
/// registration is explicit at each major allocation site.
class MemoryLedger {
 public:
  struct Entry {
    std::string name;
    std::size_t elements = 0;
    std::size_t bytes = 0;
  };

  MemoryLedger() = default;
  MemoryLedger(MemoryLedger&& other) noexcept;
  MemoryLedger& operator=(MemoryLedger&& other) noexcept;
  MemoryLedger(const MemoryLedger&) = delete;
  MemoryLedger& operator=(const MemoryLedger&) = delete;

  /// Registers (or raises) the live-set maximum for `name`.
  void note(const std::string& name, std::size_t elements, std::size_t bytes);

  std::vector<Entry> entries() const;
  std::size_t total_bytes() const;
  std::size_t max_entry_bytes() const;
  std::size_t max_entry_elements() const;
  /// Bytes of the named entry, or 0 if absent.
  std::size_t bytes_of(const std::string& name) const;

  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

}  // namespace qfnlos
