#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tnf/boundary.hpp"
#include "tnf/peps.hpp"

namespace tnf {

/// Configuration-independent contraction schedule: the top boundary absorbs
/// rows [0, mid), the bottom boundary absorbs rows (mid, rows-1] upward, and
/// the middle row is closed exactly against both.
struct FixedPlan {
  enum class StepKind { AbsorbTop, AbsorbBottom, CloseMiddle };
  struct Step {
    StepKind kind;
    std::size_t row;
    friend bool operator==(const Step&, const Step&) = default;
  };

  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t chi = 1;
  std::size_t mid = 0;
  std::vector<Step> schedule;

  friend bool operator==(const FixedPlan&, const FixedPlan&) = default;
};

FixedPlan make_fixed_plan(std::size_t rows, std::size_t cols, std::size_t chi);
/// Canonical text form of the plan (one step per line).
std::string serialize(const FixedPlan& plan);

/// Per-evaluation diagnostics.
struct AmplitudeDiagnostics {
  double discarded_weight = 0.0;
  std::size_t max_bond = 0;
};

/// Memo of boundary intermediates keyed by the rows they summarise. It stores
/// exactly what a fresh evaluation would compute, so memoised results are
/// bit-identical to unmemoised ones. Single owner, not thread-safe.
class FixedMemo {
 public:
  explicit FixedMemo(std::size_t entries_per_level = 8) : capacity_(entries_per_level) {}

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  void clear();

 private:
  friend struct FixedMemoAccess;
  struct Entry {
    std::vector<int> key;
    std::shared_ptr<const BoundaryMps> value;
  };
  std::size_t capacity_;
  std::uint64_t fingerprint_ = 0;
  std::size_t chi_ = 0;
  bool bound_ = false;
  std::vector<std::vector<Entry>> top_;     // top_[k]: rows [0, k) absorbed
  std::vector<std::vector<Entry>> bottom_;  // bottom_[k]: rows (k, rows-1] absorbed
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// Fixed-isometry (TNF) amplitude. Deterministic in (peps, n, plan).
AmplitudeValue amplitude_fixed(const Peps& peps, const SpinConfiguration& n, const FixedPlan& plan,
                               FixedMemo* memo = nullptr, AmplitudeDiagnostics* diag = nullptr);

/// All intermediates of one fixed-plan contraction of an open-boundary grid,
/// kept so a single modified row can be re-evaluated cheaply.
class FixedContraction {
 public:
  FixedContraction(TensorGrid open_grid, const FixedPlan& plan);

  AmplitudeValue value() const { return value_; }
  const AmplitudeDiagnostics& diagnostics() const { return diag_; }
  const TensorGrid& grid() const { return grid_; }

  /// Same contraction with row r of the grid replaced. Bit-identical to a
  /// fresh contraction of the modified grid.
  AmplitudeValue with_row(std::size_t r, std::span<const Tensor> row,
                          AmplitudeDiagnostics* diag = nullptr) const;

 private:
  TensorGrid grid_;
  FixedPlan plan_;
  std::vector<BoundaryMps> top_;     // top_[k], k = 0..mid
  std::vector<BoundaryMps> bottom_;  // bottom_[k], k = mid..rows-1
  AmplitudeValue value_;
  AmplitudeDiagnostics diag_;
};

/// Boundary environments of the dynamic (history-dependent) scheme. Copies
/// share immutable environments, so returning an updated cache is cheap.
class DynamicCache {
 public:
  DynamicCache(const Peps& peps, std::size_t chi);

  std::size_t chi() const { return chi_; }
  bool is_cold() const { return !last_config_.has_value(); }
  const std::optional<SpinConfiguration>& last_config() const { return last_config_; }
  /// Row closed in the most recent evaluation.
  std::size_t last_row() const { return last_row_; }

 private:
  friend struct DynamicAccess;
  struct Entry {
    std::vector<int> key;
    std::shared_ptr<const BoundaryMps> value;
  };
  std::uint64_t fingerprint_;
  std::size_t rows_;
  std::size_t cols_;
  std::size_t chi_;
  std::vector<std::optional<Entry>> top_;     // rows [0, k) absorbed
  std::vector<std::optional<Entry>> bottom_;  // rows (k, rows-1] absorbed
  std::optional<SpinConfiguration> last_config_;
  std::size_t last_row_ = 0;
};

struct DynamicResult {
  AmplitudeValue amplitude;
  DynamicCache cache;
};

/// Dynamic-isometry amplitude. A cold cache closes at the middle row exactly
/// like amplitude_fixed. Otherwise the closure row is the lowest row that
/// changed since the cache's last configuration (or the previous closure row
/// if nothing changed); environments are reused wherever the rows they
/// summarise are unchanged and rebuilt from the nearest valid one otherwise.
/// The returned cache reflects this evaluation; callers keep it only if they
/// move to n. Throws StateError if the cache belongs to another state or chi.
DynamicResult amplitude_dynamic(const DynamicCache& cache, const Peps& peps,
                                const SpinConfiguration& n, std::size_t chi);

/// Exact contraction by row absorption without truncation.
/// Guard: rows*cols <= 36 and D <= 4, otherwise ResourceError.
AmplitudeValue exact_amplitude(const Peps& peps, const SpinConfiguration& n);

}  // namespace tnf
