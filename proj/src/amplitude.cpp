#include "tnf/amplitude.hpp"

#include <algorithm>
#include <sstream>

#include "tnf/errors.hpp"

namespace tnf {

FixedPlan make_fixed_plan(std::size_t rows, std::size_t cols, std::size_t chi) {
  if (rows == 0 || cols == 0) throw ArgumentError("plan needs a non-empty lattice");
  if (chi < 1) throw ArgumentError("chi must be positive");
  FixedPlan plan{rows, cols, chi, rows / 2, {}};
  for (std::size_t r = 0; r < plan.mid; ++r) plan.schedule.push_back({FixedPlan::StepKind::AbsorbTop, r});
  for (std::size_t r = rows - 1; r > plan.mid; --r) {
    plan.schedule.push_back({FixedPlan::StepKind::AbsorbBottom, r});
  }
  plan.schedule.push_back({FixedPlan::StepKind::CloseMiddle, plan.mid});
  return plan;
}

std::string serialize(const FixedPlan& plan) {
  std::ostringstream os;
  os << "rows " << plan.rows << " cols " << plan.cols << " chi " << plan.chi << " mid " << plan.mid
     << '\n';
  for (const auto& s : plan.schedule) {
    switch (s.kind) {
      case FixedPlan::StepKind::AbsorbTop: os << "absorb_top "; break;
      case FixedPlan::StepKind::AbsorbBottom: os << "absorb_bottom "; break;
      case FixedPlan::StepKind::CloseMiddle: os << "close "; break;
    }
    os << s.row << '\n';
  }
  return os.str();
}

namespace {

BoundaryMps absorb_top(const BoundaryMps& b, std::span<const Tensor> row, std::size_t chi) {
  return boundary_absorb(b, row, chi);
}

BoundaryMps absorb_bottom(const BoundaryMps& b, std::span<const Tensor> row, std::size_t chi) {
  const auto flipped = flip_row(row);
  return boundary_absorb(b, flipped, chi);
}

AmplitudeValue finish(const Closure& cl) { return AmplitudeValue::make(cl.value, cl.log_scale); }

void fill_diag(AmplitudeDiagnostics* diag, const BoundaryMps& top, const BoundaryMps& bottom) {
  if (!diag) return;
  diag->discarded_weight = top.discarded_weight + bottom.discarded_weight;
  diag->max_bond = std::max(top.max_bond(), bottom.max_bond());
}

void check_plan(const Peps& peps, const FixedPlan& plan) {
  if (plan.rows != peps.rows() || plan.cols != peps.cols()) {
    throw ArgumentError("plan does not match lattice extents");
  }
}

std::vector<int> row_key(const SpinConfiguration& n, std::size_t cols, std::size_t r0, std::size_t r1) {
  return std::vector<int>(n.values().begin() + static_cast<std::ptrdiff_t>(r0 * cols),
                          n.values().begin() + static_cast<std::ptrdiff_t>(r1 * cols));
}

}  // namespace

struct FixedMemoAccess {
  using Entry = FixedMemo::Entry;

  static void bind(FixedMemo& m, const Peps& peps, std::size_t chi) {
    const auto fp = peps.fingerprint();
    if (m.bound_ && m.fingerprint_ == fp && m.chi_ == chi && m.top_.size() == peps.rows()) return;
    m.clear();
    m.bound_ = true;
    m.fingerprint_ = fp;
    m.chi_ = chi;
    m.top_.resize(peps.rows());
    m.bottom_.resize(peps.rows());
  }

  static std::shared_ptr<const BoundaryMps> find(FixedMemo& m, std::vector<Entry>& level,
                                                 const std::vector<int>& key) {
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (level[i].key == key) {
        std::rotate(level.begin(), level.begin() + static_cast<std::ptrdiff_t>(i),
                    level.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        ++m.hits_;
        return level.front().value;
      }
    }
    ++m.misses_;
    return nullptr;
  }

  static void insert(FixedMemo& m, std::vector<Entry>& level, std::vector<int> key,
                     std::shared_ptr<const BoundaryMps> value) {
    level.insert(level.begin(), Entry{std::move(key), std::move(value)});
    if (level.size() > m.capacity_) level.pop_back();
  }

  static AmplitudeValue evaluate(FixedMemo& m, const Peps& peps, const SpinConfiguration& n,
                                 const FixedPlan& plan, AmplitudeDiagnostics* diag) {
    bind(m, peps, plan.chi);
    const std::size_t rows = plan.rows, cols = plan.cols, mid = plan.mid;

    // Top: deepest memoised level, then absorb forward.
    std::shared_ptr<const BoundaryMps> top;
    std::size_t k = mid;
    for (;; --k) {
      if (k == 0) {
        top = std::make_shared<const BoundaryMps>(BoundaryMps::trivial(cols));
        break;
      }
      if ((top = find(m, m.top_[k], row_key(n, cols, 0, k)))) break;
    }
    for (; k < mid; ++k) {
      top = std::make_shared<const BoundaryMps>(absorb_top(*top, open_row(peps, n, k), plan.chi));
      insert(m, m.top_[k + 1], row_key(n, cols, 0, k + 1), top);
    }

    std::shared_ptr<const BoundaryMps> bottom;
    k = mid;
    for (;; ++k) {
      if (k == rows - 1) {
        bottom = std::make_shared<const BoundaryMps>(BoundaryMps::trivial(cols));
        break;
      }
      if ((bottom = find(m, m.bottom_[k], row_key(n, cols, k + 1, rows)))) break;
    }
    for (; k > mid; --k) {
      bottom = std::make_shared<const BoundaryMps>(absorb_bottom(*bottom, open_row(peps, n, k), plan.chi));
      insert(m, m.bottom_[k - 1], row_key(n, cols, k, rows), bottom);
    }

    fill_diag(diag, *top, *bottom);
    return finish(close_row(*top, open_row(peps, n, mid), *bottom));
  }
};

void FixedMemo::clear() {
  top_.clear();
  bottom_.clear();
  bound_ = false;
}

AmplitudeValue amplitude_fixed(const Peps& peps, const SpinConfiguration& n, const FixedPlan& plan,
                               FixedMemo* memo, AmplitudeDiagnostics* diag) {
  check_plan(peps, plan);
  validate(n, peps.n_sites(), peps.phys_dim());
  if (memo) return FixedMemoAccess::evaluate(*memo, peps, n, plan, diag);
  BoundaryMps top = BoundaryMps::trivial(plan.cols);
  for (std::size_t r = 0; r < plan.mid; ++r) top = absorb_top(top, open_row(peps, n, r), plan.chi);
  BoundaryMps bottom = BoundaryMps::trivial(plan.cols);
  for (std::size_t r = plan.rows - 1; r > plan.mid; --r) {
    bottom = absorb_bottom(bottom, open_row(peps, n, r), plan.chi);
  }
  fill_diag(diag, top, bottom);
  return finish(close_row(top, open_row(peps, n, plan.mid), bottom));
}

FixedContraction::FixedContraction(TensorGrid open_grid, const FixedPlan& plan)
    : grid_(std::move(open_grid)), plan_(plan) {
  if (grid_.rows != plan.rows || grid_.cols != plan.cols) {
    throw ArgumentError("plan does not match grid extents");
  }
  top_.push_back(BoundaryMps::trivial(plan.cols));
  for (std::size_t r = 0; r < plan.mid; ++r) top_.push_back(absorb_top(top_.back(), grid_.row(r), plan.chi));
  bottom_.assign(plan.rows, BoundaryMps{});
  bottom_[plan.rows - 1] = BoundaryMps::trivial(plan.cols);
  for (std::size_t r = plan.rows - 1; r > plan.mid; --r) {
    bottom_[r - 1] = absorb_bottom(bottom_[r], grid_.row(r), plan.chi);
  }
  fill_diag(&diag_, top_[plan.mid], bottom_[plan.mid]);
  value_ = finish(close_row(top_[plan.mid], grid_.row(plan.mid), bottom_[plan.mid]));
}

AmplitudeValue FixedContraction::with_row(std::size_t r, std::span<const Tensor> row,
                                          AmplitudeDiagnostics* diag) const {
  const std::size_t mid = plan_.mid;
  if (r >= plan_.rows) throw ArgumentError("row index out of range");
  if (r == mid) {
    fill_diag(diag, top_[mid], bottom_[mid]);
    return finish(close_row(top_[mid], row, bottom_[mid]));
  }
  if (r < mid) {
    BoundaryMps top = absorb_top(top_[r], row, plan_.chi);
    for (std::size_t k = r + 1; k < mid; ++k) top = absorb_top(top, grid_.row(k), plan_.chi);
    fill_diag(diag, top, bottom_[mid]);
    return finish(close_row(top, grid_.row(mid), bottom_[mid]));
  }
  BoundaryMps bottom = absorb_bottom(bottom_[r], row, plan_.chi);
  for (std::size_t k = r - 1; k > mid; --k) bottom = absorb_bottom(bottom, grid_.row(k), plan_.chi);
  fill_diag(diag, top_[mid], bottom);
  return finish(close_row(top_[mid], grid_.row(mid), bottom));
}

DynamicCache::DynamicCache(const Peps& peps, std::size_t chi)
    : fingerprint_(peps.fingerprint()), rows_(peps.rows()), cols_(peps.cols()), chi_(chi) {
  if (chi < 1) throw ArgumentError("chi must be positive");
  top_.resize(rows_);
  bottom_.resize(rows_);
}

struct DynamicAccess {
  static DynamicResult evaluate(const DynamicCache& cache, const Peps& peps, const SpinConfiguration& n,
                                std::size_t chi) {
    if (cache.fingerprint_ != peps.fingerprint() || cache.rows_ != peps.rows() ||
        cache.cols_ != peps.cols()) {
      throw StateError("dynamic cache was built for a different PEPS");
    }
    if (cache.chi_ != chi) throw StateError("dynamic cache was built for a different chi");
    validate(n, peps.n_sites(), peps.phys_dim());
    const std::size_t rows = cache.rows_, cols = cache.cols_;

    std::size_t r = rows / 2;
    if (cache.last_config_) {
      const auto& prev = *cache.last_config_;
      std::optional<std::size_t> lowest;
      for (std::size_t row = 0; row < rows; ++row) {
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t s = row * cols + c;
          if (prev[s] != n[s]) lowest = row;
        }
      }
      r = lowest ? *lowest : cache.last_row_;
    }

    DynamicCache out = cache;
    auto valid = [&](const std::optional<DynamicCache::Entry>& e, const std::vector<int>& key) {
      return e.has_value() && e->key == key;
    };

    std::size_t k = r;
    std::shared_ptr<const BoundaryMps> top;
    for (;; --k) {
      auto key = row_key(n, cols, 0, k);
      if (valid(out.top_[k], key)) {
        top = out.top_[k]->value;
        break;
      }
      if (k == 0) {
        top = std::make_shared<const BoundaryMps>(BoundaryMps::trivial(cols));
        out.top_[0] = DynamicCache::Entry{std::move(key), top};
        break;
      }
    }
    for (; k < r; ++k) {
      top = std::make_shared<const BoundaryMps>(absorb_top(*top, open_row(peps, n, k), chi));
      out.top_[k + 1] = DynamicCache::Entry{row_key(n, cols, 0, k + 1), top};
    }

    k = r;
    std::shared_ptr<const BoundaryMps> bottom;
    for (;; ++k) {
      auto key = row_key(n, cols, k + 1, rows);
      if (valid(out.bottom_[k], key)) {
        bottom = out.bottom_[k]->value;
        break;
      }
      if (k == rows - 1) {
        bottom = std::make_shared<const BoundaryMps>(BoundaryMps::trivial(cols));
        out.bottom_[k] = DynamicCache::Entry{std::move(key), bottom};
        break;
      }
    }
    for (; k > r; --k) {
      bottom = std::make_shared<const BoundaryMps>(absorb_bottom(*bottom, open_row(peps, n, k), chi));
      out.bottom_[k - 1] = DynamicCache::Entry{row_key(n, cols, k, rows), bottom};
    }

    AmplitudeValue amp = finish(close_row(*top, open_row(peps, n, r), *bottom));
    out.last_config_ = n;
    out.last_row_ = r;
    return {amp, std::move(out)};
  }
};

DynamicResult amplitude_dynamic(const DynamicCache& cache, const Peps& peps, const SpinConfiguration& n,
                                std::size_t chi) {
  return DynamicAccess::evaluate(cache, peps, n, chi);
}

AmplitudeValue exact_amplitude(const Peps& peps, const SpinConfiguration& n) {
  if (peps.n_sites() > 36 || peps.bond_dim() > 4) {
    throw ResourceError("exact_amplitude is limited to 36 sites and D <= 4");
  }
  validate(n, peps.n_sites(), peps.phys_dim());
  BoundaryMps top = BoundaryMps::trivial(peps.cols());
  for (std::size_t r = 0; r + 1 < peps.rows(); ++r) {
    top = boundary_absorb(top, open_row(peps, n, r), kUnboundedChi);
  }
  return finish(close_row(top, open_row(peps, n, peps.rows() - 1), BoundaryMps::trivial(peps.cols())));
}

}  // namespace tnf
