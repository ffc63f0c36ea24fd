#include "brox/bony.hpp"

#include <algorithm>

#include "brox/errors.hpp"

namespace brox {

BlockDecomposition::BlockDecomposition(const FourierField& f)
    : grid_(f.grid()), last_(lp_last_block(f.max_mode())) {
  const std::size_t count = static_cast<std::size_t>(last_ + 2);
  blocks_.reserve(count);
  partials_.reserve(count);
  std::vector<double> running(grid_.points(), 0.0);
  for (int j = -1; j <= last_; ++j) {
    blocks_.push_back(lp_block(f, j).values());
    const auto& b = blocks_.back();
    for (std::size_t i = 0; i < running.size(); ++i) running[i] += b[i];
    partials_.push_back(running);
  }
}

std::span<const double> BlockDecomposition::block(int j) const noexcept {
  if (j < -1 || j > last_) return {};
  return blocks_[static_cast<std::size_t>(j + 1)];
}

std::span<const double> BlockDecomposition::partial(int j) const noexcept {
  if (j < -1) return {};
  return partials_[static_cast<std::size_t>(std::min(j, last_) + 1)];
}

namespace {

void check_pair(const BlockDecomposition& f, const BlockDecomposition& g, const char* op) {
  if (!(f.grid() == g.grid())) throw GridError(std::string(op) + ": fields live on different grids");
}

void accumulate(std::vector<double>& acc, std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return;
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a[i] * b[i];
}

}  // namespace

FourierField para(const BlockDecomposition& f, const BlockDecomposition& g) {
  check_pair(f, g, "para");
  std::vector<double> acc(f.grid().points(), 0.0);
  for (int jp = 1; jp <= g.last_block(); ++jp) accumulate(acc, f.partial(jp - 2), g.block(jp));
  return FourierField::from_values(f.grid(), acc);
}

FourierField resonant(const BlockDecomposition& f, const BlockDecomposition& g) {
  check_pair(f, g, "resonant");
  std::vector<double> acc(f.grid().points(), 0.0);
  const int last = std::max(f.last_block(), g.last_block());
  for (int l = -1; l <= last; ++l)
    for (int d = -1; d <= 1; ++d) accumulate(acc, f.block(l), g.block(l + d));
  return FourierField::from_values(f.grid(), acc);
}

FourierField para(const FourierField& f, const FourierField& g) {
  require_same_grid(f, g, "para");
  return para(BlockDecomposition(f), BlockDecomposition(g));
}

FourierField resonant(const FourierField& f, const FourierField& g) {
  require_same_grid(f, g, "resonant");
  return resonant(BlockDecomposition(f), BlockDecomposition(g));
}

FourierField resonant_lift(const FourierField& X1, const FourierField& xi_n) {
  return resonant(gradient(X1), xi_n);
}

}  // namespace brox
