#include "nlsnf/multi_index.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace nlsnf {

MultiIndex::MultiIndex(std::vector<Index> entries) : e_(std::move(entries)) {
  std::sort(e_.begin(), e_.end());
}

std::array<std::int64_t, kMaxDim> MultiIndex::momentum() const {
  std::array<std::int64_t, kMaxDim> m{};
  for (const Index& j : e_)
    for (int i = 0; i < kMaxDim; ++i) m[i] += std::int64_t(j.a[i]) * j.delta;
  return m;
}

bool MultiIndex::zero_momentum() const {
  auto m = momentum();
  for (int i = 0; i < kMaxDim; ++i)
    if (m[i] != 0) return false;
  return true;
}

double MultiIndex::mu() const {
  if (e_.size() < 3) return 0.0;
  std::vector<double> mods(e_.size());
  for (std::size_t i = 0; i < e_.size(); ++i) mods[i] = e_[i].abs();
  std::nth_element(mods.begin(), mods.begin() + 2, mods.end(), std::greater<double>());
  return mods[2];
}

bool MultiIndex::is_resonant() const {
  if (e_.size() % 2 != 0) return false;
  std::map<Site, int> balance;  // (#xi - #eta) per site
  for (const Index& j : e_) balance[j.a] += j.delta;
  for (const auto& [site, b] : balance)
    if (b != 0) return false;
  return true;
}

MultiIndex MultiIndex::conjugated() const {
  std::vector<Index> out;
  out.reserve(e_.size());
  for (const Index& j : e_) out.push_back(j.conjugate());
  return MultiIndex(std::move(out));
}

double MultiIndex::n_product() const {
  double p = 1.0;
  for (const Index& j : e_) p *= 1.0 + j.abs();
  return p;
}

int MultiIndex::multiplicity(const Index& j) const {
  auto range = std::equal_range(e_.begin(), e_.end(), j);
  return int(range.second - range.first);
}

MultiIndex MultiIndex::erased(std::size_t pos) const {
  std::vector<Index> out;
  out.reserve(e_.size() - 1);
  for (std::size_t i = 0; i < e_.size(); ++i)
    if (i != pos) out.push_back(e_[i]);
  MultiIndex m;
  m.e_ = std::move(out);  // removing from a sorted list keeps it sorted
  return m;
}

MultiIndex MultiIndex::merged(const MultiIndex& a, std::size_t skip_a, const MultiIndex& b,
                              std::size_t skip_b) {
  MultiIndex m;
  m.e_.reserve(a.e_.size() + b.e_.size() - 2);
  std::size_t i = 0, k = 0;
  auto next_a = [&]() -> const Index* {
    while (i < a.e_.size() && i == skip_a) ++i;
    return i < a.e_.size() ? &a.e_[i] : nullptr;
  };
  auto next_b = [&]() -> const Index* {
    while (k < b.e_.size() && k == skip_b) ++k;
    return k < b.e_.size() ? &b.e_[k] : nullptr;
  };
  for (;;) {
    const Index* pa = next_a();
    const Index* pb = next_b();
    if (!pa && !pb) break;
    if (pa && (!pb || *pa <= *pb)) {
      m.e_.push_back(*pa);
      ++i;
    } else {
      m.e_.push_back(*pb);
      ++k;
    }
  }
  return m;
}

std::string MultiIndex::str(int d) const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < e_.size(); ++i)
    os << to_string(e_[i], d) << (i + 1 < e_.size() ? " " : "");
  os << "]";
  return os.str();
}

double divisor(const MultiIndex& j, const Frequencies& freqs) {
  double s = 0.0;
  for (const Index& idx : j.entries()) s += double(idx.delta) * freqs.at(idx);
  return s;
}

}  // namespace nlsnf
