// Shared aliases, error type, and sorted-index-set algebra used by every module.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace regmod {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Index sets are sorted ascending with unique entries throughout the library.
using IndexSet = std::vector<int>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool is_sorted_unique(const IndexSet& s) {
  for (size_t i = 1; i < s.size(); ++i)
    if (s[i - 1] >= s[i]) return false;
  return true;
}

inline bool set_contains(const IndexSet& s, int i) {
  return std::binary_search(s.begin(), s.end(), i);
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  out.reserve(a.size());
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool sets_disjoint(const IndexSet& a, const IndexSet& b) {
  return set_intersection(a, b).empty();
}

// Complement of s within {0, ..., m-1}.
inline IndexSet set_complement(const IndexSet& s, int m) {
  IndexSet out;
  out.reserve(static_cast<size_t>(m) - s.size());
  size_t k = 0;
  for (int i = 0; i < m; ++i) {
    if (k < s.size() && s[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

inline void require_index_set(const IndexSet& s, int m, const char* name) {
  if (!is_sorted_unique(s))
    throw Error(std::string(name) + ": index set must be sorted and unique");
  if (!s.empty() && (s.front() < 0 || s.back() >= m))
    throw Error(std::string(name) + ": index out of range [0, " + std::to_string(m) + ")");
}

// Gather the columns of A listed in idx, in the listed order.
inline Mat columns(const Mat& A, const IndexSet& idx) {
  Mat out(A.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = A.col(idx[j]);
  return out;
}

inline Vec gather(const Vec& v, const IndexSet& idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) out[static_cast<Eigen::Index>(j)] = v[idx[j]];
  return out;
}

// Scatter vals onto positions idx of a length-m zero vector.
inline Vec scatter(const Vec& vals, const IndexSet& idx, int m) {
  Vec out = Vec::Zero(m);
  for (size_t j = 0; j < idx.size(); ++j) out[idx[j]] = vals[static_cast<Eigen::Index>(j)];
  return out;
}

}  // namespace regmod
