#ifndef VOLT_MONOMIALS_HPP
#define VOLT_MONOMIALS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace volt {

// Exponent vector (d_0,...,d_m) of a monomial in the lagged inputs,
// one entry per lag.
struct MonomialIndex {
  std::vector<int> degrees;

  int total_degree() const {
    int s = 0;
    for (int d : degrees) s += d;
    return s;
  }
  bool operator==(const MonomialIndex& other) const = default;
};

struct MonomialIndexHash {
  std::size_t operator()(const MonomialIndex& idx) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (int d : idx.degrees) {
      h ^= static_cast<std::uint64_t>(d) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

// Number of exponent vectors with m+1 entries and total degree <= r:
// 1 + sum_{i=1..r} C(m+i, i).
long long count_monomials(int m, int r);

long long binomial(int n, int k);

// All multi-indices with 0 <= total degree <= r over m+1 variables, in the
// canonical order used everywhere in this library: ascending total degree,
// then descending lexicographic within a degree. This order is part of the
// feature-map and penalty-table contracts.
std::vector<MonomialIndex> enumerate_monomials(int m, int r);

// i! / (d_0! ... d_m!). Throws std::invalid_argument unless total degree == i.
long long multinomial_coeff(const MonomialIndex& idx, int i);

// prod_j u[j]^degrees[j]
double monomial_value(const MonomialIndex& idx, const Eigen::VectorXd& u);

// Monomial feature vector of a window, aligned with enumerate_monomials(m, r).
Eigen::VectorXd feature_map(const Eigen::VectorXd& window, int m, int r);

// Rank lookup over the canonical enumeration; backs the penalty expansion
// and the explicit-feature ridge oracle.
class MonomialTable {
 public:
  MonomialTable(int num_vars, int max_degree);

  const std::vector<MonomialIndex>& indices() const { return indices_; }
  int num_vars() const { return num_vars_; }
  int max_degree() const { return max_degree_; }
  // -1 when the index is not in the table.
  int rank(const MonomialIndex& idx) const;

 private:
  int num_vars_;
  int max_degree_;
  std::vector<MonomialIndex> indices_;
  std::unordered_map<MonomialIndex, int, MonomialIndexHash> ranks_;
};

}  // namespace volt

#endif  // VOLT_MONOMIALS_HPP
