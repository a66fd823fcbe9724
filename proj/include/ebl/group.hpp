#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "ebl/errors.hpp"

namespace ebl {

/// Angular eigenvalue of degree-k spherical harmonics on S^{N-1}.
inline double angular_eigenvalue(int k, int N) { return static_cast<double>(k) * (k + N - 2); }

/// Symmetry class of the admitted perturbations: which spherical-harmonic
/// degrees carry invariant harmonics, and how many.
class GroupSpec {
 public:
  /// Highest harmonic degree listed by default.
  static constexpr int default_max_degree = 64;

  const std::string& name() const { return name_; }
  int N() const { return N_; }
  int i1() const { return i1_; }
  int m1() const { return m1_; }
  const std::vector<int>& mode_indices() const { return modes_; }
  const std::vector<int>& multiplicities() const { return mult_; }
  double mu(int k) const { return angular_eigenvalue(k, N_); }
  bool admits(int k) const { return k == 0 || std::binary_search(modes_.begin(), modes_.end(), k); }

  /// Degrees-{d_i} invariant ring: harmonic multiplicity h_d = a_d - a_{d-2},
  /// a_d = number of monomials of degree d in the basic invariants.
  static GroupSpec from_invariant_degrees(std::string name, int N, std::vector<int> degrees, int max_degree) {
    std::vector<long> a(max_degree + 1, 0);
    a[0] = 1;
    for (int deg : degrees)
      for (int d = deg; d <= max_degree; ++d) a[d] += a[d - deg];
    std::vector<int> modes, mult;
    for (int d = 1; d <= max_degree; ++d) {
      const long h = a[d] - (d >= 2 ? a[d - 2] : 0);
      if (h > 0) {
        modes.push_back(d);
        mult.push_back(static_cast<int>(h));
      }
    }
    return GroupSpec(std::move(name), N, std::move(modes), std::move(mult));
  }

  /// O(m) x O(N-m) acting on R^m x R^{N-m}.
  static GroupSpec product_orthogonal(int N, int m, int max_degree = default_max_degree) {
    require(N >= 2 && m >= 1 && m <= N - 1, "product-orthogonal needs 1 <= m <= N-1");
    return from_invariant_degrees("product-orthogonal(" + std::to_string(m) + ")", N, {2, 2}, max_degree);
  }

  /// Symmetry group of the regular k-gon in the plane.
  static GroupSpec dihedral(int k, int max_degree = default_max_degree) {
    require(k >= 2, "dihedral order must be at least 2");
    return from_invariant_degrees("dihedral(" + std::to_string(k) + ")", 2, {2, k}, max_degree * k);
  }

  static GroupSpec tetrahedral(int max_degree = default_max_degree) {
    return from_invariant_degrees("tetrahedral", 3, {2, 3, 4}, max_degree);
  }
  static GroupSpec octahedral(int max_degree = default_max_degree) {
    return from_invariant_degrees("octahedral", 3, {2, 4, 6}, max_degree);
  }
  static GroupSpec icosahedral(int max_degree = default_max_degree) {
    return from_invariant_degrees("icosahedral", 3, {2, 6, 10}, max_degree);
  }

  /// Explicit mode list, mainly to exercise the hypothesis gate.
  static GroupSpec custom(int N, std::vector<int> modes, std::vector<int> multiplicities) {
    return GroupSpec("custom", N, std::move(modes), std::move(multiplicities));
  }

  /// Parses "product-orthogonal(m)", "dihedral(k)", "tetrahedral", "octahedral", "icosahedral"
  /// and "custom(k:m,...)".
  static GroupSpec parse(const std::string& text, int N) {
    std::string name = text, arg;
    const auto open = text.find('(');
    if (open != std::string::npos) {
      require(text.back() == ')', "malformed group '" + text + "'");
      name = text.substr(0, open);
      arg = text.substr(open + 1, text.size() - open - 2);
    }
    auto parse_int = [&](const std::string& s) {
      require(!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }),
              "group parameter must be a positive integer in '" + text + "'");
      return std::stoi(s);
    };
    if (name == "custom") {
      // custom(k:m,k:m,...) lists admitted modes with their multiplicities
      std::vector<int> modes, mult;
      std::stringstream ss(arg);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        require(colon != std::string::npos, "custom group entries are k:m in '" + text + "'");
        modes.push_back(parse_int(item.substr(0, colon)));
        mult.push_back(parse_int(item.substr(colon + 1)));
      }
      return custom(N, std::move(modes), std::move(mult));
    }
    if (name == "product-orthogonal") return product_orthogonal(N, arg.empty() ? 1 : parse_int(arg));
    if (name == "dihedral") {
      require(N == 2, "dihedral groups act in dimension 2");
      return dihedral(parse_int(arg));
    }
    require(arg.empty(), "group '" + name + "' takes no parameter");
    if (name == "tetrahedral" || name == "octahedral" || name == "icosahedral") {
      require(N == 3, "polyhedral groups act in dimension 3");
      if (name == "tetrahedral") return tetrahedral();
      if (name == "octahedral") return octahedral();
      return icosahedral();
    }
    throw InvalidArgument("unknown group '" + text + "'");
  }

 private:
  GroupSpec(std::string name, int N, std::vector<int> modes, std::vector<int> mult)
      : name_(std::move(name)), N_(N), modes_(std::move(modes)), mult_(std::move(mult)) {
    require(N_ >= 2, "group dimension must be at least 2");
    require(!modes_.empty() && modes_.size() == mult_.size(), "group needs at least one admitted mode");
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      require(modes_[i] >= 1 && mult_[i] >= 1, "mode indices and multiplicities must be positive");
      if (i > 0) require(modes_[i] > modes_[i - 1], "mode indices must increase strictly");
    }
    i1_ = modes_.front();
    m1_ = mult_.front();
    std::ostringstream msg;
    msg << "group " << name_ << " violates the symmetry hypothesis: i1 = " << i1_ << ", m1 = " << m1_
        << " (need i1 >= 2 and m1 odd)";
    require(i1_ >= 2 && m1_ % 2 == 1, msg.str());
  }

  std::string name_;
  int N_;
  std::vector<int> modes_;
  std::vector<int> mult_;
  int i1_ = 0;
  int m1_ = 0;
};

}  // namespace ebl
