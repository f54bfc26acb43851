#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "symot/nd_table.hpp"

namespace symot {

using Vec = Eigen::VectorXd;

// Finite point cloud with an enclosing radius. Points are required pairwise
// distinct at construction: Coulomb costs and measure-preserving permutation
// semantics both need atom identity.
class SupportSet {
 public:
  SupportSet(std::vector<Vec> points, double radius);

  int size() const { return static_cast<int>(points_.size()); }
  int dim() const { return static_cast<int>(points_[0].size()); }
  double radius() const { return radius_; }
  const Vec& point(int i) const { return points_[static_cast<std::size_t>(i)]; }
  const std::vector<Vec>& points() const { return points_; }

 private:
  std::vector<Vec> points_;
  double radius_;
};

using SupportPtr = std::shared_ptr<const SupportSet>;

SupportPtr make_support(std::vector<Vec> points, double radius);
SupportPtr make_support_1d(std::initializer_list<double> coords, double radius);

class DiscreteMeasure {
 public:
  DiscreteMeasure(SupportPtr support, Eigen::VectorXd weights);
  static DiscreteMeasure uniform(SupportPtr support);

  const SupportSet& support() const { return *support_; }
  SupportPtr support_ptr() const { return support_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double weight(int i) const { return weights_[i]; }
  bool is_uniform(double tol = 1e-12) const;

 private:
  SupportPtr support_;
  Eigen::VectorXd weights_;
};

// Family of N-1 bounded vector fields tabulated on a support set;
// field(l, i) is u_{l+1} at atom i.
class VectorFieldFamily {
 public:
  VectorFieldFamily(SupportPtr support, std::vector<std::vector<Vec>> fields, double bound);

  int num_fields() const { return static_cast<int>(fields_.size()); }
  int order() const { return num_fields() + 1; }  // the N of the cost (13)
  const Vec& field(int l, int atom) const {
    return fields_[static_cast<std::size_t>(l)][static_cast<std::size_t>(atom)];
  }
  const SupportSet& support() const { return *support_; }
  SupportPtr support_ptr() const { return support_; }
  double bound() const { return bound_; }

 private:
  SupportPtr support_;
  std::vector<std::vector<Vec>> fields_;
  double bound_;
};

using FieldFamilyPtr = std::shared_ptr<const VectorFieldFamily>;

enum class CostFamily { Quadratic, Plakhov, Coulomb, VectorField, Table };

struct CostSpec {
  CostFamily family = CostFamily::Quadratic;
  int N = 2;
  FieldFamilyPtr fields;                    // VectorField only
  std::shared_ptr<const NdTable> table;     // Table only

  static CostSpec quadratic(int N);
  static CostSpec plakhov();                // d=1, N=2 only
  static CostSpec coulomb(int N);
  static CostSpec vector_field(FieldFamilyPtr fields);
  static CostSpec explicit_table(std::shared_ptr<const NdTable> values);
};

struct CostTable {
  NdTable values;
  SupportPtr support;
  int order() const { return values.order(); }
  int n() const { return support->size(); }
};

// N-dimensional nonnegative mass table summing to 1.
class Coupling {
 public:
  Coupling(NdTable mass, SupportPtr support);
  const NdTable& mass() const { return mass_; }
  const SupportSet& support() const { return *support_; }
  SupportPtr support_ptr() const { return support_; }
  int order() const { return mass_.order(); }
  Eigen::VectorXd marginal(int slot) const;

 private:
  NdTable mass_;
  SupportPtr support_;
};

struct HamiltonianTable {
  NdTable values;
  SupportPtr support;
  int order() const { return values.order(); }
};

struct Potential {
  Eigen::VectorXd values;
  SupportPtr support;
};

// Index permutation whose order divides N (discrete measure-preserving
// N-involution on uniform atoms).
class NInvolution {
 public:
  NInvolution(std::vector<int> perm, int order_bound);

  int size() const { return static_cast<int>(perm_.size()); }
  int order_bound() const { return order_bound_; }
  int apply(int i) const { return perm_[static_cast<std::size_t>(i)]; }
  int apply_power(int i, int k) const;
  const std::vector<int>& perm() const { return perm_; }
  bool is_identity() const;
  std::vector<std::vector<int>> cycles() const;  // sorted, each starting at its min

  static bool is_valid(const std::vector<int>& perm, int order_bound);

 private:
  std::vector<int> perm_;
  int order_bound_;
};

// sigma^k: (x_1,...,x_N) -> (x_{k+1},...,x_N,x_1,...,x_k).
std::vector<int> cyclic_shift(const std::vector<int>& tuple, int k);

// The named cost families plus the vector-field pairing cost, evaluated on
// atom indices of one support set.
double eval_cost(const CostSpec& spec, const SupportSet& support, const std::vector<int>& tuple);

// Point-level evaluation; VectorField resolves the first point to its atom.
double eval_cost_points(const CostSpec& spec, const SupportSet& support,
                        const std::vector<Vec>& points);

CostTable build_cost_table(const CostSpec& spec, SupportPtr support,
                           std::size_t entry_cap = 10'000'000);

}  // namespace symot
