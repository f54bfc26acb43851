#include "symot/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace symot {

SupportSet::SupportSet(std::vector<Vec> points, double radius)
    : points_(std::move(points)), radius_(radius) {
  if (points_.empty()) throw std::invalid_argument("SupportSet: needs at least one point");
  if (!(radius_ > 0)) throw std::invalid_argument("SupportSet: radius must be positive");
  const auto d = points_[0].size();
  for (const auto& p : points_) {
    if (p.size() != d) throw std::invalid_argument("SupportSet: inconsistent point dimensions");
    if (p.norm() > radius_ + 1e-12)
      throw std::invalid_argument("SupportSet: point outside enclosing radius");
  }
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      if ((points_[i] - points_[j]).norm() == 0.0)
        throw std::invalid_argument("SupportSet: points must be pairwise distinct");
}

SupportPtr make_support(std::vector<Vec> points, double radius) {
  return std::make_shared<const SupportSet>(std::move(points), radius);
}

SupportPtr make_support_1d(std::initializer_list<double> coords, double radius) {
  std::vector<Vec> pts;
  for (double c : coords) {
    Vec p(1);
    p << c;
    pts.push_back(p);
  }
  return make_support(std::move(pts), radius);
}

DiscreteMeasure::DiscreteMeasure(SupportPtr support, Eigen::VectorXd weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (!support_) throw std::invalid_argument("DiscreteMeasure: null support");
  if (weights_.size() != support_->size())
    throw std::invalid_argument("DiscreteMeasure: weight count != atom count");
  double total = 0.0;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (weights_[i] < 0) throw std::invalid_argument("DiscreteMeasure: negative weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("DiscreteMeasure: weights must sum to 1 (got " +
                                std::to_string(total) + ")");
}

DiscreteMeasure DiscreteMeasure::uniform(SupportPtr support) {
  const int n = support->size();
  return DiscreteMeasure(std::move(support),
                         Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

bool DiscreteMeasure::is_uniform(double tol) const {
  const double w = 1.0 / static_cast<double>(support_->size());
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    if (std::abs(weights_[i] - w) > tol) return false;
  return true;
}

VectorFieldFamily::VectorFieldFamily(SupportPtr support, std::vector<std::vector<Vec>> fields,
                                     double bound)
    : support_(std::move(support)), fields_(std::move(fields)), bound_(bound) {
  if (!support_) throw std::invalid_argument("VectorFieldFamily: null support");
  if (fields_.empty()) throw std::invalid_argument("VectorFieldFamily: needs at least one field");
  const auto n = static_cast<std::size_t>(support_->size());
  const auto d = support_->dim();
  for (const auto& f : fields_) {
    if (f.size() != n) throw std::invalid_argument("VectorFieldFamily: field not defined on every atom");
    for (const auto& v : f) {
      if (v.size() != d) throw std::invalid_argument("VectorFieldFamily: field dimension mismatch");
      if (v.norm() > bound_ + 1e-12)
        throw std::invalid_argument("VectorFieldFamily: field value exceeds stated bound");
    }
  }
}

CostSpec CostSpec::quadratic(int N) {
  if (N < 2) throw std::invalid_argument("CostSpec: N must be >= 2");
  return {CostFamily::Quadratic, N, nullptr, nullptr};
}

CostSpec CostSpec::plakhov() { return {CostFamily::Plakhov, 2, nullptr, nullptr}; }

CostSpec CostSpec::coulomb(int N) {
  if (N < 2) throw std::invalid_argument("CostSpec: N must be >= 2");
  return {CostFamily::Coulomb, N, nullptr, nullptr};
}

CostSpec CostSpec::vector_field(FieldFamilyPtr fields) {
  if (!fields) throw std::invalid_argument("CostSpec: null field family");
  return {CostFamily::VectorField, fields->order(), std::move(fields), nullptr};
}

CostSpec CostSpec::explicit_table(std::shared_ptr<const NdTable> values) {
  if (!values) throw std::invalid_argument("CostSpec: null table");
  return {CostFamily::Table, values->order(), nullptr, std::move(values)};
}

Coupling::Coupling(NdTable mass, SupportPtr support)
    : mass_(std::move(mass)), support_(std::move(support)) {
  if (!support_) throw std::invalid_argument("Coupling: null support");
  const int n = support_->size();
  for (int d : mass_.dims())
    if (d != n) throw std::invalid_argument("Coupling: table shape must be n^N");
  double total = 0.0;
  for (double v : mass_.data()) {
    if (v < -1e-15) throw std::invalid_argument("Coupling: negative mass entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw std::invalid_argument("Coupling: total mass must be 1 (got " + std::to_string(total) + ")");
}

Eigen::VectorXd Coupling::marginal(int slot) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(support_->size());
  std::vector<int> t;
  for (std::size_t f = 0; f < mass_.size(); ++f) {
    mass_.unflatten_into(f, t);
    out[t[static_cast<std::size_t>(slot)]] += mass_[f];
  }
  return out;
}

NInvolution::NInvolution(std::vector<int> perm, int order_bound)
    : perm_(std::move(perm)), order_bound_(order_bound) {
  if (!is_valid(perm_, order_bound_))
    throw std::invalid_argument("NInvolution: permutation order must divide N");
}

bool NInvolution::is_valid(const std::vector<int>& perm, int order_bound) {
  if (order_bound < 1) return false;
  const int n = static_cast<int>(perm.size());
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int v : perm) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  // Cycle lengths must divide N; equivalently perm^N = identity.
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    if (visited[static_cast<std::size_t>(i)]) continue;
    int len = 0, j = i;
    do {
      visited[static_cast<std::size_t>(j)] = true;
      j = perm[static_cast<std::size_t>(j)];
      ++len;
    } while (j != i);
    if (order_bound % len != 0) return false;
  }
  return true;
}

int NInvolution::apply_power(int i, int k) const {
  int j = i;
  for (int s = 0; s < k; ++s) j = perm_[static_cast<std::size_t>(j)];
  return j;
}

bool NInvolution::is_identity() const {
  for (int i = 0; i < size(); ++i)
    if (perm_[static_cast<std::size_t>(i)] != i) return false;
  return true;
}

std::vector<std::vector<int>> NInvolution::cycles() const {
  std::vector<std::vector<int>> out;
  std::vector<bool> visited(perm_.size(), false);
  for (int i = 0; i < size(); ++i) {
    if (visited[static_cast<std::size_t>(i)]) continue;
    std::vector<int> cyc;
    int j = i;
    do {
      visited[static_cast<std::size_t>(j)] = true;
      cyc.push_back(j);
      j = perm_[static_cast<std::size_t>(j)];
    } while (j != i);
    out.push_back(std::move(cyc));
  }
  return out;
}

std::vector<int> cyclic_shift(const std::vector<int>& tuple, int k) {
  const int N = static_cast<int>(tuple.size());
  if (N == 0) return tuple;
  if (k < 0) throw std::invalid_argument("cyclic_shift: k must be nonnegative");
  k %= N;
  std::vector<int> out(tuple.size());
  for (int i = 0; i < N; ++i)
    out[static_cast<std::size_t>(i)] = tuple[static_cast<std::size_t>((i + k) % N)];
  return out;
}

namespace {

double quadratic_cost(const std::vector<const Vec*>& pts) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) s += (*pts[i] - *pts[j]).squaredNorm();
  return -s;
}

double coulomb_cost(const std::vector<const Vec*>& pts) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double r = (*pts[i] - *pts[j]).norm();
      if (r == 0.0) return kNegInf;
      s += 1.0 / r;
    }
  return -s;
}

}  // namespace

double eval_cost(const CostSpec& spec, const SupportSet& support, const std::vector<int>& tuple) {
  if (static_cast<int>(tuple.size()) != spec.N)
    throw std::invalid_argument("eval_cost: tuple length != N");
  switch (spec.family) {
    case CostFamily::Quadratic:
    case CostFamily::Coulomb: {
      // Fully permutation-symmetric families: accumulate over the sorted
      // index tuple so rotations of a tuple produce bit-identical values.
      std::vector<int> sorted = tuple;
      std::sort(sorted.begin(), sorted.end());
      std::vector<const Vec*> pts(sorted.size());
      for (std::size_t i = 0; i < sorted.size(); ++i) pts[i] = &support.point(sorted[i]);
      return spec.family == CostFamily::Quadratic ? quadratic_cost(pts) : coulomb_cost(pts);
    }
    case CostFamily::Plakhov: {
      if (support.dim() != 1 || spec.N != 2)
        throw std::invalid_argument("eval_cost: Plakhov cost requires d=1, N=2");
      const double x = support.point(tuple[0])[0], y = support.point(tuple[1])[0];
      return -1.0 - std::cos(x - y);
    }
    case CostFamily::VectorField: {
      const auto& fam = *spec.fields;
      if (fam.support().size() != support.size() || fam.support().dim() != support.dim())
        throw std::invalid_argument("eval_cost: field family and support mismatch");
      double s = 0.0;
      for (int l = 0; l + 1 < spec.N; ++l)
        s += fam.field(l, tuple[0]).dot(support.point(tuple[static_cast<std::size_t>(l) + 1]));
      return s;
    }
    case CostFamily::Table:
      return spec.table->at(tuple);
  }
  throw std::logic_error("eval_cost: unknown family");
}

double eval_cost_points(const CostSpec& spec, const SupportSet& support,
                        const std::vector<Vec>& points) {
  if (static_cast<int>(points.size()) != spec.N)
    throw std::invalid_argument("eval_cost_points: tuple length != N");
  const auto d = support.dim();
  for (const auto& p : points)
    if (p.size() != d) throw std::invalid_argument("eval_cost_points: point dimension mismatch");
  std::vector<int> tuple(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    int idx = -1;
    for (int j = 0; j < support.size(); ++j)
      if ((support.point(j) - points[i]).norm() == 0.0) {
        idx = j;
        break;
      }
    if (idx < 0) throw std::invalid_argument("eval_cost_points: point not in support");
    tuple[i] = idx;
  }
  return eval_cost(spec, support, tuple);
}

CostTable build_cost_table(const CostSpec& spec, SupportPtr support, std::size_t entry_cap) {
  const int n = support->size();
  std::size_t total = 1;
  for (int i = 0; i < spec.N; ++i) {
    total *= static_cast<std::size_t>(n);
    if (total > entry_cap)
      throw std::length_error("build_cost_table: n^N exceeds entry cap");
  }
  NdTable values = NdTable::cube(n, spec.N);
  std::vector<int> t;
  for (std::size_t f = 0; f < values.size(); ++f) {
    values.unflatten_into(f, t);
    values[f] = eval_cost(spec, *support, t);
  }
  return CostTable{std::move(values), std::move(support)};
}

}  // namespace symot
