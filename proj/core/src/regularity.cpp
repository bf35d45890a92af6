#include "simplexlab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "simplexlab/lp.hpp"
#include "simplexlab/rng.hpp"

namespace simplexlab {

namespace {

// Enumerate proper subsets of {0..m-1} in a fixed order: by size, then by
// bitmask. Includes the empty set (a global sign factor).
std::vector<std::vector<int>> proper_subsets(int m) {
  std::vector<std::vector<int>> out;
  std::vector<std::pair<int, int>> masks;  // (popcount, mask)
  for (int mask = 0; mask < (1 << m) - 1; ++mask) {
    masks.emplace_back(__builtin_popcount(static_cast<unsigned>(mask)), mask);
  }
  std::sort(masks.begin(), masks.end());
  for (auto [pc, mask] : masks) {
    std::vector<int> s;
    for (int a = 0; a < m; ++a) {
      if (mask & (1 << a)) s.push_back(a);
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct SignKey {
  std::size_t operator()(const std::vector<signed char>& v) const {
    std::size_t h = 1469598103934665603ULL;
    for (signed char c : v) {
      h ^= static_cast<std::size_t>(c + 2);
      h *= 1099511628211ULL;
    }
    return h;
  }
};

}  // namespace

AtomDictionary AtomDictionary::dual_products(HilbertSpace space, std::uint64_t max_patterns) {
  AtomDictionary dict;
  dict.space_ = space;
  const int m = static_cast<int>(space.dims.size());
  if (m < 1) throw std::invalid_argument("dual_products: empty grid");
  dict.subsets_ = proper_subsets(m);

  const int n = space.coordinate_count();
  std::vector<int> subgrid_points;
  double raw_log2 = 0.0;
  for (const auto& A : dict.subsets_) {
    int pts = 1;
    for (int a : A) pts *= space.dims[a];
    subgrid_points.push_back(pts);
    raw_log2 += pts;
  }
  {
    std::ostringstream d;
    d << "pm1-dual-products(dims=";
    for (int i = 0; i < m; ++i) d << (i ? "x" : "") << space.dims[i];
    d << ", factors=" << dict.subsets_.size() << ")";
    dict.descriptor_ = d.str();
  }
  if (raw_log2 > 62 || (std::uint64_t(1) << static_cast<int>(raw_log2)) > max_patterns) {
    dict.explicit_ = false;
    return dict;
  }

  // Strides for mapping a full-grid coordinate index to each factor's
  // pattern index.
  std::vector<int> strides(m, 1);
  for (int a = m - 2; a >= 0; --a) strides[a] = strides[a + 1] * space.dims[a + 1];

  std::uint64_t total_patterns = std::uint64_t(1) << static_cast<int>(raw_log2);
  std::unordered_map<std::vector<signed char>, int, SignKey> seen;
  std::vector<Eigen::VectorXd> atoms;
  std::vector<int> coord(m);
  std::vector<signed char> canon(static_cast<std::size_t>(n));

  for (std::uint64_t pattern = 0; pattern < total_patterns; ++pattern) {
    // Bit layout: factor f owns subgrid_points[f] consecutive bits.
    for (int x = 0; x < n; ++x) {
      int rest = x;
      for (int a = 0; a < m; ++a) {
        coord[a] = rest / strides[a];
        rest %= strides[a];
      }
      int value = 1;
      std::uint64_t bit_base = 0;
      for (std::size_t fidx = 0; fidx < dict.subsets_.size(); ++fidx) {
        const auto& A = dict.subsets_[fidx];
        int local = 0;
        for (int a : A) local = local * space.dims[a] + coord[a];
        if ((pattern >> (bit_base + local)) & 1) value = -value;
        bit_base += subgrid_points[fidx];
      }
      canon[static_cast<std::size_t>(x)] = static_cast<signed char>(value);
    }
    // Sign-canonical representative: first entry positive.
    if (canon[0] < 0) {
      for (auto& c : canon) c = static_cast<signed char>(-c);
    }
    if (seen.emplace(canon, static_cast<int>(atoms.size())).second) {
      Eigen::VectorXd v(n);
      for (int x = 0; x < n; ++x) v(x) = canon[static_cast<std::size_t>(x)];
      atoms.push_back(std::move(v));
    }
  }

  dict.explicit_ = true;
  dict.atoms_.resize(n, static_cast<int>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    dict.atoms_.col(static_cast<int>(j)) = atoms[j];
  }
  dict.span_rank_ = static_cast<int>(
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(dict.atoms_).rank());
  return dict;
}

AtomicNormResult atomic_norm(const HilbertPoint& f, const AtomDictionary& atoms) {
  if (!atoms.is_explicit()) {
    throw std::invalid_argument("atomic_norm: needs an explicit dictionary");
  }
  AtomicNormResult out;
  if (f.size() != atoms.atoms().rows()) {
    throw std::invalid_argument("atomic_norm: dimension mismatch");
  }
  if (f.lpNorm<Eigen::Infinity>() == 0.0) {
    out.finite = true;
    out.value = 0.0;
    return out;
  }
  lp::AtomicNormSolution sol = lp::atomic_norm_lp(atoms.atoms(), f);
  out.finite = sol.feasible;
  out.value = sol.feasible ? sol.value : std::numeric_limits<double>::infinity();
  for (const auto& w : sol.witness) out.witness[w.atom] += w.weight;
  return out;
}

DualNormResult dual_norm(const HilbertPoint& f, const AtomDictionary& atoms, std::uint64_t seed,
                         int restarts) {
  DualNormResult out;
  const HilbertSpace& space = atoms.space();
  if (atoms.is_explicit()) {
    if (atoms.count() == 0) throw std::invalid_argument("dual_norm: empty dictionary");
    Eigen::VectorXd products = atoms.atoms().transpose() * f * space.cell_measure;
    for (int j = 0; j < products.size(); ++j) {
      double v = std::abs(products(j));
      if (v > out.value) {
        out.value = v;
        out.maximizer = j;
      }
    }
    return out;
  }

  // Alternating maximization over the factor sign patterns.
  out.is_lower_bound = true;
  const int m = static_cast<int>(space.dims.size());
  const int n = space.coordinate_count();
  std::vector<int> strides(m, 1);
  for (int a = m - 2; a >= 0; --a) strides[a] = strides[a + 1] * space.dims[a + 1];

  const auto& subsets = atoms.factor_subsets();
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> factors(subsets.size());
  std::vector<int> coord(m);

  auto atom_value_at = [&](int x, std::size_t skip) {
    int rest = x;
    for (int a = 0; a < m; ++a) {
      coord[a] = rest / strides[a];
      rest %= strides[a];
    }
    double v = 1.0;
    for (std::size_t fidx = 0; fidx < subsets.size(); ++fidx) {
      if (fidx == skip) continue;
      int local = 0;
      for (int a : subsets[fidx]) local = local * space.dims[a] + coord[a];
      v *= factors[fidx][static_cast<std::size_t>(local)];
    }
    return v;
  };

  for (int r = 0; r < restarts; ++r) {
    for (std::size_t fidx = 0; fidx < subsets.size(); ++fidx) {
      int pts = 1;
      for (int a : subsets[fidx]) pts *= space.dims[a];
      factors[fidx].resize(static_cast<std::size_t>(pts));
      for (auto& s : factors[fidx]) s = rng.sign();
    }
    for (int sweep = 0; sweep < 64; ++sweep) {
      bool changed = false;
      for (std::size_t fidx = 0; fidx < subsets.size(); ++fidx) {
        std::vector<double> coeff(factors[fidx].size(), 0.0);
        for (int x = 0; x < n; ++x) {
          int rest = x;
          for (int a = 0; a < m; ++a) {
            coord[a] = rest / strides[a];
            rest %= strides[a];
          }
          int local = 0;
          for (int a : subsets[fidx]) local = local * space.dims[a] + coord[a];
          coeff[static_cast<std::size_t>(local)] += f(x) * atom_value_at(x, fidx);
        }
        for (std::size_t p = 0; p < coeff.size(); ++p) {
          double s = coeff[p] >= 0.0 ? 1.0 : -1.0;
          if (s != factors[fidx][p]) {
            factors[fidx][p] = s;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    double total = 0.0;
    for (int x = 0; x < n; ++x) total += f(x) * atom_value_at(x, subsets.size());
    out.value = std::max(out.value, std::abs(total) * space.cell_measure);
  }
  return out;
}

DualityReport duality_check(const HilbertPoint& f, const AtomDictionary& atoms,
                            std::uint64_t seed, int pairs) {
  if (!atoms.is_explicit()) {
    throw std::invalid_argument("duality_check: needs an explicit dictionary");
  }
  const HilbertSpace& space = atoms.space();
  const int n = space.coordinate_count();
  DualityReport report;

  double f_dual = dual_norm(f, atoms).value;
  SplitMix64 rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < pairs; ++p) {
    HilbertPoint g(n);
    for (int i = 0; i < n; ++i) g(i) = rng.uniform(-1.0, 1.0);
    AtomicNormResult g_atomic = atomic_norm(g, atoms);
    if (!g_atomic.finite) continue;
    double lhs = std::abs(space.inner(f, g));
    double slack = lhs - f_dual * g_atomic.value;
    worst = std::max(worst, slack);
    ++report.pairs_checked;
  }
  report.pairing_lhs = worst;
  report.pairing_ok = worst <= 1e-9;

  // Bidual via LP: max <f,g>_H subject to |<g, sigma_t>_H| <= 1.
  const Eigen::MatrixXd& S = atoms.atoms();
  int t = static_cast<int>(S.cols());
  Eigen::MatrixXd A(2 * t, n);
  A.topRows(t) = space.cell_measure * S.transpose();
  A.bottomRows(t) = -space.cell_measure * S.transpose();
  Eigen::VectorXd b = Eigen::VectorXd::Ones(2 * t);
  Eigen::VectorXd c = space.cell_measure * f;
  lp::IneqSolution bid = lp::maximize_with_inequalities(A, b, c);
  if (bid.status != lp::Status::optimal) {
    throw std::runtime_error("duality_check: bidual LP failed");
  }
  report.bidual_value = bid.objective;
  AtomicNormResult primal = atomic_norm(f, atoms);
  report.primal_value = primal.value;
  report.bidual_error = primal.finite
                            ? std::abs(report.bidual_value - report.primal_value)
                            : std::numeric_limits<double>::infinity();
  return report;
}

// ---------------------------------------------------------------------------
// Projection onto a Minkowski sum of polytope balls by pairwise Frank-Wolfe.

namespace {

struct PolytopePart {
  BallSpec::Kind kind = BallSpec::Kind::atomic;
  double radius = 0.0;
};

struct VertexTuple {
  std::vector<Eigen::VectorXd> component;  // per part
  std::vector<std::int64_t> signature;     // identity for active-set lookup
  Eigen::VectorXd sum;
};

struct ProjectionOutcome {
  Eigen::VectorXd point;                       // y
  std::vector<Eigen::VectorXd> parts;          // per part component of y
  std::map<int, double> atomic_witness;        // for the first atomic part
  double distance_h = 0.0;                     // ||f - y||_H
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  bool feasible_exit = false;   // stopped because distance <= feasible_dist
  bool infeasible_exit = false; // stopped with a certified lower bound
};

struct ProjectionStops {
  double feasible_dist_h = -1.0;    // early success threshold (H norm)
  double infeasible_dist_h = -1.0;  // early certified-failure threshold
};

class DualVertexPool {
 public:
  std::int64_t key_of(const Eigen::VectorXd& v) {
    std::vector<double> key(v.data(), v.data() + v.size());
    auto [it, inserted] = pool_.emplace(std::move(key), next_);
    if (inserted) ++next_;
    return it->second;
  }

 private:
  std::map<std::vector<double>, std::int64_t> pool_;
  std::int64_t next_ = 0;
};

ProjectionOutcome project_onto_ball_sum(const HilbertPoint& f, const AtomDictionary& dict,
                                        const std::vector<PolytopePart>& parts,
                                        const ProjectionStops& stops, int max_iterations,
                                        double gap_tol) {
  const HilbertSpace& space = dict.space();
  const int n = static_cast<int>(f.size());
  const double w = space.cell_measure;
  ProjectionOutcome out;

  if (parts.empty()) {
    out.point = Eigen::VectorXd::Zero(n);
    out.distance_h = space.norm(f);
    out.converged = true;
    return out;
  }
  if (!dict.is_explicit()) {
    throw std::invalid_argument("ball projection: needs an explicit dictionary");
  }
  for (const auto& p : parts) {
    if (p.kind == BallSpec::Kind::dual && dict.span_rank() < n) {
      throw std::invalid_argument(
          "ball projection: the dual ball is unbounded unless the atoms span the grid");
    }
  }

  const Eigen::MatrixXd& atoms = dict.atoms();
  DualVertexPool dual_pool;

  // Linear minimization oracle for one ball at direction grad (H pairing and
  // Euclidean agree up to the positive factor w).
  auto lmo = [&](const PolytopePart& part, const Eigen::VectorXd& grad,
                 std::int64_t& sig) -> Eigen::VectorXd {
    if (part.kind == BallSpec::Kind::atomic) {
      Eigen::VectorXd products = atoms.transpose() * grad;
      int best = 0;
      double bestv = std::abs(products(0));
      for (int j = 1; j < products.size(); ++j) {
        double v = std::abs(products(j));
        if (v > bestv) {
          bestv = v;
          best = j;
        }
      }
      double sign = products(best) > 0.0 ? -1.0 : 1.0;
      sig = 2 * best + (sign < 0.0 ? 1 : 0);
      return part.radius * sign * atoms.col(best);
    }
    // Dual ball {u : |<u, sigma>_H| <= radius} = (radius/w) {z : |sigma.z| <= 1}.
    // The support maximizer over the unit polytope is the dual vector of the
    // atomic-norm LP at -grad.
    if (grad.lpNorm<Eigen::Infinity>() == 0.0) {
      sig = -1;
      return Eigen::VectorXd::Zero(n);
    }
    lp::AtomicNormSolution sol = lp::atomic_norm_lp(atoms, -grad);
    if (!sol.feasible) {
      throw std::runtime_error("ball projection: dual-ball oracle failed (atoms do not span)");
    }
    Eigen::VectorXd u = (part.radius / w) * sol.dual;
    sig = dual_pool.key_of(u);
    return u;
  };

  auto make_tuple = [&](const Eigen::VectorXd& grad) {
    VertexTuple t;
    t.component.resize(parts.size());
    t.signature.resize(parts.size());
    t.sum = Eigen::VectorXd::Zero(n);
    for (std::size_t b = 0; b < parts.size(); ++b) {
      t.component[b] = lmo(parts[b], grad, t.signature[b]);
      t.sum += t.component[b];
    }
    return t;
  };

  std::vector<VertexTuple> active;
  std::vector<double> weight;
  Eigen::VectorXd y;

  {
    VertexTuple first = make_tuple(-f);
    y = first.sum;
    active.push_back(std::move(first));
    weight.push_back(1.0);
  }

  const double scale = std::max(1.0, w * f.squaredNorm());
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    Eigen::VectorXd grad = y - f;  // Euclidean; H differs by the factor w
    double dist_h = std::sqrt(w) * grad.norm();

    VertexTuple fw = make_tuple(grad);
    double gap_h = w * grad.dot(y - fw.sum);
    out.gap = gap_h;

    if (stops.feasible_dist_h >= 0.0 && dist_h <= stops.feasible_dist_h) {
      out.feasible_exit = true;
      break;
    }
    if (stops.infeasible_dist_h >= 0.0) {
      double lower_sq = dist_h * dist_h - 2.0 * gap_h;
      if (lower_sq > stops.infeasible_dist_h * stops.infeasible_dist_h) {
        out.infeasible_exit = true;
        break;
      }
    }
    if (gap_h <= gap_tol * scale) {
      out.converged = true;
      break;
    }

    // Away vertex among the active tuples.
    int away = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      double v = grad.dot(active[a].sum);
      if (v > best) {
        best = v;
        away = static_cast<int>(a);
      }
    }

    Eigen::VectorXd d = fw.sum - active[static_cast<std::size_t>(away)].sum;
    double dd = d.squaredNorm();
    if (dd == 0.0) {
      out.converged = true;
      break;
    }
    double gamma = -grad.dot(d) / dd;
    double gamma_max = weight[static_cast<std::size_t>(away)];
    if (gamma <= 0.0) {
      out.converged = true;
      break;
    }
    bool drop = gamma >= gamma_max;
    if (drop) gamma = gamma_max;

    // Move weight from the away tuple to the FW tuple.
    weight[static_cast<std::size_t>(away)] -= gamma;
    int fw_index = -1;
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (active[a].signature == fw.signature) {
        fw_index = static_cast<int>(a);
        break;
      }
    }
    if (fw_index < 0) {
      active.push_back(fw);
      weight.push_back(gamma);
    } else {
      weight[static_cast<std::size_t>(fw_index)] += gamma;
    }
    y += gamma * d;

    if (drop) {
      active.erase(active.begin() + away);
      weight.erase(weight.begin() + away);
    }
    if ((iter & 511) == 511) {
      // Refresh y from the convex combination to cancel drift.
      y.setZero();
      for (std::size_t a = 0; a < active.size(); ++a) y += weight[a] * active[a].sum;
    }
  }

  out.iterations = iter;
  out.point = y;
  out.distance_h = std::sqrt(w) * (f - y).norm();
  out.parts.assign(parts.size(), Eigen::VectorXd::Zero(n));
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t b = 0; b < parts.size(); ++b) {
      out.parts[b] += weight[a] * active[a].component[b];
    }
  }
  // Witness for the first atomic part: atom index -> accumulated coefficient.
  for (std::size_t b = 0; b < parts.size(); ++b) {
    if (parts[b].kind != BallSpec::Kind::atomic) continue;
    for (std::size_t a = 0; a < active.size(); ++a) {
      std::int64_t sig = active[a].signature[b];
      int atom = static_cast<int>(sig / 2);
      double sign = (sig % 2) ? -1.0 : 1.0;
      out.atomic_witness[atom] += weight[a] * sign * parts[b].radius;
    }
    break;
  }
  return out;
}

}  // namespace

SeparationResult separate(const HilbertPoint& f, const AtomDictionary& atoms,
                          const std::vector<BallSpec>& balls, double eps, int max_iterations,
                          double gap_tol) {
  if (balls.empty()) throw std::invalid_argument("separate: no balls");
  if (eps <= 0.0) throw std::invalid_argument("separate: eps must be positive");
  const HilbertSpace& space = atoms.space();
  const double shrink = 1.0 / (1.0 + eps);

  double hilbert_radius = 0.0;
  std::vector<PolytopePart> parts;
  for (const auto& b : balls) {
    if (b.scale <= 0.0) throw std::invalid_argument("separate: ball scales must be positive");
    if (b.kind == BallSpec::Kind::hilbert) {
      hilbert_radius += shrink * b.scale;
    } else {
      parts.push_back({b.kind, shrink * b.scale});
    }
  }

  ProjectionStops stops;
  if (hilbert_radius > 0.0) {
    // Membership is already decided once the polytope distance drops under
    // the aggregate Hilbert radius.
    stops.feasible_dist_h = hilbert_radius;
  }
  ProjectionOutcome proj =
      project_onto_ball_sum(f, atoms, parts, stops, max_iterations, gap_tol);

  SeparationResult result;
  result.iterations = proj.iterations;
  result.gap = proj.gap;

  // Nearest point of sum + hilbert ball: move from the polytope projection
  // toward f by the Hilbert radius.
  double dist_p = proj.distance_h;
  const double membership_tol = 1e-9;
  if (dist_p <= hilbert_radius + membership_tol) {
    result.membership = true;
    return result;
  }
  Eigen::VectorXd g = proj.point;
  if (hilbert_radius > 0.0) {
    g += (hilbert_radius / dist_p) * (f - proj.point);
  }
  result.nearest = g;
  result.distance = space.norm(f - g);

  double denom = space.inner(f - g, f);
  if (denom <= 0.0) {
    throw std::runtime_error("separate: degenerate pairing (projection failed)");
  }
  result.phi = (f - g) / denom;
  result.pairing = space.inner(f, result.phi);

  for (const auto& b : balls) {
    BallCertificate cert;
    cert.ball = b;
    cert.threshold = (1.0 + eps) / b.scale;
    switch (b.kind) {
      case BallSpec::Kind::atomic:
        cert.support_value = dual_norm(result.phi, atoms).value;
        break;
      case BallSpec::Kind::dual: {
        AtomicNormResult an = atomic_norm(result.phi, atoms);
        cert.support_value = an.value;
        break;
      }
      case BallSpec::Kind::hilbert:
        cert.support_value = space.norm(result.phi);
        break;
    }
    cert.ok = cert.support_value < cert.threshold;
    result.certificates.push_back(cert);
  }
  return result;
}

ConstantSchedule constant_schedule(int rounds, const std::function<double(double)>& eta) {
  if (rounds < 1) throw std::invalid_argument("constant_schedule: rounds must be >= 1");
  ConstantSchedule s;
  s.rounds = rounds;
  s.values.resize(static_cast<std::size_t>(rounds) + 1);
  double c = 1.0;
  s.values[0] = c;  // C_r
  for (int i = rounds; i >= 1; --i) {
    double e = eta(c);
    if (!(e > 0.0)) throw std::invalid_argument("constant_schedule: eta must be positive");
    c = std::max(c, 2.0 / e);
    s.values[static_cast<std::size_t>(rounds - i + 1)] = c;  // C_{i-1}
  }
  return s;
}

RegularityDecomposition regularity_decompose(const HilbertPoint& f, const AtomDictionary& atoms,
                                             double delta,
                                             const std::function<double(double)>& eta,
                                             int max_iterations, double gap_tol) {
  const HilbertSpace& space = atoms.space();
  if (delta <= 0.0) throw std::invalid_argument("regularity_decompose: delta must be positive");
  if (space.norm(f) > 1.0 + 1e-12) {
    throw std::invalid_argument("regularity_decompose: requires ||f||_H <= 1");
  }
  const int n = static_cast<int>(f.size());
  const double margin = 1.0 - 1e-6;  // strict-inequality slack on every radius

  int rounds = static_cast<int>(std::ceil(2.0 / (delta * delta)));
  ConstantSchedule schedule = constant_schedule(rounds, eta);

  double best_residual = std::numeric_limits<double>::infinity();
  const double f_h = space.norm(f);
  const AtomicNormResult f_atomic = atomic_norm(f, atoms);

  for (int i = rounds; i >= 0; --i) {
    double c_i = schedule.at(i);
    double eta_i = eta(c_i);
    int steps = rounds - i + 1;

    // Fast paths: a single ball already inside its shrunken radius.
    if (f_h <= delta * margin) {
      RegularityDecomposition out;
      out.sigma = Eigen::VectorXd::Zero(n);
      out.uniform = Eigen::VectorXd::Zero(n);
      out.small = f;
      out.constant = c_i;
      out.steps_tried = steps;
      out.small_norm = f_h;
      return out;
    }
    if (f_atomic.finite && f_atomic.value <= c_i * margin) {
      RegularityDecomposition out;
      out.sigma = f;
      out.uniform = Eigen::VectorXd::Zero(n);
      out.small = Eigen::VectorXd::Zero(n);
      out.constant = c_i;
      out.steps_tried = steps;
      out.sigma_witness = f_atomic.witness;
      out.sigma_witness_norm = f_atomic.value;
      return out;
    }

    std::vector<PolytopePart> parts = {
        {BallSpec::Kind::atomic, c_i * margin},
        {BallSpec::Kind::dual, eta_i * margin},
    };
    ProjectionStops stops;
    stops.feasible_dist_h = delta * margin;
    stops.infeasible_dist_h = delta;
    ProjectionOutcome proj =
        project_onto_ball_sum(f, atoms, parts, stops, max_iterations, gap_tol);

    if (proj.distance_h < best_residual) best_residual = proj.distance_h;

    if (proj.feasible_exit || proj.distance_h <= delta * margin) {
      RegularityDecomposition out;
      out.sigma = proj.parts[0];
      out.uniform = proj.parts[1];
      out.small = f - out.sigma - out.uniform;
      out.constant = c_i;
      out.steps_tried = steps;
      out.sigma_witness = proj.atomic_witness;
      for (const auto& [atom, coef] : out.sigma_witness) {
        out.sigma_witness_norm += std::abs(coef);
      }
      out.uniform_dual_norm = dual_norm(out.uniform, atoms).value;
      out.small_norm = space.norm(out.small);
      return out;
    }
  }

  std::ostringstream msg;
  msg << "regularity_decompose: no feasible split certified along the schedule"
      << " (best residual " << best_residual << ", delta " << delta << ")";
  throw std::runtime_error(msg.str());
}

PhiFamilyReport phi_family_diagnostics(const std::vector<HilbertPoint>& phis,
                                       const HilbertSpace& space, const ConstantSchedule& schedule,
                                       double delta, double eps) {
  PhiFamilyReport report;
  const double slack = (1.0 + eps) * (1.0 + eps);
  report.pair_bound = 0.5 * slack;
  const int r = static_cast<int>(phis.size());
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      PhiPairRow row;
      row.i = i;
      row.j = j;
      row.inner = space.inner(phis[static_cast<std::size_t>(i)], phis[static_cast<std::size_t>(j)]);
      report.max_abs_pair = std::max(report.max_abs_pair, std::abs(row.inner));
      report.pairs.push_back(row);
    }
  }
  report.pairs_ok = report.max_abs_pair <= report.pair_bound + 1e-9;

  if (r > 0) {
    HilbertPoint sum = phis[0];
    for (int i = 1; i < r; ++i) sum += phis[static_cast<std::size_t>(i)];
    report.sum_norm_sq = space.inner(sum, sum);
  }
  double rr = static_cast<double>(r);
  report.sum_bound = slack * (rr / (delta * delta) + 0.5 * (rr * rr - rr));
  report.sum_ok = report.sum_norm_sq <= report.sum_bound + 1e-9;
  (void)schedule;
  return report;
}

HilbertPoint random_unit_sign_field(const HilbertSpace& space, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const int n = space.coordinate_count();
  HilbertPoint f(n);
  for (int i = 0; i < n; ++i) f(i) = rng.sign();
  double norm = space.norm(f);
  return f / norm;
}

}  // namespace simplexlab
