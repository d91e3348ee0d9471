#include "relucert/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relucert/kernels.hpp"

namespace relucert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kKktTol = 1e-9;
constexpr double kFeasSlack = 1e-7;    // geometric slack allowed on the witness
constexpr double kInteriorMargin = 1e-7;

double norm2(const double* p, std::size_t n) {
  return std::sqrt(kernels::dot(p, p, n));
}

// Internal form: rows n_k with n_k . z >= rhs_k; row 0 is the equality when
// has_eq is set (pre-oriented so it is violated downward at the anchor, held
// active forever, multiplier free in sign).
struct GiProblem {
  Matrix n;          // q x m
  Vector rhs;        // q
  Vector row_norm;   // q
  bool has_eq = false;
};

struct GiState {
  SolverStatus status = SolverStatus::kNotConverged;
  Vector z;
  std::vector<std::size_t> active;
  Vector u;  // multipliers aligned with active
  std::size_t iterations = 0;
};

// Thin-QR of the active normals by modified Gram-Schmidt with one
// reorthogonalisation pass. Returns false on rank collapse, which the caller
// treats as non-convergence.
bool qr_active(const GiProblem& p, const std::vector<std::size_t>& active,
               Matrix& qmat, Matrix& rmat) {
  const std::size_t m = p.n.cols;
  const std::size_t q = active.size();
  qmat = Matrix(q, m);  // rows are the orthonormal vectors
  rmat = Matrix(q, q);
  Vector v(m);
  for (std::size_t j = 0; j < q; ++j) {
    const double* col = p.n.row(active[j]);
    std::copy(col, col + m, v.begin());
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        const double h = kernels::dot(qmat.row(i), v.data(), m);
        kernels::axpy(-h, qmat.row(i), v.data(), m);
        rmat.at(i, j) += h;
      }
    }
    const double nv = norm2(v.data(), m);
    if (nv <= 1e-13 * std::max(1.0, p.row_norm[active[j]])) return false;
    rmat.at(j, j) = nv;
    for (std::size_t i = 0; i < m; ++i) qmat.at(j, i) = v[i] / nv;
  }
  return true;
}

// r = R^-1 Q^T n_p (expansion coefficients of n_p over the active normals)
// and d = n_p - Q Q^T n_p (its component off their span).
void decompose(const GiProblem& p, const Matrix& qmat, const Matrix& rmat,
               std::size_t cand, Vector& coeff, Vector& d) {
  const std::size_t m = p.n.cols;
  const std::size_t q = qmat.rows;
  const double* np = p.n.row(cand);
  d.assign(np, np + m);
  Vector h(q);
  for (std::size_t i = 0; i < q; ++i) {
    h[i] = kernels::dot(qmat.row(i), d.data(), m);
    kernels::axpy(-h[i], qmat.row(i), d.data(), m);
  }
  coeff.assign(q, 0.0);
  for (std::size_t i = q; i-- > 0;) {
    double s = h[i];
    for (std::size_t j = i + 1; j < q; ++j) s -= rmat.at(i, j) * coeff[j];
    coeff[i] = s / rmat.at(i, i);
  }
}

// Validates the Farkas certificate collected at the infeasibility branch:
// n_cand = sum coeff_k n_k with every inequality coefficient <= 0, yet the
// implied bound contradicts rhs_cand. Only then is Infeasible reported.
bool certify_infeasible(const GiProblem& p, const std::vector<std::size_t>& active,
                        const Vector& coeff, std::size_t cand) {
  const std::size_t m = p.n.cols;
  Vector resid(p.n.row(cand), p.n.row(cand) + m);
  double scale = p.row_norm[cand];
  double bound = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const bool is_eq = p.has_eq && active[i] == 0;
    if (!is_eq && coeff[i] > 1e-9) return false;
    kernels::axpy(-coeff[i], p.n.row(active[i]), resid.data(), m);
    scale += std::abs(coeff[i]) * p.row_norm[active[i]];
    bound += coeff[i] * p.rhs[active[i]];
  }
  if (norm2(resid.data(), m) > 1e-7 * std::max(1.0, scale)) return false;
  return p.rhs[cand] - bound > 1e-9 * (1.0 + std::abs(p.rhs[cand]));
}

// Dual active-set least-distance solve: starts at the unconstrained optimum
// (the anchor itself) and adds violated constraints one at a time, keeping
// the iterate optimal for the active subset throughout.
GiState gi_solve(const GiProblem& p, const Vector& anchor, std::size_t max_iter) {
  const std::size_t m = p.n.cols;
  const std::size_t q_total = p.n.rows;
  GiState st;
  st.z = anchor;
  Matrix qmat, rmat;
  Vector coeff, d(m);
  double u_cand = 0.0;

  auto slack = [&](std::size_t k) {
    return kernels::dot(p.n.row(k), st.z.data(), m) - p.rhs[k];
  };

  // The equality is processed first and pinned active, so every later primal
  // step stays inside its hyperplane.
  std::size_t cand = p.has_eq ? 0 : q_total;
  while (st.iterations < max_iter) {
    if (cand == q_total) {
      // Scan for the most violated row, depth measured geometrically.
      double worst = -1e-10;
      for (std::size_t k = 0; k < q_total; ++k) {
        if (std::find(st.active.begin(), st.active.end(), k) != st.active.end()) {
          continue;
        }
        const double s = slack(k) / std::max(p.row_norm[k], 1e-12);
        if (s < worst) {
          worst = s;
          cand = k;
        }
      }
      if (cand == q_total) {
        st.status = SolverStatus::kFeasible;
        return st;
      }
      u_cand = 0.0;
    }
    ++st.iterations;

    if (!qr_active(p, st.active, qmat, rmat)) return st;
    decompose(p, qmat, rmat, cand, coeff, d);
    const double dd = kernels::dot(d.data(), d.data(), m);
    const bool have_dir = dd > 1e-24 * p.row_norm[cand] * p.row_norm[cand];

    // Dual blocking step over active inequalities (the equality never blocks).
    double t1 = kInf;
    std::size_t block = st.active.size();
    for (std::size_t i = 0; i < st.active.size(); ++i) {
      if (p.has_eq && st.active[i] == 0) continue;
      if (coeff[i] > 1e-13) {
        const double t = st.u[i] / coeff[i];
        if (t < t1) {
          t1 = t;
          block = i;
        }
      }
    }
    const double s_cand = slack(cand);
    const double t2 = have_dir ? -s_cand / dd : kInf;
    const double t = std::min(t1, t2);

    if (t == kInf) {
      if (certify_infeasible(p, st.active, coeff, cand)) {
        st.status = SolverStatus::kInfeasible;
      }
      return st;
    }

    if (have_dir && t > 0.0) kernels::axpy(t, d.data(), st.z.data(), m);
    for (std::size_t i = 0; i < st.active.size(); ++i) st.u[i] -= t * coeff[i];
    u_cand += t;

    if (t2 <= t1 && have_dir) {
      st.active.push_back(cand);
      st.u.push_back(u_cand);
      cand = q_total;
    } else {
      st.active.erase(st.active.begin() + static_cast<std::ptrdiff_t>(block));
      st.u.erase(st.u.begin() + static_cast<std::ptrdiff_t>(block));
    }
  }
  return st;
}

// Re-projects the anchor exactly onto the final active set, which sharpens
// the KKT residual to machine precision before the outcome is verified.
void polish(const GiProblem& p, const Vector& anchor, GiState& st) {
  if (st.active.empty()) return;
  Matrix qmat, rmat;
  if (!qr_active(p, st.active, qmat, rmat)) return;
  const std::size_t m = p.n.cols;
  const std::size_t q = st.active.size();
  // Solve for z = anchor + N alpha with N^T z = rhs_A via the thin QR.
  Vector resid(q);
  for (std::size_t i = 0; i < q; ++i) {
    resid[i] = p.rhs[st.active[i]] -
               kernels::dot(p.n.row(st.active[i]), anchor.data(), m);
  }
  // N = Q^T-parameterised: N^T N alpha = resid with N columns n_k = R^T Q
  // rows; express z - anchor = Q beta, then (R^T beta) = resid.
  Vector beta(q);
  for (std::size_t i = 0; i < q; ++i) {
    double s = resid[i];
    for (std::size_t j = 0; j < i; ++j) s -= rmat.at(j, i) * beta[j];
    beta[i] = s / rmat.at(i, i);
  }
  Vector z = anchor;
  for (std::size_t i = 0; i < q; ++i) kernels::axpy(beta[i], qmat.row(i), z.data(), m);
  // Keep the polish only if it does not disturb inactive rows.
  for (std::size_t k = 0; k < p.n.rows; ++k) {
    const double s = kernels::dot(p.n.row(k), z.data(), m) - p.rhs[k];
    if (s < -kFeasSlack * std::max(p.row_norm[k], 1.0)) return;
  }
  st.z = std::move(z);
}

bool verify_feasible(const GiProblem& p, const Vector& anchor, const GiState& st) {
  const std::size_t m = p.n.cols;
  for (std::size_t k = 0; k < p.n.rows; ++k) {
    const double s = kernels::dot(p.n.row(k), st.z.data(), m) - p.rhs[k];
    const double geom = std::max(p.row_norm[k], 1.0);
    if (s < -kFeasSlack * geom) return false;
    if (p.has_eq && k == 0 && std::abs(s) > kFeasSlack * geom) return false;
  }
  // Stationarity: z - anchor must be a nonnegative combination of the active
  // normals (sign-free for the equality). Multipliers are refit from scratch
  // since the polish step may have moved z off the solver's own duals.
  Vector grad(m);
  for (std::size_t i = 0; i < m; ++i) grad[i] = st.z[i] - anchor[i];
  const double grad_norm = norm2(grad.data(), m);
  if (st.active.empty()) return grad_norm <= kKktTol * (1.0 + norm2(anchor.data(), m));
  Matrix qmat, rmat;
  if (!qr_active(p, st.active, qmat, rmat)) return false;
  const std::size_t q = st.active.size();
  Vector h(q);
  Vector resid = grad;
  for (std::size_t i = 0; i < q; ++i) {
    h[i] = kernels::dot(qmat.row(i), resid.data(), m);
    kernels::axpy(-h[i], qmat.row(i), resid.data(), m);
  }
  Vector u(q);
  double u_scale = 1.0;
  for (std::size_t i = q; i-- > 0;) {
    double s = h[i];
    for (std::size_t j = i + 1; j < q; ++j) s -= rmat.at(i, j) * u[j];
    u[i] = s / rmat.at(i, i);
    u_scale = std::max(u_scale, std::abs(u[i]));
  }
  for (std::size_t i = 0; i < q; ++i) {
    if (!(p.has_eq && st.active[i] == 0) && u[i] < -1e-7 * u_scale) return false;
  }
  return norm2(resid.data(), m) <= kKktTol * (1.0 + grad_norm + u_scale);
}

GiProblem build_problem(const InputPoint& anchor,
                        const std::vector<Constraint>& ineqs,
                        const Constraint* equality, const Vector& margins) {
  const std::size_t m = anchor.size();
  const std::size_t rows = ineqs.size() + (equality ? 1 : 0);
  GiProblem p;
  p.has_eq = equality != nullptr;
  p.n = Matrix(rows, m);
  p.rhs.resize(rows);
  p.row_norm.resize(rows);
  std::size_t r = 0;
  if (equality) {
    if (equality->normal.size() != m) throw InputError("equality dimension mismatch");
    if (equality->degenerate()) throw InputError("equality normal is degenerate");
    // a.z + c = 0 becomes (-a).z >= c; orient so the anchor sits below.
    double s = -kernels::dot(equality->normal.data(), anchor.data(), m) -
               equality->offset;
    const double sign = (s > 0.0) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < m; ++i) p.n.at(r, i) = -sign * equality->normal[i];
    p.rhs[r] = sign * equality->offset;
    p.row_norm[r] = equality->norm;
    ++r;
  }
  for (std::size_t k = 0; k < ineqs.size(); ++k, ++r) {
    const Constraint& c = ineqs[k];
    if (c.normal.size() != m) {
      throw InputError("inequality " + std::to_string(k) + " dimension mismatch");
    }
    for (std::size_t i = 0; i < m; ++i) p.n.at(r, i) = -c.normal[i];
    p.rhs[r] = c.offset + (margins.empty() ? 0.0 : margins[k]);
    p.row_norm[r] = c.norm;
  }
  return p;
}

SolverOutcome run(const InputPoint& anchor, const std::vector<Constraint>& ineqs,
                  const Constraint* equality, const Vector& margins) {
  if (!all_finite(anchor)) throw InputError("solver anchor contains non-finite entries");
  GiProblem p = build_problem(anchor, ineqs, equality, margins);
  const std::size_t budget = 10 * (p.n.rows + anchor.size()) + 10;
  GiState st = gi_solve(p, anchor, budget);
  SolverOutcome out;
  out.iterations = st.iterations;
  if (st.status == SolverStatus::kInfeasible) {
    out.status = SolverStatus::kInfeasible;
    return out;
  }
  if (st.status == SolverStatus::kFeasible) {
    polish(p, anchor, st);
    if (verify_feasible(p, anchor, st)) {
      out.status = SolverStatus::kFeasible;
      out.witness = st.z;
      Vector diff(anchor.size());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = st.z[i] - anchor[i];
      out.distance = norm2(diff.data(), diff.size());
      return out;
    }
  }
  out.status = SolverStatus::kNotConverged;
  return out;
}

}  // namespace

SolverOutcome min_distance_on_boundary(const RegionProblem& problem) {
  return run(problem.x, problem.inequalities,
             problem.equality ? &*problem.equality : nullptr, {});
}

FeasibilityOutcome feasibility(const std::vector<Constraint>& inequalities,
                               std::size_t dim) {
  const Vector anchor(dim, 0.0);
  FeasibilityOutcome out;
  // Margin-tightened pass first: its witness clears every face strictly.
  Vector margins(inequalities.size());
  for (std::size_t k = 0; k < inequalities.size(); ++k) {
    margins[k] = kInteriorMargin * inequalities[k].norm;
  }
  SolverOutcome strict = run(anchor, inequalities, nullptr, margins);
  if (strict.status == SolverStatus::kFeasible) {
    out.status = SolverStatus::kFeasible;
    out.witness = std::move(strict.witness);
    return out;
  }
  SolverOutcome loose = run(anchor, inequalities, nullptr, {});
  out.status = loose.status;
  if (loose.status == SolverStatus::kFeasible) out.witness = std::move(loose.witness);
  return out;
}

FeasibilityOutcome feasibility_any(const std::vector<Constraint>& inequalities,
                                   std::size_t dim) {
  const Vector anchor(dim, 0.0);
  SolverOutcome loose = run(anchor, inequalities, nullptr, {});
  FeasibilityOutcome out;
  out.status = loose.status;
  if (loose.status == SolverStatus::kFeasible) out.witness = std::move(loose.witness);
  return out;
}

}  // namespace relucert
