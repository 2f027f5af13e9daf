//! Lovász number of a graph by a dense primal-dual interior-point method.
//!
//! The program solved is the standard theta SDP
//!
//! ```text
//!     maximize   <J, X>
//!     subject to trace(X) = 1,  X_ij = 0 for every edge (i,j),  X >= 0
//! ```
//!
//! written internally in minimization form with C = -J. The solver is an
//! infeasible-start HKM predictor-corrector with explicit Schur-complement
//! solves. Both the initial primal point X = I/n and the initial dual slack
//! S = (n+1)I - J are feasible, so iterates stay (numerically) on the
//! affine constraint manifolds and the duality gap alone drives convergence.
//! Graphs here stay below ~100 vertices, so dense O(n^3)/O(m^3) linear
//! algebra per iteration is acceptable and no external solver is needed;
//! the primal matrix doubles as an optimality certificate for tests.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::ExclusivityGraph;
use crate::independence::independence_number;

/// Default cap on the SDP size (vertex count).
pub const DEFAULT_THETA_CAP: usize = 100;

/// Fraction-to-boundary factor for primal/dual step lengths.
const STEP_FRACTION: f64 = 0.98;

#[derive(Debug, Clone)]
pub struct SdpOptions {
    /// Relative duality-gap stopping threshold.
    pub gap_tol: f64,
    /// Primal/dual feasibility tolerance.
    pub feas_tol: f64,
    pub max_iterations: usize,
    pub size_cap: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-7,
            feas_tol: 1e-8,
            max_iterations: 200,
            size_cap: DEFAULT_THETA_CAP,
        }
    }
}

impl SdpOptions {
    pub fn with_gap_tol(tol: f64) -> Self {
        Self {
            gap_tol: tol,
            ..Self::default()
        }
    }
}

/// Classical and quantum bounds of an exclusivity graph.
#[derive(Debug, Clone)]
pub struct GraphBounds {
    /// Independence number: the NCHV bound.
    pub alpha: u32,
    /// Lovász number: the quantum bound.
    pub theta: f64,
    /// Optimal primal matrix: PSD, unit trace, zero on edges, <J,X> = theta.
    pub theta_certificate: DMatrix<f64>,
}

/// Raw solver output, before alpha is attached.
#[derive(Debug, Clone)]
pub struct ThetaSolution {
    /// Primal objective <J, X> at the final iterate.
    pub theta: f64,
    /// Dual objective; an upper bound on theta.
    pub dual_theta: f64,
    pub certificate: DMatrix<f64>,
    pub iterations: usize,
    pub gap: f64,
}

/// Computes alpha exactly and theta within `opts.gap_tol`, plus the primal
/// certificate. Errors if the graph exceeds the configured caps or the SDP
/// fails to converge (the error carries the best primal/dual bracket).
pub fn lovasz_theta(g: &ExclusivityGraph, opts: &SdpOptions) -> Result<GraphBounds> {
    if g.n() > opts.size_cap {
        return Err(Error::SizeLimit {
            n: g.n(),
            cap: opts.size_cap,
        });
    }
    if opts.gap_tol <= 0.0 || opts.feas_tol <= 0.0 {
        return Err(Error::invalid("SDP tolerances must be positive"));
    }
    let alpha = independence_number(g)?;
    let sol = solve_theta_sdp(g, opts)?;
    Ok(GraphBounds {
        alpha,
        theta: sol.theta,
        theta_certificate: sol.certificate,
    })
}

/// Convenience wrapper: default options with `tol` as the gap threshold.
pub fn lovasz_theta_with_tol(g: &ExclusivityGraph, tol: f64) -> Result<GraphBounds> {
    lovasz_theta(g, &SdpOptions::with_gap_tol(tol))
}

/// Closed form for odd cycles: theta(C_n) = n cos(pi/n) / (1 + cos(pi/n)),
/// and theta of the complement is (1 + cos(pi/n)) / cos(pi/n). Their product
/// is exactly n (vertex-transitivity).
pub fn odd_cycle_theta_closed_form(n: usize, complemented: bool) -> Result<f64> {
    if n < 5 || n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "closed form needs an odd n >= 5, got {n}"
        )));
    }
    let c = (std::f64::consts::PI / n as f64).cos();
    Ok(if complemented {
        (1.0 + c) / c
    } else {
        n as f64 * c / (1.0 + c)
    })
}

/// Equality constraints of the theta SDP.
#[derive(Debug, Clone, Copy)]
enum Constraint {
    /// trace(X) = 1
    Trace,
    /// X_ab = 0 (scaled as <E_ab + E_ba, X> = 0)
    Edge(usize, usize),
}

impl Constraint {
    #[inline]
    fn inner(&self, m: &DMatrix<f64>) -> f64 {
        match *self {
            Constraint::Trace => m.trace(),
            Constraint::Edge(a, b) => m[(a, b)] + m[(b, a)],
        }
    }

    #[inline]
    fn add_scaled_to(&self, weight: f64, out: &mut DMatrix<f64>) {
        match *self {
            Constraint::Trace => {
                for d in 0..out.nrows() {
                    out[(d, d)] += weight;
                }
            }
            Constraint::Edge(a, b) => {
                out[(a, b)] += weight;
                out[(b, a)] += weight;
            }
        }
    }
}

struct ThetaProblem {
    n: usize,
    constraints: Vec<Constraint>,
    b: Vec<f64>,
    /// C = -J in minimization form.
    c: DMatrix<f64>,
}

impl ThetaProblem {
    fn new(g: &ExclusivityGraph) -> Self {
        let n = g.n();
        let mut constraints = vec![Constraint::Trace];
        constraints.extend(g.edges().map(|(a, b)| Constraint::Edge(a, b)));
        let mut b = vec![0.0; constraints.len()];
        b[0] = 1.0;
        let c = DMatrix::from_element(n, n, -1.0);
        Self {
            n,
            constraints,
            b,
            c,
        }
    }

    fn apply_a(&self, m: &DMatrix<f64>) -> Vec<f64> {
        self.constraints.iter().map(|a| a.inner(m)).collect()
    }

    fn apply_a_transpose(&self, y: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (a, &w) in self.constraints.iter().zip(y) {
            a.add_scaled_to(w, &mut out);
        }
        out
    }

    /// Schur matrix M_if = <A_i, X A_f Z>. Nonsymmetric in general (it is
    /// symmetric only on the central path), hence the LU solve downstream.
    fn schur_matrix(&self, x: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.constraints.len();
        let mut schur = DMatrix::zeros(m, m);
        let mut y_f = DMatrix::zeros(self.n, self.n);
        for (f, af) in self.constraints.iter().enumerate() {
            match *af {
                Constraint::Trace => x.mul_to(z, &mut y_f),
                Constraint::Edge(k, l) => {
                    // X (E_kl + E_lk) Z = x_k z_l^T + x_l z_k^T
                    let xk = x.column(k);
                    let xl = x.column(l);
                    let zk = z.column(k);
                    let zl = z.column(l);
                    for col in 0..self.n {
                        for row in 0..self.n {
                            y_f[(row, col)] = xk[row] * zl[col] + xl[row] * zk[col];
                        }
                    }
                }
            }
            for (i, ai) in self.constraints.iter().enumerate() {
                schur[(i, f)] = ai.inner(&y_f);
            }
        }
        schur
    }
}

/// Largest step alpha keeping `m + alpha * dm` positive definite, scaled by
/// the fraction-to-boundary factor and capped at 1.
fn max_step(chol: &Cholesky<f64, nalgebra::Dyn>, dm: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    // W = L^-1 dm L^-T, symmetric; the step bound is -1/lambda_min(W).
    let y = l
        .solve_lower_triangular(dm)
        .expect("triangular solve of a Cholesky factor");
    let w = l
        .solve_lower_triangular(&y.transpose())
        .expect("triangular solve of a Cholesky factor");
    let w_sym = (&w + w.transpose()) * 0.5;
    let eig = SymmetricEigen::new(w_sym);
    let lambda_min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if lambda_min >= -1e-14 {
        1.0
    } else {
        (STEP_FRACTION * (-1.0 / lambda_min)).min(1.0)
    }
}

fn solve_theta_sdp(g: &ExclusivityGraph, opts: &SdpOptions) -> Result<ThetaSolution> {
    let problem = ThetaProblem::new(g);
    let n = problem.n;
    let nf = n as f64;
    let m = problem.constraints.len();

    // Feasible interior starting point.
    let mut x = DMatrix::identity(n, n) / nf;
    let mut y = vec![0.0; m];
    y[0] = -(nf + 1.0);
    // S = C - A*(y) = (n+1)I - J, eigenvalues {1, n+1}.
    let mut s = &problem.c - problem.apply_a_transpose(&y);

    let norm_b = 1.0;
    let norm_c = nf; // ||J||_F = n

    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);

    for iteration in 0..opts.max_iterations {
        let gap = (&x * &s).trace();
        let pobj = x.dot(&problem.c);
        let dobj: f64 = problem.b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
        let theta_primal = -pobj;
        let theta_dual = -dobj;

        let rp: Vec<f64> = problem
            .apply_a(&x)
            .iter()
            .zip(&problem.b)
            .map(|(ax, bi)| bi - ax)
            .collect();
        let rd = &problem.c - &s - problem.apply_a_transpose(&y);

        let rp_norm = rp.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) / (1.0 + norm_b);
        let rd_norm = rd.amax() / (1.0 + norm_c);
        let rel_gap = gap.abs() / (1.0 + pobj.abs());

        best = (theta_primal, theta_dual, rel_gap);

        if rel_gap <= opts.gap_tol && rp_norm <= opts.feas_tol && rd_norm <= opts.feas_tol {
            return Ok(ThetaSolution {
                theta: theta_primal,
                dual_theta: theta_dual,
                certificate: x,
                iterations: iteration,
                gap: rel_gap,
            });
        }

        let chol_s = Cholesky::new(s.clone()).ok_or_else(|| non_convergence(iteration, best))?;
        let chol_x = Cholesky::new(x.clone()).ok_or_else(|| non_convergence(iteration, best))?;
        let z = chol_s.inverse();
        let mu = gap / nf;

        let schur = problem.schur_matrix(&x, &z);
        let lu = nalgebra::LU::new(schur);

        // G = X Rd Z enters both predictor and corrector right-hand sides.
        let g_mat = &x * &rd * &z;
        let a_of_z = problem.apply_a(&z);
        let a_of_g = problem.apply_a(&g_mat);

        // Predictor: affine direction (nu = 0).
        let rhs_aff: Vec<f64> = (0..m).map(|i| problem.b[i] + a_of_g[i]).collect();
        let dy_aff = lu
            .solve(&nalgebra::DVector::from_vec(rhs_aff))
            .ok_or_else(|| non_convergence(iteration, best))?;
        let ds_aff = &rd - problem.apply_a_transpose(dy_aff.as_slice());
        let dx_aff = {
            let raw = -&x - &x * &ds_aff * &z;
            (&raw + raw.transpose()) * 0.5
        };

        let alpha_p_aff = max_step(&chol_x, &dx_aff);
        let alpha_d_aff = max_step(&chol_s, &ds_aff);
        let gap_aff = ((&x + &dx_aff * alpha_p_aff) * (&s + &ds_aff * alpha_d_aff)).trace();
        let sigma = (gap_aff / gap).max(0.0).powi(3).clamp(1e-10, 1.0);
        let nu = sigma * mu;

        // Corrector with Mehrotra second-order term H = dX_aff dS_aff Z.
        let h_mat = &dx_aff * &ds_aff * &z;
        let a_of_h = problem.apply_a(&h_mat);
        let rhs: Vec<f64> = (0..m)
            .map(|i| problem.b[i] - nu * a_of_z[i] + a_of_g[i] + a_of_h[i])
            .collect();
        let dy = lu
            .solve(&nalgebra::DVector::from_vec(rhs))
            .ok_or_else(|| non_convergence(iteration, best))?;
        let ds = &rd - problem.apply_a_transpose(dy.as_slice());
        let dx = {
            let raw = &z * nu - &x - &h_mat - &x * &ds * &z;
            (&raw + raw.transpose()) * 0.5
        };

        let alpha_p = max_step(&chol_x, &dx);
        let alpha_d = max_step(&chol_s, &ds);
        if alpha_p < 1e-10 && alpha_d < 1e-10 {
            return Err(non_convergence(iteration, best));
        }

        x += dx * alpha_p;
        for (yi, dyi) in y.iter_mut().zip(dy.iter()) {
            *yi += alpha_d * dyi;
        }
        s += ds * alpha_d;
    }

    Err(non_convergence(opts.max_iterations, best))
}

fn non_convergence(iterations: usize, best: (f64, f64, f64)) -> Error {
    Error::SdpNonConvergence {
        iterations,
        primal: best.0,
        dual: best.1,
        gap: best.2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(g: &ExclusivityGraph) -> f64 {
        lovasz_theta(g, &SdpOptions::default()).unwrap().theta
    }

    #[test]
    fn pentagon_matches_sqrt5() {
        // Closed-form oracle theta(C_5) = sqrt(5), coded independently of
        // the SDP path.
        let c5 = ExclusivityGraph::cycle(5).unwrap();
        let got = lovasz_theta_with_tol(&c5, 1e-6).unwrap().theta;
        assert!((got - 5.0f64.sqrt()).abs() < 1e-6, "theta(C5) = {got}");
    }

    #[test]
    fn heptagon_pair() {
        let c7 = ExclusivityGraph::cycle(7).unwrap();
        let t = theta(&c7);
        assert!((t - 3.3177).abs() < 1e-4, "theta(C7) = {t}");
        let tbar = theta(&c7.complement());
        assert!((tbar - 2.1099).abs() < 1e-4, "theta(C7bar) = {tbar}");
    }

    #[test]
    fn closed_form_values() {
        let t7 = odd_cycle_theta_closed_form(7, false).unwrap();
        let t7bar = odd_cycle_theta_closed_form(7, true).unwrap();
        assert!((t7 - 3.317667207394096).abs() < 1e-12);
        assert!((t7bar - 2.109916264174742).abs() < 1e-12);
        assert!((t7 * t7bar - 7.0).abs() < 1e-9);

        assert!(odd_cycle_theta_closed_form(6, false).is_err());
        assert!(odd_cycle_theta_closed_form(3, false).is_err());
    }

    #[test]
    fn extreme_graphs() {
        for n in 1..=8 {
            let full = ExclusivityGraph::complete(n).unwrap();
            assert!((theta(&full) - 1.0).abs() < 1e-6, "theta(K{n})");
            let empty = ExclusivityGraph::edgeless(n).unwrap();
            assert!((theta(&empty) - n as f64).abs() < 1e-6, "theta(E{n})");
        }
    }

    #[test]
    fn certificate_is_feasible_and_optimal() {
        let c7 = ExclusivityGraph::cycle(7).unwrap();
        let bounds = lovasz_theta(&c7, &SdpOptions::default()).unwrap();
        let x = &bounds.theta_certificate;
        assert!((x.trace() - 1.0).abs() < 1e-8);
        for (a, b) in c7.edges() {
            assert!(x[(a, b)].abs() < 1e-7, "edge entry X[{a},{b}]");
        }
        let eig = SymmetricEigen::new(x.clone());
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-8));
        let j_inner: f64 = x.iter().sum();
        assert!((j_inner - bounds.theta).abs() < 1e-8);
        assert_eq!(bounds.alpha, 3);
    }

    #[test]
    fn size_cap_and_bad_tol() {
        let g = ExclusivityGraph::edgeless(8).unwrap();
        let opts = SdpOptions {
            size_cap: 7,
            ..SdpOptions::default()
        };
        assert!(matches!(
            lovasz_theta(&g, &opts),
            Err(Error::SizeLimit { cap: 7, .. })
        ));
        assert!(lovasz_theta_with_tol(&g, 0.0).is_err());
    }
}
