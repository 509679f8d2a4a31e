//! Second-order cone programming.
//!
//! Solves `min c.x` subject to `||A_i x + b_i|| <= f_i.x + d_i` and optional
//! linear equalities `E x = e`, with a primal-dual interior point method on
//! the homogeneous self-dual embedding: Nesterov-Todd scaling of the cone
//! blocks, Mehrotra predictor-corrector steps, and a normal-equations KKT
//! solve with iterative refinement. Infeasibility and unboundedness are
//! reported from residual-based certificates.

use crate::error::{Error, Result};
use crate::{conv, RMat, RVec, Real};
use nalgebra::{Cholesky, LU};
use num_traits::Float;

/// One constraint `||A x + b||_2 <= f.x + d`. `A` may have zero rows, in
/// which case the constraint is the linear inequality `f.x + d >= 0`.
#[derive(Debug, Clone)]
pub struct SocConstraint<T: Real> {
    pub a: RMat<T>,
    pub b: RVec<T>,
    pub f: RVec<T>,
    pub d: T,
}

/// A second-order cone program in real variables.
#[derive(Debug, Clone)]
pub struct SocpProblem<T: Real> {
    /// Number of real variables.
    pub num_vars: usize,
    /// Linear objective, minimized.
    pub objective: RVec<T>,
    /// Cone constraints; at least one.
    pub cones: Vec<SocConstraint<T>>,
    /// Optional equalities `E x = e`.
    pub equalities: Option<(RMat<T>, RVec<T>)>,
}

/// Solve outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocpStatus {
    /// KKT residuals below tolerance.
    Optimal,
    /// Primal infeasibility certificate found.
    Infeasible,
    /// Dual infeasibility certificate found (objective unbounded below).
    Unbounded,
    /// Iteration cap reached; `x` holds the best iterate.
    MaxIter,
}

/// Primal solution and termination diagnostics.
#[derive(Debug, Clone)]
pub struct SocpSolution<T: Real> {
    pub x: RVec<T>,
    pub status: SocpStatus,
    /// Max of primal residual, dual residual and relative gap at exit.
    pub kkt_residual: T,
    pub iterations: usize,
    /// Objective value `c.x`.
    pub objective: T,
}

impl<T: Real> SocpProblem<T> {
    fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        if self.objective.len() != n {
            return Err(Error::InvalidProblem(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                n
            )));
        }
        if self.cones.is_empty() {
            return Err(Error::InvalidProblem("at least one cone is required".into()));
        }
        for (i, cone) in self.cones.iter().enumerate() {
            if cone.a.ncols() != n || cone.f.len() != n || cone.b.len() != cone.a.nrows() {
                return Err(Error::InvalidProblem(format!("cone {i} has mismatched dimensions")));
            }
        }
        if let Some((e_mat, e_rhs)) = &self.equalities {
            if e_mat.ncols() != n || e_rhs.len() != e_mat.nrows() {
                return Err(Error::InvalidProblem("equality block has mismatched dimensions".into()));
            }
        }
        Ok(())
    }
}

const MAX_ITER: usize = 200;
const STEP_FRACTION: f64 = 0.99;

/// Solves the program to the given tolerance (primal/dual residuals and
/// relative gap). Deterministic for identical inputs.
pub fn solve_socp<T: Real>(problem: &SocpProblem<T>, tol: T) -> Result<SocpSolution<T>> {
    problem.validate()?;
    let mut ws = Workspace::new(problem);
    ws.initialize();
    let mut best: Option<(T, RVec<T>, T)> = None; // (metric, x/tau, objective)
    let mut stall = 0usize;
    let mut iterations = 0usize;

    for iter in 0..MAX_ITER {
        iterations = iter;
        let m = ws.metrics();
        let metric = Float::max(Float::max(m.pres, m.dres), m.relgap);
        match &best {
            Some((b, _, _)) if metric >= *b * conv(0.9) => stall += 1,
            _ => stall = 0,
        }
        if best.as_ref().map_or(true, |(b, _, _)| metric < *b) {
            let x_scaled = &ws.x / ws.tau;
            let obj = ws.c_orig.dot(&x_scaled);
            best = Some((metric, x_scaled, obj));
        }
        if m.pres <= tol && m.dres <= tol && m.relgap <= tol {
            let x = &ws.x / ws.tau;
            let objective = ws.c_orig.dot(&x);
            return Ok(SocpSolution {
                x,
                status: SocpStatus::Optimal,
                kkt_residual: metric,
                iterations: iter,
                objective,
            });
        }
        if let Some(status) = ws.certificate(tol) {
            let (kkt, x, objective) = best
                .map(|(b, x, o)| (b, x, o))
                .unwrap_or_else(|| (metric, &ws.x / ws.tau, T::zero()));
            return Ok(SocpSolution {
                x,
                status,
                kkt_residual: kkt,
                iterations: iter,
                objective,
            });
        }
        // floating-point floor: no 10% progress for a while near the target
        if stall >= 8 {
            break;
        }

        if !ws.step() {
            break; // numerical stall
        }
    }

    let (kkt_residual, x, objective) =
        best.unwrap_or_else(|| (T::infinity(), RVec::zeros(ws.n), T::zero()));
    let status = if kkt_residual <= tol * conv(10.0) {
        SocpStatus::Optimal
    } else {
        SocpStatus::MaxIter
    };
    Ok(SocpSolution {
        x,
        status,
        kkt_residual,
        iterations,
        objective,
    })
}

/// Offsets of the SOC blocks inside the inequality rows.
#[derive(Debug, Clone)]
struct BlockLayout {
    offsets: Vec<usize>,
    dims: Vec<usize>,
    total: usize,
}

struct NtScaling<T: Real> {
    /// Normalized scaling point per block, `wbar[0]^2 - ||wbar[1..]||^2 = 1`.
    wbar: Vec<RVec<T>>,
    eta: Vec<T>,
}

struct Metrics<T> {
    pres: T,
    dres: T,
    relgap: T,
}

struct Workspace<T: Real> {
    n: usize,
    /// Equality rows (zero cone).
    e_mat: RMat<T>,
    e_rhs: RVec<T>,
    p: usize,
    /// SOC rows, `s = h - G x` blockwise in the cone.
    g_mat: RMat<T>,
    h_vec: RVec<T>,
    layout: BlockLayout,
    /// Normalized objective used by the iteration.
    c: RVec<T>,
    /// Original objective for value reporting.
    c_orig: RVec<T>,
    // iterates
    x: RVec<T>,
    z_soc: RVec<T>,
    z_eq: RVec<T>,
    s_soc: RVec<T>,
    tau: T,
    kappa: T,
    // residuals (recomputed per iteration)
    r_dual: RVec<T>,
    r_prim_soc: RVec<T>,
    r_prim_eq: RVec<T>,
    r_tau: T,
    // scratch for the factorization
    scaling: Option<NtScaling<T>>,
    gw: RMat<T>,
    h_plain: RMat<T>,
    factor: Option<Factor<T>>,
    norm_h: T,
    norm_c: T,
}

enum Factor<T: Real> {
    Chol(Cholesky<T, nalgebra::Dyn>),
    Lu(LU<T, nalgebra::Dyn, nalgebra::Dyn>),
}

struct Direction<T: Real> {
    dx: RVec<T>,
    dz_soc: RVec<T>,
    dz_eq: RVec<T>,
    ds_soc: RVec<T>,
    dtau: T,
    dkappa: T,
}

impl<T: Real> Direction<T> {
    fn is_finite(&self) -> bool {
        let total = self.dx.norm()
            + self.dz_soc.norm()
            + self.dz_eq.norm()
            + self.ds_soc.norm()
            + Float::abs(self.dtau)
            + Float::abs(self.dkappa);
        Float::is_finite(total)
    }
}

impl<T: Real> Workspace<T> {
    fn new(problem: &SocpProblem<T>) -> Self {
        let n = problem.num_vars;
        // Per-cone normalization: scaling a constraint by a positive factor
        // leaves the feasible set unchanged and balances the KKT system.
        let mut offsets = Vec::with_capacity(problem.cones.len());
        let mut dims = Vec::with_capacity(problem.cones.len());
        let mut total = 0usize;
        for cone in &problem.cones {
            offsets.push(total);
            dims.push(cone.a.nrows() + 1);
            total += cone.a.nrows() + 1;
        }
        let mut g_mat = RMat::zeros(total, n);
        let mut h_vec = RVec::zeros(total);
        for (idx, cone) in problem.cones.iter().enumerate() {
            let mut scale = Float::abs(cone.d);
            for v in cone.a.iter().chain(cone.b.iter()).chain(cone.f.iter()) {
                scale = Float::max(scale, Float::abs(*v));
            }
            if !(scale > T::zero()) {
                scale = T::one();
            }
            let inv = T::one() / scale;
            let off = offsets[idx];
            // s_blk = [f.x + d; A x + b] => G rows are [-f; -A], h = [d; b]
            for col in 0..n {
                g_mat[(off, col)] = -cone.f[col] * inv;
            }
            h_vec[off] = cone.d * inv;
            for r in 0..cone.a.nrows() {
                for col in 0..n {
                    g_mat[(off + 1 + r, col)] = -cone.a[(r, col)] * inv;
                }
                h_vec[off + 1 + r] = cone.b[r] * inv;
            }
        }
        let (e_mat, e_rhs) = match &problem.equalities {
            Some((e, rhs)) => {
                let mut e = e.clone();
                let mut rhs = rhs.clone();
                for r in 0..e.nrows() {
                    let mut scale = Float::abs(rhs[r]);
                    for c in 0..n {
                        scale = Float::max(scale, Float::abs(e[(r, c)]));
                    }
                    if scale > T::zero() {
                        let inv = T::one() / scale;
                        for c in 0..n {
                            e[(r, c)] *= inv;
                        }
                        rhs[r] *= inv;
                    }
                }
                (e, rhs)
            }
            None => (RMat::zeros(0, n), RVec::zeros(0)),
        };
        let c_orig = problem.objective.clone();
        let mut c_scale = T::zero();
        for v in c_orig.iter() {
            c_scale = Float::max(c_scale, Float::abs(*v));
        }
        if !(c_scale > T::zero()) {
            c_scale = T::one();
        }
        let c = &c_orig / c_scale;
        let norm_h = Float::max(h_vec.norm(), e_rhs.norm());
        let norm_c = c.norm();
        let p = e_mat.nrows();
        Workspace {
            n,
            e_mat,
            e_rhs,
            p,
            g_mat,
            h_vec,
            layout: BlockLayout { offsets, dims, total },
            c,
            c_orig,
            x: RVec::zeros(n),
            z_soc: RVec::zeros(total),
            z_eq: RVec::zeros(p),
            s_soc: RVec::zeros(total),
            tau: T::one(),
            kappa: T::one(),
            r_dual: RVec::zeros(n),
            r_prim_soc: RVec::zeros(total),
            r_prim_eq: RVec::zeros(p),
            r_tau: T::zero(),
            scaling: None,
            gw: RMat::zeros(total, n),
            h_plain: RMat::zeros(n, n),
            factor: None,
            norm_h,
            norm_c,
        }
    }

    fn num_cones(&self) -> usize {
        self.layout.dims.len()
    }

    /// Pushes each block strictly inside the cone.
    fn shift_into_cone(layout: &BlockLayout, v: &mut RVec<T>) {
        for (&off, &dim) in layout.offsets.iter().zip(&layout.dims) {
            let head = v[off];
            let tail_norm = v.rows(off + 1, dim - 1).norm();
            let margin = head - tail_norm;
            if margin <= conv(1e-6) {
                v[off] = tail_norm + T::one();
            }
        }
    }

    /// Least-squares initialization with identity scaling.
    fn initialize(&mut self) {
        self.scaling = None;
        self.gw.copy_from(&self.g_mat);
        self.build_factor();
        // primal: min ||G x - h|| s.t. E x = e
        let rhs_x = self.g_mat.tr_mul(&self.h_vec);
        let (x0, _) = self.solve_sys(&rhs_x, &self.e_rhs.clone());
        let mut s0 = &self.h_vec - &self.g_mat * &x0;
        Self::shift_into_cone(&self.layout, &mut s0);
        // dual: z = G x_d where [H E'; E 0][x_d; ze] = [-c; 0]
        let neg_c = -&self.c;
        let (xd, ze) = self.solve_sys(&neg_c, &RVec::zeros(self.p));
        let mut z0 = &self.g_mat * &xd;
        Self::shift_into_cone(&self.layout, &mut z0);
        self.x = x0;
        self.s_soc = s0;
        self.z_soc = z0;
        self.z_eq = ze;
        self.tau = T::one();
        self.kappa = T::one();
        self.compute_residuals();
    }

    fn compute_residuals(&mut self) {
        // r_dual = G'z + E'z_e + c tau
        self.r_dual = self.g_mat.tr_mul(&self.z_soc) + self.e_mat.tr_mul(&self.z_eq) + &self.c * self.tau;
        // r_prim = G x + s - h tau (soc), E x - e tau (eq)
        self.r_prim_soc = &self.g_mat * &self.x + &self.s_soc - &self.h_vec * self.tau;
        self.r_prim_eq = &self.e_mat * &self.x - &self.e_rhs * self.tau;
        // r_tau = kappa + c.x + h.z + e.z_e
        self.r_tau = self.kappa
            + self.c.dot(&self.x)
            + self.h_vec.dot(&self.z_soc)
            + self.e_rhs.dot(&self.z_eq);
    }

    fn metrics(&self) -> Metrics<T> {
        let tau = self.tau;
        let pres = Float::max(self.r_prim_soc.norm(), self.r_prim_eq.norm())
            / tau
            / (T::one() + self.norm_h);
        let dres = self.r_dual.norm() / tau / (T::one() + self.norm_c);
        let pcost = self.c.dot(&self.x) / tau;
        let dcost = -(self.h_vec.dot(&self.z_soc) + self.e_rhs.dot(&self.z_eq)) / tau;
        let gap = Float::abs(pcost - dcost);
        let relgap = gap / Float::max(T::one(), Float::max(Float::abs(pcost), Float::abs(dcost)));
        Metrics { pres, dres, relgap }
    }

    /// Residual-based infeasibility / unboundedness certificates.
    fn certificate(&self, tol: T) -> Option<SocpStatus> {
        let tol_cert = Float::max(tol, conv(1e-10));
        let hz = self.h_vec.dot(&self.z_soc) + self.e_rhs.dot(&self.z_eq);
        if hz < T::zero() {
            let num = (self.g_mat.tr_mul(&self.z_soc) + self.e_mat.tr_mul(&self.z_eq)).norm();
            if num * (T::one() + self.norm_h) <= tol_cert * -hz {
                return Some(SocpStatus::Infeasible);
            }
        }
        let cx = self.c.dot(&self.x);
        if cx < T::zero() {
            let num = Float::max(
                (&self.g_mat * &self.x + &self.s_soc).norm(),
                (&self.e_mat * &self.x).norm(),
            );
            if num * (T::one() + self.norm_c) <= tol_cert * -cx {
                return Some(SocpStatus::Unbounded);
            }
        }
        None
    }

    fn compute_scaling(&self) -> Option<NtScaling<T>> {
        let mut wbar = Vec::with_capacity(self.num_cones());
        let mut eta = Vec::with_capacity(self.num_cones());
        for (&off, &dim) in self.layout.offsets.iter().zip(&self.layout.dims) {
            let s0 = self.s_soc[off];
            let z0 = self.z_soc[off];
            let s1 = self.s_soc.rows(off + 1, dim - 1);
            let z1 = self.z_soc.rows(off + 1, dim - 1);
            let rho_s = s0 * s0 - s1.norm_squared();
            let rho_z = z0 * z0 - z1.norm_squared();
            if !(rho_s > T::zero()) || !(rho_z > T::zero()) {
                return None;
            }
            let (sq_s, sq_z) = (Float::sqrt(rho_s), Float::sqrt(rho_z));
            let inner = (s0 * z0 + s1.dot(&z1)) / (sq_s * sq_z);
            let gamma = Float::sqrt((T::one() + inner) / conv(2.0));
            let mut w = RVec::zeros(dim);
            w[0] = (s0 / sq_s + z0 / sq_z) / (conv::<T>(2.0) * gamma);
            for i in 1..dim {
                w[i] = (self.s_soc[off + i] / sq_s - self.z_soc[off + i] / sq_z)
                    / (conv::<T>(2.0) * gamma);
            }
            wbar.push(w);
            eta.push(Float::sqrt(sq_s / sq_z));
        }
        Some(NtScaling { wbar, eta })
    }

    /// `out_blk = W v_blk` for one block.
    fn w_apply_block(w: &RVec<T>, eta: T, v: &[T], out: &mut [T]) {
        let dim = w.len();
        let w0 = w[0];
        let mut w1v1 = T::zero();
        for i in 1..dim {
            w1v1 += w[i] * v[i];
        }
        out[0] = eta * (w0 * v[0] + w1v1);
        let coef = w1v1 / (T::one() + w0);
        for i in 1..dim {
            out[i] = eta * (v[0] * w[i] + v[i] + coef * w[i]);
        }
    }

    /// `out_blk = W^-1 v_blk` for one block.
    fn winv_apply_block(w: &RVec<T>, eta: T, v: &[T], out: &mut [T]) {
        let dim = w.len();
        let w0 = w[0];
        let mut w1v1 = T::zero();
        for i in 1..dim {
            w1v1 += w[i] * v[i];
        }
        let inv_eta = T::one() / eta;
        out[0] = inv_eta * (w0 * v[0] - w1v1);
        let coef = w1v1 / (T::one() + w0);
        for i in 1..dim {
            out[i] = inv_eta * (-v[0] * w[i] + v[i] + coef * w[i]);
        }
    }

    fn w_apply(&self, scaling: &NtScaling<T>, v: &RVec<T>, inverse: bool) -> RVec<T> {
        let mut out = RVec::zeros(self.layout.total);
        for (idx, (&off, &dim)) in self.layout.offsets.iter().zip(&self.layout.dims).enumerate() {
            let vin: Vec<T> = (0..dim).map(|i| v[off + i]).collect();
            let mut vout = vec![T::zero(); dim];
            if inverse {
                Self::winv_apply_block(&scaling.wbar[idx], scaling.eta[idx], &vin, &mut vout);
            } else {
                Self::w_apply_block(&scaling.wbar[idx], scaling.eta[idx], &vin, &mut vout);
            }
            for i in 0..dim {
                out[off + i] = vout[i];
            }
        }
        out
    }

    /// Jordan product `u o v` blockwise.
    fn jordan_product(&self, u: &RVec<T>, v: &RVec<T>) -> RVec<T> {
        let mut out = RVec::zeros(self.layout.total);
        for (&off, &dim) in self.layout.offsets.iter().zip(&self.layout.dims) {
            let mut dot = T::zero();
            for i in 0..dim {
                dot += u[off + i] * v[off + i];
            }
            out[off] = dot;
            for i in 1..dim {
                out[off + i] = u[off] * v[off + i] + v[off] * u[off + i];
            }
        }
        out
    }

    /// Jordan division: solves `u o x = rhs` blockwise.
    fn jordan_div(&self, u: &RVec<T>, rhs: &RVec<T>) -> RVec<T> {
        let mut out = RVec::zeros(self.layout.total);
        for (&off, &dim) in self.layout.offsets.iter().zip(&self.layout.dims) {
            let u0 = u[off];
            let mut u1_sq = T::zero();
            let mut u1_r1 = T::zero();
            for i in 1..dim {
                u1_sq += u[off + i] * u[off + i];
                u1_r1 += u[off + i] * rhs[off + i];
            }
            let det = u0 * u0 - u1_sq;
            let x0 = (u0 * rhs[off] - u1_r1) / det;
            out[off] = x0;
            for i in 1..dim {
                out[off + i] = (rhs[off + i] - x0 * u[off + i]) / u0;
            }
        }
        out
    }

    /// Blockwise identity element (1, 0, ..., 0).
    fn cone_identity(&self) -> RVec<T> {
        let mut e = RVec::zeros(self.layout.total);
        for &off in &self.layout.offsets {
            e[off] = T::one();
        }
        e
    }

    /// Builds `Gw = W^-1 G`, `H = Gw' Gw` and its factorization.
    fn build_factor(&mut self) {
        match &self.scaling {
            Some(sc) => {
                self.gw.copy_from(&self.g_mat);
                for col in 0..self.n {
                    for (idx, (&off, &dim)) in
                        self.layout.offsets.iter().zip(&self.layout.dims).enumerate()
                    {
                        let vin: Vec<T> = (0..dim).map(|i| self.gw[(off + i, col)]).collect();
                        let mut vout = vec![T::zero(); dim];
                        Self::winv_apply_block(&sc.wbar[idx], sc.eta[idx], &vin, &mut vout);
                        for i in 0..dim {
                            self.gw[(off + i, col)] = vout[i];
                        }
                    }
                }
            }
            None => self.gw.copy_from(&self.g_mat),
        }
        self.h_plain = self.gw.tr_mul(&self.gw);
        let mut trace = T::zero();
        for i in 0..self.n {
            trace += self.h_plain[(i, i)];
        }
        let delta = conv::<T>(1e-12) * (T::one() + trace / conv(self.n as f64));
        if self.p == 0 {
            let mut reg = delta;
            for _ in 0..4 {
                let mut h_reg = self.h_plain.clone();
                for i in 0..self.n {
                    h_reg[(i, i)] += reg;
                }
                if let Some(ch) = Cholesky::new(h_reg) {
                    self.factor = Some(Factor::Chol(ch));
                    return;
                }
                reg *= conv(1e4);
            }
            // last resort: LU of the regularized matrix
            let mut h_reg = self.h_plain.clone();
            for i in 0..self.n {
                h_reg[(i, i)] += reg;
            }
            self.factor = Some(Factor::Lu(LU::new(h_reg)));
        } else {
            let dim = self.n + self.p;
            let mut sys = RMat::zeros(dim, dim);
            sys.view_mut((0, 0), (self.n, self.n)).copy_from(&self.h_plain);
            for i in 0..self.n {
                sys[(i, i)] += delta;
            }
            for r in 0..self.p {
                for cidx in 0..self.n {
                    sys[(self.n + r, cidx)] = self.e_mat[(r, cidx)];
                    sys[(cidx, self.n + r)] = self.e_mat[(r, cidx)];
                }
                sys[(self.n + r, self.n + r)] = -delta;
            }
            self.factor = Some(Factor::Lu(LU::new(sys)));
        }
    }

    /// Solves `[H E'; E 0] [x; y] = [rx; re]` with iterative refinement
    /// against the unregularized blocks.
    fn solve_sys(&self, rx: &RVec<T>, re: &RVec<T>) -> (RVec<T>, RVec<T>) {
        let raw = |bx: &RVec<T>, be: &RVec<T>| -> (RVec<T>, RVec<T>) {
            match self.factor.as_ref().expect("factorization built") {
                Factor::Chol(ch) => (ch.solve(bx), RVec::zeros(0)),
                Factor::Lu(lu) => {
                    if self.p == 0 {
                        (lu.solve(bx).expect("nonsingular KKT"), RVec::zeros(0))
                    } else {
                        let mut rhs = RVec::zeros(self.n + self.p);
                        rhs.rows_mut(0, self.n).copy_from(bx);
                        rhs.rows_mut(self.n, self.p).copy_from(be);
                        let sol = lu.solve(&rhs).expect("nonsingular KKT");
                        (
                            sol.rows(0, self.n).into_owned(),
                            sol.rows(self.n, self.p).into_owned(),
                        )
                    }
                }
            }
        };
        let (mut x, mut y) = raw(rx, re);
        for _ in 0..2 {
            let mut res_x = rx - &self.h_plain * &x;
            if self.p > 0 {
                res_x -= self.e_mat.tr_mul(&y);
            }
            let res_e = if self.p > 0 { re - &self.e_mat * &x } else { RVec::zeros(0) };
            let scale = T::one() + Float::max(rx.norm(), re.norm());
            if Float::max(res_x.norm(), res_e.norm()) <= conv::<T>(1e-14) * scale {
                break;
            }
            let (cx, cy) = raw(&res_x, &res_e);
            x += cx;
            if self.p > 0 {
                y += cy;
            }
        }
        (x, y)
    }

    /// Newton direction targeting `residual_weight` of the current residuals
    /// and the complementarity targets `d_s`, `d_kappa`.
    fn direction(&self, residual_weight: T, d_s: &RVec<T>, d_kappa: T) -> Direction<T> {
        let sc = self.scaling.as_ref().expect("scaling computed");
        let f = residual_weight;
        let bx = -&self.r_dual * f;
        let bz_s = -&self.r_prim_soc * f;
        let bz_e = -&self.r_prim_eq * f;
        let b_tau = -self.r_tau * f;

        let lambda = self.w_apply(sc, &self.z_soc, false);
        // bz_s' = bz_s + W(lambda \ d_s)
        let w_q = self.w_apply(sc, &self.jordan_div(&lambda, d_s), false);
        let bzs_mod = &bz_s + &w_q;

        let winv_h = self.w_apply(sc, &self.h_vec, true);
        let winv_bzs = self.w_apply(sc, &bzs_mod, true);

        let rhs_a = &bx + self.gw.tr_mul(&winv_bzs);
        let (dx_a, ze_a) = self.solve_sys(&rhs_a, &bz_e);
        let rhs_b = self.gw.tr_mul(&winv_h) - &self.c;
        let (dx_b, ze_b) = self.solve_sys(&rhs_b, &self.e_rhs.clone());

        let u_a = &self.gw * &dx_a - &winv_bzs;
        let u_b = &self.gw * &dx_b - &winv_h;

        let num = b_tau + d_kappa / self.tau
            - self.c.dot(&dx_a)
            - winv_h.dot(&u_a)
            - self.e_rhs.dot(&ze_a);
        let den = self.c.dot(&dx_b) + winv_h.dot(&u_b) + self.e_rhs.dot(&ze_b)
            - self.kappa / self.tau;
        let dtau = if Float::abs(den) > T::zero() { num / den } else { T::zero() };

        let dx = &dx_a + &dx_b * dtau;
        let dz_eq = &ze_a + &ze_b * dtau;
        let dz_soc = self.w_apply(sc, &(&u_a + &u_b * dtau), true);
        // ds = -W(lambda \ d_s) - W(W dz)
        let w_dz = self.w_apply(sc, &dz_soc, false);
        let ds_soc = -&w_q - self.w_apply(sc, &w_dz, false);
        let dkappa = (-d_kappa - self.kappa * dtau) / self.tau;

        #[cfg(debug_assertions)]
        self.check_direction(f, d_s, d_kappa, &dx, &dz_soc, &dz_eq, &ds_soc, dtau, dkappa);

        Direction {
            dx,
            dz_soc,
            dz_eq,
            ds_soc,
            dtau,
            dkappa,
        }
    }

    #[cfg(debug_assertions)]
    #[allow(clippy::too_many_arguments)]
    fn check_direction(
        &self,
        f: T,
        d_s: &RVec<T>,
        d_kappa: T,
        dx: &RVec<T>,
        dz_soc: &RVec<T>,
        dz_eq: &RVec<T>,
        ds_soc: &RVec<T>,
        dtau: T,
        dkappa: T,
    ) {
        // catches sign and structure mistakes; reconstruction error grows
        // with the squared scaling magnitude near convergence
        let eta_sq = self
            .scaling
            .as_ref()
            .map(|sc| {
                sc.eta
                    .iter()
                    .fold(T::one(), |acc, &e| {
                        Float::max(acc, Float::max(e * e, T::one() / (e * e)))
                    })
            })
            .unwrap_or_else(T::one);
        let total = dx.norm() + dz_soc.norm() + ds_soc.norm() + Float::abs(dtau);
        if !Float::is_finite(total) {
            return; // breakdown is handled by the step routine
        }
        let scale = conv::<T>(1e-4) * (eta_sq + self.gw.norm()) * (T::one() + total);
        let e1 = self.g_mat.tr_mul(dz_soc) + self.e_mat.tr_mul(dz_eq) + &self.c * dtau + &self.r_dual * f;
        debug_assert!(e1.norm() <= scale, "dual direction residual {:?}", e1.norm());
        let e2 = &self.g_mat * dx + ds_soc - &self.h_vec * dtau + &self.r_prim_soc * f;
        debug_assert!(e2.norm() <= scale, "primal direction residual {:?}", e2.norm());
        let e3 = self.c.dot(dx)
            + self.h_vec.dot(dz_soc)
            + self.e_rhs.dot(dz_eq)
            + dkappa
            + self.r_tau * f;
        debug_assert!(Float::abs(e3) <= scale, "gap direction residual {:?}", e3);
        let _ = d_s;
        let _ = d_kappa;
    }

    /// Largest step keeping a block inside its cone.
    fn soc_max_step(v: nalgebra::DVectorView<T>, dv: nalgebra::DVectorView<T>) -> T {
        let dim = v.len();
        let v0 = v[0];
        let dv0 = dv[0];
        let mut v1_sq = T::zero();
        let mut dv1_sq = T::zero();
        let mut v1_dv1 = T::zero();
        for i in 1..dim {
            v1_sq += v[i] * v[i];
            dv1_sq += dv[i] * dv[i];
            v1_dv1 += v[i] * dv[i];
        }
        let a = dv0 * dv0 - dv1_sq;
        let b = (v0 * dv0 - v1_dv1) * conv(2.0);
        let c = Float::max(v0 * v0 - v1_sq, T::zero());
        let mut step = T::infinity();
        if let Some(r) = smallest_positive_root(a, b, c) {
            step = r;
        }
        if dv0 < T::zero() {
            step = Float::min(step, -v0 / dv0);
        }
        step
    }

    fn max_step(&self, dir: &Direction<T>) -> T {
        let mut alpha = T::infinity();
        for (&off, &dim) in self.layout.offsets.iter().zip(&self.layout.dims) {
            alpha = Float::min(
                alpha,
                Self::soc_max_step(self.s_soc.rows(off, dim), dir.ds_soc.rows(off, dim)),
            );
            alpha = Float::min(
                alpha,
                Self::soc_max_step(self.z_soc.rows(off, dim), dir.dz_soc.rows(off, dim)),
            );
        }
        if dir.dtau < T::zero() {
            alpha = Float::min(alpha, -self.tau / dir.dtau);
        }
        if dir.dkappa < T::zero() {
            alpha = Float::min(alpha, -self.kappa / dir.dkappa);
        }
        alpha
    }

    fn interior(&self) -> bool {
        if !(self.tau > T::zero()) || !(self.kappa > T::zero()) {
            return false;
        }
        for (&off, &dim) in self.layout.offsets.iter().zip(&self.layout.dims) {
            for v in [&self.s_soc, &self.z_soc] {
                let head = v[off];
                let tail = v.rows(off + 1, dim - 1).norm_squared();
                if !(head > T::zero()) || !(head * head - tail > T::zero()) {
                    return false;
                }
            }
        }
        true
    }

    fn apply_step(&mut self, dir: &Direction<T>, alpha: T) {
        self.x += &dir.dx * alpha;
        self.z_soc += &dir.dz_soc * alpha;
        self.z_eq += &dir.dz_eq * alpha;
        self.s_soc += &dir.ds_soc * alpha;
        self.tau += dir.dtau * alpha;
        self.kappa += dir.dkappa * alpha;
    }

    fn undo_step(&mut self, dir: &Direction<T>, alpha: T) {
        self.x -= &dir.dx * alpha;
        self.z_soc -= &dir.dz_soc * alpha;
        self.z_eq -= &dir.dz_eq * alpha;
        self.s_soc -= &dir.ds_soc * alpha;
        self.tau -= dir.dtau * alpha;
        self.kappa -= dir.dkappa * alpha;
    }

    /// One predictor-corrector iteration; false when numerically stalled.
    fn step(&mut self) -> bool {
        let scaling = match self.compute_scaling() {
            Some(s) => s,
            None => return false,
        };
        self.scaling = Some(scaling);
        self.build_factor();
        let sc = self.scaling.as_ref().unwrap();
        let lambda = self.w_apply(sc, &self.z_soc, false);

        let degree = conv::<T>(self.num_cones() as f64) + T::one();
        let mu = (self.s_soc.dot(&self.z_soc) + self.tau * self.kappa) / degree;

        // affine (predictor) direction
        let d_s_aff = self.jordan_product(&lambda, &lambda);
        let d_kappa_aff = self.tau * self.kappa;
        let aff = self.direction(T::one(), &d_s_aff, d_kappa_aff);
        if !aff.is_finite() {
            return false;
        }
        let alpha_aff = Float::min(self.max_step(&aff), T::one());

        // Mehrotra centering parameter
        let mut s_trial = self.s_soc.clone();
        s_trial += &aff.ds_soc * alpha_aff;
        let mut z_trial = self.z_soc.clone();
        z_trial += &aff.dz_soc * alpha_aff;
        let tau_trial = self.tau + alpha_aff * aff.dtau;
        let kappa_trial = self.kappa + alpha_aff * aff.dkappa;
        let mu_aff = (s_trial.dot(&z_trial) + tau_trial * kappa_trial) / degree;
        let ratio = Float::max(T::zero(), Float::min(T::one(), mu_aff / mu));
        let sigma = ratio * ratio * ratio;

        // combined (corrector) direction
        let sc = self.scaling.as_ref().unwrap();
        let winv_ds = self.w_apply(sc, &aff.ds_soc, true);
        let w_dz = self.w_apply(sc, &aff.dz_soc, false);
        let correction = self.jordan_product(&winv_ds, &w_dz);
        let d_s = &d_s_aff + &correction - &(self.cone_identity() * (sigma * mu));
        let d_kappa = self.tau * self.kappa + aff.dtau * aff.dkappa - sigma * mu;
        let dir = self.direction(T::one() - sigma, &d_s, d_kappa);
        if !dir.is_finite() {
            return false;
        }

        let mut alpha = Float::min(conv::<T>(STEP_FRACTION) * self.max_step(&dir), T::one());
        if !(alpha > T::zero()) || !Float::is_finite(alpha) {
            return false;
        }
        self.apply_step(&dir, alpha);
        let mut tries = 0;
        while !self.interior() && tries < 40 {
            self.undo_step(&dir, alpha);
            alpha *= conv(0.7);
            self.apply_step(&dir, alpha);
            tries += 1;
        }
        if tries == 40 {
            self.undo_step(&dir, alpha);
            return false;
        }
        self.compute_residuals();
        alpha > conv(1e-10)
    }
}

/// Smallest strictly positive root of `a r^2 + b r + c = 0`.
fn smallest_positive_root<T: Real>(a: T, b: T, c: T) -> Option<T> {
    let scale = Float::abs(a) + Float::abs(b) + Float::abs(c);
    if !(scale > T::zero()) {
        return None;
    }
    if Float::abs(a) <= conv::<T>(1e-16) * scale {
        if b < T::zero() {
            let r = -c / b;
            if r > T::zero() {
                return Some(r);
            }
        }
        return None;
    }
    let disc = b * b - conv::<T>(4.0) * a * c;
    if disc < T::zero() {
        return None;
    }
    let sq = Float::sqrt(disc);
    let q = if b >= T::zero() {
        (-b - sq) / conv(2.0)
    } else {
        (-b + sq) / conv(2.0)
    };
    let mut best: Option<T> = None;
    let mut consider = |r: T| {
        if r > T::zero() && Float::is_finite(r) {
            best = Some(match best {
                None => r,
                Some(prev) => Float::min(prev, r),
            });
        }
    };
    consider(q / a);
    if Float::abs(q) > T::zero() {
        consider(c / q);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rvec(v: &[f64]) -> RVec<f64> {
        RVec::from_column_slice(v)
    }

    /// min t s.t. ||(3,4)|| <= t
    #[test]
    fn norm_of_constant() {
        let problem = SocpProblem {
            num_vars: 1,
            objective: rvec(&[1.0]),
            cones: vec![SocConstraint {
                a: RMat::zeros(2, 1),
                b: rvec(&[3.0, 4.0]),
                f: rvec(&[1.0]),
                d: 0.0,
            }],
            equalities: None,
        };
        let sol = solve_socp(&problem, 1e-8).unwrap();
        assert_eq!(sol.status, SocpStatus::Optimal);
        assert!((sol.x[0] - 5.0).abs() < 1e-7, "x = {}", sol.x[0]);
        assert!(sol.kkt_residual <= 1e-7);
    }

    /// min x s.t. ||1|| <= x
    #[test]
    fn scalar_lower_bound() {
        let problem = SocpProblem {
            num_vars: 1,
            objective: rvec(&[1.0]),
            cones: vec![SocConstraint {
                a: RMat::zeros(1, 1),
                b: rvec(&[1.0]),
                f: rvec(&[1.0]),
                d: 0.0,
            }],
            equalities: None,
        };
        let sol = solve_socp(&problem, 1e-8).unwrap();
        assert_eq!(sol.status, SocpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-7);
    }

    /// min x1 + x2 s.t. x1 - x2 = 1, ||x|| <= 2: optimum 1 - sqrt(7) at the
    /// disc boundary.
    #[test]
    fn equality_with_ball() {
        let problem = SocpProblem {
            num_vars: 2,
            objective: rvec(&[1.0, 1.0]),
            cones: vec![SocConstraint {
                a: RMat::identity(2, 2),
                b: rvec(&[0.0, 0.0]),
                f: rvec(&[0.0, 0.0]),
                d: 2.0,
            }],
            equalities: Some((RMat::from_row_slice(1, 2, &[1.0, -1.0]), rvec(&[1.0]))),
        };
        let sol = solve_socp(&problem, 1e-8).unwrap();
        assert_eq!(sol.status, SocpStatus::Optimal);
        assert!((sol.x[0] - sol.x[1] - 1.0).abs() < 1e-7);
        let want = -7.0f64.sqrt();
        assert!(
            (sol.objective - want).abs() < 1e-6,
            "objective {} want {}",
            sol.objective,
            want
        );
    }

    /// x >= 1 and x <= -1 simultaneously.
    #[test]
    fn detects_infeasibility() {
        let problem = SocpProblem {
            num_vars: 1,
            objective: rvec(&[1.0]),
            cones: vec![
                SocConstraint {
                    a: RMat::zeros(0, 1),
                    b: rvec(&[]),
                    f: rvec(&[1.0]),
                    d: -1.0,
                },
                SocConstraint {
                    a: RMat::zeros(0, 1),
                    b: rvec(&[]),
                    f: rvec(&[-1.0]),
                    d: -1.0,
                },
            ],
            equalities: None,
        };
        let sol = solve_socp(&problem, 1e-8).unwrap();
        assert_eq!(sol.status, SocpStatus::Infeasible);
    }

    /// min -x s.t. x >= 0 is unbounded below.
    #[test]
    fn detects_unboundedness() {
        let problem = SocpProblem {
            num_vars: 1,
            objective: rvec(&[-1.0]),
            cones: vec![SocConstraint {
                a: RMat::zeros(0, 1),
                b: rvec(&[]),
                f: rvec(&[1.0]),
                d: 0.0,
            }],
            equalities: None,
        };
        let sol = solve_socp(&problem, 1e-8).unwrap();
        assert_eq!(sol.status, SocpStatus::Unbounded);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let problem = SocpProblem {
            num_vars: 2,
            objective: rvec(&[1.0]),
            cones: vec![],
            equalities: None,
        };
        assert!(matches!(
            solve_socp(&problem, 1e-8),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn deterministic_across_runs() {
        let problem = SocpProblem {
            num_vars: 3,
            objective: rvec(&[0.3, -1.0, 0.2]),
            cones: vec![
                SocConstraint {
                    a: RMat::from_row_slice(2, 3, &[1.0, 0.4, 0.0, 0.0, 1.2, -0.3]),
                    b: rvec(&[0.1, -0.2]),
                    f: rvec(&[0.0, 0.0, 1.0]),
                    d: 1.5,
                },
                SocConstraint {
                    a: RMat::identity(3, 3),
                    b: rvec(&[0.0, 0.0, 0.0]),
                    f: rvec(&[0.0, 0.0, 0.0]),
                    d: 3.0,
                },
            ],
            equalities: None,
        };
        let a = solve_socp(&problem, 1e-8).unwrap();
        let b = solve_socp(&problem, 1e-8).unwrap();
        assert_eq!(a.status, SocpStatus::Optimal);
        assert_eq!(a.x, b.x);
        assert_eq!(a.iterations, b.iterations);
    }
}
