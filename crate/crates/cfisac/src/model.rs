//! Network model: transmit/receive mode assignment, beamformers, receive
//! filters, stacked sensing matrices, and the communication and sensing SINR
//! metrics.
//!
//! Conventions for a network of `J` BSs with `M` antennas each, `K` users
//! and `L` targets:
//!
//! - stacked vectors over BSs have `J` blocks of `M` entries;
//! - the beamforming matrix is `JM x (K+M)`: `K` communication columns
//!   followed by `M` sensing columns;
//! - a BS in receive mode contributes exactly zero rows to the beamformer
//!   and a BS in transmit mode contributes exactly zero entries to every
//!   receive filter.

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::{CMat, CVec, Cplx, RVec, Real};
use num_traits::Zero;

/// Binary transmit(1)/receive(0) role assignment of the BSs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeVector {
    bits: Vec<bool>,
}

impl ModeVector {
    /// Builds from per-BS transmit flags.
    pub fn new(bits: Vec<bool>) -> Self {
        ModeVector { bits }
    }

    /// Builds a mode with the given transmitters out of `num_bs` BSs.
    pub fn from_tx_set(num_bs: usize, tx: &[usize]) -> Self {
        let mut bits = vec![false; num_bs];
        for &j in tx {
            bits[j] = true;
        }
        ModeVector { bits }
    }

    /// All BSs transmitting (used only as the starting point of selection).
    pub fn all_tx(num_bs: usize) -> Self {
        ModeVector {
            bits: vec![true; num_bs],
        }
    }

    pub fn num_bs(&self) -> usize {
        self.bits.len()
    }

    pub fn is_tx(&self, j: usize) -> bool {
        self.bits[j]
    }

    /// Number of transmitters, `||alpha||_1`.
    pub fn num_tx(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Transmitter indices in ascending order.
    pub fn tx_set(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&j| self.bits[j]).collect()
    }

    /// Receiver indices in ascending order.
    pub fn rx_set(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&j| !self.bits[j]).collect()
    }

    /// The alpha vector as a 0/1 string, BS 0 first.
    pub fn as_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Tests exactly the three mode constraints: at least one transmitter,
    /// `M * ||alpha||_1 >= K`, and at least one receiver.
    pub fn is_feasible(&self, antennas_per_bs: usize, num_users: usize) -> bool {
        let n_tx = self.num_tx();
        n_tx >= 1 && antennas_per_bs * n_tx >= num_users && n_tx <= self.bits.len() - 1
    }

    pub fn assert_feasible(&self, antennas_per_bs: usize, num_users: usize) -> Result<()> {
        if self.is_feasible(antennas_per_bs, num_users) {
            Ok(())
        } else {
            Err(Error::ModeInfeasible(format!(
                "alpha = {} with M = {antennas_per_bs}, K = {num_users}",
                self.as_bit_string()
            )))
        }
    }
}

/// Stacked transmit beamforming matrix, `JM x (K+M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer<T: Real> {
    mat: CMat<T>,
    antennas_per_bs: usize,
}

impl<T: Real> Beamformer<T> {
    pub fn zeros(num_bs: usize, antennas_per_bs: usize, num_cols: usize) -> Self {
        Beamformer {
            mat: CMat::zeros(num_bs * antennas_per_bs, num_cols),
            antennas_per_bs,
        }
    }

    /// Wraps a full matrix, zeroing receiver-block rows to enforce the mask.
    pub fn from_matrix(mat: CMat<T>, antennas_per_bs: usize, mode: &ModeVector) -> Self {
        let mut b = Beamformer {
            mat,
            antennas_per_bs,
        };
        b.enforce_mask(mode);
        b
    }

    /// Zeroes all rows belonging to receive-mode BSs.
    pub fn enforce_mask(&mut self, mode: &ModeVector) {
        let m = self.antennas_per_bs;
        for j in 0..mode.num_bs() {
            if !mode.is_tx(j) {
                for r in j * m..(j + 1) * m {
                    for c in 0..self.mat.ncols() {
                        self.mat[(r, c)] = Cplx::zero();
                    }
                }
            }
        }
    }

    /// True when every receiver-block row is exactly zero.
    pub fn respects_mask(&self, mode: &ModeVector) -> bool {
        let m = self.antennas_per_bs;
        (0..mode.num_bs()).all(|j| {
            mode.is_tx(j) || self.mat.rows(j * m, m).iter().all(|z| *z == Cplx::zero())
        })
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn matrix_mut(&mut self) -> &mut CMat<T> {
        &mut self.mat
    }

    pub fn antennas_per_bs(&self) -> usize {
        self.antennas_per_bs
    }

    pub fn num_cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn column(&self, i: usize) -> CVec<T> {
        self.mat.column(i).into_owned()
    }

    /// Column-stacked vector `[w_1; ...; w_{K+M}]` of length `JM(K+M)`.
    pub fn stacked_vec(&self) -> CVec<T> {
        let (rows, cols) = self.mat.shape();
        CVec::from_fn(rows * cols, |i, _| self.mat[(i % rows, i / rows)])
    }

    /// Total transmit power `sum_j alpha_j ||W_j||_F^2`; with the mask
    /// enforced this is the squared Frobenius norm.
    pub fn total_power(&self) -> T {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// One receive filter per target, each of length `JM`, zero on transmitter
/// blocks and unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank<T: Real> {
    filters: Vec<CVec<T>>,
}

impl<T: Real> FilterBank<T> {
    pub fn new(filters: Vec<CVec<T>>) -> Self {
        FilterBank { filters }
    }

    pub fn num_targets(&self) -> usize {
        self.filters.len()
    }

    pub fn filter(&self, l: usize) -> &CVec<T> {
        &self.filters[l]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CVec<T>> {
        self.filters.iter()
    }
}

/// Mode-masked sensing operators shared by all SINR evaluations.
///
/// `a_hat[l]` maps the stacked transmit signal to the stacked echo of target
/// `l` (rows masked to receivers, columns to transmitters); `g_hat` is the
/// aggregated masked inter-BS leakage channel; `q_diag` is the 0/1 receiver
/// mask; `omega_diag` is the 0/1 transmit-power mask over the column-stacked
/// beamformer.
#[derive(Debug, Clone)]
pub struct SensingMatrices<T: Real> {
    pub a_hat: Vec<CMat<T>>,
    pub g_hat: CMat<T>,
    pub q_diag: RVec<T>,
    pub omega_diag: RVec<T>,
    pub sensing_noise: T,
    num_bs: usize,
    antennas_per_bs: usize,
    num_users: usize,
}

impl<T: Real> SensingMatrices<T> {
    pub fn num_targets(&self) -> usize {
        self.a_hat.len()
    }

    pub fn stacked_dim(&self) -> usize {
        self.num_bs * self.antennas_per_bs
    }

    pub fn num_beam_cols(&self) -> usize {
        self.num_users + self.antennas_per_bs
    }

    /// Signal quadratic-form matrix `B_l = A_hat_l W (A_hat_l W)^H`.
    pub fn b_matrix(&self, l: usize, w: &Beamformer<T>) -> CMat<T> {
        let aw = &self.a_hat[l] * w.matrix();
        &aw * aw.adjoint()
    }

    /// Interference-plus-noise matrix `C_l`: cross-target echoes, inter-BS
    /// leakage, and the receiver-masked noise floor.
    pub fn c_matrix(&self, l: usize, w: &Beamformer<T>) -> CMat<T> {
        let dim = self.stacked_dim();
        let mut c = CMat::zeros(dim, dim);
        for s in 0..self.num_targets() {
            if s == l {
                continue;
            }
            let aw = &self.a_hat[s] * w.matrix();
            c += &aw * aw.adjoint();
        }
        let gw = self.g_hat.transpose() * w.matrix();
        c += &gw * gw.adjoint();
        for i in 0..dim {
            c[(i, i)] += Cplx::new(self.sensing_noise * self.q_diag[i], T::zero());
        }
        c
    }
}

/// Builds the masked sensing operators for a feasible mode.
pub fn assemble_sensing<T: Real>(
    scenario: &Scenario<T>,
    mode: &ModeVector,
) -> Result<SensingMatrices<T>> {
    let cfg = &scenario.config;
    mode.assert_feasible(cfg.antennas_per_bs, cfg.num_users)?;
    let (j_n, m_n, l_n) = (cfg.num_bs, cfg.antennas_per_bs, cfg.num_targets);
    let dim = j_n * m_n;

    let mut a_hat = Vec::with_capacity(l_n);
    for l in 0..l_n {
        let mut mat = CMat::zeros(dim, dim);
        for j in 0..j_n {
            if mode.is_tx(j) {
                continue; // receiver rows only
            }
            let a_rx = scenario.steering(j, l);
            for i in 0..j_n {
                if !mode.is_tx(i) {
                    continue; // transmitter columns only
                }
                let a_tx = scenario.steering(i, l);
                let xi = scenario.rcs[j][i][l];
                for r in 0..m_n {
                    for c in 0..m_n {
                        // rank-one dyad with a transpose (not adjoint) on
                        // the departure steering vector
                        mat[(j * m_n + r, i * m_n + c)] = xi * a_rx[r] * a_tx[c];
                    }
                }
            }
        }
        a_hat.push(mat);
    }

    let mut g_hat = CMat::zeros(dim, dim);
    for i in 0..j_n {
        if !mode.is_tx(i) {
            continue; // row blocks carry transmitters
        }
        for j in 0..j_n {
            if mode.is_tx(j) {
                continue; // column blocks carry receivers
            }
            let g = &scenario.cross_channels[i][j];
            for r in 0..m_n {
                for c in 0..m_n {
                    g_hat[(i * m_n + r, j * m_n + c)] = g[(c, r)]; // transpose of G_{i,j}
                }
            }
        }
    }

    let q_diag = RVec::from_fn(dim, |i, _| {
        if mode.is_tx(i / m_n) {
            T::zero()
        } else {
            T::one()
        }
    });
    let cols = cfg.num_users + m_n;
    let omega_diag = RVec::from_fn(dim * cols, |i, _| {
        let row = i % dim;
        if mode.is_tx(row / m_n) {
            T::one()
        } else {
            T::zero()
        }
    });

    Ok(SensingMatrices {
        a_hat,
        g_hat,
        q_diag,
        omega_diag,
        sensing_noise: cfg.sensing_noise,
        num_bs: j_n,
        antennas_per_bs: m_n,
        num_users: cfg.num_users,
    })
}

/// Concatenation over BSs of `alpha_j h_{j,k}`, length `JM`; turns the
/// communication SINR sums into inner products with beamformer columns.
pub fn effective_channel<T: Real>(
    scenario: &Scenario<T>,
    mode: &ModeVector,
    k: usize,
) -> CVec<T> {
    let cfg = &scenario.config;
    let m = cfg.antennas_per_bs;
    let mut h = CVec::zeros(cfg.num_bs * m);
    for j in 0..cfg.num_bs {
        if !mode.is_tx(j) {
            continue;
        }
        for a in 0..m {
            h[j * m + a] = scenario.user_channels[j][k][a];
        }
    }
    h
}

/// Received SINR of user `k`; the interference sum runs over all other
/// columns of the beamformer including the sensing columns.
pub fn comm_sinr<T: Real>(
    scenario: &Scenario<T>,
    mode: &ModeVector,
    w: &Beamformer<T>,
    k: usize,
) -> Result<T> {
    let cfg = &scenario.config;
    if k >= cfg.num_users {
        return Err(Error::IndexOutOfRange {
            what: "user index",
            got: k,
            limit: cfg.num_users,
        });
    }
    let h = effective_channel(scenario, mode, k);
    let mut signal = T::zero();
    let mut interference = T::zero();
    for i in 0..w.num_cols() {
        let gain = h.dotc(&w.column(i)).norm_sqr();
        if i == k {
            signal = gain;
        } else {
            interference += gain;
        }
    }
    Ok(signal / (interference + cfg.comm_noise))
}

/// All per-user communication SINRs.
pub fn comm_sinr_all<T: Real>(
    scenario: &Scenario<T>,
    mode: &ModeVector,
    w: &Beamformer<T>,
) -> Result<Vec<T>> {
    (0..scenario.config.num_users)
        .map(|k| comm_sinr(scenario, mode, w, k))
        .collect()
}

fn filtered_echo_power<T: Real>(op: &CMat<T>, w: &Beamformer<T>, u: &CVec<T>) -> T {
    // || (op W)^H u ||^2 without forming the JM x JM quadratic matrix
    let proj = op.ad_mul(&CMat::from_column_slice(u.len(), 1, u.as_slice()));
    let proj = proj.column(0).into_owned();
    (0..w.num_cols())
        .map(|i| proj.dotc(&w.column(i)).norm_sqr())
        .sum()
}

/// Output sensing SINR for target `l` under filter `u_l`: the generalized
/// Rayleigh quotient of the echo and interference-plus-noise forms.
pub fn sensing_sinr<T: Real>(
    mats: &SensingMatrices<T>,
    w: &Beamformer<T>,
    u_l: &CVec<T>,
    l: usize,
) -> Result<T> {
    if l >= mats.num_targets() {
        return Err(Error::IndexOutOfRange {
            what: "target index",
            got: l,
            limit: mats.num_targets(),
        });
    }
    if !(u_l.norm_squared() > T::zero()) {
        return Err(Error::InvalidFilter);
    }
    let num = filtered_echo_power(&mats.a_hat[l], w, u_l);
    let mut den = T::zero();
    for s in 0..mats.num_targets() {
        if s != l {
            den += filtered_echo_power(&mats.a_hat[s], w, u_l);
        }
    }
    den += filtered_echo_power(&mats.g_hat.transpose(), w, u_l);
    let noise = u_l
        .iter()
        .enumerate()
        .map(|(i, z)| mats.q_diag[i] * z.norm_sqr())
        .sum::<T>()
        * mats.sensing_noise;
    Ok(num / (den + noise))
}

/// The optimization objective: sum of per-target sensing SINRs. Single
/// source of truth for the harness and the selection methods.
pub fn sum_sensing_sinr<T: Real>(
    mats: &SensingMatrices<T>,
    w: &Beamformer<T>,
    filters: &FilterBank<T>,
) -> Result<T> {
    let mut total = T::zero();
    for l in 0..mats.num_targets() {
        total += sensing_sinr(mats, w, filters.filter(l), l)?;
    }
    Ok(total)
}

/// Per-target quadratic forms of the beamforming subproblem, held in the
/// implicit vector representation: `w_hat^H D_{l,s} w_hat` equals the sum
/// over beamformer columns `i` of `|v[l][s]^H w_i|^2`, and likewise `F_l`
/// through `g[l]`.
#[derive(Debug, Clone)]
pub struct QuadraticForms<T: Real> {
    /// `v[l][s] = A_hat_s^H u_l`.
    pub v: Vec<Vec<CVec<T>>>,
    /// `g[l] = conj(G_hat) u_l`.
    pub g: Vec<CVec<T>>,
    /// `c_r[l] = sigma_r^2 u_l^H Q u_l`.
    pub c_r: Vec<T>,
}

impl<T: Real> QuadraticForms<T> {
    pub fn num_targets(&self) -> usize {
        self.v.len()
    }

    /// `w_hat^H D_{l,s} w_hat`.
    pub fn d_form(&self, l: usize, s: usize, w: &Beamformer<T>) -> T {
        let v = &self.v[l][s];
        (0..w.num_cols())
            .map(|i| v.dotc(&w.column(i)).norm_sqr())
            .sum()
    }

    /// `w_hat^H F_l w_hat`.
    pub fn f_form(&self, l: usize, w: &Beamformer<T>) -> T {
        let g = &self.g[l];
        (0..w.num_cols())
            .map(|i| g.dotc(&w.column(i)).norm_sqr())
            .sum()
    }

    /// Denominator of the target-`l` ratio: cross-target echoes, leakage and
    /// the filtered noise constant.
    pub fn denominator(&self, l: usize, w: &Beamformer<T>) -> T {
        let mut den = self.c_r[l];
        for s in 0..self.num_targets() {
            if s != l {
                den += self.d_form(l, s, w);
            }
        }
        den + self.f_form(l, w)
    }

    /// The target-`l` ratio expressed through the forms; equals the sensing
    /// SINR of the filter that produced them.
    pub fn ratio(&self, l: usize, w: &Beamformer<T>) -> T {
        self.d_form(l, l, w) / self.denominator(l, w)
    }

    /// Sum of ratios over targets.
    pub fn sum_of_ratios(&self, w: &Beamformer<T>) -> T {
        (0..self.num_targets()).map(|l| self.ratio(l, w)).sum()
    }
}

/// Builds the quadratic forms for the given filters.
pub fn build_quadratic_forms<T: Real>(
    mats: &SensingMatrices<T>,
    filters: &FilterBank<T>,
) -> QuadraticForms<T> {
    let l_n = mats.num_targets();
    let g_conj = mats.g_hat.map(|z| z.conj());
    let mut v = Vec::with_capacity(l_n);
    let mut g = Vec::with_capacity(l_n);
    let mut c_r = Vec::with_capacity(l_n);
    for l in 0..l_n {
        let u = filters.filter(l);
        let u_mat = CMat::from_column_slice(u.len(), 1, u.as_slice());
        let mut per_s = Vec::with_capacity(l_n);
        for s in 0..l_n {
            per_s.push(mats.a_hat[s].ad_mul(&u_mat).column(0).into_owned());
        }
        v.push(per_s);
        g.push((&g_conj * u).column(0).into_owned());
        let noise = u
            .iter()
            .enumerate()
            .map(|(i, z)| mats.q_diag[i] * z.norm_sqr())
            .sum::<T>();
        c_r.push(mats.sensing_noise * noise);
    }
    QuadraticForms { v, g, c_r }
}
