//! BS mode selection: three greedy heuristics that move one BS per round
//! from the transmit set to the receive set, a feasible-mode random
//! baseline, and an exhaustive oracle for small networks.
//!
//! Every method finishes by re-optimizing the beamformer and filters on the
//! chosen mode with the alternating algorithm, so the returned objective is
//! always a model evaluation of the returned iterates.

use crate::conic::geig::cholesky_pd;
use crate::conic::{lift_functional, unlift_vector, SocConstraint, SocpProblem, SocpStatus};
use crate::error::{Error, Result};
use crate::fpmm::{
    beamforming_step, build_forms_and_tau, init_beamforming_tx, run_alternating, update_filters,
    FpmmParams,
};
use crate::model::{
    assemble_sensing, sum_sensing_sinr, Beamformer, FilterBank, ModeVector,
};
use crate::scenario::Scenario;
use crate::{conv, CMat, CVec, Cplx, RMat, RVec, Real};
use num_traits::Float;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Receiver-choice rule of the communication-centric method. The printed
/// greedy step removes the most power-hungry transmitter, while the
/// water-filling reading removes the least; both are provided and the
/// least-power rule is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommRankingRule {
    /// Demote the BS with the smallest optimal transmit power.
    #[default]
    LeastPower,
    /// Demote the BS with the largest optimal transmit power.
    MostPower,
}

/// One selection round: which BS was demoted, the objective after the
/// round, and the per-BS scores (power or tentative sensing SINR) that
/// drove the choice.
#[derive(Debug, Clone)]
pub struct RoundRecord<T> {
    pub removed_bs: usize,
    pub objective: T,
    pub scores: Vec<(usize, T)>,
}

/// Output of a selection method.
#[derive(Debug, Clone)]
pub struct SelectionResult<T: Real> {
    pub mode: ModeVector,
    pub beamformer: Beamformer<T>,
    pub filters: FilterBank<T>,
    /// Final objective after the closing alternating re-design.
    pub objective: T,
    pub history: Vec<RoundRecord<T>>,
    /// Index into `history` of the round whose mode was kept.
    pub best_round: usize,
}

/// Minimizes total transmit power over the communication beamformers of the
/// given transmit set subject to the per-user SINR targets (interference
/// over communication columns only) and per-BS power epigraphs. Returns the
/// stacked communication matrix (`|T|M x K`, blocks in `tx` order) and the
/// exact per-BS powers of the returned beams.
pub fn solve_power_min<T: Real>(
    scenario: &Scenario<T>,
    tx: &[usize],
    gamma: &[T],
) -> Result<(CMat<T>, Vec<T>)> {
    let cfg = &scenario.config;
    let (m_n, k_n) = (cfg.antennas_per_bs, cfg.num_users);
    if tx.is_empty() || tx.len() * m_n < k_n {
        return Err(Error::ModeInfeasible(format!(
            "transmit set of {} BSs cannot serve {} users",
            tx.len(),
            k_n
        )));
    }
    if gamma.len() != k_n || gamma.iter().any(|&g| !(g > T::zero())) {
        return Err(Error::InvalidArgument(
            "needs one strictly positive SINR target per user".into(),
        ));
    }
    let nr = tx.len() * m_n;
    let n_c = nr * k_n; // complex beamformer entries
    let n = 2 * n_c + tx.len(); // lifted entries plus per-BS powers

    let channels: Vec<CVec<T>> = (0..k_n)
        .map(|k| {
            CVec::from_fn(nr, |r, _| {
                scenario.user_channels[tx[r / m_n]][k][r % m_n]
            })
        })
        .collect();

    // solve in amplitude-scaled variables: the matched-filter power lower
    // bound brings the optimum to order one, which keeps the solver's
    // relative termination criteria meaningful at any target level
    let mut power_floor = T::zero();
    for k in 0..k_n {
        let h_sq = channels[k].norm_squared();
        if !(h_sq > T::zero()) {
            return Err(Error::NumericalDomain(format!(
                "user {k} has a zero channel to the transmit set"
            )));
        }
        power_floor += gamma[k] * cfg.comm_noise / h_sq;
    }
    let amp_scale = Float::sqrt(power_floor);
    let noise_scaled = Float::sqrt(cfg.comm_noise) / amp_scale;

    let embed = |vec_red: &CVec<T>, col: usize| -> (RVec<T>, RVec<T>) {
        let mut full = CVec::zeros(n_c);
        for r in 0..nr {
            full[col * nr + r] = vec_red[r];
        }
        let (re, im) = lift_functional(&full);
        let mut re_n = RVec::zeros(n);
        let mut im_n = RVec::zeros(n);
        for i in 0..2 * n_c {
            re_n[i] = re[i];
            im_n[i] = im[i];
        }
        (re_n, im_n)
    };

    let mut cones = Vec::new();
    // interference-form SINR cones: sqrt(1/gamma) Re(h^H w_k) bounds the
    // norm of the other users' gains and the noise; this stays well
    // conditioned at the very large targets probed during bisection
    for k in 0..k_n {
        let rows = 2 * (k_n - 1) + 1;
        let mut a = RMat::zeros(rows, n);
        let mut b = RVec::zeros(rows);
        let mut ri = 0;
        for i in 0..k_n {
            if i == k {
                continue;
            }
            let (re, im) = embed(&channels[k], i);
            a.row_mut(ri).copy_from(&re.transpose());
            a.row_mut(ri + 1).copy_from(&im.transpose());
            ri += 2;
        }
        b[rows - 1] = noise_scaled;
        let (re_k, _) = embed(&channels[k], k);
        let f = re_k * Float::sqrt(T::one() / gamma[k]);
        cones.push(SocConstraint { a, b, f, d: T::zero() });
    }
    // rotated cones ||W_c,j||_F^2 <= P_j
    let half = conv::<T>(0.5);
    for (ti, _) in tx.iter().enumerate() {
        let rows = 2 * m_n * k_n + 1;
        let mut a = RMat::zeros(rows, n);
        let mut b = RVec::zeros(rows);
        let mut ri = 0;
        for k in 0..k_n {
            for ant in 0..m_n {
                let idx = k * nr + ti * m_n + ant;
                a[(ri, idx)] = T::one();
                a[(ri + 1, n_c + idx)] = T::one();
                ri += 2;
            }
        }
        a[(rows - 1, 2 * n_c + ti)] = -half;
        b[rows - 1] = half;
        let mut f = RVec::zeros(n);
        f[2 * n_c + ti] = half;
        cones.push(SocConstraint { a, b, f, d: half });
    }

    let mut objective = RVec::zeros(n);
    for ti in 0..tx.len() {
        objective[2 * n_c + ti] = T::one();
    }
    let problem = SocpProblem {
        num_vars: n,
        objective,
        cones,
        equalities: None,
    };
    let sol = crate::conic::solve_socp(&problem, conv(1e-8))?;
    match sol.status {
        SocpStatus::Optimal | SocpStatus::MaxIter => {}
        SocpStatus::Infeasible => {
            return Err(Error::InfeasibleConstraints(
                "power minimization reported infeasible targets".into(),
            ))
        }
        SocpStatus::Unbounded => {
            return Err(Error::SolverFailure(
                "power minimization reported unbounded".into(),
            ))
        }
    }
    let w_red = unlift_vector(&sol.x.rows(0, 2 * n_c).into_owned());
    let scale = Cplx::new(amp_scale, T::zero());
    let wc = CMat::from_fn(nr, k_n, |r, k| w_red[k * nr + r] * scale);
    let powers = (0..tx.len())
        .map(|ti| {
            wc.rows(ti * m_n, m_n)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<T>()
        })
        .collect();
    Ok((wc, powers))
}

/// Sensing beams orthogonal to the user channels: the per-target stacked
/// steering vectors are projected onto the null space of the stacked user
/// channels, summed after normalization, and replicated across the sensing
/// columns with total power exactly `power`.
///
/// Returns the `|T|M x M` matrix and a degeneracy flag that is set when the
/// projections vanish (then the matrix is zero).
pub fn nullspace_precoder<T: Real>(
    scenario: &Scenario<T>,
    tx: &[usize],
    power: T,
) -> Result<(CMat<T>, bool)> {
    let cfg = &scenario.config;
    let (m_n, k_n, l_n) = (cfg.antennas_per_bs, cfg.num_users, cfg.num_targets);
    if !(power >= T::zero()) {
        return Err(Error::InvalidArgument(
            "sensing power must be nonnegative".into(),
        ));
    }
    let nr = tx.len() * m_n;
    let tiny = conv::<T>(1e-12);

    // projector onto null(H^H) applied on demand; K = 0 degenerates to the
    // identity
    let h = CMat::from_fn(nr, k_n, |r, k| scenario.user_channels[tx[r / m_n]][k][r % m_n]);
    let gram_chol = if k_n > 0 {
        Some(cholesky_pd(h.ad_mul(&h)).map_err(|_| {
            Error::NumericalDomain("stacked user channels are rank deficient".into())
        })?)
    } else {
        None
    };
    let project = |a: &CVec<T>| -> CVec<T> {
        match &gram_chol {
            Some(chol) => {
                let coeff = chol.solve(&h.ad_mul(&CMat::from_column_slice(nr, 1, a.as_slice())));
                a - (&h * coeff).column(0).into_owned()
            }
            None => a.clone(),
        }
    };

    let mut w_au = CVec::zeros(nr);
    for l in 0..l_n {
        let mut steer = CVec::zeros(nr);
        for (ti, &j) in tx.iter().enumerate() {
            let a_j = scenario.steering(j, l);
            for ant in 0..m_n {
                steer[ti * m_n + ant] = a_j[ant];
            }
        }
        let projected = project(&steer);
        let norm = projected.norm();
        if norm < tiny {
            continue; // degenerate alignment with the channel span
        }
        w_au += projected / Cplx::new(norm, T::zero());
    }
    let norm = w_au.norm();
    if norm < tiny {
        return Ok((CMat::zeros(nr, m_n), true));
    }
    let scale = Cplx::new(Float::sqrt(power / conv(m_n as f64)) / norm, T::zero());
    let col = w_au * scale;
    let wr = CMat::from_fn(nr, m_n, |r, _| col[r]);
    Ok((wr, false))
}

fn guard_selection<T: Real>(scenario: &Scenario<T>) -> Result<()> {
    let cfg = &scenario.config;
    if cfg.num_targets == 0 {
        return Err(Error::InvalidArgument(
            "selection objective undefined without targets".into(),
        ));
    }
    if cfg.num_bs < 2 || (cfg.num_bs - 1) * cfg.antennas_per_bs < cfg.num_users {
        return Err(Error::ModeInfeasible(
            "no feasible mode: a receiver cannot be spared".into(),
        ));
    }
    Ok(())
}

/// Drops the rows of block `pos` (of size `m`) from a stacked matrix.
fn remove_block_rows<T: Real>(mat: &CMat<T>, pos: usize, m: usize) -> CMat<T> {
    let keep = mat.nrows() - m;
    CMat::from_fn(keep, mat.ncols(), |r, c| {
        let src = if r < pos * m { r } else { r + m };
        mat[(src, c)]
    })
}

/// Builds a full beamformer from transmit-set-local communication and
/// sensing blocks.
fn assemble_from_parts<T: Real>(
    scenario: &Scenario<T>,
    tx: &[usize],
    comm: Option<&CMat<T>>,
    sens: Option<&CMat<T>>,
) -> Beamformer<T> {
    let cfg = &scenario.config;
    let m_n = cfg.antennas_per_bs;
    let mut mat = CMat::zeros(cfg.num_bs * m_n, cfg.num_users + m_n);
    for (ti, &j) in tx.iter().enumerate() {
        for r in 0..m_n {
            if let Some(wc) = comm {
                for k in 0..cfg.num_users {
                    mat[(j * m_n + r, k)] = wc[(ti * m_n + r, k)];
                }
            }
            if let Some(wr) = sens {
                for c in 0..m_n {
                    mat[(j * m_n + r, cfg.num_users + c)] = wr[(ti * m_n + r, c)];
                }
            }
        }
    }
    Beamformer::from_matrix(mat, m_n, &ModeVector::from_tx_set(cfg.num_bs, tx))
}

struct BestSoFar<T> {
    objective: T,
    round: usize,
    mode: ModeVector,
}

/// Shared round bookkeeping: returns true to continue with another round.
fn track_round<T: Real>(
    best: &mut Option<BestSoFar<T>>,
    history: &[RoundRecord<T>],
    mode: &ModeVector,
    antennas_per_bs: usize,
    num_users: usize,
) -> bool {
    let record = history.last().expect("round recorded");
    let obj = record.objective;
    match best {
        None => {
            *best = Some(BestSoFar {
                objective: obj,
                round: history.len() - 1,
                mode: mode.clone(),
            })
        }
        Some(b) if obj > b.objective => {
            *best = Some(BestSoFar {
                objective: obj,
                round: history.len() - 1,
                mode: mode.clone(),
            })
        }
        Some(b) if obj < b.objective => return false, // objective decreased
        _ => {}
    }
    let n_tx = mode.num_tx();
    n_tx > 1 && (n_tx - 1) * antennas_per_bs >= num_users
}

fn finish<T: Real>(
    scenario: &Scenario<T>,
    params: &FpmmParams<T>,
    best: Option<BestSoFar<T>>,
    history: Vec<RoundRecord<T>>,
) -> Result<SelectionResult<T>> {
    let best = best.ok_or_else(|| Error::SolverFailure("selection made no round".into()))?;
    let outcome = run_alternating(scenario, &best.mode, params)?;
    Ok(SelectionResult {
        objective: outcome.objective(),
        mode: best.mode,
        beamformer: outcome.beamformer,
        filters: outcome.filters,
        history,
        best_round: best.round,
    })
}

/// Communication-centric selection: each round solves the power
/// minimization on the current transmitters, demotes one BS by the power
/// ranking rule, rebuilds sensing beams from the leftover power, and stops
/// when the sensing objective stops improving or no BS can be spared.
pub fn select_comm_centric<T: Real>(
    scenario: &Scenario<T>,
    rule: CommRankingRule,
    params: &FpmmParams<T>,
) -> Result<SelectionResult<T>> {
    guard_selection(scenario)?;
    let cfg = &scenario.config;
    let (m_n, k_n) = (cfg.antennas_per_bs, cfg.num_users);
    let mut tx: Vec<usize> = (0..cfg.num_bs).collect();
    let mut history: Vec<RoundRecord<T>> = Vec::new();
    let mut best: Option<BestSoFar<T>> = None;

    loop {
        let round = (|| -> Result<(RoundRecord<T>, Vec<usize>)> {
            let (wc, pj) = solve_power_min(scenario, &tx, &cfg.sinr_targets)?;
            // the power minimization is uncapped; a transmit set that needs
            // more than the budget cannot satisfy the original constraints
            if pj.iter().cloned().sum::<T>() > cfg.power_budget * (T::one() + conv(1e-9)) {
                return Err(Error::InfeasibleConstraints(
                    "communication power exceeds the budget".into(),
                ));
            }
            let scores: Vec<(usize, T)> = tx.iter().cloned().zip(pj.iter().cloned()).collect();
            let mut pos = 0usize;
            for (i, &p) in pj.iter().enumerate() {
                let better = match rule {
                    CommRankingRule::LeastPower => p < pj[pos],
                    CommRankingRule::MostPower => p > pj[pos],
                };
                if better {
                    pos = i;
                }
            }
            let removed = tx[pos];
            let mut tx_next = tx.clone();
            tx_next.remove(pos);
            let wc_kept = remove_block_rows(&wc, pos, m_n);
            let p_comm: T = pj
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != pos)
                .map(|(_, &p)| p)
                .sum();
            let p_sens = Float::max(cfg.power_budget - p_comm, T::zero());
            let (wr, _) = nullspace_precoder(scenario, &tx_next, p_sens)?;
            let w = assemble_from_parts(scenario, &tx_next, Some(&wc_kept), Some(&wr));
            let mode = ModeVector::from_tx_set(cfg.num_bs, &tx_next);
            let mats = assemble_sensing(scenario, &mode)?;
            let filters = update_filters(&mats, &w)?;
            let objective = sum_sensing_sinr(&mats, &w, &filters)?;
            Ok((
                RoundRecord {
                    removed_bs: removed,
                    objective,
                    scores,
                },
                tx_next,
            ))
        })();
        let (record, tx_next) = match round {
            Ok(v) => v,
            Err(e) if history.is_empty() => return Err(e),
            Err(_) => break,
        };
        tx = tx_next;
        history.push(record);
        let mode = ModeVector::from_tx_set(cfg.num_bs, &tx);
        if !track_round(&mut best, &history, &mode, m_n, k_n) {
            break;
        }
    }
    finish(scenario, params, best, history)
}

/// Sensing-centric selection: every candidate receiver is scored by the
/// sensing SINR it would enable with the whole budget on null-space sensing
/// beams; the winner is demoted, communication beams are restored by power
/// minimization, and the same stop rules apply.
pub fn select_sensing_centric<T: Real>(
    scenario: &Scenario<T>,
    params: &FpmmParams<T>,
) -> Result<SelectionResult<T>> {
    guard_selection(scenario)?;
    let cfg = &scenario.config;
    let (m_n, k_n) = (cfg.antennas_per_bs, cfg.num_users);
    let mut tx: Vec<usize> = (0..cfg.num_bs).collect();
    let mut history: Vec<RoundRecord<T>> = Vec::new();
    let mut best: Option<BestSoFar<T>> = None;

    loop {
        let round = (|| -> Result<(RoundRecord<T>, Vec<usize>)> {
            let mut scores = Vec::with_capacity(tx.len());
            let mut winner: Option<(usize, T, CMat<T>)> = None;
            for (pos, &cand) in tx.iter().enumerate() {
                let mut tx_cand = tx.clone();
                tx_cand.remove(pos);
                let mode_cand = ModeVector::from_tx_set(cfg.num_bs, &tx_cand);
                let (wr, _) = nullspace_precoder(scenario, &tx_cand, cfg.power_budget)?;
                let w_cand = assemble_from_parts(scenario, &tx_cand, None, Some(&wr));
                let mats = assemble_sensing(scenario, &mode_cand)?;
                let filters = update_filters(&mats, &w_cand)?;
                let gain = sum_sensing_sinr(&mats, &w_cand, &filters)?;
                scores.push((cand, gain));
                if winner.as_ref().map_or(true, |(_, g, _)| gain > *g) {
                    winner = Some((pos, gain, wr));
                }
            }
            let (pos, _, wr_star) = winner.expect("non-empty transmit set");
            let removed = tx[pos];
            let mut tx_next = tx.clone();
            tx_next.remove(pos);
            let (wc, pj) = solve_power_min(scenario, &tx_next, &cfg.sinr_targets)?;
            if pj.iter().cloned().sum::<T>() > cfg.power_budget * (T::one() + conv(1e-9)) {
                return Err(Error::InfeasibleConstraints(
                    "communication power exceeds the budget".into(),
                ));
            }
            let w = assemble_from_parts(scenario, &tx_next, Some(&wc), Some(&wr_star));
            let mode = ModeVector::from_tx_set(cfg.num_bs, &tx_next);
            let mats = assemble_sensing(scenario, &mode)?;
            let filters = update_filters(&mats, &w)?;
            let objective = sum_sensing_sinr(&mats, &w, &filters)?;
            Ok((
                RoundRecord {
                    removed_bs: removed,
                    objective,
                    scores,
                },
                tx_next,
            ))
        })();
        let (record, tx_next) = match round {
            Ok(v) => v,
            Err(e) if history.is_empty() => return Err(e),
            Err(_) => break,
        };
        tx = tx_next;
        history.push(record);
        let mode = ModeVector::from_tx_set(cfg.num_bs, &tx);
        if !track_round(&mut best, &history, &mode, m_n, k_n) {
            break;
        }
    }
    finish(scenario, params, best, history)
}

/// Joint selection: candidates are scored with filters optimized for the
/// tentative mode but the beamformer carried over from the previous round;
/// after each demotion one full filter/auxiliary/beamforming update runs.
pub fn select_joint<T: Real>(
    scenario: &Scenario<T>,
    params: &FpmmParams<T>,
) -> Result<SelectionResult<T>> {
    guard_selection(scenario)?;
    let cfg = &scenario.config;
    let (m_n, k_n) = (cfg.antennas_per_bs, cfg.num_users);
    let mut tx: Vec<usize> = (0..cfg.num_bs).collect();
    let all_tx = ModeVector::all_tx(cfg.num_bs);
    let mut w = init_beamforming_tx(scenario, &all_tx)?;
    let mut history: Vec<RoundRecord<T>> = Vec::new();
    let mut best: Option<BestSoFar<T>> = None;

    loop {
        let round = (|| -> Result<(RoundRecord<T>, Vec<usize>, Beamformer<T>)> {
            let mut scores = Vec::with_capacity(tx.len());
            let mut winner: Option<(usize, T)> = None;
            for (pos, &cand) in tx.iter().enumerate() {
                let mut tx_cand = tx.clone();
                tx_cand.remove(pos);
                let mode_cand = ModeVector::from_tx_set(cfg.num_bs, &tx_cand);
                let mut w_cand = w.clone();
                w_cand.enforce_mask(&mode_cand);
                let mats = assemble_sensing(scenario, &mode_cand)?;
                let filters = update_filters(&mats, &w_cand)?;
                let gain = sum_sensing_sinr(&mats, &w_cand, &filters)?;
                scores.push((cand, gain));
                if winner.as_ref().map_or(true, |(_, g)| gain > *g) {
                    winner = Some((pos, gain));
                }
            }
            let (pos, _) = winner.expect("non-empty transmit set");
            let removed = tx[pos];
            let mut tx_next = tx.clone();
            tx_next.remove(pos);
            let mode = ModeVector::from_tx_set(cfg.num_bs, &tx_next);
            let mut w_next = w.clone();
            w_next.enforce_mask(&mode);
            let mats = assemble_sensing(scenario, &mode)?;
            let filters = update_filters(&mats, &w_next)?;
            let (forms, tau) = build_forms_and_tau(&mats, &filters, &w_next);
            let (w_new, _) = beamforming_step(scenario, &mode, &w_next, &tau, &forms, params.socp_tol)?;
            let objective = sum_sensing_sinr(&mats, &w_new, &filters)?;
            Ok((
                RoundRecord {
                    removed_bs: removed,
                    objective,
                    scores,
                },
                tx_next,
                w_new,
            ))
        })();
        let (record, tx_next, w_new) = match round {
            Ok(v) => v,
            Err(e) if history.is_empty() => return Err(e),
            Err(_) => break,
        };
        tx = tx_next;
        w = w_new;
        history.push(record);
        let mode = ModeVector::from_tx_set(cfg.num_bs, &tx);
        if !track_round(&mut best, &history, &mode, m_n, k_n) {
            break;
        }
    }
    finish(scenario, params, best, history)
}

/// Draws a mode uniformly among all feasible modes: the transmitter count
/// is sampled by its binomial weight, then a uniform subset of that size is
/// chosen. Deterministic in the seed.
pub fn draw_feasible_mode(
    num_bs: usize,
    antennas_per_bs: usize,
    num_users: usize,
    seed: u64,
) -> Result<ModeVector> {
    let n_lo = std::cmp::max(1, num_users.div_ceil(antennas_per_bs));
    let n_hi = num_bs.saturating_sub(1);
    if n_lo > n_hi {
        return Err(Error::ModeInfeasible(
            "no feasible mode for these counts".into(),
        ));
    }
    let binom = |n: usize, k: usize| -> Result<u128> {
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc
                .checked_mul((n - i) as u128)
                .ok_or_else(|| Error::InvalidArgument("mode count overflow".into()))?
                / (i as u128 + 1);
        }
        Ok(acc)
    };
    let weights: Vec<u128> = (n_lo..=n_hi).map(|k| binom(num_bs, k)).collect::<Result<_>>()?;
    let total: u128 = weights.iter().sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1); // stream 0 is reserved for scenario draws
    let mut pick = rng.random_range(0..total);
    let mut n_tx = n_hi;
    for (idx, &w) in weights.iter().enumerate() {
        if pick < w {
            n_tx = n_lo + idx;
            break;
        }
        pick -= w;
    }
    // uniform n_tx-subset by partial Fisher-Yates
    let mut order: Vec<usize> = (0..num_bs).collect();
    for i in 0..n_tx {
        let j = rng.random_range(i..num_bs);
        order.swap(i, j);
    }
    Ok(ModeVector::from_tx_set(num_bs, &order[..n_tx]))
}

/// Random feasible mode followed by the full alternating optimization.
pub fn select_random<T: Real>(
    scenario: &Scenario<T>,
    seed: u64,
    params: &FpmmParams<T>,
) -> Result<SelectionResult<T>> {
    guard_selection(scenario)?;
    let cfg = &scenario.config;
    let mode = draw_feasible_mode(cfg.num_bs, cfg.antennas_per_bs, cfg.num_users, seed)?;
    let outcome = run_alternating(scenario, &mode, params)?;
    Ok(SelectionResult {
        objective: outcome.objective(),
        mode,
        beamformer: outcome.beamformer,
        filters: outcome.filters,
        history: Vec::new(),
        best_round: 0,
    })
}

/// All feasible modes in evaluation order: fewer transmitters first, then
/// lexicographically by the mode string.
pub fn feasible_modes(num_bs: usize, antennas_per_bs: usize, num_users: usize) -> Vec<ModeVector> {
    let mut modes: Vec<ModeVector> = (1u32..(1 << num_bs) - 1)
        .map(|mask| ModeVector::new((0..num_bs).map(|j| mask >> j & 1 == 1).collect()))
        .filter(|m| m.is_feasible(antennas_per_bs, num_users))
        .collect();
    modes.sort_by_key(|m| (m.num_tx(), m.as_bit_string()));
    modes
}

/// Enumerates every feasible mode (guarded to 10 BSs), runs the full
/// alternating optimization on each, and returns the best final objective.
/// Ties go to fewer transmitters, then to the lexicographically smallest
/// mode string. Modes whose SINR targets are unattainable are skipped.
pub fn select_exhaustive<T: Real>(
    scenario: &Scenario<T>,
    params: &FpmmParams<T>,
) -> Result<SelectionResult<T>> {
    guard_selection(scenario)?;
    let cfg = &scenario.config;
    if cfg.num_bs > 10 {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search is guarded to 10 BSs, got {}",
            cfg.num_bs
        )));
    }
    let modes = feasible_modes(cfg.num_bs, cfg.antennas_per_bs, cfg.num_users);

    let mut best: Option<(T, SelectionResult<T>)> = None;
    for mode in modes {
        let outcome = match run_alternating(scenario, &mode, params) {
            Ok(o) => o,
            Err(Error::InfeasibleConstraints(_)) => continue,
            Err(e) => return Err(e),
        };
        let obj = outcome.objective();
        if best.as_ref().map_or(true, |(b, _)| obj > *b) {
            best = Some((
                obj,
                SelectionResult {
                    objective: obj,
                    mode,
                    beamformer: outcome.beamformer,
                    filters: outcome.filters,
                    history: Vec::new(),
                    best_round: 0,
                },
            ));
        }
    }
    best.map(|(_, r)| r).ok_or_else(|| {
        Error::InfeasibleConstraints("no feasible mode attains the SINR targets".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, NetworkConfig};

    #[test]
    fn feasible_mode_counting_and_uniformity() {
        // J=3, M=2, K=2: 6 feasible modes, drawn uniformly
        let mut counts = std::collections::HashMap::new();
        for seed in 0..10_000u64 {
            let mode = draw_feasible_mode(3, 2, 2, seed).unwrap();
            assert!(mode.is_feasible(2, 2));
            *counts.entry(mode.as_bit_string()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expect = 10_000.0 / 6.0;
        let sigma = (10_000.0 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for (bits, count) in counts {
            assert!(
                (count as f64 - expect).abs() <= 3.0 * sigma,
                "mode {bits} drawn {count} times"
            );
        }
        // determinism
        assert_eq!(
            draw_feasible_mode(5, 2, 3, 99).unwrap(),
            draw_feasible_mode(5, 2, 3, 99).unwrap()
        );
        assert!(draw_feasible_mode(2, 1, 2, 0).is_err());
    }

    #[test]
    fn nullspace_projector_properties() {
        let cfg = NetworkConfig::<f64>::with_dims(4, 2, 3, 2);
        let sc = generate_scenario(&cfg, 21).unwrap();
        let tx = vec![0, 1, 3];
        let p = 0.7;
        let (wr, degenerate) = nullspace_precoder(&sc, &tx, p).unwrap();
        assert!(!degenerate);
        let h = CMat::from_fn(6, 3, |r, k| sc.user_channels[tx[r / 2]][k][r % 2]);
        let leak = h.ad_mul(&wr);
        assert!(leak.iter().all(|z| z.norm() <= 1e-8), "max leak {:?}",
            leak.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let total: f64 = wr.iter().map(|z| z.norm_sqr()).sum();
        assert!((total - p).abs() <= 1e-9);
        assert!(nullspace_precoder(&sc, &tx, -1.0).is_err());
    }

    #[test]
    fn nullspace_without_users_sums_steering() {
        // K = 0 is exercised directly on a hand-modified scenario
        let cfg = NetworkConfig::<f64>::with_dims(3, 2, 1, 2);
        let mut sc = generate_scenario(&cfg, 4).unwrap();
        sc.config.num_users = 0;
        sc.user_channels.iter_mut().for_each(|per| per.clear());
        let tx = vec![0, 2];
        let (wr, degenerate) = nullspace_precoder(&sc, &tx, 1.0).unwrap();
        assert!(!degenerate);
        let mut want = CVec::zeros(4);
        for l in 0..2 {
            let mut steer = CVec::zeros(4);
            for (ti, &j) in tx.iter().enumerate() {
                let a = sc.steering(j, l);
                steer[ti * 2] = a[0];
                steer[ti * 2 + 1] = a[1];
            }
            want += &steer / Cplx::new(steer.norm(), 0.0);
        }
        let want = &want / Cplx::new(want.norm(), 0.0) * Cplx::new((1.0f64 / 2.0).sqrt(), 0.0);
        for r in 0..4 {
            assert!((wr[(r, 0)] - want[r]).norm() < 1e-12);
            assert!((wr[(r, 1)] - want[r]).norm() < 1e-12);
        }
    }

    #[test]
    fn power_min_single_user_matched_filter() {
        let cfg = NetworkConfig::<f64>::with_dims(2, 2, 1, 1);
        let sc = generate_scenario(&cfg, 9).unwrap();
        let gamma = sc.config.sinr_targets[0];
        let (wc, pj) = solve_power_min(&sc, &[0], &[gamma]).unwrap();
        let h = &sc.user_channels[0][0];
        let want = gamma * sc.config.comm_noise / h.norm_squared();
        let total: f64 = pj.iter().sum();
        assert!(
            (total - want).abs() <= 1e-6 * want,
            "power {total}, closed form {want}"
        );
        // matched filter direction
        let w0 = wc.column(0).into_owned();
        let align = h.dotc(&w0).norm() / (h.norm() * w0.norm());
        assert!(align > 1.0 - 1e-8);
    }

    #[test]
    fn power_min_vanishes_with_target() {
        let cfg = NetworkConfig::<f64>::with_dims(3, 2, 2, 1);
        let sc = generate_scenario(&cfg, 30).unwrap();
        let (_, pj) = solve_power_min(&sc, &[0, 1, 2], &[1e-6, 1e-6]).unwrap();
        let small: f64 = pj.iter().sum();
        let (_, pj) = solve_power_min(&sc, &[0, 1, 2], &[1e-3, 1e-3]).unwrap();
        let larger: f64 = pj.iter().sum();
        assert!(small < 1e-6, "power {small} at vanishing targets");
        assert!(small < 1e-2 * larger, "{small} vs {larger}: power must vanish with the target");
    }
}
