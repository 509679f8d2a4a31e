//! Brute-force oracles for the model assembly and both SINR metrics:
//! independent loop implementations evaluated element by element against
//! the library's structured ones.

use cfisac::model::{
    assemble_sensing, build_quadratic_forms, comm_sinr, sensing_sinr, sum_sensing_sinr,
    Beamformer, FilterBank, ModeVector,
};
use cfisac::scenario::{generate_scenario, NetworkConfig, Scenario};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;
type CMat = DMatrix<C>;
type CVec = DVector<C>;

/// Steering vector recomputed from scratch (independent of the library).
fn oracle_steering(sc: &Scenario<f64>, j: usize, l: usize) -> CVec {
    let cfg = &sc.config;
    let m = cfg.antennas_per_bs;
    let beta = sc.target_gains[j][l];
    let theta = sc.target_angles[j][l];
    CVec::from_fn(m, |a, _| {
        let phase = 2.0 * std::f64::consts::PI / cfg.wavelength
            * cfg.spacing
            * theta.sin()
            * a as f64;
        C::from_polar(beta, phase)
    })
}

/// Element-wise evaluation of the masked echo operator of target `l`.
fn oracle_a_hat(sc: &Scenario<f64>, mode: &ModeVector, l: usize) -> CMat {
    let cfg = &sc.config;
    let (j_n, m) = (cfg.num_bs, cfg.antennas_per_bs);
    let mut out = CMat::zeros(j_n * m, j_n * m);
    for j in 0..j_n {
        for i in 0..j_n {
            let mask = if !mode.is_tx(j) && mode.is_tx(i) { 1.0 } else { 0.0 };
            let arr = oracle_steering(sc, j, l);
            let dep = oracle_steering(sc, i, l);
            for r in 0..m {
                for c in 0..m {
                    out[(j * m + r, i * m + c)] =
                        sc.rcs[j][i][l] * arr[r] * dep[c] * C::new(mask, 0.0);
                }
            }
        }
    }
    out
}

/// Aggregated masked inter-BS leakage, element by element.
fn oracle_g_hat(sc: &Scenario<f64>, mode: &ModeVector) -> CMat {
    let cfg = &sc.config;
    let (j_n, m) = (cfg.num_bs, cfg.antennas_per_bs);
    let mut out = CMat::zeros(j_n * m, j_n * m);
    for i in 0..j_n {
        for j in 0..j_n {
            let mask = if mode.is_tx(i) && !mode.is_tx(j) { 1.0 } else { 0.0 };
            for r in 0..m {
                for c in 0..m {
                    // block (i, j) carries G_{i,j}^T
                    out[(i * m + r, j * m + c)] =
                        sc.cross_channels[i][j][(c, r)] * C::new(mask, 0.0);
                }
            }
        }
    }
    out
}

fn oracle_q(sc: &Scenario<f64>, mode: &ModeVector) -> DVector<f64> {
    let cfg = &sc.config;
    let m = cfg.antennas_per_bs;
    DVector::from_fn(cfg.num_bs * m, |i, _| {
        let a = if mode.is_tx(i / m) { 1.0 } else { 0.0 };
        (1.0 - a) * (1.0 - a)
    })
}

/// Literal double-loop form of the user SINR.
fn oracle_comm_sinr(sc: &Scenario<f64>, mode: &ModeVector, w: &Beamformer<f64>, k: usize) -> f64 {
    let cfg = &sc.config;
    let m = cfg.antennas_per_bs;
    let cols = cfg.num_users + m;
    let gain = |i: usize| -> C {
        let mut acc = C::new(0.0, 0.0);
        for j in 0..cfg.num_bs {
            let alpha = if mode.is_tx(j) { 1.0 } else { 0.0 };
            for a in 0..m {
                acc += sc.user_channels[j][k][a].conj()
                    * w.matrix()[(j * m + a, i)]
                    * C::new(alpha, 0.0);
            }
        }
        acc
    };
    let mut interference = cfg.comm_noise;
    for i in 0..cols {
        if i != k {
            interference += gain(i).norm_sqr();
        }
    }
    gain(k).norm_sqr() / interference
}

/// Sensing SINR from raw assembly through explicit quadratic matrices.
fn oracle_sensing_sinr(
    sc: &Scenario<f64>,
    mode: &ModeVector,
    w: &Beamformer<f64>,
    u: &CVec,
    l: usize,
) -> f64 {
    let cfg = &sc.config;
    let a_l = oracle_a_hat(sc, mode, l);
    let b = &a_l * w.matrix() * (&a_l * w.matrix()).adjoint();
    let dim = a_l.nrows();
    let mut c = CMat::zeros(dim, dim);
    for s in 0..cfg.num_targets {
        if s == l {
            continue;
        }
        let a_s = oracle_a_hat(sc, mode, s);
        c += &a_s * w.matrix() * (&a_s * w.matrix()).adjoint();
    }
    let g = oracle_g_hat(sc, mode);
    let gw = g.transpose() * w.matrix();
    c += &gw * gw.adjoint();
    let q = oracle_q(sc, mode);
    for i in 0..dim {
        c[(i, i)] += C::new(cfg.sensing_noise * q[i], 0.0);
    }
    let num = u.dotc(&(&b * u)).re;
    let den = u.dotc(&(&c * u)).re;
    num / den
}

fn random_masked_beamformer(
    sc: &Scenario<f64>,
    mode: &ModeVector,
    rng: &mut ChaCha8Rng,
) -> Beamformer<f64> {
    let cfg = &sc.config;
    let m = cfg.antennas_per_bs;
    let mut mat = CMat::zeros(cfg.num_bs * m, cfg.num_users + m);
    for z in mat.iter_mut() {
        *z = C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * C::new(0.05, 0.0);
    }
    Beamformer::from_matrix(mat, m, mode)
}

fn random_rx_filter(sc: &Scenario<f64>, mode: &ModeVector, rng: &mut ChaCha8Rng) -> CVec {
    let cfg = &sc.config;
    let m = cfg.antennas_per_bs;
    let mut u = CVec::zeros(cfg.num_bs * m);
    for j in 0..cfg.num_bs {
        if !mode.is_tx(j) {
            for a in 0..m {
                u[j * m + a] = C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
    }
    let n = u.norm();
    u / C::new(n, 0.0)
}

#[test]
fn assembly_matches_elementwise_oracle() {
    let cfg = NetworkConfig::<f64>::with_dims(3, 2, 2, 2);
    let sc = generate_scenario(&cfg, 51).unwrap();
    for tx in [vec![0usize], vec![0, 2], vec![1, 2]] {
        let mode = ModeVector::from_tx_set(3, &tx);
        let mats = assemble_sensing(&sc, &mode).unwrap();
        for l in 0..2 {
            let want = oracle_a_hat(&sc, &mode, l);
            let diff = (&mats.a_hat[l] - &want).norm();
            assert!(diff <= 1e-13 * (1.0 + want.norm()), "tx {tx:?} target {l}: {diff}");
        }
        let want_g = oracle_g_hat(&sc, &mode);
        assert!((&mats.g_hat - &want_g).norm() <= 1e-13 * (1.0 + want_g.norm()));
        let want_q = oracle_q(&sc, &mode);
        assert_eq!(mats.q_diag, want_q);
    }
}

#[test]
fn comm_sinr_matches_loop_oracle() {
    let cfg = NetworkConfig::<f64>::with_dims(4, 2, 3, 1);
    let sc = generate_scenario(&cfg, 52).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for tx in [vec![0usize, 1], vec![0, 2, 3]] {
        let mode = ModeVector::from_tx_set(4, &tx);
        let w = random_masked_beamformer(&sc, &mode, &mut rng);
        for k in 0..3 {
            let got = comm_sinr(&sc, &mode, &w, k).unwrap();
            let want = oracle_comm_sinr(&sc, &mode, &w, k);
            assert!(
                (got - want).abs() <= 1e-12 * (1.0 + want),
                "user {k}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn sensing_sinr_matches_brute_force_assembly() {
    let cfg = NetworkConfig::<f64>::with_dims(3, 2, 2, 2);
    let sc = generate_scenario(&cfg, 53).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mode = ModeVector::from_tx_set(3, &[0, 1]);
    let mats = assemble_sensing(&sc, &mode).unwrap();
    for _ in 0..5 {
        let w = random_masked_beamformer(&sc, &mode, &mut rng);
        let u = random_rx_filter(&sc, &mode, &mut rng);
        for l in 0..2 {
            let got = sensing_sinr(&mats, &w, &u, l).unwrap();
            let want = oracle_sensing_sinr(&sc, &mode, &w, &u, l);
            assert!(
                (got - want).abs() <= 1e-10 * (1.0 + want.abs()),
                "target {l}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn explicit_kronecker_forms_match_implicit() {
    let cfg = NetworkConfig::<f64>::with_dims(3, 2, 2, 2);
    let sc = generate_scenario(&cfg, 54).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mode = ModeVector::from_tx_set(3, &[0, 2]);
    let mats = assemble_sensing(&sc, &mode).unwrap();
    let filters = FilterBank::new(vec![
        random_rx_filter(&sc, &mode, &mut rng),
        random_rx_filter(&sc, &mode, &mut rng),
    ]);
    let forms = build_quadratic_forms(&mats, &filters);
    let w = random_masked_beamformer(&sc, &mode, &mut rng);
    let w_hat = w.stacked_vec();
    let dim = 6;
    let cols = 4;

    let kron_quad = |core: &CMat| -> f64 {
        // w_hat^H (I_{K+M} (x) core) w_hat
        let mut acc = C::new(0.0, 0.0);
        for blk in 0..cols {
            let seg = w_hat.rows(blk * dim, dim).into_owned();
            acc += seg.dotc(&(core * &seg));
        }
        acc.re
    };

    for l in 0..2 {
        let u = filters.filter(l);
        for s in 0..2 {
            let au = mats.a_hat[s].ad_mul(&CMat::from_column_slice(dim, 1, u.as_slice()));
            let core = &au * au.adjoint();
            let explicit = kron_quad(&core);
            let implicit = forms.d_form(l, s, &w);
            assert!(
                (explicit - implicit).abs() <= 1e-10 * (1.0 + explicit.abs()),
                "D[{l}][{s}]: {explicit} vs {implicit}"
            );
        }
        let gu = mats.g_hat.map(|z| z.conj()) * u;
        let core = &gu * gu.adjoint();
        let explicit = kron_quad(&core);
        let implicit = forms.f_form(l, &w);
        assert!(
            (explicit - implicit).abs() <= 1e-10 * (1.0 + explicit.abs()),
            "F[{l}]: {explicit} vs {implicit}"
        );
    }
}

#[test]
fn receiver_restricted_interference_is_positive_definite() {
    let cfg = NetworkConfig::<f64>::with_dims(4, 2, 2, 2);
    let sc = generate_scenario(&cfg, 55).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mode = ModeVector::from_tx_set(4, &[0, 3]);
    let mats = assemble_sensing(&sc, &mode).unwrap();
    let w = random_masked_beamformer(&sc, &mode, &mut rng);
    let rx_rows: Vec<usize> = (0..8).filter(|&i| mats.q_diag[i] > 0.0).collect();
    for l in 0..2 {
        let c = mats.c_matrix(l, &w);
        let c_rx = CMat::from_fn(rx_rows.len(), rx_rows.len(), |r, cc| {
            c[(rx_rows[r], rx_rows[cc])]
        });
        let eig = SymmetricEigen::new(c_rx);
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            min >= cfg.sensing_noise - 1e-12,
            "target {l}: min eigenvalue {min}"
        );
    }
}

#[test]
fn sinr_invariant_under_bs_permutation() {
    let cfg = NetworkConfig::<f64>::with_dims(3, 2, 2, 2);
    let sc = generate_scenario(&cfg, 56).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mode = ModeVector::from_tx_set(3, &[0, 1]);
    let w = random_masked_beamformer(&sc, &mode, &mut rng);
    let u = random_rx_filter(&sc, &mode, &mut rng);
    let mats = assemble_sensing(&sc, &mode).unwrap();

    // permute BS order (2, 0, 1) in every indexed structure
    let perm = [2usize, 0, 1];
    let m = 2;
    let mut sc_p = sc.clone();
    for (new_j, &old_j) in perm.iter().enumerate() {
        sc_p.bs_pos[new_j] = sc.bs_pos[old_j];
        sc_p.target_angles[new_j] = sc.target_angles[old_j].clone();
        sc_p.target_gains[new_j] = sc.target_gains[old_j].clone();
        for k in 0..2 {
            sc_p.user_channels[new_j][k] = sc.user_channels[old_j][k].clone();
        }
        for (new_i, &old_i) in perm.iter().enumerate() {
            sc_p.cross_channels[new_i][new_j] = sc.cross_channels[old_i][old_j].clone();
            sc_p.rcs[new_j][new_i] = sc.rcs[old_j][old_i].clone();
        }
    }
    let mode_p = ModeVector::new(perm.iter().map(|&old| mode.is_tx(old)).collect());
    let mut w_mat = CMat::zeros(6, 4);
    let mut u_p = CVec::zeros(6);
    for (new_j, &old_j) in perm.iter().enumerate() {
        for a in 0..m {
            u_p[new_j * m + a] = u[old_j * m + a];
            for c in 0..4 {
                w_mat[(new_j * m + a, c)] = w.matrix()[(old_j * m + a, c)];
            }
        }
    }
    let w_p = Beamformer::from_matrix(w_mat, m, &mode_p);
    let mats_p = assemble_sensing(&sc_p, &mode_p).unwrap();

    for k in 0..2 {
        let a = comm_sinr(&sc, &mode, &w, k).unwrap();
        let b = comm_sinr(&sc_p, &mode_p, &w_p, k).unwrap();
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
    for l in 0..2 {
        let a = sensing_sinr(&mats, &w, &u, l).unwrap();
        let b = sensing_sinr(&mats_p, &w_p, &u_p, l).unwrap();
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn objective_is_sum_of_per_target_sinrs() {
    let cfg = NetworkConfig::<f64>::with_dims(3, 2, 2, 3);
    let sc = generate_scenario(&cfg, 57).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mode = ModeVector::from_tx_set(3, &[1, 2]);
    let mats = assemble_sensing(&sc, &mode).unwrap();
    let w = random_masked_beamformer(&sc, &mode, &mut rng);
    let filters = FilterBank::new(
        (0..3).map(|_| random_rx_filter(&sc, &mode, &mut rng)).collect(),
    );
    let total = sum_sensing_sinr(&mats, &w, &filters).unwrap();
    let by_hand: f64 = (0..3)
        .map(|l| sensing_sinr(&mats, &w, filters.filter(l), l).unwrap())
        .sum();
    assert_eq!(total, by_hand);
}
