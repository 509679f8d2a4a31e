//! Behavior of the mode selection methods: stop rules, feasibility
//! contracts, determinism, and oracle dominance on a small instance.

use cfisac::fpmm::FpmmParams;
use cfisac::model::{assemble_sensing, sum_sensing_sinr, ModeVector};
use cfisac::scenario::{generate_scenario, NetworkConfig};
use cfisac::selection::{
    feasible_modes, select_comm_centric, select_exhaustive, select_joint, select_random,
    select_sensing_centric, CommRankingRule,
};
use cfisac::Error;

fn params() -> FpmmParams<f64> {
    FpmmParams::default()
}

#[test]
fn comm_centric_stops_after_single_move_when_antennas_are_tight() {
    // J=2, M=K: the first demotion leaves (|T|-1)M < K, so exactly one
    // receiver is chosen
    let cfg = NetworkConfig::<f64>::with_dims(2, 2, 2, 1);
    let sc = generate_scenario(&cfg, 8).unwrap();
    let result = select_comm_centric(&sc, CommRankingRule::LeastPower, &params()).unwrap();
    assert_eq!(result.history.len(), 1);
    assert_eq!(result.mode.rx_set().len(), 1);
    assert!(result.mode.is_feasible(2, 2));
}

#[test]
fn all_methods_return_feasible_modes_and_consistent_objectives() {
    let cfg = NetworkConfig::<f64>::with_dims(4, 2, 2, 1);
    let sc = generate_scenario(&cfg, 15).unwrap();
    let p = params();
    let mut results = vec![
        ("cc", select_comm_centric(&sc, CommRankingRule::LeastPower, &p).unwrap()),
        ("sc", select_sensing_centric(&sc, &p).unwrap()),
        ("joint", select_joint(&sc, &p).unwrap()),
        ("random", select_random(&sc, 15, &p).unwrap()),
    ];
    // the printed most-power rule can greedily demote the BSs communication
    // depends on and strand itself on a mode whose targets are unattainable;
    // that surfaces as a recorded infeasibility, not a panic
    match select_comm_centric(&sc, CommRankingRule::MostPower, &p) {
        Ok(r) => results.push(("cc-max", r)),
        Err(Error::InfeasibleConstraints(_)) => {}
        Err(e) => panic!("cc-max: unexpected error {e}"),
    }
    for (name, r) in results {
        assert!(r.mode.is_feasible(2, 2), "{name}: infeasible mode");
        assert!(r.beamformer.respects_mask(&r.mode), "{name}: mask violated");
        // the reported objective is a model evaluation of the returned state
        let mats = assemble_sensing(&sc, &r.mode).unwrap();
        let again = sum_sensing_sinr(&mats, &r.beamformer, &r.filters).unwrap();
        assert!(
            (again - r.objective).abs() <= 1e-9 * (1.0 + r.objective.abs()),
            "{name}: stored {} recomputed {}",
            r.objective,
            again
        );
        // best-so-far semantics: no earlier round beats the kept round
        if !r.history.is_empty() {
            let kept = r.history[r.best_round].objective;
            for (i, rec) in r.history.iter().enumerate() {
                assert!(
                    rec.objective <= kept + 1e-12,
                    "{name}: round {i} ({}) beats kept round {} ({kept})",
                    rec.objective,
                    r.best_round
                );
            }
        }
    }
}

#[test]
fn selection_is_deterministic() {
    let cfg = NetworkConfig::<f64>::with_dims(5, 2, 2, 2);
    let sc = generate_scenario(&cfg, 33).unwrap();
    let p = params();
    let a = select_sensing_centric(&sc, &p).unwrap();
    let b = select_sensing_centric(&sc, &p).unwrap();
    assert_eq!(a.mode, b.mode);
    assert_eq!(a.objective, b.objective);
    let removed_a: Vec<usize> = a.history.iter().map(|r| r.removed_bs).collect();
    let removed_b: Vec<usize> = b.history.iter().map(|r| r.removed_bs).collect();
    assert_eq!(removed_a, removed_b);

    let ja = select_joint(&sc, &p).unwrap();
    let jb = select_joint(&sc, &p).unwrap();
    assert_eq!(ja.mode, jb.mode);
    assert_eq!(ja.objective, jb.objective);
}

#[test]
fn two_bs_network_leaves_single_pair() {
    let cfg = NetworkConfig::<f64>::with_dims(2, 2, 1, 1);
    let sc = generate_scenario(&cfg, 44).unwrap();
    let p = params();
    let cc = select_comm_centric(&sc, CommRankingRule::LeastPower, &p).unwrap();
    let sc_res = select_sensing_centric(&sc, &p).unwrap();
    assert_eq!(cc.mode.num_tx(), 1);
    assert_eq!(sc_res.mode.num_tx(), 1);
}

#[test]
fn joint_rejects_missing_targets_and_bounds_rounds() {
    let cfg = NetworkConfig::<f64>::with_dims(4, 2, 2, 1);
    let mut sc = generate_scenario(&cfg, 5).unwrap();
    // degenerate input: strip the targets
    sc.config.num_targets = 0;
    for j in 0..4 {
        sc.target_angles[j].clear();
        sc.target_gains[j].clear();
        for i in 0..4 {
            sc.rcs[j][i].clear();
        }
    }
    match select_joint(&sc, &params()) {
        Err(Error::InvalidArgument(_)) => {}
        other => panic!("expected rejection, got {other:?}"),
    }

    let sc = generate_scenario(&cfg, 5).unwrap();
    let result = select_joint(&sc, &params()).unwrap();
    assert!(result.history.len() <= 3); // at most J - 1 rounds
}

#[test]
fn exhaustive_enumerates_feasible_modes_and_dominates() {
    // J=3, M=2, K=2: 1 <= n_tx <= 2 gives 3 + 3 = 6 modes
    assert_eq!(feasible_modes(3, 2, 2).len(), 6);

    let cfg = NetworkConfig::<f64>::with_dims(3, 2, 2, 1);
    let sc = generate_scenario(&cfg, 27).unwrap();
    let p = params();
    let oracle = select_exhaustive(&sc, &p).unwrap();
    for (name, r) in [
        ("cc", select_comm_centric(&sc, CommRankingRule::LeastPower, &p).unwrap()),
        ("sc", select_sensing_centric(&sc, &p).unwrap()),
        ("joint", select_joint(&sc, &p).unwrap()),
        ("random", select_random(&sc, 27, &p).unwrap()),
    ] {
        assert!(
            oracle.objective >= r.objective - 1e-6 * (1.0 + oracle.objective.abs()),
            "{name} ({}) beat the oracle ({})",
            r.objective,
            oracle.objective
        );
    }
}

#[test]
fn exhaustive_is_guarded_against_large_networks() {
    let cfg = NetworkConfig::<f64>::with_dims(11, 1, 2, 1);
    let sc = generate_scenario(&cfg, 1).unwrap();
    assert!(matches!(
        select_exhaustive(&sc, &params()),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn comm_centric_beats_random_on_average() {
    let cfg = NetworkConfig::<f64>::with_dims(4, 2, 2, 1);
    let p = params();
    let mut cc_sum = 0.0;
    let mut random_sum = 0.0;
    let mut n = 0;
    for seed in 200..212u64 {
        let sc = generate_scenario(&cfg, seed).unwrap();
        let cc = select_comm_centric(&sc, CommRankingRule::LeastPower, &p);
        let rd = select_random(&sc, seed, &p);
        if let (Ok(cc), Ok(rd)) = (cc, rd) {
            cc_sum += cc.objective;
            random_sum += rd.objective;
            n += 1;
        }
    }
    assert!(n >= 10, "too many failed trials");
    assert!(
        cc_sum >= random_sum,
        "comm-centric mean {} below random mean {}",
        cc_sum / n as f64,
        random_sum / n as f64
    );
}
