mod common;

use common::{uniform_convolution, Instance};
use hri_core::human::Awareness;
use hri_core::prediction::collision_profile_marginal;
use hri_core::{AgentState, Belief, BoundMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ORACLE_TOL: f64 = 1e-12;

fn assert_close(got: &[f64], want: &[f64], tol: f64, what: &str) {
    assert_eq!(got.len(), want.len(), "{what}: length");
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() <= tol, "{what}[{k}]: got {g}, want {w}");
    }
}

fn three_cell() -> Instance {
    Instance {
        origin: vec![0.0],
        cell: vec![1.0],
        counts: vec![3],
        steps: vec![vec![0], vec![2]],
        x_h: vec![0.0],
        traj: vec![vec![5.0], vec![2.0], vec![2.0]],
        theta: [0.4, 0.1, 3.0, 0.7],
        goal: vec![2.0],
        v_ref: vec![0.5],
        gamma: 1.5,
        omega: 0.1,
        rho: 0.5,
        p_aware: 0.5,
    }
}

#[test]
fn three_cell_instance_matches_enumeration() {
    let inst = three_cell();
    let model = inst.model();
    let traj = inst.trajectory();
    let (first, marginal) = inst.enumerate();
    let exact = model
        .collision_profile_exact(&inst.human(), &traj, &inst.belief())
        .unwrap();
    let bound = model
        .collision_profile_marginal(&inst.human(), &traj, &inst.belief())
        .unwrap();
    assert_close(&exact.p_coll, &first, ORACLE_TOL, "exact");
    assert_close(&bound.p_coll, &marginal, ORACLE_TOL, "marginal");
    // The instance is not degenerate: both steps carry some risk and the
    // bound is strictly loose at step 2.
    assert!(first[1] > 0.0 && first[2] > 0.0);
    assert!(marginal[2] > first[2] + 1e-6);
}

#[test]
fn exact_profile_matches_enumeration_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut risky = 0;
    for i in 0..200 {
        let inst = Instance::random(&mut rng, 4);
        let (first, marginal) = inst.enumerate();
        if first.iter().any(|&p| p > 1e-3) {
            risky += 1;
        }
        let model = inst.model();
        let traj = inst.trajectory();
        let exact = model
            .collision_profile_exact(&inst.human(), &traj, &inst.belief())
            .unwrap();
        assert_close(
            &exact.p_coll,
            &first,
            ORACLE_TOL,
            &format!("instance {i} exact"),
        );
        let bound = model
            .collision_profile_marginal(&inst.human(), &traj, &inst.belief())
            .unwrap();
        assert_close(
            &bound.p_coll,
            &marginal,
            ORACLE_TOL,
            &format!("instance {i} marginal"),
        );
    }
    assert!(risky >= 50, "only {risky} instances carry collision risk");
}

#[test]
fn marginal_dominates_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..1000 {
        let inst = Instance::random(&mut rng, 4);
        let model = inst.model();
        let traj = inst.trajectory();
        let exact = model
            .collision_profile(BoundMode::Exact, &inst.human(), &traj, &inst.belief())
            .unwrap();
        let bound = model
            .collision_profile(BoundMode::Marginal, &inst.human(), &traj, &inst.belief())
            .unwrap();
        for k in 0..exact.p_coll.len() {
            assert!(
                bound.p_coll[k] >= exact.p_coll[k] - 1e-12,
                "instance {i} step {k}: {} < {}",
                bound.p_coll[k],
                exact.p_coll[k]
            );
        }
    }
}

#[test]
fn marginal_from_forecast_agrees_with_direct_marginal() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let inst = Instance::random(&mut rng, 4);
        let model = inst.model();
        let traj = inst.trajectory();
        let forecast = model
            .propagate_occupancy(&inst.human(), &traj, &inst.belief())
            .unwrap();
        let from_forecast = collision_profile_marginal(&forecast, &traj, model.grid(), model.rho());
        let direct = model
            .collision_profile_marginal(&inst.human(), &traj, &inst.belief())
            .unwrap();
        assert_close(&from_forecast.p_coll, &direct.p_coll, 1e-12, "marginal");
    }
}

#[test]
fn mixture_matches_cost_definitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let inst = Instance::random(&mut rng, 1);
        let model = inst.model();
        for beta in Awareness::BOTH {
            let aware = beta == Awareness::Aware;
            let got = model
                .mixture(&inst.human(), &AgentState::new(inst.traj[0].clone()), beta)
                .unwrap();
            let want = inst.mixture(&inst.x_h, &inst.traj[0], aware);
            assert_close(got.probs(), &want, 1e-12, "mixture");
            assert!((got.total() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn occupancy_rows_are_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..300 {
        let inst = Instance::random(&mut rng, 4);
        let model = inst.model();
        let forecast = model
            .propagate_occupancy(&inst.human(), &inst.trajectory(), &inst.belief())
            .unwrap();
        for k in 0..=forecast.horizon {
            assert!((forecast.row_total(k) - 1.0).abs() <= 1e-9, "row {k}");
            for (beta, chain) in forecast.chains.iter().enumerate() {
                if forecast.weights[beta] > 0.0 {
                    let s: f64 = chain[k].iter().sum();
                    assert!((s - 1.0).abs() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn first_collision_masses_and_survival_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..300 {
        let inst = Instance::random(&mut rng, 4);
        let model = inst.model();
        let traj = inst.trajectory();
        let exact = model
            .collision_profile_exact(&inst.human(), &traj, &inst.belief())
            .unwrap();
        assert_eq!(exact.p_coll[0], 0.0);
        let total: f64 = exact.p_coll.iter().sum::<f64>() + exact.survival.unwrap();
        assert!((total - 1.0).abs() <= 1e-9, "total {total}");

        let cond = model
            .conditioned_forecast(&inst.human(), &traj, &inst.belief())
            .unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=cond.horizon {
            let s = cond.row_total(k);
            assert!(s <= prev + 1e-12 && s <= 1.0 + 1e-12);
            prev = s;
        }
        assert!((prev - exact.survival.unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn single_hypothesis_beliefs_match_their_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let mut inst = Instance::random(&mut rng, 4);
        let mut pure = Vec::new();
        for p_aware in [0.0, 1.0] {
            inst.p_aware = p_aware;
            let (first, _) = inst.enumerate();
            let exact = inst
                .model()
                .collision_profile_exact(&inst.human(), &inst.trajectory(), &inst.belief())
                .unwrap();
            assert_close(&exact.p_coll, &first, ORACLE_TOL, "pure chain");
            pure.push(exact.p_coll);
        }
        inst.p_aware = 0.3;
        let mixed = inst
            .model()
            .collision_profile_exact(&inst.human(), &inst.trajectory(), &inst.belief())
            .unwrap();
        let want: Vec<f64> = pure[0]
            .iter()
            .zip(&pure[1])
            .map(|(u, a)| 0.7 * u + 0.3 * a)
            .collect();
        assert_close(&mixed.p_coll, &want, 1e-12, "recombined");
    }
}

fn line_instance(omega: f64) -> Instance {
    Instance {
        origin: vec![-20.0],
        cell: vec![0.5],
        counts: vec![81],
        steps: vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]],
        x_h: vec![0.0],
        traj: vec![vec![50.0]; 6],
        theta: [2.5, 8e-3, 300.0, 6e-3],
        goal: vec![5.0],
        v_ref: vec![0.5],
        gamma: 1000.0,
        omega,
        rho: 2.0,
        p_aware: 0.5,
    }
}

#[test]
fn uniform_human_spreads_like_repeated_convolution() {
    let inst = line_instance(1.0);
    let model = inst.model();
    let forecast = model
        .propagate_occupancy(&inst.human(), &inst.trajectory(), &inst.belief())
        .unwrap();
    let start = 40;
    for k in 0..=forecast.horizon {
        let want = uniform_convolution(&[-2, -1, 0, 1, 2], start, k);
        let row = forecast.combined(k);
        for (cell, &m) in row.iter().enumerate() {
            let w = want.get(&(cell as i64)).copied().unwrap_or(0.0);
            assert!((m - w).abs() <= 1e-12, "k {k} cell {cell}: {m} vs {w}");
        }
    }
}

#[test]
fn deterministic_human_is_a_moving_point_mass() {
    let inst = line_instance(0.0);
    let model = inst.model();
    let forecast = model
        .propagate_occupancy(&inst.human(), &inst.trajectory(), &inst.belief())
        .unwrap();
    let acts = inst.action_vectors();
    for beta in Awareness::BOTH {
        let mut x = inst.x_h.clone();
        for k in 0..=forecast.horizon {
            let cell = model.grid().locate(&x).unwrap();
            assert_eq!(forecast.chains[beta.index()][k][cell], 1.0, "step {k}");
            let p = inst.mixture(
                &x,
                &inst.traj[k.min(forecast.horizon - 1)],
                beta == Awareness::Aware,
            );
            let best = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
            x = vec![x[0] + acts[best][0]];
        }
    }
}

#[test]
fn deterministic_walk_into_the_robot() {
    // Forced single action toward a parked robot two cells away.
    let inst = Instance {
        origin: vec![0.0],
        cell: vec![1.0],
        counts: vec![10],
        steps: vec![vec![1]],
        x_h: vec![0.0],
        traj: vec![vec![2.0]; 4],
        theta: [1.0, 0.1, 5.0, 0.5],
        goal: vec![9.0],
        v_ref: vec![1.0],
        gamma: 1.0,
        omega: 0.0,
        rho: 0.4,
        p_aware: 0.5,
    };
    let exact = inst
        .model()
        .collision_profile_exact(&inst.human(), &inst.trajectory(), &inst.belief())
        .unwrap();
    assert_eq!(exact.p_coll, vec![0.0, 0.0, 1.0, 0.0]);
    assert_eq!(exact.survival, Some(0.0));
}

#[test]
fn distant_robot_gives_zero_risk_in_both_modes() {
    let inst = line_instance(0.4);
    let model = inst.model();
    for mode in [BoundMode::Exact, BoundMode::Marginal] {
        let p = model
            .collision_profile(mode, &inst.human(), &inst.trajectory(), &Belief::default())
            .unwrap();
        assert!(p.p_coll.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn collision_set_on_half_unit_line() {
    let mut inst = line_instance(0.1);
    inst.rho = 1.0;
    let model = inst.model();
    let mut cells = model.collision_cells(&[0.0]);
    cells.sort();
    assert_eq!(cells, vec![38, 39, 40, 41, 42]);
    inst.rho = 0.2;
    assert_eq!(inst.model().collision_cells(&[0.0]), vec![40]);
    assert!(model.collision_cells(&[100.0]).is_empty());
}
