use dynadmm::metrics::{c_norm, CNormContext, DualPair};
use dynadmm::numerics::{Matrix, Vector};
use dynadmm::oracle::{kkt_residual, solve_exact_kkt, solve_static_admm, OracleConfig};
use dynadmm::sharing::{SharingBlock, SharingProblem};
use dynadmm::solver::{run_dynamic, soft_threshold, SolverConfig, StepAudit, Tracker};
use dynadmm::synth::{quad_family_stream, CouplingKind, QuadFamilyConfig, RngStream};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn soft_threshold_is_the_l1_prox(a in prop::collection::vec(-5.0..5.0f64, 1..8), kappa in 0.01..3.0f64) {
        let a = Vector::from_vec(a);
        let s = soft_threshold(&a, kappa).unwrap();
        // prox optimality: a − s ∈ κ ∂‖s‖₁
        for (ai, si) in a.iter().zip(s.iter()) {
            let w = ai - si;
            if *si == 0.0 {
                prop_assert!(w.abs() <= kappa + 1e-15);
            } else {
                prop_assert!((w - kappa * si.signum()).abs() <= 1e-12);
            }
            prop_assert!(si.abs() <= ai.abs());
        }
    }

    #[test]
    fn every_tracking_step_solves_its_subproblems(seed in 0u64..10_000, eta in 0.0..0.5f64, random_b in any::<bool>()) {
        let coupling = if random_b { CouplingKind::RandomNonsingular } else { CouplingKind::NegIdentity };
        let cfg = QuadFamilyConfig { x_dim: 4, z_dim: 3, eta, floor: 0.5, coupling };
        let stream = quad_family_stream(&cfg, 15, &mut RngStream::new(seed)).unwrap();
        let mut tracker = Tracker::new(4, 3, 0.7).unwrap();
        for inst in &stream {
            let (_, audit) = tracker.advance_audited(inst).unwrap();
            prop_assert!(audit.worst() <= 1e-9, "{:?}", audit);
        }
    }

    #[test]
    fn tracker_matches_batch_run(seed in 0u64..10_000) {
        let cfg = QuadFamilyConfig { x_dim: 3, z_dim: 3, eta: 0.2, floor: 1.0, coupling: CouplingKind::NegIdentity };
        let stream = quad_family_stream(&cfg, 10, &mut RngStream::new(seed)).unwrap();
        let batch = run_dynamic(&stream, &SolverConfig::dynamic(1.3)).unwrap();
        let mut tracker = Tracker::new(3, 3, 1.3).unwrap();
        for (inst, expected) in stream.iter().zip(&batch) {
            prop_assert_eq!(tracker.advance(inst).unwrap(), expected);
        }
    }

    #[test]
    fn oracles_agree_and_certify(seed in 0u64..10_000) {
        let cfg = QuadFamilyConfig { x_dim: 5, z_dim: 2, eta: 0.0, floor: 0.5, coupling: CouplingKind::RandomNonsingular };
        let inst = quad_family_stream(&cfg, 1, &mut RngStream::new(seed)).unwrap().remove(0);
        let a = solve_exact_kkt(&inst).unwrap();
        let b = solve_static_admm(&inst, &OracleConfig::default()).unwrap();
        prop_assert!(kkt_residual(&inst, &b.x_star, &b.z_star, &b.lambda_star).unwrap() <= 1e-10);
        let ctx = CNormContext::new(inst.b.clone(), 1.0).unwrap();
        let gap = c_norm(&DualPair::of_optimum(&a).sub(&DualPair::of_optimum(&b)), &ctx).unwrap();
        prop_assert!(gap <= 1e-7);
    }

    #[test]
    fn structured_sharing_update_matches_generic(seed in 0u64..10_000, rho in 0.05..5.0f64) {
        let mut rng = RngStream::new(seed);
        let (n, p) = (4, 3);
        let blocks = (0..n)
            .map(|_| {
                let g = rng.uniform_matrix(p, p);
                SharingBlock { phi: &g * g.transpose() + Matrix::identity(p, p), theta: rng.uniform_vector(p) }
            })
            .collect();
        let sp = SharingProblem::new(blocks, 0.5).unwrap();
        let mut state = dynadmm::AdmmState::zeros(n * p, p);
        state.z = rng.uniform_vector(p);
        state.lambda = rng.uniform_vector(p);
        let direct = sp.x_update(&state, rho).unwrap();
        let fast = sp.x_update_structured(&state, rho).unwrap();
        prop_assert!((direct - fast).amax() <= 1e-9);
    }
}

#[test]
fn step_audit_flags_a_perturbed_iterate() {
    let cfg = QuadFamilyConfig { x_dim: 3, z_dim: 3, eta: 0.1, floor: 1.0, coupling: CouplingKind::NegIdentity };
    let stream = quad_family_stream(&cfg, 2, &mut RngStream::new(1)).unwrap();
    let mut tracker = Tracker::new(3, 3, 1.0).unwrap();
    let prev = tracker.state().clone();
    let mut next = tracker.advance(&stream[0]).unwrap().clone();
    assert!(StepAudit::of(&stream[0], 1.0, &prev, &next).unwrap().worst() <= 1e-12);
    next.x[0] += 1e-3;
    assert!(StepAudit::of(&stream[0], 1.0, &prev, &next).unwrap().x_stationarity > 1e-4);
}
