//! The inertial engine on a small separable problem whose proximal steps
//! are exact:
//!
//! ```text
//! Φ(x1, x2) = λ‖x1‖₁ + (μ/2)‖x2 − a‖² + (β/2)‖x1 − x2 − b‖²
//! ```

use ibalm::solver::*;
use ibalm::Error;
use proptest::prelude::*;

#[derive(Clone)]
struct Toy {
    lambda: f64,
    mu: f64,
    beta: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Toy {
    fn standard() -> Self {
        Toy {
            lambda: 2.0,
            mu: 1.0,
            beta: 1.0,
            a: vec![1.0, -0.5, 3.0],
            b: vec![0.2, 0.1, -1.0],
        }
    }

    fn residual(&self, x1: &[f64], x2: &[f64]) -> Vec<f64> {
        x1.iter().zip(x2).zip(&self.b).map(|((u, v), w)| u - v - w).collect()
    }
}

fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

impl CompositeProblem for Toy {
    type X1 = Vec<f64>;
    type X2 = Vec<f64>;

    fn objective(&self, x1: &Vec<f64>, x2: &Vec<f64>) -> f64 {
        let l1: f64 = x1.iter().map(|v| v.abs()).sum();
        let fit: f64 = x2.iter().zip(&self.a).map(|(v, w)| (v - w).powi(2)).sum();
        let cpl: f64 = self.residual(x1, x2).iter().map(|v| v * v).sum();
        self.lambda * l1 + 0.5 * self.mu * fit + 0.5 * self.beta * cpl
    }

    fn grad_h_minus_x1(&self, x1: &Vec<f64>, x2: &Vec<f64>) -> Vec<f64> {
        self.residual(x1, x2).iter().map(|v| -self.beta * v).collect()
    }

    fn grad_h_minus_x2(&self, x1: &Vec<f64>, x2: &Vec<f64>) -> Vec<f64> {
        self.residual(x1, x2).iter().map(|v| self.beta * v).collect()
    }

    fn lipschitz_x1(&self, _: &Vec<f64>) -> f64 {
        self.beta
    }

    fn lipschitz_x2(&self, _: &Vec<f64>) -> f64 {
        self.beta
    }

    fn coupling_lipschitz(&self) -> (f64, f64) {
        (0.0, 2.0 * self.beta)
    }

    fn prox_x1(
        &mut self,
        anchor: &Vec<f64>,
        tilt: &Vec<f64>,
        tau: f64,
        _: &KernelSpec<Vec<f64>>,
        _: &Vec<f64>,
    ) -> ibalm::Result<Vec<f64>> {
        Ok(anchor.iter().zip(tilt).map(|(c, t)| soft(c - t / tau, self.lambda / tau)).collect())
    }

    fn prox_x2(
        &mut self,
        anchor: &Vec<f64>,
        tilt: &Vec<f64>,
        tau: f64,
        _: &KernelSpec<Vec<f64>>,
        _: &Vec<f64>,
    ) -> ibalm::Result<Vec<f64>> {
        Ok(anchor
            .iter()
            .zip(tilt)
            .zip(&self.a)
            .map(|((c, t), a)| (self.mu * a - t + tau * c) / (self.mu + tau))
            .collect())
    }
}

fn params() -> SolverParams {
    SolverParams::with_lipschitz_cap(1.0)
}

fn start() -> IterateState<Vec<f64>, Vec<f64>> {
    IterateState::new(vec![4.0, -3.0, 0.5], vec![0.0, 2.0, -1.0])
}

#[test]
fn stationary_point_is_fixed() {
    // x1 = 0 and x2 = (μa − βb)/(μ + β) satisfy both optimality conditions
    // when |β(x2 + b)| ≤ λ componentwise.
    let mut toy = Toy::standard();
    let x2: Vec<f64> = toy.a.iter().zip(&toy.b).map(|(a, b)| (a - b) / 2.0).collect();
    let state = IterateState::new(vec![0.0; 3], x2.clone());
    for p in [params(), params().without_inertia()] {
        let (next, _) = ibalm_step(&state, &mut toy, &p, &Kernels::euclidean()).unwrap();
        assert!(next.x1.iter().all(|v| v.abs() < 1e-12));
        assert!(next.x2.iter().zip(&x2).all(|(u, v)| (u - v).abs() < 1e-12));
    }
}

#[test]
fn zero_schedules_reproduce_ama_exactly() {
    let mut p = params();
    p.max_iters = 40;
    let zero = p.without_inertia();
    let (sa, ta) = ama_solve(&mut Toy::standard(), &p, &Kernels::euclidean(), start()).unwrap();
    let (sb, tb) = ibalm_solve(&mut Toy::standard(), &zero, &Kernels::euclidean(), start()).unwrap();
    assert_eq!(sa, sb);
    assert_eq!(ta.objective_values(), tb.objective_values());
    let steps_a: Vec<f64> = ta.records.iter().map(|r| r.step_norm).collect();
    let steps_b: Vec<f64> = tb.records.iter().map(|r| r.step_norm).collect();
    assert_eq!(steps_a, steps_b);
}

#[test]
fn lyapunov_descent_and_vanishing_steps() {
    let mut p = params();
    p.max_iters = 2000;
    p.step_tol = 1e-12;
    let (_, trace) = ibalm_solve(&mut Toy::standard(), &p, &Kernels::euclidean(), start()).unwrap();
    let report = descent_check(&trace, trace.delta, p.epsilon, 1e-8);
    assert!(report.passed(), "violations at {:?}", report.violations);
    assert!(trace.converged);
    let thetas: Vec<f64> = trace.records.iter().map(|r| r.theta).collect();
    assert!(thetas.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    let bound = subgradient_bound_for_trace(&p, (0.0, 2.0), &trace);
    for r in &trace.records {
        assert!(r.subgrad_residual <= bound * r.step_norm + 1e-12);
    }
}

#[test]
fn descent_check_flags_injected_fault() {
    let mut p = params();
    p.max_iters = 30;
    let (_, mut trace) = ibalm_solve(&mut Toy::standard(), &p, &Kernels::euclidean(), start()).unwrap();
    assert!(descent_check(&trace, trace.delta, p.epsilon, 1e-8).passed());
    trace.records[12].theta += 1.0;
    let report = descent_check(&trace, trace.delta, p.epsilon, 1e-8);
    assert_eq!(report.violations, vec![trace.records[12].iter]);
    assert!(report.worst_margin < 0.0);

    // with δ = 0 the check is plain monotonicity of Θ
    let flat = descent_check(&trace, (0.0, 0.0), p.epsilon, 0.0);
    assert_eq!(flat.modulus, 0.0);
    assert_eq!(flat.violations, vec![trace.records[12].iter]);
}

#[test]
fn theta_hand_case() {
    assert_eq!(theta_from_parts(5.0, 4.0, 9.0, (2.0, 2.0)), 18.0);
    assert_eq!(theta_from_parts(5.0, 4.0, 9.0, (0.0, 0.0)), 5.0);
    let toy = Toy::standard();
    let s = IterateState::new(vec![1.0, 0.0, 0.0], vec![0.5, 0.5, 0.5]);
    assert_eq!(theta_value(&s, &toy, (3.0, 7.0)), toy.objective(&s.x1, &s.x2));
}

#[test]
fn stationary_pair_has_zero_residual() {
    let toy = Toy::standard();
    let x2: Vec<f64> = toy.a.iter().zip(&toy.b).map(|(a, b)| (a - b) / 2.0).collect();
    let s0 = IterateState::new(vec![0.0; 3], x2);
    let mut s1 = s0.clone();
    s1.k = 1;
    let r = subgradient_residual(&s0, &s1, &toy, &params(), &Kernels::euclidean()).unwrap();
    assert!(r < 1e-12);
}

#[test]
fn schedule_values() {
    let p = params();
    let (d1, d2) = compute_delta(&p);
    assert!((d1 - 13.0).abs() < 1e-12 && (d2 - 13.0).abs() < 1e-12);

    let mut q = params();
    q.alpha = [Schedule::Constant(0.0), Schedule::Constant(0.0)];
    q.beta = [Schedule::Constant(0.0), Schedule::Constant(0.0)];
    let (t1, _) = compute_tau(0, &q, 1.0, 1.0).unwrap();
    assert!((t1 - 15.3).abs() < 1e-12);
    q.alpha[0] = Schedule::Constant(0.4);
    let (t1, t2) = compute_tau(0, &q, 1.0, 1.0).unwrap();
    assert!((t1 - 25.5).abs() < 1e-12);
    assert!((t2 - 15.3).abs() < 1e-12);

    let mut z = params();
    z.alpha_bar = [0.0; 2];
    z.beta_bar = [0.0; 2];
    z.alpha = [Schedule::Constant(0.0), Schedule::Constant(0.0)];
    z.beta = [Schedule::Constant(0.0), Schedule::Constant(0.0)];
    assert_eq!(compute_delta(&z), (0.0, 0.0));
    let (t1, _) = compute_tau(0, &z, 0.0, 0.0).unwrap();
    assert_eq!(t1, z.tau_floor);

    let mut c = params();
    c.lambda_plus = [0.0, 1.0];
    assert_eq!(compute_delta(&c).0, 0.0);

    assert!(compute_tau(0, &p, 1.5, 1.0).is_err());
}

#[test]
fn rejects_inadmissible_extrapolation_cap() {
    let mut p = params();
    p.alpha_bar[1] = 0.45;
    assert!(matches!(p.validate(), Err(Error::InvalidParameter { .. })));
}

proptest! {
    #[test]
    fn tau_never_exceeds_its_bound(
        a1 in 0.0f64..0.4, a2 in 0.0f64..0.4,
        b1 in 0.0f64..0.9, b2 in 0.0f64..0.9,
        l1 in 0.0f64..=1.0, l2 in 0.0f64..=1.0,
    ) {
        let mut p = params();
        p.alpha = [Schedule::Constant(a1), Schedule::Constant(a2)];
        p.beta = [Schedule::Constant(b1), Schedule::Constant(b2)];
        let (t1, t2) = compute_tau(0, &p, l1, l2).unwrap();
        let (u1, u2) = tau_upper_bounds(&p);
        prop_assert!(t1 <= u1 * (1.0 + 1e-15) && t2 <= u2 * (1.0 + 1e-15));
        prop_assert!(t1 >= p.tau_floor && t2 >= p.tau_floor);
    }

    #[test]
    fn toy_runs_descend_for_any_admissible_schedule(
        a in 0.0f64..0.39, b in 0.0f64..0.89, seed in -3.0f64..3.0,
    ) {
        let mut p = params();
        p.alpha = [Schedule::Constant(a), Schedule::Constant(a)];
        p.beta = [Schedule::Constant(b), Schedule::Constant(b)];
        p.max_iters = 60;
        let init = IterateState::new(vec![seed, -seed, 1.0], vec![0.5 * seed, 2.0, -seed]);
        let (_, trace) = ibalm_solve(&mut Toy::standard(), &p, &Kernels::euclidean(), init).unwrap();
        prop_assert!(descent_check(&trace, trace.delta, p.epsilon, 1e-8).passed());
    }
}
