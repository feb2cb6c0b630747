//! The two Retinex subproblem solvers against independent oracles: a
//! projected dual gradient method for the TV prox and dense linear solves
//! for the reflectance step.

use ibalm::grid::{classical_edge, divergence, gradient, neg_laplacian, tv_norm};
use ibalm::retinex::*;
use ibalm::solver::*;
use ibalm::{Image2D, VectorField2D};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Deserialize)]
struct Instance {
    center: Vec<Vec<f64>>,
    tau: f64,
}

fn corpus() -> Vec<(Image2D, f64)> {
    let raw: Vec<Instance> = serde_json::from_str(include_str!("data/tv_prox_corpus.json")).unwrap();
    raw.into_iter().map(|i| (Image2D::from_rows(&i.center), i.tau)).collect()
}

/// Minimizer of `‖∇l‖₁ + (τ/2)‖l − c‖²` by accelerated projected gradient
/// on the dual `max_{|p| ≤ 1} ⟨c, ∇ᵀp⟩ − ‖∇ᵀp‖²/(2τ)`, run until the
/// duality gap is below `1e−13`.
fn dual_oracle(c: &Image2D, tau: f64) -> Image2D {
    let (m, n) = c.shape();
    let primal_of = |p: &VectorField2D| c.add(&divergence(p).scaled(1.0 / tau));
    let project = |p: VectorField2D| {
        let (px, py) = p.into_parts();
        let s = px.zip_map(&py, |a, b| (a * a + b * b).sqrt().max(1.0));
        VectorField2D::new(px.zip_map(&s, |a, d| a / d), py.zip_map(&s, |a, d| a / d)).unwrap()
    };
    let mut p = VectorField2D::zeros(m, n);
    let mut q = p.clone();
    let mut t = 1.0f64;
    for _ in 0..2_000_000 {
        let l = primal_of(&q);
        let p_next = project(q.add(&gradient(&l).scaled(tau / 8.0)));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        q = p_next.add(&p_next.sub(&p).scaled((t - 1.0) / t_next));
        p = p_next;
        t = t_next;
        let l = primal_of(&p);
        let primal = tv_norm(&l) + 0.5 * tau * l.sub(c).norm_sq();
        let div_p = divergence(&p);
        let dual = -c.dot(&div_p) - div_p.norm_sq() / (2.0 * tau);
        if primal - dual < 1e-13 {
            return l;
        }
    }
    panic!("dual oracle did not close the gap");
}

fn tight() -> AdmmSettings {
    AdmmSettings {
        penalty: 10.0,
        max_iters: 200_000,
        tol: 1e-10,
    }
}

#[test]
fn tv_prox_matches_dual_oracle_on_corpus() {
    for (k, (c, tau)) in corpus().into_iter().enumerate() {
        let oracle = dual_oracle(&c, tau);
        let out = l_subproblem_solve(&c, tau, tight(), &TvProxState::from_image(&c)).unwrap();
        let err = out.solution().sub(&oracle).as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(err < 1e-4, "instance {k}: max error {err:e}");
    }
}

#[test]
fn tv_prox_concentrated_spike() {
    // c = [[0,0],[0,10]], τ = 1: the spike is pulled down and its
    // neighbours lifted, keeping the mean at 2.5.
    let c = Image2D::from_rows(&[[0.0, 0.0], [0.0, 10.0]]);
    let out = l_subproblem_solve(&c, 1.0, tight(), &TvProxState::from_image(&c)).unwrap();
    let l = out.solution();
    assert!((l.mean() - 2.5).abs() < 1e-8);
    assert!(l.get(1, 1) < 10.0 && l.get(0, 0) > 0.0);
    assert!(tv_prox_objective(l, &c, 1.0) <= tv_prox_objective(&c, &c, 1.0));
}

/// Dense `∇ᵀ∇` on an `m × n` periodic grid, row-major ordering.
fn dense_lap(m: usize, n: usize) -> DMatrix<f64> {
    let idx = |i: usize, j: usize| i * n + j;
    let mut l = DMatrix::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..n {
            for (a, b) in [((i + 1) % m, j), (i, (j + 1) % n)] {
                // row of the forward difference e_{a,b} − e_{i,j}
                let (p, q) = (idx(a, b), idx(i, j));
                l[(p, p)] += 1.0;
                l[(q, q)] += 1.0;
                l[(p, q)] -= 1.0;
                l[(q, p)] -= 1.0;
            }
        }
    }
    l
}

fn vecof(u: &Image2D) -> DVector<f64> {
    DVector::from_column_slice(u.as_slice())
}

#[test]
fn reflectance_update_matches_dense_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (alpha, tau2) = (20.0, 19.75);
    let (_, gamma) = build_metric_with_modulus(alpha, tau2, 1.05, 1.0).unwrap();
    let lap = dense_lap(2, 2);
    for _ in 0..20 {
        let rnd = |rng: &mut ChaCha8Rng| Image2D::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
        let (r, g, tilt) = (rnd(&mut rng), rnd(&mut rng), rnd(&mut rng));
        let lap_g = neg_laplacian(&g);
        let got = closed_form_reflectance(&r, &lap_g, &tilt, alpha, tau2, gamma);

        let id = DMatrix::<f64>::identity(4, 4);
        let metric = &id * gamma - &lap * (alpha / tau2);
        let a = &lap * alpha + &metric * tau2;
        let rhs = &lap * vecof(&g) * alpha + &metric * vecof(&r) * tau2 - vecof(&tilt);
        let want = a.lu().solve(&rhs).unwrap();
        assert!((vecof(&got) - want).amax() < 1e-10);

        let res = reflectance_stationarity(&r, &got, &lap_g, &tilt, alpha, tau2, gamma);
        assert!(res.norm() <= 1e-8 * (1.0 + got.norm()));
    }
}

#[test]
fn reflectance_trivial_case() {
    let z = Image2D::zeros(3, 3);
    let r = closed_form_reflectance(&z, &z, &z, 20.0, 15.3, 12.0);
    assert_eq!(r, z);
}

#[test]
fn metric_quadratic_form_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (alpha, tau2) = (20.0, 19.75);
    let (kernel, gamma) = build_metric(alpha, tau2, 1.05).unwrap();
    let lower = gamma - 8.0 * alpha / tau2;
    for _ in 0..100 {
        let u = Image2D::from_fn(6, 5, |_, _| rng.random_range(-1.0..1.0));
        let mu = kernel.grad(&u);
        assert!(mu.dot(&u) >= lower * u.norm_sq() * (1.0 - 1e-12));
    }
}

#[test]
fn one_step_matches_dense_oracle() {
    let img = Image2D::from_rows(&[[0.2, 0.05], [0.6, 0.3]]);
    let cfg = RetinexConfig {
        admm_tol: 1e-11,
        admm_max_iters: 500_000,
        ..Default::default()
    };
    let params = cfg.solver_params();
    let s = to_log_domain(&img, cfg.log_clamp).unwrap();
    let g = classical_edge(&img);
    let mut problem = RetinexProblem::new(s.clone(), g.clone(), &cfg).unwrap();
    let kernels = retinex_kernels(&cfg, params.rho[1]);

    // A state with momentum: previous iterate differs from the current one.
    let state = IterateState {
        x1: s.add(&Image2D::from_rows(&[[0.1, -0.2], [0.05, 0.3]])),
        x1_prev: s.clone(),
        x2: Image2D::from_rows(&[[0.2, 0.1], [-0.1, 0.4]]),
        x2_prev: Image2D::zeros(2, 2),
        k: 3,
    };
    let (next, _) = ibalm_step(&state, &mut problem, &params, &kernels).unwrap();

    let (beta, alpha) = (cfg.beta, cfg.alpha);
    let (a1, b1, a2, b2) = (
        params.alpha_at(0, 3),
        params.beta_at(0, 3),
        params.alpha_at(1, 3),
        params.beta_at(1, 3),
    );
    let (l, lp, r, rp) = (&state.x1, &state.x1_prev, &state.x2, &state.x2_prev);
    let tau1 = block_tau(&params, 0, 3, beta).unwrap();
    let y1 = l.add(&l.sub(lp).scaled(a1));
    let z1 = l.add(&l.sub(lp).scaled(b1));
    let t1 = z1.sub(&s).sub(r).scaled(beta).sub(&y1.sub(l).scaled(tau1));
    let l_new = dual_oracle(&l.sub(&t1.scaled(1.0 / tau1)), tau1);
    assert!(next.x1.sub(&l_new).as_slice().iter().all(|d| d.abs() < 1e-6));

    let tau2 = block_tau(&params, 1, 3, beta).unwrap();
    let y2 = r.add(&r.sub(rp).scaled(a2));
    let z2 = r.add(&r.sub(rp).scaled(b2));
    let t2 = l_new.sub(&s).sub(&z2).scaled(-beta).sub(&y2.sub(r).scaled(tau2));
    let (_, gamma) = build_metric_with_modulus(alpha, tau2, cfg.gamma_margin, params.rho[1]).unwrap();
    let lap = dense_lap(2, 2);
    let metric = DMatrix::<f64>::identity(4, 4) * gamma - &lap * (alpha / tau2);
    let a = &lap * alpha + &metric * tau2;
    let rhs = &lap * vecof(&g) * alpha + &metric * vecof(r) * tau2 - vecof(&t2);
    let r_new = a.lu().solve(&rhs).unwrap();
    assert!((vecof(&next.x2) - r_new).amax() < 1e-6);
}
