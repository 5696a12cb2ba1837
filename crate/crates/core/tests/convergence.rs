use aafp_core::bounds::{bound_c, SpectralInterval};
use aafp_core::linalg::{jacobi_scale, norm2, read_matrix_market, write_matrix_market};
use aafp_core::problems::{build_poisson_fd, rng_normal, SeededRng};
use aafp_core::{
    aa_solve, aafp_solve, gmres_solve, jacobi_map, richardson_map, CsrMatrixF32, CsrMatrixF64, RichardsonMapF32,
    ScheduleConfig, StopRule, Window,
};
use proptest::prelude::*;

fn diagonal(d: &[f64], b: Vec<f64>) -> aafp_core::RichardsonMapF64 {
    let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, 1.0 - v)).collect();
    richardson_map(CsrMatrixF64::from_triplets(d.len(), d.len(), &t).unwrap(), b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // ‖r_{jp}‖ ≤ C(a,b,m)^j ‖M‖^{jp} ‖r₀‖ for diagonal M with spectrum in [a, b], m ≤ t, s = 1
    #[test]
    fn subsequence_bound_for_expansive_diagonal_maps(
        spectrum in prop::collection::vec(1.05f64..=1.5, 8..30),
        b in prop::collection::vec(-1.0f64..1.0, 30),
        m in 1usize..=4,
        extra_t in 0usize..=2,
    ) {
        let t = m + extra_t;
        let n = spectrum.len();
        let q = diagonal(&spectrum, b[..n].to_vec());
        let iv = SpectralInterval::new(1.05, 1.5).unwrap();
        let c = bound_c(&iv, m as u32).unwrap();
        let norm_m = spectrum.iter().fold(0.0f64, |x, v| x.max(*v));
        let cfg = ScheduleConfig::new(Window::Bounded(m), 1, t).unwrap();
        let (_, tr) = aafp_solve(&q, &vec![0.0; n], &cfg, &StopRule::relative(1e-9, 200)).unwrap();
        let p = t + 1;
        let r0 = tr.residual_norms[0];
        let mut j = 1;
        while j * p <= tr.iterations {
            let bound = c.powi(j as i32) * norm_m.powi((j * p) as i32) * r0;
            prop_assert!(tr.residual_norms[j * p] <= bound * (1.0 + 1e-8), "j = {}", j);
            j += 1;
        }
    }
}

#[test]
fn unbounded_aa_is_gmres_shifted_by_one() {
    // t = 0: r(x_{k}) = M r^G_{k-1}
    let p = build_poisson_fd::<f64>(7).unwrap();
    let (a, b) = jacobi_scale(&p.matrix, &p.rhs).unwrap();
    let q = richardson_map(a.clone(), b.clone()).unwrap();
    let x0: Vec<f64> = rng_normal(&mut SeededRng::new(3), 49);
    let (_, tr) = aa_solve(&q, &x0, Window::unbounded(), &StopRule::relative(1e-9, 100)).unwrap();
    let g = gmres_solve(&a, &b, &x0, &StopRule::relative(1e-12, 100), true).unwrap();
    let its = g.iterates.unwrap();
    for k in 1..=tr.iterations.min(its.len()) {
        let rg = q.linear_residual(&its[k - 1]);
        if norm2(&rg) < 1e-8 * g.residual_norms[0] {
            break;
        }
        let want = norm2(&q.apply_iteration_matrix(&rg));
        assert!((tr.residual_norms[k] - want).abs() <= 1e-8 * want, "k = {k}");
    }
}

#[test]
fn poisson_jacobi_accelerated_in_single_precision() {
    let p = build_poisson_fd::<f32>(9).unwrap();
    let q: RichardsonMapF32 = jacobi_map(&p.matrix, &p.rhs).unwrap();
    let cfg = ScheduleConfig::new(Window::Bounded(5), 1, 2).unwrap();
    let (x, tr) = aafp_solve(&q, &vec![0.0f32; 81], &cfg, &StopRule::relative(1e-5, 500)).unwrap();
    assert!(tr.converged);
    let err = x.iter().zip(&p.exact).map(|(a, b)| (a - b).abs()).fold(0.0f32, f32::max);
    // discretization error dominates at this grid
    assert!(err < 2e-2, "max error {err}");
}

#[test]
fn matrix_market_round_trip_feeds_gmres() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("poisson.mtx");
    let p = build_poisson_fd::<f64>(5).unwrap();
    write_matrix_market(&path, &p.matrix).unwrap();
    let a: CsrMatrixF64 = read_matrix_market(&path).unwrap();
    assert_eq!(a, p.matrix);
    let single: CsrMatrixF32 = read_matrix_market(&path).unwrap();
    assert_eq!(single.nnz(), a.nnz());
    let g = gmres_solve(&a, &p.rhs, &[0.0; 25], &StopRule::relative(1e-12, 50), false).unwrap();
    assert!(g.converged);
    assert!(g.iterations <= 25);
}
