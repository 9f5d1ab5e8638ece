use geopg_core::rootfind::{find_xk_brent, find_xk_ssn, phi_bar, LineProbe};
use geopg_core::{
    prox_grad_step, vecops, CompositeProblem, ElasticNetLogistic, ElasticNetLs, EvalCounters, SparseDesign,
};
use proptest::prelude::*;

const P: usize = 6;
const N: usize = 4;

fn vec_in(len: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, len)
}

#[derive(Debug, Clone)]
struct Instance {
    entries: Vec<f64>,
    targets: Vec<f64>,
    alpha: f64,
    mu: f64,
}

fn instance() -> impl Strategy<Value = Instance> {
    (vec_in(P * N, 2.0), vec_in(P, 3.0), 0.01f64..1.0, 0.0f64..0.5).prop_map(|(entries, targets, alpha, mu)| Instance {
        entries,
        targets,
        alpha,
        mu,
    })
}

fn ls(inst: &Instance) -> ElasticNetLs {
    let d = SparseDesign::from_dense(P, N, &inst.entries, inst.targets.clone()).unwrap();
    ElasticNetLs::new(d, inst.alpha, inst.mu).unwrap().with_estimated_beta()
}

fn logistic(inst: &Instance) -> ElasticNetLogistic {
    let labels = inst.targets.iter().map(|b| if *b >= 0.0 { 1.0 } else { -1.0 }).collect();
    let d = SparseDesign::from_dense(P, N, &inst.entries, labels).unwrap();
    ElasticNetLogistic::new(d, inst.alpha, inst.mu).unwrap().with_estimated_beta()
}

fn step(p: &impl CompositeProblem, frac: f64) -> f64 {
    frac / p.beta().unwrap()
}

/// `F(y) ≥ F(x⁺) + ⟨G, y − x⟩ + t/2‖G‖² + α/2‖y − x‖²`
fn lower_model(p: &impl CompositeProblem, x: &[f64], y: &[f64], t: f64) -> Result<(), TestCaseError> {
    let mut k = EvalCounters::new();
    let it = prox_grad_step(p, x, t, &mut k).unwrap();
    let fy = p.objective(y, &mut k);
    let fxp = p.objective(&it.x_plus, &mut k);
    let dy = vecops::sub(y, x);
    let rhs = fxp + vecops::dot(&it.gmap, &dy) + 0.5 * t * it.gmap_norm_sq() + 0.5 * p.alpha() * vecops::norm_sq(&dy);
    prop_assert!(fy >= rhs - 1e-8 * (1.0 + fy.abs()), "F(y)={fy} rhs={rhs}");
    Ok(())
}

fn strong_monotonicity(p: &impl CompositeProblem, x: &[f64], y: &[f64], t: f64) -> Result<(), TestCaseError> {
    let mut k = EvalCounters::new();
    let gx = prox_grad_step(p, x, t, &mut k).unwrap().gmap;
    let gy = prox_grad_step(p, y, t, &mut k).unwrap().gmap;
    let d = vecops::sub(x, y);
    let lhs = vecops::dot(&vecops::sub(&gx, &gy), &d);
    let rhs = 0.5 * p.alpha() * vecops::norm_sq(&d);
    prop_assert!(lhs >= rhs - 1e-8 * (1.0 + rhs.abs()), "{lhs} < {rhs}");
    Ok(())
}

fn phi(p: &impl CompositeProblem, x: &[f64], c: &[f64], z: &[f64], t: f64) -> f64 {
    let mut k = EvalCounters::new();
    let it = prox_grad_step(p, z, t, &mut k).unwrap();
    vecops::dot(&vecops::sub(&it.x_plus, z), &vecops::sub(x, c))
}

fn phi_lipschitz(p: &impl CompositeProblem, pts: [&[f64]; 4], t: f64) -> Result<(), TestCaseError> {
    let [x, c, z1, z2] = pts;
    let diff = (phi(p, x, c, z1, t) - phi(p, x, c, z2, t)).abs();
    let bound = (2.0 + t * p.beta().unwrap()) * vecops::norm(&vecops::sub(x, c)) * vecops::norm(&vecops::sub(z1, z2));
    prop_assert!(diff <= bound * (1.0 + 1e-8) + 1e-12, "{diff} > {bound}");
    Ok(())
}

fn phi_bar_gap(p: &impl CompositeProblem, x: &[f64], c: &[f64], s: (f64, f64), t: f64) -> Result<(), TestCaseError> {
    let (s1, s2) = if s.0 <= s.1 { s } else { (s.1, s.0) };
    prop_assume!(s2 - s1 > 1e-6);
    let probe = LineProbe::new(p, x, c, t).unwrap();
    let mut k = EvalCounters::new();
    let gap = phi_bar(&probe, s2, &mut k).unwrap() - phi_bar(&probe, s1, &mut k).unwrap();
    let want = 0.5 * p.alpha() * t * (s2 - s1) * vecops::norm_sq(&vecops::sub(x, c));
    prop_assert!(gap >= want * (1.0 - 1e-8), "{gap} < {want}");
    Ok(())
}

/// The located `x_k` satisfies the two reduced conditions and hence the
/// decrease and separation inequalities.
fn line_search_conditions(p: &impl CompositeProblem, x: &[f64], c: &[f64], t: f64, ssn: bool) -> Result<(), TestCaseError> {
    let probe = LineProbe::new(p, x, c, t).unwrap();
    let mut k = EvalCounters::new();
    let root = if ssn {
        find_xk_ssn(&probe, 1e-12, &mut k).unwrap()
    } else {
        find_xk_brent(&probe, 1e-12, &mut k).unwrap()
    };
    let it = &root.iterate;
    let step = vecops::sub(&it.x_plus, &it.x);
    let scale = vecops::norm(&step) * (vecops::norm(&vecops::sub(x, &it.x)) + vecops::norm(&vecops::sub(&it.x, c)));
    let tol = 1e-8 * scale + 1e-14;
    prop_assert!(vecops::dot(&step, &vecops::sub(x, &it.x)) <= tol);
    prop_assert!(vecops::dot(&step, &vecops::sub(&it.x, c)) >= -tol);

    let f_prev = p.objective(x, &mut k);
    let f_new = p.objective(&it.x_plus, &mut k);
    let g2 = it.gmap_norm_sq();
    prop_assert!(f_new <= f_prev - 0.5 * t * g2 + 1e-8 * (1.0 + f_prev.abs()));
    let a = p.alpha();
    let sep = vecops::dist_sq(&it.x_pp, c);
    prop_assert!(sep >= g2 / (a * a) * (1.0 - 1e-8), "{sep} < {}", g2 / (a * a));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lower_model_ls(inst in instance(), x in vec_in(N, 3.0), y in vec_in(N, 3.0), tf in 0.05f64..=1.0) {
        let p = ls(&inst);
        lower_model(&p, &x, &y, step(&p, tf))?;
    }

    #[test]
    fn lower_model_logistic(inst in instance(), x in vec_in(N, 3.0), y in vec_in(N, 3.0), tf in 0.05f64..=1.0) {
        let p = logistic(&inst);
        lower_model(&p, &x, &y, step(&p, tf))?;
    }

    #[test]
    fn gradient_map_strongly_monotone(inst in instance(), x in vec_in(N, 3.0), y in vec_in(N, 3.0), tf in 0.05f64..=1.0) {
        let p = ls(&inst);
        strong_monotonicity(&p, &x, &y, step(&p, tf))?;
        let q = logistic(&inst);
        strong_monotonicity(&q, &x, &y, step(&q, tf))?;
    }

    #[test]
    fn phi_is_lipschitz(
        inst in instance(), x in vec_in(N, 3.0), c in vec_in(N, 3.0),
        z1 in vec_in(N, 3.0), z2 in vec_in(N, 3.0), tf in 0.05f64..=1.0,
    ) {
        let p = ls(&inst);
        phi_lipschitz(&p, [&x, &c, &z1, &z2], step(&p, tf))?;
        let q = logistic(&inst);
        phi_lipschitz(&q, [&x, &c, &z1, &z2], step(&q, tf))?;
    }

    #[test]
    fn phi_bar_increases_by_the_monotone_gap(
        inst in instance(), x in vec_in(N, 3.0), c in vec_in(N, 3.0),
        s1 in -2.0f64..3.0, s2 in -2.0f64..3.0, tf in 0.05f64..=1.0,
    ) {
        prop_assume!(vecops::dist_sq(&x, &c) > 1e-6);
        let p = ls(&inst);
        phi_bar_gap(&p, &x, &c, (s1, s2), step(&p, tf))?;
        let q = logistic(&inst);
        phi_bar_gap(&q, &x, &c, (s1, s2), step(&q, tf))?;
    }

    #[test]
    fn located_points_satisfy_the_line_conditions(
        inst in instance(), x in vec_in(N, 3.0), c in vec_in(N, 3.0), tf in 0.05f64..=1.0, ssn in any::<bool>(),
    ) {
        prop_assume!(vecops::dist_sq(&x, &c) > 1e-6);
        let p = ls(&inst);
        line_search_conditions(&p, &x, &c, step(&p, tf), ssn)?;
        let q = logistic(&inst);
        line_search_conditions(&q, &x, &c, step(&q, tf), ssn)?;
    }

    #[test]
    fn prox_is_nonexpansive(inst in instance(), u in vec_in(N, 5.0), v in vec_in(N, 5.0), t in 0.01f64..2.0) {
        let p = ls(&inst);
        let mut k = EvalCounters::new();
        let pu = p.prox_h(&u, t, &mut k);
        let pv = p.prox_h(&v, t, &mut k);
        prop_assert!(vecops::dist_sq(&pu, &pv) <= vecops::dist_sq(&u, &v) * (1.0 + 1e-15));
    }

    #[test]
    fn f_is_strongly_convex(inst in instance(), x in vec_in(N, 3.0), y in vec_in(N, 3.0)) {
        let p = logistic(&inst);
        let mut k = EvalCounters::new();
        let fx = p.f_value(&x, &mut k);
        let fy = p.f_value(&y, &mut k);
        let g = p.grad(&x, &mut k);
        let d = vecops::sub(&y, &x);
        let rhs = fx + vecops::dot(&g, &d) + 0.5 * p.alpha() * vecops::norm_sq(&d);
        prop_assert!(fy >= rhs - 1e-12 * (1.0 + fy.abs()));
    }

    #[test]
    fn matvec_matches_dense(entries in vec_in(5 * 4, 2.0), mask in prop::collection::vec(any::<bool>(), 5 * 4), v in vec_in(4, 3.0), w in vec_in(5, 3.0)) {
        let dense: Vec<f64> = entries.iter().zip(&mask).map(|(e, m)| if *m { *e } else { 0.0 }).collect();
        let d = SparseDesign::from_dense(5, 4, &dense, vec![0.0; 5]).unwrap();
        let mut k = EvalCounters::new();
        let av = d.matvec(&v, false, &mut k).unwrap();
        let atw = d.matvec(&w, true, &mut k).unwrap();
        for i in 0..5 {
            let want: f64 = (0..4).map(|j| dense[i * 4 + j] * v[j]).sum();
            prop_assert!((av[i] - want).abs() <= 1e-14 * (1.0 + want.abs()));
        }
        for j in 0..4 {
            let want: f64 = (0..5).map(|i| dense[i * 4 + j] * w[i]).sum();
            prop_assert!((atw[j] - want).abs() <= 1e-14 * (1.0 + want.abs()));
        }
        prop_assert_eq!(k.mvm, 2);
    }
}
