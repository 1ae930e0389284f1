use adaptive_ogd::data::{parse_libsvm_str, shuffle_order, to_libsvm_string, Dataset};
use adaptive_ogd::learners::{AdaptiveGlobalOgd, Learner, PerCoordinateOgd};
use adaptive_ogd::losses::L2Scope;
use adaptive_ogd::{axpy, dot, BoxDomain, ConvexLoss, Example, LossFunction, SparseVector};
use proptest::collection::vec;
use proptest::prelude::*;

const DIM: usize = 6;

fn dense() -> impl Strategy<Value = Vec<f64>> {
    vec(-10.0..10.0f64, DIM)
}

/// Dense vector with some exact zeros, so sparsity patterns differ.
fn sparse() -> impl Strategy<Value = SparseVector> {
    vec(prop_oneof![Just(0.0), -5.0..5.0f64], DIM).prop_map(|v| SparseVector::from_dense(&v))
}

fn domain() -> impl Strategy<Value = BoxDomain> {
    vec((-5.0..5.0f64, 0.0..5.0f64), DIM).prop_map(|iv| {
        let (lo, hi): (Vec<f64>, Vec<f64>) = iv.into_iter().map(|(a, w)| (a, a + w)).unzip();
        BoxDomain::explicit(lo, hi).unwrap()
    })
}

fn example() -> impl Strategy<Value = Example> {
    (sparse(), any::<bool>()).prop_map(|(x, pos)| Example::new(x, if pos { 1.0 } else { -1.0 }))
}

fn dist(u: &SparseVector, v: &SparseVector) -> f64 {
    axpy(-1.0, v, u).norm()
}

fn run(learner: &mut dyn Learner, grads: &[SparseVector]) -> Vec<SparseVector> {
    let mut points = Vec::new();
    for g in grads {
        points.push(learner.point().clone());
        learner.observe(&LossFunction::linear(g.clone())).unwrap();
    }
    points.push(learner.point().clone());
    points
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_feasible(d in domain(), x in dense()) {
        let p = d.project(&SparseVector::from_dense(&x)).unwrap();
        prop_assert!(d.contains(&p));
        prop_assert_eq!(d.project(&p).unwrap(), p);
    }

    #[test]
    fn projection_is_non_expansive(d in domain(), x in dense(), y in dense()) {
        let (x, y) = (SparseVector::from_dense(&x), SparseVector::from_dense(&y));
        let (px, py) = (d.project(&x).unwrap(), d.project(&y).unwrap());
        prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-12);
    }

    #[test]
    fn sparse_algebra_matches_dense(u in sparse(), v in sparse(), a in -3.0..3.0f64) {
        let (du, dv) = (u.to_dense(DIM), v.to_dense(DIM));
        let d: f64 = du.iter().zip(&dv).map(|(x, y)| x * y).sum();
        prop_assert!((dot(&u, &v) - d).abs() <= 1e-9 * (1.0 + d.abs()));
        let w = axpy(a, &u, &v).to_dense(DIM);
        for i in 0..DIM {
            prop_assert!((w[i] - (a * du[i] + dv[i])).abs() <= 1e-12);
        }
    }

    #[test]
    fn subgradient_inequality(e in example(), x in sparse(), y in sparse(), l2 in 0.0..1.0f64, g in sparse()) {
        let kink = x.get(0) * 0.5;
        let losses = [
            LossFunction::linear(g),
            LossFunction::absolute(2.0, kink, 1),
            LossFunction::hinge(&e),
            LossFunction::logistic(&e, l2),
        ];
        for f in &losses {
            let lower = f.value(&x) + dot(&f.subgradient(&x), &axpy(-1.0, &x, &y));
            prop_assert!(f.value(&y) >= lower - 1e-9 * (1.0 + lower.abs()), "{:?}", f);
        }
    }

    #[test]
    fn logistic_gradient_matches_finite_differences(e in example(), x in vec(-1.0..1.0f64, DIM), l2 in 0.0..0.1f64) {
        let f = LossFunction::Logistic { example: &e, l2, scope: L2Scope::Full };
        let g = f.subgradient(&SparseVector::from_dense(&x));
        let h = 1e-6;
        for i in 0..DIM {
            let (mut lo, mut hi) = (x.clone(), x.clone());
            lo[i] -= h;
            hi[i] += h;
            let fd = (f.value(&SparseVector::from_dense(&hi)) - f.value(&SparseVector::from_dense(&lo))) / (2.0 * h);
            prop_assert!((fd - g.get(i)).abs() <= 1e-5 * g.get(i).abs().max(1.0), "coord {}: {} vs {}", i, fd, g.get(i));
        }
    }

    #[test]
    fn per_coordinate_rates_never_increase(grads in vec(sparse(), 1..40)) {
        let mut learner = PerCoordinateOgd::new(BoxDomain::symmetric(2.0, Some(DIM)).unwrap(), 1.0).unwrap();
        let mut last = vec![f64::INFINITY; DIM];
        for g in &grads {
            learner.observe(&LossFunction::linear(g.clone())).unwrap();
            for (i, prev) in last.iter_mut().enumerate() {
                if let Some(r) = learner.rate(i) {
                    prop_assert!(r <= *prev);
                    *prev = r;
                }
            }
        }
    }

    #[test]
    fn global_rate_never_increases(grads in vec(sparse(), 1..40)) {
        let d = BoxDomain::symmetric(2.0, Some(DIM)).unwrap();
        let mut learner = AdaptiveGlobalOgd::with_true_diameter(d, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for g in &grads {
            learner.observe(&LossFunction::linear(g.clone())).unwrap();
            if let Some(r) = learner.last_rate() {
                prop_assert!(r <= last);
                last = r;
            }
        }
    }

    /// Both adaptive rates are inversely proportional to gradient size, so
    /// scaling every gradient by `c` leaves the iterates unchanged.
    #[test]
    fn iterates_are_invariant_to_gradient_scale(grads in vec(sparse(), 1..30), c in prop_oneof![Just(0.5), Just(3.0)]) {
        let d = BoxDomain::symmetric(1.5, Some(DIM)).unwrap();
        let scaled: Vec<SparseVector> = grads.iter().map(|g| g.scaled(c)).collect();
        let pairs: [(Box<dyn Learner>, Box<dyn Learner>); 2] = [
            (Box::new(PerCoordinateOgd::new(d.clone(), 1.0).unwrap()), Box::new(PerCoordinateOgd::new(d.clone(), 1.0).unwrap())),
            (Box::new(AdaptiveGlobalOgd::with_true_diameter(d.clone(), 1.0).unwrap()), Box::new(AdaptiveGlobalOgd::with_true_diameter(d.clone(), 1.0).unwrap())),
        ];
        for (mut a, mut b) in pairs {
            let (pa, pb) = (run(a.as_mut(), &grads), run(b.as_mut(), &scaled));
            for (x, y) in pa.iter().zip(&pb) {
                prop_assert!(dist(x, y) <= 1e-9, "{:?} vs {:?}", x, y);
            }
        }
    }

    /// In one dimension the global rate `s D / sqrt(2 sum g^2)` equals the
    /// per-coordinate rate `s' D / sqrt(sum g^2)` when `s = sqrt(2) s'`.
    #[test]
    fn one_dimensional_rates_coincide(gs in vec(-4.0..4.0f64, 1..50), lo in -3.0..0.0f64, w in 0.1..4.0f64) {
        let d = BoxDomain::explicit(vec![lo], vec![lo + w]).unwrap();
        let grads: Vec<SparseVector> = gs.iter().map(|&g| SparseVector::singleton(0, g)).collect();
        let mut global = AdaptiveGlobalOgd::with_true_diameter(d.clone(), 2f64.sqrt()).unwrap();
        let mut per = PerCoordinateOgd::new(d, 1.0).unwrap();
        for (x, y) in run(&mut global, &grads).iter().zip(&run(&mut per, &grads)) {
            prop_assert!((x.get(0) - y.get(0)).abs() <= 1e-9);
        }
    }

    #[test]
    fn shuffle_is_a_permutation(n in 0usize..300, seed in any::<u64>()) {
        let mut order = shuffle_order(n, seed);
        order.sort_unstable();
        prop_assert_eq!(order, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn libsvm_round_trip(examples in vec(example(), 1..20)) {
        let ds = Dataset::new("prop", examples);
        let text = to_libsvm_string(&ds);
        let back = parse_libsvm_str(&text).unwrap();
        prop_assert_eq!(&back.examples, &ds.examples);
        prop_assert_eq!(to_libsvm_string(&back), text);
    }
}
