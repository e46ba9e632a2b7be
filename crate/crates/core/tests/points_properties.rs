mod common;

use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

use knroot::kn::kn_fiber;
use knroot::monoid::AffineMonoid;
use knroot::points::{
    angle_dist, cbar_to_kn, cplus_act, exp_point, lift, random_integral, same_orbit_cplus, sample_rng, scale, tau,
    CBarPoint, CPlusElement, CPoint, KNPoint,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn fs_monoids() -> Vec<Arc<AffineMonoid>> {
    static CORPUS: OnceLock<Vec<Arc<AffineMonoid>>> = OnceLock::new();
    CORPUS
        .get_or_init(|| common::fs_corpus().into_iter().map(|(_, m)| Arc::new(m)).collect())
        .clone()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

/// `e^{x(g)}` at every generator, evaluated from the definition.
fn exp_by_definition(x: &CBarPoint) -> Vec<Complex64> {
    let m = x.monoid();
    let f = x.face();
    m.generators()
        .iter()
        .map(|g| {
            let c = m.gp_coords(g).unwrap();
            match f.coords_in_face(&c) {
                Some(w) => {
                    let re: f64 = w.iter().zip(x.u()).map(|(&a, b)| a as f64 * b).sum();
                    let im: f64 = c.iter().zip(x.v()).map(|(&a, b)| a as f64 * b).sum();
                    Complex64::from_polar(re.exp(), im)
                }
                None => Complex64::new(0.0, 0.0),
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_matches_definition(which in 0usize..22, seed in any::<u64>()) {
        let ms = fs_monoids();
        let m = &ms[which % ms.len()];
        let x = CBarPoint::random(m, &mut sample_rng(seed, 0)).unwrap();
        let got = exp_point(&x).generator_values().unwrap();
        for (a, b) in got.iter().zip(exp_by_definition(&x)) {
            prop_assert!(close(*a, b, 1e-12));
        }
    }

    #[test]
    fn exp_is_equivariant(which in 0usize..22, seed in any::<u64>()) {
        let ms = fs_monoids();
        let m = &ms[which % ms.len()];
        let mut rng = sample_rng(seed, 0);
        let x = CBarPoint::random(m, &mut rng).unwrap();
        let g = CPlusElement::random(m, &mut rng);
        let lhs = exp_point(&cplus_act(&g, &x).unwrap()).generator_values().unwrap();
        let base = exp_point(&x).generator_values().unwrap();
        for (j, gen) in m.generators().iter().enumerate() {
            let c = m.gp_coords(gen).unwrap();
            let re: f64 = c.iter().zip(g.re()).map(|(&a, b)| a as f64 * b).sum();
            let im: f64 = c.iter().zip(g.im()).map(|(&a, b)| a as f64 * b).sum();
            let expected = Complex64::from_polar(re.exp(), im) * base[j];
            prop_assert!(close(lhs[j], expected, 1e-9));
        }
    }

    #[test]
    fn kn_image_is_invariant_under_integral_translates(which in 0usize..22, seed in any::<u64>()) {
        let ms = fs_monoids();
        let m = &ms[which % ms.len()];
        let mut rng = sample_rng(seed, 0);
        let x = CBarPoint::random(m, &mut rng).unwrap();
        let k = random_integral(m, 5, &mut rng);
        let y = cplus_act(&CPlusElement::integral(m.clone(), &k).unwrap(), &x).unwrap();
        prop_assert!(cbar_to_kn(&x).approx_eq(&cbar_to_kn(&y), 1e-9));
    }

    #[test]
    fn equal_kn_images_differ_integrally(which in 0usize..22, seed in any::<u64>()) {
        let ms = fs_monoids();
        let m = &ms[which % ms.len()];
        let x = CBarPoint::random(m, &mut sample_rng(seed, 0)).unwrap();
        let y = lift(&cbar_to_kn(&x));
        let g = same_orbit_cplus(&x, &y).unwrap().unwrap();
        for row in &x.face().restriction {
            let s: f64 = row.iter().zip(g.re()).map(|(&a, b)| a as f64 * b).sum();
            prop_assert!(s.abs() <= 1e-9);
        }
        for &t in g.im() {
            prop_assert!(angle_dist(t, 0.0) <= 1e-9);
        }
        prop_assert!(cplus_act(&g, &x).unwrap().approx_eq(&y, 1e-9));
    }

    #[test]
    fn tau_after_kn_is_exp(which in 0usize..22, seed in any::<u64>()) {
        let ms = fs_monoids();
        let m = &ms[which % ms.len()];
        let x = CBarPoint::random(m, &mut sample_rng(seed, 0)).unwrap();
        let a = tau(&cbar_to_kn(&x)).generator_values().unwrap();
        let b = exp_point(&x).generator_values().unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!(close(*p, *q, 1e-12));
        }
    }

    #[test]
    fn scaling_commutes_with_translation(which in 0usize..22, seed in any::<u64>(), r in 0.05f64..4.0) {
        let ms = fs_monoids();
        let m = &ms[which % ms.len()];
        let mut rng = sample_rng(seed, 0);
        let x = CBarPoint::random(m, &mut rng).unwrap();
        let g = CPlusElement::random(m, &mut rng);
        let lhs = scale(&cplus_act(&g, &x).unwrap(), r).unwrap();
        let rhs = cplus_act(&g.scaled(r), &scale(&x, r).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-9));
    }

    #[test]
    fn orbits_are_classified_by_support(which in 0usize..22, seed in any::<u64>()) {
        let ms = fs_monoids();
        let m = &ms[which % ms.len()];
        let mut rng = sample_rng(seed, 0);
        let x = CBarPoint::random(m, &mut rng).unwrap();
        let y = CBarPoint::random(m, &mut rng).unwrap();
        match same_orbit_cplus(&x, &y).unwrap() {
            Some(g) => {
                prop_assert_eq!(x.face_index(), y.face_index());
                prop_assert!(cplus_act(&g, &x).unwrap().approx_eq(&y, 1e-9));
            }
            None => prop_assert_ne!(x.face_index(), y.face_index()),
        }
    }

    #[test]
    fn fiber_samples_lie_over_the_base(which in 0usize..22, seed in any::<u64>()) {
        let ms = fs_monoids();
        let m = &ms[which % ms.len()];
        let k = KNPoint::random(m, &mut sample_rng(seed, 0)).unwrap();
        let x = tau(&k);
        let fiber = kn_fiber(&x, 8, seed).unwrap();
        prop_assert_eq!(fiber.rank, m.rank() - x.face().rank());
        for s in &fiber.sample_points {
            prop_assert!(tau(s).approx_eq(&x, 1e-9));
        }
    }

    #[test]
    fn point_json_round_trips(which in 0usize..22, seed in any::<u64>()) {
        let ms = fs_monoids();
        let m = &ms[which % ms.len()];
        let mut rng = sample_rng(seed, 0);
        let x = CBarPoint::random(m, &mut rng).unwrap();
        let back = CBarPoint::from_json(m.clone(), &x.to_json()).unwrap();
        prop_assert!(back.approx_eq(&x, 0.0));
        let k = cbar_to_kn(&x);
        prop_assert!(KNPoint::from_json(m.clone(), &k.to_json(), 1e-9).unwrap().approx_eq(&k, 1e-15));
        let c = exp_point(&x);
        prop_assert!(CPoint::from_json(m.clone(), &c.to_json(), 1e-9).unwrap().approx_eq(&c, 1e-15));
    }
}

#[test]
fn non_integral_translates_move_the_image() {
    for m in fs_monoids() {
        for i in 0..20 {
            let mut rng = sample_rng(3, i);
            let x = CBarPoint::random(&m, &mut rng).unwrap();
            for j in 0..m.rank() {
                let mut im = vec![0.0; m.rank()];
                im[j] = TAU * 0.37;
                let g = CPlusElement::new(m.clone(), &vec![0.0; m.rank()], &im).unwrap();
                let y = cplus_act(&g, &x).unwrap();
                assert!(!cbar_to_kn(&y).approx_eq(&cbar_to_kn(&x), 1e-9));
            }
        }
    }
}
