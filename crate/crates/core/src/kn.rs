//! The Kato-Nakayama local model `Hom(P, ℝ≥0 × S¹)`: fibers of `τ` and a
//! pointwise check that the chart square is cartesian.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec;
use crate::intlattice::FinAbGroup;
use crate::monoid::AffineMonoid;
use crate::points::{
    self, angle_dist, cbar_to_kn, cplus_act, exp_point, extend_from_face, lift, same_orbit_cplus, sample_rng, tau,
    CBarPoint, CPlusElement, CPoint, KNPoint,
};
use crate::report::{Failure, SuiteOptions, VerificationReport};

/// The fiber `τ⁻¹(x) ≅ Hom(P^gp/F^gp, S¹)`, a real torus of dimension
/// `rank`, represented by its character lattice and finitely many samples.
#[derive(Clone, Debug)]
pub struct TorusFiber {
    pub base: CPoint,
    pub rank: usize,
    /// `P^gp/F^gp` with its projection from `P^gp` coordinates.
    pub lattice: FinAbGroup,
    pub sample_points: Vec<KNPoint>,
}

impl TorusFiber {
    pub fn to_json(&self) -> Value {
        json!({
            "base": self.base.to_json(),
            "rank": self.rank,
            "lattice": self.lattice,
            "samples": self.sample_points.iter().map(KNPoint::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Fails unless `P` is sharp and saturated.
pub fn require_sharp_saturated(monoid: &AffineMonoid) -> Result<()> {
    if !monoid.is_sharp()? {
        return Err(Error::NotSharp);
    }
    if !monoid.is_saturated()? {
        return Err(Error::NotSaturated);
    }
    Ok(())
}

/// Samples the fiber of `τ` over `x`.
///
/// The character of `x` on `F^gp` is extended to `P^gp` by zero on the
/// non-pivot HNF basis vectors, then twisted by uniformly random characters of
/// `P^gp/F^gp`. Another complement would move the samples around the torus
/// without changing rank or membership.
pub fn kn_fiber(x: &CPoint, samples: usize, seed: u64) -> Result<TorusFiber> {
    let monoid = x.monoid();
    let f = x.face();
    let stalk = monoid.char_stalk(f)?;
    let quotient = stalk.quotient;
    let rank = quotient.free_rank;
    let k = monoid.rank();
    let base_sigma = extend_from_face(f, k, x.character().angles());
    let projection = quotient.projection.to_i64_rows()?;
    let sample_points = (0..samples)
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let psi: Vec<f64> = (0..rank).map(|_| rng.gen_range(0.0..TAU)).collect();
            let sigma: Vec<f64> = (0..k)
                .map(|j| {
                    let twist: f64 = projection.iter().zip(&psi).map(|(row, p)| row[j] as f64 * p).sum();
                    base_sigma[j] + twist
                })
                .collect();
            KNPoint::new(monoid.clone(), x.face_index(), x.modulus(), &sigma)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TorusFiber {
        base: x.clone(),
        rank,
        lattice: quotient,
        sample_points,
    })
}

/// Options for [`verify_chart_cartesian`]. `perturbation` shifts one angle of
/// every constructed lift and serves as a negative control.
#[derive(Clone, Copy, Debug, Default)]
pub struct ChartOptions {
    pub suite: SuiteOptions,
    pub perturbation: Option<f64>,
}

/// Checks on sampled points that `ℂ̄(P) → Hom(P, ℝ≥0 × S¹)` is a
/// `ℤ(P)`-torsor quotient compatible with `exp` and `τ`:
/// invariance under `2πiℤ(P)`, equal images differ by `2πiℤ(P)`,
/// non-integral translates change the image, lifts exist, and
/// `τ ∘ (e^x, e^{iy}) = exp`.
pub fn verify_chart_cartesian(monoid: &Arc<AffineMonoid>, opts: &ChartOptions) -> Result<VerificationReport> {
    require_sharp_saturated(monoid)?;
    let so = opts.suite;
    let per_sample = exec::map_range(so.samples, so.mode, |i| chart_sample(monoid, i, opts));
    let mut failures = Vec::new();
    for r in per_sample {
        failures.extend(r?);
    }
    Ok(VerificationReport::new(
        "charts",
        so.parameters(monoid, None, None),
        so.samples,
        failures,
    ))
}

fn chart_sample(monoid: &Arc<AffineMonoid>, i: usize, opts: &ChartOptions) -> Result<Vec<Failure>> {
    let tol = opts.suite.tol;
    let mut rng = sample_rng(opts.suite.seed, i as u64);
    let mut failures = Vec::new();
    let x = CBarPoint::random(monoid, &mut rng)?;
    let face = x.face().generator_indices.clone();
    let mut fail = |input: Value, expected: Value, actual: Value, detail: &str| {
        failures.push(Failure {
            sample: i,
            face: face.clone(),
            input,
            expected,
            actual,
            detail: detail.to_string(),
        })
    };
    let kx = cbar_to_kn(&x);

    let shift = points::random_integral(monoid, 3, &mut rng);
    let y = cplus_act(&CPlusElement::integral(monoid.clone(), &shift)?, &x)?;
    let ky = cbar_to_kn(&y);
    if !ky.approx_eq(&kx, tol) {
        fail(
            json!({"point": x.to_json(), "shift": shift}),
            kx.to_json(),
            ky.to_json(),
            "image changed under an integral translate",
        );
    }

    let canonical = lift(&kx);
    let g = same_orbit_cplus(&x, &canonical)?;
    let integral = g.as_ref().is_some_and(|g| {
        let re_on_face = x.face().restriction.iter().all(|row| {
            let s: f64 = row.iter().zip(g.re()).map(|(&a, b)| a as f64 * b).sum();
            s.abs() <= tol
        });
        re_on_face && g.im().iter().all(|&t| angle_dist(t, 0.0) <= tol)
    });
    if !integral {
        fail(
            json!({"point": x.to_json(), "other": canonical.to_json()}),
            json!("difference in 2πiℤ(P)"),
            g.map_or(Value::Null, |g| g.to_json()),
            "points with equal image do not differ by an integral translate",
        );
    }

    if monoid.rank() > 0 {
        let j = rng.gen_range(0..monoid.rank());
        let t = rng.gen_range(0.1..0.9);
        let mut im = vec![0.0; monoid.rank()];
        im[j] = TAU * t;
        let re = vec![0.0; monoid.rank()];
        let z = cplus_act(&CPlusElement::new(monoid.clone(), &re, &im)?, &x)?;
        if cbar_to_kn(&z).approx_eq(&kx, tol) {
            fail(
                json!({"point": x.to_json(), "coordinate": j, "fraction": points::real(t)}),
                json!("different image"),
                cbar_to_kn(&z).to_json(),
                "non-integral translate left the image unchanged",
            );
        }
    }

    let k = KNPoint::random(monoid, &mut rng)?;
    let mut l = lift(&k);
    if let Some(delta) = opts.perturbation {
        if monoid.rank() > 0 {
            let mut v = l.v().to_vec();
            v[0] += delta;
            l = CBarPoint::new(monoid.clone(), l.face_index(), l.u(), &v)?;
        }
    }
    let kl = cbar_to_kn(&l);
    if !kl.approx_eq(&k, tol) {
        fail(
            k.to_json(),
            k.to_json(),
            kl.to_json(),
            "lift does not map back to the sampled point",
        );
    }

    let via_kn = tau(&kx);
    let direct = exp_point(&x);
    if !via_kn.approx_eq(&direct, tol) {
        fail(
            x.to_json(),
            direct.to_json(),
            via_kn.to_json(),
            "τ ∘ (e^x, e^{iy}) differs from exp",
        );
    }
    Ok(failures)
}
