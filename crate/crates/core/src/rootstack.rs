//! Fibers of the root stacks `ⁿ√𝔸(P) = [𝔸((1/n)P)/μ_n(P)]` over points of
//! `ℂ(P)`, the maps `Φ_n` from the Kato-Nakayama model, and their
//! compatibilities.
//!
//! `(1/n)P` is identified with `P` through `p/n ↦ p`, so a point of
//! `ℂ((1/n)P)` is stored as a [`CPoint`] on `P` and the inclusion
//! `P ⊆ (1/n)P` becomes multiplication by `n` on `P^gp` coordinates.
//! A character of `(1/n)P^gp` trivial on `P^gp` is a vector
//! `c ∈ (ℤ/n)^rank`, acting by `w ↦ e^{2πi⟨c, w⟩/n}`; its values are kept as
//! exact residues.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec;
use crate::intlattice::{self, cokernel, solve_integral, FinAbGroup, IntMatrix};
use crate::kn::require_sharp_saturated;
use crate::monoid::{AffineMonoid, MonoidFace};
use crate::points::{
    self, angle_dist, cplus_act, exp_point, lift, sample_rng, scale, tau, CBarPoint, CPlusElement, CPoint, KNPoint,
};
use crate::report::{Failure, SuiteOptions, VerificationReport};
use crate::vec_ops::IVec;

/// Groups with at most this many elements are enumerated.
pub const MAX_ENUMERATED: u64 = 10_000;

/// An element of `μ_n(P)`: the character `w ↦ e^{2πi⟨c, w⟩/n}` of
/// `(1/n)P^gp`, with `c` reduced into `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MuElement {
    n: u64,
    c: IVec,
}

impl MuElement {
    pub fn identity(n: u64, rank: usize) -> Self {
        MuElement { n, c: vec![0; rank] }
    }

    /// Reduces `c` modulo `n`.
    pub fn new(n: u64, c: &[i64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        let m = i64::try_from(n).map_err(|_| Error::Overflow)?;
        Ok(MuElement {
            n,
            c: c.iter().map(|x| x.rem_euclid(m)).collect(),
        })
    }

    pub fn level(&self) -> u64 {
        self.n
    }

    pub fn coords(&self) -> &[i64] {
        &self.c
    }

    pub fn mul(&self, other: &MuElement) -> Result<MuElement> {
        if self.n != other.n || self.c.len() != other.c.len() {
            return Err(Error::GroupMismatch);
        }
        let sum: Vec<i64> = self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect();
        MuElement::new(self.n, &sum)
    }

    pub fn inverse(&self) -> MuElement {
        let neg: Vec<i64> = self.c.iter().map(|a| -a).collect();
        MuElement::new(self.n, &neg).expect("level is positive")
    }

    /// `t` with value `e^{2πit/n}` at `w ∈ (1/n)P^gp` (given in `P^gp` coordinates).
    pub fn residue_at(&self, w: &[i64]) -> i64 {
        let n = self.n as i128;
        let s: i128 = self
            .c
            .iter()
            .zip(w)
            .map(|(&a, &b)| i128::from(a) * i128::from(b).rem_euclid(n))
            .sum();
        s.rem_euclid(n) as i64
    }

    pub fn value_at(&self, w: &[i64]) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.residue_at(w) as f64 / self.n as f64)
    }
}

/// `μ_n(P)`, the Cartier dual of `coker(P^gp → (1/n)P^gp)`.
#[derive(Clone, Debug)]
pub struct MuN {
    monoid: Arc<AffineMonoid>,
    n: u64,
    pub group: FinAbGroup,
    /// All elements in lexicographic order, when there are at most
    /// [`MAX_ENUMERATED`] of them.
    pub elements: Option<Vec<MuElement>>,
}

fn checked_order(n: u64, rank: usize) -> Option<u64> {
    let mut o: u64 = 1;
    for _ in 0..rank {
        o = o.checked_mul(n)?;
    }
    Some(o)
}

/// Lexicographic enumeration of `{0, …, n−1}^len`.
fn residue_vectors(n: u64, len: usize) -> Vec<IVec> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..n as i64).map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn mu_n(monoid: &Arc<AffineMonoid>, n: u64) -> Result<MuN> {
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    let k = monoid.rank();
    let (_, inclusion) = monoid.kummer_root(n)?;
    let group = cokernel(&inclusion);
    let elements = checked_order(n, k)
        .filter(|&o| o <= MAX_ENUMERATED)
        .map(|_| residue_vectors(n, k).into_iter().map(|c| MuElement { n, c }).collect());
    Ok(MuN {
        monoid: monoid.clone(),
        n,
        group,
        elements,
    })
}

impl MuN {
    pub fn level(&self) -> u64 {
        self.n
    }

    pub fn monoid(&self) -> &Arc<AffineMonoid> {
        &self.monoid
    }

    pub fn order(&self) -> Option<u64> {
        checked_order(self.n, self.monoid.rank())
    }

    pub fn identity(&self) -> MuElement {
        MuElement::identity(self.n, self.monoid.rank())
    }

    pub fn element(&self, c: &[i64]) -> Result<MuElement> {
        if c.len() != self.monoid.rank() {
            return Err(Error::GroupMismatch);
        }
        MuElement::new(self.n, c)
    }

    /// The character by which the `Φ_n` output moves when the `ℂ̄` lift is
    /// translated by `2πi·k'` with `k' ∈ ℤ(P)`.
    pub fn translate_character(&self, k: &[i64]) -> Result<MuElement> {
        self.element(k)
    }

    fn contains(&self, g: &MuElement) -> bool {
        g.n == self.n && g.c.len() == self.monoid.rank()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "rank": self.monoid.rank(),
            "invariant_factors": self.group.invariant_factors.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "order": self.order().map(|o| o.to_string()),
            "enumerated": self.elements.is_some(),
            "elements": self.elements.as_ref().map(|es| es.iter().map(|e| e.c.clone()).collect::<Vec<_>>()),
        })
    }
}

/// A point of `ℂ((1/n)P)` over a point of `ℂ(P)`.
#[derive(Clone, Debug)]
pub struct RootFiberPoint {
    pub n: u64,
    pub point: CPoint,
    pub base: CPoint,
}

/// Restriction of a point of `ℂ((1/n)P)` along `P ⊆ (1/n)P`, i.e. `y ↦ y^n`.
pub fn restrict(point: &CPoint, n: u64) -> CPoint {
    let r = n as f64;
    let modulus: Vec<f64> = point.modulus().iter().map(|a| r * a).collect();
    let angles: Vec<f64> = point.character().angles().iter().map(|a| r * a).collect();
    CPoint::new(point.monoid().clone(), point.face_index(), &modulus, &angles).expect("shapes follow from the point")
}

impl RootFiberPoint {
    pub fn new(n: u64, point: CPoint, base: CPoint) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        if point.monoid() != base.monoid() {
            return Err(Error::MonoidMismatch);
        }
        Ok(RootFiberPoint { n, point, base })
    }

    /// Whether the restriction of `point` agrees with `base` to `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        restrict(&self.point, self.n).approx_eq(&self.base, tol)
    }

    /// Values on the generators of `(1/n)P`, i.e. at `g/n` for generators `g` of `P`.
    pub fn generator_values(&self) -> Result<Vec<Complex64>> {
        self.point.generator_values()
    }

    pub fn to_json(&self) -> Value {
        let values: Vec<Value> = self
            .point
            .generator_values()
            .unwrap_or_default()
            .iter()
            .map(|z| points::reals(&[z.re, z.im]))
            .collect();
        json!({
            "n": self.n,
            "point": self.point.to_json(),
            "base": self.base.to_json(),
            "generator_values": values,
        })
    }
}

/// Stabilizer of the lifts over a point with support `F`: the characters
/// trivial on `(1/n)F^gp`.
#[derive(Clone, Debug)]
pub struct Stabilizer {
    /// `(1/n)P^gp / (P^gp + (1/n)F^gp)`, whose character group is the stabilizer.
    pub dual: FinAbGroup,
    pub elements: Option<Vec<MuElement>>,
}

impl Stabilizer {
    pub fn order(&self) -> Option<u64> {
        self.dual.order().and_then(|o| u64::try_from(o).ok())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "invariant_factors": self.dual.invariant_factors.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "order": self.order().map(|o| o.to_string()),
            "elements": self.elements.as_ref().map(|es| es.iter().map(|e| e.c.clone()).collect::<Vec<_>>()),
        })
    }
}

/// `t` with `g(f_j) = e^{2πit/n}` on each basis vector `f_j` of `(1/n)F^gp`.
fn face_residues(g: &MuElement, f: &MonoidFace) -> Vec<i64> {
    f.restriction.iter().map(|row| g.residue_at(row)).collect()
}

pub fn stabilizer(mu: &MuN, f: &MonoidFace) -> Result<Stabilizer> {
    let k = mu.monoid.rank();
    let n = i64::try_from(mu.n).map_err(|_| Error::Overflow)?;
    let scalar = IntMatrix::scalar(k, n);
    let dual = if f.rank() == 0 {
        cokernel(&scalar)
    } else {
        let at = IntMatrix::from_i64_rows(k, &f.restriction)?.transpose();
        cokernel(&scalar.hstack(&at)?)
    };
    let elements = mu.elements.as_ref().map(|es| {
        es.iter()
            .filter(|g| face_residues(g, f).iter().all(|&t| t == 0))
            .cloned()
            .collect()
    });
    Ok(Stabilizer { dual, elements })
}

/// All lifts of `x` to `ℂ((1/n)P)` together with the common stabilizer.
#[derive(Clone, Debug)]
pub struct RootFiber {
    pub transversal: Vec<RootFiberPoint>,
    pub stabilizer: Stabilizer,
}

impl RootFiber {
    pub fn to_json(&self) -> Value {
        json!({
            "lifts": self.transversal.iter().map(RootFiberPoint::to_json).collect::<Vec<_>>(),
            "orbit_size": self.transversal.len(),
            "stabilizer": self.stabilizer.to_json(),
        })
    }
}

/// The `n^{rank F}` lifts `y` with `y^n = x`: moduli `|x|^{1/n}` and angles
/// `(θ + 2πj)/n` on the `F^gp` basis. For saturated `P` they form one
/// `μ_n(P)`-orbit.
pub fn root_fiber(x: &CPoint, n: u64) -> Result<RootFiber> {
    let mu = mu_n(x.monoid(), n)?;
    let f = x.face();
    let count = checked_order(n, f.rank())
        .filter(|&c| c <= MAX_ENUMERATED)
        .ok_or_else(|| Error::ResourceLimit(format!("more than {MAX_ENUMERATED} lifts")))?;
    let r = n as f64;
    let modulus: Vec<f64> = x.modulus().iter().map(|a| a / r).collect();
    let transversal = residue_vectors(n, f.rank())
        .into_iter()
        .map(|j| {
            let angles: Vec<f64> = x
                .character()
                .angles()
                .iter()
                .zip(&j)
                .map(|(a, &jj)| (a + TAU * jj as f64) / r)
                .collect();
            let y = CPoint::new(x.monoid().clone(), x.face_index(), &modulus, &angles)?;
            RootFiberPoint::new(n, y, x.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert_eq!(transversal.len() as u64, count);
    Ok(RootFiber {
        transversal,
        stabilizer: stabilizer(&mu, f)?,
    })
}

/// `g·y`: the angles on `(1/n)F^gp` are rotated by `g`.
pub fn mu_act(mu: &MuN, g: &MuElement, p: &RootFiberPoint) -> Result<RootFiberPoint> {
    if !mu.contains(g) || p.n != mu.n || **p.point.monoid() != *mu.monoid {
        return Err(Error::GroupMismatch);
    }
    let f = p.point.face();
    let n = mu.n as f64;
    let angles: Vec<f64> = p
        .point
        .character()
        .angles()
        .iter()
        .zip(face_residues(g, f))
        .map(|(a, t)| a + TAU * t as f64 / n)
        .collect();
    let y = CPoint::new(mu.monoid.clone(), p.point.face_index(), p.point.modulus(), &angles)?;
    RootFiberPoint::new(p.n, y, p.base.clone())
}

/// Some `g ∈ μ_n(P)` with `g·a = b`, found by solving for the connecting
/// character rather than enumerating the group.
pub fn same_mu_orbit(mu: &MuN, a: &RootFiberPoint, b: &RootFiberPoint, tol: f64) -> Result<Option<MuElement>> {
    if a.n != mu.n || b.n != mu.n {
        return Err(Error::GroupMismatch);
    }
    let (pa, pb) = (&a.point, &b.point);
    if pa.monoid() != pb.monoid() || **pa.monoid() != *mu.monoid {
        return Err(Error::MonoidMismatch);
    }
    if pa.face_index() != pb.face_index() {
        return Ok(None);
    }
    let close = pa
        .modulus()
        .iter()
        .zip(pb.modulus())
        .all(|(&x, &y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0));
    if !close {
        return Ok(None);
    }
    let n = mu.n as f64;
    let mut t = Vec::with_capacity(pa.modulus().len());
    for (&x, &y) in pa.character().angles().iter().zip(pb.character().angles()) {
        let steps = ((y - x) * n / TAU).round();
        if angle_dist(x + TAU * steps / n, y) > tol {
            return Ok(None);
        }
        t.push(steps as i64);
    }
    let f = pa.face();
    let k = mu.monoid.rank();
    if f.rank() == 0 {
        return Ok(Some(mu.identity()));
    }
    let ni = i64::try_from(mu.n).map_err(|_| Error::Overflow)?;
    let system = IntMatrix::from_i64_rows(k, &f.restriction)?.hstack(&IntMatrix::scalar(f.rank(), ni))?;
    Ok(match solve_integral(&system, &intlattice::big_vec(&t))? {
        Some(sol) => Some(mu.element(&intlattice::small_vec(&sol[..k])?)?),
        None => None,
    })
}

/// `y ↦ y^{m/n}`: restriction of a level-`m` point along `(1/n)P ⊆ (1/m)P`.
pub fn tower_project(p: &RootFiberPoint, n: u64) -> Result<RootFiberPoint> {
    let m = p.n;
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    if !m.is_multiple_of(n) {
        return Err(Error::NonDivisor { n, m });
    }
    let point = restrict(&p.point, m / n);
    RootFiberPoint::new(n, point, p.base.clone())
}

/// `exp ∘ φ_{1/n}` applied to a `ℂ̄(P)` point, read on `(1/n)P`.
pub fn root_from_lift(l: &CBarPoint, n: u64) -> Result<RootFiberPoint> {
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    let y = exp_point(&scale(l, 1.0 / n as f64)?);
    RootFiberPoint::new(n, y, exp_point(l))
}

/// `Φ_n(k)` with its ambiguity certificate.
#[derive(Clone, Debug)]
pub struct PhiResult {
    pub point: RootFiberPoint,
    /// Characters fixing the output; together with the translate rule this
    /// describes everything the choice of lift can change.
    pub stabilizer: Stabilizer,
}

impl PhiResult {
    pub fn to_json(&self) -> Value {
        json!({
            "point": self.point.to_json(),
            "certificate": {
                "stabilizer": self.stabilizer.to_json(),
                "lift_translate": "replacing v by v + 2πk' moves the point by the character with coordinates k' mod n",
            },
        })
    }
}

/// `Φ_n(k) = e^{(u+iv)/n}` on the canonical lift (`v` with angles in `[0, 2π)`).
pub fn phi_n(k: &KNPoint, n: u64) -> Result<PhiResult> {
    let mu = mu_n(k.monoid(), n)?;
    let mut point = root_from_lift(&lift(k), n)?;
    point.base = tau(k);
    Ok(PhiResult {
        stabilizer: stabilizer(&mu, k.face())?,
        point,
    })
}

fn translated_lift(k: &KNPoint, shift: &[i64]) -> Result<CBarPoint> {
    cplus_act(&CPlusElement::integral(k.monoid().clone(), shift)?, &lift(k))
}

fn collect_failures(per_sample: Vec<Result<Vec<Failure>>>) -> Result<Vec<Failure>> {
    let mut failures = Vec::new();
    for r in per_sample {
        failures.extend(r?);
    }
    Ok(failures)
}

fn failure(i: usize, face: &MonoidFace, input: Value, expected: Value, actual: Value, detail: &str) -> Failure {
    Failure {
        sample: i,
        face: face.generator_indices.clone(),
        input,
        expected,
        actual,
        detail: detail.to_string(),
    }
}

fn values_json(vs: &[Complex64]) -> Value {
    Value::Array(vs.iter().map(|z| points::reals(&[z.re, z.im])).collect())
}

/// `exp = (·)^n ∘ f_n` on random `ℂ̄(P)` points, for both `f_n(x)` and
/// `Φ_n` of the image in the Kato-Nakayama model.
pub fn verify_factorization(monoid: &Arc<AffineMonoid>, n: u64, opts: &SuiteOptions) -> Result<VerificationReport> {
    require_sharp_saturated(monoid)?;
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    let power = u32::try_from(n).map_err(|_| Error::Overflow)?;
    let per_sample = exec::map_range(opts.samples, opts.mode, |i| -> Result<Vec<Failure>> {
        let mut rng = sample_rng(opts.seed, i as u64);
        let x = CBarPoint::random(monoid, &mut rng)?;
        let expected = exp_point(&x).generator_values()?;
        let via_f = root_from_lift(&x, n)?.generator_values()?;
        let via_phi = phi_n(&points::cbar_to_kn(&x), n)?.point.generator_values()?;
        let mut out = Vec::new();
        for (label, vals) in [("f_n", via_f), ("phi_n", via_phi)] {
            let powered: Vec<Complex64> = vals.iter().map(|z| z.powu(power)).collect();
            let ok = powered
                .iter()
                .zip(&expected)
                .all(|(a, b)| (a - b).norm() <= opts.tol * b.norm().max(1.0));
            if !ok {
                out.push(failure(
                    i,
                    x.face(),
                    x.to_json(),
                    values_json(&expected),
                    values_json(&powered),
                    &format!("n-th power of {label} differs from exp"),
                ));
            }
        }
        Ok(out)
    });
    let failures = collect_failures(per_sample)?;
    Ok(VerificationReport::new(
        "factorization",
        opts.parameters(monoid, Some(n), None),
        opts.samples,
        failures,
    ))
}

/// Lifts translated by this many random elements of `ℤ(P)` in the
/// well-definedness check of `Φ_n`.
pub const TRANSLATES: usize = 10;

/// For `n | m`: `tower_project(Φ_m(k))` lies in the `μ_n`-orbit of `Φ_n(k)`,
/// computed from a randomly translated lift, and `Φ_n` is independent of the
/// lift up to `μ_n`.
pub fn verify_tower(monoid: &Arc<AffineMonoid>, n: u64, m: u64, opts: &SuiteOptions) -> Result<VerificationReport> {
    require_sharp_saturated(monoid)?;
    if n == 0 || m == 0 {
        return Err(Error::ZeroLevel);
    }
    if !m.is_multiple_of(n) {
        return Err(Error::NonDivisor { n, m });
    }
    let mu = mu_n(monoid, n)?;
    let per_sample = exec::map_range(opts.samples, opts.mode, |i| -> Result<Vec<Failure>> {
        let mut rng = sample_rng(opts.seed, i as u64);
        let k = KNPoint::random(monoid, &mut rng)?;
        let mut out = Vec::new();
        let reference = phi_n(&k, n)?.point;
        let shift = points::random_integral(monoid, 3, &mut rng);
        let high = root_from_lift(&translated_lift(&k, &shift)?, m)?;
        let projected = tower_project(&high, n)?;
        if same_mu_orbit(&mu, &reference, &projected, opts.tol)?.is_none() {
            out.push(failure(
                i,
                k.face(),
                json!({"point": k.to_json(), "shift": shift}),
                reference.to_json(),
                projected.to_json(),
                "projection of the level-m point is not in the orbit of the level-n point",
            ));
        }
        if !projected.base.approx_eq(&tau(&k), opts.tol) {
            out.push(failure(
                i,
                k.face(),
                k.to_json(),
                tau(&k).to_json(),
                projected.base.to_json(),
                "projection lies over the wrong base point",
            ));
        }
        for _ in 0..TRANSLATES {
            let shift = points::random_integral(monoid, 3, &mut rng);
            let other = root_from_lift(&translated_lift(&k, &shift)?, n)?;
            let expected = mu_act(&mu, &mu.translate_character(&shift)?, &reference)?;
            let moved_as_predicted =
                same_mu_orbit(&mu, &expected, &other, opts.tol)?.is_some_and(|g| stabilizer_contains(k.face(), &g));
            if !moved_as_predicted {
                out.push(failure(
                    i,
                    k.face(),
                    json!({"point": k.to_json(), "shift": shift}),
                    expected.to_json(),
                    other.to_json(),
                    "translating the lift did not act by the predicted character",
                ));
            }
        }
        Ok(out)
    });
    let failures = collect_failures(per_sample)?;
    Ok(VerificationReport::new(
        "tower",
        opts.parameters(monoid, Some(n), Some(m)),
        opts.samples,
        failures,
    ))
}

fn stabilizer_contains(f: &MonoidFace, g: &MuElement) -> bool {
    face_residues(g, f).iter().all(|&t| t == 0)
}

/// Options for [`verify_cube`]; `wrong_root` replaces `φ_{1/n}` by
/// `φ_{1/(n+1)}` as a negative control.
#[derive(Clone, Copy, Debug, Default)]
pub struct CubeOptions {
    pub suite: SuiteOptions,
    pub wrong_root: bool,
}

/// Route (1): lift to `ℂ̄(P)` (randomly translated), scale by `1/n`, exp.
/// Route (2): `Φ_n`. The two must agree up to `μ_n(P)` and both must lie over
/// `τ(k)`.
pub fn verify_cube(monoid: &Arc<AffineMonoid>, n: u64, opts: &CubeOptions) -> Result<VerificationReport> {
    require_sharp_saturated(monoid)?;
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    let so = opts.suite;
    let mu = mu_n(monoid, n)?;
    let factor = if opts.wrong_root {
        1.0 / (n + 1) as f64
    } else {
        1.0 / n as f64
    };
    let per_sample = exec::map_range(so.samples, so.mode, |i| -> Result<Vec<Failure>> {
        let mut rng = sample_rng(so.seed, i as u64);
        let k = KNPoint::random(monoid, &mut rng)?;
        let shift = points::random_integral(monoid, 3, &mut rng);
        let l = translated_lift(&k, &shift)?;
        let route1 = RootFiberPoint::new(n, exp_point(&scale(&l, factor)?), tau(&k))?;
        let route2 = phi_n(&k, n)?.point;
        let mut out = Vec::new();
        if same_mu_orbit(&mu, &route2, &route1, so.tol)?.is_none() {
            out.push(failure(
                i,
                k.face(),
                json!({"point": k.to_json(), "shift": shift}),
                route2.to_json(),
                route1.to_json(),
                "the two routes give different μ_n-orbits",
            ));
        }
        let base = tau(&k);
        for (label, p) in [("route 1", &route1), ("route 2", &route2)] {
            let down = tower_project(p, 1)?.point;
            if !down.approx_eq(&base, so.tol) {
                out.push(failure(
                    i,
                    k.face(),
                    k.to_json(),
                    base.to_json(),
                    down.to_json(),
                    &format!("{label} does not lie over τ(k)"),
                ));
            }
        }
        Ok(out)
    });
    let failures = collect_failures(per_sample)?;
    Ok(VerificationReport::new(
        "cube",
        so.parameters(monoid, Some(n), None),
        so.samples,
        failures,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn nat() -> Arc<AffineMonoid> {
        Arc::new(AffineMonoid::free(1))
    }

    fn point(m: &Arc<AffineMonoid>, face: usize, modulus: &[f64], angles: &[f64]) -> CPoint {
        CPoint::new(m.clone(), face, modulus, angles).unwrap()
    }

    fn value(p: &RootFiberPoint) -> Complex64 {
        p.generator_values().unwrap()[0]
    }

    fn near(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12 * b.norm().max(1.0)
    }

    #[test]
    fn mu_n_examples() {
        let g = mu_n(&Arc::new(AffineMonoid::free(3)), 4).unwrap();
        assert_eq!(g.group.invariant_factors.len(), 3);
        assert_eq!(g.elements.as_ref().unwrap().len(), 64);
        let g = mu_n(&Arc::new(AffineMonoid::a1()), 2).unwrap();
        assert_eq!(g.group.invariant_factors, intlattice::big_vec(&[2, 2]));
        let g = mu_n(&Arc::new(AffineMonoid::a1()), 1).unwrap();
        assert!(g.group.is_trivial());
        assert_eq!(g.elements.unwrap(), vec![MuElement::identity(1, 2)]);
        let big = mu_n(&Arc::new(AffineMonoid::free(3)), 30).unwrap();
        assert!(big.elements.is_none());
        assert_eq!(mu_n(&nat(), 0).unwrap_err(), Error::ZeroLevel);
    }

    #[test]
    fn square_roots_of_four() {
        let m = nat();
        let x = point(&m, 1, &[4f64.ln()], &[0.0]);
        let fib = root_fiber(&x, 2).unwrap();
        let mut vals: Vec<f64> = fib.transversal.iter().map(|p| value(p).re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + 2.0).abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
        assert_eq!(fib.stabilizer.order(), Some(1));
        assert!(fib.transversal.iter().all(|p| p.is_consistent(1e-12)));
    }

    #[test]
    fn root_over_zero() {
        let m = nat();
        let x = point(&m, 0, &[], &[]);
        let fib = root_fiber(&x, 2).unwrap();
        assert_eq!(fib.transversal.len(), 1);
        assert_eq!(value(&fib.transversal[0]), Complex64::new(0.0, 0.0));
        assert_eq!(fib.stabilizer.order(), Some(2));
        assert_eq!(fib.stabilizer.elements.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn boundary_point_of_n2() {
        let m = Arc::new(AffineMonoid::free(2));
        let f = m.face_by_generators(&[1]).unwrap().index;
        let x = point(&m, f, &[0.0], &[0.0]);
        let fib = root_fiber(&x, 2).unwrap();
        assert_eq!(fib.transversal.len(), 2);
        assert_eq!(fib.stabilizer.order(), Some(2));
        let mu = mu_n(&m, 2).unwrap();
        for g in fib.stabilizer.elements.as_ref().unwrap() {
            let moved = mu_act(&mu, g, &fib.transversal[1]).unwrap();
            assert!(moved.point.approx_eq(&fib.transversal[1].point, 1e-12));
        }
    }

    #[test]
    fn mu_action_examples() {
        let m = nat();
        let mu = mu_n(&m, 2).unwrap();
        let x = point(&m, 1, &[4f64.ln()], &[0.0]);
        let two = RootFiberPoint::new(2, point(&m, 1, &[2f64.ln()], &[0.0]), x).unwrap();
        let same = mu_act(&mu, &mu.identity(), &two).unwrap();
        assert!(same.point.approx_eq(&two.point, 0.0));
        let minus = mu_act(&mu, &mu.element(&[1]).unwrap(), &two).unwrap();
        assert!(near(value(&minus), Complex64::new(-2.0, 0.0)));
        let other = mu_n(&m, 3).unwrap();
        assert_eq!(
            mu_act(&other, &other.identity(), &two).unwrap_err(),
            Error::GroupMismatch
        );
    }

    #[test]
    fn phi_examples() {
        let m = nat();
        let k = KNPoint::new(m.clone(), 1, &[4f64.ln()], &[0.0]).unwrap();
        let phi = phi_n(&k, 2).unwrap();
        assert!(near(value(&phi.point), Complex64::new(2.0, 0.0)));
        assert_eq!(phi.stabilizer.order(), Some(1));

        let zero = KNPoint::new(m.clone(), 0, &[], &[1.0]).unwrap();
        let phi0 = phi_n(&zero, 2).unwrap();
        assert_eq!(value(&phi0.point), Complex64::new(0.0, 0.0));
        assert_eq!(phi0.stabilizer.order(), Some(2));

        let moved = root_from_lift(&translated_lift(&k, &[1]).unwrap(), 2).unwrap();
        assert!(near(value(&moved), Complex64::new(-2.0, 0.0)));
        let mu = mu_n(&m, 2).unwrap();
        let g = same_mu_orbit(&mu, &phi.point, &moved, 1e-9).unwrap().unwrap();
        assert_eq!(g, mu.element(&[1]).unwrap());
    }

    #[test]
    fn tower_examples() {
        let m = nat();
        let x = point(&m, 1, &[16f64.ln()], &[PI]);
        let z = root_fiber(&x, 4).unwrap().transversal[1].clone();
        assert!(tower_project(&z, 4).unwrap().point.approx_eq(&z.point, 0.0));
        let sq = tower_project(&z, 2).unwrap();
        assert!(near(value(&sq), value(&z) * value(&z)));
        assert!(sq.is_consistent(1e-12));
        assert_eq!(tower_project(&z, 3).unwrap_err(), Error::NonDivisor { n: 3, m: 4 });
    }

    #[test]
    fn orbit_solver_rejects_non_orbit_points() {
        let m = Arc::new(AffineMonoid::a1());
        let mu = mu_n(&m, 3).unwrap();
        let full = m.full_face().unwrap().index;
        let x = point(&m, full, &[0.1, 0.2], &[0.3, 0.4]);
        let fib = root_fiber(&x, 3).unwrap();
        assert_eq!(fib.transversal.len(), 9);
        for p in &fib.transversal {
            let g = same_mu_orbit(&mu, &fib.transversal[0], p, 1e-9).unwrap().unwrap();
            let moved = mu_act(&mu, &g, &fib.transversal[0]).unwrap();
            assert!(moved.point.approx_eq(&p.point, 1e-9));
        }
        let off = RootFiberPoint::new(3, point(&m, full, &[0.1 / 3.0, 0.2 / 3.0], &[0.3, 0.4]), x).unwrap();
        assert!(same_mu_orbit(&mu, &fib.transversal[0], &off, 1e-9).unwrap().is_none());
    }

    #[test]
    fn suites_pass_on_small_monoids() {
        let opts = SuiteOptions {
            samples: 30,
            ..SuiteOptions::default()
        };
        for m in [AffineMonoid::free(1), AffineMonoid::a1()] {
            let m = Arc::new(m);
            assert!(verify_factorization(&m, 3, &opts).unwrap().passed);
            let r = verify_tower(&m, 2, 6, &opts).unwrap();
            assert!(r.passed, "{:?}", r.failures);
            let cube = CubeOptions {
                suite: opts,
                wrong_root: false,
            };
            let r = verify_cube(&m, 3, &cube).unwrap();
            assert!(r.passed, "{:?}", r.failures);
        }
    }

    #[test]
    fn cube_negative_control_flags_full_support() {
        let m = Arc::new(AffineMonoid::a1());
        let opts = CubeOptions {
            suite: SuiteOptions {
                samples: 40,
                ..SuiteOptions::default()
            },
            wrong_root: true,
        };
        let r = verify_cube(&m, 2, &opts).unwrap();
        assert!(!r.passed);
        let full = m.full_face().unwrap().generator_indices.clone();
        for i in 0..40 {
            let k = KNPoint::random(&m, &mut sample_rng(0, i as u64)).unwrap();
            if k.face().generator_indices == full {
                assert!(r.failures.iter().any(|f| f.sample == i));
            }
        }
    }
}
