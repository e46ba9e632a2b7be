//! Points of the local models `ℂ(P)`, `ℂ̄(P)` and `(ℝ≥0 × S¹)(P)`, the
//! `ℂ⁺(P)`-action, exponential maps and real scaling.
//!
//! A point is stored as a support face `F` together with real homs on HNF
//! bases: logs of moduli on `F^gp`, angles on `F^gp` or `P^gp`. Generators
//! off the support face evaluate to `0` (resp. `−∞` in the first coordinate
//! of `ℂ̄`), which is never stored numerically.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::intlattice::{self, solve_integral, IntMatrix, Sublattice};
use crate::monoid::{AffineMonoid, MonoidFace};
use crate::vec_ops::IVec;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Significant digits written for reals in JSON output.
pub const JSON_PRECISION: usize = 17;

/// Reduces an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn dot(c: &[i64], x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()
}

/// `rows · x` for an integer matrix given by rows.
fn mat_vec(rows: &[IVec], x: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| dot(r, x)).collect()
}

/// Seeded generator for sample `index`; streams make samples independent of
/// evaluation order.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_finite(what: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidPoint(format!("{what} must be finite")))
    }
}

fn check_len(what: &str, xs: &[f64], want: usize) -> Result<()> {
    if xs.len() == want {
        Ok(())
    } else {
        Err(Error::InvalidPoint(format!(
            "{what} has length {}, expected {want}",
            xs.len()
        )))
    }
}

fn check_monoid(a: &Arc<AffineMonoid>, b: &Arc<AffineMonoid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::MonoidMismatch)
    }
}

/// A hom `L → S¹` on a lattice, given by angles on its HNF basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Character {
    lattice: Sublattice,
    angles: Vec<f64>,
}

impl Character {
    pub fn new(lattice: Sublattice, angles: &[f64]) -> Result<Self> {
        check_len("character", angles, lattice.rank())?;
        check_finite("character angles", angles)?;
        Ok(Character {
            lattice,
            angles: angles.iter().map(|&a| normalize_angle(a)).collect(),
        })
    }

    pub fn trivial(lattice: Sublattice) -> Self {
        let angles = vec![0.0; lattice.rank()];
        Character { lattice, angles }
    }

    pub fn lattice(&self) -> &Sublattice {
        &self.lattice
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Angle of the value at the lattice vector with basis coordinates `c`.
    pub fn angle_at(&self, c: &[i64]) -> f64 {
        normalize_angle(dot(c, &self.angles))
    }

    pub fn approx_eq(&self, other: &Character, tol: f64) -> bool {
        self.lattice == other.lattice
            && self
                .angles
                .iter()
                .zip(&other.angles)
                .all(|(&a, &b)| angle_dist(a, b) <= tol)
    }
}

/// A point of `ℂ(P) = Hom(P, ℂ)`.
#[derive(Clone, Debug)]
pub struct CPoint {
    monoid: Arc<AffineMonoid>,
    face: usize,
    modulus: Vec<f64>,
    character: Character,
}

/// A point of `ℂ̄(P) = Hom(P, ℂ̄)` with `ℂ̄ = ({−∞} ∪ ℝ) × ℝ`.
#[derive(Clone, Debug)]
pub struct CBarPoint {
    monoid: Arc<AffineMonoid>,
    face: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

/// A point of `Hom(P, ℝ≥0 × S¹)`: a modulus supported on a face and an
/// argument defined on all of `P^gp`.
#[derive(Clone, Debug)]
pub struct KNPoint {
    monoid: Arc<AffineMonoid>,
    face: usize,
    log_modulus: Vec<f64>,
    sigma: Character,
}

/// An element of `ℂ⁺(P) = Hom(P^gp, ℂ)`.
#[derive(Clone, Debug)]
pub struct CPlusElement {
    monoid: Arc<AffineMonoid>,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn face_of(monoid: &AffineMonoid, face: usize) -> Result<&MonoidFace> {
    monoid.face(face)
}

impl CPoint {
    /// Point with support `face`, `log|x|` and `arg x` given on the `F^gp` basis.
    pub fn new(monoid: Arc<AffineMonoid>, face: usize, modulus: &[f64], angles: &[f64]) -> Result<Self> {
        let f = face_of(&monoid, face)?;
        check_len("modulus", modulus, f.rank())?;
        check_finite("modulus", modulus)?;
        let character = Character::new(f.gp.clone(), angles)?;
        Ok(CPoint {
            monoid,
            face,
            modulus: modulus.to_vec(),
            character,
        })
    }

    /// Point given by its values on the generators. The nonzero generators
    /// must span a face and the values must be multiplicative up to `tol`.
    pub fn from_generator_values(monoid: Arc<AffineMonoid>, values: &[Complex64], tol: f64) -> Result<Self> {
        check_len_c(values, monoid.generators().len())?;
        let support: Vec<usize> = (0..values.len())
            .filter(|&i| values[i] != Complex64::new(0.0, 0.0))
            .collect();
        let face = monoid.face_by_generators(&support)?.index;
        let f = monoid.face(face)?;
        let combo = basis_combination(&monoid, f)?;
        let logs: Vec<f64> = support.iter().map(|&i| values[i].norm().ln()).collect();
        let args: Vec<f64> = support.iter().map(|&i| values[i].arg()).collect();
        let modulus = mat_vec(&combo, &logs);
        let angles = mat_vec(&combo, &args);
        let x = CPoint::new(monoid, face, &modulus, &angles)?;
        let recomputed = x.generator_values()?;
        for (i, (a, b)) in recomputed.iter().zip(values).enumerate() {
            if (a - b).norm() > tol * b.norm().max(1.0) {
                return Err(Error::InvalidPoint(format!(
                    "values are not multiplicative: generator {i} should be {a} but is {b}"
                )));
            }
        }
        Ok(x)
    }

    pub fn monoid(&self) -> &Arc<AffineMonoid> {
        &self.monoid
    }

    pub fn face(&self) -> &MonoidFace {
        face_of(&self.monoid, self.face).expect("face index checked at construction")
    }

    pub fn face_index(&self) -> usize {
        self.face
    }

    pub fn modulus(&self) -> &[f64] {
        &self.modulus
    }

    pub fn character(&self) -> &Character {
        &self.character
    }

    /// Value at the element with `F^gp` coordinates `c`.
    pub fn value_at_face_coords(&self, c: &[i64]) -> Complex64 {
        Complex64::from_polar(dot(c, &self.modulus).exp(), self.character.angle_at(c))
    }

    /// Values at the generators of `P`, in generator order.
    pub fn generator_values(&self) -> Result<Vec<Complex64>> {
        let coords = self.monoid.generator_coords()?;
        let f = self.face();
        Ok(coords
            .iter()
            .map(|c| match f.coords_in_face(c) {
                Some(w) => self.value_at_face_coords(&w),
                None => Complex64::new(0.0, 0.0),
            })
            .collect())
    }

    /// Same face, moduli within relative `tol`, angles within `tol`.
    pub fn approx_eq(&self, other: &CPoint, tol: f64) -> bool {
        *self.monoid == *other.monoid
            && self.face == other.face
            && self.modulus.iter().zip(&other.modulus).all(|(&a, &b)| close(a, b, tol))
            && self.character.approx_eq(&other.character, tol)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "face": self.face().generator_indices,
            "modulus": reals(&self.modulus),
            "angles": reals(self.character.angles()),
            "precision": JSON_PRECISION,
        })
    }

    /// Accepts `{face, modulus, angles}` or `{values: [[re, im], …]}`.
    pub fn from_json(monoid: Arc<AffineMonoid>, v: &Value, tol: f64) -> Result<Self> {
        check_json_monoid(&monoid, v)?;
        if let Some(vals) = v.get("values") {
            let values = parse_pairs(vals)?
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect::<Vec<_>>();
            return CPoint::from_generator_values(monoid, &values, tol);
        }
        let face = parse_face(&monoid, v)?;
        let modulus = parse_reals(field(v, "modulus")?)?;
        let angles = parse_reals(field(v, "angles")?)?;
        CPoint::new(monoid, face, &modulus, &angles)
    }
}

fn check_len_c(values: &[Complex64], want: usize) -> Result<()> {
    if values.len() == want {
        Ok(())
    } else {
        Err(Error::InvalidPoint(format!(
            "expected {want} generator values, got {}",
            values.len()
        )))
    }
}

/// Integer matrix `C` with `C · W = I`, where the rows of `W` are the `F^gp`
/// coordinates of the generators on `F`. Row `i` writes the i-th basis vector
/// of `F^gp` as an integer combination of those generators.
fn basis_combination(monoid: &AffineMonoid, f: &MonoidFace) -> Result<Vec<IVec>> {
    let coords = monoid.generator_coords()?;
    let w: Vec<IVec> = f
        .generator_indices
        .iter()
        .map(|&i| f.coords_in_face(&coords[i]).expect("face generators lie in F^gp"))
        .collect();
    let rank = f.rank();
    if rank == 0 {
        return Ok(Vec::new());
    }
    let wt = IntMatrix::from_i64_rows(rank, &w)?.transpose();
    (0..rank)
        .map(|i| {
            let e: Vec<i64> = (0..rank).map(|j| i64::from(i == j)).collect();
            let x = solve_integral(&wt, &intlattice::big_vec(&e))?.expect("face generators span F^gp");
            intlattice::small_vec(&x)
        })
        .collect()
}

impl CBarPoint {
    /// Point with support `face`, `u` on the `F^gp` basis and `v` on the
    /// `P^gp` basis.
    pub fn new(monoid: Arc<AffineMonoid>, face: usize, u: &[f64], v: &[f64]) -> Result<Self> {
        let f = face_of(&monoid, face)?;
        check_len("u", u, f.rank())?;
        check_len("v", v, monoid.rank())?;
        check_finite("u", u)?;
        check_finite("v", v)?;
        Ok(CBarPoint {
            monoid,
            face,
            u: u.to_vec(),
            v: v.to_vec(),
        })
    }

    pub fn monoid(&self) -> &Arc<AffineMonoid> {
        &self.monoid
    }

    pub fn face(&self) -> &MonoidFace {
        face_of(&self.monoid, self.face).expect("face index checked at construction")
    }

    pub fn face_index(&self) -> usize {
        self.face
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Uniform face, `u ∈ [−2, 2]`, `v ∈ [−10, 10]` coordinatewise.
    pub fn random(monoid: &Arc<AffineMonoid>, rng: &mut impl Rng) -> Result<Self> {
        let faces = monoid.faces()?;
        let face = rng.gen_range(0..faces.len());
        let u: Vec<f64> = (0..faces[face].rank()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..monoid.rank()).map(|_| rng.gen_range(-10.0..10.0)).collect();
        CBarPoint::new(monoid.clone(), face, &u, &v)
    }

    pub fn approx_eq(&self, other: &CBarPoint, tol: f64) -> bool {
        *self.monoid == *other.monoid
            && self.face == other.face
            && self.u.iter().zip(&other.u).all(|(&a, &b)| close(a, b, tol))
            && self.v.iter().zip(&other.v).all(|(&a, &b)| close(a, b, tol))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "face": self.face().generator_indices,
            "u": reals(&self.u),
            "v": reals(&self.v),
            "precision": JSON_PRECISION,
        })
    }

    pub fn from_json(monoid: Arc<AffineMonoid>, v: &Value) -> Result<Self> {
        check_json_monoid(&monoid, v)?;
        let face = parse_face(&monoid, v)?;
        let u = parse_reals(field(v, "u")?)?;
        let vv = parse_reals(field(v, "v")?)?;
        CBarPoint::new(monoid, face, &u, &vv)
    }
}

impl KNPoint {
    /// Point with support `face`, `log ρ` on the `F^gp` basis and `σ` as
    /// angles on the `P^gp` basis.
    pub fn new(monoid: Arc<AffineMonoid>, face: usize, log_modulus: &[f64], sigma: &[f64]) -> Result<Self> {
        let f = face_of(&monoid, face)?;
        check_len("log_modulus", log_modulus, f.rank())?;
        check_finite("log_modulus", log_modulus)?;
        let sigma = Character::new(monoid.groupification().clone(), sigma)?;
        Ok(KNPoint {
            monoid,
            face,
            log_modulus: log_modulus.to_vec(),
            sigma,
        })
    }

    /// Point given by `(ρ, angle)` on each generator; `ρ = 0` off the support.
    pub fn from_generator_polar(monoid: Arc<AffineMonoid>, polar: &[(f64, f64)], tol: f64) -> Result<Self> {
        if polar.len() != monoid.generators().len() {
            return Err(Error::InvalidPoint(format!(
                "expected {} generator values, got {}",
                monoid.generators().len(),
                polar.len()
            )));
        }
        if polar
            .iter()
            .any(|&(r, a)| !(r >= 0.0 && r.is_finite() && a.is_finite()))
        {
            return Err(Error::InvalidPoint("moduli must be finite and nonnegative".into()));
        }
        let support: Vec<usize> = (0..polar.len()).filter(|&i| polar[i].0 > 0.0).collect();
        let face = monoid.face_by_generators(&support)?.index;
        let f = monoid.face(face)?;
        let logs: Vec<f64> = support.iter().map(|&i| polar[i].0.ln()).collect();
        let log_modulus = mat_vec(&basis_combination(&monoid, f)?, &logs);
        let full = monoid.full_face()?;
        let args: Vec<f64> = polar.iter().map(|&(_, a)| a).collect();
        let sigma = mat_vec(&basis_combination(&monoid, full)?, &args);
        let k = KNPoint::new(monoid.clone(), face, &log_modulus, &sigma)?;
        let coords = monoid.generator_coords()?;
        for (i, c) in coords.iter().enumerate() {
            let (r, a) = polar[i];
            let angle_ok = angle_dist(k.sigma.angle_at(c), a) <= tol;
            let modulus_ok = match f.coords_in_face(c) {
                Some(w) => close(dot(&w, &k.log_modulus).exp(), r, tol),
                None => r == 0.0,
            };
            if !(angle_ok && modulus_ok) {
                return Err(Error::InvalidPoint(format!(
                    "values are not multiplicative at generator {i}"
                )));
            }
        }
        Ok(k)
    }

    pub fn monoid(&self) -> &Arc<AffineMonoid> {
        &self.monoid
    }

    pub fn face(&self) -> &MonoidFace {
        face_of(&self.monoid, self.face).expect("face index checked at construction")
    }

    pub fn face_index(&self) -> usize {
        self.face
    }

    pub fn log_modulus(&self) -> &[f64] {
        &self.log_modulus
    }

    pub fn sigma(&self) -> &Character {
        &self.sigma
    }

    /// Uniform face, `log ρ ∈ [−2, 2]`, `σ ∈ [0, 2π)` coordinatewise.
    pub fn random(monoid: &Arc<AffineMonoid>, rng: &mut impl Rng) -> Result<Self> {
        let faces = monoid.faces()?;
        let face = rng.gen_range(0..faces.len());
        let lm: Vec<f64> = (0..faces[face].rank()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let sigma: Vec<f64> = (0..monoid.rank()).map(|_| rng.gen_range(0.0..TAU)).collect();
        KNPoint::new(monoid.clone(), face, &lm, &sigma)
    }

    pub fn approx_eq(&self, other: &KNPoint, tol: f64) -> bool {
        *self.monoid == *other.monoid
            && self.face == other.face
            && self
                .log_modulus
                .iter()
                .zip(&other.log_modulus)
                .all(|(&a, &b)| close(a, b, tol))
            && self.sigma.approx_eq(&other.sigma, tol)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "face": self.face().generator_indices,
            "log_modulus": reals(&self.log_modulus),
            "sigma": reals(self.sigma.angles()),
            "precision": JSON_PRECISION,
        })
    }

    /// Accepts `{face, log_modulus, sigma}` or `{polar: [[ρ, angle], …]}`.
    pub fn from_json(monoid: Arc<AffineMonoid>, v: &Value, tol: f64) -> Result<Self> {
        check_json_monoid(&monoid, v)?;
        if let Some(p) = v.get("polar") {
            return KNPoint::from_generator_polar(monoid, &parse_pairs(p)?, tol);
        }
        let face = parse_face(&monoid, v)?;
        let lm = parse_reals(field(v, "log_modulus")?)?;
        let sigma = parse_reals(field(v, "sigma")?)?;
        KNPoint::new(monoid, face, &lm, &sigma)
    }
}

impl CPlusElement {
    pub fn new(monoid: Arc<AffineMonoid>, re: &[f64], im: &[f64]) -> Result<Self> {
        check_len("re", re, monoid.rank())?;
        check_len("im", im, monoid.rank())?;
        check_finite("re", re)?;
        check_finite("im", im)?;
        Ok(CPlusElement {
            monoid,
            re: re.to_vec(),
            im: im.to_vec(),
        })
    }

    pub fn zero(monoid: Arc<AffineMonoid>) -> Self {
        let k = monoid.rank();
        CPlusElement {
            monoid,
            re: vec![0.0; k],
            im: vec![0.0; k],
        }
    }

    /// `2πi·k` for `k ∈ ℤ(P) = Hom(P^gp, ℤ)` given on the `P^gp` basis.
    pub fn integral(monoid: Arc<AffineMonoid>, k: &[i64]) -> Result<Self> {
        let im: Vec<f64> = k.iter().map(|&x| TAU * x as f64).collect();
        let re = vec![0.0; im.len()];
        CPlusElement::new(monoid, &re, &im)
    }

    pub fn random(monoid: &Arc<AffineMonoid>, rng: &mut impl Rng) -> Self {
        let k = monoid.rank();
        let re: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let im: Vec<f64> = (0..k).map(|_| rng.gen_range(-10.0..10.0)).collect();
        CPlusElement {
            monoid: monoid.clone(),
            re,
            im,
        }
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn scaled(&self, r: f64) -> Self {
        CPlusElement {
            monoid: self.monoid.clone(),
            re: self.re.iter().map(|x| r * x).collect(),
            im: self.im.iter().map(|x| r * x).collect(),
        }
    }

    pub fn approx_eq(&self, other: &CPlusElement, tol: f64) -> bool {
        *self.monoid == *other.monoid
            && self.re.iter().zip(&other.re).all(|(&a, &b)| close(a, b, tol))
            && self.im.iter().zip(&other.im).all(|(&a, &b)| close(a, b, tol))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "re": reals(&self.re),
            "im": reals(&self.im),
            "precision": JSON_PRECISION,
        })
    }
}

/// Coordinates of `p ∈ P` in the `P^gp` basis, or `NotInMonoid`.
fn element_coords(monoid: &AffineMonoid, p: &[i64]) -> Result<IVec> {
    if !monoid.contains(p)? {
        return Err(Error::NotInMonoid);
    }
    monoid.gp_coords(p)
}

/// `x(p)` for `p ∈ P` given in ambient coordinates.
pub fn eval_c(x: &CPoint, p: &[i64]) -> Result<Complex64> {
    let c = element_coords(&x.monoid, p)?;
    Ok(match x.face().coords_in_face(&c) {
        Some(w) => x.value_at_face_coords(&w),
        None => Complex64::new(0.0, 0.0),
    })
}

/// `x(p) ∈ ℂ̄`; the first coordinate is `None` for `−∞`.
pub fn eval_cbar(x: &CBarPoint, p: &[i64]) -> Result<(Option<f64>, f64)> {
    let c = element_coords(&x.monoid, p)?;
    let first = x.face().coords_in_face(&c).map(|w| dot(&w, &x.u));
    Ok((first, dot(&c, &x.v)))
}

/// Componentwise `(x, y) ↦ e^{x+iy}`, with `e^{−∞+iy} = 0`.
pub fn exp_point(x: &CBarPoint) -> CPoint {
    let f = x.face();
    let angles = mat_vec(&f.restriction, &x.v);
    CPoint::new(x.monoid.clone(), x.face, &x.u, &angles).expect("shapes follow from x")
}

/// `(a+ib)·(x, y) = (a+x, b+y)` pointwise on `P`.
pub fn cplus_act(g: &CPlusElement, x: &CBarPoint) -> Result<CBarPoint> {
    check_monoid(&g.monoid, &x.monoid)?;
    let f = x.face();
    let shift = mat_vec(&f.restriction, &g.re);
    let u: Vec<f64> = x.u.iter().zip(&shift).map(|(a, b)| a + b).collect();
    let v: Vec<f64> = x.v.iter().zip(&g.im).map(|(a, b)| a + b).collect();
    Ok(CBarPoint {
        monoid: x.monoid.clone(),
        face: x.face,
        u,
        v,
    })
}

/// Componentwise `(x, y) ↦ (e^x, e^{iy})`.
pub fn cbar_to_kn(x: &CBarPoint) -> KNPoint {
    KNPoint::new(x.monoid.clone(), x.face, &x.u, &x.v).expect("shapes follow from x")
}

/// The canonical lift of `k` to `ℂ̄(P)`: `u = log ρ`, `v = σ` with angles in `[0, 2π)`.
pub fn lift(k: &KNPoint) -> CBarPoint {
    CBarPoint {
        monoid: k.monoid.clone(),
        face: k.face,
        u: k.log_modulus.clone(),
        v: k.sigma.angles.clone(),
    }
}

/// `φ_r: (x, y) ↦ (rx, ry)`.
pub fn scale(x: &CBarPoint, r: f64) -> Result<CBarPoint> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidPoint(format!("scale factor must be positive, got {r}")));
    }
    Ok(CBarPoint {
        monoid: x.monoid.clone(),
        face: x.face,
        u: x.u.iter().map(|a| r * a).collect(),
        v: x.v.iter().map(|a| r * a).collect(),
    })
}

/// The canonical `g` with `g·x = y`, if `x` and `y` share a support face.
///
/// The real part of `g` is only determined on `F^gp`; the returned `g` has
/// zero real part on the `P^gp` basis vectors outside the HNF pivots of `F^gp`.
pub fn same_orbit_cplus(x: &CBarPoint, y: &CBarPoint) -> Result<Option<CPlusElement>> {
    check_monoid(&x.monoid, &y.monoid)?;
    if x.face != y.face {
        return Ok(None);
    }
    let du: Vec<f64> = y.u.iter().zip(&x.u).map(|(a, b)| a - b).collect();
    let re = extend_from_face(x.face(), x.monoid.rank(), &du);
    let im: Vec<f64> = y.v.iter().zip(&x.v).map(|(a, b)| a - b).collect();
    Ok(Some(CPlusElement {
        monoid: x.monoid.clone(),
        re,
        im,
    }))
}

/// A real hom on `P^gp` restricting to `values` on `F^gp`, namely the one
/// vanishing on the `P^gp` basis vectors outside the HNF pivots of `F^gp`.
pub fn extend_from_face(f: &MonoidFace, rank: usize, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rank];
    // restriction is in row echelon form, so its pivot columns form an
    // upper triangular system
    for i in (0..f.rank()).rev() {
        let row = &f.restriction[i];
        let tail: f64 = f.pivots[i + 1..].iter().map(|&p| row[p] as f64 * out[p]).sum();
        out[f.pivots[i]] = (values[i] - tail) / row[f.pivots[i]] as f64;
    }
    out
}

/// `τ(ρ, σ) = ρ·σ` restricted to the support face.
pub fn tau(k: &KNPoint) -> CPoint {
    let f = k.face();
    let angles = mat_vec(&f.restriction, k.sigma.angles());
    CPoint::new(k.monoid.clone(), k.face, &k.log_modulus, &angles).expect("shapes follow from k")
}

/// Uniform integer vector in `[−bound, bound]^rank` on the `P^gp` basis.
pub fn random_integral(monoid: &AffineMonoid, bound: i64, rng: &mut impl Rng) -> IVec {
    (0..monoid.rank()).map(|_| rng.gen_range(-bound..=bound)).collect()
}

/// Reals as decimal strings carrying [`JSON_PRECISION`] significant digits.
pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::String(real(x))).collect())
}

pub fn real(x: f64) -> String {
    format!("{:.*e}", JSON_PRECISION - 1, x)
}

pub fn parse_real(v: &Value) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    };
    x.filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse(format!("expected a finite real, got {v}")))
}

pub fn parse_reals(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("expected an array of reals, got {v}")))?
        .iter()
        .map(parse_real)
        .collect()
}

fn parse_pairs(v: &Value) -> Result<Vec<(f64, f64)>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of pairs".into()))?
        .iter()
        .map(|p| match parse_reals(p)?.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(Error::Parse(format!("expected a pair, got {p}"))),
        })
        .collect()
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value> {
    v.get(name)
        .ok_or_else(|| Error::Parse(format!("missing field {name:?}")))
}

fn parse_face(monoid: &AffineMonoid, v: &Value) -> Result<usize> {
    let gens = field(v, "face")?
        .as_array()
        .ok_or_else(|| Error::Parse("face must be a list of generator indices".into()))?
        .iter()
        .map(|x| {
            let i = crate::vec_ops::parse_i64(x)?;
            usize::try_from(i)
                .ok()
                .filter(|&i| i < monoid.generators().len())
                .ok_or_else(|| Error::Parse(format!("bad generator index {i}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(monoid.face_by_generators(&gens)?.index)
}

fn check_json_monoid(monoid: &AffineMonoid, v: &Value) -> Result<()> {
    match v.get("monoid") {
        None => Ok(()),
        Some(m) => {
            let given: AffineMonoid = serde_json::from_value(m.clone()).map_err(|e| Error::Parse(e.to_string()))?;
            if given == *monoid {
                Ok(())
            } else {
                Err(Error::MonoidMismatch)
            }
        }
    }
}
