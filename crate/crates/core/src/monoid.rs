//! Affine monoids: finitely generated submonoids of `ℤ^d`.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::cone::{FaceDescriptor, RationalCone};
use crate::error::{Error, Result};
use crate::intlattice::{self, cokernel, kernel_basis, FinAbGroup, IntMatrix, Sublattice};
use crate::vec_ops::{self, decimal_rows, IVec};

/// Submonoid of `ℤ^d` generated by finitely many nonzero vectors.
///
/// Generators are kept sorted lexicographically without duplicates, so two
/// monoids built from the same generator set compare equal. Derived data
/// (groupification, cones, faces) is computed on first use and cached.
#[derive(Clone)]
pub struct AffineMonoid {
    ambient_dim: usize,
    generators: Vec<IVec>,
    cache: Cache,
}

#[derive(Clone, Default)]
struct Cache {
    gp: OnceLock<Sublattice>,
    gen_coords: OnceLock<Result<Vec<IVec>>>,
    gp_cone: OnceLock<Result<RationalCone>>,
    faces: OnceLock<Result<Vec<MonoidFace>>>,
    saturated: OnceLock<Result<bool>>,
}

/// A face `F` of `P`, with its groupification `F^gp ⊆ P^gp`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonoidFace {
    /// Position in [`AffineMonoid::faces`].
    pub index: usize,
    pub descriptor: FaceDescriptor,
    pub generator_indices: Vec<usize>,
    /// `F^gp` as a sublattice of the ambient `ℤ^d`.
    pub gp: Sublattice,
    /// Basis of `F^gp` written in the basis of `P^gp` (one row per basis vector).
    #[serde(with = "decimal_rows")]
    pub restriction: Vec<IVec>,
    /// Columns of `restriction` carrying the HNF pivots; the remaining `P^gp`
    /// basis vectors span a fixed complement of `F^gp ⊗ ℝ`.
    pub pivots: Vec<usize>,
}

impl MonoidFace {
    pub fn rank(&self) -> usize {
        self.gp.rank()
    }

    pub fn contains_generator(&self, i: usize) -> bool {
        self.generator_indices.binary_search(&i).is_ok()
    }

    /// Coordinates in the `F^gp` basis of a vector given in `P^gp`
    /// coordinates, if it lies in `F^gp`.
    pub fn coords_in_face(&self, c: &[i64]) -> Option<IVec> {
        let mut residual: Vec<i128> = c.iter().map(|&x| i128::from(x)).collect();
        let mut out = Vec::with_capacity(self.restriction.len());
        for (row, &p) in self.restriction.iter().zip(&self.pivots) {
            let pivot = i128::from(row[p]);
            if residual[p] % pivot != 0 {
                return None;
            }
            let q = residual[p] / pivot;
            for (r, &b) in residual.iter_mut().zip(row) {
                *r -= q * i128::from(b);
            }
            out.push(i64::try_from(q).ok()?);
        }
        residual.iter().all(|&x| x == 0).then_some(out)
    }
}

/// The sharp quotient `P/F` at a face, living in `P^gp/F^gp`.
#[derive(Clone, Debug)]
pub struct CharStalk {
    pub monoid: AffineMonoid,
    /// `P^gp/F^gp` with projection from `P^gp` coordinates; torsion-free.
    pub quotient: FinAbGroup,
}

impl AffineMonoid {
    pub fn new(ambient_dim: usize, generators: &[IVec]) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    actual: g.len(),
                });
            }
            if vec_ops::is_zero(g) {
                return Err(Error::ZeroGenerator(i));
            }
        }
        let mut gens = generators.to_vec();
        gens.sort();
        gens.dedup();
        Ok(AffineMonoid {
            ambient_dim,
            generators: gens,
            cache: Cache::default(),
        })
    }

    /// `ℕ^k` with the standard basis as generators.
    pub fn free(k: usize) -> Self {
        let gens: Vec<IVec> = (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect();
        Self::new(k, &gens).expect("standard basis is valid")
    }

    /// The quadric cone monoid `⟨(1,0),(1,1),(1,2)⟩`.
    pub fn a1() -> Self {
        Self::new(2, &[vec![1, 0], vec![1, 1], vec![1, 2]]).expect("valid")
    }

    /// Numerical semigroup `⟨a_1, …, a_r⟩ ⊆ ℕ`.
    pub fn numerical(gens: &[i64]) -> Result<Self> {
        let gens: Vec<IVec> = gens.iter().map(|&g| vec![g]).collect();
        Self::new(1, &gens)
    }

    /// Built-in names: `N`, `N2`, `N3` (any `N<k>`), `A1`, `numsemigroup:a,b,…`.
    pub fn builtin(name: &str) -> Result<Self> {
        if name == "A1" {
            return Ok(Self::a1());
        }
        if name == "N" {
            return Ok(Self::free(1));
        }
        if let Some(k) = name.strip_prefix('N') {
            if let Ok(k) = k.parse::<usize>() {
                if k <= crate::cone::MAX_DIM {
                    return Ok(Self::free(k));
                }
            }
        }
        if let Some(list) = name.strip_prefix("numsemigroup:") {
            let gens = list
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("bad numerical semigroup {list:?}: {e}")))?;
            if gens.iter().any(|&g| g <= 0) {
                return Err(Error::Parse("numerical semigroup generators must be positive".into()));
            }
            return Self::numerical(&gens);
        }
        Err(Error::Parse(format!("unknown built-in monoid {name:?}")))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn generators(&self) -> &[IVec] {
        &self.generators
    }

    /// `d × r` matrix whose columns are the generators.
    pub fn generator_matrix(&self) -> IntMatrix {
        IntMatrix::from_i64_rows(self.ambient_dim, &self.generators)
            .expect("generators have ambient width")
            .transpose()
    }

    /// `P^gp`, the lattice spanned by the generators.
    pub fn groupification(&self) -> &Sublattice {
        self.cache.gp.get_or_init(|| {
            if self.generators.is_empty() {
                return Sublattice::zero(self.ambient_dim);
            }
            Sublattice::from_generators(&IntMatrix::from_i64_rows(self.ambient_dim, &self.generators).expect("width"))
        })
    }

    pub fn rank(&self) -> usize {
        self.groupification().rank()
    }

    /// Coordinates of each generator in the HNF basis of `P^gp`.
    pub fn generator_coords(&self) -> Result<&[IVec]> {
        self.cache
            .gen_coords
            .get_or_init(|| {
                self.generators
                    .iter()
                    .map(|g| self.gp_coords(g))
                    .collect::<Result<Vec<_>>>()
            })
            .as_deref()
            .map_err(Clone::clone)
    }

    /// Coordinates of an ambient vector in the basis of `P^gp`, if it lies there.
    pub fn gp_coords(&self, v: &[i64]) -> Result<IVec> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                actual: v.len(),
            });
        }
        let c = self
            .groupification()
            .coords(&intlattice::big_vec(v))
            .ok_or(Error::NotInMonoid)?;
        intlattice::small_vec(&c)
    }

    /// Ambient vector with the given `P^gp` coordinates.
    pub fn from_gp_coords(&self, c: &[i64]) -> Result<IVec> {
        let basis = self.groupification().basis();
        let v = basis.vec_mul(&intlattice::big_vec(c))?;
        intlattice::small_vec(&v)
    }

    /// `cone(P)` written in `P^gp` coordinates (full-dimensional there).
    pub fn gp_cone(&self) -> Result<&RationalCone> {
        self.cache
            .gp_cone
            .get_or_init(|| {
                let coords = self.generator_coords()?;
                RationalCone::new(self.rank(), coords)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `cone(P)` in the ambient space.
    pub fn cone(&self) -> Result<RationalCone> {
        RationalCone::new(self.ambient_dim, &self.generators)
    }

    /// Fine means finitely generated and integral; every affine monoid is both.
    pub fn is_fine(&self) -> bool {
        true
    }

    /// Sharp iff `cone(P)` is pointed, which for a submonoid of `ℤ^d` is the
    /// same as having no nonzero element whose negative is also in `P`.
    pub fn is_sharp(&self) -> Result<bool> {
        Ok(self.gp_cone()?.is_pointed())
    }

    /// Whether `P = P^gp ∩ cone(P)`.
    pub fn is_saturated(&self) -> Result<bool> {
        self.cache.saturated.get_or_init(|| self.compute_saturated()).clone()
    }

    fn compute_saturated(&self) -> Result<bool> {
        if self.is_sharp()? {
            let hb = self.gp_cone()?.hilbert_basis()?;
            let gens: std::collections::BTreeSet<&IVec> = self.generator_coords()?.iter().collect();
            for h in &hb {
                if !gens.contains(h) && !self.contains_coords_search(h)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        // The generators on the minimal face generate the unit group U. P is
        // saturated iff U^gp is saturated in P^gp and the sharp quotient P/U is.
        let cone = self.gp_cone()?;
        let min_face = cone.faces().into_iter().next().expect("cone has a minimal face");
        let coords = self.generator_coords()?;
        let units: Vec<usize> = (0..coords.len())
            .filter(|&i| cone.face_contains(&min_face, &coords[i]))
            .collect();
        match self.quotient_by(&units) {
            Ok(stalk) => stalk.monoid.is_saturated(),
            Err(Error::TorsionInQuotient(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Membership test `v ∈ P` for an ambient vector.
    pub fn contains(&self, v: &[i64]) -> Result<bool> {
        let c = match self.gp_coords(v) {
            Ok(c) => c,
            Err(Error::NotInMonoid) => return Ok(false),
            Err(e) => return Err(e),
        };
        if !self.gp_cone()?.contains(&c) {
            return Ok(false);
        }
        if !self.is_sharp()? {
            return Err(Error::NotSharp);
        }
        if self.is_saturated()? {
            return Ok(true);
        }
        self.contains_coords_search(&c)
    }

    /// Decides membership of a cone point (in `P^gp` coordinates) by
    /// searching for a decomposition into generators. Requires `P` sharp.
    fn contains_coords_search(&self, c: &[i64]) -> Result<bool> {
        let cone = self.gp_cone()?;
        let gens = self.generator_coords()?;
        let mut memo: HashMap<IVec, bool> = HashMap::new();
        fn go(x: &IVec, cone: &RationalCone, gens: &[IVec], memo: &mut HashMap<IVec, bool>) -> Result<bool> {
            if vec_ops::is_zero(x) {
                return Ok(true);
            }
            if let Some(&known) = memo.get(x) {
                return Ok(known);
            }
            let mut found = false;
            for g in gens {
                let y = vec_ops::sub(x, g)?;
                if cone.contains(&y) && go(&y, cone, gens, memo)? {
                    found = true;
                    break;
                }
            }
            memo.insert(x.clone(), found);
            Ok(found)
        }
        go(&c.to_vec(), cone, gens, &mut memo)
    }

    /// The saturation `P^gp ∩ cone(P)`, generated by its Hilbert basis.
    pub fn saturate(&self) -> Result<AffineMonoid> {
        if !self.is_sharp()? {
            return Err(Error::NotSharp);
        }
        let hb = self.gp_cone()?.hilbert_basis()?;
        let gens = hb.iter().map(|c| self.from_gp_coords(c)).collect::<Result<Vec<_>>>()?;
        AffineMonoid::new(self.ambient_dim, &gens)
    }

    /// The saturation of `P` in the ambient lattice, `ℤ^d ∩ cone(P)`. It
    /// contains [`saturate`](Self::saturate) and agrees with it when `P^gp` is
    /// saturated in `ℤ^d`.
    pub fn saturate_in_ambient(&self) -> Result<AffineMonoid> {
        if !self.is_sharp()? {
            return Err(Error::NotSharp);
        }
        AffineMonoid::new(self.ambient_dim, &self.cone()?.hilbert_basis()?)
    }

    /// The Kummer extension `(1/n)P`, identified with `P` as a monoid.
    ///
    /// The returned matrix is the inclusion `P^gp → ((1/n)P)^gp` in
    /// groupification coordinates, namely `n·I`.
    pub fn kummer_root(&self, n: u64) -> Result<(AffineMonoid, IntMatrix)> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        let n = i64::try_from(n).map_err(|_| Error::Overflow)?;
        Ok((self.clone(), IntMatrix::scalar(self.rank(), n)))
    }

    /// All faces, including the trivial face and `P` itself, ordered by
    /// `(dim, ray set)` of the underlying cone face.
    pub fn faces(&self) -> Result<&[MonoidFace]> {
        if !self.is_sharp()? {
            return Err(Error::NotSharp);
        }
        self.cache
            .faces
            .get_or_init(|| self.compute_faces())
            .as_deref()
            .map_err(Clone::clone)
    }

    pub fn face(&self, index: usize) -> Result<&MonoidFace> {
        self.faces()?.get(index).ok_or(Error::UnknownFace(index))
    }

    /// Looks up a face by its generator set.
    pub fn face_by_generators(&self, generator_indices: &[usize]) -> Result<&MonoidFace> {
        let mut want = generator_indices.to_vec();
        want.sort_unstable();
        want.dedup();
        self.faces()?
            .iter()
            .find(|f| f.generator_indices == want)
            .ok_or_else(|| Error::InvalidPoint(format!("generators {want:?} do not form a face")))
    }

    /// The face `P` itself.
    pub fn full_face(&self) -> Result<&MonoidFace> {
        Ok(self.faces()?.last().expect("at least one face"))
    }

    /// The trivial face `{0}`.
    pub fn trivial_face(&self) -> Result<&MonoidFace> {
        Ok(self.faces()?.first().expect("at least one face"))
    }

    fn compute_faces(&self) -> Result<Vec<MonoidFace>> {
        let cone = self.gp_cone()?;
        let coords = self.generator_coords()?;
        let k = self.rank();
        cone.faces()
            .into_iter()
            .enumerate()
            .map(|(index, descriptor)| {
                let generator_indices: Vec<usize> = (0..coords.len())
                    .filter(|&i| cone.face_contains(&descriptor, &coords[i]))
                    .collect();
                let face_coords: Vec<&IVec> = generator_indices.iter().map(|&i| &coords[i]).collect();
                let local = if face_coords.is_empty() {
                    Sublattice::zero(k)
                } else {
                    Sublattice::from_generators(&IntMatrix::from_i64_rows(k, &face_coords)?)
                };
                let restriction = local.basis().to_i64_rows()?;
                let pivots = restriction
                    .iter()
                    .map(|row| row.iter().position(|&x| x != 0).expect("basis rows nonzero"))
                    .collect();
                let ambient_rows: Vec<IVec> = restriction
                    .iter()
                    .map(|c| self.from_gp_coords(c))
                    .collect::<Result<_>>()?;
                let gp = if ambient_rows.is_empty() {
                    Sublattice::zero(self.ambient_dim)
                } else {
                    Sublattice::from_generators(&IntMatrix::from_i64_rows(self.ambient_dim, &ambient_rows)?)
                };
                Ok(MonoidFace {
                    index,
                    descriptor,
                    generator_indices,
                    gp,
                    restriction,
                    pivots,
                })
            })
            .collect()
    }

    /// Kernel of `ℤ^r → ℤ^d` sending the i-th basis vector to the i-th
    /// generator. A map from the generators to an abelian group extends to
    /// `P^gp` iff it kills this lattice.
    pub fn relation_lattice(&self) -> Sublattice {
        kernel_basis(&self.generator_matrix())
    }

    /// The characteristic quotient `P/F` in `P^gp/F^gp`.
    pub fn char_stalk(&self, face: &MonoidFace) -> Result<CharStalk> {
        self.quotient_by(&face.generator_indices)
    }

    fn quotient_by(&self, generator_indices: &[usize]) -> Result<CharStalk> {
        let k = self.rank();
        let coords = self.generator_coords()?;
        let sub: Vec<&IVec> = generator_indices.iter().map(|&i| &coords[i]).collect();
        // Columns of `sub_matrix` span F^gp inside ℤ^k.
        let sub_matrix = if sub.is_empty() {
            IntMatrix::zeros(k, 0)
        } else {
            IntMatrix::from_i64_rows(k, &sub)?.transpose()
        };
        let group = cokernel(&sub_matrix);
        if !group.invariant_factors.is_empty() {
            return Err(Error::TorsionInQuotient(
                group.invariant_factors.iter().map(ToString::to_string).collect(),
            ));
        }
        let r = group.free_rank;
        let mut images = Vec::new();
        for (i, c) in coords.iter().enumerate() {
            if generator_indices.contains(&i) {
                continue;
            }
            let img = intlattice::small_vec(&group.project(&intlattice::big_vec(c))?)?;
            if !vec_ops::is_zero(&img) {
                images.push(img);
            }
        }
        Ok(CharStalk {
            monoid: AffineMonoid::new(r, &images)?,
            quotient: group,
        })
    }
}

impl PartialEq for AffineMonoid {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.generators == other.generators
    }
}

impl Eq for AffineMonoid {}

impl fmt::Debug for AffineMonoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffineMonoid")
            .field("ambient_dim", &self.ambient_dim)
            .field("generators", &self.generators)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct MonoidJson {
    ambient_dim: usize,
    #[serde(with = "decimal_rows")]
    generators: Vec<IVec>,
}

impl Serialize for AffineMonoid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MonoidJson {
            ambient_dim: self.ambient_dim,
            generators: self.generators.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffineMonoid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MonoidJson::deserialize(d)?;
        AffineMonoid::new(raw.ambient_dim, &raw.generators).map_err(serde::de::Error::custom)
    }
}
