//! Rational polyhedral cones: dual description, faces, membership and
//! Hilbert bases.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::intlattice::{kernel_basis, snf, IntMatrix, Sublattice};
use crate::vec_ops::{self, decimal_rows, IVec};

/// Largest ambient dimension accepted by the polyhedral routines.
pub const MAX_DIM: usize = 6;
/// Largest number of rays accepted by the double description routine.
pub const MAX_RAYS: usize = 64;
/// Upper bound on the total number of fundamental-parallelepiped points
/// enumerated by [`RationalCone::hilbert_basis`].
pub const MAX_PARALLELEPIPED_POINTS: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalCone {
    ambient_dim: usize,
    #[serde(with = "decimal_rows")]
    rays: Vec<IVec>,
    #[serde(with = "decimal_rows")]
    facets: Vec<IVec>,
}

/// A face, named by the cone rays lying on it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceDescriptor {
    pub dim: usize,
    pub ray_indices: Vec<usize>,
    /// Facet inequalities that are tight on the whole face.
    pub facet_indices: Vec<usize>,
}

impl RationalCone {
    /// Cone generated by `rays`. Zero rays are dropped, the rest are made
    /// primitive, deduplicated and sorted; facets are computed immediately.
    pub fn new(ambient_dim: usize, rays: &[IVec]) -> Result<Self> {
        let mut clean = BTreeSet::new();
        for r in rays {
            if r.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    actual: r.len(),
                });
            }
            if vec_ops::is_zero(r) {
                continue;
            }
            let mut p = r.clone();
            vec_ops::make_primitive(&mut p);
            clean.insert(p);
        }
        let rays: Vec<IVec> = clean.into_iter().collect();
        let facets = dual_description(ambient_dim, &rays)?;
        Ok(RationalCone {
            ambient_dim,
            rays,
            facets,
        })
    }

    /// The orthant `ℝ≥0^d`.
    pub fn orthant(d: usize) -> Result<Self> {
        let rays: Vec<IVec> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
        Self::new(d, &rays)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rays(&self) -> &[IVec] {
        &self.rays
    }

    pub fn facets(&self) -> &[IVec] {
        &self.facets
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        let rows: Vec<&[i64]> = self.rays.iter().map(Vec::as_slice).collect();
        vec_ops::rank(self.ambient_dim, &rows)
    }

    /// A cone is pointed iff its facet normals span the dual space.
    pub fn is_pointed(&self) -> bool {
        let rows: Vec<&[i64]> = self.facets.iter().map(Vec::as_slice).collect();
        vec_ops::rank(self.ambient_dim, &rows) == self.ambient_dim
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        v.len() == self.ambient_dim && self.facets.iter().all(|h| vec_ops::dot(h, v).is_ok_and(|x| x >= 0))
    }

    fn tight_rays(&self, h: &[i64]) -> BTreeSet<usize> {
        self.rays
            .iter()
            .enumerate()
            .filter(|(_, r)| vec_ops::dot(h, r) == Ok(0))
            .map(|(i, _)| i)
            .collect()
    }

    fn descriptor(&self, rays: BTreeSet<usize>) -> FaceDescriptor {
        let facet_indices = self
            .facets
            .iter()
            .enumerate()
            .filter(|(_, h)| rays.iter().all(|&r| vec_ops::dot(h, &self.rays[r]) == Ok(0)))
            .map(|(i, _)| i)
            .collect();
        let vecs: Vec<&[i64]> = rays.iter().map(|&i| self.rays[i].as_slice()).collect();
        FaceDescriptor {
            dim: vec_ops::rank(self.ambient_dim, &vecs),
            ray_indices: rays.into_iter().collect(),
            facet_indices,
        }
    }

    /// All faces, from the minimal face up to the cone itself, ordered by
    /// `(dim, ray_indices)`.
    pub fn faces(&self) -> Vec<FaceDescriptor> {
        let tight: Vec<BTreeSet<usize>> = self.facets.iter().map(|h| self.tight_rays(h)).collect();
        let top: BTreeSet<usize> = (0..self.rays.len()).collect();
        let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        let mut stack = vec![top.clone()];
        seen.insert(top);
        while let Some(face) = stack.pop() {
            for t in &tight {
                let next: BTreeSet<usize> = face.intersection(t).copied().collect();
                if seen.insert(next.clone()) {
                    stack.push(next);
                }
            }
        }
        let mut out: Vec<FaceDescriptor> = seen.into_iter().map(|s| self.descriptor(s)).collect();
        out.sort();
        out
    }

    /// Whether `v` lies on the given face.
    pub fn face_contains(&self, face: &FaceDescriptor, v: &[i64]) -> bool {
        self.contains(v)
            && face
                .facet_indices
                .iter()
                .all(|&i| vec_ops::dot(&self.facets[i], v) == Ok(0))
    }

    /// Indices of rays spanning one-dimensional faces (for pointed cones), or
    /// more generally rays not expressible through the other rays on their
    /// minimal face.
    pub fn extreme_rays(&self) -> Vec<usize> {
        (0..self.rays.len())
            .filter(|&i| {
                let on: Vec<usize> = (0..self.rays.len())
                    .filter(|&j| {
                        self.facets
                            .iter()
                            .all(|h| vec_ops::dot(h, &self.rays[i]) != Ok(0) || vec_ops::dot(h, &self.rays[j]) == Ok(0))
                    })
                    .collect();
                on == [i]
            })
            .collect()
    }

    /// Minimal generating set of the monoid `cone ∩ ℤ^d`, sorted lexicographically.
    ///
    /// Triangulates into simplicial cones, enumerates each fundamental
    /// parallelepiped, and keeps the irreducible candidates.
    pub fn hilbert_basis(&self) -> Result<Vec<IVec>> {
        self.hilbert_basis_with(ExecMode::default())
    }

    pub fn hilbert_basis_with(&self, mode: ExecMode) -> Result<Vec<IVec>> {
        if self.ambient_dim > MAX_DIM {
            return Err(Error::DimensionTooLarge {
                dim: self.ambient_dim,
                max: MAX_DIM,
            });
        }
        if !self.is_pointed() {
            return Err(Error::NotPointed);
        }
        if self.rays.is_empty() {
            return Ok(Vec::new());
        }
        let d = self.ambient_dim;
        let ray_matrix = IntMatrix::from_i64_rows(d, &self.rays)?;
        let orth = kernel_basis(&ray_matrix);
        let span = if orth.rank() == 0 {
            Sublattice::full(d)
        } else {
            kernel_basis(orth.basis())
        };
        let k = span.rank();
        let ext = self.extreme_rays();
        let local_rays: Vec<IVec> = ext
            .iter()
            .map(|&i| {
                let c = span
                    .coords(&crate::intlattice::big_vec(&self.rays[i]))
                    .expect("ray lies in its span lattice");
                crate::intlattice::small_vec(&c)
            })
            .collect::<Result<_>>()?;
        let local = RationalCone::new(k, &local_rays)?;
        let all: Vec<usize> = (0..local.rays.len()).collect();
        let simplices = triangulate(&local.rays, &all, k)?;

        let mut volume: u64 = 0;
        let mut snfs = Vec::with_capacity(simplices.len());
        for s in &simplices {
            let rows: Vec<&IVec> = s.iter().map(|&i| &local.rays[i]).collect();
            let m = IntMatrix::from_i64_rows(k, &rows)?;
            let (dm, u, _) = snf(&m);
            let det: BigInt = (0..k).map(|i| dm.get(i, i).clone()).product();
            volume = volume.saturating_add(det.to_u64().ok_or(Error::Overflow)?);
            snfs.push((m, dm, u, det));
        }
        if volume > MAX_PARALLELEPIPED_POINTS {
            return Err(Error::ResourceLimit(format!(
                "{volume} parallelepiped points exceeds {MAX_PARALLELEPIPED_POINTS}"
            )));
        }
        let per_simplex = exec::map_slice(&snfs, mode, |(m, dm, u, det)| parallelepiped_points(m, dm, u, det));
        let mut candidates: BTreeSet<IVec> = local.rays.iter().cloned().collect();
        for pts in per_simplex {
            candidates.extend(pts?);
        }
        let cand: Vec<IVec> = candidates.into_iter().collect();
        let irreducible: Vec<bool> = exec::map_range(cand.len(), mode, |i| {
            !cand.iter().enumerate().any(|(j, g)| {
                j != i
                    && vec_ops::sub(&cand[i], g)
                        .map(|diff| local.contains(&diff))
                        .unwrap_or(false)
            })
        });
        let basis = span.basis().to_i64_rows()?;
        let mut out: Vec<IVec> = cand
            .iter()
            .zip(irreducible)
            .filter(|(_, keep)| *keep)
            .map(|(c, _)| {
                (0..d)
                    .map(|j| {
                        c.iter()
                            .zip(&basis)
                            .try_fold(0i64, |acc, (ci, b)| {
                                ci.checked_mul(b[j]).and_then(|p| acc.checked_add(p))
                            })
                            .ok_or(Error::Overflow)
                    })
                    .collect::<Result<IVec>>()
            })
            .collect::<Result<_>>()?;
        out.sort();
        Ok(out)
    }
}

/// Facet normals `H` with `cone(rays) = {v : ⟨h, v⟩ ≥ 0 ∀ h ∈ H}`.
///
/// Each normal is primitive and the list is sorted lexicographically. When the
/// cone is not full-dimensional the orthogonal complement of its span shows up
/// as `±` pairs of normals.
pub fn dual_description(ambient_dim: usize, rays: &[IVec]) -> Result<Vec<IVec>> {
    if ambient_dim > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: ambient_dim,
            max: MAX_DIM,
        });
    }
    if rays.len() > MAX_RAYS {
        return Err(Error::ResourceLimit(format!("{} rays exceeds {MAX_RAYS}", rays.len())));
    }
    let d = ambient_dim;
    let constraints: Vec<Vec<i128>> = rays.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();

    // Generators of the dual cone {h : ⟨r, h⟩ ≥ 0}: a lineality basis plus
    // extreme rays tagged with the constraints they are tight on.
    let mut lineality: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| i128::from(i == j)).collect()).collect();
    let mut extremes: Vec<(Vec<i128>, u64)> = Vec::new();

    for (ci, a) in constraints.iter().enumerate() {
        let bit = 1u64 << ci;
        let mut pivot = None;
        for (i, l) in lineality.iter().enumerate() {
            if vec_ops::dot128(a, l)? != 0 {
                pivot = Some(i);
                break;
            }
        }
        if let Some(i) = pivot {
            let mut l0 = lineality.remove(i);
            if vec_ops::dot128(a, &l0)? < 0 {
                l0.iter_mut().for_each(|x| *x = -*x);
            }
            let s = vec_ops::dot128(a, &l0)?;
            for l in &mut lineality {
                let t = vec_ops::dot128(a, l)?;
                if t != 0 {
                    *l = vec_ops::lin_comb128(s, l, t, &l0)?;
                    vec_ops::make_primitive128(l);
                }
            }
            for (e, tight) in &mut extremes {
                let t = vec_ops::dot128(a, e)?;
                if t != 0 {
                    *e = vec_ops::lin_comb128(s, e, t, &l0)?;
                    vec_ops::make_primitive128(e);
                }
                *tight |= bit;
            }
            // l0 is orthogonal to every earlier constraint.
            extremes.push((l0, bit - 1));
            continue;
        }

        let dots: Vec<i128> = extremes
            .iter()
            .map(|(e, _)| vec_ops::dot128(a, e))
            .collect::<Result<_>>()?;
        let mut next: Vec<(Vec<i128>, u64)> = Vec::new();
        for ((e, tight), &t) in extremes.iter().zip(&dots) {
            if t > 0 {
                next.push((e.clone(), *tight));
            } else if t == 0 {
                next.push((e.clone(), *tight | bit));
            }
        }
        for (pi, (p, zp)) in extremes.iter().enumerate() {
            if dots[pi] <= 0 {
                continue;
            }
            for (ni, (n, zn)) in extremes.iter().enumerate() {
                if dots[ni] >= 0 {
                    continue;
                }
                let common = zp & zn;
                let adjacent = extremes
                    .iter()
                    .enumerate()
                    .all(|(k, (_, zk))| k == pi || k == ni || common & zk != common);
                if !adjacent {
                    continue;
                }
                let mut e = vec_ops::lin_comb128(dots[pi], n, dots[ni], p)?;
                vec_ops::make_primitive128(&mut e);
                next.push((e, common | bit));
            }
        }
        extremes = next;
    }

    let mut out: BTreeSet<IVec> = BTreeSet::new();
    for (e, _) in &extremes {
        out.insert(vec_ops::to_i64_vec(e)?);
    }
    if !lineality.is_empty() {
        let rows: Vec<IVec> = lineality
            .iter()
            .map(|l| vec_ops::to_i64_vec(l))
            .collect::<Result<_>>()?;
        let lin = Sublattice::from_generators(&IntMatrix::from_i64_rows(d, &rows)?);
        for row in lin.basis().to_i64_rows()? {
            let mut p = row.clone();
            vec_ops::make_primitive(&mut p);
            out.insert(p.iter().map(|x| -x).collect());
            out.insert(p);
        }
    }
    Ok(out.into_iter().collect())
}

/// Pulling triangulation of the pointed cone spanned by `rays[ids]` (all
/// extreme) of dimension `dim`. Returns simplices as lists of ray indices.
fn triangulate(rays: &[IVec], ids: &[usize], dim: usize) -> Result<Vec<Vec<usize>>> {
    if ids.len() == dim || dim <= 1 {
        return Ok(vec![ids[..dim.min(ids.len())].to_vec()]);
    }
    let ambient = rays[ids[0]].len();
    let sub_rays: Vec<IVec> = ids.iter().map(|&i| rays[i].clone()).collect();
    let facets = dual_description(ambient, &sub_rays)?;
    let apex = ids[0];
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for h in &facets {
        let on: Vec<usize> = ids
            .iter()
            .copied()
            .filter(|&i| vec_ops::dot(h, &rays[i]) == Ok(0))
            .collect();
        if on.len() == ids.len() || on.contains(&apex) || !seen.insert(on.clone()) {
            continue;
        }
        for mut s in triangulate(rays, &on, dim - 1)? {
            s.insert(0, apex);
            out.push(s);
        }
    }
    Ok(out)
}

/// Nonzero lattice points `Σ λ_i r_i`, `λ ∈ [0,1)^k`, of the simplicial cone
/// with ray matrix `m` (rows), given `U·m·V = D`.
fn parallelepiped_points(m: &IntMatrix, dm: &IntMatrix, u: &IntMatrix, det: &BigInt) -> Result<Vec<IVec>> {
    let k = m.rows();
    let det = det.to_i128().ok_or(Error::Overflow)?;
    let diag: Vec<i128> = (0..k)
        .map(|i| dm.get(i, i).to_i128().ok_or(Error::Overflow))
        .collect::<Result<_>>()?;
    let u: Vec<Vec<i128>> = (0..k)
        .map(|i| u.row(i).iter().map(|x| x.to_i128().ok_or(Error::Overflow)).collect())
        .collect::<Result<_>>()?;
    let r: Vec<Vec<i128>> = (0..k)
        .map(|i| m.row(i).iter().map(|x| x.to_i128().ok_or(Error::Overflow)).collect())
        .collect::<Result<_>>()?;

    // Coset representatives z = c·V⁻¹ with 0 ≤ c_i < d_i satisfy z·V = c, so
    // λ = c·D⁻¹·U and det·λ = c·diag(det/d_i)·U.
    let mut out = Vec::new();
    let mut c = vec![0i128; k];
    loop {
        if c.iter().any(|&x| x != 0) {
            let mut num = vec![0i128; k];
            for i in 0..k {
                if c[i] == 0 {
                    continue;
                }
                let w = c[i].checked_mul(det / diag[i]).ok_or(Error::Overflow)?;
                for (nj, uij) in num.iter_mut().zip(&u[i]) {
                    *nj = w
                        .checked_mul(*uij)
                        .and_then(|p| nj.checked_add(p))
                        .ok_or(Error::Overflow)?;
                }
            }
            let frac: Vec<i128> = num.iter().map(|x| x.rem_euclid(det)).collect();
            let mut p = vec![0i128; k];
            for (fi, ri) in frac.iter().zip(&r) {
                for (pj, rij) in p.iter_mut().zip(ri) {
                    *pj = fi
                        .checked_mul(*rij)
                        .and_then(|x| pj.checked_add(x))
                        .ok_or(Error::Overflow)?;
                }
            }
            for x in &mut p {
                debug_assert_eq!(*x % det, 0);
                *x /= det;
            }
            out.push(vec_ops::to_i64_vec(&p)?);
        }
        // odometer over Π [0, d_i)
        let mut i = 0;
        loop {
            if i == k {
                return Ok(out);
            }
            c[i] += 1;
            if c[i] < diag[i] {
                break;
            }
            c[i] = 0;
            i += 1;
        }
    }
}
