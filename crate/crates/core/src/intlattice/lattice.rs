use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{hnf, snf, IntMatrix};
use crate::error::{Error, Result};

/// A sublattice of `ℤ^d`, stored by its canonical HNF row basis.
///
/// Two sublattices are equal iff their bases are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sublattice {
    ambient_dim: usize,
    basis: IntMatrix,
}

impl Sublattice {
    /// The lattice spanned by the rows of `gens`.
    pub fn from_generators(gens: &IntMatrix) -> Self {
        let (h, _) = hnf(gens);
        let rank = (0..h.rows())
            .take_while(|&i| h.row(i).iter().any(|x| !x.is_zero()))
            .count();
        let rows = (0..rank).map(|i| h.row(i).to_vec()).collect();
        Sublattice {
            ambient_dim: gens.cols(),
            basis: IntMatrix::from_big_rows(gens.cols(), rows).expect("rows have ambient width"),
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Sublattice {
            ambient_dim,
            basis: IntMatrix::zeros(0, ambient_dim),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Sublattice {
            ambient_dim,
            basis: IntMatrix::identity(ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    /// Integer coordinates `c` with `c·basis = v`, if `v` lies in the lattice.
    pub fn coords(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        if v.len() != self.ambient_dim {
            return None;
        }
        let mut residual = v.to_vec();
        let mut c = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let row = self.basis.row(i);
            let pc = row.iter().position(|x| !x.is_zero()).expect("basis rows nonzero");
            let (q, r) = residual[pc].div_rem(&row[pc]);
            if !r.is_zero() {
                return None;
            }
            for (x, b) in residual.iter_mut().zip(row) {
                *x -= &q * b;
            }
            c.push(q);
        }
        residual.iter().all(Zero::is_zero).then_some(c)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coords(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Sublattice) -> bool {
        (0..other.rank()).all(|i| self.contains(other.basis.row(i)))
    }

    /// Whether the lattice equals its rational span intersected with `ℤ^d`.
    pub fn is_primitive(&self) -> bool {
        let (d, _, _) = snf(&self.basis);
        (0..self.rank()).all(|i| d.get(i, i).is_one())
    }
}

/// Finitely generated abelian group `ℤ^free_rank ⊕ ⊕ ℤ/d_i`, presented as a
/// quotient of some `ℤ^m` through `projection`.
///
/// The first `invariant_factors.len()` rows of `projection` give torsion
/// coordinates (meaningful mod `d_i`), the remaining `free_rank` rows the free
/// coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinAbGroup {
    pub free_rank: usize,
    #[serde(with = "big_list")]
    pub invariant_factors: Vec<BigInt>,
    pub projection: IntMatrix,
}

impl FinAbGroup {
    pub fn trivial(ambient: usize) -> Self {
        FinAbGroup {
            free_rank: 0,
            invariant_factors: Vec::new(),
            projection: IntMatrix::zeros(0, ambient),
        }
    }

    pub fn torsion_rank(&self) -> usize {
        self.invariant_factors.len()
    }

    /// Order of the group, or `None` if it is infinite.
    pub fn order(&self) -> Option<BigInt> {
        (self.free_rank == 0).then(|| self.invariant_factors.iter().product())
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    /// Image of an ambient vector: torsion coordinates reduced into `[0, d_i)`,
    /// followed by free coordinates.
    pub fn project(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        let mut out = self.projection.mul_vec(v)?;
        for (x, d) in out.iter_mut().zip(&self.invariant_factors) {
            *x = x.mod_floor(d);
        }
        Ok(out)
    }

    /// Whether two ambient vectors have the same image.
    pub fn same_class(&self, a: &[BigInt], b: &[BigInt]) -> Result<bool> {
        Ok(self.project(a)? == self.project(b)?)
    }
}

/// Kernel `{v : M·v = 0}` as a sublattice of `ℤ^cols`.
pub fn kernel_basis(m: &IntMatrix) -> Sublattice {
    let (h, u) = hnf(&m.transpose());
    let rows: Vec<Vec<BigInt>> = (0..h.rows())
        .filter(|&i| h.row(i).iter().all(Zero::is_zero))
        .map(|i| u.row(i).to_vec())
        .collect();
    if rows.is_empty() {
        return Sublattice::zero(m.cols());
    }
    Sublattice::from_generators(&IntMatrix::from_big_rows(m.cols(), rows).expect("kernel rows"))
}

/// Cokernel `ℤ^rows / M·ℤ^cols`.
pub fn cokernel(m: &IntMatrix) -> FinAbGroup {
    let (d, u, _) = snf(m);
    let rank = (0..m.rows().min(m.cols()))
        .take_while(|&i| !d.get(i, i).is_zero())
        .count();
    let mut factors = Vec::new();
    let mut rows = Vec::new();
    for i in 0..rank {
        let di = d.get(i, i);
        if !di.is_one() {
            factors.push(di.clone());
            rows.push(u.row(i).to_vec());
        }
    }
    for i in rank..m.rows() {
        rows.push(u.row(i).to_vec());
    }
    FinAbGroup {
        free_rank: m.rows() - rank,
        invariant_factors: factors,
        projection: IntMatrix::from_big_rows(m.rows(), rows).expect("projection rows"),
    }
}

/// An integer `x` with `M·x = b`, if one exists.
pub fn solve_integral(m: &IntMatrix, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            actual: b.len(),
        });
    }
    let (d, u, v) = snf(m);
    let ub = u.mul_vec(b)?;
    let mut y = vec![BigInt::zero(); m.cols()];
    for (i, ubi) in ub.iter().enumerate() {
        let di = if i < m.cols() { d.get(i, i) } else { &BigInt::ZERO };
        if di.is_zero() {
            if !ubi.is_zero() {
                return Ok(None);
            }
            continue;
        }
        let (q, r) = ubi.div_rem(di);
        if !r.is_zero() {
            return Ok(None);
        }
        y[i] = q;
    }
    Ok(Some(v.mul_vec(&y)?))
}

pub(crate) mod big_list {
    use num_bigint::BigInt;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(ToString::to_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw: Vec<serde_json::Value> = Vec::deserialize(d)?;
        raw.iter()
            .map(|x| crate::intlattice::parse_big(x).map_err(D::Error::custom))
            .collect()
    }
}
