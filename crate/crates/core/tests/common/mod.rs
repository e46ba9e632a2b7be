//! Corpus and brute-force oracles shared by the integration tests. Nothing
//! here calls the library's normal forms, cone code or Hilbert bases.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use knroot::monoid::AffineMonoid;

/// Sharp affine monoids of dimension at most 3, all in the nonnegative orthant.
pub fn corpus() -> Vec<(&'static str, AffineMonoid)> {
    let raw: Vec<(&str, usize, Vec<Vec<i64>>)> = vec![
        ("<2,3>", 1, vec![vec![2], vec![3]]),
        ("<3,5>", 1, vec![vec![3], vec![5]]),
        ("<4,6,9>", 1, vec![vec![4], vec![6], vec![9]]),
        ("N", 1, vec![vec![1]]),
        ("N2", 2, vec![vec![1, 0], vec![0, 1]]),
        ("<(1,0),(1,2)>", 2, vec![vec![1, 0], vec![1, 2]]),
        ("<(1,0),(1,3)>", 2, vec![vec![1, 0], vec![1, 3]]),
        ("<(2,0),(0,2)>", 2, vec![vec![2, 0], vec![0, 2]]),
        ("<(2,0),(1,1),(0,2)>", 2, vec![vec![2, 0], vec![1, 1], vec![0, 2]]),
        ("<(3,0),(0,3),(1,1)>", 2, vec![vec![3, 0], vec![0, 3], vec![1, 1]]),
        ("<(1,2),(2,1)>", 2, vec![vec![1, 2], vec![2, 1]]),
        ("A1", 2, vec![vec![1, 0], vec![1, 1], vec![1, 2]]),
        ("<(2,0),(0,1),(1,2)>", 2, vec![vec![2, 0], vec![0, 1], vec![1, 2]]),
        ("<(1,0),(0,2),(1,1)>", 2, vec![vec![1, 0], vec![0, 2], vec![1, 1]]),
        ("<(3,0),(2,1),(0,3)>", 2, vec![vec![3, 0], vec![2, 1], vec![0, 3]]),
        ("N3", 3, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]),
        (
            "<e1,e2,e3,(1,1,2)>",
            3,
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 2]],
        ),
        ("<e1,e2,(1,1,2)>", 3, vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 2]]),
        (
            "conifold",
            3,
            vec![vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 1]],
        ),
        (
            "<e1,e2,2e3,3e3>",
            3,
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 2], vec![0, 0, 3]],
        ),
        ("<e1,(1,2,0),e3>", 3, vec![vec![1, 0, 0], vec![1, 2, 0], vec![0, 0, 1]]),
        (
            "<e1,e2,(1,1,2),(1,0,1)>",
            3,
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 2], vec![1, 0, 1]],
        ),
    ];
    raw.into_iter()
        .map(|(name, d, gens)| (name, AffineMonoid::new(d, &gens).unwrap()))
        .collect()
}

/// The corpus with every monoid replaced by its saturation (computed by the
/// brute-force oracle).
pub fn fs_corpus() -> Vec<(&'static str, AffineMonoid)> {
    corpus()
        .into_iter()
        .map(|(name, m)| {
            let gens = brute_hilbert_basis(&m);
            (name, AffineMonoid::new(m.ambient_dim(), &gens).unwrap())
        })
        .collect()
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Determinant by fraction-free elimination.
pub fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// gcd of all k×k minors of `m` (rows × cols), the k-th determinantal divisor.
pub fn minor_gcd(m: &[Vec<i64>], k: usize) -> i128 {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut g = 0i128;
    for rs in subsets(rows, k) {
        for cs in subsets(cols, k) {
            let sub: Vec<Vec<i128>> = rs
                .iter()
                .map(|&r| cs.iter().map(|&c| i128::from(m[r][c])).collect())
                .collect();
            g = gcd(g, det(&sub));
        }
    }
    g
}

/// Rank over ℚ.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    (0..=rows.len().min(cols))
        .rev()
        .find(|&k| k == 0 || minor_gcd(rows, k) != 0)
        .unwrap_or(0)
}

/// Invariant factors (entries > 1) and free rank of `ℤ^rows / M·ℤ^cols` via
/// determinantal divisors.
pub fn invariant_factors_by_minors(m: &[Vec<i64>]) -> (Vec<i128>, usize) {
    let rows = m.len();
    let r = rank(m);
    let mut prev = 1i128;
    let mut factors = Vec::new();
    for k in 1..=r {
        let dk = minor_gcd(m, k);
        let f = dk / prev;
        if f > 1 {
            factors.push(f);
        }
        prev = dk;
    }
    (factors, rows - r)
}

/// Order of `ℤ^r / M·ℤ^c` for `M` of full row rank, by enumerating cosets.
///
/// A nonsingular `r×r` column submatrix `B` is chosen; cosets of `Bℤ^r` are
/// keyed exactly by `adj(B)·x mod |det B|`. The cosets are enumerated by
/// breadth-first search from `0` along unit vectors, then the subgroup
/// generated by the remaining columns is enumerated in the same key space.
/// Returns `None` when `|det B|` exceeds `limit`.
pub fn coset_order(m: &[Vec<i64>], limit: i128) -> Option<i128> {
    let r = m.len();
    let c = m[0].len();
    let mut best: Option<(Vec<usize>, i128)> = None;
    for cs in subsets(c, r) {
        let sub: Vec<Vec<i128>> = (0..r)
            .map(|i| cs.iter().map(|&j| i128::from(m[i][j])).collect())
            .collect();
        let d = det(&sub).abs();
        if d != 0 && best.as_ref().is_none_or(|(_, b)| d < *b) {
            best = Some((cs, d));
        }
    }
    let (cols, d) = best?;
    if d > limit {
        return None;
    }
    let b: Vec<Vec<i128>> = (0..r)
        .map(|i| cols.iter().map(|&j| i128::from(m[i][j])).collect())
        .collect();
    let adj = adjugate(&b);
    let key = |x: &[i128]| -> Vec<i128> {
        adj.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum::<i128>().rem_euclid(d))
            .collect()
    };
    let add = |a: &[i128], b: &[i128]| -> Vec<i128> { a.iter().zip(b).map(|(x, y)| (x + y).rem_euclid(d)).collect() };
    let closure = |gens: &[Vec<i128>]| -> usize {
        let zero = vec![0i128; r];
        let mut seen: HashSet<Vec<i128>> = HashSet::from([zero.clone()]);
        let mut queue = VecDeque::from([zero]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = add(&x, g);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        seen.len()
    };
    let units: Vec<Vec<i128>> = (0..r)
        .map(|i| key(&(0..r).map(|j| i128::from(i == j)).collect::<Vec<_>>()))
        .collect();
    let all = closure(&units) as i128;
    assert_eq!(all, d, "adjugate keys must enumerate ℤ^r/Bℤ^r");
    let others: Vec<Vec<i128>> = (0..c)
        .filter(|j| !cols.contains(j))
        .map(|j| key(&(0..r).map(|i| i128::from(m[i][j])).collect::<Vec<_>>()))
        .collect();
    let h = closure(&others) as i128;
    Some(all / h)
}

pub fn adjugate(b: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = b.len();
    if n == 1 {
        return vec![vec![1]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let minor: Vec<Vec<i128>> = (0..n)
                        .filter(|&r| r != j)
                        .map(|r| (0..n).filter(|&c| c != i).map(|c| b[r][c]).collect())
                        .collect();
                    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                    sign * det(&minor)
                })
                .collect()
        })
        .collect()
}

/// Exact solve of `Σ λ_i g_i = x` over an independent family, if `x` is in
/// the span; coefficients as (numerators, common denominator > 0).
fn solve_rational(gens: &[&Vec<i64>], x: &[i64]) -> Option<(Vec<i128>, i128)> {
    let k = gens.len();
    let d = x.len();
    for rows in subsets(d, k) {
        let b: Vec<Vec<i128>> = rows
            .iter()
            .map(|&r| gens.iter().map(|g| i128::from(g[r])).collect())
            .collect();
        let dt = det(&b);
        if dt == 0 {
            continue;
        }
        let adj = adjugate(&b);
        let rhs: Vec<i128> = rows.iter().map(|&r| i128::from(x[r])).collect();
        let mut num: Vec<i128> = adj
            .iter()
            .map(|row| row.iter().zip(&rhs).map(|(a, b)| a * b).sum())
            .collect();
        let mut den = dt;
        if den < 0 {
            den = -den;
            num.iter_mut().for_each(|v| *v = -*v);
        }
        let consistent = (0..d).all(|r| {
            let s: i128 = gens.iter().zip(&num).map(|(g, l)| i128::from(g[r]) * l).sum();
            s == i128::from(x[r]) * den
        });
        return consistent.then_some((num, den));
    }
    None
}

fn independent_subsets(gens: &[Vec<i64>]) -> Vec<Vec<&Vec<i64>>> {
    let k = rank(gens);
    subsets(gens.len(), k)
        .into_iter()
        .map(|s| s.iter().map(|&i| &gens[i]).collect::<Vec<_>>())
        .filter(|s: &Vec<&Vec<i64>>| rank(&s.iter().map(|g| (*g).clone()).collect::<Vec<_>>()) == k)
        .collect()
}

/// Cone membership by Carathéodory: `x` is a nonnegative combination of some
/// maximal independent subfamily.
pub fn in_cone(gens: &[Vec<i64>], x: &[i64]) -> bool {
    if x.iter().all(|&v| v == 0) {
        return true;
    }
    independent_subsets(gens)
        .iter()
        .any(|s| solve_rational(s, x).is_some_and(|(num, _)| num.iter().all(|&l| l >= 0)))
}

/// Membership in the group generated by `gens`: cosets of the sublattice
/// spanned by an independent subfamily `B` are keyed by the numerators of
/// `B`-coordinates modulo the denominator; the remaining generators span a
/// finite subgroup of that key space.
pub struct GroupOracle {
    basis: Vec<Vec<i64>>,
    den: i128,
    subgroup: HashSet<Vec<i128>>,
}

impl GroupOracle {
    pub fn new(gens: &[Vec<i64>]) -> Self {
        let basis: Vec<Vec<i64>> = independent_subsets(gens)
            .into_iter()
            .next()
            .map(|s| s.into_iter().cloned().collect())
            .unwrap_or_default();
        let mut oracle = GroupOracle {
            basis,
            den: 1,
            subgroup: HashSet::new(),
        };
        // common denominator: |det| of a nonsingular square block of B
        oracle.den = oracle.block_det();
        let keys: Vec<Vec<i128>> = gens.iter().map(|g| oracle.key(g).unwrap()).collect();
        let k = oracle.basis.len();
        let zero = vec![0i128; k];
        let mut seen: HashSet<Vec<i128>> = HashSet::from([zero.clone()]);
        let mut queue = VecDeque::from([zero]);
        while let Some(x) = queue.pop_front() {
            for g in &keys {
                let y: Vec<i128> = x.iter().zip(g).map(|(a, b)| (a + b).rem_euclid(oracle.den)).collect();
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        oracle.subgroup = seen;
        oracle
    }

    fn block_det(&self) -> i128 {
        let k = self.basis.len();
        if k == 0 {
            return 1;
        }
        let d = self.basis[0].len();
        subsets(d, k)
            .into_iter()
            .map(|rows| {
                let b: Vec<Vec<i128>> = rows
                    .iter()
                    .map(|&r| self.basis.iter().map(|g| i128::from(g[r])).collect())
                    .collect();
                det(&b).abs()
            })
            .find(|&v| v != 0)
            .unwrap()
    }

    fn key(&self, x: &[i64]) -> Option<Vec<i128>> {
        if self.basis.is_empty() {
            return x.iter().all(|&v| v == 0).then(Vec::new);
        }
        let refs: Vec<&Vec<i64>> = self.basis.iter().collect();
        let (num, den) = solve_rational(&refs, x)?;
        // rescale to the common denominator
        let f = self.den / den;
        assert_eq!(f * den, self.den);
        Some(num.iter().map(|v| (v * f).rem_euclid(self.den)).collect())
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.key(x).is_some_and(|k| self.subgroup.contains(&k))
    }
}

/// Coordinatewise bound for Hilbert basis elements of an orthant monoid: the
/// sum of the generators.
pub fn box_bound(gens: &[Vec<i64>]) -> Vec<i64> {
    let d = gens[0].len();
    (0..d).map(|j| gens.iter().map(|g| g[j]).sum()).collect()
}

pub fn box_points(bound: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &b in bound {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=b).map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}

/// Nonzero points of `L ∩ cone(P)` in the box, where `L` is `P^gp` or,
/// with `ambient`, all of `ℤ^d`.
pub fn cone_points(m: &AffineMonoid, ambient: bool) -> Vec<Vec<i64>> {
    let gens = m.generators().to_vec();
    assert!(gens.iter().flatten().all(|&x| x >= 0), "corpus lies in the orthant");
    let group = GroupOracle::new(&gens);
    box_points(&box_bound(&gens))
        .into_iter()
        .filter(|x| x.iter().any(|&v| v != 0))
        .filter(|x| in_cone(&gens, x) && (ambient || group.contains(x)))
        .collect()
}

/// Hilbert basis of `P^gp ∩ cone(P)` by exhaustive irreducibility check.
pub fn brute_hilbert_basis(m: &AffineMonoid) -> Vec<Vec<i64>> {
    irreducibles(cone_points(m, false))
}

/// Hilbert basis of `ℤ^d ∩ cone(P)`.
pub fn brute_ambient_hilbert_basis(m: &AffineMonoid) -> Vec<Vec<i64>> {
    irreducibles(cone_points(m, true))
}

fn irreducibles(pts: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let set: HashSet<&Vec<i64>> = pts.iter().collect();
    let mut hb: Vec<Vec<i64>> = pts
        .iter()
        .filter(|x| {
            !pts.iter().any(|y| {
                y != *x && {
                    let diff: Vec<i64> = x.iter().zip(y.iter()).map(|(a, b)| a - b).collect();
                    set.contains(&diff)
                }
            })
        })
        .cloned()
        .collect();
    hb.sort();
    hb
}

/// Elements of `P` in the box `[0, bound]`, by closure under adding generators.
pub fn monoid_points(gens: &[Vec<i64>], bound: &[i64]) -> HashSet<Vec<i64>> {
    let zero = vec![0i64; bound.len()];
    let mut seen = HashSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y: Vec<i64> = x.iter().zip(g).map(|(a, b)| a + b).collect();
            if y.iter().zip(bound).all(|(a, b)| a <= b) && seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Small deterministic generator for test inputs (SplitMix64).
pub struct Mix(pub u64);

impl Mix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next() % (hi - lo + 1) as u64) as i64
    }

    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Brute-force orbit–stabilizer check on every face of a saturated monoid at
/// level `n`: the orbit of one lift is enumerated by acting with every element
/// of `μ_n(P)`, the stabilizer by testing every element, and the stabilizer
/// structure is compared with `μ_n(P/F)`.
pub fn check_orbit_stabilizer(m: &std::sync::Arc<AffineMonoid>, n: u64, seed: u64) -> Result<usize, String> {
    use knroot::points::{sample_rng, CPoint};
    use knroot::rootstack::{mu_act, mu_n, root_fiber, same_mu_orbit, RootFiberPoint};
    use rand::Rng;

    let mu = mu_n(m, n).map_err(|e| e.to_string())?;
    let elements = mu.elements.clone().ok_or("μ_n too large to enumerate")?;
    let k = m.rank() as u32;
    let total = n.pow(k);
    if elements.len() as u64 != total {
        return Err(format!("|μ_n| = {} ≠ {total}", elements.len()));
    }
    let key = |p: &RootFiberPoint| -> Vec<i64> {
        // angles on the face basis are multiples of 2π/n away from the first lift
        p.point
            .character()
            .angles()
            .iter()
            .map(|a| ((a * n as f64 / std::f64::consts::TAU).round() as i64).rem_euclid(n as i64))
            .collect()
    };
    let faces = m.faces().map_err(|e| e.to_string())?;
    for f in faces {
        let mut rng = sample_rng(seed, f.index as u64);
        let modulus: Vec<f64> = (0..f.rank()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // base angles that are multiples of 2π keep the lift angles on a grid
        let angles: Vec<f64> = (0..f.rank())
            .map(|_| std::f64::consts::TAU * rng.gen_range(-3i64..=3) as f64)
            .collect();
        let x = CPoint::new(m.clone(), f.index, &modulus, &angles).map_err(|e| e.to_string())?;
        let fiber = root_fiber(&x, n).map_err(|e| e.to_string())?;
        let first = &fiber.transversal[0];
        let mut orbit = HashSet::new();
        let mut stab = 0u64;
        let first_key = key(first);
        for g in &elements {
            let y = mu_act(&mu, g, first).map_err(|e| e.to_string())?;
            if !y.is_consistent(1e-9) {
                return Err("μ_n moved a lift off the fiber".into());
            }
            let ky = key(&y);
            if ky == first_key {
                stab += 1;
            }
            orbit.insert(ky);
        }
        let orbit_size = orbit.len() as u64;
        if orbit_size * stab != total {
            return Err(format!("face {:?}: {orbit_size}·{stab} ≠ {total}", f.generator_indices));
        }
        if fiber.transversal.len() as u64 != orbit_size {
            return Err(format!(
                "face {:?}: {} lifts, orbit {orbit_size}",
                f.generator_indices,
                fiber.transversal.len()
            ));
        }
        for p in &fiber.transversal {
            if !orbit.contains(&key(p)) || same_mu_orbit(&mu, first, p, 1e-9).map_err(|e| e.to_string())?.is_none() {
                return Err(format!("face {:?}: lift outside the orbit", f.generator_indices));
            }
        }
        if fiber.stabilizer.order() != Some(stab) {
            return Err(format!(
                "face {:?}: stabilizer order {:?} ≠ {stab}",
                f.generator_indices,
                fiber.stabilizer.order()
            ));
        }
        let quotient = m.char_stalk(f).map_err(|e| e.to_string())?.monoid;
        let mu_q = mu_n(&std::sync::Arc::new(quotient), n).map_err(|e| e.to_string())?;
        if mu_q.group.invariant_factors != fiber.stabilizer.dual.invariant_factors
            || mu_q.group.free_rank != fiber.stabilizer.dual.free_rank
        {
            return Err(format!("face {:?}: stabilizer ≇ μ_n(P/F)", f.generator_indices));
        }
    }
    Ok(faces.len())
}
