use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

struct Work {
    a: Vec<Vec<BigInt>>,
}

impl Work {
    fn new(m: &IntMatrix) -> Self {
        Work { a: m.row_vecs() }
    }

    /// row[dst] -= q * row[src]
    fn row_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        let (d, s) = if dst < src {
            let (lo, hi) = self.a.split_at_mut(src);
            (&mut lo[dst], &hi[0])
        } else {
            let (lo, hi) = self.a.split_at_mut(dst);
            (&mut hi[0], &lo[src])
        };
        for (x, y) in d.iter_mut().zip(s.iter()) {
            *x -= q * y;
        }
    }

    fn col_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for row in &mut self.a {
            let t = q * &row[src];
            row[dst] -= t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.a[i] {
            *x = -&*x;
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in &mut self.a {
            row.swap(i, j);
        }
    }

    fn into_matrix(self, cols: usize) -> IntMatrix {
        IntMatrix::from_big_rows(cols, self.a).expect("shape preserved")
    }
}

/// Row-style Hermite normal form: returns `(H, U)` with `U·M = H`, `U` unimodular.
///
/// `H` is in row echelon form with positive pivots, entries above each pivot
/// reduced into `[0, pivot)`, and zero rows last. The form is canonical for the
/// row lattice of `M`.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut h = Work::new(m);
    let mut u = Work::new(&IntMatrix::identity(rows));
    let mut p = 0;
    for col in 0..cols {
        if p == rows {
            break;
        }
        loop {
            let best = (p..rows)
                .filter(|&r| !h.a[r][col].is_zero())
                .min_by(|&x, &y| h.a[x][col].abs().cmp(&h.a[y][col].abs()).then(x.cmp(&y)));
            let Some(best) = best else { break };
            h.a.swap(p, best);
            u.a.swap(p, best);
            let mut done = true;
            for r in p + 1..rows {
                if h.a[r][col].is_zero() {
                    continue;
                }
                let q = h.a[r][col].div_floor(&h.a[p][col]);
                h.row_sub(r, p, &q);
                u.row_sub(r, p, &q);
                if !h.a[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.a[p][col].is_zero() {
            continue;
        }
        if h.a[p][col].is_negative() {
            h.negate_row(p);
            u.negate_row(p);
        }
        for r in 0..p {
            let q = h.a[r][col].div_floor(&h.a[p][col]);
            h.row_sub(r, p, &q);
            u.row_sub(r, p, &q);
        }
        p += 1;
    }
    (h.into_matrix(cols), u.into_matrix(rows))
}

/// Smith normal form: returns `(D, U, V)` with `U·M·V = D`.
///
/// `D` is diagonal with non-negative entries `d_1 | d_2 | …`; `U` and `V` are
/// unimodular. Pivot choice is deterministic, so equal inputs give equal outputs.
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = Work::new(m);
    let mut u = Work::new(&IntMatrix::identity(rows));
    // V is tracked transposed so column operations become row operations.
    let mut vt = Work::new(&IntMatrix::identity(cols));

    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = &a.a[i][j];
                    if x.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| x.abs() < a.a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return finish(a, u, vt, rows, cols);
            };
            a.a.swap(t, bi);
            u.a.swap(t, bi);
            a.swap_cols(t, bj);
            vt.a.swap(t, bj);

            let mut clean = true;
            for i in t + 1..rows {
                if a.a[i][t].is_zero() {
                    continue;
                }
                let q = a.a[i][t].div_floor(&a.a[t][t]);
                a.row_sub(i, t, &q);
                u.row_sub(i, t, &q);
                clean &= a.a[i][t].is_zero();
            }
            for j in t + 1..cols {
                if a.a[t][j].is_zero() {
                    continue;
                }
                let q = a.a[t][j].div_floor(&a.a[t][t]);
                a.col_sub(j, t, &q);
                vt.row_sub(j, t, &q);
                clean &= a.a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let pivot = a.a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a.a[i][j].is_multiple_of(&pivot)));
            match bad {
                Some(i) => {
                    let minus_one = BigInt::from(-1);
                    a.row_sub(t, i, &minus_one);
                    u.row_sub(t, i, &minus_one);
                }
                None => break,
            }
        }
        if a.a[t][t].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    finish(a, u, vt, rows, cols)
}

fn finish(mut a: Work, mut u: Work, vt: Work, rows: usize, cols: usize) -> (IntMatrix, IntMatrix, IntMatrix) {
    for t in 0..rows.min(cols) {
        if a.a[t][t].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    (
        a.into_matrix(cols),
        u.into_matrix(rows),
        vt.into_matrix(cols).transpose(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_hnf_shape(h: &IntMatrix) {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for i in 0..h.rows() {
            let pivot = (0..h.cols()).find(|&j| !h.get(i, j).is_zero());
            match pivot {
                None => seen_zero = true,
                Some(pc) => {
                    assert!(!seen_zero, "nonzero row after zero row");
                    assert!(last_pivot.is_none_or(|lp| pc > lp));
                    let pv = h.get(i, pc);
                    assert!(pv.is_positive());
                    for r in 0..i {
                        let x = h.get(r, pc);
                        assert!(!x.is_negative() && x < pv, "entry above pivot not reduced");
                    }
                    last_pivot = Some(pc);
                }
            }
        }
    }

    #[test]
    fn hnf_identity_and_zero() {
        let i3 = IntMatrix::identity(3);
        assert_eq!(hnf(&i3), (i3.clone(), i3.clone()));
        let z = IntMatrix::zeros(2, 3);
        let (h, u) = hnf(&z);
        assert_eq!(h, z);
        assert_eq!(u, IntMatrix::identity(2));
    }

    #[test]
    fn hnf_small_example() {
        let m = IntMatrix::from_rows(&[[2, 4], [6, 8]]);
        let (h, u) = hnf(&m);
        assert_eq!(u.mul(&m).unwrap(), h);
        assert!(u.is_unimodular());
        check_hnf_shape(&h);
        assert_eq!(h, IntMatrix::from_rows(&[[2, 0], [0, 4]]));
    }

    #[test]
    fn snf_small_examples() {
        let m = IntMatrix::from_rows(&[[2, 4], [6, 8]]);
        let (d, u, v) = snf(&m);
        assert_eq!(u.mul(&m).unwrap().mul(&v).unwrap(), d);
        assert_eq!(d, IntMatrix::from_rows(&[[2, 0], [0, 4]]));
        let d5 = IntMatrix::scalar(3, 5);
        assert_eq!(snf(&d5).0, d5);
        assert_eq!(snf(&IntMatrix::from_rows(&[[1]])).0, IntMatrix::from_rows(&[[1]]));
    }

    #[test]
    fn snf_fixes_divisibility() {
        let m = IntMatrix::from_rows(&[[2, 0], [0, 3]]);
        let (d, u, v) = snf(&m);
        assert_eq!(d, IntMatrix::from_rows(&[[1, 0], [0, 6]]));
        assert_eq!(u.mul(&m).unwrap().mul(&v).unwrap(), d);
    }

    #[test]
    fn snf_rectangular_and_negative() {
        let m = IntMatrix::from_rows(&[[-3, 6, 9], [0, 0, 0]]);
        let (d, u, v) = snf(&m);
        assert_eq!(d, IntMatrix::from_rows(&[[3, 0, 0], [0, 0, 0]]));
        assert_eq!(u.mul(&m).unwrap().mul(&v).unwrap(), d);
        assert!(u.is_unimodular() && v.is_unimodular());
    }
}
