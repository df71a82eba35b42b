//! Exact arithmetic helpers: rational parsing and formatting, Gaussian
//! elimination, and a phase-one simplex used for convex-hull membership.
//!
//! The linear-algebra routines are generic over any exact ordered field
//! (`Ratio<i64>`, `BigRational`, ...).

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::Rat;

/// Exact ordered field usable by the routines in this module.
pub trait ExactField: Clone + PartialOrd + Num + Signed + Debug {}
impl<T: Clone + PartialOrd + Num + Signed + Debug> ExactField for T {}

/// Rational vector in ambient coordinates.
pub type QVec = Vec<Rat>;

pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(n, d)
}

pub fn int(n: i64) -> Rat {
    Ratio::from_integer(n)
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn fmt_rat(q: &Rat) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `-0.25`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Ratio::new(p, q));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) || fp.len() > 15 {
            return None;
        }
        let neg = ip.starts_with('-');
        let ip_abs: i64 = ip.trim_start_matches(['-', '+']).parse().unwrap_or(0);
        let den = 10i64.checked_pow(fp.len() as u32)?;
        let f: i64 = fp.parse().ok()?;
        let num = ip_abs.checked_mul(den)?.checked_add(f)?;
        let r = Ratio::new(num, den);
        return Some(if neg { -r } else { r });
    }
    s.parse::<i64>().ok().map(Ratio::from_integer)
}

pub fn to_f64(q: &Rat) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn vec_to_f64(v: &[Rat]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: &Rat, a: &[Rat]) -> QVec {
    a.iter().map(|x| c * x).collect()
}

pub fn neg(a: &[Rat]) -> QVec {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero(a: &[Rat]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Dense square rational matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMat {
    pub n: usize,
    pub data: Vec<Rat>,
}

impl QMat {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Rat::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = int(1);
        }
        QMat { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.n + j]
    }

    pub fn apply(&self, v: &[Rat]) -> QVec {
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        let n = self.n;
        let mut data = vec![Rat::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * &other.data[k * n + j];
                }
            }
        }
        QMat { n, data }
    }

    pub fn transpose(&self) -> QMat {
        let n = self.n;
        let mut data = vec![Rat::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        QMat { n, data }
    }

    pub fn is_identity(&self) -> bool {
        *self == QMat::identity(self.n)
    }

    /// Block-diagonal sum.
    pub fn direct_sum(blocks: &[&QMat]) -> QMat {
        let n: usize = blocks.iter().map(|b| b.n).sum();
        let mut out = QMat { n, data: vec![Rat::zero(); n * n] };
        let mut off = 0;
        for b in blocks {
            for i in 0..b.n {
                for j in 0..b.n {
                    out.data[(off + i) * n + off + j] = *b.get(i, j);
                }
            }
            off += b.n;
        }
        out
    }
}

/// Solves `a x = b` exactly (a is `m x n`); returns one solution if consistent.
pub fn solve<T: ExactField>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut rows: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = T::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in c..=n {
                    let t = rows[r][j].clone() * f.clone();
                    rows[i][j] = rows[i][j].clone() - t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m {
            break;
        }
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut x = vec![T::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][n].clone();
    }
    Some(x)
}

/// Finds `x >= 0` with `a x = b`, or `None` if infeasible.
///
/// Phase one of the simplex method with Bland's rule, so it terminates on
/// degenerate problems.
pub fn lp_feasible<T: ExactField>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    // Tableau columns: n originals, m artificials, rhs.
    let width = n + m + 1;
    let mut t: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let flip = b[i] < T::zero();
        let mut row = vec![T::zero(); width];
        for j in 0..n {
            row[j] = if flip { -a[i][j].clone() } else { a[i][j].clone() };
        }
        row[n + i] = T::one();
        row[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(row);
    }
    // Objective row: minimize sum of artificials, expressed in reduced form.
    let mut obj = vec![T::zero(); width];
    for row in &t {
        for j in 0..n {
            obj[j] = obj[j].clone() - row[j].clone();
        }
        obj[width - 1] = obj[width - 1].clone() - row[width - 1].clone();
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..n + m).find(|&j| obj[j] < T::zero()) else {
            break;
        };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if t[i][enter] > T::zero() {
                let ratio = t[i][width - 1].clone() / t[i][enter].clone();
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((p, _)) = leave else {
            // Unbounded direction cannot occur for a bounded phase-one objective.
            return None;
        };
        let inv = T::one() / t[p][enter].clone();
        for x in t[p].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m {
            if i != p && !t[i][enter].is_zero() {
                let f = t[i][enter].clone();
                for j in 0..width {
                    let v = t[p][j].clone() * f.clone();
                    t[i][j] = t[i][j].clone() - v;
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for j in 0..width {
                let v = t[p][j].clone() * f.clone();
                obj[j] = obj[j].clone() - v;
            }
        }
        basis[p] = enter;
    }
    if !obj[width - 1].is_zero() {
        return None;
    }
    let mut x = vec![T::zero(); n];
    for (i, &bi) in basis.iter().enumerate() {
        if bi < n {
            x[bi] = t[i][width - 1].clone();
        }
    }
    Some(x)
}

/// Exact test of `p ∈ Conv(points)`.
pub fn in_convex_hull<T: ExactField>(points: &[Vec<T>], p: &[T]) -> bool {
    if points.is_empty() {
        return false;
    }
    let dim = p.len();
    let mut a: Vec<Vec<T>> = (0..dim)
        .map(|k| points.iter().map(|q| q[k].clone()).collect())
        .collect();
    a.push(vec![T::one(); points.len()]);
    let mut b: Vec<T> = p.to_vec();
    b.push(T::one());
    lp_feasible(&a, &b).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn parse_and_format_roundtrip() {
        for s in ["3", "-7/2", "0", "5/3"] {
            assert_eq!(fmt_rat(&parse_rat(s).unwrap()), s);
        }
        assert_eq!(parse_rat("-0.25"), Some(rat(-1, 4)));
        assert_eq!(parse_rat("1.5"), Some(rat(3, 2)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("x"), None);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        assert_eq!(solve(&a, &[int(3), int(1)]), Some(vec![int(2), int(1)]));
        let a = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert_eq!(solve(&a, &[int(1), int(3)]), None);
    }

    #[test]
    fn hull_membership_square() {
        let sq = vec![
            vec![int(0), int(0)],
            vec![int(1), int(0)],
            vec![int(0), int(1)],
            vec![int(1), int(1)],
        ];
        assert!(in_convex_hull(&sq, &[rat(1, 2), rat(1, 3)]));
        assert!(in_convex_hull(&sq, &[int(1), rat(1, 2)]));
        assert!(!in_convex_hull(&sq, &[rat(11, 10), rat(1, 2)]));
    }

    #[test]
    fn hull_membership_bigrational() {
        let b = |n: i64| BigRational::from_integer(BigInt::from(n));
        let tri = vec![vec![b(0), b(0)], vec![b(4), b(0)], vec![b(0), b(4)]];
        assert!(in_convex_hull(&tri, &[b(2), b(2)]));
        assert!(!in_convex_hull(&tri, &[b(3), b(2)]));
    }
}
