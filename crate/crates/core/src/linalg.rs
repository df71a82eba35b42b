//! Dense linear-algebra helpers for the numerical layer.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;

use crate::{Error, Mat, Result, Vector};

/// Default relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

static RANK_TOL_BITS: AtomicU64 = AtomicU64::new(RANK_TOL.to_bits());

/// The rank threshold in force (process-wide, `RANK_TOL` unless overridden).
pub fn rank_tol() -> f64 {
    f64::from_bits(RANK_TOL_BITS.load(Ordering::Relaxed))
}

/// Overrides the rank threshold for the whole process.
pub fn set_rank_tol(tol: f64) {
    RANK_TOL_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

/// Singular value decomposition with descending singular values and a full
/// set of right singular vectors (`v` is n×n even when the matrix is wide).
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

pub fn svd_full(a: &Mat) -> Svd {
    let (m, n) = a.shape();
    let padded;
    let a = if m < n {
        padded = a.clone().resize_vertically(n, 0.0);
        &padded
    } else {
        a
    };
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v requested").transpose();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = Mat::from_fn(m, order.len(), |r, c| u[(r, order[c])]);
    let v = Mat::from_fn(n, order.len(), |r, c| v[(r, order[c])]);
    Svd { u, s, v }
}

/// Orthonormal basis (columns) of the null space, thresholded at
/// `rel_tol · σ_max`.
pub fn null_space(a: &Mat, rel_tol: f64) -> Mat {
    let n = a.ncols();
    if a.nrows() == 0 {
        return Mat::identity(n, n);
    }
    let svd = svd_full(a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Mat::identity(n, n);
    }
    let rank = svd.s.iter().filter(|&&s| s > rel_tol * smax).count();
    svd.v.columns(rank, n - rank).into_owned()
}

/// The `k` right singular vectors with the smallest singular values, and the
/// singular values themselves (ascending).
pub fn smallest_right_singular(a: &Mat, k: usize) -> (Mat, Vec<f64>) {
    let n = a.ncols();
    let svd = svd_full(a);
    let basis = svd.v.columns(n - k, k).into_owned();
    let mut s: Vec<f64> = svd.s[n - k..].to_vec();
    s.reverse();
    (basis, s)
}

/// Orthonormal basis of the column space.
pub fn orth(a: &Mat, rel_tol: f64) -> Mat {
    if a.ncols() == 0 {
        return Mat::zeros(a.nrows(), 0);
    }
    let svd = svd_full(a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let rank = svd.s.iter().filter(|&&s| s > rel_tol * smax && s > 0.0).count();
    svd.u.columns(0, rank).into_owned()
}

/// Orthonormalization of a full-rank set of columns (thin QR).
pub fn orthonormalize(a: &Mat) -> Mat {
    if a.ncols() == 0 {
        return a.clone();
    }
    a.clone().qr().q()
}

pub fn op_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Smallest singular value (zero for an empty matrix).
pub fn min_singular(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().min()
}

/// Orthogonal projector onto the span of orthonormal columns.
pub fn projector(basis: &Mat) -> Mat {
    basis * basis.transpose()
}

/// Hausdorff distance between the unit spheres' spans: `‖P_A − P_B‖₂`,
/// the sine of the largest principal angle for equal dimensions.
pub fn subspace_distance(a: &Mat, b: &Mat) -> f64 {
    let pa = projector(&orthonormalize(a));
    let pb = projector(&orthonormalize(b));
    op_norm(&(pa - pb))
}

/// Orthonormal basis of the orthogonal complement of the span of `basis`.
pub fn orth_complement(basis: &Mat) -> Mat {
    let n = basis.nrows();
    if basis.ncols() == 0 {
        return Mat::identity(n, n);
    }
    null_space(&basis.transpose(), rank_tol())
}

/// Operator norm of `g` restricted to the span of the columns of `basis`.
pub fn restricted_norm(g: &Mat, basis: &Mat) -> f64 {
    op_norm(&(g * orthonormalize(basis)))
}

/// Intersection of two subspaces whose expected dimension is known.
pub fn intersect(a: &Mat, b: &Mat, dim: usize) -> Result<Mat> {
    if dim == 0 {
        return Ok(Mat::zeros(a.nrows(), 0));
    }
    let n = a.nrows();
    let (ka, kb) = (a.ncols(), b.ncols());
    let mut stacked = Mat::zeros(n, ka + kb);
    stacked.columns_mut(0, ka).copy_from(a);
    stacked.columns_mut(ka, kb).copy_from(&(-b));
    if ka + kb < dim {
        return Err(Error::NearDegenerate("subspaces too small to intersect".into()));
    }
    let (v, s) = smallest_right_singular(&stacked, dim);
    if s[dim - 1] > 1e-6 {
        return Err(Error::NearDegenerate(format!("subspace intersection residual {:.3e}", s[dim - 1])));
    }
    Ok(orthonormalize(&(a * v.rows(0, ka))))
}

/// Invariant subspace of `b` belonging to its `k` eigenvalues of largest
/// modulus, by orthogonal iteration started from the top left singular
/// vectors.
pub fn top_invariant_subspace(b: &Mat, k: usize) -> Result<Mat> {
    let n = b.nrows();
    if k == 0 {
        return Ok(Mat::zeros(n, 0));
    }
    if k == n {
        return Ok(Mat::identity(n, n));
    }
    let mut q = svd_full(b).u.columns(0, k).into_owned();
    let mut prev = f64::INFINITY;
    for it in 0..5000 {
        let next = orthonormalize(&(b * &q));
        let d = op_norm(&(projector(&next) - projector(&q)));
        q = next;
        if d < 1e-13 || (it > 30 && d < 1e-9 && d > 0.5 * prev) {
            return Ok(q);
        }
        prev = d;
    }
    Err(Error::NearDegenerate(format!("orthogonal iteration for the top {k}-space did not converge")))
}

/// Sorted-value clustering: consecutive values closer than `tol` share a
/// cluster. Returns index ranges into `values`.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i] - values[i - 1]).abs() > tol {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Exponent vectors of the degree-`k` monomials in `n` variables, in
/// graded-lex order (`x₁ᵏ` first).
pub fn monomials(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == n {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=left).rev() {
            cur.push(a);
            rec(i + 1, n, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `sqrt(k!/a!)`: the rescaling making monomial `a` a unit vector for the
/// inner product induced from `V^{⊗k}`.
fn monomial_scale(a: &[usize]) -> f64 {
    let k: usize = a.iter().sum();
    (factorial(k) / a.iter().map(|&x| factorial(x)).product::<f64>()).sqrt()
}

/// Basis bookkeeping for `Symᵏ ℝⁿ`.
#[derive(Clone, Debug)]
pub struct SymBasis {
    pub monomials: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    scale: Vec<f64>,
}

impl SymBasis {
    pub fn new(n: usize, k: usize) -> Self {
        let monomials = monomials(n, k);
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let scale = monomials.iter().map(|m| monomial_scale(m)).collect();
        SymBasis { monomials, index, scale }
    }

    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn index_of(&self, m: &[usize]) -> Option<usize> {
        self.index.get(m).copied()
    }

    fn rescale(&self, raw: Mat) -> Mat {
        let d = self.dim();
        Mat::from_fn(d, d, |r, c| raw[(r, c)] * self.scale[c] / self.scale[r])
    }

    /// `Symᵏ(g)` in the orthonormal monomial basis.
    pub fn power(&self, g: &Mat) -> Mat {
        let n = g.nrows();
        let d = self.dim();
        let mut raw = Mat::zeros(d, d);
        for (col, a) in self.monomials.iter().enumerate() {
            let mut poly: BTreeMap<Vec<usize>, f64> = BTreeMap::from([(vec![0; n], 1.0)]);
            for (i, &ai) in a.iter().enumerate() {
                for _ in 0..ai {
                    let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
                    for (m, c) in &poly {
                        for j in 0..n {
                            let gji = g[(j, i)];
                            if gji == 0.0 {
                                continue;
                            }
                            let mut m2 = m.clone();
                            m2[j] += 1;
                            *next.entry(m2).or_insert(0.0) += c * gji;
                        }
                    }
                    poly = next;
                }
            }
            for (m, c) in poly {
                raw[(self.index[&m], col)] += c;
            }
        }
        self.rescale(raw)
    }

    /// Derivative of `Symᵏ` at the identity, applied to `x`.
    pub fn derivation(&self, x: &Mat) -> Mat {
        let n = x.nrows();
        let d = self.dim();
        let mut raw = Mat::zeros(d, d);
        for (col, a) in self.monomials.iter().enumerate() {
            for i in 0..n {
                if a[i] == 0 {
                    continue;
                }
                for j in 0..n {
                    let mut b = a.clone();
                    b[i] -= 1;
                    b[j] += 1;
                    raw[(self.index[&b], col)] += a[i] as f64 * x[(j, i)];
                }
            }
        }
        self.rescale(raw)
    }
}

/// `Λᵏ(g)` in the basis `e_I`, I ranging over `subsets(n, k)`.
pub fn compound(g: &Mat, k: usize) -> Mat {
    let subs = subsets(g.nrows(), k);
    let d = subs.len();
    Mat::from_fn(d, d, |r, c| minor(g, &subs[r], &subs[c]))
}

fn minor(g: &Mat, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    if k == 0 {
        return 1.0;
    }
    DMatrix::from_fn(k, k, |i, j| g[(rows[i], cols[j])]).determinant()
}

/// Derivative of `Λᵏ` at the identity, applied to `x`.
pub fn wedge_derivation(x: &Mat, k: usize) -> Mat {
    let n = x.nrows();
    let subs = subsets(n, k);
    let d = subs.len();
    let id = Mat::identity(n, n);
    Mat::from_fn(d, d, |r, c| {
        let (rows, cols) = (&subs[r], &subs[c]);
        (0..k)
            .map(|m| {
                let mut block = DMatrix::from_fn(k, k, |i, j| id[(rows[i], cols[j])]);
                for i in 0..k {
                    block[(i, m)] = x[(rows[i], cols[m])];
                }
                block.determinant()
            })
            .sum()
    })
}

/// Matrix exponential.
pub fn expm(x: &Mat) -> Mat {
    x.clone().exp()
}

pub fn unit(v: &Vector) -> Vector {
    let n = v.norm();
    if n == 0.0 {
        v.clone()
    } else {
        v / n
    }
}

/// Concatenates column blocks horizontally.
pub fn hstack(blocks: &[&Mat]) -> Mat {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Stacks blocks vertically.
pub fn vstack(blocks: &[&Mat]) -> Mat {
    let cols = blocks.iter().map(|b| b.ncols()).max().unwrap_or(0);
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), b.ncols())).copy_from(*b);
        at += b.nrows();
    }
    out
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &Mat, b: &Vector) -> Vector {
    let svd = svd_full(a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let mut x = Vector::zeros(a.ncols());
    for (i, &s) in svd.s.iter().enumerate() {
        if s > 1e-14 * smax && i < svd.u.ncols() {
            let coef = svd.u.column(i).dot(&b.clone().resize_vertically(svd.u.nrows(), 0.0)) / s;
            x += svd.v.column(i) * coef;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let a = Mat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&a, rank_tol());
        assert_eq!(ns.ncols(), 2);
        assert!((a * ns).norm() < 1e-12);
    }

    #[test]
    fn monomial_order_and_count() {
        let m = monomials(3, 2);
        assert_eq!(m.len(), 6);
        assert_eq!(m[0], vec![2, 0, 0]);
        assert_eq!(m[5], vec![0, 0, 2]);
    }

    #[test]
    fn sym_power_is_a_homomorphism_and_orthogonal() {
        let b = SymBasis::new(3, 3);
        let g = Mat::from_row_slice(3, 3, &[1.0, 2.0, 0.5, 0.0, 1.0, -1.0, 0.3, 0.0, 2.0]);
        let h = Mat::from_row_slice(3, 3, &[0.2, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.5, 1.0]);
        let lhs = b.power(&(&g * &h));
        let rhs = b.power(&g) * b.power(&h);
        assert!((lhs - rhs).norm() < 1e-10);
        let rot = expm(&Mat::from_row_slice(3, 3, &[0.0, 0.4, -0.1, -0.4, 0.0, 0.7, 0.1, -0.7, 0.0]));
        let r = b.power(&rot);
        assert!((r.transpose() * &r - Mat::identity(10, 10)).norm() < 1e-10);
    }

    #[test]
    fn derivations_match_finite_differences() {
        let x = Mat::from_row_slice(3, 3, &[0.1, 0.2, -0.3, 0.4, -0.5, 0.6, 0.7, 0.8, 0.4]);
        let t = 1e-6;
        let e = expm(&(&x * t));
        let b = SymBasis::new(3, 2);
        let fd = (b.power(&e) - Mat::identity(6, 6)) / t;
        assert!((fd - b.derivation(&x)).norm() < 1e-4);
        let fd = (compound(&e, 2) - Mat::identity(3, 3)) / t;
        assert!((fd - wedge_derivation(&x, 2)).norm() < 1e-4);
    }

    #[test]
    fn top_space_of_diagonal() {
        let b = Mat::from_diagonal(&Vector::from_vec(vec![0.5, 4.0, 1.0, 0.1]));
        let q = top_invariant_subspace(&b, 2).unwrap();
        let want = Mat::from_fn(4, 2, |r, c| if (r, c) == (1, 0) || (r, c) == (2, 1) { 1.0 } else { 0.0 });
        assert!(subspace_distance(&q, &want) < 1e-12);
    }

    #[test]
    fn clusters() {
        let c = cluster_sorted(&[3.0, 3.0 + 1e-9, 1.0, 0.0], 1e-6);
        assert_eq!(c, vec![0..2, 2..3, 3..4]);
    }
}
