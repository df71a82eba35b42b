//! Floating-point dynamics of elements of `G ⋉ V`.
//!
//! Elements carry their defining matrix, its fundamental-representation
//! images and the affine map on `V`, each together with the corresponding
//! data for the inverse. Products multiply every component separately, so
//! contracting directions are always read off from the side on which they
//! expand and long words stay accurate.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::Cholesky;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{self, vec_to_f64};
use crate::linalg::{self, rank_tol};
use crate::rep::{check_criterion, ConcreteRep, CriterionReport, GroupKind, RepKind};
use crate::root_system::RootSystemData;
use crate::x0::{find_x0, fundamental_coweights, X0Certificate};
use crate::{Error, Mat, Result, Vector};

/// Moduli closer than this (in log scale) form one eigenvalue cluster, by
/// default.
pub const CLUSTER_TOL: f64 = 1e-6;

static CLUSTER_TOL_BITS: AtomicU64 = AtomicU64::new(CLUSTER_TOL.to_bits());

/// The cluster threshold in force (process-wide, `CLUSTER_TOL` unless
/// overridden).
pub fn cluster_tol() -> f64 {
    f64::from_bits(CLUSTER_TOL_BITS.load(Ordering::Relaxed))
}

/// Overrides the cluster threshold for the whole process.
pub fn set_cluster_tol(tol: f64) {
    CLUSTER_TOL_BITS.store(tol.to_bits(), Ordering::Relaxed);
}
/// Relative tolerance of the sign conditions on Jordan projections.
pub const REGULARITY_TOL: f64 = 1e-7;
/// Largest acceptable rounding floor of a Margulis invariant, relative to
/// `1 + ‖M‖`.
pub const PRECISION_TOL: f64 = 1e-6;
/// Leakage of the ideal spaces, relative to the operator norm.
pub const LEAKAGE_TOL: f64 = 1e-8;

/// An affine map of `V`, stored as the `(d+1)×(d+1)` matrix acting on
/// `A = V ⊕ ℝp₀` whose last row is `(0, …, 0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub mat: Mat,
}

impl AffineMap {
    pub fn new(linear: &Mat, translation: &Vector) -> Self {
        let d = linear.nrows();
        let mut mat = Mat::zeros(d + 1, d + 1);
        mat.view_mut((0, 0), (d, d)).copy_from(linear);
        mat.view_mut((0, d), (d, 1)).copy_from(translation);
        mat[(d, d)] = 1.0;
        AffineMap { mat }
    }

    pub fn identity(d: usize) -> Self {
        AffineMap { mat: Mat::identity(d + 1, d + 1) }
    }

    pub fn translation_by(v: &Vector) -> Self {
        Self::new(&Mat::identity(v.len(), v.len()), v)
    }

    /// Parses a row-major `(d+1)²` list; the last row must be `(0,…,0,1)`.
    pub fn from_row_major(values: &[f64]) -> Result<Self> {
        let n = (values.len() as f64).sqrt().round() as usize;
        if n < 2 || n * n != values.len() {
            return Err(Error::InvalidInput(format!("{} entries is not a square (d+1)² list", values.len())));
        }
        let mat = Mat::from_row_slice(n, n, values);
        let last_ok = (0..n - 1).all(|j| mat[(n - 1, j)] == 0.0) && mat[(n - 1, n - 1)] == 1.0;
        if !last_ok {
            return Err(Error::InvalidInput("last row of an affine matrix must be (0,…,0,1)".into()));
        }
        Ok(AffineMap { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows() - 1
    }

    pub fn linear_part(&self) -> Mat {
        let d = self.dim();
        self.mat.view((0, 0), (d, d)).into_owned()
    }

    pub fn translation(&self) -> Vector {
        let d = self.dim();
        self.mat.view((0, d), (d, 1)).column(0).into_owned()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap { mat: &self.mat * &other.mat }
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let lin = self
            .linear_part()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("singular linear part".into()))?;
        let t = -(&lin * self.translation());
        Ok(AffineMap::new(&lin, &t))
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        self.linear_part() * x + self.translation()
    }
}

/// An element of `G ⋉ V` with everything needed to study its dynamics.
#[derive(Clone, Debug)]
pub struct AffineElement {
    pub def: Mat,
    pub def_inv: Mat,
    /// Images in the fundamental-type representations.
    pub fund: Vec<Mat>,
    pub fund_inv: Vec<Mat>,
    /// The element acting on `V`.
    pub fwd: AffineMap,
    /// Its inverse acting on `V`.
    pub bwd: AffineMap,
}

impl AffineElement {
    /// `τ_t ∘ ρ(def)`.
    pub fn new(rep: &ConcreteRep, def: &Mat, translation: &Vector) -> Result<Self> {
        let def_inv = def
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("singular group element".into()))?;
        if translation.len() != rep.dim_v {
            return Err(Error::InvalidInput(format!("translation has length {} not {}", translation.len(), rep.dim_v)));
        }
        let lin = rep.rho(def);
        let lin_inv = rep.rho(&def_inv);
        let t_inv = -(&lin_inv * translation);
        Ok(AffineElement {
            fund: rep.fundamental_images(def),
            fund_inv: rep.fundamental_images(&def_inv),
            fwd: AffineMap::new(&lin, translation),
            bwd: AffineMap::new(&lin_inv, &t_inv),
            def: def.clone(),
            def_inv,
        })
    }

    pub fn linear(rep: &ConcreteRep, def: &Mat) -> Result<Self> {
        Self::new(rep, def, &Vector::zeros(rep.dim_v))
    }

    /// An element given as an affine matrix in the standard representation.
    pub fn from_standard_map(rep: &ConcreteRep, map: &AffineMap) -> Result<Self> {
        if rep.kind != RepKind::Standard || map.dim() != rep.dim_v {
            return Err(Error::InvalidInput("affine matrices are only accepted for standard representations".into()));
        }
        Self::new(rep, &map.linear_part(), &map.translation())
    }

    pub fn compose(&self, o: &AffineElement) -> AffineElement {
        AffineElement {
            def: &self.def * &o.def,
            def_inv: &o.def_inv * &self.def_inv,
            fund: self.fund.iter().zip(&o.fund).map(|(a, b)| a * b).collect(),
            fund_inv: o.fund_inv.iter().zip(&self.fund_inv).map(|(a, b)| a * b).collect(),
            fwd: self.fwd.compose(&o.fwd),
            bwd: o.bwd.compose(&self.bwd),
        }
    }

    pub fn inverse(&self) -> AffineElement {
        AffineElement {
            def: self.def_inv.clone(),
            def_inv: self.def.clone(),
            fund: self.fund_inv.clone(),
            fund_inv: self.fund.clone(),
            fwd: self.bwd.clone(),
            bwd: self.fwd.clone(),
        }
    }

    pub fn pow(&self, n: u32) -> AffineElement {
        assert!(n >= 1, "powers start at 1");
        let mut result: Option<AffineElement> = None;
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.compose(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base);
            }
        }
        result.expect("n ≥ 1")
    }

    /// `τ_v ∘ self`.
    pub fn translate(&self, v: &Vector) -> AffineElement {
        let mut out = self.clone();
        out.fwd = AffineMap::translation_by(v).compose(&self.fwd);
        out.bwd = self.bwd.compose(&AffineMap::translation_by(&(-v)));
        out
    }

    pub fn linear_part(&self) -> Mat {
        self.fwd.linear_part()
    }

    pub fn translation(&self) -> Vector {
        self.fwd.translation()
    }
}

/// The reference spaces of the certified `X₀`, as orthonormal bases in `V`.
#[derive(Clone, Debug)]
pub struct ReferenceSpaces {
    pub gt: Mat,
    pub eq: Mat,
    pub lt: Mat,
    /// `V^t₀`.
    pub t: Mat,
    /// `V^a₀`, the orthogonal complement of `V^t₀` in `V^=₀`.
    pub a: Mat,
}

impl ReferenceSpaces {
    pub fn new(rep: &ConcreteRep, cert: &X0Certificate, criterion: &CriterionReport) -> Self {
        let p = &cert.partition;
        let eq = rep.span_of(&p.eq);
        let t = criterion.vt0_basis.clone();
        let a = if eq.ncols() == 0 {
            eq.clone()
        } else {
            let proj = Mat::identity(rep.dim_v, rep.dim_v) - &t * t.transpose();
            linalg::orth(&(proj * &eq), rank_tol())
        };
        ReferenceSpaces { gt: rep.span_of(&p.gt), eq, lt: rep.span_of(&p.lt), t, a }
    }

    pub fn dim(&self) -> usize {
        self.gt.nrows()
    }

    /// `A^≥₀` as a basis of `A = V ⊕ ℝp₀`.
    pub fn affine_ge(&self) -> Mat {
        extend(&linalg::hstack(&[&self.gt, &self.eq]))
    }

    /// `A^≤₀`.
    pub fn affine_le(&self) -> Mat {
        extend(&linalg::hstack(&[&self.lt, &self.eq]))
    }

    /// `A^=₀`.
    pub fn affine_eq(&self) -> Mat {
        extend(&self.eq)
    }
}

/// `[B 0; 0 1]`: a basis of `span(B) ⊕ ℝp₀`.
fn extend(b: &Mat) -> Mat {
    let (d, k) = b.shape();
    let mut m = Mat::zeros(d + 1, k + 1);
    m.view_mut((0, 0), (d, k)).copy_from(b);
    m[(d, k)] = 1.0;
    m
}

/// Floating-point version of the regularity predicates for a Jordan
/// projection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloatPredicates {
    pub x0_regular: bool,
    pub rho_regular: bool,
    pub asymptotically_contracting: bool,
    pub compatible: bool,
    /// Smallest `|λ(Y)|` over the weights that must not vanish.
    pub margin: f64,
}

/// A realized representation together with a certified `X₀`.
#[derive(Clone, Debug)]
pub struct AffineContext {
    pub rep: ConcreteRep,
    pub cert: X0Certificate,
    pub criterion: CriterionReport,
    pub spaces: ReferenceSpaces,
    gt_w: Vec<Vec<f64>>,
    eq_w: Vec<Vec<f64>>,
    lt_w: Vec<Vec<f64>>,
}

impl AffineContext {
    pub fn new(rep: ConcreteRep, cert: X0Certificate) -> Self {
        let criterion = check_criterion(&rep);
        let spaces = ReferenceSpaces::new(&rep, &cert, &criterion);
        let f = |ws: &[exact::QVec]| ws.iter().map(|w| vec_to_f64(w)).collect();
        AffineContext {
            gt_w: f(&cert.partition.gt),
            eq_w: f(&cert.partition.eq),
            lt_w: f(&cert.partition.lt),
            rep,
            cert,
            criterion,
            spaces,
        }
    }

    /// Realizes `(group, kind)` and certifies an `X₀` from `seed`.
    pub fn fixture(group: GroupKind, kind: RepKind, seed: u64) -> Result<Self> {
        let rep = ConcreteRep::realize(group, kind)?;
        let cert = find_x0(&rep.rs, &rep.omega, seed)?;
        Ok(Self::new(rep, cert))
    }

    pub fn rs(&self) -> &RootSystemData {
        &self.rep.rs
    }

    pub fn group(&self) -> GroupKind {
        self.rep.group
    }

    pub fn predicates(&self, y: &[f64]) -> FloatPredicates {
        let rs = &self.rep.rs;
        let tol = REGULARITY_TOL * (1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max));
        let mut margin = f64::INFINITY;
        let mut x0_regular = true;
        for i in 0..rs.rank {
            if self.cert.pi_x0.contains(&i) {
                continue;
            }
            let v = dot(&vec_to_f64(&rs.simple_roots[i]), y);
            margin = margin.min(v.abs());
            x0_regular &= v.abs() > tol;
        }
        let mut nonvanishing = true;
        for w in self.gt_w.iter().chain(&self.lt_w) {
            let v = dot(w, y);
            margin = margin.min(v.abs());
            nonvanishing &= v.abs() > tol;
        }
        let max_lt = self.lt_w.iter().map(|w| dot(w, y)).fold(f64::NEG_INFINITY, f64::max);
        let min_ge = self.gt_w.iter().chain(&self.eq_w).map(|w| dot(w, y)).fold(f64::INFINITY, f64::min);
        let compatible =
            self.lt_w.iter().all(|w| dot(w, y) < -tol) && self.gt_w.iter().all(|w| dot(w, y) > tol);
        FloatPredicates {
            x0_regular,
            rho_regular: x0_regular && nonvanishing,
            asymptotically_contracting: max_lt < min_ge - tol,
            compatible,
            margin,
        }
    }

    /// `−w̃₀` acting on `V^t₀` coordinates.
    pub fn minus_w0_on_vt0(&self) -> Mat {
        -&self.criterion.w0_on_vt0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The vectors `hᵢ ∈ span(Π)` with `⟨ϖⱼ, hᵢ⟩ = δᵢⱼ`.
fn dual_to_fundamental_weights(rs: &RootSystemData) -> Vec<Vec<f64>> {
    (0..rs.rank)
        .map(|i| {
            let a = vec_to_f64(&rs.simple_roots[i]);
            let p = dot(&vec_to_f64(&rs.fundamental_weights[i]), &a);
            a.iter().map(|x| x / p).collect()
        })
        .collect()
}

/// The vector of `𝔞` whose pairings with the fundamental weights are `c`.
pub fn from_omega_pairings(rs: &RootSystemData, c: &[f64]) -> Vec<f64> {
    let h = dual_to_fundamental_weights(rs);
    let mut out = vec![0.0; rs.ambient_dim];
    for (ci, hi) in c.iter().zip(&h) {
        for (o, x) in out.iter_mut().zip(hi) {
            *o += ci * x;
        }
    }
    out
}

/// `⟨ϖᵢ, x⟩` for every i.
pub fn omega_pairings(rs: &RootSystemData, x: &[f64]) -> Vec<f64> {
    rs.fundamental_weights.iter().map(|w| dot(&vec_to_f64(w), x)).collect()
}

/// `−w₀x` in ambient coordinates.
pub fn opposition_f64(rs: &RootSystemData, x: &[f64]) -> Vec<f64> {
    let n = rs.ambient_dim;
    (0..n).map(|i| -(0..n).map(|j| exact::to_f64(rs.w0.get(i, j)) * x[j]).sum::<f64>()).collect()
}

/// Cartan projection from the norms of the fundamental-type images.
pub fn cartan_projection(rep: &ConcreteRep, g: &AffineElement) -> Vec<f64> {
    let c: Vec<f64> = rep
        .fundamental_type_reps
        .iter()
        .zip(&g.fund)
        .map(|(f, m)| linalg::op_norm(m).ln() / f.multiplier as f64)
        .collect();
    from_omega_pairings(&rep.rs, &c)
}

/// Cartan projection from the singular values of the defining matrix
/// (independent check of [`cartan_projection`]).
pub fn cartan_projection_sv(group: GroupKind, def: &Mat) -> Vec<f64> {
    let mut s: Vec<f64> = def.singular_values().iter().map(|x| x.ln()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    match group {
        GroupKind::SL(n) => {
            let mean = s.iter().sum::<f64>() / n as f64;
            s.iter().map(|x| x - mean).collect()
        }
        GroupKind::SO(_, q) => s[..q].to_vec(),
    }
}

/// A Gelfand-limit estimate of the Jordan projection.
#[derive(Clone, Debug, Serialize)]
pub struct JordanEstimate {
    pub jd: Vec<f64>,
    /// Largest power used.
    pub power: u64,
    pub converged: bool,
    /// Difference between the last two extrapolated estimates.
    pub error: f64,
}

/// Largest power used in the Gelfand limit.
pub const GELFAND_CAP_LOG2: u32 = 14;

/// `log r(B)` from `log‖B^N‖/N` along `N = 2ᵏ`, with Richardson
/// extrapolation `2E(2N) − E(N)` to cancel the `1/N` term.
fn gelfand_log_radius(b: &Mat) -> (f64, f64, u64) {
    let s0 = linalg::op_norm(b);
    let mut m = b / s0;
    let mut log_norm = s0.ln();
    let mut prev_e = log_norm;
    let mut prev_r = f64::NAN;
    let mut err = f64::INFINITY;
    let mut power = 1u64;
    for k in 1..=GELFAND_CAP_LOG2 {
        m = &m * &m;
        let s = linalg::op_norm(&m);
        if s == 0.0 || !s.is_finite() {
            return (f64::NEG_INFINITY, f64::INFINITY, power);
        }
        m /= s;
        log_norm = 2.0 * log_norm + s.ln();
        power = 1 << k;
        let e = log_norm / power as f64;
        let r = 2.0 * e - prev_e;
        if k >= 2 {
            err = (r - prev_r).abs();
            if err < 1e-11 * (1.0 + r.abs()) {
                return (r, err, power);
            }
        }
        prev_e = e;
        prev_r = r;
    }
    (prev_r, err, power)
}

pub fn jordan_projection(rep: &ConcreteRep, g: &AffineElement) -> JordanEstimate {
    let mut c = Vec::new();
    let mut err = 0.0f64;
    let mut power = 1;
    for (f, m) in rep.fundamental_type_reps.iter().zip(&g.fund) {
        let (r, e, p) = gelfand_log_radius(m);
        c.push(r / f.multiplier as f64);
        err = err.max(e);
        power = power.max(p);
    }
    JordanEstimate { jd: from_omega_pairings(&rep.rs, &c), power, converged: err < 1e-6, error: err }
}

/// Log-moduli of the eigenvalues of `a`, descending. The upper half is read
/// from `a` and the lower half from `a_inv`, where each is accurate.
pub fn log_moduli(a: &Mat, a_inv: &Mat) -> Vec<f64> {
    let n = a.nrows();
    let sorted = |m: &Mat| {
        let mut v: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm().ln()).collect();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    };
    let top = sorted(a);
    let bottom = sorted(a_inv);
    (0..n).map(|i| if 2 * i < n { top[i] } else { -bottom[n - 1 - i] }).collect()
}

/// Jordan projection from eigenvalue moduli of the defining matrix.
pub fn jordan_projection_eig(group: GroupKind, g: &AffineElement) -> Vec<f64> {
    let lm = log_moduli(&g.def, &g.def_inv);
    match group {
        GroupKind::SL(n) => {
            let mean = lm.iter().sum::<f64>() / n as f64;
            lm.iter().map(|x| x - mean).collect()
        }
        GroupKind::SO(_, q) => lm[..q].to_vec(),
    }
}

/// `exp(−min_{α ∈ Π∖Π_X} α(Ct))`.
pub fn linear_contraction_strength(rs: &RootSystemData, cert: &X0Certificate, ct: &[f64]) -> f64 {
    let m = (0..rs.rank)
        .filter(|i| !cert.pi_x0.contains(i))
        .map(|i| dot(&vec_to_f64(&rs.simple_roots[i]), ct))
        .fold(f64::INFINITY, f64::min);
    if m.is_finite() {
        (-m).exp()
    } else {
        0.0
    }
}

/// A linear canonizing map in the defining representation.
#[derive(Clone, Debug)]
pub struct LinearCanonical {
    pub phi: Mat,
    pub phi_inv: Mat,
    pub log_moduli: Vec<f64>,
    /// Jordan projection read from the eigenvalue clusters.
    pub jd: Vec<f64>,
}

/// Sum of the generalized eigenspaces of the clusters `0..=j` (top) or
/// `j..` (bottom), computed from whichever of `a`, `a⁻¹` expands it least
/// unevenly.
fn flag_space(a: &Mat, a_inv: &Mat, lm: &[f64], k: usize, top: bool) -> Result<Mat> {
    let n = a.nrows();
    if k == 0 {
        return Ok(Mat::zeros(n, 0));
    }
    if k == n {
        return Ok(Mat::identity(n, n));
    }
    if top {
        // Top-k space of a, or the complement of the top-(n−k) space of a⁻ᵀ.
        if lm[0] - lm[k - 1] <= lm[k] - lm[n - 1] {
            linalg::top_invariant_subspace(a, k)
        } else {
            Ok(linalg::orth_complement(&linalg::top_invariant_subspace(&a_inv.transpose(), n - k)?))
        }
    } else {
        // Bottom-k space: top-k of a⁻¹, or the complement of the top-(n−k) of aᵀ.
        if lm[n - k] - lm[n - 1] <= lm[0] - lm[n - k - 1] {
            linalg::top_invariant_subspace(a_inv, k)
        } else {
            Ok(linalg::orth_complement(&linalg::top_invariant_subspace(&a.transpose(), n - k)?))
        }
    }
}

/// Generalized eigenspaces of the modulus clusters, top to bottom.
fn cluster_spaces(a: &Mat, a_inv: &Mat) -> Result<(Vec<f64>, Vec<std::ops::Range<usize>>, Vec<Mat>)> {
    let n = a.nrows();
    let lm = log_moduli(a, a_inv);
    let clusters = linalg::cluster_sorted(&lm, cluster_tol());
    let mut spaces = Vec::new();
    for c in &clusters {
        let upper = flag_space(a, a_inv, &lm, c.end, true)?;
        let lower = flag_space(a, a_inv, &lm, n - c.start, false)?;
        spaces.push(linalg::intersect(&upper, &lower, c.len())?);
    }
    Ok((lm, clusters, spaces))
}

/// Conjugates the hyperbolic part of a defining matrix to `exp(Jd)`.
pub fn canonize_linear(group: GroupKind, a: &Mat, a_inv: &Mat) -> Result<LinearCanonical> {
    let n = a.nrows();
    let (lm, clusters, spaces) = cluster_spaces(a, a_inv)?;
    match group {
        GroupKind::SL(_) => {
            let blocks: Vec<&Mat> = spaces.iter().collect();
            let mut p = linalg::hstack(&blocks);
            let det = p.determinant();
            if det.abs() < 1e-300 {
                return Err(Error::NearDegenerate("eigenspaces are not independent".into()));
            }
            p *= det.abs().powf(-1.0 / n as f64);
            if det < 0.0 {
                let c = -p.column(0);
                p.set_column(0, &c);
            }
            let phi = p.clone().try_inverse().ok_or_else(|| Error::NearDegenerate("singular eigenbasis".into()))?;
            let mut jd: Vec<f64> = Vec::with_capacity(n);
            for c in &clusters {
                let mean = lm[c.clone()].iter().sum::<f64>() / c.len() as f64;
                jd.extend(std::iter::repeat(mean).take(c.len()));
            }
            let m = jd.iter().sum::<f64>() / n as f64;
            jd.iter_mut().for_each(|x| *x -= m);
            Ok(LinearCanonical { phi, phi_inv: p, log_moduli: lm, jd })
        }
        GroupKind::SO(p_dim, q) => {
            let form = group.form().expect("orthogonal family");
            let neutral: Vec<usize> =
                (0..clusters.len()).filter(|&j| lm[clusters[j].start].abs() <= cluster_tol()).collect();
            let neutral_size: usize = neutral.iter().map(|&j| clusters[j].len()).sum();
            if neutral.len() != 1 || neutral_size != p_dim - q {
                return Err(Error::NearDegenerate(format!(
                    "expected a neutral cluster of size {}, found {neutral_size}",
                    p_dim - q
                )));
            }
            let mid = neutral[0];
            let m = clusters.len();
            if mid != m - 1 - mid {
                return Err(Error::NearDegenerate("hyperbolic clusters are not paired".into()));
            }
            let mut plus: Vec<Vector> = Vec::new();
            let mut minus: Vec<Vector> = Vec::new();
            for j in 0..mid {
                let ep = &spaces[j];
                let em = &spaces[m - 1 - j];
                if ep.ncols() != em.ncols() {
                    return Err(Error::NearDegenerate("paired clusters differ in size".into()));
                }
                let gram = ep.transpose() * &form * em;
                let ginv = gram.try_inverse().ok_or_else(|| Error::NearDegenerate("degenerate hyperbolic pair".into()))?;
                let wm = em * ginv.transpose();
                for c in 0..ep.ncols() {
                    plus.push(ep.column(c).into_owned());
                    minus.push(wm.column(c).into_owned());
                }
            }
            let nb = &spaces[mid];
            let chol = Cholesky::new(nb.transpose() * &form * nb)
                .ok_or_else(|| Error::NearDegenerate("neutral space is not positive".into()))?;
            let l_inv_t = chol.l().try_inverse().expect("Cholesky factor is invertible").transpose();
            let nb = nb * l_inv_t;
            let build = |plus: &[Vector], nb: &Mat, minus: &[Vector]| {
                let mut cols: Vec<Vector> = plus.to_vec();
                cols.extend(nb.column_iter().map(|c| c.into_owned()));
                cols.extend(minus.iter().rev().cloned());
                Mat::from_columns(&cols)
            };
            let b0 = group.reference_basis();
            let mut pm = build(&plus, &nb, &minus);
            let mut phi = &b0 * pm.clone().try_inverse().ok_or_else(|| Error::NearDegenerate("singular basis".into()))?;
            let ff = phi.view((p_dim, p_dim), (q, q)).determinant();
            if ff < 0.0 {
                plus[0] = -&plus[0];
                minus[0] = -&minus[0];
            }
            let mut nb = nb;
            pm = build(&plus, &nb, &minus);
            phi = &b0 * pm.clone().try_inverse().expect("invertible");
            if phi.determinant() < 0.0 {
                let c = -nb.column(0);
                nb.set_column(0, &c);
                pm = build(&plus, &nb, &minus);
                phi = &b0 * pm.clone().try_inverse().expect("invertible");
            }
            let phi_inv = &pm * b0.transpose();
            let jd = lm[..q].to_vec();
            Ok(LinearCanonical { phi, phi_inv, log_moduli: lm, jd })
        }
    }
}

/// Ideal dynamical spaces and a canonizing map of a `ρ`-regular element.
#[derive(Clone, Debug)]
pub struct DynamicalSplit {
    pub phi: AffineMap,
    pub phi_inv: AffineMap,
    /// Linear part of `φ` in the defining representation.
    pub phi_def: Mat,
    /// `φgφ⁻¹`.
    pub canonical: AffineMap,
    /// `φg⁻¹φ⁻¹`.
    pub canonical_inv: AffineMap,
    pub v_gg: Mat,
    pub v_ll: Mat,
    pub v_approx: Mat,
    pub a_gtr: Mat,
    pub a_lesssim: Mat,
    pub a_approx: Mat,
    /// Point of `A^≈_g ∩ V_Aff` closest to the origin.
    pub basepoint: Vector,
    /// Jordan projection from the eigenvalue clusters.
    pub jd_eig: Vec<f64>,
    /// Largest relative leakage of a reference space under the canonical form.
    pub leakage: f64,
}

fn block(m: &Mat, rows: &Mat, cols: &Mat) -> Mat {
    rows.transpose() * m * cols
}

pub fn ideal_split(ctx: &AffineContext, g: &AffineElement) -> Result<DynamicalSplit> {
    let rep = &ctx.rep;
    let sp = &ctx.spaces;
    let d = rep.dim_v;
    let canon = canonize_linear(rep.group, &g.def, &g.def_inv)?;
    let pred = ctx.predicates(&canon.jd);
    if !pred.rho_regular {
        return Err(Error::NotRegular(format!("Jordan projection {:?} (margin {:.3e})", canon.jd, pred.margin)));
    }
    let big_phi = rep.rho(&canon.phi);
    let big_phi_inv = rep.rho(&canon.phi_inv);
    let phi0 = AffineMap::new(&big_phi, &Vector::zeros(d));
    let phi0_inv = AffineMap::new(&big_phi_inv, &Vector::zeros(d));
    let g0 = phi0.compose(&g.fwd).compose(&phi0_inv);
    let h0 = phi0.compose(&g.bwd).compose(&phi0_inv);
    let (l, v) = (g0.linear_part(), g0.translation());
    let li = h0.linear_part();

    // Translation correction on V^>₀ ⊕ V^<₀.
    let mut w = Vector::zeros(d);
    if sp.gt.ncols() > 0 {
        let k = sp.gt.ncols();
        let a = block(&l, &sp.gt, &sp.gt) - Mat::identity(k, k);
        let rhs = sp.gt.transpose() * &v;
        let x = a.lu().solve(&rhs).ok_or_else(|| Error::NotRegular("eigenvalue 1 on V^>".into()))?;
        w += &sp.gt * x;
    }
    if sp.lt.ncols() > 0 {
        // (ℓ_< − I)⁻¹ = (I − H)⁻¹H with H = ℓ_<⁻¹, which is expanding.
        let k = sp.lt.ncols();
        let h = block(&li, &sp.lt, &sp.lt);
        let rhs = &h * (sp.lt.transpose() * &v);
        let x = (Mat::identity(k, k) - &h)
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NotRegular("eigenvalue 1 on V^<".into()))?;
        w += &sp.lt * x;
    }
    let tau = AffineMap::translation_by(&w);
    let tau_inv = AffineMap::translation_by(&(-&w));
    let phi = tau.compose(&phi0);
    let phi_inv = phi0_inv.compose(&tau_inv);
    let canonical = tau.compose(&g0).compose(&tau_inv);
    let canonical_inv = tau.compose(&h0).compose(&tau_inv);

    let leak = |m: &Mat, b: &Mat| {
        if b.ncols() == 0 {
            return 0.0;
        }
        let img = m * b;
        let out = &img - b * (b.transpose() * &img);
        linalg::op_norm(&out) / linalg::op_norm(m)
    };
    let leakage = leak(&l, &sp.gt).max(leak(&li, &sp.lt)).max(leak(&l, &sp.eq).min(leak(&li, &sp.eq)));
    if leakage > LEAKAGE_TOL {
        return Err(Error::NearDegenerate(format!("ideal spaces leak by {leakage:.3e}")));
    }

    let ortho = |m: &Mat| if m.ncols() == 0 { m.clone() } else { linalg::orthonormalize(m) };
    let v_gg = ortho(&(&big_phi_inv * &sp.gt));
    let v_ll = ortho(&(&big_phi_inv * &sp.lt));
    let v_approx = ortho(&(&big_phi_inv * &sp.eq));
    let a_gtr = ortho(&(&phi_inv.mat * sp.affine_ge()));
    let a_lesssim = ortho(&(&phi_inv.mat * sp.affine_le()));
    let a_approx = ortho(&(&phi_inv.mat * sp.affine_eq()));

    let r = linalg::hstack(&[&sp.gt, &sp.lt]);
    let basepoint = if r.ncols() == 0 {
        Vector::zeros(d)
    } else {
        let c = r.transpose() * &big_phi;
        let rhs = -(r.transpose() * &w);
        linalg::lstsq(&c, &rhs)
    };

    Ok(DynamicalSplit {
        phi,
        phi_inv,
        phi_def: canon.phi,
        canonical,
        canonical_inv,
        v_gg,
        v_ll,
        v_approx,
        a_gtr,
        a_lesssim,
        a_approx,
        basepoint,
        jd_eig: canon.jd,
        leakage,
    })
}

/// Operator norm of a canonical block transported back by `φ⁻¹`: the norm
/// of `g` restricted to `φ⁻¹(span B)`, computed as `‖R C R⁻¹‖` where
/// `φ⁻¹B = QR`.
fn transported_norm(phi_inv: &Mat, basis: &Mat, canonical_block: &Mat) -> f64 {
    if basis.ncols() == 0 {
        return 0.0;
    }
    let qr = (phi_inv * basis).qr();
    let r = qr.r();
    let r_inv = r.clone().try_inverse().expect("basis images are independent");
    linalg::op_norm(&(r * canonical_block * r_inv))
}

/// `s_{X₀}(g) = ‖g|_{V^≪_g}‖ · ‖g⁻¹|_{A^≳_g}‖` for the element `g` whose
/// split is given.
pub fn affine_contraction_strength(ctx: &AffineContext, split: &DynamicalSplit) -> f64 {
    let sp = &ctx.spaces;
    let d = sp.dim();
    let li = split.canonical_inv.linear_part();
    let lt_part = if sp.lt.ncols() == 0 {
        0.0
    } else {
        let h = block(&li, &sp.lt, &sp.lt);
        let ell = h.try_inverse().expect("regular element");
        let phi_inv_lin = split.phi_inv.mat.view((0, 0), (d, d)).into_owned();
        transported_norm(&phi_inv_lin, &sp.lt, &ell)
    };
    // g⁻¹ on A^≳ is the inverse of the block of g, which is read from the
    // side where A^≳ carries the dominant growth.
    let ge = sp.affine_ge();
    let hge = block(&split.canonical.mat, &ge, &ge).try_inverse().expect("regular element");
    let ge_part = transported_norm(&split.phi_inv.mat, &ge, &hge);
    lt_part * ge_part
}

/// `π_t(φ(g(x) − x))` in `V^t₀` coordinates.
fn margulis_at(ctx: &AffineContext, split: &DynamicalSplit, g: &AffineElement, x: &Vector) -> Vector {
    let disp = g.fwd.apply(x) - x;
    let lin = split.phi.linear_part();
    ctx.spaces.t.transpose() * (lin * disp)
}

/// Margulis invariant in `V^t₀` coordinates (the basis `ctx.spaces.t`),
/// checked at a second point of `A^≈_g`.
pub fn margulis_invariant(ctx: &AffineContext, split: &DynamicalSplit, g: &AffineElement) -> Result<Vector> {
    let x0 = &split.basepoint;
    let m0 = margulis_at(ctx, split, g, x0);
    // First-order rounding floor: g(x) − x cancels terms of size
    // ‖ℓ‖‖x‖ + ‖t‖ (x is only known to rounding accuracy), which are then
    // read through the functional π_t∘φ.
    let functional = ctx.spaces.t.transpose() * split.phi.linear_part();
    let magnitude = linalg::op_norm(&g.fwd.linear_part()) * (x0.norm() + 1.0) + g.translation().norm();
    let floor = f64::EPSILON * linalg::op_norm(&functional) * magnitude;
    if floor > PRECISION_TOL * (1.0 + m0.norm()) {
        return Err(Error::PrecisionExhausted(floor));
    }
    if split.v_approx.ncols() > 0 {
        let x1 = x0 + split.v_approx.column(0);
        let m1 = margulis_at(ctx, split, g, &x1);
        if (&m1 - &m0).norm() > 1e-8 * (1.0 + m0.norm()) + floor {
            return Err(Error::QuasiTranslation(format!(
                "M differs by {:.3e} between two basepoints (rounding floor {floor:.3e})",
                (&m1 - &m0).norm()
            )));
        }
    }
    Ok(m0)
}

/// Everything measured about one element.
#[derive(Clone, Debug)]
pub struct MargulisData {
    pub jd: Vec<f64>,
    pub jd_eig: Vec<f64>,
    pub ct: Vec<f64>,
    /// `M(g)` in `V^t₀` coordinates.
    pub m: Vector,
    pub s_x0_fwd: f64,
    pub s_x0_bwd: f64,
    /// `ν(φ) = max(‖φ‖, ‖φ⁻¹‖)` of the canonizing map.
    pub nondeg_bound: f64,
    pub basepoint: Vector,
}

pub fn margulis_data(ctx: &AffineContext, g: &AffineElement) -> Result<MargulisData> {
    let split = ideal_split(ctx, g)?;
    let inv = g.inverse();
    let split_inv = ideal_split(ctx, &inv)?;
    let m = margulis_invariant(ctx, &split, g)?;
    Ok(MargulisData {
        jd: jordan_projection(&ctx.rep, g).jd,
        jd_eig: split.jd_eig.clone(),
        ct: cartan_projection(&ctx.rep, g),
        m,
        s_x0_fwd: affine_contraction_strength(ctx, &split),
        s_x0_bwd: affine_contraction_strength(ctx, &split_inv),
        nondeg_bound: linalg::op_norm(&split.phi.mat).max(linalg::op_norm(&split.phi_inv.mat)),
        basepoint: split.basepoint.clone(),
    })
}

/// Upper bound on the non-degeneracy constant of a pair of affine parabolic
/// spaces (bases of subspaces of `A`) of the reference dimensions. The map
/// is built in `GL(A)` by basis completion, so it bounds the optimum of the
/// relaxed problem.
pub fn nondegeneracy_bound(sp: &ReferenceSpaces, a1: &Mat, a2: &Mat) -> Result<f64> {
    let d = sp.dim();
    let (ng, ne, nl) = (sp.gt.ncols(), sp.eq.ncols(), sp.lt.ncols());
    let a1 = linalg::orth(a1, rank_tol());
    let a2 = linalg::orth(a2, rank_tol());
    if a1.ncols() != ng + ne + 1 || a2.ncols() != nl + ne + 1 {
        return Err(Error::DegeneratePair("spaces have the wrong dimensions".into()));
    }
    let n = linalg::intersect(&a1, &a2, ne + 1).map_err(|e| Error::DegeneratePair(format!("not transverse: {e}")))?;
    let last = n.row(d).transpose();
    if last.norm() < 1e-9 {
        return Err(Error::DegeneratePair("intersection is contained in V".into()));
    }
    let xhat = &n * (&last / last.norm_squared());
    let lin_part = |m: &Mat| -> Mat {
        let row = m.row(d).into_owned();
        let ns = linalg::null_space(&Mat::from_row_slice(1, m.ncols(), row.as_slice()), rank_tol());
        (m * ns).rows(0, d).into_owned()
    };
    let nv = if ne == 0 { Mat::zeros(d, 0) } else { linalg::orthonormalize(&lin_part(&n)) };
    let complement = |a: &Mat, k: usize| -> Result<Mat> {
        if k == 0 {
            return Ok(Mat::zeros(d, 0));
        }
        let av = lin_part(a);
        let proj = Mat::identity(d, d) - &nv * nv.transpose();
        let c = linalg::orth(&(proj * av), 1e-12);
        if c.ncols() != k {
            return Err(Error::DegeneratePair("degenerate linear parts".into()));
        }
        Ok(c)
    };
    let a1p = complement(&a1, ng)?;
    let a2p = complement(&a2, nl)?;
    let pmat = linalg::hstack(&[&a1p, &nv, &a2p]);
    let pinv = pmat.try_inverse().ok_or_else(|| Error::DegeneratePair("spaces do not span V".into()))?;
    let target = linalg::hstack(&[&sp.gt, &sp.eq, &sp.lt]);
    let l = target * pinv;
    let x0 = xhat.rows(0, d).into_owned();
    let t = -(&l * x0);
    let phi = AffineMap::new(&l, &t);
    let phi_inv = phi.inverse().map_err(|_| Error::DegeneratePair("singular".into()))?;
    Ok(linalg::op_norm(&phi.mat).max(linalg::op_norm(&phi_inv.mat)))
}

/// Non-degeneracy bound of a pair of elements: the worst of the four pairs
/// `(A^≳_{gᵢ}, A^≲_{gⱼ})`.
pub fn pair_nondegeneracy(ctx: &AffineContext, s1: &DynamicalSplit, s2: &DynamicalSplit) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in [s1, s2] {
        for b in [s1, s2] {
            worst = worst.max(nondegeneracy_bound(&ctx.spaces, &a.a_gtr, &b.a_lesssim)?);
        }
    }
    Ok(worst)
}

/// Proximality data of a square matrix.
#[derive(Clone, Debug, Serialize)]
pub struct ProximalReport {
    pub is_proximal: bool,
    pub spectral_radius: f64,
    /// `|λ₁|/|λ₂|`.
    pub gap: f64,
    /// Unit attracting eigenvector.
    #[serde(skip)]
    pub es: Option<Vector>,
    /// Unit normal of the repelling hyperplane.
    #[serde(skip)]
    pub eu_normal: Option<Vector>,
    pub s_tilde: Option<f64>,
}

pub fn proximal_report(m: &Mat, tol: f64) -> Result<ProximalReport> {
    let n = m.nrows();
    let mut eig: Vec<nalgebra::Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let r = eig[0].norm();
    if r == 0.0 {
        return Err(Error::InvalidInput("matrix is not invertible".into()));
    }
    let gap = if n > 1 { r / eig[1].norm() } else { f64::INFINITY };
    let complex_top = eig[0].im.abs() > tol * r;
    if complex_top {
        return Ok(ProximalReport { is_proximal: false, spectral_radius: r, gap, es: None, eu_normal: None, s_tilde: None });
    }
    if (gap - 1.0).abs() <= tol {
        return Err(Error::IndeterminateProximality(gap));
    }
    if gap < 1.0 + tol {
        return Ok(ProximalReport { is_proximal: false, spectral_radius: r, gap, es: None, eu_normal: None, s_tilde: None });
    }
    let lambda = eig[0].re;
    let id = Mat::identity(n, n);
    let (es, _) = linalg::smallest_right_singular(&(m - &id * lambda), 1);
    let (normal, _) = linalg::smallest_right_singular(&(m.transpose() - &id * lambda), 1);
    let es = es.column(0).into_owned();
    let normal = normal.column(0).into_owned();
    let eu = linalg::orth_complement(&Mat::from_columns(&[normal.clone()]));
    let s_tilde = linalg::op_norm(&(m * eu)) / r;
    Ok(ProximalReport { is_proximal: true, spectral_radius: r, gap, es: Some(es), eu_normal: Some(normal), s_tilde: Some(s_tilde) })
}

/// Angle-type distance between two lines.
pub fn line_distance(a: &Vector, b: &Vector) -> f64 {
    linalg::subspace_distance(&Mat::from_columns(&[a.clone()]), &Mat::from_columns(&[b.clone()]))
}

/// Per-trial ratios of the proximal product experiment.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ProximalProductStats {
    pub trials: usize,
    pub non_proximal: usize,
    /// `α(E^s_{γ₁γ₂}, E^s_{γ₁}) / s̃(γ₁)`.
    pub angle_ratio: Vec<f64>,
    /// `s̃(γ₁γ₂) / (s̃(γ₁)s̃(γ₂))`.
    pub strength_ratio: Vec<f64>,
    /// `r(γ₁γ₂) / (‖γ₁‖‖γ₂‖)`.
    pub radius_ratio: Vec<f64>,
}

/// Maximum and median of a sample.
pub fn max_median(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    (s[s.len() - 1], s[s.len() / 2])
}

pub fn proximal_product_experiment<F>(mut sampler: F, trials: usize, seed: u64) -> ProximalProductStats
where
    F: FnMut(&mut ChaCha8Rng) -> (Mat, Mat),
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = ProximalProductStats { trials, ..Default::default() };
    for _ in 0..trials {
        let (g1, g2) = sampler(&mut rng);
        let prod = &g1 * &g2;
        let (Ok(p1), Ok(p2), Ok(p)) = (proximal_report(&g1, 1e-9), proximal_report(&g2, 1e-9), proximal_report(&prod, 1e-9))
        else {
            st.non_proximal += 1;
            continue;
        };
        if !(p1.is_proximal && p2.is_proximal && p.is_proximal) {
            st.non_proximal += 1;
            continue;
        }
        let (s1, s2, s) = (p1.s_tilde.unwrap(), p2.s_tilde.unwrap(), p.s_tilde.unwrap());
        st.angle_ratio.push(line_distance(p.es.as_ref().unwrap(), p1.es.as_ref().unwrap()) / s1);
        st.strength_ratio.push(s / (s1 * s2));
        st.radius_ratio.push(p.spectral_radius / (linalg::op_norm(&g1) * linalg::op_norm(&g2)));
    }
    st
}

/// Random conjugates `P diag(spectrum)^N P⁻¹` with Gaussian `P`.
pub fn planted_pair_sampler(spectrum: Vec<f64>, power: i32) -> impl FnMut(&mut ChaCha8Rng) -> (Mat, Mat) {
    move |rng| {
        let n = spectrum.len();
        let d = Mat::from_diagonal(&Vector::from_iterator(n, spectrum.iter().map(|x| x.powi(power))));
        let mut one = || loop {
            let p = gaussian_matrix(rng, n, n, 1.0);
            if let Some(pi) = p.clone().try_inverse() {
                if linalg::op_norm(&p) * linalg::op_norm(&pi) < 50.0 {
                    return &p * &d * pi;
                }
            }
        };
        (one(), one())
    }
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> Mat {
    Mat::from_fn(r, c, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// `exp` of a Gaussian combination of the Lie algebra basis.
pub fn random_group_element(group: GroupKind, rng: &mut ChaCha8Rng, scale: f64) -> Mat {
    let mut x = Mat::zeros(group.def_dim(), group.def_dim());
    for b in group.lie_basis() {
        x += b * (scale * rng.sample::<f64, _>(StandardNormal));
    }
    linalg::expm(&x)
}

/// `exp` of a Gaussian element of the compact subalgebra.
pub fn random_compact_element(group: GroupKind, rng: &mut ChaCha8Rng, scale: f64) -> Mat {
    let mut x = Mat::zeros(group.def_dim(), group.def_dim());
    for b in group.compact_basis() {
        x += b * (scale * rng.sample::<f64, _>(StandardNormal));
    }
    linalg::expm(&x)
}

/// Random element of `M`, as a product of a random subset of generators.
pub fn random_m_element(group: GroupKind, rng: &mut ChaCha8Rng) -> Mat {
    let n = group.def_dim();
    let mut m = Mat::identity(n, n);
    for gen in group.m_generators_def() {
        if rng.random_bool(0.5) {
            m = m * gen;
        }
    }
    m
}

/// Knobs for [`random_regular_element`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SamplerOptions {
    /// Norm of the Jordan projection.
    pub jd_norm: f64,
    /// Relative size of the random perturbation of `X₀`.
    pub jitter: f64,
    /// Scale of the conjugating element.
    pub conj_scale: f64,
    /// Scale of the translation part.
    pub translation_scale: f64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { jd_norm: 1.0, jitter: 0.3, conj_scale: 0.4, translation_scale: 1.0 }
    }
}

/// A random strictly dominant vector near the ray of `X₀` that passes the
/// floating regularity and compatibility predicates.
pub fn random_compatible_vector(ctx: &AffineContext, rng: &mut ChaCha8Rng, norm: f64, jitter: f64) -> Vec<f64> {
    let rs = ctx.rs();
    let x0 = vec_to_f64(&ctx.cert.x0);
    let x0n = (dot(&x0, &x0)).sqrt();
    let cws: Vec<Vec<f64>> = fundamental_coweights(rs).iter().map(|c| vec_to_f64(c)).collect();
    let mut eps = jitter;
    loop {
        let mut y: Vec<f64> = x0.iter().map(|v| v / x0n).collect();
        for cw in &cws {
            let u: f64 = rng.random_range(0.05..1.0);
            let cn = dot(cw, cw).sqrt();
            for (yi, ci) in y.iter_mut().zip(cw) {
                *yi += eps * u * ci / cn;
            }
        }
        let yn = dot(&y, &y).sqrt();
        let y: Vec<f64> = y.iter().map(|v| v * norm / yn).collect();
        let p = ctx.predicates(&y);
        let dominant = (0..rs.rank).all(|i| dot(&vec_to_f64(&rs.simple_roots[i]), &y) > 0.0);
        if p.rho_regular && p.compatible && dominant && p.margin > 1e-3 * norm {
            return y;
        }
        eps *= 0.5;
    }
}

/// `τ_v ∘ P exp(Y) m P⁻¹` with `Y` compatible with `X₀`, `m ∈ M` and
/// `P` a random group element; its Jordan projection is exactly `Y`.
pub fn random_regular_element(ctx: &AffineContext, rng: &mut ChaCha8Rng, opts: &SamplerOptions) -> Result<AffineElement> {
    let group = ctx.group();
    let y = random_compatible_vector(ctx, rng, opts.jd_norm, opts.jitter);
    let p = random_group_element(group, rng, opts.conj_scale);
    let m = random_m_element(group, rng);
    let core = linalg::expm(&group.cartan_def(&y)) * m;
    let def = &p * core * p.clone().try_inverse().expect("exponentials are invertible");
    let v = gaussian_vector(rng, ctx.rep.dim_v, opts.translation_scale);
    AffineElement::new(&ctx.rep, &def, &v)
}

/// One row of the additivity experiment.
#[derive(Clone, Debug, Serialize)]
pub struct AdditivityRow {
    pub trial: usize,
    pub power: u32,
    /// `‖M(gᴺhᴺ) − M(gᴺ) − M(hᴺ)‖`.
    pub dev_m: Option<f64>,
    pub norm_m_g: Option<f64>,
    pub norm_m_h: Option<f64>,
    /// `max_i ϖᵢ(Jd(gᴺhᴺ) − Ct(gᴺ) − Ct(hᴺ))`.
    pub max_slack: f64,
    pub error: Option<String>,
}

/// Runs the additivity experiment; trials run in parallel, each with its
/// own ChaCha stream derived from `seed`.
pub fn additivity_experiment<F>(ctx: &AffineContext, sampler: F, trials: usize, powers: &[u32], seed: u64) -> Vec<AdditivityRow>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(AffineElement, AffineElement)> + Sync,
{
    let rs = ctx.rs();
    let rows: Vec<Vec<AdditivityRow>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64 + 1);
            let mut out = Vec::new();
            let pair = sampler(&mut rng);
            for &n in powers {
                let (g, h) = match &pair {
                    Ok((g, h)) => (g.pow(n), h.pow(n)),
                    Err(e) => {
                        out.push(AdditivityRow { trial, power: n, dev_m: None, norm_m_g: None, norm_m_h: None, max_slack: f64::NAN, error: Some(e.to_string()) });
                        continue;
                    }
                };
                let gh = g.compose(&h);
                let jd = jordan_projection(&ctx.rep, &gh).jd;
                let (cg, ch) = (cartan_projection(&ctx.rep, &g), cartan_projection(&ctx.rep, &h));
                let diff: Vec<f64> = (0..jd.len()).map(|i| jd[i] - cg[i] - ch[i]).collect();
                let max_slack = omega_pairings(rs, &diff).into_iter().fold(f64::NEG_INFINITY, f64::max);
                let ms = (|| -> Result<(Vector, Vector, Vector)> {
                    let mg = margulis_invariant(ctx, &ideal_split(ctx, &g)?, &g)?;
                    let mh = margulis_invariant(ctx, &ideal_split(ctx, &h)?, &h)?;
                    let mgh = margulis_invariant(ctx, &ideal_split(ctx, &gh)?, &gh)?;
                    Ok((mg, mh, mgh))
                })();
                match ms {
                    Ok((mg, mh, mgh)) => out.push(AdditivityRow {
                        trial,
                        power: n,
                        dev_m: Some((&mgh - &mg - &mh).norm()),
                        norm_m_g: Some(mg.norm()),
                        norm_m_h: Some(mh.norm()),
                        max_slack,
                        error: None,
                    }),
                    Err(e) => out.push(AdditivityRow { trial, power: n, dev_m: None, norm_m_g: None, norm_m_h: None, max_slack, error: Some(e.to_string()) }),
                }
            }
            out
        })
        .collect();
    rows.into_iter().flatten().collect()
}

/// Independent pair sampler used by the additivity experiment.
pub fn regular_pair_sampler(ctx: &AffineContext, opts: SamplerOptions) -> impl Fn(&mut ChaCha8Rng) -> Result<(AffineElement, AffineElement)> + Sync + '_ {
    move |rng| Ok((random_regular_element(ctx, rng, &opts)?, random_regular_element(ctx, rng, &opts)?))
}

/// Like [`regular_pair_sampler`], but redraws until the pair is
/// `c_max`-non-degenerate, the hypothesis under which additivity holds.
/// Gives up with the last error after `retries` draws.
pub fn transverse_pair_sampler(
    ctx: &AffineContext,
    opts: SamplerOptions,
    c_max: f64,
    retries: usize,
) -> impl Fn(&mut ChaCha8Rng) -> Result<(AffineElement, AffineElement)> + Sync + '_ {
    move |rng| {
        let mut last = Error::InvalidInput("no draws".into());
        for _ in 0..retries.max(1) {
            let (g, h) = (random_regular_element(ctx, rng, &opts)?, random_regular_element(ctx, rng, &opts)?);
            let c = ideal_split(ctx, &g).and_then(|sg| ideal_split(ctx, &h).and_then(|sh| pair_nondegeneracy(ctx, &sg, &sh)));
            match c {
                Ok(c) if c <= c_max => return Ok((g, h)),
                Ok(c) => last = Error::DegeneratePair(format!("non-degeneracy bound {c:.3e} above {c_max}")),
                Err(e) => last = e,
            }
        }
        Err(last)
    }
}
