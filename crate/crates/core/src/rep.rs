//! Explicit matrix realizations of a group, a representation and its
//! restricted weight structure, plus the fixed-vector criterion.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::exact::{self, QVec};
use crate::linalg::{self, rank_tol, SymBasis};
use crate::root_system::{build_root_system, trivial_root_system, Family, RootSystemData};
use crate::weights::{weight_set, WeightSet};
use crate::{Error, Mat, Rat, Result, Vector};

/// The supported linear groups, in their defining representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    /// `SL_n(ℝ)`, n ≥ 2.
    SL(usize),
    /// `SO⁺(p, q)` with p > q ≥ 0 and p ≥ 2; q = 0 is the compact group.
    SO(usize, usize),
}

/// The supported representations of a [`GroupKind`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RepKind {
    Standard,
    Sym(usize),
    Wedge(usize),
    Adjoint,
    Trivial,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::SL(n) => write!(f, "sl{n}"),
            GroupKind::SO(p, q) => write!(f, "so{p}{q}"),
        }
    }
}

impl fmt::Display for RepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepKind::Standard => write!(f, "std"),
            RepKind::Sym(k) => write!(f, "sym{k}"),
            RepKind::Wedge(k) => write!(f, "wedge{k}"),
            RepKind::Adjoint => write!(f, "adj"),
            RepKind::Trivial => write!(f, "triv"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    /// `sl3`, `so21`, `so3,2` and `so(3,2)` are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown group {s:?}"));
        let s = s.trim().to_ascii_lowercase();
        let digits = |t: &str| -> Vec<usize> {
            let t = t.trim_matches(|c| c == '(' || c == ')');
            if t.contains(',') {
                t.split(',').filter_map(|x| x.trim().parse().ok()).collect()
            } else {
                t.chars().filter_map(|c| c.to_digit(10).map(|d| d as usize)).collect()
            }
        };
        let g = if let Some(rest) = s.strip_prefix("sl") {
            GroupKind::SL(rest.trim_matches(|c| c == '(' || c == ')').parse().map_err(|_| bad())?)
        } else if let Some(rest) = s.strip_prefix("so") {
            match digits(rest)[..] {
                [p, q] => GroupKind::SO(p, q),
                [p] => GroupKind::SO(p, 0),
                _ => return Err(bad()),
            }
        } else {
            return Err(bad());
        };
        g.validate()?;
        Ok(g)
    }
}

impl FromStr for RepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let num = |p: &str| s[p.len()..].parse::<usize>().map_err(|_| Error::InvalidInput(format!("bad rep {s:?}")));
        Ok(match s.as_str() {
            "std" | "standard" => RepKind::Standard,
            "adj" | "adjoint" => RepKind::Adjoint,
            "triv" | "trivial" => RepKind::Trivial,
            _ if s.starts_with("sym") => RepKind::Sym(num("sym")?),
            _ if s.starts_with("wedge") => RepKind::Wedge(num("wedge")?),
            _ => return Err(Error::InvalidInput(format!("unknown representation {s:?}"))),
        })
    }
}

fn unit_matrix(n: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

fn plane_rotation(n: usize, i: usize, j: usize, angle: f64) -> Mat {
    let mut m = Mat::identity(n, n);
    let (c, s) = (angle.cos(), angle.sin());
    m[(i, i)] = c;
    m[(j, j)] = c;
    m[(i, j)] = -s;
    m[(j, i)] = s;
    m
}

/// Generic angle for the rotations generating a dense subgroup of a torus.
const GENERIC_ANGLE: f64 = 1.0;

impl GroupKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GroupKind::SL(n) if n >= 2 => Ok(()),
            GroupKind::SO(p, q) if p > q && p >= 2 => Ok(()),
            _ => Err(Error::InvalidInput(format!("unsupported group {self:?}"))),
        }
    }

    pub fn def_dim(&self) -> usize {
        match *self {
            GroupKind::SL(n) => n,
            GroupKind::SO(p, q) => p + q,
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, GroupKind::SO(_, 0))
    }

    pub fn root_system(&self) -> Result<RootSystemData> {
        match *self {
            GroupKind::SL(n) => build_root_system(Family::A, n - 1),
            GroupKind::SO(_, 0) => Ok(trivial_root_system()),
            GroupKind::SO(_, q) => build_root_system(Family::B, q),
        }
    }

    /// Number of ambient coordinates of `𝔞`.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            GroupKind::SL(n) => n,
            GroupKind::SO(_, q) => q,
        }
    }

    /// The element of `𝔞` with ambient coordinates `x`, in the defining
    /// representation. For `SL_n` the trace is projected away.
    pub fn cartan_def(&self, x: &[f64]) -> Mat {
        let n = self.def_dim();
        match *self {
            GroupKind::SL(_) => {
                let mean = x.iter().sum::<f64>() / n as f64;
                Mat::from_diagonal(&Vector::from_iterator(n, x.iter().map(|v| v - mean)))
            }
            GroupKind::SO(p, _) => {
                let mut m = Mat::zeros(n, n);
                for (i, &v) in x.iter().enumerate() {
                    m[(i, p + i)] = v;
                    m[(p + i, i)] = v;
                }
                m
            }
        }
    }

    /// Basis of the Lie algebra, orthonormal for `⟨A, B⟩ = tr(AᵀB)`.
    pub fn lie_basis(&self) -> Vec<Mat> {
        let n = self.def_dim();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::new();
        match *self {
            GroupKind::SL(_) => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            out.push(unit_matrix(n, i, j));
                        }
                    }
                }
                // Orthonormal traceless diagonals by Gram-Schmidt on eᵢ − eᵢ₊₁.
                let mut diags: Vec<Vector> = Vec::new();
                for i in 0..n - 1 {
                    let mut v = Vector::zeros(n);
                    v[i] = 1.0;
                    v[i + 1] = -1.0;
                    for d in &diags {
                        v -= d * d.dot(&v);
                    }
                    diags.push(linalg::unit(&v));
                }
                out.extend(diags.iter().map(Mat::from_diagonal));
            }
            GroupKind::SO(p, _) => {
                for i in 0..n {
                    for j in i + 1..n {
                        let same_block = (i < p) == (j < p);
                        let sign = if same_block { -1.0 } else { 1.0 };
                        out.push((unit_matrix(n, i, j) + unit_matrix(n, j, i) * sign) * s);
                    }
                }
            }
        }
        out
    }

    /// Basis of the Lie algebra of the maximal compact subgroup `K`.
    pub fn compact_basis(&self) -> Vec<Mat> {
        let n = self.def_dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let allowed = match *self {
                    GroupKind::SL(_) => true,
                    GroupKind::SO(p, _) => (i < p) == (j < p),
                };
                if allowed {
                    out.push(unit_matrix(n, i, j) - unit_matrix(n, j, i));
                }
            }
        }
        out
    }

    /// Generators of `M` (the centralizer of `𝔞` in `K`) in the defining
    /// representation; for the compact group, generators of all of `K`.
    pub fn m_generators_def(&self) -> Vec<Mat> {
        let n = self.def_dim();
        let mut out = Vec::new();
        match *self {
            GroupKind::SL(_) => {
                for i in 0..n - 1 {
                    let mut m = Mat::identity(n, n);
                    m[(i, i)] = -1.0;
                    m[(i + 1, i + 1)] = -1.0;
                    out.push(m);
                }
            }
            GroupKind::SO(p, q) => {
                for i in 0..q.saturating_sub(1) {
                    let mut m = Mat::identity(n, n);
                    for k in [i, i + 1, p + i, p + i + 1] {
                        m[(k, k)] = -1.0;
                    }
                    out.push(m);
                }
                for i in q..p.saturating_sub(1) {
                    out.push(plane_rotation(n, i, i + 1, GENERIC_ANGLE));
                }
            }
        }
        out
    }

    /// The chosen representative `w̃₀` of the longest Weyl element.
    pub fn w0_def(&self) -> Mat {
        let n = self.def_dim();
        match *self {
            GroupKind::SL(_) => {
                let mut m = Mat::zeros(n, n);
                for i in 0..n {
                    m[(i, n - 1 - i)] = 1.0;
                }
                if (n * (n - 1) / 2) % 2 == 1 {
                    m[(0, n - 1)] = -1.0;
                }
                m
            }
            GroupKind::SO(_, 0) => Mat::identity(n, n),
            GroupKind::SO(_, q) => {
                let mut m = Mat::identity(n, n);
                for i in 0..q {
                    m[(i, i)] = -1.0;
                }
                if q % 2 == 1 {
                    m[(q, q)] = -1.0;
                }
                m
            }
        }
    }

    /// The invariant quadratic form, for the orthogonal family.
    pub fn form(&self) -> Option<Mat> {
        match *self {
            GroupKind::SL(_) => None,
            GroupKind::SO(p, q) => {
                let mut d = vec![1.0; p];
                d.extend(std::iter::repeat(-1.0).take(q));
                Some(Mat::from_diagonal(&Vector::from_vec(d)))
            }
        }
    }

    /// Orthonormal basis adapted to the Cartan subspace: for `SO(p,q)` the
    /// columns `u₁⁺…u_q⁺, e_{q+1}…e_p, u_q⁻…u₁⁻` with `uᵢ^± = (eᵢ ± fᵢ)/√2`;
    /// the identity for `SL_n`.
    pub fn reference_basis(&self) -> Mat {
        let n = self.def_dim();
        match *self {
            GroupKind::SL(_) => Mat::identity(n, n),
            GroupKind::SO(p, q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut b = Mat::zeros(n, n);
                for i in 0..q {
                    b[(i, i)] = s;
                    b[(p + i, i)] = s;
                    b[(i, n - 1 - i)] = s;
                    b[(p + i, n - 1 - i)] = -s;
                }
                for j in q..p {
                    b[(j, j)] = 1.0;
                }
                b
            }
        }
    }

    /// Fundamental representations `Λ^{kᵢ}` and multipliers `nᵢ`, one per
    /// simple root, with highest restricted weight `nᵢϖᵢ`.
    pub fn fundamental_reps(&self) -> Vec<FundamentalRep> {
        match *self {
            GroupKind::SL(n) => (1..n).map(|k| FundamentalRep { wedge: k, multiplier: 1 }).collect(),
            GroupKind::SO(_, q) => {
                (1..=q).map(|k| FundamentalRep { wedge: k, multiplier: if k == q { 2 } else { 1 } }).collect()
            }
        }
    }
}

/// Handle to the fundamental-type representation `ρᵢ = Λ^{wedge}` of the
/// defining representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FundamentalRep {
    pub wedge: usize,
    pub multiplier: u32,
}

impl FundamentalRep {
    pub fn apply(&self, def: &Mat) -> Mat {
        linalg::compound(def, self.wedge)
    }
}

/// One restricted weight space.
#[derive(Clone, Debug)]
pub struct WeightSpace {
    pub weight: QVec,
    /// Orthonormal basis (columns).
    pub basis: Mat,
}

#[derive(Clone, Debug)]
enum Realization {
    Standard,
    Sym(SymBasis),
    Wedge(usize),
    Adjoint(Vec<Mat>),
    Trivial,
}

/// A realized triple `(G, ρ, V)` with its weight structure.
#[derive(Clone, Debug)]
pub struct ConcreteRep {
    pub group: GroupKind,
    pub kind: RepKind,
    pub rs: RootSystemData,
    pub dim_v: usize,
    /// One matrix per ambient coordinate of `𝔞`.
    pub cartan_basis: Vec<Mat>,
    pub m_generators: Vec<Mat>,
    pub w0_rep: Mat,
    /// Sorted by weight.
    pub weight_decomp: Vec<WeightSpace>,
    /// The invariant inner product (identity: every realization is in a
    /// `K`-orthonormal basis).
    pub gram_v: Mat,
    pub fundamental_type_reps: Vec<FundamentalRep>,
    pub highest: QVec,
    pub omega: WeightSet,
    realization: Realization,
}

/// Generic coefficients for a single Cartan element separating all weights.
fn generic_coefficients(k: usize) -> Vec<f64> {
    (0..k).map(|j| (2.0 + j as f64).sqrt() + std::f64::consts::PI * (j as f64 + 1.0).ln()).collect()
}

impl ConcreteRep {
    pub fn realize(group: GroupKind, kind: RepKind) -> Result<ConcreteRep> {
        group.validate()?;
        let n = group.def_dim();
        let realization = match kind {
            RepKind::Standard => Realization::Standard,
            RepKind::Trivial => Realization::Trivial,
            RepKind::Adjoint => Realization::Adjoint(group.lie_basis()),
            RepKind::Sym(k) if k >= 1 => Realization::Sym(SymBasis::new(n, k)),
            RepKind::Wedge(k) if k >= 1 && k < n => Realization::Wedge(k),
            _ => return Err(Error::InvalidInput(format!("unsupported representation {kind} of {group}"))),
        };
        let rs = group.root_system()?;
        let mut rep = ConcreteRep {
            group,
            kind,
            rs,
            dim_v: 0,
            cartan_basis: Vec::new(),
            m_generators: Vec::new(),
            w0_rep: Mat::zeros(0, 0),
            weight_decomp: Vec::new(),
            gram_v: Mat::zeros(0, 0),
            fundamental_type_reps: group.fundamental_reps(),
            highest: Vec::new(),
            omega: WeightSet { weights: Vec::new(), multiplicities: None, highest: Vec::new() },
            realization,
        };
        let amb = group.ambient_dim();
        rep.cartan_basis = (0..amb)
            .map(|j| {
                let mut x = vec![0.0; amb];
                x[j] = 1.0;
                rep.d_rho(&group.cartan_def(&x))
            })
            .collect();
        rep.dim_v = rep.rho(&Mat::identity(n, n)).nrows();
        rep.gram_v = Mat::identity(rep.dim_v, rep.dim_v);
        rep.m_generators = group.m_generators_def().iter().map(|m| rep.rho(m)).collect();
        rep.w0_rep = rep.rho(&group.w0_def());
        rep.weight_decomp = rep.decompose()?;
        let highest = rep.highest_weight();
        let omega = weight_set(&rep.rs, &highest)?;
        let found: Vec<QVec> = rep.weight_decomp.iter().map(|w| w.weight.clone()).collect();
        if found != omega.weights {
            return Err(Error::NearDegenerate(format!(
                "numerical weights ({}) disagree with the exact weight set ({})",
                found.len(),
                omega.len()
            )));
        }
        rep.highest = highest;
        rep.omega = omega;
        Ok(rep)
    }

    /// `ρ(g)` for `g` in the defining representation.
    pub fn rho(&self, g: &Mat) -> Mat {
        match &self.realization {
            Realization::Standard => g.clone(),
            Realization::Sym(b) => b.power(g),
            Realization::Wedge(k) => linalg::compound(g, *k),
            Realization::Adjoint(basis) => {
                let ginv = g.clone().try_inverse().expect("group elements are invertible");
                let d = basis.len();
                let images: Vec<Mat> = basis.iter().map(|b| g * b * &ginv).collect();
                Mat::from_fn(d, d, |i, j| basis[i].dot(&images[j]))
            }
            Realization::Trivial => Mat::identity(1, 1),
        }
    }

    /// `dρ(x)` for `x` in the Lie algebra, in the defining representation.
    pub fn d_rho(&self, x: &Mat) -> Mat {
        match &self.realization {
            Realization::Standard => x.clone(),
            Realization::Sym(b) => b.derivation(x),
            Realization::Wedge(k) => linalg::wedge_derivation(x, *k),
            Realization::Adjoint(basis) => {
                let d = basis.len();
                let images: Vec<Mat> = basis.iter().map(|b| x * b - b * x).collect();
                Mat::from_fn(d, d, |i, j| basis[i].dot(&images[j]))
            }
            Realization::Trivial => Mat::zeros(1, 1),
        }
    }

    /// Joint eigenspaces of the Cartan action, from one generic symmetric
    /// combination; weights are rounded through integral ϖ-coordinates.
    fn decompose(&self) -> Result<Vec<WeightSpace>> {
        let d = self.dim_v;
        if self.cartan_basis.is_empty() {
            return Ok(vec![WeightSpace { weight: Vec::new(), basis: Mat::identity(d, d) }]);
        }
        let coef = generic_coefficients(self.cartan_basis.len());
        let mut h = Mat::zeros(d, d);
        for (c, m) in coef.iter().zip(&self.cartan_basis) {
            h += m * *c;
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let scale = 1.0 + vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut out = Vec::new();
        for range in linalg::cluster_sorted(&vals, 1e-6 * scale) {
            let basis = Mat::from_fn(d, range.len(), |r, c| eig.eigenvectors[(r, order[range.start + c])]);
            let numeric: Vec<f64> = self
                .cartan_basis
                .iter()
                .map(|m| (basis.transpose() * m * &basis).trace() / range.len() as f64)
                .collect();
            let weight = self.round_weight(&numeric)?;
            for (m, &lam) in self.cartan_basis.iter().zip(&numeric) {
                let res = (m * &basis - &basis * lam).norm();
                if res > 1e-10 * (1.0 + m.norm()) {
                    return Err(Error::NearDegenerate(format!("weight-space residual {res:.3e}")));
                }
            }
            out.push(WeightSpace { weight, basis });
        }
        out.sort_by(|a, b| a.weight.cmp(&b.weight));
        for w in out.windows(2) {
            if w[0].weight == w[1].weight {
                return Err(Error::NearDegenerate("two eigenvalue clusters round to the same weight".into()));
            }
        }
        Ok(out)
    }

    fn round_weight(&self, numeric: &[f64]) -> Result<QVec> {
        let rs = &self.rs;
        let coords: Vec<Rat> = (0..rs.rank)
            .map(|i| {
                let ap = exact::vec_to_f64(&rs.alpha_prime(i));
                let c = 2.0 * dot(numeric, &ap) / dot(&ap, &ap);
                Rat::from_integer(c.round() as i64)
            })
            .collect();
        let w = rs.from_omega_coords(&coords);
        let err = exact::vec_to_f64(&w).iter().zip(numeric).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-8 {
            return Err(Error::NearDegenerate(format!("weight {numeric:?} is not integral (error {err:.3e})")));
        }
        Ok(w)
    }

    /// The weight maximizing `⟨λ, ρ⟩`, which is the highest weight.
    fn highest_weight(&self) -> QVec {
        let rho = self.rs.rho();
        self.weight_decomp
            .iter()
            .map(|w| w.weight.clone())
            .max_by(|a, b| exact::dot(a, &rho).cmp(&exact::dot(b, &rho)))
            .unwrap_or_default()
    }

    pub fn weight_space(&self, w: &[Rat]) -> Option<&WeightSpace> {
        self.weight_decomp.iter().find(|s| s.weight == w)
    }

    /// Orthonormal basis of the sum of the weight spaces for `weights`.
    pub fn span_of(&self, weights: &[QVec]) -> Mat {
        let blocks: Vec<&Mat> =
            self.weight_decomp.iter().filter(|s| weights.contains(&s.weight)).map(|s| &s.basis).collect();
        if blocks.is_empty() {
            return Mat::zeros(self.dim_v, 0);
        }
        linalg::hstack(&blocks)
    }

    /// `Λ^{kᵢ}` images of a defining matrix, one per simple root.
    pub fn fundamental_images(&self, def: &Mat) -> Vec<Mat> {
        self.fundamental_type_reps.iter().map(|f| f.apply(def)).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Numerically computed weight multiplicities.
pub fn restricted_weight_diag(rep: &ConcreteRep) -> BTreeMap<QVec, usize> {
    rep.weight_decomp.iter().map(|s| (s.weight.clone(), s.basis.ncols())).collect()
}

/// Outcome of the fixed-vector criterion.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub v0_dim: usize,
    /// Orthonormal basis of `V^t₀`, the vectors fixed by `L = MA`.
    pub vt0_basis: Mat,
    pub moved_by_w0: bool,
    /// Unit vector of `V^t₀` maximizing `‖w̃₀v − v‖`.
    pub witness: Option<Vector>,
    /// Action of `w̃₀` on `V^t₀` in the `vt0_basis` coordinates.
    pub w0_on_vt0: Mat,
    /// Largest `‖(g − Id)v‖` over generators and basis vectors.
    pub residual: f64,
}

impl CriterionReport {
    pub fn holds(&self) -> bool {
        self.moved_by_w0
    }
}

pub fn check_criterion(rep: &ConcreteRep) -> CriterionReport {
    let d = rep.dim_v;
    let id = Mat::identity(d, d);
    let mut blocks: Vec<Mat> = rep.cartan_basis.clone();
    blocks.extend(rep.m_generators.iter().map(|m| m - &id));
    let refs: Vec<&Mat> = blocks.iter().collect();
    let stacked = if refs.is_empty() { Mat::zeros(0, d) } else { linalg::vstack(&refs) };
    let vt0 = linalg::null_space(&stacked, rank_tol());
    let residual = if vt0.ncols() == 0 || blocks.is_empty() {
        0.0
    } else {
        blocks.iter().map(|b| (b * &vt0).amax()).fold(0.0, f64::max)
    };
    let zero = vec![Rat::from_integer(0); rep.rs.ambient_dim];
    let v0_dim = rep.weight_space(&zero).map(|s| s.basis.ncols()).unwrap_or(0);
    let w0_on_vt0 = vt0.transpose() * &rep.w0_rep * &vt0;
    let t = vt0.ncols();
    let (moved_by_w0, witness) = if t == 0 {
        (false, None)
    } else {
        let defect = &rep.w0_rep * &vt0 - &vt0;
        let svd = linalg::svd_full(&defect);
        let moved = svd.s[0] > rank_tol() * (1.0 + rep.w0_rep.norm());
        let v = &vt0 * svd.v.column(0);
        (moved, if moved { Some(linalg::unit(&v)) } else { None })
    };
    CriterionReport { v0_dim, vt0_basis: vt0, moved_by_w0, witness, w0_on_vt0, residual }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_groups() {
        assert_eq!("so21".parse::<GroupKind>().unwrap(), GroupKind::SO(2, 1));
        assert_eq!("so(3,2)".parse::<GroupKind>().unwrap(), GroupKind::SO(3, 2));
        assert_eq!("sl3".parse::<GroupKind>().unwrap(), GroupKind::SL(3));
        assert!("so12".parse::<GroupKind>().is_err());
        assert_eq!("sym3".parse::<RepKind>().unwrap(), RepKind::Sym(3));
    }

    #[test]
    fn w0_representatives_have_det_one() {
        for g in [GroupKind::SL(2), GroupKind::SL(3), GroupKind::SL(4), GroupKind::SO(2, 1), GroupKind::SO(3, 2)] {
            assert!((g.w0_def().determinant() - 1.0).abs() < 1e-12, "{g}");
        }
    }

    #[test]
    fn so_lie_basis_preserves_form() {
        let g = GroupKind::SO(3, 2);
        let q = g.form().unwrap();
        for x in g.lie_basis() {
            assert!((x.transpose() * &q + &q * &x).norm() < 1e-14);
        }
        assert_eq!(g.lie_basis().len(), 10);
    }
}
