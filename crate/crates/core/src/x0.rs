//! Choice of the reference vector `X₀`: type partitions, generically
//! symmetric and extreme representatives, the departure pairs, and the
//! regularity predicates on Cartan vectors.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exact::{self, dot, fmt_rat, int, rat, QVec};
use crate::root_system::{RootSystemData, DEFAULT_WEYL_CAP};
use crate::weights::{ser_qvecs, WeightSet};
use crate::{Error, Rat, Result};

/// `Ω^>_X`, `Ω^=_X`, `Ω^<_X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypePartition {
    #[serde(serialize_with = "ser_qvecs")]
    pub gt: Vec<QVec>,
    #[serde(serialize_with = "ser_qvecs")]
    pub eq: Vec<QVec>,
    #[serde(serialize_with = "ser_qvecs")]
    pub lt: Vec<QVec>,
}

impl TypePartition {
    pub fn ge(&self) -> Vec<QVec> {
        let mut v = self.gt.clone();
        v.extend(self.eq.iter().cloned());
        v.sort();
        v
    }

    pub fn le(&self) -> Vec<QVec> {
        let mut v = self.lt.clone();
        v.extend(self.eq.iter().cloned());
        v.sort();
        v
    }
}

pub fn type_partition(omega: &WeightSet, x: &[Rat]) -> TypePartition {
    let (mut gt, mut eq, mut lt) = (Vec::new(), Vec::new(), Vec::new());
    for w in &omega.weights {
        let v = dot(w, x);
        if v.is_positive() {
            gt.push(w.clone());
        } else if v.is_negative() {
            lt.push(w.clone());
        } else {
            eq.push(w.clone());
        }
    }
    TypePartition { gt, eq, lt }
}

/// `X` and `Y` have the same type.
pub fn same_type(omega: &WeightSet, x: &[Rat], y: &[Rat]) -> bool {
    let (a, b) = (type_partition(omega, x), type_partition(omega, y));
    a.gt == b.gt && a.lt == b.lt
}

/// `Ω^{w₀}`.
pub fn omega_w0(rs: &RootSystemData, omega: &WeightSet) -> Vec<QVec> {
    omega.weights.iter().filter(|w| rs.apply_w0(w) == **w).cloned().collect()
}

pub fn is_symmetric(rs: &RootSystemData, x: &[Rat]) -> bool {
    rs.opposition_involution(x) == x
}

pub fn is_generically_symmetric(rs: &RootSystemData, omega: &WeightSet, x: &[Rat]) -> bool {
    is_symmetric(rs, x) && type_partition(omega, x).eq == omega_w0(rs, omega)
}

/// Number of elements of `W_{ρ,X}` and of `W_X`.
pub fn stabilizer_orders(rs: &RootSystemData, omega: &WeightSet, x: &[Rat], cap: usize) -> Result<(usize, usize)> {
    let p = type_partition(omega, x);
    let w_rho = rs.stabilizer_of_all(&[&p.gt, &p.lt], cap)?;
    let w_x = w_rho.iter().filter(|w| w.apply(x) == x).count();
    Ok((w_rho.len(), w_x))
}

pub fn is_extreme(rs: &RootSystemData, omega: &WeightSet, x: &[Rat], cap: usize) -> Result<bool> {
    let (a, b) = stabilizer_orders(rs, omega, x, cap)?;
    Ok(a == b)
}

/// Vectors `ϖᵢ^∨` in the span of the roots with `αⱼ(ϖᵢ^∨) = δᵢⱼ`.
pub fn fundamental_coweights(rs: &RootSystemData) -> Vec<QVec> {
    let gram: Vec<Vec<Rat>> = rs
        .simple_roots
        .iter()
        .map(|a| rs.simple_roots.iter().map(|b| dot(a, b)).collect())
        .collect();
    (0..rs.rank)
        .map(|i| {
            let rhs: Vec<Rat> = (0..rs.rank).map(|j| if i == j { int(1) } else { Rat::zero() }).collect();
            let c = exact::solve(&gram, &rhs).expect("simple roots are independent");
            let mut v = vec![Rat::zero(); rs.ambient_dim];
            for (ck, a) in c.iter().zip(&rs.simple_roots) {
                for (vi, ai) in v.iter_mut().zip(a) {
                    *vi += ck * ai;
                }
            }
            v
        })
        .collect()
}

/// The vector with simple-root values `a`.
pub fn from_simple_root_values(rs: &RootSystemData, a: &[Rat]) -> QVec {
    let cw = fundamental_coweights(rs);
    let mut v = vec![Rat::zero(); rs.ambient_dim];
    for (ai, w) in a.iter().zip(&cw) {
        for (vi, wi) in v.iter_mut().zip(w) {
            *vi += ai * wi;
        }
    }
    v
}

fn nontrivial(rs: &RootSystemData, omega: &WeightSet) -> Result<()> {
    if rs.rank == 0 || omega.weights.iter().all(|w| exact::is_zero(w)) {
        return Err(Error::TriviallyFails("the weight set is {0}".into()));
    }
    Ok(())
}

/// Seeded search for a dominant `X` with `-w₀X = X` and `Ω^=_X = Ω^{w₀}`.
///
/// Candidates are strictly dominant and `-w₀`-symmetric, with simple-root
/// values `1 + uᵢ`, `uᵢ` drawn from a range that widens with each attempt.
pub fn find_generically_symmetric(rs: &RootSystemData, omega: &WeightSet, seed: u64) -> Result<QVec> {
    nontrivial(rs, omega)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = omega_w0(rs, omega);
    for attempt in 0..10_000u32 {
        let range = 4i64 << (attempt / 8).min(20);
        let mut a = vec![Rat::zero(); rs.rank];
        for i in 0..rs.rank {
            let j = rs.opposition[i];
            if j < i {
                a[i] = a[j];
            } else {
                a[i] = int(1 + rng.random_range(0..range));
            }
        }
        let x = from_simple_root_values(rs, &a);
        if type_partition(omega, &x).eq == target {
            return Ok(x);
        }
    }
    unreachable!("generic symmetric vectors form a dense open subset of the symmetric chamber")
}

/// `X' = Σ_{w ∈ W_{ρ,X}} wX`.
pub fn extremize(rs: &RootSystemData, omega: &WeightSet, x: &[Rat], cap: usize) -> Result<QVec> {
    let p = type_partition(omega, x);
    let w_rho = rs.stabilizer_of_all(&[&p.gt, &p.lt], cap)?;
    let mut sum = vec![Rat::zero(); rs.ambient_dim];
    for w in &w_rho {
        sum = exact::add(&sum, &w.apply(x));
    }
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DepartPair {
    /// Index `i` of the simple root.
    pub index: usize,
    #[serde(serialize_with = "ser_qvec")]
    pub alpha: QVec,
    #[serde(serialize_with = "ser_qvec")]
    pub lambda_ge: QVec,
    #[serde(serialize_with = "ser_qvec")]
    pub lambda_lt: QVec,
    /// How many admissible pairs existed.
    pub candidates: usize,
}

fn ser_qvec<S: serde::Serializer>(v: &QVec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_rat))
}

/// All pairs `(λ^≥, λ^<)` with `λ^≥ - λ^< = αᵢ`, `λ^< ∈ Ω^<`, and
/// `λ^≥ ∈ Ω^≥` (weak) or `λ^≥ ∈ Ω^> ∪ {0}` (strong), preferred first.
pub fn pair_candidates(
    rs: &RootSystemData,
    omega: &WeightSet,
    p: &TypePartition,
    i: usize,
    strong: bool,
) -> Vec<(QVec, QVec)> {
    let alpha = &rs.simple_roots[i];
    let mut out: Vec<(QVec, QVec)> = p
        .lt
        .iter()
        .filter_map(|lt| {
            let ge = exact::add(lt, alpha);
            if !omega.contains(&ge) {
                return None;
            }
            let ok = if strong {
                p.gt.binary_search(&ge).is_ok() || exact::is_zero(&ge)
            } else {
                p.gt.binary_search(&ge).is_ok() || p.eq.binary_search(&ge).is_ok()
            };
            ok.then(|| (ge, lt.clone()))
        })
        .collect();
    // λ^≥ = 0 first when available, then the lexicographically largest λ^<.
    out.sort_by(|a, b| exact::is_zero(&b.0).cmp(&exact::is_zero(&a.0)).then_with(|| b.1.cmp(&a.1)));
    out
}

/// Weak and strong departure pairs for every `i ∈ Π ∖ Π_{X₀}`. Prefers
/// `λ^≥ = 0`, then the lexicographically largest `λ^<`.
pub fn depart_pairs(
    rs: &RootSystemData,
    omega: &WeightSet,
    p: &TypePartition,
    x0: &[Rat],
) -> Result<(Vec<DepartPair>, Vec<DepartPair>)> {
    let walls = rs.wall_indices(x0);
    let mut weak = Vec::new();
    let mut strong = Vec::new();
    for i in (0..rs.rank).filter(|i| !walls.contains(i)) {
        for (is_strong, out) in [(false, &mut weak), (true, &mut strong)] {
            let c = pair_candidates(rs, omega, p, i, is_strong);
            let Some((ge, lt)) = c.first().cloned() else {
                return Err(Error::LemmaViolated(format!(
                    "no {} pair for simple root {}",
                    if is_strong { "strong" } else { "weak" },
                    i + 1
                )));
            };
            out.push(DepartPair {
                index: i,
                alpha: rs.simple_roots[i].clone(),
                lambda_ge: ge,
                lambda_lt: lt,
                candidates: c.len(),
            });
        }
    }
    Ok((weak, strong))
}

#[derive(Clone, Debug, Serialize)]
pub struct X0Certificate {
    #[serde(serialize_with = "ser_qvec")]
    pub x0: QVec,
    pub symmetric: bool,
    pub generically_symmetric: bool,
    pub extreme: bool,
    pub partition: TypePartition,
    /// Indices of `Π_{X₀}`.
    pub pi_x0: Vec<usize>,
    /// `Π_{X₀}` as root covectors.
    #[serde(serialize_with = "ser_qvecs")]
    pub pi_x0_roots: Vec<QVec>,
    /// Generators of `W_{X₀}` (simple reflections, by index).
    pub w_x0_generators: Vec<usize>,
    pub w_x0_order: usize,
    pub w_rho_x0_order: usize,
    pub pairs_weak: Vec<DepartPair>,
    pub pairs_strong: Vec<DepartPair>,
}

/// Evaluates every certificate field for a given `X₀`. Departure pairs are
/// only computed when `X₀` is generically symmetric and extreme.
pub fn certify(rs: &RootSystemData, omega: &WeightSet, x0: &[Rat], cap: usize) -> Result<X0Certificate> {
    if x0.len() != rs.ambient_dim {
        return Err(Error::InvalidInput(format!("X₀ has {} coordinates, expected {}", x0.len(), rs.ambient_dim)));
    }
    if !rs.is_dominant(x0) {
        return Err(Error::InvalidInput("X₀ is not dominant".into()));
    }
    let partition = type_partition(omega, x0);
    let symmetric = is_symmetric(rs, x0);
    let generically_symmetric = symmetric && partition.eq == omega_w0(rs, omega);
    let (w_rho_x0_order, w_x0_order) = stabilizer_orders(rs, omega, x0, cap)?;
    let extreme = w_rho_x0_order == w_x0_order;
    let pi_x0 = rs.wall_indices(x0);
    let (pairs_weak, pairs_strong) = if generically_symmetric && extreme {
        depart_pairs(rs, omega, &partition, x0)?
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(X0Certificate {
        x0: x0.to_vec(),
        symmetric,
        generically_symmetric,
        extreme,
        pi_x0_roots: pi_x0.iter().map(|&i| rs.simple_roots[i].clone()).collect(),
        w_x0_generators: pi_x0.clone(),
        pi_x0,
        partition,
        w_x0_order,
        w_rho_x0_order,
        pairs_weak,
        pairs_strong,
    })
}

/// Generically symmetric search followed by extremization and certification.
pub fn find_x0(rs: &RootSystemData, omega: &WeightSet, seed: u64) -> Result<X0Certificate> {
    let x = find_generically_symmetric(rs, omega, seed)?;
    let x0 = extremize(rs, omega, &x, DEFAULT_WEYL_CAP)?;
    certify(rs, omega, &x0, DEFAULT_WEYL_CAP)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VectorPredicates {
    pub x0_regular: bool,
    pub rho_regular: bool,
    pub asymptotically_contracting: bool,
    pub compatible: bool,
    /// Weights outside `Ω^=_{X₀}` that vanish on `Y`.
    #[serde(serialize_with = "ser_qvecs")]
    pub vanishing: Vec<QVec>,
}

/// Regularity predicates of `Y` relative to a certified `X₀`.
pub fn vector_predicates(rs: &RootSystemData, cert: &X0Certificate, y: &[Rat]) -> VectorPredicates {
    let p = &cert.partition;
    let x0_regular = (0..rs.rank)
        .filter(|i| !cert.pi_x0.contains(i))
        .all(|i| !dot(&rs.simple_roots[i], y).is_zero());
    let vanishing: Vec<QVec> = p
        .gt
        .iter()
        .chain(&p.lt)
        .filter(|w| dot(w, y).is_zero())
        .cloned()
        .collect();
    let rho_regular = x0_regular && vanishing.is_empty();
    let max_lt = p.lt.iter().map(|w| dot(w, y)).max();
    let min_ge = p.gt.iter().chain(&p.eq).map(|w| dot(w, y)).min();
    let asymptotically_contracting = match (max_lt, min_ge) {
        (Some(a), Some(b)) => a < b,
        _ => true,
    };
    let compatible =
        p.lt.iter().all(|w| dot(w, y).is_negative()) && p.gt.iter().all(|w| dot(w, y).is_positive());
    VectorPredicates { x0_regular, rho_regular, asymptotically_contracting, compatible, vanishing }
}

/// A strictly dominant vector compatible with `X₀`: `X₀` itself when it is
/// strictly dominant, otherwise `X₀ + ε ρ^∨` with a seeded `ε`, halved
/// until compatibility holds.
pub fn compatible_cone_sample(rs: &RootSystemData, cert: &X0Certificate, seed: u64) -> QVec {
    if rs.is_strictly_dominant(&cert.x0) {
        return cert.x0.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = from_simple_root_values(rs, &vec![int(1); rs.rank]);
    let mut eps = rat(rng.random_range(1..=16), 16);
    loop {
        let y = exact::add(&cert.x0, &exact::scale(&eps, &dir));
        if rs.is_strictly_dominant(&y) && vector_predicates(rs, cert, &y).compatible {
            return y;
        }
        eps /= int(2);
    }
}
