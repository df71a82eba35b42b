//! Restricted weight sets of irreducible representations, Freudenthal
//! multiplicities in the split case, and the limited / abundant / awkward /
//! swinging classification.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::exact::{self, dot, fmt_rat, int, QVec};
use crate::root_system::RootSystemData;
use crate::{Error, Rat, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    /// Distinct weights, sorted.
    pub weights: Vec<QVec>,
    pub multiplicities: Option<BTreeMap<QVec, u64>>,
    pub highest: QVec,
}

impl WeightSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn contains(&self, w: &[Rat]) -> bool {
        self.weights.binary_search_by(|x| x.as_slice().cmp(w)).is_ok()
    }

    /// Total dimension, when multiplicities are known.
    pub fn dimension(&self) -> Option<u64> {
        self.multiplicities.as_ref().map(|m| m.values().sum())
    }

    pub fn multiplicity(&self, w: &[Rat]) -> Option<u64> {
        self.multiplicities.as_ref().map(|m| m.get(w).copied().unwrap_or(0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepClassification {
    pub zero_is_weight: bool,
    pub limited: bool,
    pub abundant: bool,
    pub awkward: bool,
    pub swinging: bool,
    #[serde(serialize_with = "ser_qvecs")]
    pub omega_w0: Vec<QVec>,
}

pub(crate) fn ser_qvecs<S: serde::Serializer>(v: &[QVec], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.iter().map(fmt_rat).collect::<Vec<_>>())?;
    }
    seq.end()
}

/// Checks that `highest` is dominant with integral fundamental-weight
/// coordinates and lies in the span of the roots.
pub fn check_highest(rs: &RootSystemData, highest: &[Rat]) -> Result<()> {
    let show = || highest.iter().map(fmt_rat).collect::<Vec<_>>().join(",");
    if highest.len() != rs.ambient_dim {
        return Err(Error::InvalidInput(format!(
            "weight has {} coordinates, expected {}",
            highest.len(),
            rs.ambient_dim
        )));
    }
    let c = rs.omega_coords(highest);
    if c.iter().any(|x| !x.is_integer() || x.is_negative()) {
        return Err(Error::NotDominant(show()));
    }
    if rs.from_omega_coords(&c) != highest {
        return Err(Error::NotDominant(format!("{} is outside the span of the roots", show())));
    }
    Ok(())
}

/// Coefficients of `λ - w₀λ` on the simple roots: the box in which every
/// weight `λ - Σ kᵢαᵢ` must lie.
fn depth_box(rs: &RootSystemData, highest: &[Rat]) -> Vec<i64> {
    let diff = exact::sub(highest, &rs.apply_w0(highest));
    rs.root_coords(&diff)
        .expect("λ - w₀λ lies in the root lattice")
        .iter()
        .map(|c| c.to_integer())
        .collect()
}

fn box_points(bounds: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &b in bounds {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for p in &out {
            for k in 0..=b {
                let mut q = p.clone();
                q.push(k);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn lower_by(rs: &RootSystemData, highest: &[Rat], k: &[i64]) -> QVec {
    let mut mu = highest.to_vec();
    for (ki, a) in k.iter().zip(&rs.simple_roots) {
        if *ki != 0 {
            for (m, ai) in mu.iter_mut().zip(a) {
                *m -= int(*ki) * ai;
            }
        }
    }
    mu
}

/// `λ - μ` is a nonnegative combination of simple roots.
fn below(rs: &RootSystemData, lambda: &[Rat], mu: &[Rat]) -> bool {
    match rs.root_coords(&exact::sub(lambda, mu)) {
        Some(c) => c.iter().all(|x| !x.is_negative()),
        None => false,
    }
}

/// `Ω = (λ + root lattice) ∩ Conv(W·λ)`.
///
/// Walks the root-lattice box `λ - Σ kᵢαᵢ`, `0 ≤ kᵢ ≤ cᵢ(λ - w₀λ)`, and keeps
/// the points whose dominant conjugate lies below `λ`, which is exactly the
/// hull condition.
pub fn weight_set(rs: &RootSystemData, highest: &[Rat]) -> Result<WeightSet> {
    check_highest(rs, highest)?;
    let bounds = depth_box(rs, highest);
    let mut weights: Vec<QVec> = box_points(&bounds)
        .into_iter()
        .map(|k| lower_by(rs, highest, &k))
        .filter(|mu| below(rs, highest, &rs.dominant_rep(mu)))
        .collect();
    weights.sort();
    weights.dedup();
    Ok(WeightSet { weights, multiplicities: None, highest: highest.to_vec() })
}

/// Same set as [`weight_set`], with hull membership decided by exact linear
/// programming over the vertex set `W·λ`. Slower; used as a cross-check.
pub fn weight_set_lp(rs: &RootSystemData, highest: &[Rat]) -> Result<WeightSet> {
    check_highest(rs, highest)?;
    let orbit = rs.orbit(highest);
    let bounds = depth_box(rs, highest);
    let mut weights: Vec<QVec> = box_points(&bounds)
        .into_iter()
        .map(|k| lower_by(rs, highest, &k))
        .filter(|mu| exact::in_convex_hull(&orbit, mu))
        .collect();
    weights.sort();
    weights.dedup();
    Ok(WeightSet { weights, multiplicities: None, highest: highest.to_vec() })
}

/// Weight multiplicities by Freudenthal's recursion (split groups only, so
/// the root system must be reduced).
pub fn multiplicities_split(rs: &RootSystemData, highest: &[Rat], split: bool) -> Result<WeightSet> {
    if !split || rs.doubled.iter().any(|d| *d) {
        return Err(Error::NonSplit);
    }
    check_highest(rs, highest)?;
    let rho = rs.rho();
    let lr = exact::add(highest, &rho);
    let top = dot(&lr, &lr);
    let height = |mu: &[Rat]| -> i64 {
        rs.root_coords(&exact::sub(highest, mu))
            .map(|c| c.iter().fold(Rat::zero(), |a, b| a + b).to_integer())
            .unwrap_or(i64::MAX)
    };
    let root_height: Vec<i64> = rs
        .positive_roots
        .iter()
        .map(|a| rs.root_coords(a).unwrap().iter().fold(Rat::zero(), |x, y| x + y).to_integer())
        .collect();

    let bounds = depth_box(rs, highest);
    let mut dominant: Vec<(i64, QVec)> = box_points(&bounds)
        .into_iter()
        .map(|k| lower_by(rs, highest, &k))
        .filter(|mu| rs.is_dominant(mu))
        .map(|mu| (height(&mu), mu))
        .collect();
    dominant.sort();

    let mut dom_mult: HashMap<QVec, i64> = HashMap::new();
    for (depth, mu) in &dominant {
        if *depth == 0 {
            dom_mult.insert(mu.clone(), 1);
            continue;
        }
        let mut acc = Rat::zero();
        for (alpha, &ha) in rs.positive_roots.iter().zip(&root_height) {
            let mut k = 1;
            while k * ha <= *depth {
                let nu = exact::add(mu, &exact::scale(&int(k), alpha));
                let m = dom_mult.get(&rs.dominant_rep(&nu)).copied().unwrap_or(0);
                if m != 0 {
                    acc += int(m) * dot(&nu, alpha);
                }
                k += 1;
            }
        }
        let mr = exact::add(mu, &rho);
        let denom = top - dot(&mr, &mr);
        let m = int(2) * acc / denom;
        debug_assert!(m.is_integer() && !m.is_negative());
        dom_mult.insert(mu.clone(), m.to_integer());
    }

    let mut mults = BTreeMap::new();
    for (mu, m) in &dom_mult {
        if *m > 0 {
            for w in rs.orbit(mu) {
                mults.insert(w, *m as u64);
            }
        }
    }
    let weights = mults.keys().cloned().collect();
    Ok(WeightSet { weights, multiplicities: Some(mults), highest: highest.to_vec() })
}

/// Weyl dimension formula `Π⟨λ+ρ, α⟩/⟨ρ, α⟩` over positive roots (reduced
/// systems).
pub fn weyl_dimension(rs: &RootSystemData, highest: &[Rat]) -> Option<u64> {
    if rs.doubled.iter().any(|d| *d) {
        return None;
    }
    let rho = rs.rho();
    let lr = exact::add(highest, &rho);
    let mut d = int(1);
    for a in &rs.positive_roots {
        d *= dot(&lr, a) / dot(&rho, a);
    }
    d.to_u64()
}

/// `λ` is an integer multiple of some root (zero included).
fn is_root_multiple(rs: &RootSystemData, lambda: &[Rat]) -> bool {
    if exact::is_zero(lambda) {
        return true;
    }
    rs.roots.iter().any(|a| {
        let Some(k) = a.iter().zip(lambda).find(|(ai, _)| !ai.is_zero()).map(|(ai, li)| li / ai) else {
            return false;
        };
        k.is_integer() && exact::scale(&k, a) == lambda
    })
}

/// Limited / abundant / awkward / swinging classification.
pub fn classify(rs: &RootSystemData, omega: &WeightSet) -> RepClassification {
    let zero = vec![Rat::zero(); rs.ambient_dim];
    let zero_is_weight = omega.contains(&zero);
    let limited = omega.weights.iter().all(|w| is_root_multiple(rs, w));
    let abundant = zero_is_weight && rs.roots.iter().all(|a| omega.contains(a));
    let omega_w0: Vec<QVec> = omega
        .weights
        .iter()
        .filter(|w| rs.apply_w0(w) == **w)
        .cloned()
        .collect();
    let swinging = omega_w0.iter().any(|w| !exact::is_zero(w));
    RepClassification {
        zero_is_weight,
        limited,
        abundant,
        awkward: !limited && !abundant,
        swinging,
        omega_w0,
    }
}

/// `Σ ⊂ Ω` for simple, simply-laced systems and nontrivial `Ω`.
pub fn roots_in_weights_check(rs: &RootSystemData, omega: &WeightSet) -> Result<bool> {
    if !rs.is_simple() || !rs.is_simply_laced() {
        return Err(Error::NotApplicable("root system is not simple and simply-laced".into()));
    }
    if omega.weights.iter().all(|w| exact::is_zero(w)) {
        return Err(Error::NotApplicable("weight set is {0}".into()));
    }
    Ok(rs.roots.iter().all(|a| omega.contains(a)))
}

/// Applies every simple reflection and checks that `Ω` (and its
/// multiplicities) is preserved.
pub fn is_weyl_invariant(rs: &RootSystemData, omega: &WeightSet) -> bool {
    let set: BTreeSet<&QVec> = omega.weights.iter().collect();
    (0..rs.rank).all(|i| {
        omega.weights.iter().all(|w| {
            let s = rs.reflect_simple(i, w);
            set.contains(&s)
                && match &omega.multiplicities {
                    Some(m) => m.get(w) == m.get(&s),
                    None => true,
                }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::{build_root_system, Family};

    #[test]
    fn trivial_weight_is_zero() {
        let rs = build_root_system(Family::B, 3).unwrap();
        let ws = weight_set(&rs, &vec![Rat::zero(); 3]).unwrap();
        assert_eq!(ws.weights, vec![vec![Rat::zero(); 3]]);
    }

    #[test]
    fn non_dominant_rejected() {
        let rs = build_root_system(Family::A, 2).unwrap();
        let lam = rs.from_omega_coords(&[int(-1), int(1)]);
        assert!(matches!(weight_set(&rs, &lam), Err(Error::NotDominant(_))));
    }

    #[test]
    fn bc_refuses_multiplicities() {
        let rs = build_root_system(Family::BC, 2).unwrap();
        let lam = rs.from_omega_coords(&[int(1), int(0)]);
        assert!(matches!(multiplicities_split(&rs, &lam, true), Err(Error::NonSplit)));
        let rs = build_root_system(Family::A, 2).unwrap();
        let lam = rs.from_omega_coords(&[int(1), int(0)]);
        assert!(matches!(multiplicities_split(&rs, &lam, false), Err(Error::NonSplit)));
    }

    #[test]
    fn root_multiples() {
        let rs = build_root_system(Family::C, 2).unwrap();
        assert!(is_root_multiple(&rs, &[int(2), int(0)]));
        assert!(is_root_multiple(&rs, &[int(-2), int(2)]));
        assert!(!is_root_multiple(&rs, &[int(1), int(0)]));
    }
}
