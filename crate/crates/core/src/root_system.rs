//! Restricted root systems of types A, B, C, D, BC and their products, in
//! the usual e-coordinates, with Weyl group, longest element and
//! fundamental weights.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{self, dot, fmt_rat, int, neg, QMat, QVec};
use crate::{Error, Rat, Result};

/// Default bound on the number of Weyl group elements enumerated.
pub const DEFAULT_WEYL_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    BC,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::BC => "BC",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "BC" => Ok(Family::BC),
            _ => Err(Error::Unsupported(s.into(), "unknown family".into())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RootSystemData {
    /// Irreducible factors, in order (factor-major coordinates).
    pub components: Vec<(Family, usize)>,
    pub rank: usize,
    pub ambient_dim: usize,
    pub simple_roots: Vec<QVec>,
    /// Whether `2 αᵢ` is also a root.
    pub doubled: Vec<bool>,
    pub positive_roots: Vec<QVec>,
    /// `Σ⁺` followed by `-Σ⁺`.
    pub roots: Vec<QVec>,
    /// Inner product on the ambient space (the standard one).
    pub gram: QMat,
    pub fundamental_weights: Vec<QVec>,
    pub w0: QMat,
    /// A reduced word for `w₀` (indices of simple reflections, leftmost first).
    pub w0_word: Vec<usize>,
    /// `-w₀(αᵢ) = α_{σ(i)}`.
    pub opposition: Vec<usize>,
}

/// A Weyl group element acting on the ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElement {
    pub matrix: QMat,
    /// Reduced word: `matrix = s_{word[0]} ⋯ s_{word[k-1]}`.
    pub word: Option<Vec<usize>>,
}

impl WeylElement {
    pub fn apply(&self, x: &[Rat]) -> QVec {
        self.matrix.apply(x)
    }
}

/// Builds an irreducible root system.
pub fn build_root_system(family: Family, n: usize) -> Result<RootSystemData> {
    let bad = |why: &str| Err(Error::Unsupported(format!("{family}{n}"), why.into()));
    if n == 0 {
        return bad("rank must be at least 1");
    }
    if family == Family::D && n < 2 {
        return bad("type D needs rank at least 2");
    }
    let ambient = if family == Family::A { n + 1 } else { n };
    let e = |i: usize| -> QVec {
        let mut v = vec![Rat::zero(); ambient];
        v[i] = int(1);
        v
    };
    let mut simple = Vec::with_capacity(n);
    let mut doubled = vec![false; n];
    match family {
        Family::A => {
            for i in 0..n {
                simple.push(exact::sub(&e(i), &e(i + 1)));
            }
        }
        Family::B | Family::C | Family::BC => {
            for i in 0..n - 1 {
                simple.push(exact::sub(&e(i), &e(i + 1)));
            }
            let last = e(n - 1);
            simple.push(if family == Family::C { exact::scale(&int(2), &last) } else { last });
            doubled[n - 1] = family == Family::BC;
        }
        Family::D => {
            for i in 0..n - 1 {
                simple.push(exact::sub(&e(i), &e(i + 1)));
            }
            simple.push(exact::add(&e(n - 2), &e(n - 1)));
        }
    }
    Ok(assemble(vec![(family, n)], ambient, simple, doubled))
}

/// The rank-zero root system (compact or trivial restricted data).
pub fn trivial_root_system() -> RootSystemData {
    assemble(Vec::new(), 0, Vec::new(), Vec::new())
}

/// Orthogonal product of root systems, factor-major.
pub fn product_root_system(parts: &[RootSystemData]) -> Result<RootSystemData> {
    if parts.is_empty() {
        return Err(Error::InvalidInput("product of zero root systems".into()));
    }
    if parts.len() == 1 {
        return Ok(parts[0].clone());
    }
    let ambient: usize = parts.iter().map(|p| p.ambient_dim).sum();
    let mut simple = Vec::new();
    let mut doubled = Vec::new();
    let mut components = Vec::new();
    let mut off = 0;
    for p in parts {
        for a in &p.simple_roots {
            let mut v = vec![Rat::zero(); ambient];
            v[off..off + p.ambient_dim].clone_from_slice(a);
            simple.push(v);
        }
        doubled.extend_from_slice(&p.doubled);
        components.extend_from_slice(&p.components);
        off += p.ambient_dim;
    }
    Ok(assemble(components, ambient, simple, doubled))
}

fn reflect(alpha: &[Rat], x: &[Rat]) -> QVec {
    let c = int(2) * dot(x, alpha) / dot(alpha, alpha);
    x.iter().zip(alpha).map(|(xi, ai)| xi - c * ai).collect()
}

fn reflection_matrix(alpha: &[Rat]) -> QMat {
    let n = alpha.len();
    let aa = dot(alpha, alpha);
    let mut m = QMat::identity(n);
    for i in 0..n {
        for j in 0..n {
            m.data[i * n + j] -= int(2) * alpha[i] * alpha[j] / aa;
        }
    }
    m
}

fn assemble(
    components: Vec<(Family, usize)>,
    ambient: usize,
    simple: Vec<QVec>,
    doubled: Vec<bool>,
) -> RootSystemData {
    let rank = simple.len();
    // Root closure under simple reflections, seeded by Π and the doubled roots.
    let mut seen: HashSet<QVec> = HashSet::new();
    let mut queue: VecDeque<QVec> = VecDeque::new();
    for (a, d) in simple.iter().zip(&doubled) {
        for r in [a.clone(), neg(a)] {
            if seen.insert(r.clone()) {
                queue.push_back(r);
            }
        }
        if *d {
            let a2 = exact::scale(&int(2), a);
            for r in [a2.clone(), neg(&a2)] {
                if seen.insert(r.clone()) {
                    queue.push_back(r);
                }
            }
        }
    }
    while let Some(r) = queue.pop_front() {
        for a in &simple {
            let s = reflect(a, &r);
            if seen.insert(s.clone()) {
                queue.push_back(s);
            }
        }
    }
    let simple_cols: Vec<Vec<Rat>> = (0..ambient)
        .map(|k| simple.iter().map(|a| a[k]).collect())
        .collect();
    let mut positive: Vec<QVec> = seen
        .iter()
        .filter(|r| {
            let c = exact::solve(&simple_cols, r).expect("root lies in the span of Π");
            c.iter().all(|x| !x.is_negative())
        })
        .cloned()
        .collect();
    positive.sort_by(|a, b| {
        let ha = height_of(&simple_cols, a);
        let hb = height_of(&simple_cols, b);
        ha.cmp(&hb).then_with(|| b.cmp(a))
    });
    let mut roots = positive.clone();
    roots.extend(positive.iter().map(|r| neg(r)));

    // Fundamental weights: ϖᵢ ∈ span(Π) with 2⟨ϖᵢ, α'ⱼ⟩/|α'ⱼ|² = δᵢⱼ.
    let alpha_p: Vec<QVec> = simple
        .iter()
        .zip(&doubled)
        .map(|(a, d)| if *d { exact::scale(&int(2), a) } else { a.clone() })
        .collect();
    let coroot_matrix: Vec<Vec<Rat>> = alpha_p
        .iter()
        .map(|ap| {
            let nn = dot(ap, ap);
            simple.iter().map(|ak| int(2) * dot(ak, ap) / nn).collect()
        })
        .collect();
    let mut fundamental = Vec::with_capacity(rank);
    for i in 0..rank {
        let rhs: Vec<Rat> = (0..rank).map(|j| if i == j { int(1) } else { Rat::zero() }).collect();
        let c = exact::solve(&coroot_matrix, &rhs).expect("Cartan matrix is invertible");
        let mut w = vec![Rat::zero(); ambient];
        for (ck, ak) in c.iter().zip(&simple) {
            for (wi, ai) in w.iter_mut().zip(ak) {
                *wi += ck * ai;
            }
        }
        fundamental.push(w);
    }

    let mut rs = RootSystemData {
        components,
        rank,
        ambient_dim: ambient,
        simple_roots: simple,
        doubled,
        positive_roots: positive,
        roots,
        gram: QMat::identity(ambient),
        fundamental_weights: fundamental,
        w0: QMat::identity(ambient),
        w0_word: Vec::new(),
        opposition: Vec::new(),
    };
    // w₀ sends -ρ to ρ; walk from -ρ up to the dominant chamber.
    let mut v = neg(&rs.rho());
    let mut word = Vec::new();
    while let Some(i) = (0..rank).find(|&i| dot(&v, &rs.simple_roots[i]).is_negative()) {
        v = reflect(&rs.simple_roots[i], &v);
        word.push(i);
    }
    word.reverse();
    rs.w0 = rs.word_matrix(&word);
    rs.w0_word = word;
    rs.opposition = (0..rank)
        .map(|i| {
            let img = neg(&rs.w0.apply(&rs.simple_roots[i]));
            rs.simple_roots.iter().position(|a| *a == img).expect("-w₀ permutes Π")
        })
        .collect();
    rs
}

fn height_of(simple_cols: &[Vec<Rat>], r: &[Rat]) -> Rat {
    exact::solve(simple_cols, r)
        .map(|c| c.into_iter().fold(Rat::zero(), |a, b| a + b))
        .unwrap_or_else(Rat::zero)
}

impl RootSystemData {
    /// `α'ᵢ`: twice `αᵢ` when doubled.
    pub fn alpha_prime(&self, i: usize) -> QVec {
        if self.doubled[i] {
            exact::scale(&int(2), &self.simple_roots[i])
        } else {
            self.simple_roots[i].clone()
        }
    }

    /// Sum of fundamental weights, a strictly dominant vector.
    pub fn rho(&self) -> QVec {
        let mut v = vec![Rat::zero(); self.ambient_dim];
        for w in &self.fundamental_weights {
            v = exact::add(&v, w);
        }
        v
    }

    /// Coordinates `2⟨λ, α'ᵢ⟩/|α'ᵢ|²` in the fundamental-weight basis.
    pub fn omega_coords(&self, lambda: &[Rat]) -> Vec<Rat> {
        (0..self.rank)
            .map(|i| {
                let ap = self.alpha_prime(i);
                int(2) * dot(lambda, &ap) / dot(&ap, &ap)
            })
            .collect()
    }

    pub fn from_omega_coords(&self, c: &[Rat]) -> QVec {
        let mut v = vec![Rat::zero(); self.ambient_dim];
        for (ci, w) in c.iter().zip(&self.fundamental_weights) {
            for (vi, wi) in v.iter_mut().zip(w) {
                *vi += ci * wi;
            }
        }
        v
    }

    /// Coordinates in the simple-root basis, if `x` lies in their span.
    pub fn root_coords(&self, x: &[Rat]) -> Option<Vec<Rat>> {
        let cols: Vec<Vec<Rat>> = (0..self.ambient_dim)
            .map(|k| self.simple_roots.iter().map(|a| a[k]).collect())
            .collect();
        exact::solve(&cols, x)
    }

    /// Orthogonal projection onto the span of the roots (identity unless the
    /// ambient space is larger than the rank).
    pub fn project_to_span(&self, x: &[Rat]) -> QVec {
        let mut y = x.to_vec();
        let mut off = 0;
        for &(fam, n) in &self.components {
            let amb = if fam == Family::A { n + 1 } else { n };
            if fam == Family::A {
                let mean = y[off..off + amb].iter().fold(Rat::zero(), |a, b| a + b) / int(amb as i64);
                for yi in &mut y[off..off + amb] {
                    *yi -= mean;
                }
            }
            off += amb;
        }
        y
    }

    pub fn is_dominant(&self, x: &[Rat]) -> bool {
        self.simple_roots.iter().all(|a| !dot(x, a).is_negative())
    }

    pub fn is_strictly_dominant(&self, x: &[Rat]) -> bool {
        self.simple_roots.iter().all(|a| dot(x, a).is_positive())
    }

    pub fn reflect_simple(&self, i: usize, x: &[Rat]) -> QVec {
        reflect(&self.simple_roots[i], x)
    }

    pub fn simple_reflection(&self, i: usize) -> QMat {
        reflection_matrix(&self.simple_roots[i])
    }

    /// Matrix of `s_{word[0]} ⋯ s_{word[k-1]}`.
    pub fn word_matrix(&self, word: &[usize]) -> QMat {
        let mut m = QMat::identity(self.ambient_dim);
        for &i in word {
            m = m.mul(&self.simple_reflection(i));
        }
        m
    }

    /// Dominant element of the Weyl orbit of `x`.
    pub fn dominant_rep(&self, x: &[Rat]) -> QVec {
        let mut v = x.to_vec();
        while let Some(i) = (0..self.rank).find(|&i| dot(&v, &self.simple_roots[i]).is_negative()) {
            v = reflect(&self.simple_roots[i], &v);
        }
        v
    }

    pub fn apply_w0(&self, x: &[Rat]) -> QVec {
        self.w0.apply(x)
    }

    /// `-w₀ x`.
    pub fn opposition_involution(&self, x: &[Rat]) -> QVec {
        neg(&self.w0.apply(x))
    }

    /// All roots have the same length and no root is doubled.
    pub fn is_simply_laced(&self) -> bool {
        let Some(first) = self.roots.first() else {
            return true;
        };
        let l = dot(first, first);
        !self.doubled.iter().any(|d| *d) && self.roots.iter().all(|r| dot(r, r) == l)
    }

    pub fn is_simple(&self) -> bool {
        self.components.len() == 1
    }

    /// Weyl orbit of a vector (exact, deduplicated, sorted).
    pub fn orbit(&self, x: &[Rat]) -> Vec<QVec> {
        let mut seen: HashSet<QVec> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(x.to_vec());
        queue.push_back(x.to_vec());
        while let Some(v) = queue.pop_front() {
            for i in 0..self.rank {
                let s = reflect(&self.simple_roots[i], &v);
                if seen.insert(s.clone()) {
                    queue.push_back(s);
                }
            }
        }
        let mut out: Vec<QVec> = seen.into_iter().collect();
        out.sort();
        out
    }

    /// Enumerates `W` by breadth-first closure of the simple reflections.
    pub fn weyl_group(&self, max_order: usize) -> Result<Vec<WeylElement>> {
        let rho = self.rho();
        let id = WeylElement { matrix: QMat::identity(self.ambient_dim), word: Some(Vec::new()) };
        let mut index: HashMap<QVec, usize> = HashMap::new();
        index.insert(rho.clone(), 0);
        let mut out = vec![id];
        let refl: Vec<QMat> = (0..self.rank).map(|i| self.simple_reflection(i)).collect();
        let mut head = 0;
        while head < out.len() {
            for (i, s) in refl.iter().enumerate() {
                let m = s.mul(&out[head].matrix);
                let key = m.apply(&rho);
                if index.contains_key(&key) {
                    continue;
                }
                if out.len() >= max_order {
                    return Err(Error::TooLarge { cap: max_order, partial: out.len() });
                }
                let mut word = vec![i];
                word.extend(out[head].word.as_ref().unwrap());
                index.insert(key, out.len());
                out.push(WeylElement { matrix: m, word: Some(word) });
            }
            head += 1;
        }
        Ok(out)
    }

    /// `W_X = {w : wX = X}` by exhaustive enumeration.
    pub fn stabilizer_pointwise(&self, x: &[Rat], max_order: usize) -> Result<Vec<WeylElement>> {
        Ok(self
            .weyl_group(max_order)?
            .into_iter()
            .filter(|w| w.apply(x) == x)
            .collect())
    }

    /// Elements mapping the finite set `s` onto itself.
    pub fn stabilizer_setwise(&self, s: &[QVec], max_order: usize) -> Result<Vec<WeylElement>> {
        let set: HashSet<&QVec> = s.iter().collect();
        Ok(self
            .weyl_group(max_order)?
            .into_iter()
            .filter(|w| s.iter().all(|v| set.contains(&w.apply(v))))
            .collect())
    }

    /// Elements stabilizing every set in `sets`.
    pub fn stabilizer_of_all(&self, sets: &[&[QVec]], max_order: usize) -> Result<Vec<WeylElement>> {
        let hashed: Vec<HashSet<&QVec>> = sets.iter().map(|s| s.iter().collect()).collect();
        Ok(self
            .weyl_group(max_order)?
            .into_iter()
            .filter(|w| {
                sets.iter()
                    .zip(&hashed)
                    .all(|(s, h)| s.iter().all(|v| h.contains(&w.apply(v))))
            })
            .collect())
    }

    /// Indices `i` with `αᵢ(x) = 0`.
    pub fn wall_indices(&self, x: &[Rat]) -> Vec<usize> {
        (0..self.rank)
            .filter(|&i| dot(x, &self.simple_roots[i]).is_zero())
            .collect()
    }

    /// Subgroup generated by the given simple reflections.
    pub fn parabolic_subgroup(&self, gens: &[usize]) -> Vec<QMat> {
        let mut seen: HashSet<QMat> = HashSet::new();
        let id = QMat::identity(self.ambient_dim);
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        let refl: Vec<QMat> = gens.iter().map(|&i| self.simple_reflection(i)).collect();
        while let Some(m) = queue.pop_front() {
            for s in &refl {
                let p = s.mul(&m);
                if seen.insert(p.clone()) {
                    queue.push_back(p);
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn label(&self) -> String {
        if self.components.is_empty() {
            return "trivial".into();
        }
        self.components
            .iter()
            .map(|(f, n)| format!("{f}{n}"))
            .collect::<Vec<_>>()
            .join("x")
    }

    pub fn to_doc(&self) -> RootSystemDoc {
        let s = |v: &QVec| v.iter().map(fmt_rat).collect::<Vec<_>>();
        let mat = |m: &QMat| {
            (0..m.n)
                .map(|i| (0..m.n).map(|j| fmt_rat(m.get(i, j))).collect())
                .collect()
        };
        RootSystemDoc {
            components: self.components.clone(),
            rank: self.rank,
            ambient_dim: self.ambient_dim,
            simple_roots: self.simple_roots.iter().map(s).collect(),
            doubled: self.doubled.clone(),
            positive_roots: self.positive_roots.iter().map(s).collect(),
            fundamental_weights: self.fundamental_weights.iter().map(s).collect(),
            gram: mat(&self.gram),
            w0: mat(&self.w0),
        }
    }

    /// Rebuilds from a document's component tags.
    pub fn from_doc(doc: &RootSystemDoc) -> Result<Self> {
        if doc.components.is_empty() {
            return Ok(trivial_root_system());
        }
        let parts = doc
            .components
            .iter()
            .map(|&(f, n)| build_root_system(f, n))
            .collect::<Result<Vec<_>>>()?;
        product_root_system(&parts)
    }
}

/// Serializable view of [`RootSystemData`] with rationals as `p/q` strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RootSystemDoc {
    pub components: Vec<(Family, usize)>,
    pub rank: usize,
    pub ambient_dim: usize,
    pub simple_roots: Vec<Vec<String>>,
    pub doubled: Vec<bool>,
    pub positive_roots: Vec<Vec<String>>,
    pub fundamental_weights: Vec<Vec<String>>,
    pub gram: Vec<Vec<String>>,
    pub w0: Vec<Vec<String>>,
}

/// `⟨ϖᵢ, α'ⱼ⟩` duality residual, zero for a well-formed system.
pub fn duality_defect(rs: &RootSystemData) -> usize {
    let mut bad = 0;
    for i in 0..rs.rank {
        for j in 0..rs.rank {
            let ap = rs.alpha_prime(j);
            let v = int(2) * dot(&rs.fundamental_weights[i], &ap) / dot(&ap, &ap);
            let want = if i == j { Rat::one() } else { Rat::zero() };
            if v != want {
                bad += 1;
            }
        }
    }
    bad
}
