//! Free affine groups with prescribed Margulis invariants.
//!
//! Generators are `gᵢ = τ_{φᵢ⁻¹(M_C)} ∘ γᵢ`, where the `γᵢ` are random
//! conjugates of a compatible Cartan element raised to a power `N` and
//! `M_C` is fixed by `−w₀`. Every `M(gᵢ)` then equals `M_C`, and long
//! cyclically reduced words drift along `V^t₀` roughly `l·M_C`.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    affine_contraction_strength, gaussian_vector, ideal_split, margulis_invariant, pair_nondegeneracy,
    random_compact_element, random_compatible_vector, AffineContext, AffineElement, DynamicalSplit,
};
use crate::linalg::{self, expm};
use crate::{Error, Result, Vector};

/// Tolerance of the prescribed Margulis invariants.
pub const MARGULIS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct BuildOptions {
    /// Number of generators (at least 2).
    pub k: usize,
    /// Power `N` applied to the linear parts.
    pub power: u32,
    /// `‖M_C‖`.
    pub m_norm: f64,
    /// Norm of the Jordan projection of each `γᵢ` before powering.
    pub jd_norm: f64,
    /// Bound required of every cross pair. Contraction of long words needs
    /// `s_threshold` small relative to this; at the default threshold and
    /// `N = 8`, SO(2,1) families with `C` much above 1.8 often fail to
    /// contract on words of length 2 to 4.
    pub c_bound: f64,
    /// Bound required of `s_{X₀}(gᵢ^{±1})`.
    pub s_threshold: f64,
    /// Attempts at drawing transverse conjugates.
    pub retries: usize,
    pub seed: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { k: 2, power: 8, m_norm: 1.0, jd_norm: 0.35, c_bound: 1.8, s_threshold: 0.25, retries: 200, seed: 0 }
    }
}

/// Outcome of the four hypothesis checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisFlags {
    /// Every generator and inverse is `ρ`-regular.
    pub h1: bool,
    /// Cross pairs are `c_bound`-non-degenerate.
    pub h2: bool,
    /// Contraction strengths are below the threshold.
    pub h3: bool,
    /// Every `M(gᵢ) = M_C`.
    pub h4: bool,
}

impl HypothesisFlags {
    pub fn all(&self) -> bool {
        self.h1 && self.h2 && self.h3 && self.h4
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorFamily {
    pub gens: Vec<AffineElement>,
    /// The linear parts `γᵢ`.
    pub linear: Vec<AffineElement>,
    /// `φᵢ⁻¹(M_C)`, the translation of each generator.
    pub offsets: Vec<Vector>,
    /// `M_C` in `V^t₀` coordinates.
    pub m_c: Vector,
    pub c_bound: f64,
    pub s_threshold: f64,
    pub power_used: u32,
    pub flags: HypothesisFlags,
    /// Largest non-degeneracy bound over the checked pairs.
    pub measured_c: f64,
    /// `s_{X₀}(gᵢ^{±1})`, in the order g₁, g₁⁻¹, g₂, …
    pub measured_s: Vec<f64>,
    /// `‖M(gᵢ) − M_C‖`.
    pub m_errors: Vec<f64>,
}

/// A unit vector of `V^t₀` (coordinates) fixed by `−w₀`.
pub fn fixed_direction(ctx: &AffineContext) -> Result<Vector> {
    let t = ctx.criterion.vt0_basis.ncols();
    if t == 0 {
        return Err(Error::NotApplicable("V^t₀ is zero".into()));
    }
    let w = &ctx.criterion.w0_on_vt0;
    // Absolute threshold: w + I may vanish identically.
    let (v, s) = linalg::smallest_right_singular(&(w + crate::Mat::identity(t, t)), 1);
    if s[0] > linalg::rank_tol() * (1.0 + linalg::op_norm(w)) {
        return Err(Error::NotApplicable("−w₀ has no fixed vector in V^t₀".into()));
    }
    Ok(v.column(0).into_owned())
}

/// Letters in the order g₁, g₁⁻¹, g₂, g₂⁻¹, …
fn letters(gens: &[AffineElement]) -> Vec<AffineElement> {
    gens.iter().flat_map(|g| [g.clone(), g.inverse()]).collect()
}

struct Checked {
    splits: Vec<DynamicalSplit>,
    h1: bool,
    measured_s: Vec<f64>,
    m_errors: Vec<f64>,
}

fn check_generators(ctx: &AffineContext, gens: &[AffineElement], m_c: &Vector) -> Result<Checked> {
    let letters = letters(gens);
    let splits: Vec<DynamicalSplit> = letters.iter().map(|g| ideal_split(ctx, g)).collect::<Result<_>>()?;
    let measured_s = splits.iter().map(|s| affine_contraction_strength(ctx, s)).collect();
    let mut m_errors = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let m = margulis_invariant(ctx, &splits[2 * i], g)?;
        m_errors.push((m - m_c).norm());
    }
    Ok(Checked { splits, h1: true, measured_s, m_errors })
}

/// Worst pair bound over letter pairs `(a, b)` with `b ≠ a⁻¹`, and the
/// generator indices of the worst pair.
fn worst_pair(ctx: &AffineContext, splits: &[DynamicalSplit]) -> Result<(f64, usize, usize)> {
    let mut worst = (0.0f64, 0, 0);
    for a in 0..splits.len() {
        for b in a..splits.len() {
            if a / 2 == b / 2 && a != b {
                continue;
            }
            let c = match pair_nondegeneracy(ctx, &splits[a], &splits[b]) {
                Ok(c) => c,
                Err(_) => f64::INFINITY,
            };
            if c > worst.0 {
                worst = (c, a / 2, b / 2);
            }
        }
    }
    Ok(worst)
}

pub fn build_family(ctx: &AffineContext, opts: &BuildOptions) -> Result<GeneratorFamily> {
    if opts.k < 2 {
        return Err(Error::InvalidInput("a free group needs at least 2 generators".into()));
    }
    if !ctx.criterion.holds() {
        return Err(Error::NotApplicable("V^t₀ is not moved by w₀".into()));
    }
    let group = ctx.group();
    let m_c = fixed_direction(ctx)? * opts.m_norm;
    let t_basis = &ctx.spaces.t;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut last_failure = (0, 1);
    for _ in 0..opts.retries.max(1) {
        let mut linear = Vec::new();
        let mut offsets = Vec::new();
        let mut gens = Vec::new();
        for _ in 0..opts.k {
            let y = random_compatible_vector(ctx, &mut rng, opts.jd_norm, 0.3);
            let ny: Vec<f64> = y.iter().map(|v| v * opts.power as f64).collect();
            let k = random_compact_element(group, &mut rng, 2.0);
            let def = &k * expm(&group.cartan_def(&ny)) * k.transpose();
            let gamma = AffineElement::linear(&ctx.rep, &def)?;
            let split = ideal_split(ctx, &gamma)?;
            let phi_inv = split.phi_inv.linear_part();
            let offset = phi_inv * (t_basis * &m_c);
            gens.push(gamma.translate(&offset));
            linear.push(gamma);
            offsets.push(offset);
        }
        let checked = match check_generators(ctx, &gens, &m_c) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let (c, i, j) = worst_pair(ctx, &checked.splits)?;
        if c > opts.c_bound {
            last_failure = (i, j);
            continue;
        }
        let flags = HypothesisFlags {
            h1: checked.h1,
            h2: true,
            h3: checked.measured_s.iter().all(|&s| s <= opts.s_threshold),
            h4: checked.m_errors.iter().all(|&e| e <= MARGULIS_TOL * (1.0 + opts.m_norm)),
        };
        if !flags.h3 {
            return Err(Error::IncreasePower { measured: checked.measured_s, threshold: opts.s_threshold });
        }
        return Ok(GeneratorFamily {
            gens,
            linear,
            offsets,
            m_c,
            c_bound: opts.c_bound,
            s_threshold: opts.s_threshold,
            power_used: opts.power,
            flags,
            measured_c: c,
            measured_s: checked.measured_s,
            m_errors: checked.m_errors,
        });
    }
    Err(Error::Transversality(last_failure.0, last_failure.1))
}

impl GeneratorFamily {
    /// The same family with the Margulis invariant of generator `index`
    /// replaced by `−M_C`; (H4) no longer holds.
    pub fn sabotage(&self, ctx: &AffineContext, index: usize) -> GeneratorFamily {
        let mut out = self.clone();
        out.gens[index] = self.linear[index].translate(&(-&self.offsets[index]));
        if let Ok(split) = ideal_split(ctx, &out.gens[index]) {
            if let Ok(m) = margulis_invariant(ctx, &split, &out.gens[index]) {
                out.m_errors[index] = (m - &self.m_c).norm();
            }
        }
        out.flags.h4 = false;
        out
    }

    pub fn k(&self) -> usize {
        self.gens.len()
    }
}

/// A word `g_{i₁}^{σ₁} ⋯ g_{i_l}^{σ_l}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordSpec {
    /// `(generator index, sign)` with sign ±1.
    pub letters: Vec<(usize, i8)>,
}

impl WordSpec {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| !(w[0].0 == w[1].0 && w[0].1 == -w[1].1))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        if !self.is_reduced() {
            return false;
        }
        match (self.letters.first(), self.letters.last()) {
            (Some(a), Some(b)) if self.letters.len() > 1 => !(a.0 == b.0 && a.1 == -b.1),
            _ => true,
        }
    }

    /// Parses the notation of [`fmt::Display`]: `a`, `b`, … for generators
    /// and capitals for inverses.
    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                if c.is_ascii_lowercase() {
                    Ok(((c as u8 - b'a') as usize, 1))
                } else if c.is_ascii_uppercase() {
                    Ok(((c as u8 - b'A') as usize, -1))
                } else {
                    Err(Error::InvalidInput(format!("bad letter {c:?} in word")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(WordSpec { letters })
    }
}

impl fmt::Display for WordSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(i, s) in &self.letters {
            let base = if s > 0 { b'a' } else { b'A' };
            write!(f, "{}", (base + i as u8) as char)?;
        }
        Ok(())
    }
}

impl Serialize for WordSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WordMode {
    Reduced,
    CyclicallyReduced,
}

/// All words of length `1..=max_len` of the given kind, by length and then
/// lexicographically.
pub fn enumerate_words(k: usize, max_len: usize, mode: WordMode) -> Vec<WordSpec> {
    let mut out = Vec::new();
    let mut layer: Vec<WordSpec> = vec![WordSpec { letters: vec![] }];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for i in 0..k {
                for s in [1i8, -1] {
                    if let Some(&(j, t)) = w.letters.last() {
                        if j == i && t == -s {
                            continue;
                        }
                    }
                    let mut letters = w.letters.clone();
                    letters.push((i, s));
                    next.push(WordSpec { letters });
                }
            }
        }
        out.extend(next.iter().filter(|w| mode == WordMode::Reduced || w.is_cyclically_reduced()).cloned());
        layer = next;
    }
    out
}

/// `2k(2k−1)^{l−1}`.
pub fn reduced_word_count(k: usize, l: u32) -> u64 {
    if l == 0 {
        return 1;
    }
    2 * k as u64 * (2 * k as u64 - 1).pow(l - 1)
}

/// `(2k−1)^l + 1 + (k−1)(1 + (−1)^l)`.
pub fn cyclically_reduced_word_count(k: usize, l: u32) -> u64 {
    let k = k as u64;
    let parity = if l % 2 == 0 { 2 } else { 0 };
    (2 * k - 1).pow(l) + 1 + (k - 1) * parity
}

/// Left-to-right product of the letters. Each factor carries its inverse,
/// so no re-orthogonalization is needed.
pub fn evaluate_word(family: &GeneratorFamily, word: &WordSpec) -> AffineElement {
    let letter = |&(i, s): &(usize, i8)| if s > 0 { family.gens[i].clone() } else { family.gens[i].inverse() };
    let mut it = word.letters.iter();
    let mut acc = letter(it.next().expect("nonempty word"));
    for l in it {
        acc = acc.compose(&letter(l));
    }
    acc
}

#[derive(Clone, Debug, Serialize)]
pub struct WordRecord {
    pub word: WordSpec,
    pub length: usize,
    pub regular: bool,
    pub s: Option<f64>,
    pub m_norm: Option<f64>,
    /// `‖M(w) − l·M_C‖`.
    pub deviation: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LengthSummary {
    pub length: usize,
    pub words: usize,
    pub violations: usize,
    pub max_s: f64,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurveyReport {
    pub records: Vec<WordRecord>,
    pub by_length: Vec<LengthSummary>,
    /// Twice the largest defect at length 2.
    pub k_hat: f64,
    /// Every word was `ρ`-regular.
    pub all_regular: bool,
    /// `max_l (max_s(l)/max_s(1))^{1/(l−1)}`; below 1 means geometric decay.
    pub decay_ratio: f64,
    /// `deviation(l) ≤ (l−1)·k̂` for every record.
    pub deviation_linear: bool,
}

impl SurveyReport {
    pub fn passed(&self) -> bool {
        self.all_regular && self.decay_ratio < 1.0 && self.deviation_linear
    }
}

fn word_record(ctx: &AffineContext, family: &GeneratorFamily, word: &WordSpec) -> WordRecord {
    let g = evaluate_word(family, word);
    let l = word.len();
    let res = ideal_split(ctx, &g).and_then(|split| {
        let m = margulis_invariant(ctx, &split, &g)?;
        Ok((affine_contraction_strength(ctx, &split), m))
    });
    match res {
        Ok((s, m)) => WordRecord {
            word: word.clone(),
            length: l,
            regular: true,
            s: Some(s),
            m_norm: Some(m.norm()),
            deviation: Some((m - &family.m_c * l as f64).norm()),
            error: None,
        },
        Err(e) => WordRecord { word: word.clone(), length: l, regular: false, s: None, m_norm: None, deviation: None, error: Some(e.to_string()) },
    }
}

/// Surveys every cyclically reduced word up to `max_len`, in parallel.
pub fn word_survey(ctx: &AffineContext, family: &GeneratorFamily, max_len: usize) -> SurveyReport {
    let words = enumerate_words(family.k(), max_len, WordMode::CyclicallyReduced);
    let records: Vec<WordRecord> = words.par_iter().map(|w| word_record(ctx, family, w)).collect();
    let mut by_length = Vec::new();
    for l in 1..=max_len {
        let rs: Vec<&WordRecord> = records.iter().filter(|r| r.length == l).collect();
        by_length.push(LengthSummary {
            length: l,
            words: rs.len(),
            violations: rs.iter().filter(|r| !r.regular).count(),
            max_s: rs.iter().filter_map(|r| r.s).fold(0.0, f64::max),
            max_deviation: rs.iter().filter_map(|r| r.deviation).fold(0.0, f64::max),
        });
    }
    let k_hat = 2.0 * by_length.get(1).map_or(0.0, |s| s.max_deviation);
    let s1 = by_length[0].max_s;
    let decay_ratio = by_length
        .iter()
        .skip(1)
        .map(|s| (s.max_s / s1).powf(1.0 / (s.length - 1) as f64))
        .fold(0.0, f64::max);
    let deviation_linear = records
        .iter()
        .all(|r| r.deviation.is_some_and(|d| d <= (r.length as f64 - 1.0) * k_hat + MARGULIS_TOL * (1.0 + r.length as f64)));
    SurveyReport {
        all_regular: records.iter().all(|r| r.regular),
        records,
        by_length,
        k_hat,
        decay_ratio,
        deviation_linear,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropernessReport {
    pub passed: bool,
    /// `δ(l) = ε·l·‖M_C‖`.
    pub epsilon: f64,
    /// Smallest displacement seen at each length `1..=max_len`.
    pub min_displacement: Vec<f64>,
    /// Word and displacement of the first collapse.
    pub witness: Option<(WordSpec, f64)>,
    /// No two distinct reduced words agreed on the probe points.
    pub free: bool,
    pub sample_points: usize,
}

/// Displacement probe: every reduced word up to `max_len` must move each
/// sample point, and its own axis basepoint, by at least `ε·l·‖M_C‖`.
/// This is a heuristic proxy for properness, not a proof.
pub fn properness_heuristic(
    ctx: &AffineContext,
    family: &GeneratorFamily,
    max_len: usize,
    sample_points: usize,
    epsilon: f64,
    seed: u64,
) -> PropernessReport {
    let d = ctx.rep.dim_v;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius: f64 = 1.0;
    let points: Vec<Vector> = (0..sample_points)
        .map(|_| {
            let v = gaussian_vector(&mut rng, d, 1.0);
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            v.normalize() * r
        })
        .collect();
    let words = enumerate_words(family.k(), max_len, WordMode::Reduced);
    let m_c = family.m_c.norm();
    let results: Vec<(WordSpec, f64, Vec<f64>)> = words
        .par_iter()
        .map(|w| {
            let g = evaluate_word(family, w);
            let mut probe: Vec<Vector> = points.clone();
            if let Ok(split) = ideal_split(ctx, &g) {
                probe.push(split.basepoint.clone());
            }
            let min = probe.iter().map(|x| (g.fwd.apply(x) - x).norm()).fold(f64::INFINITY, f64::min);
            let images: Vec<f64> = points.iter().take(4).flat_map(|x| g.fwd.apply(x).iter().copied().collect::<Vec<_>>()).collect();
            (w.clone(), min, images)
        })
        .collect();
    let mut min_displacement = vec![f64::INFINITY; max_len];
    let mut witness: Option<(WordSpec, f64)> = None;
    for (w, m, _) in &results {
        let l = w.len();
        min_displacement[l - 1] = min_displacement[l - 1].min(*m);
        if *m < epsilon * l as f64 * m_c && witness.is_none() {
            witness = Some((w.clone(), *m));
        }
    }
    let mut free = true;
    'outer: for a in 0..results.len() {
        for b in a + 1..results.len() {
            let (ia, ib) = (&results[a].2, &results[b].2);
            if ia.iter().zip(ib).all(|(x, y)| (x - y).abs() <= 1e-6) {
                free = false;
                break 'outer;
            }
        }
    }
    PropernessReport { passed: witness.is_none() && free, epsilon, min_displacement, witness, free, sample_points }
}
