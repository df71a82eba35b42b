//! One function per subcommand. Each returns the payload and a status, or
//! the echo of the flags together with the failure.

use std::fs;
use std::io;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use properaff::dynamics::{margulis_data, random_regular_element, SamplerOptions};
use properaff::exact::{fmt_rat, parse_rat, QVec};
use properaff::group::{build_family, properness_heuristic, word_survey as survey_words, BuildOptions, GeneratorFamily, WordRecord};
use properaff::root_system::DEFAULT_WEYL_CAP;
use properaff::weights::{classify as classify_weights, multiplicities_split, roots_in_weights_check, weight_set};
use properaff::x0::{certify, find_x0 as search_x0, vector_predicates};
use properaff::{check_criterion as criterion, AffineContext, AffineElement, AffineMap, Error, Mat, Vector};

use crate::report::Status;
use crate::spec::Resolved;
use crate::{BuildArgs, Failure, FamilyArgs, FindX0Args, MargulisArgs, Outcome, SurveyArgs};

pub type CmdResult = Result<Outcome, (Value, Failure)>;

/// Largest accepted `‖M(g⁻¹) + w₀M(g)‖`.
const INVERSE_TOL: f64 = 1e-6;

fn finish(spec: Value, body: Result<(Status, Value), Failure>) -> CmdResult {
    match body {
        Ok((status, results)) => Ok(Outcome { spec, status, message: None, results }),
        Err(f) => Err((spec, f)),
    }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn rats(v: &[properaff::Rat]) -> Vec<String> {
    v.iter().map(fmt_rat).collect()
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn vec_f64(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn parse_vector(xs: &[String], dim: usize, flag: &str) -> Result<QVec, Failure> {
    let v: Option<QVec> = xs.iter().map(|x| parse_rat(x)).collect();
    let v = v.ok_or_else(|| Failure::from(Error::InvalidInput(format!("{flag}: expected rationals such as 3, -1/2 or 0.25"))))?;
    if v.len() != dim {
        return Err(Error::InvalidInput(format!("{flag}: expected {dim} coordinates, got {}", v.len())).into());
    }
    Ok(v)
}

pub fn classify(a: &crate::spec::RepArgs) -> CmdResult {
    let r = a.resolve().map_err(|e| (a.echo(), e.into()))?;
    let spec = a.echo_resolved(&r);
    let body = (|| {
        let rs = r.rs();
        let (omega, dimension, mults) = match &r {
            Resolved::Concrete(c) => (c.omega.clone(), Some(c.dim_v as u64), None),
            Resolved::Abstract { highest, .. } => {
                let omega = weight_set(rs, highest)?;
                let m = multiplicities_split(rs, highest, true).ok();
                let dim = m.as_ref().and_then(|m| m.dimension());
                (omega, dim, m)
            }
        };
        let weights: Vec<Value> = omega
            .weights
            .iter()
            .map(|w| json!({ "weight": rats(w), "multiplicity": mults.as_ref().and_then(|m| m.multiplicity(w)) }))
            .collect();
        let results = json!({
            "weight_count": omega.len(),
            "dimension": dimension,
            "classification": classify_weights(rs, &omega),
            "roots_in_weights": roots_in_weights_check(rs, &omega).ok(),
            "weights": weights,
        });
        Ok((Status::Pass, results))
    })();
    finish(spec, body)
}

pub fn find_x0(a: &FindX0Args, seed: u64) -> CmdResult {
    let r = a.rep.resolve().map_err(|e| (a.rep.echo(), e.into()))?;
    let spec = a.rep.echo_resolved(&r);
    let body = (|| {
        let rs = r.rs();
        let omega = match &r {
            Resolved::Concrete(c) => c.omega.clone(),
            Resolved::Abstract { highest, .. } => weight_set(rs, highest)?,
        };
        let cert = match &a.check {
            Some(x) => certify(rs, &omega, &parse_vector(x, rs.ambient_dim, "--check")?, DEFAULT_WEYL_CAP)?,
            None => search_x0(rs, &omega, seed)?,
        };
        let predicates = match &a.predicates {
            Some(y) => Some(vector_predicates(rs, &cert, &parse_vector(y, rs.ambient_dim, "--predicates")?)),
            None => None,
        };
        let status = pass_if(cert.generically_symmetric && cert.extreme);
        Ok((status, json!({ "mode": if a.check.is_some() { "check" } else { "search" }, "certificate": cert, "predicates": predicates })))
    })();
    finish(spec, body)
}

pub fn check_criterion(a: &crate::spec::RepArgs) -> CmdResult {
    let rep = a.concrete().map_err(|e| (a.echo(), e.into()))?;
    let spec = a.echo_concrete(&rep);
    let rpt = criterion(&rep);
    let results = json!({
        "holds": rpt.holds(),
        "v0_dim": rpt.v0_dim,
        "vt0_dim": rpt.vt0_basis.ncols(),
        "moved_by_w0": rpt.moved_by_w0,
        "witness": rpt.witness.as_ref().map(vec_f64),
        "w0_on_vt0": rows(&rpt.w0_on_vt0),
        "residual": rpt.residual,
    });
    finish(spec, Ok((pass_if(rpt.holds()), results)))
}

fn fixture(rep: &crate::spec::RepArgs, seed: u64) -> Result<(AffineContext, Value), (Value, Failure)> {
    let c = rep.concrete().map_err(|e| (rep.echo(), e.into()))?;
    let spec = rep.echo_concrete(&c);
    let cert = search_x0(&c.rs, &c.omega, seed).map_err(|e| (spec.clone(), e.into()))?;
    Ok((AffineContext::new(c, cert), spec))
}

/// Reads one affine matrix or an array of them.
fn read_elements(path: &Path, ctx: &AffineContext) -> Result<Vec<AffineElement>, Failure> {
    let bad = |m: String| Failure::from(Error::InvalidInput(m));
    let text = fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let as_floats = |v: &Value| -> Option<Vec<f64>> { v.as_array()?.iter().map(Value::as_f64).collect() };
    let lists: Vec<Vec<f64>> = match v.as_array() {
        Some(a) if a.iter().all(Value::is_array) => a.iter().map(as_floats).collect::<Option<_>>(),
        Some(_) => as_floats(&v).map(|x| vec![x]),
        None => None,
    }
    .ok_or_else(|| bad("expected a JSON array of numbers or an array of such arrays".into()))?;
    lists
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let map = AffineMap::from_row_major(l).map_err(|e| bad(format!("element {i}: {e}")))?;
            AffineElement::from_standard_map(&ctx.rep, &map).map_err(|e| bad(format!("element {i}: {e}")))
        })
        .collect()
}

fn element_record(ctx: &AffineContext, g: &AffineElement, minus_w0: &Mat) -> (bool, Value) {
    let res = margulis_data(ctx, g).and_then(|d| Ok((margulis_data(ctx, &g.inverse())?, d)));
    match res {
        Ok((inv, d)) => {
            let residual = (&inv.m - minus_w0 * &d.m).norm();
            let ok = residual <= INVERSE_TOL;
            (
                ok,
                json!({
                    "jd": d.jd,
                    "jd_eig": d.jd_eig,
                    "ct": d.ct,
                    "m": vec_f64(&d.m),
                    "m_norm": d.m.norm(),
                    "m_inverse": vec_f64(&inv.m),
                    "inverse_residual": residual,
                    "s_x0": d.s_x0_fwd,
                    "s_x0_inverse": d.s_x0_bwd,
                    "nondeg_bound": d.nondeg_bound,
                    "error": null,
                }),
            )
        }
        Err(e) => (false, json!({ "error": e.to_string() })),
    }
}

pub fn margulis(a: &MargulisArgs, seed: u64) -> CmdResult {
    let (ctx, spec) = fixture(&a.rep, seed)?;
    let body = (|| {
        let mut elements = match &a.elements {
            Some(p) => read_elements(p, &ctx)?,
            None => Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = SamplerOptions { jd_norm: a.jd_norm, ..SamplerOptions::default() };
        for _ in 0..a.random {
            elements.push(random_regular_element(&ctx, &mut rng, &opts)?);
        }
        if elements.is_empty() {
            return Err(Error::InvalidInput("nothing to measure: give --elements or --random".into()).into());
        }
        let minus_w0 = ctx.minus_w0_on_vt0();
        let (oks, records): (Vec<bool>, Vec<Value>) = elements.iter().map(|g| element_record(&ctx, g, &minus_w0)).unzip();
        let results = json!({
            "x0": rats(&ctx.cert.x0),
            "vt0_dim": ctx.criterion.vt0_basis.ncols(),
            "minus_w0_on_vt0": rows(&minus_w0),
            "inverse_tolerance": INVERSE_TOL,
            "elements": records,
        });
        Ok((pass_if(oks.iter().all(|&x| x)), results))
    })();
    finish(spec, body)
}

fn build_options(f: &FamilyArgs, seed: u64) -> BuildOptions {
    BuildOptions {
        k: f.k,
        power: f.power,
        m_norm: f.m_norm,
        jd_norm: f.jd_norm,
        c_bound: f.c_bound,
        s_threshold: f.s_threshold,
        retries: f.retries,
        seed,
    }
}

fn family_json(opts: &BuildOptions, fam: &GeneratorFamily) -> Value {
    json!({
        "options": opts,
        "flags": fam.flags,
        "all_hold": fam.flags.all(),
        "power_used": fam.power_used,
        "m_c": vec_f64(&fam.m_c),
        "m_c_norm": fam.m_c.norm(),
        "measured_c": fam.measured_c,
        "measured_s": fam.measured_s,
        "m_errors": fam.m_errors,
    })
}

pub fn build_group(a: &BuildArgs, seed: u64) -> CmdResult {
    let (ctx, spec) = fixture(&a.rep, seed)?;
    let body = (|| {
        let opts = build_options(&a.family, seed);
        let fam = build_family(&ctx, &opts)?;
        let mut results = family_json(&opts, &fam);
        // Generators as affine matrices on V, row-major; readable by `margulis --elements`.
        results["generators"] = json!(fam.gens.iter().map(|g| rows(&g.fwd.mat).concat()).collect::<Vec<_>>());
        Ok((pass_if(fam.flags.all()), results))
    })();
    finish(spec, body)
}

fn write_csv<W: io::Write>(w: W, records: &[WordRecord]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["word", "length", "regular", "s", "m_norm", "deviation", "error"])?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in records {
        out.write_record([
            r.word.to_string(),
            r.length.to_string(),
            r.regular.to_string(),
            opt(r.s),
            opt(r.m_norm),
            opt(r.deviation),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn word_survey(a: &SurveyArgs, seed: u64) -> CmdResult {
    let (ctx, spec) = fixture(&a.rep, seed)?;
    let body = (|| {
        let opts = build_options(&a.family, seed);
        let mut fam = build_family(&ctx, &opts)?;
        if let Some(i) = a.sabotage {
            if i >= fam.k() {
                return Err(Error::InvalidInput(format!("--sabotage {i}: only {} generators", fam.k())).into());
            }
            fam = fam.sabotage(&ctx, i);
        }
        let survey = survey_words(&ctx, &fam, a.max_len);
        if let Some(p) = &a.csv {
            let res = if p.as_os_str() == "-" {
                write_csv(io::stdout().lock(), &survey.records)
            } else {
                fs::File::create(p).map_err(csv::Error::from).and_then(|f| write_csv(f, &survey.records))
            };
            res.map_err(|e| Failure::from(Error::InvalidInput(format!("{}: {e}", p.display()))))?;
        }
        let properness = a
            .properness
            .then(|| properness_heuristic(&ctx, &fam, a.probe_len, a.samples, a.epsilon, seed));
        let passed = survey.passed() && properness.as_ref().is_none_or(|p| p.passed);
        let results = json!({
            "family": family_json(&opts, &fam),
            "sabotaged": a.sabotage,
            "words": survey.records.len(),
            "by_length": survey.by_length,
            "k_hat": survey.k_hat,
            "decay_ratio": survey.decay_ratio,
            "all_regular": survey.all_regular,
            "deviation_linear": survey.deviation_linear,
            "survey_passed": survey.passed(),
            "properness": properness,
        });
        Ok((pass_if(passed), results))
    })();
    finish(spec, body)
}
