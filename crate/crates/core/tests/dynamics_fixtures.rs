use properaff::dynamics::*;
use properaff::exact::vec_to_f64;
use properaff::linalg::{expm, op_norm};
use properaff::{AffineContext, AffineElement, AffineMap, ConcreteRep, Error, GroupKind, Mat, RepKind, Vector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn so21() -> AffineContext {
    AffineContext::fixture(GroupKind::SO(2, 1), RepKind::Standard, 1).unwrap()
}

#[test]
fn cartan_projection_of_dominant_exponentials() {
    for (g, x) in [
        (GroupKind::SL(3), vec![1.3, 0.2, -1.5]),
        (GroupKind::SL(4), vec![2.0, 0.5, -0.5, -2.0]),
        (GroupKind::SO(3, 2), vec![1.7, 0.4]),
        (GroupKind::SO(2, 1), vec![0.9]),
    ] {
        let rep = ConcreteRep::realize(g, RepKind::Standard).unwrap();
        let e = AffineElement::linear(&rep, &expm(&g.cartan_def(&x))).unwrap();
        assert!(close(&cartan_projection(&rep, &e), &x, 1e-12), "{g}");
        assert!(close(&jordan_projection(&rep, &e).jd, &x, 1e-9), "{g}");
    }
}

#[test]
fn projections_against_singular_values_and_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in [GroupKind::SL(3), GroupKind::SL(4), GroupKind::SO(3, 2), GroupKind::SO(4, 1)] {
        let rep = ConcreteRep::realize(g, RepKind::Standard).unwrap();
        for _ in 0..10 {
            let m = random_group_element(g, &mut rng, 0.8);
            let e = AffineElement::linear(&rep, &m).unwrap();
            let ct = cartan_projection(&rep, &e);
            assert!(close(&ct, &cartan_projection_sv(g, &m), 1e-9), "{g}");
            // Ct(g⁻¹) = −w₀ Ct(g), likewise for Jd.
            let ct_inv = cartan_projection(&rep, &e.inverse());
            assert!(close(&ct_inv, &opposition_f64(&rep.rs, &ct), 1e-9), "{g}");
            let jd = jordan_projection(&rep, &e);
            let jd_inv = jordan_projection(&rep, &e.inverse());
            let eig = jordan_projection_eig(g, &e);
            if jd.converged {
                assert!(close(&jd.jd, &eig, 1e-6), "{g} {:?} {:?}", jd.jd, eig);
                assert!(close(&jd_inv.jd, &opposition_f64(&rep.rs, &jd.jd), 1e-6), "{g}");
            }
        }
    }
}

#[test]
fn random_regular_elements_have_the_planted_jordan_projection() {
    let ctx = AffineContext::fixture(GroupKind::SL(3), RepKind::Sym(3), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let y = random_compatible_vector(&ctx, &mut rng, 1.0, 0.3);
        let p = random_group_element(ctx.group(), &mut rng, 0.4);
        let def = &p * expm(&ctx.group().cartan_def(&y)) * p.clone().try_inverse().unwrap();
        let g = AffineElement::linear(&ctx.rep, &def).unwrap();
        let jd = jordan_projection(&ctx.rep, &g);
        assert!(jd.converged);
        assert!(close(&jd.jd, &y, 1e-7), "{:?} vs {y:?}", jd.jd);
        assert!(close(&jordan_projection_eig(ctx.group(), &g), &y, 1e-9));
        let p = ctx.predicates(&y);
        assert!(p.rho_regular && p.compatible && p.asymptotically_contracting);
    }
}

#[test]
fn margulis_invariant_of_a_translated_cartan_element() {
    for (g, k) in [
        (GroupKind::SO(2, 1), RepKind::Standard),
        (GroupKind::SL(3), RepKind::Sym(3)),
        (GroupKind::SL(2), RepKind::Adjoint),
        (GroupKind::SO(3, 2), RepKind::Adjoint),
    ] {
        let ctx = AffineContext::fixture(g, k, 5).unwrap();
        let x0 = vec_to_f64(&ctx.cert.x0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = gaussian_vector(&mut rng, ctx.rep.dim_v, 1.0);
        let e = AffineElement::new(&ctx.rep, &expm(&g.cartan_def(&x0)), &v).unwrap();
        let split = ideal_split(&ctx, &e).unwrap();
        let m = margulis_invariant(&ctx, &split, &e).unwrap();
        let expected = ctx.spaces.t.transpose() * &v;
        assert!((&m - &expected).norm() < 1e-9, "{g} {k}: {m} vs {expected}");
    }
}

/// The classical invariant `B(g x − x, x⁰)` for the unit spacelike fixed
/// vector `x⁰` of the linear part, up to the orientation of `x⁰`.
fn classical_margulis(lin: &Mat, t: &Vector, x: &Vector) -> f64 {
    let q = GroupKind::SO(2, 1).form().unwrap();
    let svd = (lin - Mat::identity(3, 3)).svd(true, true);
    let (i, _) = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let mut x0 = svd.v_t.unwrap().row(i).transpose();
    x0 /= (x0.transpose() * &q * &x0)[(0, 0)].sqrt();
    let disp = lin * x + t - x;
    (disp.transpose() * &q * &x0)[(0, 0)]
}

#[test]
fn so21_matches_the_classical_invariant_up_to_orientation() {
    let ctx = so21();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = SamplerOptions::default();
    for _ in 0..20 {
        let g = random_regular_element(&ctx, &mut rng, &opts).unwrap();
        let split = ideal_split(&ctx, &g).unwrap();
        let m = margulis_invariant(&ctx, &split, &g).unwrap();
        assert_eq!(m.len(), 1);
        let x = gaussian_vector(&mut rng, 3, 1.0);
        let classical = classical_margulis(&g.linear_part(), &g.translation(), &x);
        assert!((m[0].abs() - classical.abs()).abs() < 1e-9, "{} vs {classical}", m[0]);
        // Classical identities: powers, conjugation, inversion.
        let m3 = margulis_invariant(&ctx, &ideal_split(&ctx, &g.pow(3)).unwrap(), &g.pow(3)).unwrap();
        assert!((m3[0] - 3.0 * m[0]).abs() < 1e-8);
        let h = random_regular_element(&ctx, &mut rng, &opts).unwrap();
        let c = h.compose(&g).compose(&h.inverse());
        let mc = margulis_invariant(&ctx, &ideal_split(&ctx, &c).unwrap(), &c).unwrap();
        assert!((mc[0] - m[0]).abs() < 1e-8);
        let gi = g.inverse();
        let mi = margulis_invariant(&ctx, &ideal_split(&ctx, &gi).unwrap(), &gi).unwrap();
        let expected = ctx.minus_w0_on_vt0() * &m;
        assert!((&mi - expected).norm() < 1e-8);
        // The basepoint lies on the invariant axis.
        let x0 = &split.basepoint;
        let moved = g.fwd.apply(x0) - x0;
        let dir = split.v_approx.column(0);
        assert!((&moved - dir * dir.dot(&moved)).norm() < 1e-8);
    }
}

#[test]
fn split_spaces_are_invariant() {
    for (g, k) in [
        (GroupKind::SO(2, 1), RepKind::Standard),
        (GroupKind::SL(3), RepKind::Sym(3)),
        (GroupKind::SO(3, 2), RepKind::Adjoint),
        (GroupKind::SL(3), RepKind::Adjoint),
    ] {
        let ctx = AffineContext::fixture(g, k, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let e = random_regular_element(&ctx, &mut rng, &SamplerOptions::default()).unwrap();
            let s = ideal_split(&ctx, &e).unwrap();
            for (b, m) in [(&s.a_gtr, &e.fwd.mat), (&s.a_lesssim, &e.fwd.mat), (&s.a_approx, &e.fwd.mat)] {
                let img = m * b;
                let out = &img - b * (b.transpose() * &img);
                assert!(out.norm() < 1e-8 * op_norm(m), "{g} {k}");
            }
            let d = ctx.rep.dim_v;
            assert_eq!(s.a_gtr.ncols(), ctx.spaces.gt.ncols() + ctx.spaces.eq.ncols() + 1);
            assert_eq!(s.v_gg.ncols() + s.v_approx.ncols() + s.v_ll.ncols(), d);
            // The affine spaces contain the basepoint.
            let mut p = s.basepoint.clone().insert_row(d, 1.0);
            p.normalize_mut();
            let res = &p - &s.a_approx * (s.a_approx.transpose() * &p);
            assert!(res.norm() < 1e-9);
        }
    }
}

#[test]
fn contraction_strength_of_cartan_elements() {
    for (g, k) in [
        (GroupKind::SL(3), RepKind::Sym(3)),
        (GroupKind::SO(2, 1), RepKind::Standard),
        (GroupKind::SO(3, 2), RepKind::Adjoint),
    ] {
        let ctx = AffineContext::fixture(g, k, 5).unwrap();
        let x0 = vec_to_f64(&ctx.cert.x0);
        let pair = |w: &properaff::QVec| vec_to_f64(w).iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>();
        let p = &ctx.cert.partition;
        let max_lt = p.lt.iter().map(pair).fold(f64::NEG_INFINITY, f64::max);
        let min_ge = p.gt.iter().chain(&p.eq).map(pair).fold(0.0, f64::min);
        let e = AffineElement::linear(&ctx.rep, &expm(&g.cartan_def(&x0))).unwrap();
        let s = affine_contraction_strength(&ctx, &ideal_split(&ctx, &e).unwrap());
        assert!((s - (max_lt - min_ge).exp()).abs() < 1e-9 * s, "{g} {k}");
    }
}

#[test]
fn contraction_strength_decays_under_powers() {
    let ctx = AffineContext::fixture(GroupKind::SL(3), RepKind::Sym(3), 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = SamplerOptions::default();
    for _ in 0..5 {
        let g = random_regular_element(&ctx, &mut rng, &opts).unwrap();
        let s = |e: &AffineElement| affine_contraction_strength(&ctx, &ideal_split(&ctx, e).unwrap());
        let mut seq = Vec::new();
        for n in [1, 2, 4, 8, 16] {
            let gn = g.pow(n);
            let sn = s(&gn);
            seq.push(sn);
            // Dropping the translation cannot increase the strength.
            let lin = AffineElement::linear(&ctx.rep, &gn.def).unwrap();
            assert!(s(&lin) <= sn * (1.0 + 1e-9));
        }
        // Transients are allowed at small N; the tail must decay.
        assert!(seq[4] < seq[3] && seq[3] < seq[0] && seq[4] < 0.05, "{seq:?}");
        let ct = cartan_projection(&ctx.rep, &g.pow(16));
        assert!(linear_contraction_strength(ctx.rs(), &ctx.cert, &ct) < 1.0);
    }
}

#[test]
fn proximal_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = gaussian_matrix(&mut rng, 3, 3, 1.0);
    let pi = p.clone().try_inverse().unwrap();
    let m = &p * Mat::from_diagonal(&Vector::from_vec(vec![3.0, 1.0, 1.0 / 3.0])) * &pi;
    let r = proximal_report(&m, 1e-9).unwrap();
    assert!(r.is_proximal);
    assert!((r.spectral_radius - 3.0).abs() < 1e-10);
    assert!((r.gap - 3.0).abs() < 1e-10);
    let es = r.es.unwrap();
    assert!(line_distance(&es, &p.column(0).into_owned()) < 1e-9);
    // E^u is spanned by the last two columns of P.
    let normal = r.eu_normal.unwrap();
    assert!((normal.transpose() * p.columns(1, 2)).norm() < 1e-9);
    let diag = Mat::from_diagonal(&Vector::from_vec(vec![3.0, 1.0, 1.0 / 3.0]));
    assert!((proximal_report(&diag, 1e-9).unwrap().s_tilde.unwrap() - 1.0 / 3.0).abs() < 1e-12);

    let rot = Mat::from_row_slice(3, 3, &[0.0, -2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.25]);
    assert!(!proximal_report(&rot, 1e-9).unwrap().is_proximal);
    let tie = Mat::from_diagonal(&Vector::from_vec(vec![2.0, -2.0, 0.25]));
    assert!(matches!(proximal_report(&tie, 1e-9), Err(Error::IndeterminateProximality(_))));
}

#[test]
fn reference_pair_has_bound_one_and_degenerates_with_angle() {
    let ctx = so21();
    let sp = &ctx.spaces;
    let nu = nondegeneracy_bound(sp, &sp.affine_ge(), &sp.affine_le()).unwrap();
    assert!((nu - 1.0).abs() < 1e-12);
    let mut last = nu;
    for theta in [1.2f64, 0.8, 0.4, 0.2, 0.1, 0.05] {
        let lt_theta = sp.lt.column(0) * theta.sin() + sp.gt.column(0) * theta.cos();
        let tilted = Mat::from_columns(&[lt_theta.into_owned()]);
        let a2 = properaff::linalg::hstack(&[&tilted, &sp.eq]).insert_row(3, 0.0).insert_column(2, 0.0);
        let mut a2 = a2;
        a2[(3, 2)] = 1.0;
        let b = nondegeneracy_bound(sp, &sp.affine_ge(), &a2).unwrap();
        assert!(b > last);
        assert!(b * theta.sin() < 3.0, "θ = {theta}: {b}");
        last = b;
    }
    // Parallel spaces are rejected.
    assert!(matches!(nondegeneracy_bound(sp, &sp.affine_ge(), &sp.affine_ge()), Err(Error::DegeneratePair(_))));
    // Translating one space away raises the bound.
    let mut shifted = sp.affine_le();
    let k = shifted.ncols() - 1;
    for i in 0..3 {
        shifted[(i, k)] += 5.0 * sp.gt[(i, 0)];
    }
    assert!(nondegeneracy_bound(sp, &sp.affine_ge(), &shifted).unwrap() > 4.0);
}

#[test]
fn affine_map_round_trips() {
    let m = AffineMap::from_row_major(&[2.0, 1.0, 3.0, 0.0, 0.5, -1.0, 0.0, 0.0, 1.0]).unwrap();
    let inv = m.inverse().unwrap();
    assert!((m.compose(&inv).mat - Mat::identity(3, 3)).norm() < 1e-14);
    assert!(AffineMap::from_row_major(&[1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 2.0]).is_err());
    assert!(AffineMap::from_row_major(&[1.0, 2.0]).is_err());
}

#[test]
fn long_products_keep_inverse_pairs_consistent() {
    let ctx = AffineContext::fixture(GroupKind::SL(3), RepKind::Sym(3), 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = random_regular_element(&ctx, &mut rng, &SamplerOptions::default()).unwrap();
    let gn = g.pow(9);
    let mut slow = g.clone();
    for _ in 1..9 {
        slow = slow.compose(&g);
    }
    assert!((&gn.def - &slow.def).norm() <= 1e-10 * gn.def.norm());
    let id = &gn.def * &gn.def_inv;
    assert!((id - Mat::identity(3, 3)).norm() < 1e-8);
}
