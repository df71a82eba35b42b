use std::collections::BTreeSet;

use properaff::exact::{dot, int, neg, rat, sub, QVec};
use properaff::Rat;
use properaff::root_system::{build_root_system, product_root_system, Family, DEFAULT_WEYL_CAP};
use properaff::weights::{weight_set, WeightSet};
use properaff::x0::*;

fn v(xs: &[i64]) -> QVec {
    xs.iter().map(|&x| int(x)).collect()
}

#[test]
fn c4_three_extreme_types() {
    let rs = build_root_system(Family::C, 4).unwrap();
    let omega = weight_set(&rs, &v(&[1, 1, 1, 1])).unwrap();
    let reps = [(v(&[4, 2, 1, 0]), vec![3]), (v(&[5, 3, 2, 1]), vec![]), (v(&[4, 3, 2, 0]), vec![3])];
    for (x, pi) in &reps {
        let cert = certify(&rs, &omega, x, DEFAULT_WEYL_CAP).unwrap();
        assert!(cert.generically_symmetric && cert.extreme, "{x:?}");
        assert_eq!(&cert.pi_x0, pi);
        if pi.is_empty() {
            assert_eq!(cert.pi_x0_roots.len(), 0);
        } else {
            assert_eq!(cert.pi_x0_roots, vec![v(&[0, 0, 0, 2])]);
        }
    }
    // Pairwise distinct types.
    for i in 0..3 {
        for j in i + 1..3 {
            assert!(!same_type(&omega, &reps[i].0, &reps[j].0));
        }
    }
    // Extremizing a generic vector of each type lands on an extreme
    // representative of the same type with the same Π_{X₀}.
    let generic = [
        vec![rat(41, 10), rat(21, 10), rat(11, 10), rat(1, 10)],
        vec![rat(51, 10), rat(31, 10), rat(19, 10), rat(9, 10)],
        vec![rat(41, 10), rat(31, 10), rat(19, 10), rat(1, 10)],
    ];
    for ((rep, pi), x) in reps.iter().zip(&generic) {
        assert!(same_type(&omega, rep, x));
        let e = extremize(&rs, &omega, x, DEFAULT_WEYL_CAP).unwrap();
        assert!(same_type(&omega, rep, &e));
        assert!(is_extreme(&rs, &omega, &e, DEFAULT_WEYL_CAP).unwrap());
        assert_eq!(&rs.wall_indices(&e), pi);
    }
}

/// All `(λ^≥, λ^<)` with `λ^≥ − λ^< = α`, `λ^<(X₀) < 0 ≤ λ^≥(X₀)`, by direct scan.
fn brute_pairs(omega: &WeightSet, alpha: &[Rat], x0: &[Rat]) -> BTreeSet<(QVec, QVec)> {
    let zero = int(0);
    omega
        .weights
        .iter()
        .filter(|ge| dot(ge, x0) >= zero)
        .map(|ge| (ge.clone(), sub(ge, alpha)))
        .filter(|(_, lt)| omega.contains(lt) && dot(lt, x0) < zero)
        .collect()
}

#[test]
fn c4_departure_pairs_for_the_generic_type() {
    let rs = build_root_system(Family::C, 4).unwrap();
    let omega = weight_set(&rs, &v(&[1, 1, 1, 1])).unwrap();
    let x0 = v(&[5, 3, 2, 1]);
    let cert = certify(&rs, &omega, &x0, DEFAULT_WEYL_CAP).unwrap();
    let listed: BTreeSet<(QVec, QVec)> = pair_candidates(&rs, &omega, &cert.partition, 3, false).into_iter().collect();
    assert_eq!(listed, brute_pairs(&omega, &rs.simple_roots[3], &x0));
    // e1−e2−e3±e4 is a valid pair, but so is its image under e1 ↔ −e1 with
    // e2, e3 flipped: −e1+e2+e3±e4 also straddles X₀ (values 1 and −1).
    let expected: BTreeSet<(QVec, QVec)> =
        [(v(&[1, -1, -1, 1]), v(&[1, -1, -1, -1])), (v(&[-1, 1, 1, 1]), v(&[-1, 1, 1, -1]))].into_iter().collect();
    assert_eq!(listed, expected);
    let pair = cert.pairs_weak.iter().find(|p| p.index == 3).unwrap();
    assert_eq!(pair.candidates, 2);
    assert_eq!(pair.lambda_ge, v(&[1, -1, -1, 1]));
    assert_eq!(pair.lambda_lt, v(&[1, -1, -1, -1]));
    // −2e4 is not a weight, so λ^≥ = 0 is impossible for α₄; the other
    // simple roots admit it.
    assert!(!omega.contains(&v(&[0, 0, 0, -2])));
    for p in cert.pairs_weak.iter().filter(|p| p.index < 3) {
        assert_eq!(p.lambda_ge, v(&[0, 0, 0, 0]));
    }
    // Ω^≥: 8 sign patterns, the 12 forms e_i ± e_j with i < j, and 0.
    assert_eq!(cert.partition.ge().len(), 8 + 12 + 1);
    assert!(cert.partition.ge().contains(&v(&[-1, 1, 1, 1])));
}

#[test]
fn a3_swinging_counterexample() {
    let rs = build_root_system(Family::A, 3).unwrap();
    let lam = rs.from_omega_coords(&v(&[5, 0, 1]));
    let omega = weight_set(&rs, &lam).unwrap();
    let cert = certify(&rs, &omega, &v(&[10, 1, -1, -10]), DEFAULT_WEYL_CAP).unwrap();
    assert!(cert.generically_symmetric && cert.extreme);
    let eq: BTreeSet<QVec> = cert.partition.eq.iter().cloned().collect();
    let expected: BTreeSet<QVec> = [v(&[0, 0, 0, 0]), v(&[1, -1, -1, 1]), v(&[-1, 1, 1, -1])].into_iter().collect();
    assert_eq!(eq, expected);
    let p = vector_predicates(&rs, &cert, &v(&[16, 2, -3, -15]));
    assert!(p.asymptotically_contracting);
    assert!(!p.rho_regular);
    assert_eq!(p.vanishing, vec![v(&[-1, -1, 4, -2])]);
    // X₀ itself is ρ-regular and compatible.
    let own = vector_predicates(&rs, &cert, &cert.x0);
    assert!(own.rho_regular && own.compatible && own.asymptotically_contracting);
}

#[test]
fn b2_squared_types_and_pairs() {
    let b2 = build_root_system(Family::B, 2).unwrap();
    let rs = product_root_system(&[b2.clone(), b2]).unwrap();
    let omega = weight_set(&rs, &v(&[1, 0, 1, 0])).unwrap();
    assert_eq!(omega.len(), 25);

    let nice = certify(&rs, &omega, &v(&[2, 2, 1, 1]), DEFAULT_WEYL_CAP).unwrap();
    assert_eq!(nice.pi_x0, vec![0, 2]);

    let x = v(&[3, 1, 2, 2]);
    let mid = certify(&rs, &omega, &x, DEFAULT_WEYL_CAP).unwrap();
    assert_eq!(mid.pi_x0, vec![2]);
    let options: BTreeSet<(QVec, QVec)> = pair_candidates(&rs, &omega, &mid.partition, 0, false).into_iter().collect();
    assert_eq!(options, brute_pairs(&omega, &rs.simple_roots[0], &x));
    // The pairs (e1 − f_i, e2 − f_i) are available; so are (−e2 + f_i, −e1 + f_i).
    for i in [2usize, 3] {
        let mut f = v(&[0, 0, 0, 0]);
        f[i] = int(1);
        let ge = sub(&v(&[1, 0, 0, 0]), &f);
        let lt = sub(&v(&[0, 1, 0, 0]), &f);
        assert!(options.contains(&(ge.clone(), lt.clone())));
        assert!(options.contains(&(neg(&lt), neg(&ge))));
    }
    assert_eq!(options.len(), 4);

    let x = v(&[4, 2, 3, 1]);
    let generic = certify(&rs, &omega, &x, DEFAULT_WEYL_CAP).unwrap();
    assert!(generic.pi_x0.is_empty());
    for (i, ge, lt) in [(0, v(&[1, 0, -1, 0]), v(&[0, 1, -1, 0])), (2, v(&[0, -1, 1, 0]), v(&[0, -1, 0, 1]))] {
        let all = brute_pairs(&omega, &rs.simple_roots[i], &x);
        let listed: BTreeSet<(QVec, QVec)> =
            pair_candidates(&rs, &omega, &generic.partition, i, false).into_iter().collect();
        assert_eq!(listed, all);
        assert!(all.contains(&(ge, lt)));
        let p = generic.pairs_weak.iter().find(|p| p.index == i).unwrap();
        assert!(all.contains(&(p.lambda_ge.clone(), p.lambda_lt.clone())));
    }
}

#[test]
fn seeded_search_reaches_every_c4_type() {
    let rs = build_root_system(Family::C, 4).unwrap();
    let omega = weight_set(&rs, &v(&[1, 1, 1, 1])).unwrap();
    let reps = [v(&[4, 2, 1, 0]), v(&[5, 3, 2, 1]), v(&[4, 3, 2, 0])];
    let mut seen = BTreeSet::new();
    for seed in 0..64 {
        let cert = find_x0(&rs, &omega, seed).unwrap();
        assert!(cert.generically_symmetric && cert.extreme);
        let ty = reps.iter().position(|r| same_type(&omega, r, &cert.x0)).expect("one of the three types");
        seen.insert(ty);
        // Same seed, same answer.
        assert_eq!(find_x0(&rs, &omega, seed).unwrap().x0, cert.x0);
    }
    assert_eq!(seen.len(), 3);
}

#[test]
fn compatible_cone_sample_is_strictly_dominant_and_compatible() {
    let rs = build_root_system(Family::C, 4).unwrap();
    let omega = weight_set(&rs, &v(&[1, 1, 1, 1])).unwrap();
    for x in [v(&[4, 2, 1, 0]), v(&[5, 3, 2, 1])] {
        let cert = certify(&rs, &omega, &x, DEFAULT_WEYL_CAP).unwrap();
        for seed in 0..8 {
            let y = compatible_cone_sample(&rs, &cert, seed);
            assert!(rs.is_strictly_dominant(&y));
            let p = vector_predicates(&rs, &cert, &y);
            assert!(p.compatible && p.asymptotically_contracting);
        }
    }
}
