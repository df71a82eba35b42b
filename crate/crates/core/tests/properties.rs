use std::collections::HashSet;

use proptest::prelude::*;

use properaff::exact::{dot, int, neg, QMat, QVec};
use properaff::group::{cyclically_reduced_word_count, enumerate_words, reduced_word_count, WordMode};
use properaff::root_system::{
    build_root_system, duality_defect, product_root_system, Family, RootSystemData, DEFAULT_WEYL_CAP,
};
use properaff::weights::weight_set;
use properaff::x0::*;
use properaff::Rat;

fn systems() -> Vec<RootSystemData> {
    let mut out: Vec<RootSystemData> = [
        (Family::A, 1),
        (Family::A, 2),
        (Family::A, 3),
        (Family::B, 2),
        (Family::B, 3),
        (Family::C, 3),
        (Family::D, 4),
        (Family::BC, 1),
        (Family::BC, 2),
    ]
    .into_iter()
    .map(|(f, n)| build_root_system(f, n).unwrap())
    .collect();
    let a1 = build_root_system(Family::A, 1).unwrap();
    let b2 = build_root_system(Family::B, 2).unwrap();
    out.push(product_root_system(&[a1, b2]).unwrap());
    out
}

fn small_systems() -> Vec<RootSystemData> {
    systems().into_iter().filter(|rs| rs.rank <= 3).collect()
}

fn reflect(alpha: &[Rat], x: &[Rat]) -> QVec {
    let c = int(2) * dot(x, alpha) / dot(alpha, alpha);
    x.iter().zip(alpha).map(|(xi, ai)| xi - c * ai).collect()
}

fn coords(rank: usize, lo: i64, hi: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(lo..=hi, rank)
}

#[test]
fn root_systems_are_closed_under_their_reflections() {
    for rs in systems() {
        let all: HashSet<&QVec> = rs.roots.iter().collect();
        for a in &rs.roots {
            for b in &rs.roots {
                assert!(all.contains(&reflect(a, b)), "{}: s_{a:?}({b:?})", rs.label());
            }
        }
        assert_eq!(duality_defect(&rs), 0, "{}", rs.label());
        // w₀ is an involution sending every simple root to a negative simple root.
        assert!(rs.w0.mul(&rs.w0).is_identity());
        for (i, a) in rs.simple_roots.iter().enumerate() {
            assert_eq!(rs.w0.transpose().apply(a), neg(&rs.simple_roots[rs.opposition[i]]));
        }
    }
}

#[test]
fn weyl_stabilizers_are_generated_by_vanishing_simple_reflections() {
    // Sample grid: every X with simple-root values in {0, 1, 2}.
    for rs in small_systems() {
        let all: Vec<Vec<i64>> = (0..3usize.pow(rs.rank as u32))
            .map(|mut n| {
                (0..rs.rank)
                    .map(|_| {
                        let d = (n % 3) as i64;
                        n /= 3;
                        d
                    })
                    .collect()
            })
            .collect();
        for vals in all {
            let a: Vec<Rat> = vals.iter().map(|&x| int(x)).collect();
            let x = from_simple_root_values(&rs, &a);
            let brute: HashSet<QMat> =
                rs.stabilizer_pointwise(&x, DEFAULT_WEYL_CAP).unwrap().into_iter().map(|w| w.matrix).collect();
            let gens = rs.wall_indices(&x);
            let closure: HashSet<QMat> = rs.parabolic_subgroup(&gens).into_iter().collect();
            assert_eq!(brute, closure, "{} at {vals:?}", rs.label());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn weight_sets_are_weyl_invariant(pick in 0usize..64, c in coords(3, 0, 2)) {
        let sys = small_systems();
        let rs = &sys[pick % sys.len()];
        let highest = rs.from_omega_coords(&c[..rs.rank].iter().map(|&x| int(x)).collect::<Vec<_>>());
        let omega = weight_set(rs, &highest).unwrap();
        let set: HashSet<&QVec> = omega.weights.iter().collect();
        for w in &omega.weights {
            for a in &rs.simple_roots {
                prop_assert!(set.contains(&reflect(a, w)));
            }
        }
    }

    #[test]
    fn opposition_involution_is_an_involution(pick in 0usize..64, c in coords(4, -5, 5)) {
        let sys = systems();
        let rs = &sys[pick % sys.len()];
        let x: QVec = c.iter().take(rs.ambient_dim).map(|&x| int(x)).chain(std::iter::repeat(int(0))).take(rs.ambient_dim).collect();
        prop_assert_eq!(rs.opposition_involution(&rs.opposition_involution(&x)), x.clone());
        prop_assert_eq!(rs.apply_w0(&rs.apply_w0(&x)), x);
    }

    #[test]
    fn word_counts_match_closed_forms(k in 1usize..=3, l in 1usize..=5) {
        let red = enumerate_words(k, l, WordMode::Reduced);
        let cyc = enumerate_words(k, l, WordMode::CyclicallyReduced);
        prop_assert_eq!(red.iter().filter(|w| w.len() == l).count() as u64, reduced_word_count(k, l as u32));
        prop_assert_eq!(cyc.iter().filter(|w| w.len() == l).count() as u64, cyclically_reduced_word_count(k, l as u32));
        prop_assert!(cyc.iter().all(|w| w.is_cyclically_reduced()));
    }
}

struct X0Fixture {
    rs: RootSystemData,
    omega: properaff::weights::WeightSet,
    cert: X0Certificate,
}

fn x0_fixtures() -> Vec<X0Fixture> {
    let v = |xs: &[i64]| -> QVec { xs.iter().map(|&x| int(x)).collect() };
    let mut out = Vec::new();
    let c4 = build_root_system(Family::C, 4).unwrap();
    let omega = weight_set(&c4, &v(&[1, 1, 1, 1])).unwrap();
    for x in [v(&[4, 2, 1, 0]), v(&[5, 3, 2, 1]), v(&[4, 3, 2, 0])] {
        let cert = certify(&c4, &omega, &x, DEFAULT_WEYL_CAP).unwrap();
        out.push(X0Fixture { rs: c4.clone(), omega: omega.clone(), cert });
    }
    let a3 = build_root_system(Family::A, 3).unwrap();
    let omega = weight_set(&a3, &a3.from_omega_coords(&v(&[5, 0, 1]))).unwrap();
    let cert = certify(&a3, &omega, &v(&[10, 1, -1, -10]), DEFAULT_WEYL_CAP).unwrap();
    out.push(X0Fixture { rs: a3, omega, cert });
    let a2 = build_root_system(Family::A, 2).unwrap();
    let omega = weight_set(&a2, &a2.from_omega_coords(&v(&[3, 0]))).unwrap();
    let cert = find_x0(&a2, &omega, 0).unwrap();
    out.push(X0Fixture { rs: a2, omega, cert });
    let b2 = build_root_system(Family::B, 2).unwrap();
    let bb = product_root_system(&[b2.clone(), b2]).unwrap();
    let omega = weight_set(&bb, &v(&[1, 0, 1, 0])).unwrap();
    for x in [v(&[2, 2, 1, 1]), v(&[3, 1, 2, 2]), v(&[4, 2, 3, 1])] {
        let cert = certify(&bb, &omega, &x, DEFAULT_WEYL_CAP).unwrap();
        out.push(X0Fixture { rs: bb.clone(), omega: omega.clone(), cert });
    }
    out
}

#[test]
fn predicate_implications_on_random_dominant_vectors() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for fx in x0_fixtures() {
        let mut counts = [0usize; 2];
        for _ in 0..1000 {
            let vals: Vec<Rat> = (0..fx.rs.rank).map(|_| int(rng.random_range(0..6))).collect();
            let y = from_simple_root_values(&fx.rs, &vals);
            let p = vector_predicates(&fx.rs, &fx.cert, &y);
            if p.asymptotically_contracting {
                counts[0] += 1;
                assert!(p.x0_regular, "{:?} at {y:?}", fx.cert.x0);
            }
            if p.compatible {
                counts[1] += 1;
                assert!(p.rho_regular, "{:?} at {y:?}", fx.cert.x0);
            }
        }
        // Both hypotheses are actually exercised.
        assert!(counts[0] > 0 && counts[1] > 0, "{:?}: {counts:?}", fx.cert.x0);
    }
}

#[test]
fn stabilizers_of_the_type_partition_agree() {
    for fx in x0_fixtures() {
        let p = &fx.cert.partition;
        let key = |ws: Vec<properaff::root_system::WeylElement>| -> HashSet<QMat> {
            ws.into_iter().map(|w| w.matrix).collect()
        };
        let ge = key(fx.rs.stabilizer_setwise(&p.ge(), DEFAULT_WEYL_CAP).unwrap());
        let gt = key(fx.rs.stabilizer_setwise(&p.gt, DEFAULT_WEYL_CAP).unwrap());
        let lt = key(fx.rs.stabilizer_setwise(&p.lt, DEFAULT_WEYL_CAP).unwrap());
        let le = key(fx.rs.stabilizer_setwise(&p.le(), DEFAULT_WEYL_CAP).unwrap());
        let wx: HashSet<QMat> = fx.rs.parabolic_subgroup(&fx.cert.pi_x0).into_iter().collect();
        assert_eq!(ge, wx);
        assert_eq!(gt, wx);
        assert_eq!(lt, wx);
        assert_eq!(le, wx);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn extremize_is_idempotent_on_types(pick in 0usize..64, vals in coords(4, 1, 9)) {
        let fxs = x0_fixtures();
        let fx = &fxs[pick % fxs.len()];
        let a: Vec<Rat> = vals[..fx.rs.rank].iter().map(|&x| int(x)).collect();
        let x = from_simple_root_values(&fx.rs, &a);
        let once = extremize(&fx.rs, &fx.omega, &x, DEFAULT_WEYL_CAP).unwrap();
        let twice = extremize(&fx.rs, &fx.omega, &once, DEFAULT_WEYL_CAP).unwrap();
        prop_assert!(same_type(&fx.omega, &once, &twice));
        prop_assert!(same_type(&fx.omega, &x, &once));
    }

    #[test]
    fn compatible_cone_samples_stay_compatible(pick in 0usize..64, seed in 0u64..1000) {
        let fxs = x0_fixtures();
        let fx = &fxs[pick % fxs.len()];
        let y = compatible_cone_sample(&fx.rs, &fx.cert, seed);
        let p = vector_predicates(&fx.rs, &fx.cert, &y);
        prop_assert!(p.compatible && p.rho_regular && p.asymptotically_contracting);
    }
}

#[test]
fn non_awkward_walls_are_the_simple_roots_outside_omega() {
    let mut checked = 0;
    for fx in x0_fixtures() {
        if properaff::weights::classify(&fx.rs, &fx.omega).awkward {
            continue;
        }
        let outside: Vec<usize> =
            (0..fx.rs.rank).filter(|&i| !fx.omega.contains(&fx.rs.simple_roots[i])).collect();
        assert_eq!(fx.cert.pi_x0, outside, "{:?}", fx.cert.x0);
        checked += 1;
    }
    assert!(checked > 0);
}
