use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use torsionkit::random::random_derivation;
use torsionkit::sullivan::{
    augmentation_check, block_lazarev, bracket, bracket_with_d, build_homotopy, desk_models, exp_derivation, in_u_star,
    Cdga, Derivation, Morphism,
};

const PER_MODEL: usize = 100;

fn derivations(m: &Cdga, seed: u64) -> Vec<Derivation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..PER_MODEL).map(|k| random_derivation(m, k % 2 == 0, &mut rng)).collect()
}

#[test]
fn bracket_with_d_is_a_cycle() {
    for (name, m) in desk_models() {
        for i in derivations(&m, 1) {
            let big_d = bracket_with_d(&i, &m).unwrap();
            assert_eq!(big_d.degree, 0);
            assert!(bracket(&m, &m.differential(), &big_d).is_zero(), "{name}");
        }
    }
}

#[test]
fn brackets_close_with_explicit_witness() {
    for (name, m) in desk_models() {
        let is = derivations(&m, 2);
        let js = derivations(&m, 3);
        for (i, j) in is.iter().zip(&js) {
            let (di, dj) = (bracket_with_d(i, &m).unwrap(), bracket_with_d(j, &m).unwrap());
            let k = bracket(&m, i, &dj);
            assert_eq!(k.degree, -1);
            assert_eq!(bracket(&m, &di, &dj), bracket_with_d(&k, &m).unwrap(), "{name}");
        }
    }
}

#[test]
fn exponential_is_an_automorphism_with_exact_inverse() {
    for (name, m) in desk_models() {
        for i in derivations(&m, 4) {
            let big_d = bracket_with_d(&i, &m).unwrap();
            let e = exp_derivation(&big_d, &m).unwrap();
            let inv = exp_derivation(&big_d.scale(&-num_rational::BigRational::from_integer(1.into())), &m).unwrap();
            assert!(e.commutes_with_d(&m), "{name}");
            assert_eq!(e.compose(&m, &inv), Morphism::identity(&m), "{name}");
            assert_eq!(inv.compose(&m, &e), Morphism::identity(&m), "{name}");
        }
    }
}

#[test]
fn homotopy_endpoints_and_augmentation() {
    for (name, m) in desk_models() {
        for i in derivations(&m, 5) {
            let h = build_homotopy(&i, &m).unwrap();
            assert_eq!(h.at_zero(), Morphism::identity(&m), "{name}");
            assert_eq!(h.at_one(), exp_derivation(&bracket_with_d(&i, &m).unwrap(), &m).unwrap(), "{name}");
            assert!(h.commutes_with_d(&m), "{name}");
            if in_u_star(&i, &m) {
                assert!(augmentation_check(&h), "{name}");
            }
        }
    }
}

#[test]
fn block_lazarev_recovers_the_endpoint() {
    for (name, m) in desk_models() {
        for i in derivations(&m, 6) {
            let h = build_homotopy(&i, &m).unwrap();
            let j = block_lazarev(&h, &m).unwrap();
            let endpoint = exp_derivation(&bracket_with_d(&j, &m).unwrap(), &m).unwrap();
            assert_eq!(endpoint, h.at_one(), "{name}");
        }
    }
}
