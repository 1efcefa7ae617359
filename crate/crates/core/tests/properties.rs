use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torsionkit::chains::{torsion_of_acyclic, whitehead_torsion, EquivalencePack};
use torsionkit::groupring::{gr_det, gr_mul, is_trivial_unit, GroupSpec, RingMatrix};
use torsionkit::random::{
    commuting_pair, perturbed_equivalence, random_element, random_matrix, random_trivial_unit, second_contraction,
    ComplexOptions, RandomComplex,
};
use torsionkit::torsion::{gersten_torsion, swindle_check, to_whitehead, torus_vanishing_check, K1Class, TorusSpec};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn ring_multiplication_is_associative_and_commutative() {
    let mut r = rng(10);
    let s = Arc::new(GroupSpec::new(1, vec![4, 3]).unwrap());
    for _ in 0..1000 {
        let (a, b, c) = (random_element(&s, &mut r, 3), random_element(&s, &mut r, 3), random_element(&s, &mut r, 3));
        assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        assert_eq!(&a * &b, &b * &a);
    }
}

#[test]
fn trivial_units_are_closed_under_products() {
    let mut r = rng(11);
    let s = Arc::new(GroupSpec::z_times_cyclic(6));
    for _ in 0..500 {
        let (a, b) = (random_trivial_unit(&s, &mut r), random_trivial_unit(&s, &mut r));
        assert!(is_trivial_unit(&gr_mul(&a, &b).unwrap()));
    }
}

#[test]
fn determinant_is_multiplicative() {
    let mut r = rng(12);
    let s = Arc::new(GroupSpec::z_times_cyclic(3));
    for _ in 0..50 {
        let a = random_matrix(&s, 3, 3, 0.7, &mut r);
        let b = random_matrix(&s, 3, 3, 0.7, &mut r);
        let ab: RingMatrix = &a * &b;
        assert_eq!(gr_det(&ab).unwrap(), &gr_det(&a).unwrap() * &gr_det(&b).unwrap());
    }
}

#[test]
fn cone_of_a_chain_map_is_a_complex() {
    let mut r = rng(13);
    let s = Arc::new(GroupSpec::cyclic(5));
    for _ in 0..30 {
        let rc =
            RandomComplex::generate(&s, ComplexOptions { max_rank: 3, max_len: 3, acyclic: false }, &mut r).unwrap();
        let p = perturbed_equivalence(&rc, &mut r).unwrap();
        let cone = torsionkit::chains::mapping_cone(&p.pack.f);
        assert!(torsionkit::chains::validate_complex(&cone));
    }
}

#[test]
fn torsion_is_independent_of_the_contraction() {
    let mut r = rng(14);
    let specs =
        [Arc::new(GroupSpec::cyclic(5)), Arc::new(GroupSpec::z_times_cyclic(4)), Arc::new(GroupSpec::cyclic(8))];
    let mut distinct = 0;
    for i in 0..60 {
        let s = &specs[i % specs.len()];
        let rc = RandomComplex::generate(s, ComplexOptions { max_rank: 3, max_len: 4, acyclic: true }, &mut r).unwrap();
        let c1 = rc.contraction().unwrap();
        let c2 = second_contraction(&c1, &rc, &mut r).unwrap();
        if rc.complex.shape().ranks.iter().filter(|&&k| k > 0).count() >= 3 {
            distinct += usize::from(c1.delta != c2.delta);
        }
        let t1 = torsion_of_acyclic(&rc.complex, &c1).unwrap();
        let t2 = torsion_of_acyclic(&rc.complex, &c2).unwrap();
        assert_eq!(t1.det(), t2.det());
        assert_eq!(to_whitehead(&t1), to_whitehead(&t2));
    }
    assert!(distinct > 0);
}

#[test]
fn whitehead_class_ignores_trivial_units() {
    let mut r = rng(15);
    let s = Arc::new(GroupSpec::z_times_cyclic(5));
    let golden = torsionkit::groupring::RingElement::from_terms(
        &s,
        [(0, -1), (1, 1), (4, 1)].map(|(e, c)| (s.element(vec![0], vec![e]).unwrap(), c.into())),
    );
    let base = to_whitehead(&K1Class::new(golden.clone()).unwrap());
    for _ in 0..50 {
        let u = random_trivial_unit(&s, &mut r);
        let shifted = K1Class::new(&golden * &u).unwrap();
        assert_eq!(to_whitehead(&shifted), base);
    }
}

#[test]
fn gersten_torsion_is_multiplicative() {
    let mut r = rng(16);
    let specs = [Arc::new(GroupSpec::cyclic(5)), Arc::new(GroupSpec::z_times_cyclic(4))];
    for i in 0..30 {
        let s = &specs[i % 2];
        let acyclic = r.gen_bool(0.3);
        let rc = RandomComplex::generate(s, ComplexOptions { max_rank: 2, max_len: 3, acyclic }, &mut r).unwrap();
        let p = perturbed_equivalence(&rc, &mut r).unwrap().pack;
        let q = perturbed_equivalence(&rc, &mut r).unwrap().pack;
        let pq = p.compose(&q).unwrap();
        let lhs = gersten_torsion(&pq).unwrap();
        let rhs = gersten_torsion(&p).unwrap().mul(&gersten_torsion(&q).unwrap()).unwrap();
        assert_eq!(lhs.det(), rhs.det());
    }
}

#[test]
fn identity_has_unit_torsion() {
    let mut r = rng(17);
    let s = Arc::new(GroupSpec::z_times_cyclic(3));
    for _ in 0..40 {
        let rc =
            RandomComplex::generate(&s, ComplexOptions { max_rank: 4, max_len: 4, acyclic: false }, &mut r).unwrap();
        assert!(whitehead_torsion(&EquivalencePack::identity(&rc.complex)).unwrap().det().is_one());
    }
}

#[test]
fn swindle_on_random_pairs() {
    let mut r = rng(18);
    let specs =
        [Arc::new(GroupSpec::cyclic(5)), Arc::new(GroupSpec::cyclic(12)), Arc::new(GroupSpec::z_times_cyclic(4))];
    for i in 0..30 {
        let s = &specs[i % 3];
        let acyclic = r.gen_bool(0.3);
        let rc = RandomComplex::generate(s, ComplexOptions { max_rank: 3, max_len: 3, acyclic }, &mut r).unwrap();
        let pair = commuting_pair(&rc, &mut r).unwrap();
        let report = swindle_check(&rc.complex, &pair.f, &pair.g, &pair.comm).unwrap();
        assert!(report.class_det.is_one(), "swindle determinant {}", report.class_det);
    }
}

#[test]
fn torus_vanishing_on_random_instances() {
    let mut r = rng(19);
    for i in 0..15 {
        let n = [4u64, 5, 8][i % 3];
        let s = Arc::new(GroupSpec::cyclic(n));
        let acyclic = r.gen_bool(0.3);
        let rc = RandomComplex::generate(&s, ComplexOptions { max_rank: 2, max_len: 3, acyclic }, &mut r).unwrap();
        let pair = commuting_pair(&rc, &mut r).unwrap();
        let torus = TorusSpec::new(rc.complex.clone(), pair.f.clone()).unwrap();
        let report = torus_vanishing_check(&torus, &pair.g, &pair.comm).unwrap();
        assert!(report.trivial, "torus class {}", report.class_det);
    }
}
