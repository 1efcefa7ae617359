use torsionkit::whgroups::{aut_order_z_times_cyclic, bhs_is_infinite, nil_infinite, wh_rank_cyclic};

/// Real irreducible representations of Z/n are the orbits of its characters
/// `k in Z/n` under complex conjugation `k -> -k`; rational ones are the
/// Galois orbits `k -> a k`, `a` a unit. Their difference is the rank of Wh.
fn representation_count(n: u64) -> (u64, u64) {
    let mut seen = vec![false; n as usize];
    let mut real = 0;
    for k in 0..n {
        if !seen[k as usize] {
            real += 1;
            seen[k as usize] = true;
            seen[((n - k) % n) as usize] = true;
        }
    }
    let units: Vec<u64> = (1..=n).filter(|&a| (2..=n).all(|d| !(a.is_multiple_of(d) && n.is_multiple_of(d)))).collect();
    let mut seen = vec![false; n as usize];
    let mut rational = 0;
    for k in 0..n {
        if !seen[k as usize] {
            rational += 1;
            for &a in &units {
                seen[((a * k) % n) as usize] = true;
            }
        }
    }
    (real, rational)
}

fn has_square_factor(n: u64) -> bool {
    (2..=n).any(|p| n.is_multiple_of(p * p))
}

#[test]
fn rank_matches_representation_count() {
    for n in 1..=60u64 {
        let (real, rational) = representation_count(n);
        let divisors = (1..=n).filter(|&d| n.is_multiple_of(d)).count() as u64;
        assert_eq!(rational, divisors, "n = {n}");
        assert_eq!(wh_rank_cyclic(n as i64).unwrap(), real - rational, "n = {n}");
    }
}

#[test]
fn rank_vanishes_exactly_for_small_orders() {
    for n in 1..=60i64 {
        assert_eq!(wh_rank_cyclic(n).unwrap() > 0, ![1, 2, 3, 4, 6].contains(&n), "n = {n}");
    }
    assert!(wh_rank_cyclic(0).is_err());
}

#[test]
fn nil_matches_trial_division() {
    for n in 1..=10_000u64 {
        assert_eq!(nil_infinite(n), has_square_factor(n), "n = {n}");
    }
}

#[test]
fn wh_of_z_times_cyclic_is_infinite_except_four_orders() {
    for n in 1..=60i64 {
        assert_eq!(bhs_is_infinite(n).unwrap().total_infinite, ![1, 2, 3, 6].contains(&n), "n = {n}");
    }
}

#[test]
fn automorphism_count_by_enumeration() {
    // An endomorphism sends (1, 0) to (a, k) and (0, 1) to (0, u). It is
    // bijective iff x -> a x is onto Z and b -> u b is onto Z/n; the shear
    // k is free.
    for n in 1..=12u64 {
        let mut count = 0;
        for a in -3i64..=3 {
            let onto_free = (-3i64..=3).any(|x| a * x == 1);
            for _k in 0..n {
                for u in 0..n {
                    let image: std::collections::BTreeSet<u64> = (0..n).map(|b| (u * b) % n).collect();
                    if onto_free && image.len() as u64 == n {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(aut_order_z_times_cyclic(n), count, "n = {n}");
    }
}
