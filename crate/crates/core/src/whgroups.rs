//! Infinitude of Whitehead groups of `Z x Z/n` through the Bass-Heller-Swan
//! decomposition, and simple-structure verdicts for a few families of
//! nilpotent spaces with infinite fundamental group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupring::GroupSpec;

pub const CITE_BHS: &str =
    "Bass-Heller-Swan: Wh(Z x G) = Wh(G) x K~0(Z[G]) x Nil~1(Z[G]) x Nil~1(Z[G]) (Bass, Algebraic K-theory, Ch. XII)";
pub const CITE_MILNOR: &str =
    "Milnor, Whitehead torsion (1966), Cor. 6.5: Wh(Z/n) is free abelian of rank floor(n/2) + 1 - d(n), infinite iff n not in {1,2,3,4,6}";
pub const CITE_NIL: &str =
    "Nil~1(Z[Z/n]) is infinite iff nonzero iff n is not squarefree (Nagy-Nicholson-Powell, Thm. 5.8)";
pub const CITE_SWAN: &str = "Swan (1960), Prop. 9.1: K~0(Z[Z/n]) is finite";
pub const CITE_Q8_NIL: &str = "Nil~1(Z[Q8]) is infinite (Guaschi-Juan-Pineda-Millan-Lopez, Prop. 52)";
pub const CITE_STRUCTURES: &str =
    "Simple structures on X are the orbits of Wh1(X) under pi0 hAut_*(X) (Cockcroft-Moss); for a nilpotent X with \
     infinite pi1 the action factors through the finite group Aut(pi1), so infinite Wh1 gives infinitely many orbits";
pub const CITE_AUT_Z_CYCLIC: &str =
    "Aut(Z x Z/n) = {(a, b) -> (+-a, k a + u b) : k in Z/n, u in (Z/n)^x} has order 2 n phi(n)";
pub const CITE_Q8_AUT: &str = "Aut(Q8 x Z) is finite: Hom(Q8, Z) = 0 and Hom(Z, Z(Q8)) = Z/2 (fact table)";

/// Number of positive divisors.
fn divisor_count(n: u64) -> u64 {
    (1..=n).filter(|&d| n.is_multiple_of(d)).count() as u64
}

/// Rank of `Wh(Z/n)`: real minus rational irreducible representations,
/// `floor(n/2) + 1 - d(n)`.
pub fn wh_rank_cyclic(n: i64) -> Result<u64> {
    if n <= 0 {
        return Err(Error::Spec(format!("cyclic group order must be positive, got {n}")));
    }
    let n = n as u64;
    Ok(n / 2 + 1 - divisor_count(n))
}

/// `Nil~1(Z[Z/n])` is infinite iff `n` has a repeated prime factor.
pub fn nil_infinite(n: u64) -> bool {
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return true;
            }
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhReport {
    pub n: u64,
    pub wh_rank: u64,
    pub nil_infinite: bool,
    pub k0_finite: bool,
    pub total_infinite: bool,
    pub reasons: Vec<String>,
}

/// Decides whether `Wh(Z x Z/n)` is infinite.
pub fn bhs_is_infinite(n: i64) -> Result<WhReport> {
    let wh_rank = wh_rank_cyclic(n)?;
    let n = n as u64;
    let nil = nil_infinite(n);
    let mut reasons = vec![CITE_BHS.to_string(), CITE_SWAN.to_string()];
    if wh_rank > 0 {
        reasons.push(format!("Wh rank: Wh(Z/{n}) has rank {wh_rank} > 0. {CITE_MILNOR}"));
    } else {
        reasons.push(format!("Wh(Z/{n}) has rank 0. {CITE_MILNOR}"));
    }
    if nil {
        reasons.push(format!("Nil: {n} is not squarefree. {CITE_NIL}"));
    } else {
        reasons.push(format!("{n} is squarefree, so Nil~1(Z[Z/{n}]) = 0. {CITE_NIL}"));
    }
    Ok(WhReport { n, wh_rank, nil_infinite: nil, k0_finite: true, total_infinite: wh_rank > 0 || nil, reasons })
}

/// Order of `Aut(Z x Z/n)`.
pub fn aut_order_z_times_cyclic(n: u64) -> u64 {
    let units = (1..=n).filter(|&u| gcd(u, n) == 1).count() as u64;
    2 * n * units
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// `S^1 x L(p; q_1, ..., q_n)`, fundamental group `Z x Z/p`.
    LensTimesCircle { p: u64 },
    /// `S^1 x S^3/Q8`.
    Q8TimesCircle,
    /// `U(n)/<zeta>` for a primitive `n`-th root of unity, fundamental
    /// group `Z x Z/n`.
    ProjectiveUnitary { n: u64 },
    /// A space with abelian fundamental group described by `group`;
    /// nilpotence of the space is supplied by the caller.
    Custom { group: GroupSpecJson, nilpotent: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpecJson {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuresReport {
    pub infinitely_many: bool,
    pub verdict: String,
    pub pi1: String,
    pub wh_infinite: bool,
    pub pi1_infinite: bool,
    pub aut_pi1_finite: bool,
    pub aut_pi1_order: Option<u64>,
    pub nilpotent: bool,
    pub failing_hypothesis: Option<String>,
    pub reasons: Vec<String>,
}

pub const VERDICT_INFINITE: &str = "infinitely many simple structures";
pub const VERDICT_FAILS: &str = "criterion not satisfied";

struct Hypotheses {
    pi1: String,
    wh_infinite: bool,
    pi1_infinite: bool,
    aut_finite: bool,
    aut_order: Option<u64>,
    nilpotent: bool,
    reasons: Vec<String>,
}

fn z_times_cyclic_hypotheses(n: u64, nilpotent: bool, nilpotent_reason: &str) -> Result<Hypotheses> {
    let wh = bhs_is_infinite(n as i64)?;
    let mut reasons = wh.reasons.clone();
    reasons.push(CITE_AUT_Z_CYCLIC.to_string());
    reasons.push(nilpotent_reason.to_string());
    Ok(Hypotheses {
        pi1: if n == 1 { "Z".into() } else { format!("Z x Z/{n}") },
        wh_infinite: wh.total_infinite,
        pi1_infinite: true,
        aut_finite: true,
        aut_order: Some(aut_order_z_times_cyclic(n)),
        nilpotent,
        reasons,
    })
}

/// Checks the three hypotheses of the simple-structure criterion (infinite
/// `Wh_1`, infinite `pi_1` with finitely many automorphisms, nilpotence) and
/// returns the verdict with its reasoning.
pub fn structures_verdict(s: &SpaceSpec) -> Result<StructuresReport> {
    let hyp = match s {
        SpaceSpec::LensTimesCircle { p } => {
            if *p == 0 {
                return Err(Error::Spec("lens space order must be positive".into()));
            }
            z_times_cyclic_hypotheses(
                *p,
                true,
                "S^1 x L is nilpotent: abelian pi1 acting trivially on the homotopy of the universal cover",
            )?
        }
        SpaceSpec::ProjectiveUnitary { n } => {
            if *n == 0 {
                return Err(Error::Spec("root of unity order must be positive".into()));
            }
            z_times_cyclic_hypotheses(*n, true, "U(n)/<zeta> is nilpotent: it is a connected Lie group")?
        }
        SpaceSpec::Q8TimesCircle => Hypotheses {
            pi1: "Z x Q8".into(),
            wh_infinite: true,
            pi1_infinite: true,
            aut_finite: true,
            aut_order: None,
            nilpotent: true,
            reasons: vec![
                CITE_BHS.to_string(),
                CITE_Q8_NIL.to_string(),
                CITE_Q8_AUT.to_string(),
                "S^1 x S^3/Q8 is nilpotent: Q8 is nilpotent and acts trivially on the homotopy of S^3".into(),
            ],
        },
        SpaceSpec::Custom { group, nilpotent } => {
            let spec = GroupSpec::new(group.free_rank, group.torsion.clone())?;
            match (spec.free_rank, spec.torsion.as_slice()) {
                (1, []) => z_times_cyclic_hypotheses(1, *nilpotent, "nilpotence supplied by the caller")?,
                (1, [n]) => z_times_cyclic_hypotheses(*n, *nilpotent, "nilpotence supplied by the caller")?,
                (0, _) => Hypotheses {
                    pi1: spec.to_string(),
                    wh_infinite: false,
                    pi1_infinite: false,
                    aut_finite: true,
                    aut_order: None,
                    nilpotent: *nilpotent,
                    reasons: vec!["finite fundamental group".into()],
                },
                _ => {
                    return Err(Error::Unsupported(format!("no Whitehead-group or automorphism data for pi1 = {spec}")))
                }
            }
        }
    };
    let failing = if !hyp.wh_infinite {
        Some("Wh1 is finite")
    } else if !hyp.pi1_infinite {
        Some("pi1 is finite")
    } else if !hyp.aut_finite {
        Some("Aut(pi1) is infinite")
    } else if !hyp.nilpotent {
        Some("space is not nilpotent")
    } else {
        None
    };
    let mut reasons = hyp.reasons;
    reasons.push(CITE_STRUCTURES.to_string());
    Ok(StructuresReport {
        infinitely_many: failing.is_none(),
        verdict: if failing.is_none() { VERDICT_INFINITE.into() } else { VERDICT_FAILS.into() },
        pi1: hyp.pi1,
        wh_infinite: hyp.wh_infinite,
        pi1_infinite: hyp.pi1_infinite,
        aut_pi1_finite: hyp.aut_finite,
        aut_pi1_order: hyp.aut_order,
        nilpotent: hyp.nilpotent,
        failing_hypothesis: failing.map(str::to_string),
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(wh_rank_cyclic(1).unwrap(), 0);
        assert_eq!(wh_rank_cyclic(6).unwrap(), 0);
        assert_eq!(wh_rank_cyclic(5).unwrap(), 1);
        assert_eq!(wh_rank_cyclic(9).unwrap(), 2);
        assert!(wh_rank_cyclic(0).is_err());
        assert!(wh_rank_cyclic(-3).is_err());
    }

    #[test]
    fn nil_examples() {
        assert!(nil_infinite(4));
        assert!(!nil_infinite(6));
        assert!(nil_infinite(12));
        assert!(!nil_infinite(1));
        assert!(nil_infinite(9));
    }

    #[test]
    fn bhs_examples() {
        assert!(!bhs_is_infinite(6).unwrap().total_infinite);
        let r4 = bhs_is_infinite(4).unwrap();
        assert!(r4.total_infinite && r4.nil_infinite && r4.wh_rank == 0);
        assert!(r4.reasons.iter().any(|r| r.starts_with("Nil:")));
        let r5 = bhs_is_infinite(5).unwrap();
        assert!(r5.total_infinite && !r5.nil_infinite);
        assert!(r5.reasons.iter().any(|r| r.starts_with("Wh rank:")));
    }

    #[test]
    fn aut_orders() {
        // Aut(Z) = {+-1}
        assert_eq!(aut_order_z_times_cyclic(1), 2);
        assert_eq!(aut_order_z_times_cyclic(5), 40);
    }

    #[test]
    fn structure_examples() {
        assert!(structures_verdict(&SpaceSpec::LensTimesCircle { p: 5 }).unwrap().infinitely_many);
        let three = structures_verdict(&SpaceSpec::LensTimesCircle { p: 3 }).unwrap();
        assert!(!three.infinitely_many);
        assert_eq!(three.failing_hypothesis.as_deref(), Some("Wh1 is finite"));
        assert!(structures_verdict(&SpaceSpec::Q8TimesCircle).unwrap().infinitely_many);
        assert!(structures_verdict(&SpaceSpec::ProjectiveUnitary { n: 12 }).unwrap().infinitely_many);
        let odd = SpaceSpec::Custom { group: GroupSpecJson { free_rank: 2, torsion: vec![3] }, nilpotent: true };
        assert!(matches!(structures_verdict(&odd), Err(Error::Unsupported(_))));
        let not_nil = SpaceSpec::Custom { group: GroupSpecJson { free_rank: 1, torsion: vec![5] }, nilpotent: false };
        let r = structures_verdict(&not_nil).unwrap();
        assert_eq!(r.failing_hypothesis.as_deref(), Some("space is not nilpotent"));
    }
}
