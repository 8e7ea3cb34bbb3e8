use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_dec;

/// A residue class `residue (mod modulus)` with `0 <= residue < modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Congruence {
    #[serde(with = "serde_dec")]
    residue: BigInt,
    #[serde(with = "serde_dec")]
    modulus: BigInt,
}

impl Congruence {
    /// Builds the class of `residue` modulo `modulus`, reducing the residue.
    pub fn new(residue: impl Into<BigInt>, modulus: impl Into<BigInt>) -> Result<Self> {
        let modulus = modulus.into();
        if !modulus.is_positive() {
            return Err(Error::invalid(format!(
                "congruence modulus must be positive, got {modulus}"
            )));
        }
        let residue = residue.into().mod_floor(&modulus);
        Ok(Congruence { residue, modulus })
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn is_satisfied_by(&self, x: &BigInt) -> bool {
        x.mod_floor(&self.modulus) == self.residue
    }
}

/// Ordered list of congruences to be solved simultaneously.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceSystem {
    congruences: Vec<Congruence>,
}

impl CongruenceSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, c: Congruence) {
        self.congruences.push(c);
    }

    /// Shorthand for `push(Congruence::new(residue, modulus)?)`.
    pub fn add(&mut self, residue: impl Into<BigInt>, modulus: impl Into<BigInt>) -> Result<()> {
        self.push(Congruence::new(residue, modulus)?);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.congruences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.congruences.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Congruence> {
        self.congruences.iter()
    }

    /// Index of the first congruence not satisfied by `x`.
    pub fn first_violation(&self, x: &BigInt) -> Option<usize> {
        self.congruences.iter().position(|c| !c.is_satisfied_by(x))
    }
}

impl FromIterator<Congruence> for CongruenceSystem {
    fn from_iter<I: IntoIterator<Item = Congruence>>(iter: I) -> Self {
        CongruenceSystem {
            congruences: iter.into_iter().collect(),
        }
    }
}

/// Chinese remainder solution of a system with pairwise coprime moduli.
///
/// Folds the congruences left to right; the result's residue lies in
/// `[0, M)` where `M` is the product of all moduli. The empty system solves
/// to `0 (mod 1)`.
pub fn crt_solve(system: &CongruenceSystem) -> Result<Congruence> {
    let mut x = BigInt::zero();
    let mut modulus = BigInt::one();
    for (idx, c) in system.congruences.iter().enumerate() {
        let m = &c.modulus;
        let big_mod_m = modulus.mod_floor(m);
        let eg = big_mod_m.extended_gcd(m);
        if !eg.gcd.is_one() {
            return Err(offending_pair(system, idx));
        }
        // modulus * inv ≡ 1 (mod m)
        let inv = eg.x.mod_floor(m);
        let diff = (&c.residue - x.mod_floor(m)).mod_floor(m);
        let t = (diff * inv).mod_floor(m);
        x += &modulus * t;
        modulus *= m;
    }
    Ok(Congruence {
        residue: x,
        modulus,
    })
}

fn offending_pair(system: &CongruenceSystem, idx: usize) -> Error {
    let m = &system.congruences[idx].modulus;
    let earlier = system.congruences[..idx]
        .iter()
        .position(|c| !c.modulus.gcd(m).is_one())
        .unwrap_or(idx);
    Error::NonCoprimeModuli {
        first_index: earlier,
        second_index: idx,
        first: system.congruences[earlier].modulus.clone(),
        second: m.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(pairs: &[(i64, i64)]) -> CongruenceSystem {
        pairs
            .iter()
            .map(|&(r, m)| Congruence::new(r, m).unwrap())
            .collect()
    }

    #[test]
    fn two_moduli() {
        let s = crt_solve(&sys(&[(1, 3), (2, 5)])).unwrap();
        // exhaustive scan of 0..15
        let expected = (0..15).find(|x| x % 3 == 1 && x % 5 == 2).unwrap();
        assert_eq!(s.residue(), &BigInt::from(expected));
        assert_eq!(s.modulus(), &BigInt::from(15));
    }

    #[test]
    fn single_and_empty() {
        let s = crt_solve(&sys(&[(0, 11)])).unwrap();
        assert_eq!(
            (s.residue().clone(), s.modulus().clone()),
            (0.into(), 11.into())
        );
        let e = crt_solve(&CongruenceSystem::new()).unwrap();
        assert_eq!(
            (e.residue().clone(), e.modulus().clone()),
            (0.into(), 1.into())
        );
    }

    #[test]
    fn residues_are_normalized() {
        let c = Congruence::new(-1, 7).unwrap();
        assert_eq!(c.residue(), &BigInt::from(6));
        assert!(Congruence::new(1, 0).is_err());
        assert!(Congruence::new(1, -4).is_err());
    }

    #[test]
    fn reports_offending_pair() {
        let err = crt_solve(&sys(&[(1, 3), (2, 5), (0, 7), (1, 35)])).unwrap_err();
        match err {
            Error::NonCoprimeModuli {
                first_index,
                second_index,
                ..
            } => assert_eq!((first_index, second_index), (1, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
