use std::fmt;

use crate::error::{Error, Result};

/// Per-mode photon counts. Doubles as a data bitstring when every count is 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(Vec<u8>);

impl OccupationVector {
    pub fn new(counts: Vec<u8>) -> Self {
        OccupationVector(counts)
    }

    /// Vector of length `m` with a single photon in each listed mode.
    pub fn from_positions(m: usize, positions: &[usize]) -> Result<Self> {
        let mut counts = vec![0u8; m];
        for &p in positions {
            if p >= m {
                return Err(Error::InvalidArgument(format!("mode {p} out of range for m = {m}")));
            }
            counts[p] += 1;
        }
        Ok(OccupationVector(counts))
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn is_collision_free(&self) -> bool {
        self.0.iter().all(|&c| c <= 1)
    }

    /// ∏ sᵢ!
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&c| factorial(c as usize)).product()
    }

    /// Mode indices, each repeated by its occupation, in ascending order.
    pub fn occupied_modes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total());
        for (i, &c) in self.0.iter().enumerate() {
            for _ in 0..c {
                out.push(i);
            }
        }
        out
    }

    /// Parity of x·k for a 0/1 mask, returned as ±1.
    pub fn mask_sign(&self, mask: &[bool]) -> f64 {
        let dot: usize = self
            .0
            .iter()
            .zip(mask)
            .filter(|(_, &k)| k)
            .map(|(&c, _)| c as usize)
            .sum();
        if dot.is_multiple_of(2) { 1.0 } else { -1.0 }
    }

    /// Digit-string form, one character per mode.
    pub fn to_digits(&self) -> Result<String> {
        self.0
            .iter()
            .map(|&c| {
                char::from_digit(c as u32, 10)
                    .ok_or_else(|| Error::InvalidArgument(format!("count {c} has no single-digit form")))
            })
            .collect()
    }

    pub fn from_digits(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidArgument(format!("'{ch}' is not a digit")))
            })
            .collect::<Result<Vec<_>>>()
            .map(OccupationVector)
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Size of Φ_{m,n}, or of its collision-free part.
pub fn fock_space_size(m: usize, n: usize, collision_free: bool) -> usize {
    if collision_free {
        binomial(m, n)
    } else if m == 0 {
        usize::from(n == 0)
    } else {
        binomial(m + n - 1, n)
    }
}

/// All occupation vectors of length `m` with total `n`, in descending
/// lexicographic order (`(n,0,…)` first).
pub fn enumerate_fock_space(m: usize, n: usize, collision_free: bool) -> Vec<OccupationVector> {
    let mut out = Vec::with_capacity(fock_space_size(m, n, collision_free));
    if m == 0 {
        return out;
    }
    let cap = if collision_free { 1 } else { n };
    let mut cur = vec![0u8; m];
    fill(&mut cur, 0, n, cap, &mut out);
    out
}

fn fill(cur: &mut [u8], mode: usize, remaining: usize, cap: usize, out: &mut Vec<OccupationVector>) {
    let m = cur.len();
    if mode == m - 1 {
        if remaining <= cap {
            cur[mode] = remaining as u8;
            out.push(OccupationVector(cur.to_vec()));
            cur[mode] = 0;
        }
        return;
    }
    for c in (0..=remaining.min(cap)).rev() {
        // the remaining modes must be able to absorb the rest
        if remaining - c > cap * (m - mode - 1) {
            continue;
        }
        cur[mode] = c as u8;
        fill(cur, mode + 1, remaining - c, cap, out);
    }
    cur[mode] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_modes_two_photons() {
        let s = enumerate_fock_space(2, 2, false);
        let got: Vec<String> = s.iter().map(|v| v.to_string()).collect();
        assert_eq!(got, ["20", "11", "02"]);
    }

    #[test]
    fn sizes_match_closed_forms() {
        // stars and bars: C(5,2) = 10
        assert_eq!(enumerate_fock_space(4, 2, false).len(), 10);
        assert_eq!(enumerate_fock_space(4, 2, true).len(), 6);
        for m in 1..7 {
            for n in 0..5 {
                assert_eq!(enumerate_fock_space(m, n, false).len(), fock_space_size(m, n, false));
                assert_eq!(enumerate_fock_space(m, n, true).len(), fock_space_size(m, n, true));
            }
        }
    }

    #[test]
    fn enumeration_is_sorted_and_conserves_photons() {
        let s = enumerate_fock_space(5, 3, false);
        assert!(s.windows(2).all(|w| w[0] > w[1]));
        assert!(s.iter().all(|v| v.total() == 3 && v.modes() == 5));
        assert!(enumerate_fock_space(5, 3, true).iter().all(|v| v.is_collision_free()));
    }

    #[test]
    fn zero_photons_is_the_vacuum() {
        assert_eq!(enumerate_fock_space(3, 0, false), vec![OccupationVector::new(vec![0, 0, 0])]);
    }

    #[test]
    fn digits_round_trip() {
        let v = OccupationVector::new(vec![0, 2, 1]);
        assert_eq!(OccupationVector::from_digits(&v.to_digits().unwrap()).unwrap(), v);
        assert!(OccupationVector::new(vec![12]).to_digits().is_err());
    }

    #[test]
    fn mask_sign_is_parity_of_overlap() {
        let v = OccupationVector::new(vec![1, 2, 1, 0]);
        assert_eq!(v.mask_sign(&[true, false, false, false]), -1.0);
        assert_eq!(v.mask_sign(&[false, true, false, false]), 1.0);
        assert_eq!(v.mask_sign(&[true, true, true, true]), 1.0);
    }
}
