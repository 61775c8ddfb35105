use std::fmt;

use crate::error::{Error, Result};

/// A total Boolean assignment, indexed by dense variable index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn zeros(len: usize) -> Self {
        Assignment(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Assignment(vec![true; len])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }

    /// Bit `i` of `mask` becomes variable `i`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        debug_assert!(len <= 64);
        Assignment((0..len).map(|i| mask >> i & 1 == 1).collect())
    }

    /// Parses a string of `0`/`1` characters in dense index order.
    pub fn parse_dense(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidAssignment(format!(
                    "unexpected character {other:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    /// Returns a copy differing from `self` exactly at `i`.
    pub fn flipped(&self, i: usize) -> Result<Self> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                num_vars: self.len(),
            });
        }
        let mut y = self.clone();
        y.0[i] = !y.0[i];
        Ok(y)
    }

    pub fn flip_in_place(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn with(&self, i: usize, value: bool) -> Self {
        let mut y = self.clone();
        y.0[i] = value;
        y
    }

    pub fn hamming(&self, other: &Assignment) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Packs into a bit mask; `None` when longer than 64 variables.
    pub fn to_mask(&self) -> Option<u64> {
        if self.len() > 64 {
            return None;
        }
        Some(
            self.0
                .iter()
                .enumerate()
                .fold(0u64, |m, (i, &b)| if b { m | 1 << i } else { m }),
        )
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_examples() {
        let x = Assignment::zeros(6);
        assert_eq!(x.flipped(0).unwrap().to_string(), "100000");
        let y = Assignment::ones(6);
        assert_eq!(y.flipped(5).unwrap().to_string(), "111110");
        assert!(matches!(
            x.flipped(6),
            Err(Error::IndexOutOfRange { index: 6, .. })
        ));
    }

    #[test]
    fn flip_is_an_involution() {
        let x = Assignment::parse_dense("1011001").unwrap();
        for i in 0..x.len() {
            assert_eq!(x.flipped(i).unwrap().flipped(i).unwrap(), x);
        }
    }

    #[test]
    fn mask_round_trip() {
        let x = Assignment::parse_dense("0110001").unwrap();
        let m = x.to_mask().unwrap();
        assert_eq!(m, 0b1000110);
        assert_eq!(Assignment::from_mask(m, 7), x);
    }

    #[test]
    fn parse_rejects_junk() {
        assert!(Assignment::parse_dense("01x").is_err());
    }
}
