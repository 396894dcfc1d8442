use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FeatError {
    #[error("fingerprint shapes differ: width {0}/radius {1} vs width {2}/radius {3}")]
    WidthMismatch(usize, u32, usize, u32),
    #[error("width {0} must be a power of two and at least 64")]
    InvalidWidth(usize),
    #[error("malformed hex fingerprint")]
    BadHex,
}

/// Fixed-width bit vector with a cached popcount.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    words: Vec<u64>,
    width: usize,
    radius: u32,
    popcount: u32,
}

impl Fingerprint {
    pub fn empty(width: usize, radius: u32) -> Result<Self, FeatError> {
        if width < 64 || !width.is_power_of_two() {
            return Err(FeatError::InvalidWidth(width));
        }
        Ok(Self {
            words: vec![0; width / 64],
            width,
            radius,
            popcount: 0,
        })
    }

    pub fn from_bits(width: usize, radius: u32, bits: impl IntoIterator<Item = usize>) -> Result<Self, FeatError> {
        let mut fp = Self::empty(width, radius)?;
        for b in bits {
            fp.set(b % width);
        }
        Ok(fp)
    }

    pub fn set(&mut self, bit: usize) {
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        if self.words[w] & m == 0 {
            self.words[w] |= m;
            self.popcount += 1;
        }
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn popcount(&self) -> u32 {
        self.popcount
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&b| self.get(b))
    }

    /// `width / 4` hex digits, most significant bit first.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        let mut out = String::with_capacity(self.width / 4);
        for nibble in (0..self.width / 4).rev() {
            let word = self.words[nibble / 16];
            let v = (word >> ((nibble % 16) * 4)) & 0xf;
            out.push(DIGITS[v as usize] as char);
        }
        out
    }

    pub fn from_hex(hex: &str, radius: u32) -> Result<Self, FeatError> {
        let width = hex.len() * 4;
        let mut fp = Self::empty(width, radius)?;
        for (pos, c) in hex.chars().enumerate() {
            let v = c.to_digit(16).ok_or(FeatError::BadHex)? as u64;
            let nibble = width / 4 - 1 - pos;
            for bit in 0..4 {
                if v >> bit & 1 == 1 {
                    fp.set(nibble * 4 + bit);
                }
            }
        }
        Ok(fp)
    }

    fn check_shape(&self, other: &Self) -> Result<(), FeatError> {
        if self.width != other.width || self.radius != other.radius {
            return Err(FeatError::WidthMismatch(
                self.width,
                self.radius,
                other.width,
                other.radius,
            ));
        }
        Ok(())
    }
}

/// |a ∧ b| / |a ∨ b|, defined as 1 when both are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FeatError> {
    a.check_shape(b)?;
    let mut inter = 0u32;
    let mut union = 0u32;
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(f64::from(inter) / f64::from(union))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(bits: &[usize]) -> Fingerprint {
        Fingerprint::from_bits(64, 2, bits.iter().copied()).unwrap()
    }

    #[test]
    fn identical_disjoint_and_half() {
        assert_eq!(tanimoto(&fp(&[1, 5]), &fp(&[1, 5])).unwrap(), 1.0);
        assert_eq!(tanimoto(&fp(&[1, 5]), &fp(&[2, 6])).unwrap(), 0.0);
        assert_eq!(tanimoto(&fp(&[1, 2, 3]), &fp(&[2, 3, 4])).unwrap(), 0.5);
        assert_eq!(tanimoto(&fp(&[]), &fp(&[])).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let a = fp(&[1]);
        let b = Fingerprint::from_bits(128, 2, [1]).unwrap();
        assert!(matches!(tanimoto(&a, &b), Err(FeatError::WidthMismatch(64, 2, 128, 2))));
        let c = Fingerprint::from_bits(64, 1, [1]).unwrap();
        assert!(tanimoto(&a, &c).is_err());
    }

    #[test]
    fn width_validation() {
        assert_eq!(Fingerprint::empty(32, 2).unwrap_err(), FeatError::InvalidWidth(32));
        assert_eq!(Fingerprint::empty(100, 2).unwrap_err(), FeatError::InvalidWidth(100));
    }

    #[test]
    fn hex_is_msb_first() {
        let f = fp(&[0, 63]);
        let h = f.to_hex();
        assert_eq!(h.len(), 16);
        assert_eq!(&h[..1], "8");
        assert_eq!(&h[15..], "1");
        assert_eq!(Fingerprint::from_hex(&h, 2).unwrap(), f);
    }

    #[test]
    fn popcount_tracks_sets() {
        let mut f = fp(&[3, 3, 9]);
        assert_eq!(f.popcount(), 2);
        f.set(9);
        assert_eq!(f.popcount(), 2);
        assert_eq!(f.ones().collect::<Vec<_>>(), vec![3, 9]);
    }
}
