//! Fixed-width bitstrings and symbolic widths.

use std::fmt;

/// Widest bitstring the interpreter can hold.
pub const MAX_WIDTH: u32 = 64;

/// A bitstring of a declared width, most significant bit first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    value: u64,
    width: u32,
}

impl Bits {
    /// Builds a bitstring, masking `value` to `width` bits.
    pub fn new(value: u64, width: u32) -> Self {
        assert!(width <= MAX_WIDTH, "bit width {width} exceeds {MAX_WIDTH}");
        Bits {
            value: value & mask(width),
            width,
        }
    }

    pub fn zero(width: u32) -> Self {
        Bits::new(0, width)
    }

    pub fn bit(b: bool) -> Self {
        Bits::new(b as u64, 1)
    }

    pub fn empty() -> Self {
        Bits { value: 0, width: 0 }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// True iff this is the one-bit string `1`.
    pub fn is_true(&self) -> bool {
        self.width == 1 && self.value == 1
    }

    pub fn xor(&self, other: &Bits) -> Option<Bits> {
        (self.width == other.width).then(|| Bits::new(self.value ^ other.value, self.width))
    }

    pub fn concat(&self, other: &Bits) -> Option<Bits> {
        let width = self.width + other.width;
        if width > MAX_WIDTH {
            return None;
        }
        let hi = if other.width == 64 {
            0
        } else {
            self.value << other.width
        };
        Some(Bits::new(hi | other.value, width))
    }

    /// Keeps the leading `width` bits.
    pub fn truncate(&self, width: u32) -> Option<Bits> {
        (width <= self.width).then(|| Bits::new(self.value >> (self.width - width), width))
    }

    /// Bits `[start, start + len)` counted from the most significant end.
    pub fn slice(&self, start: u32, len: u32) -> Option<Bits> {
        if start + len > self.width {
            return None;
        }
        let shifted = self.value >> (self.width - start - len);
        Some(Bits::new(shifted, len))
    }

    /// Increment modulo `modulus`; the width is preserved.
    pub fn increment_mod(&self, modulus: u64) -> Bits {
        let m = modulus.max(1);
        Bits::new((self.value % m + 1) % m, self.width)
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_binary(s: &str) -> Option<Bits> {
        if s.len() > MAX_WIDTH as usize || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return None;
        }
        let value = s
            .bytes()
            .fold(0u64, |acc, b| (acc << 1) | (b - b'0') as u64);
        Some(Bits::new(value, s.len() as u32))
    }

    /// All bitstrings of the given width in ascending order.
    pub fn all(width: u32) -> impl Iterator<Item = Bits> {
        assert!(width < MAX_WIDTH);
        (0..(1u64 << width)).map(move |v| Bits::new(v, width))
    }
}

fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.width).rev() {
            f.write_str(if (self.value >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0b{self}")
    }
}

/// A width written as `coeff·n + offset`, resolved per security parameter.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Width {
    pub coeff: u32,
    pub offset: u32,
}

impl Width {
    pub const fn fixed(offset: u32) -> Self {
        Width { coeff: 0, offset }
    }

    pub const fn linear(coeff: u32, offset: u32) -> Self {
        Width { coeff, offset }
    }

    pub fn at(&self, n: u32) -> u32 {
        self.coeff * n + self.offset
    }

    pub fn is_fixed(&self) -> bool {
        self.coeff == 0
    }

    pub fn add(&self, other: &Width) -> Width {
        Width {
            coeff: self.coeff + other.coeff,
            offset: self.offset + other.offset,
        }
    }

    pub fn scale(&self, k: u32) -> Width {
        Width {
            coeff: self.coeff * k,
            offset: self.offset * k,
        }
    }

    /// `self <= other` for every n >= 1.
    pub fn le_everywhere(&self, other: &Width) -> bool {
        self.coeff <= other.coeff && self.at(1) <= other.at(1)
    }

    /// Positive for every n >= 1.
    pub fn is_positive(&self) -> bool {
        self.at(1) > 0
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.coeff, self.offset) {
            (0, d) => write!(f, "{d}"),
            (1, 0) => f.write_str("n"),
            (c, 0) => write!(f, "{c}n"),
            (1, d) => write!(f, "n+{d}"),
            (c, d) => write!(f, "{c}n+{d}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_and_truncate() {
        let a = Bits::parse_binary("10").unwrap();
        let b = Bits::parse_binary("011").unwrap();
        let c = a.concat(&b).unwrap();
        assert_eq!(c.to_string(), "10011");
        assert_eq!(c.truncate(2).unwrap(), a);
        assert_eq!(c.slice(2, 3).unwrap(), b);
        assert!(c.truncate(6).is_none());
    }

    #[test]
    fn xor_requires_equal_width() {
        let a = Bits::new(0b10, 2);
        assert_eq!(a.xor(&Bits::new(0b11, 2)).unwrap(), Bits::new(0b01, 2));
        assert!(a.xor(&Bits::new(1, 1)).is_none());
    }

    #[test]
    fn increment_wraps() {
        let c = Bits::new(1, 1);
        assert_eq!(c.increment_mod(2), Bits::new(0, 1));
        assert_eq!(Bits::new(2, 2).increment_mod(3), Bits::new(0, 2));
    }

    #[test]
    fn width_display_and_order() {
        assert_eq!(Width::linear(4, 0).to_string(), "4n");
        assert_eq!(Width::linear(1, 2).to_string(), "n+2");
        assert!(Width::fixed(1).le_everywhere(&Width::linear(1, 0)));
        assert!(!Width::fixed(2).le_everywhere(&Width::linear(1, 0)));
    }
}
