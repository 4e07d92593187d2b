use std::fmt;

/// Step bound `a·n^k + b`, or no bound at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Budget {
    Unbounded,
    Poly { a: u64, k: u32, b: u64 },
}

impl Budget {
    pub fn poly(a: u64, k: u32, b: u64) -> Budget {
        Budget::Poly { a, k, b }
    }

    /// Step limit at security parameter `n`, `None` when unbounded.
    pub fn limit(&self, n: u32) -> Option<u64> {
        match *self {
            Budget::Unbounded => None,
            Budget::Poly { a, k, b } => Some(
                a.saturating_mul((n as u64).saturating_pow(k))
                    .saturating_add(b),
            ),
        }
    }

    pub fn allows(&self, n: u32, steps: u64) -> bool {
        self.limit(n).is_none_or(|l| steps <= l)
    }

    /// Parses `none` or `a,k,b`.
    pub fn parse(s: &str) -> Option<Budget> {
        let s = s.trim();
        if s == "none" || s == "unbounded" {
            return Some(Budget::Unbounded);
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [a, k, b] => Some(Budget::poly(
                a.parse().ok()?,
                k.parse().ok()?,
                b.parse().ok()?,
            )),
            _ => None,
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Unbounded => f.write_str("none"),
            Budget::Poly { a, k, b } => write!(f, "{a},{k},{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        let b = Budget::poly(3, 2, 5);
        assert_eq!(b.limit(2), Some(17));
        assert!(b.allows(2, 17) && !b.allows(2, 18));
        assert!(Budget::Unbounded.allows(9, u64::MAX));
        assert_eq!(Budget::parse("3,2,5"), Some(b));
        assert_eq!(Budget::parse("none"), Some(Budget::Unbounded));
        assert_eq!(b.to_string(), "3,2,5");
    }
}
