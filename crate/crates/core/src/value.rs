use serde::{Serialize, Serializer};

/// A real number or the `+∞` sentinel.
///
/// Divergences and exponents are infinite on whole parameter ranges (disjoint
/// supports, rates at or below `R_inf`); carrying that as a variant keeps those
/// branches exact instead of letting `inf`/`NaN` leak through arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    /// Lossy conversion, mapping the sentinel to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn expect_finite(&self, what: &str) -> f64 {
        self.finite().unwrap_or_else(|| panic!("{what} is +inf"))
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::Infinite => s.serialize_str("inf"),
        }
    }
}
