//! Serde adapters that write rationals as canonical `"p/q"` strings.

pub mod rational {
    use num_rational::BigRational;
    use serde::Serializer;

    use crate::linalg::format_rational;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }
}

pub mod rational_vec {
    use num_rational::BigRational;
    use serde::{Serialize, Serializer};

    use crate::linalg::format_rational;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }
}

pub mod option_rational {
    use num_rational::BigRational;
    use serde::{Serialize, Serializer};

    use crate::linalg::format_rational;

    pub fn serialize<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        q.as_ref().map(format_rational).serialize(s)
    }
}
