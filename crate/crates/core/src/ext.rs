//! JSON encoding for extended reals: finite values as numbers, infinities
//! as the strings `"inf"` / `"-inf"`, NaN as `null`.

use serde::Serializer;

pub fn real<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        ser.serialize_f64(*x)
    } else if x.is_nan() {
        ser.serialize_none()
    } else if *x > 0.0 {
        ser.serialize_str("inf")
    } else {
        ser.serialize_str("-inf")
    }
}

pub fn opt_real<S: Serializer>(x: &Option<f64>, ser: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => real(v, ser),
        None => ser.serialize_none(),
    }
}
