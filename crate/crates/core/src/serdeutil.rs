//! Serde helpers for complex values in JSON reports.

use num_complex::Complex64;
use serde::ser::{SerializeSeq, SerializeStruct, Serializer};

pub fn cpx<S: Serializer>(v: &Complex64, ser: S) -> Result<S::Ok, S::Error> {
    let mut s = ser.serialize_struct("Complex", 2)?;
    s.serialize_field("re", &v.re)?;
    s.serialize_field("im", &v.im)?;
    s.end()
}

pub fn cpx_vec<S: Serializer>(v: &[Complex64], ser: S) -> Result<S::Ok, S::Error> {
    struct One(Complex64);
    impl serde::Serialize for One {
        fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
            cpx(&self.0, ser)
        }
    }
    let mut seq = ser.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&One(*x))?;
    }
    seq.end()
}

/// Serialize a frequency that may be the +infinity sentinel as null.
pub fn freq_or_unbounded<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        ser.serialize_some(v)
    } else {
        ser.serialize_none()
    }
}
