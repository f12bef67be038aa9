//! Serialization helpers and the report types shared by the CLI.

use serde::Serializer;

use crate::scalar::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

pub fn ser_scalar<S: Serializer>(value: &Scalar, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}

pub fn ser_scalars<S: Serializer>(values: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(values.iter().map(|v| v.to_string()))
}

pub fn ser_opt_scalar<S: Serializer>(value: &Option<Scalar>, s: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}
