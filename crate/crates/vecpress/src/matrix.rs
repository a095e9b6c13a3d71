//! In-memory containers for embedding data.
//!
//! An [`EmbeddingMatrix`] holds N row-major vectors of D 32-bit floats plus
//! one string id per row. A [`QuantizedMatrix`] holds the same shape with the
//! payload packed in one of the storage dtypes, plus the per-dimension
//! calibration sidecar when the dtype is `int8`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Storage element type for vector payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32,
    F16,
    Bf16,
    F8E4M3,
    F8E5M2,
    F4E2M1,
    Int8,
    Binary,
}

impl DType {
    /// Every supported dtype, in container-code order.
    pub const ALL: [DType; 8] = [
        DType::F32,
        DType::F16,
        DType::Bf16,
        DType::F8E4M3,
        DType::F8E5M2,
        DType::F4E2M1,
        DType::Int8,
        DType::Binary,
    ];

    /// Container dtype code (fixed; written to disk).
    pub fn code(self) -> u8 {
        match self {
            DType::F32 => 0,
            DType::F16 => 1,
            DType::Bf16 => 2,
            DType::F8E4M3 => 3,
            DType::F8E5M2 => 4,
            DType::F4E2M1 => 5,
            DType::Int8 => 6,
            DType::Binary => 7,
        }
    }

    /// Inverse of [`DType::code`].
    pub fn from_code(code: u8) -> Option<Self> {
        DType::ALL.get(code as usize).copied()
    }

    /// Bits consumed by one dimension of one vector.
    pub fn bits_per_dim(self) -> u32 {
        match self {
            DType::F32 => 32,
            DType::F16 | DType::Bf16 => 16,
            DType::F8E4M3 | DType::F8E5M2 | DType::Int8 => 8,
            DType::F4E2M1 => 4,
            DType::Binary => 1,
        }
    }

    /// Bytes consumed by one packed row of `dims` dimensions.
    ///
    /// Sub-byte dtypes pad each row up to a whole byte.
    pub fn bytes_per_row(self, dims: usize) -> usize {
        match self {
            DType::F32 => 4 * dims,
            DType::F16 | DType::Bf16 => 2 * dims,
            DType::F8E4M3 | DType::F8E5M2 | DType::Int8 => dims,
            DType::F4E2M1 => dims.div_ceil(2),
            DType::Binary => dims.div_ceil(8),
        }
    }

    /// True for the float family (everything that `cast_matrix` accepts).
    pub fn is_float(self) -> bool {
        matches!(
            self,
            DType::F32 | DType::F16 | DType::Bf16 | DType::F8E4M3 | DType::F8E5M2 | DType::F4E2M1
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            DType::F32 => "f32",
            DType::F16 => "f16",
            DType::Bf16 => "bf16",
            DType::F8E4M3 => "f8e4m3",
            DType::F8E5M2 => "f8e5m2",
            DType::F4E2M1 => "f4e2m1",
            DType::Int8 => "int8",
            DType::Binary => "binary",
        }
    }
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DType::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown dtype `{s}`")))
    }
}

/// Per-dimension (min, max) ranges backing int8 quantization.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    mins: Vec<f32>,
    maxs: Vec<f32>,
}

impl Calibration {
    /// Lower bound applied to each per-dimension scale so constant columns
    /// stay invertible.
    pub const MIN_SCALE: f32 = 1e-12;

    pub fn new(mins: Vec<f32>, maxs: Vec<f32>) -> Result<Self> {
        if mins.len() != maxs.len() {
            return Err(Error::validation(format!(
                "calibration min/max length mismatch: {} vs {}",
                mins.len(),
                maxs.len()
            )));
        }
        if mins.is_empty() {
            return Err(Error::validation("calibration must cover at least one dimension"));
        }
        for (d, (&lo, &hi)) in mins.iter().zip(&maxs).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::validation(format!(
                    "calibration for dimension {d} is not finite"
                )));
            }
            if lo > hi {
                return Err(Error::validation(format!(
                    "calibration for dimension {d} has min {lo} > max {hi}"
                )));
            }
        }
        Ok(Calibration { mins, maxs })
    }

    pub fn dims(&self) -> usize {
        self.mins.len()
    }

    pub fn min(&self, dim: usize) -> f32 {
        self.mins[dim]
    }

    pub fn max(&self, dim: usize) -> f32 {
        self.maxs[dim]
    }

    /// Quantization step for a dimension: `(max - min) / 255`, floored at
    /// [`Calibration::MIN_SCALE`].
    pub fn scale(&self, dim: usize) -> f32 {
        ((self.maxs[dim] - self.mins[dim]) / 255.0).max(Self::MIN_SCALE)
    }

    pub fn mins(&self) -> &[f32] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f32] {
        &self.maxs
    }
}

fn validate_ids(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if id.is_empty() {
            return Err(Error::validation("row ids must be non-empty"));
        }
        if id.contains('\n') || id.contains('\r') {
            return Err(Error::validation(format!(
                "row id {id:?} contains a line break"
            )));
        }
        if !seen.insert(id.as_str()) {
            return Err(Error::validation(format!("duplicate row id {id:?}")));
        }
    }
    Ok(())
}

/// N row-major vectors of D finite 32-bit floats, one unique id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    dims: usize,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(ids: Vec<String>, dims: usize, data: Vec<f32>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::validation("dims must be positive"));
        }
        if data.len() != ids.len() * dims {
            return Err(Error::validation(format!(
                "data length {} does not match {} rows x {} dims",
                data.len(),
                ids.len(),
                dims
            )));
        }
        validate_ids(&ids)?;
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite value at row {}, dimension {}",
                pos / dims,
                pos % dims
            )));
        }
        Ok(EmbeddingMatrix { ids, dims, data })
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.data[index * self.dims..(index + 1) * self.dims]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dims)
    }

    /// Consume the matrix, handing back its parts.
    pub fn into_parts(self) -> (Vec<String>, usize, Vec<f32>) {
        (self.ids, self.dims, self.data)
    }
}

/// Same shape as [`EmbeddingMatrix`] with the payload packed in `dtype`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMatrix {
    ids: Vec<String>,
    dims: usize,
    dtype: DType,
    payload: Vec<u8>,
    calibration: Option<Calibration>,
}

impl QuantizedMatrix {
    pub fn new(
        ids: Vec<String>,
        dims: usize,
        dtype: DType,
        payload: Vec<u8>,
        calibration: Option<Calibration>,
    ) -> Result<Self> {
        if dims == 0 {
            return Err(Error::validation("dims must be positive"));
        }
        validate_ids(&ids)?;
        let expected = ids.len() * dtype.bytes_per_row(dims);
        if payload.len() != expected {
            return Err(Error::validation(format!(
                "payload length {} does not match expected {} ({} rows x {} bytes/row, dtype {})",
                payload.len(),
                expected,
                ids.len(),
                dtype.bytes_per_row(dims),
                dtype
            )));
        }
        match (&calibration, dtype) {
            (Some(c), DType::Int8) => {
                if c.dims() != dims {
                    return Err(Error::DimensionMismatch {
                        expected: dims,
                        actual: c.dims(),
                    });
                }
            }
            (None, DType::Int8) => {
                return Err(Error::validation("int8 matrix requires a calibration sidecar"))
            }
            (Some(_), _) => {
                return Err(Error::validation(format!(
                    "calibration sidecar only applies to int8, not {dtype}"
                )))
            }
            (None, _) => {}
        }
        Ok(QuantizedMatrix {
            ids,
            dims,
            dtype,
            payload,
            calibration,
        })
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn calibration(&self) -> Option<&Calibration> {
        self.calibration.as_ref()
    }

    /// Packed bytes of one row.
    pub fn row_bytes(&self, index: usize) -> &[u8] {
        let stride = self.dtype.bytes_per_row(self.dims);
        &self.payload[index * stride..(index + 1) * stride]
    }

    pub fn into_parts(self) -> (Vec<String>, usize, DType, Vec<u8>, Option<Calibration>) {
        (self.ids, self.dims, self.dtype, self.payload, self.calibration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dtype_codes_round_trip() {
        for d in DType::ALL {
            assert_eq!(DType::from_code(d.code()), Some(d));
            assert_eq!(d.name().parse::<DType>().unwrap(), d);
        }
        assert!(DType::from_code(8).is_none());
        assert!("float99".parse::<DType>().is_err());
    }

    #[test]
    fn bytes_per_row_rounds_up_sub_byte_dtypes() {
        assert_eq!(DType::F32.bytes_per_row(3), 12);
        assert_eq!(DType::F16.bytes_per_row(3), 6);
        assert_eq!(DType::F8E4M3.bytes_per_row(3), 3);
        assert_eq!(DType::F4E2M1.bytes_per_row(3), 2);
        assert_eq!(DType::F4E2M1.bytes_per_row(4), 2);
        assert_eq!(DType::Binary.bytes_per_row(10), 2);
        assert_eq!(DType::Binary.bytes_per_row(8), 1);
    }

    #[test]
    fn matrix_rejects_bad_shapes_and_ids() {
        let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert!(EmbeddingMatrix::new(ids(&["a"]), 2, vec![1.0]).is_err());
        assert!(EmbeddingMatrix::new(ids(&["a", "a"]), 1, vec![1.0, 2.0]).is_err());
        assert!(EmbeddingMatrix::new(ids(&["a", "b"]), 1, vec![1.0, f32::NAN]).is_err());
        assert!(EmbeddingMatrix::new(ids(&["a\nb"]), 1, vec![1.0]).is_err());
        let m = EmbeddingMatrix::new(ids(&["a", "b"]), 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn quantized_requires_calibration_exactly_for_int8() {
        let ids = vec!["a".to_string()];
        let calib = Calibration::new(vec![0.0], vec![1.0]).unwrap();
        assert!(QuantizedMatrix::new(ids.clone(), 1, DType::Int8, vec![0], None).is_err());
        assert!(
            QuantizedMatrix::new(ids.clone(), 1, DType::F32, vec![0; 4], Some(calib.clone()))
                .is_err()
        );
        assert!(QuantizedMatrix::new(ids, 1, DType::Int8, vec![0], Some(calib)).is_ok());
    }

    #[test]
    fn calibration_scale_floor() {
        let c = Calibration::new(vec![2.0], vec![2.0]).unwrap();
        assert_eq!(c.scale(0), Calibration::MIN_SCALE);
        let c = Calibration::new(vec![0.0], vec![255.0]).unwrap();
        assert_eq!(c.scale(0), 1.0);
    }
}
