//! JSON file formats.
//!
//! * tensor: `{"shape": [M1, .., MO], "layout": "colex", "data": [..]}`
//! * CP: `{"weights": [..], "factors": [matrix, ..]}`
//! * Tucker: `{"core": tensor, "factors": [matrix, ..]}`
//!
//! Matrices are arrays of rows. Eigenpairs and singular tuples serialize
//! directly from [`EigenPair`] and [`SingularTuple`].

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::decomp::{CpDecomposition, TuckerDecomposition};
use crate::error::{Result, TensorError};
use crate::shape::Shape;
use crate::spectra::{EigenPair, EigenSearch, SingularSearch, SingularTuple};
use crate::tensor::{DenseTensor, Matrix};

pub const LAYOUT: &str = "colex";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub shape: Shape,
    pub layout: String,
    pub data: Vec<f64>,
}

impl From<&DenseTensor> for TensorFile {
    fn from(t: &DenseTensor) -> Self {
        TensorFile {
            shape: t.shape().clone(),
            layout: LAYOUT.to_string(),
            data: t.data().to_vec(),
        }
    }
}

impl TryFrom<TensorFile> for DenseTensor {
    type Error = TensorError;

    fn try_from(f: TensorFile) -> Result<Self> {
        if f.layout != LAYOUT {
            return Err(TensorError::Format(format!("unknown layout {:?}", f.layout)));
        }
        if f.data.len() != f.shape.cardinality() {
            return Err(TensorError::Format(format!(
                "shape {:?} needs {} entries, found {}",
                f.shape.dims(),
                f.shape.cardinality(),
                f.data.len()
            )));
        }
        DenseTensor::new(f.shape, f.data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpFile {
    pub weights: Vec<f64>,
    pub factors: Vec<Vec<Vec<f64>>>,
}

impl From<&CpDecomposition> for CpFile {
    fn from(cp: &CpDecomposition) -> Self {
        CpFile {
            weights: cp.weights().to_vec(),
            factors: cp.factors().iter().map(Matrix::to_rows).collect(),
        }
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Matrix> {
    if rows.iter().all(Vec::is_empty) && cols == 0 {
        return Matrix::zeros(rows.len(), 0);
    }
    let m = Matrix::from_rows(rows)?;
    if m.data().iter().any(|v| !v.is_finite()) {
        return Err(TensorError::Format("non-finite matrix entry".into()));
    }
    Ok(m)
}

impl TryFrom<CpFile> for CpDecomposition {
    type Error = TensorError;

    fn try_from(f: CpFile) -> Result<Self> {
        let r = f.weights.len();
        let factors = f
            .factors
            .iter()
            .map(|rows| matrix_from_rows(rows, r))
            .collect::<Result<Vec<_>>>()?;
        CpDecomposition::new(f.weights, factors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuckerFile {
    pub core: TensorFile,
    pub factors: Vec<Vec<Vec<f64>>>,
}

impl From<&TuckerDecomposition> for TuckerFile {
    fn from(tk: &TuckerDecomposition) -> Self {
        TuckerFile {
            core: tk.core().into(),
            factors: tk.factors().iter().map(Matrix::to_rows).collect(),
        }
    }
}

impl TryFrom<TuckerFile> for TuckerDecomposition {
    type Error = TensorError;

    fn try_from(f: TuckerFile) -> Result<Self> {
        let core = DenseTensor::try_from(f.core)?;
        let factors = f
            .factors
            .iter()
            .map(|rows| Matrix::from_rows(rows))
            .collect::<Result<Vec<_>>>()?;
        TuckerDecomposition::new(core, factors)
    }
}

pub fn tensor_to_json(t: &DenseTensor) -> Result<String> {
    Ok(serde_json::to_string(&TensorFile::from(t))?)
}

pub fn tensor_from_json(s: &str) -> Result<DenseTensor> {
    serde_json::from_str::<TensorFile>(s)?.try_into()
}

pub fn cp_to_json(cp: &CpDecomposition) -> Result<String> {
    Ok(serde_json::to_string(&CpFile::from(cp))?)
}

pub fn cp_from_json(s: &str) -> Result<CpDecomposition> {
    serde_json::from_str::<CpFile>(s)?.try_into()
}

pub fn tucker_to_json(tk: &TuckerDecomposition) -> Result<String> {
    Ok(serde_json::to_string(&TuckerFile::from(tk))?)
}

pub fn tucker_from_json(s: &str) -> Result<TuckerDecomposition> {
    serde_json::from_str::<TuckerFile>(s)?.try_into()
}

pub fn eigenpairs_from_json(s: &str) -> Result<Vec<EigenPair>> {
    from_json(s)
}

pub fn singular_tuples_from_json(s: &str) -> Result<Vec<SingularTuple>> {
    from_json(s)
}

pub fn eigen_search_from_json(s: &str) -> Result<EigenSearch> {
    from_json(s)
}

pub fn singular_search_from_json(s: &str) -> Result<SingularSearch> {
    from_json(s)
}

fn from_json<T: DeserializeOwned>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    tensor_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    std::fs::write(path, tensor_to_json(t)? + "\n")?;
    Ok(())
}

pub fn read_cp(path: impl AsRef<Path>) -> Result<CpDecomposition> {
    cp_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_tucker(path: impl AsRef<Path>) -> Result<TuckerDecomposition> {
    tucker_from_json(&std::fs::read_to_string(path)?)
}
