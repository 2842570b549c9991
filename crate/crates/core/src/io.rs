//! JSON file formats shared by the library, the CLI and the bindings.
//!
//! Matrices: `{ "d": int, "n": int, "re": [[...]], "im": [[...]] }`, row-major.
//! Vectors: `{ "d": int, "n": int, "re": [...], "im": [...] }`.
//!
//! Operators on `(C^d)^{⊗n}` are `d^n × d^n`; an F-matrix uses the same
//! matrix layout with `n` rows of `d` entries.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{DensityMatrix, FMatrix, PureState};
use crate::{CMatrix, CVector, Complex64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub d: usize,
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFile {
    pub d: usize,
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix, d: usize, n: usize) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            d,
            n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if self.im.len() != rows || self.re.iter().any(|r| r.len() != cols) || self.im.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("\"re\" and \"im\" must be rectangular and of equal shape"));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?, self.d, self.n)
    }

    pub fn to_fmatrix(&self) -> Result<FMatrix> {
        let m = self.to_matrix()?;
        if m.shape() != (self.n, self.d) {
            return Err(Error::dim(format!(
                "F-matrix file holds a {:?} matrix but declares n = {}, d = {}",
                m.shape(),
                self.n,
                self.d
            )));
        }
        FMatrix::new(m)
    }
}

impl VectorFile {
    pub fn from_state(psi: &PureState) -> Self {
        Self {
            d: psi.d(),
            n: psi.n(),
            re: psi.amplitudes().iter().map(|z| z.re).collect(),
            im: psi.amplitudes().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_state(&self) -> Result<PureState> {
        if self.re.len() != self.im.len() {
            return Err(Error::dim("\"re\" and \"im\" have different lengths"));
        }
        let v = CVector::from_iterator(
            self.re.len(),
            self.re.iter().zip(&self.im).map(|(&a, &b)| Complex64::new(a, b)),
        );
        PureState::new(v, self.d, self.n)
    }
}

impl TryFrom<MatrixFile> for FMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        f.to_fmatrix()
    }
}

impl From<FMatrix> for MatrixFile {
    fn from(f: FMatrix) -> Self {
        MatrixFile::from_matrix(f.entries(), f.d(), f.n())
    }
}

impl From<&DensityMatrix> for MatrixFile {
    fn from(rho: &DensityMatrix) -> Self {
        MatrixFile::from_matrix(rho.matrix(), rho.d(), rho.n())
    }
}

pub fn read_matrix_file(path: &Path) -> Result<MatrixFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}
