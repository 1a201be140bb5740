//! Fréchet distance between Gaussians fitted to embedding sets, and the
//! binary embedding file format.
//!
//! File layout, little endian: `b"EMB1"`, `u32` dimension D, `u32` count N,
//! then `N * D` `f32` values row by row.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::MetricsError;

pub const EMBEDDING_MAGIC: &[u8; 4] = b"EMB1";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    /// `N x D`, one embedding per row.
    pub vectors: DMatrix<f64>,
    pub label: String,
}

impl EmbeddingSet {
    pub fn from_rows(rows: &[Vec<f64>], label: impl Into<String>) -> Result<Self, MetricsError> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(MetricsError::DimensionMismatch(d, bad.len()));
        }
        Ok(Self {
            vectors: DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]),
            label: label.into(),
        })
    }

    pub fn count(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    /// Mean and unbiased (N - 1) covariance.
    pub fn moments(&self) -> Result<(DVector<f64>, DMatrix<f64>), MetricsError> {
        let n = self.count();
        if n < 2 {
            return Err(MetricsError::TooFewEmbeddings(n));
        }
        let mean = self.vectors.row_mean().transpose();
        let mut centered = self.vectors.clone();
        for mut row in centered.row_iter_mut() {
            row -= mean.transpose();
        }
        let cov = centered.transpose() * &centered / (n as f64 - 1.0);
        Ok((mean, cov))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, MetricsError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| MetricsError::io(path, e))?;
        let label = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        Self::read_from(std::io::BufReader::new(file), label).map_err(|e| match e {
            MetricsError::Io { source, .. } => MetricsError::io(path, source),
            other => other,
        })
    }

    pub fn read_from(mut r: impl Read, label: impl Into<String>) -> Result<Self, MetricsError> {
        let mut header = [0u8; 12];
        r.read_exact(&mut header).map_err(|_| MetricsError::BadEmbeddingFile("truncated header".into()))?;
        if &header[..4] != EMBEDDING_MAGIC {
            return Err(MetricsError::BadEmbeddingFile("bad magic".into()));
        }
        let d = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
        let n = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
        let mut body = Vec::new();
        r.read_to_end(&mut body).map_err(|e| MetricsError::io(Path::new("<reader>"), e))?;
        let expected = n.checked_mul(d).and_then(|v| v.checked_mul(4));
        if expected != Some(body.len()) {
            return Err(MetricsError::BadEmbeddingFile(format!(
                "header declares {n} x {d} values but body has {} bytes",
                body.len()
            )));
        }
        let values: Vec<f64> = body
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect();
        Ok(Self {
            vectors: DMatrix::from_row_slice(n, d, &values),
            label: label.into(),
        })
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(EMBEDDING_MAGIC)?;
        w.write_all(&(self.dim() as u32).to_le_bytes())?;
        w.write_all(&(self.count() as u32).to_le_bytes())?;
        for row in self.vectors.row_iter() {
            for v in row.iter() {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Symmetric square root of a covariance; eigenvalues that are negative only
/// by rounding are clipped.
fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>, MetricsError> {
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let vals = clipped(&eig.eigenvalues)?;
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&vals.map(f64::sqrt)) * eig.eigenvectors.transpose())
}

fn clipped(vals: &DVector<f64>) -> Result<DVector<f64>, MetricsError> {
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if let Some(&v) = vals.iter().find(|&&v| v < -1e-8 * scale) {
        return Err(MetricsError::Numerical(v));
    }
    Ok(vals.map(|v| v.max(0.0)))
}

/// `|mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2})`.
///
/// The trace of the product root is taken as the trace of
/// `(S_a^{1/2} S_b S_a^{1/2})^{1/2}`, which has the same eigenvalues but is
/// symmetric.
pub fn frechet_distance(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<f64, MetricsError> {
    if a.dim() != b.dim() {
        return Err(MetricsError::DimensionMismatch(a.dim(), b.dim()));
    }
    let (mu_a, cov_a) = a.moments()?;
    let (mu_b, cov_b) = b.moments()?;
    let root_a = psd_sqrt(&cov_a)?;
    let inner = &root_a * &cov_b * &root_a;
    let eig = SymmetricEigen::new((&inner + inner.transpose()) * 0.5);
    let tr_cross: f64 = clipped(&eig.eigenvalues)?.iter().map(|v| v.sqrt()).sum();
    let d = (mu_a - mu_b).norm_squared() + cov_a.trace() + cov_b.trace() - 2.0 * tr_cross;
    Ok(d.max(0.0))
}
