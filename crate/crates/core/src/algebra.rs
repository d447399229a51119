//! The ambient matrix algebra and completely positive contractions on it.
//!
//! Elements of the algebra are dense `d x d` complex matrices. A channel is a
//! completely positive map stored as a Kraus family `V_1, ..., V_r` acting by
//! `a -> sum_i V_i^* a V_i`, so unitality reads `sum_i V_i^* V_i = I` and
//! contractivity is the eigenvalue bound `sum_i V_i^* V_i <= (1 + tol) I`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// A dense complex matrix; square ones are elements of the ambient algebra.
pub type CMatrix = DMatrix<Complex64>;

/// The identity of the `d`-dimensional algebra.
pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Operator (spectral) norm via singular values.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut eigs: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    eigs
}

fn scale(m: &CMatrix, s: f64) -> CMatrix {
    m.map(|z| z * s)
}

/// Positivity check for a (nominally) Hermitian matrix.
///
/// The matrix is symmetrized to `(m + m^*)/2` before the eigenvalue
/// computation; input whose asymmetry exceeds `1e-8 * max(1, |m|)` is
/// rejected rather than silently symmetrized. Passes iff the minimum
/// eigenvalue is `>= -tol * max(1, |m|)`.
pub fn psd_check(m: &CMatrix, tol: f64) -> Result<(bool, f64)> {
    let asymmetry = op_norm(&(m - m.adjoint()));
    let norm = op_norm(m);
    let limit = 1e-8 * norm.max(1.0);
    if asymmetry > limit {
        return Err(Error::AsymmetryTooLarge { asymmetry, limit });
    }
    let h = scale(&(m + m.adjoint()), 0.5);
    let eigs = hermitian_eigenvalues(&h);
    let min_eig = eigs[0];
    let max_abs = eigs.iter().fold(0.0_f64, |acc, e| acc.max(e.abs()));
    Ok((min_eig >= -tol * max_abs.max(1.0), min_eig))
}

/// Draws a matrix with independent standard complex Gaussian entries.
///
/// Entries are filled in column-major order; each entry consumes one
/// Box-Muller pair (real part first).
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut SplitMix64) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            let (re, im) = rng.next_normal_pair();
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    m
}

/// A random Hermitian matrix, `(g + g^*)/2` of a Gaussian draw.
pub fn random_hermitian(d: usize, rng: &mut SplitMix64) -> CMatrix {
    let g = gaussian_matrix(d, d, rng);
    scale(&(&g + g.adjoint()), 0.5)
}

/// A random positive semidefinite matrix, `g^* g` of a Gaussian draw.
pub fn random_psd(d: usize, rng: &mut SplitMix64) -> CMatrix {
    let g = gaussian_matrix(d, d, rng);
    g.adjoint() * &g
}

/// Orthonormalizes the columns of `m` in place by modified Gram-Schmidt.
fn orthonormalize_columns(m: &mut CMatrix) {
    let cols = m.ncols();
    for j in 0..cols {
        for k in 0..j {
            let proj: Complex64 = m.column(k).dotc(&m.column(j));
            let col_k = m.column(k).clone_owned();
            let mut col_j = m.column_mut(j);
            col_j.axpy(-proj, &col_k, Complex64::new(1.0, 0.0));
        }
        let norm = m.column(j).norm();
        let inv = Complex64::new(1.0 / norm, 0.0);
        m.column_mut(j).scale_mut(inv.re);
    }
}

/// A completely positive contraction in Kraus form.
#[derive(Debug, Clone)]
pub struct Channel {
    dim: usize,
    kraus: Vec<CMatrix>,
    tol_cp: f64,
}

/// Default contractivity slack for channel validation.
pub const DEFAULT_TOL_CP: f64 = 1e-10;

impl Channel {
    /// Validates a Kraus family and wraps it as a channel.
    ///
    /// Every operator must be `d x d` and the largest eigenvalue of
    /// `sum_i V_i^* V_i` must not exceed `1 + tol_cp`.
    pub fn from_kraus(d: usize, kraus: Vec<CMatrix>, tol_cp: f64) -> Result<Self> {
        if d == 0 || kraus.is_empty() {
            return Err(Error::InvalidParams(
                "channel needs d >= 1 and at least one Kraus operator".into(),
            ));
        }
        for v in &kraus {
            if v.nrows() != d || v.ncols() != d {
                return Err(Error::ShapeMismatch {
                    expected: d,
                    rows: v.nrows(),
                    cols: v.ncols(),
                });
            }
        }
        let ch = Self { dim: d, kraus, tol_cp };
        let max_eig = *hermitian_eigenvalues(&ch.normalization())
            .last()
            .expect("d >= 1");
        if max_eig > 1.0 + tol_cp {
            return Err(Error::NotContractive { max_eig, tol: tol_cp });
        }
        Ok(ch)
    }

    /// The scalar map `x -> lambda * x` on the one-dimensional algebra.
    pub fn scalar(lambda: f64) -> Result<Self> {
        let v = CMatrix::from_element(1, 1, Complex64::new(lambda.sqrt(), 0.0));
        Self::from_kraus(1, vec![v], DEFAULT_TOL_CP)
    }

    /// The identity channel on the `d`-dimensional algebra.
    pub fn id(d: usize) -> Self {
        Self::from_kraus(d, vec![identity(d)], DEFAULT_TOL_CP).expect("identity is contractive")
    }

    /// Deterministic seeded random channel.
    ///
    /// Draws an `r*d x d` complex Gaussian matrix, orthonormalizes its
    /// columns to an isometry `W`, and slices `W` into `r` blocks of `d`
    /// rows. Unital channels use the blocks as-is (`sum V_i^* V_i = I`);
    /// otherwise all blocks are scaled by `sqrt(lambda)` so that
    /// `sum V_i^* V_i = lambda * I`.
    pub fn random(d: usize, r: usize, seed: u64, unital: bool, lambda: f64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParams("Kraus count r must be >= 1".into()));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::NotContractive {
                max_eig: lambda,
                tol: 0.0,
            });
        }
        let mut rng = SplitMix64::new(seed);
        let mut w = gaussian_matrix(r * d, d, &mut rng);
        orthonormalize_columns(&mut w);
        let factor = if unital { 1.0 } else { lambda.sqrt() };
        let kraus = (0..r)
            .map(|i| scale(&w.rows(i * d, d).clone_owned(), factor))
            .collect();
        Self::from_kraus(d, kraus, DEFAULT_TOL_CP)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn tol_cp(&self) -> f64 {
        self.tol_cp
    }

    /// `sum_i V_i^* V_i`, the image of the unit.
    pub fn normalization(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for v in &self.kraus {
            acc += v.adjoint() * v;
        }
        acc
    }

    pub(crate) fn apply_unchecked(&self, a: &CMatrix) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for v in &self.kraus {
            acc += v.adjoint() * a * v;
        }
        acc
    }

    /// Applies the channel to one algebra element.
    pub fn apply(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check_elem(a)?;
        Ok(self.apply_unchecked(a))
    }

    /// `n`-fold application; `n = 0` returns the input unchanged.
    pub fn apply_power(&self, n: u32, a: &CMatrix) -> Result<CMatrix> {
        self.check_elem(a)?;
        let mut out = a.clone();
        for _ in 0..n {
            out = self.apply_unchecked(&out);
        }
        Ok(out)
    }

    /// Whether `|phi(I) - I| <= tol` in operator norm.
    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_residual() <= tol
    }

    /// `|phi(I) - I|` in operator norm.
    pub fn unitality_residual(&self) -> f64 {
        let diff = self.normalization() - identity(self.dim);
        hermitian_eigenvalues(&diff)
            .iter()
            .fold(0.0_f64, |acc, e| acc.max(e.abs()))
    }

    pub(crate) fn check_elem(&self, a: &CMatrix) -> Result<()> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// File encoding
// ---------------------------------------------------------------------------

/// Matrix encoding used by every file format: a list of rows, each row a list
/// of `[re, im]` pairs.
pub type MatrixRepr = Vec<Vec<[f64; 2]>>;

/// On-disk form of a channel: `{"d": ..., "kraus": [matrix, ...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub d: usize,
    pub kraus: Vec<MatrixRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_cp: Option<f64>,
}

pub fn matrix_to_repr(m: &CMatrix) -> MatrixRepr {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn matrix_from_repr(repr: &MatrixRepr) -> Result<CMatrix> {
    let rows = repr.len();
    if rows == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let cols = repr[0].len();
    if repr.iter().any(|row| row.len() != cols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        Complex64::new(repr[r][c][0], repr[r][c][1])
    }))
}

impl Channel {
    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            d: self.dim,
            kraus: self.kraus.iter().map(matrix_to_repr).collect(),
            tol_cp: None,
        }
    }

    pub fn from_file(file: &ChannelFile) -> Result<Self> {
        let kraus = file
            .kraus
            .iter()
            .map(matrix_from_repr)
            .collect::<Result<Vec<_>>>()?;
        Self::from_kraus(file.d, kraus, file.tol_cp.unwrap_or(DEFAULT_TOL_CP))
    }
}

/// Renders a matrix in the file encoding with 17 significant digits, enough
/// for a lossless round trip.
pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = String::from("[");
    for r in 0..m.nrows() {
        if r > 0 {
            out.push(',');
        }
        out.push('[');
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(',');
            }
            let z = m[(r, c)];
            out.push_str(&format!("[{:.16e},{:.16e}]", z.re, z.im));
        }
        out.push(']');
    }
    out.push(']');
    out
}
