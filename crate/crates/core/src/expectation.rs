//! Elementary generators over the index semigroup, the expectation onto the
//! ambient algebra, Gram positivity, and the height-reduction factorization.
//!
//! A generator pairs a word with one algebra element per letter. Products
//! tensor the two element lists, multiplying the boundary elements when the
//! junction letters merge; the involution reverses the word and conjugates
//! the list. The expectation of a generator is the moment bracket of its
//! word evaluated on its elements, extended to formal sums term by term.

use crate::algebra::{op_norm, psd_check, CMatrix, Channel};
use crate::error::{Error, Result};
use crate::moments;
use crate::words::{IndexTuple, Word};

/// An elementary section: a word together with one matrix per letter.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    word: Word,
    tensors: Vec<CMatrix>,
}

impl Generator {
    /// Builds a generator from an arbitrary index tuple, merging adjacent
    /// equal indices by multiplying their matrices left to right until the
    /// word has distinct neighbors.
    pub fn make(indices: &IndexTuple, tensors: Vec<CMatrix>) -> Result<Self> {
        if indices.len() != tensors.len() {
            return Err(Error::LengthMismatch {
                indices: indices.len(),
                items: tensors.len(),
            });
        }
        let d = tensors[0].nrows();
        for t in &tensors {
            if t.nrows() != d || t.ncols() != d {
                return Err(Error::ShapeMismatch {
                    expected: d,
                    rows: t.nrows(),
                    cols: t.ncols(),
                });
            }
        }
        let mut entries: Vec<u32> = Vec::with_capacity(indices.len());
        let mut merged: Vec<CMatrix> = Vec::with_capacity(tensors.len());
        for (&n, t) in indices.entries().iter().zip(tensors) {
            if entries.last() == Some(&n) {
                let last = merged.last_mut().expect("entries nonempty");
                *last = &*last * t;
            } else {
                entries.push(n);
                merged.push(t);
            }
        }
        Ok(Self {
            word: Word::new(entries).expect("merge leaves distinct neighbors"),
            tensors: merged,
        })
    }

    /// A generator on an already-reduced word.
    pub fn from_word(word: Word, tensors: Vec<CMatrix>) -> Result<Self> {
        Self::make(&word.to_index_tuple(), tensors)
    }

    /// The unit of the ambient algebra sitting at index zero.
    pub fn unit(d: usize) -> Self {
        Self {
            word: Word::singleton(0),
            tensors: vec![crate::algebra::identity(d)],
        }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn tensors(&self) -> &[CMatrix] {
        &self.tensors
    }

    pub fn dim(&self) -> usize {
        self.tensors[0].nrows()
    }

    pub fn height(&self) -> u32 {
        self.word.height()
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Semigroup product; boundary matrices multiply when the junction
    /// letters merge.
    pub fn product(&self, other: &Generator) -> Result<Generator> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                rows: other.dim(),
                cols: other.dim(),
            });
        }
        let word = self.word.product(&other.word);
        let mut tensors = Vec::with_capacity(word.len());
        if self.word.last() == other.word.first() {
            tensors.extend_from_slice(&self.tensors[..self.tensors.len() - 1]);
            tensors.push(self.tensors.last().expect("nonempty") * &other.tensors[0]);
            tensors.extend_from_slice(&other.tensors[1..]);
        } else {
            tensors.extend_from_slice(&self.tensors);
            tensors.extend_from_slice(&other.tensors);
        }
        debug_assert_eq!(word.len(), tensors.len());
        Ok(Generator { word, tensors })
    }

    /// Word reversal with entrywise adjoints.
    pub fn involution(&self) -> Generator {
        Generator {
            word: self.word.involution(),
            tensors: self.tensors.iter().rev().map(|t| t.adjoint()).collect(),
        }
    }

    /// Raises every word entry by `t`; matrices are untouched.
    pub fn shift(&self, t: u32) -> Generator {
        Generator {
            word: self.word.shift(t),
            tensors: self.tensors.clone(),
        }
    }

    /// The expectation of this generator under `phi`: the moment bracket of
    /// its word on its matrices.
    pub fn expectation(&self, phi: &Channel) -> Result<CMatrix> {
        moments::eval(&self.word.to_index_tuple(), &self.tensors, phi)
    }

    /// Upper bound for the section norm of this single term: the product of
    /// the operator norms of its matrices.
    pub fn norm_bound(&self) -> f64 {
        self.tensors.iter().map(op_norm).product()
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ; {} tensor(s) of dim {}", self.word, self.tensors.len(), self.dim())
    }
}

/// A finitely supported formal sum of generators. Terms are kept in expanded
/// list form; like words are not combined.
#[derive(Debug, Clone, Default)]
pub struct FiniteSection {
    terms: Vec<Generator>,
}

impl FiniteSection {
    pub fn new(terms: Vec<Generator>) -> Result<Self> {
        if let Some(first) = terms.first() {
            let d = first.dim();
            for t in &terms {
                if t.dim() != d {
                    return Err(Error::ShapeMismatch {
                        expected: d,
                        rows: t.dim(),
                        cols: t.dim(),
                    });
                }
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Generator] {
        &self.terms
    }

    pub fn push(&mut self, g: Generator) -> Result<()> {
        if let Some(first) = self.terms.first() {
            if first.dim() != g.dim() {
                return Err(Error::ShapeMismatch {
                    expected: first.dim(),
                    rows: g.dim(),
                    cols: g.dim(),
                });
            }
        }
        self.terms.push(g);
        Ok(())
    }

    /// Term-wise expectation.
    pub fn expectation(&self, phi: &Channel) -> Result<CMatrix> {
        let mut acc = CMatrix::zeros(phi.dim(), phi.dim());
        for t in &self.terms {
            acc += t.expectation(phi)?;
        }
        Ok(acc)
    }

    /// Convolution product, expanded term by term.
    pub fn product(&self, other: &FiniteSection) -> Result<FiniteSection> {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for g in &self.terms {
            for h in &other.terms {
                terms.push(g.product(h)?);
            }
        }
        FiniteSection::new(terms)
    }

    pub fn involution(&self) -> FiniteSection {
        FiniteSection {
            terms: self.terms.iter().map(Generator::involution).collect(),
        }
    }

    pub fn shift(&self, t: u32) -> FiniteSection {
        FiniteSection {
            terms: self.terms.iter().map(|g| g.shift(t)).collect(),
        }
    }

    /// Diagnostic upper bound for the section norm: the sum over terms of
    /// the per-term norm bounds (exact only when no words coincide).
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(Generator::norm_bound).sum()
    }
}

/// Assembles the Gram matrix of a generator family under `phi` and reports
/// its minimum eigenvalue.
///
/// The entry pairing follows the positive quadratic form: the block in row
/// `i`, column `j` is the expectation of `u_i^* u_j`, so the flattened
/// `nd x nd` matrix is positive semidefinite. The lower triangle is filled
/// from the upper by conjugate transposition, which both enforces exact
/// Hermiticity and keeps assembly deterministic.
pub fn gram_matrix(us: &[Generator], phi: &Channel) -> Result<(CMatrix, f64)> {
    if us.is_empty() {
        return Err(Error::InvalidParams("empty generator family".into()));
    }
    let d = phi.dim();
    for u in us {
        if u.dim() != d {
            return Err(Error::ShapeMismatch {
                expected: d,
                rows: u.dim(),
                cols: u.dim(),
            });
        }
    }
    let n = us.len();
    let mut gram = CMatrix::zeros(n * d, n * d);
    for i in 0..n {
        let ui_star = us[i].involution();
        for j in i..n {
            let block = ui_star.product(&us[j])?.expectation(phi)?;
            gram.view_mut((i * d, j * d), (d, d)).copy_from(&block);
            if j > i {
                gram.view_mut((j * d, i * d), (d, d)).copy_from(&block.adjoint());
            }
        }
    }
    let (_, min_eig) = psd_check(&gram, 1e-8)?;
    Ok((gram, min_eig))
}

/// Result of one height-reduction step on a generator family.
///
/// For each input `u_k` it produces a lowered generator `v_k` of strictly
/// smaller height and matrices `b_k`, `c_k` such that
/// `E(u_j^* u_i) = b_j^* phi(E(v_j^* v_i)) b_i + c_j^* (I - phi(I)) c_i`.
#[derive(Debug, Clone)]
pub struct HeightFactorization {
    pub lowered: Vec<Generator>,
    pub outer: Vec<CMatrix>,
    pub defect: Vec<CMatrix>,
    /// Max over all pairs of the operator-norm defect of the identity above.
    pub residual: f64,
}

/// One height-reduction step on a family of positive maximum height.
///
/// Each generator is right-multiplied by the unit (appending a zero letter
/// when the word does not already end in zero). Words opening with positive
/// letters split before their first zero: the prefix drops by one index
/// level and the suffix is absorbed into the outer matrix. Words opening
/// with zero contribute the trivial lowered generator and carry their whole
/// expectation in both the outer and defect slots.
pub fn height_reduction_step(us: &[Generator], phi: &Channel) -> Result<HeightFactorization> {
    if us.is_empty() {
        return Err(Error::InvalidParams("empty generator family".into()));
    }
    let d = phi.dim();
    let max_height = us.iter().map(Generator::height).max().expect("nonempty");
    if max_height == 0 {
        return Err(Error::HeightZero);
    }
    let unit = Generator::unit(d);
    let zero = CMatrix::zeros(d, d);

    let mut lowered = Vec::with_capacity(us.len());
    let mut outer = Vec::with_capacity(us.len());
    let mut defect = Vec::with_capacity(us.len());
    for u in us {
        phi.check_elem(&u.tensors()[0])?;
        let ue = u.product(&unit)?;
        let entries = ue.word().entries();
        if entries[0] > 0 {
            // Split before the first zero: u*e = shift(prefix) * suffix.
            let l = entries
                .iter()
                .position(|&n| n == 0)
                .expect("right-multiplication by the unit guarantees a zero");
            let prefix: Vec<u32> = entries[..l].iter().map(|&n| n - 1).collect();
            let v = Generator::from_word(
                Word::new(prefix).expect("lowering keeps neighbors distinct"),
                ue.tensors()[..l].to_vec(),
            )?;
            let w = Generator::from_word(
                Word::new(entries[l..].to_vec()).expect("suffix of a word"),
                ue.tensors()[l..].to_vec(),
            )?;
            debug_assert!(v.height() < max_height);
            outer.push(w.expectation(phi)?);
            defect.push(zero.clone());
            lowered.push(v);
        } else {
            let e0 = ue.expectation(phi)?;
            outer.push(e0.clone());
            defect.push(e0);
            lowered.push(Generator::unit(d));
        }
    }

    let unit_defect = crate::algebra::identity(d) - phi.apply_unchecked(&crate::algebra::identity(d));
    let mut residual = 0.0_f64;
    for (j, uj) in us.iter().enumerate() {
        let uj_star = uj.involution();
        let vj_star = lowered[j].involution();
        for (i, ui) in us.iter().enumerate() {
            let lhs = uj_star.product(ui)?.expectation(phi)?;
            let inner = vj_star.product(&lowered[i])?.expectation(phi)?;
            let rhs = outer[j].adjoint() * phi.apply_unchecked(&inner) * &outer[i]
                + defect[j].adjoint() * &unit_defect * &defect[i];
            residual = residual.max(op_norm(&(lhs - rhs)));
        }
    }

    Ok(HeightFactorization {
        lowered,
        outer,
        defect,
        residual,
    })
}
