//! Finite-horizon dilation model.
//!
//! The model enumerates every generator whose word has entries up to a
//! height bound and length up to a length bound, with matrix units in each
//! tensor slot. Pairing each generator with a standard basis vector gives a
//! positive kernel; eigendecomposing it, discarding the (near-)null
//! directions, and keeping isometric coordinates on the rest yields a
//! concrete Hilbert space on which generators act by left multiplication.
//! The corner spanned by the index-zero generators carries a copy of the
//! ambient algebra, and compressing represented operators to that corner
//! reproduces the moment recursion.
//!
//! Truncation boundaries are hard: a product that leaves the catalog raises
//! an error instead of being projected, so every verified identity is exact
//! up to floating point rather than an artifact of an implicit cutoff.

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::algebra::{identity, op_norm, CMatrix, Channel};
use crate::error::{Error, Result};
use crate::expectation::Generator;
use crate::moments;
use crate::report::CheckRecord;
use crate::rng::{derive_seed, SplitMix64};
use crate::words::{IndexTuple, Word};

pub type CVector = DVector<Complex64>;

/// Relative negative-eigenvalue mass above which the build aborts; genuine
/// negativity of the kernel would mean an assembly bug, not rounding.
const GRAM_CLIP_ABORT: f64 = 1e-8;

/// Finite-horizon truncation bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    /// Maximum word entry.
    pub max_height: u32,
    /// Maximum word length.
    pub max_len: usize,
    /// Relative eigenvalue cutoff for the null-space quotient.
    pub eig_tol: f64,
}

impl TruncationParams {
    pub fn new(max_height: u32, max_len: usize, eig_tol: f64) -> Result<Self> {
        if max_height < 1 || max_len < 1 || !(eig_tol > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need max_height >= 1, max_len >= 1, eig_tol > 0; got {max_height}, {max_len}, {eig_tol}"
            )));
        }
        Ok(Self {
            max_height,
            max_len,
            eig_tol,
        })
    }
}

impl Default for TruncationParams {
    fn default() -> Self {
        Self {
            max_height: 2,
            max_len: 2,
            eig_tol: 1e-10,
        }
    }
}

/// The ordered catalog of truncated generators and their basis pairing.
///
/// Words are ordered by length then lexicographically; within a word the
/// `d^2` matrix units per slot run in row-major order with the first slot
/// most significant. Each generator contributes `d` basis vectors, one per
/// standard basis vector of the representation space.
#[derive(Debug, Clone)]
pub struct BasisCatalog {
    d: usize,
    params: TruncationParams,
    words: Vec<Word>,
    word_offsets: HashMap<Vec<u32>, usize>,
    generators: Vec<Generator>,
}

/// All words with entries in `0..=max_height`, distinct neighbors, and
/// length in `1..=max_len`, ordered by length then lexicographically.
pub fn enumerate_words(params: &TruncationParams) -> Vec<Word> {
    let mut words = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    for len in 1..=params.max_len {
        extend_words(&mut words, &mut current, len, params.max_height);
    }
    words
}

fn extend_words(out: &mut Vec<Word>, current: &mut Vec<u32>, target_len: usize, max_entry: u32) {
    if current.len() == target_len {
        out.push(Word::new(current.clone()).expect("construction keeps neighbors distinct"));
        return;
    }
    for n in 0..=max_entry {
        if current.last() == Some(&n) {
            continue;
        }
        current.push(n);
        extend_words(out, current, target_len, max_entry);
        current.pop();
    }
}

/// The matrix unit with a one in row `p`, column `q`.
pub fn matrix_unit(d: usize, p: usize, q: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(p, q)] = Complex64::new(1.0, 0.0);
    m
}

impl BasisCatalog {
    pub fn new(d: usize, params: TruncationParams) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("dimension must be >= 1".into()));
        }
        let words = enumerate_words(&params);
        let d2 = d * d;
        let mut word_offsets = HashMap::with_capacity(words.len());
        let mut generators = Vec::new();
        for w in &words {
            word_offsets.insert(w.entries().to_vec(), generators.len());
            let len = w.len();
            let combos = d2.pow(len as u32);
            for combo in 0..combos {
                let mut units = Vec::with_capacity(len);
                let mut rem = combo;
                for slot in 0..len {
                    let weight = d2.pow((len - 1 - slot) as u32);
                    units.push(rem / weight);
                    rem %= weight;
                }
                let tensors = units
                    .iter()
                    .map(|&u| matrix_unit(d, u / d, u % d))
                    .collect();
                generators.push(
                    Generator::from_word(w.clone(), tensors).expect("unit tensors are square"),
                );
            }
        }
        Ok(Self {
            d,
            params,
            words,
            word_offsets,
            generators,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn params(&self) -> &TruncationParams {
        &self.params
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn n_basis(&self) -> usize {
        self.generators.len() * self.d
    }

    /// Index of the generator with the given word and unit combination.
    pub fn generator_index(&self, word: &Word, units: &[usize]) -> Option<usize> {
        let offset = *self.word_offsets.get(word.entries())?;
        let d2 = self.d * self.d;
        let len = word.len();
        debug_assert_eq!(units.len(), len);
        let mut combo = 0usize;
        for (slot, &u) in units.iter().enumerate() {
            combo += u * d2.pow((len - 1 - slot) as u32);
        }
        Some(offset + combo)
    }

    pub fn basis_index(&self, gen_idx: usize, s: usize) -> usize {
        gen_idx * self.d + s
    }

    /// Whether a word fits the truncation bounds.
    pub fn word_fits(&self, word: &Word) -> bool {
        word.height() <= self.params.max_height && word.len() <= self.params.max_len
    }

    /// Expands a generator with arbitrary tensors over the unit-tensor
    /// catalog. Fails if the word leaves the truncation.
    pub fn expand(&self, g: &Generator) -> Result<Vec<(usize, Complex64)>> {
        if !self.word_fits(g.word()) {
            return Err(Error::OutOfTruncation {
                generator: g.word().to_string(),
                basis: "-".into(),
                max_height: self.params.max_height,
                max_len: self.params.max_len,
            });
        }
        let offset = self.word_offsets[g.word().entries()];
        let d2 = self.d * self.d;
        let len = g.word().len();
        let combos = d2.pow(len as u32);
        let mut out = Vec::new();
        for combo in 0..combos {
            let mut coeff = Complex64::new(1.0, 0.0);
            let mut rem = combo;
            for (slot, t) in g.tensors().iter().enumerate() {
                let weight = d2.pow((len - 1 - slot) as u32);
                let u = rem / weight;
                rem %= weight;
                coeff *= t[(u / self.d, u % self.d)];
                if coeff == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            if coeff != Complex64::new(0.0, 0.0) {
                out.push((offset + combo, coeff));
            }
        }
        Ok(out)
    }
}

/// A represented operator on the quotient space.
#[derive(Debug, Clone)]
pub struct RepresentedOp {
    /// Matrix in quotient coordinates.
    pub matrix: CMatrix,
    /// Basis indices whose image columns entered the least-squares fit.
    pub domain: Vec<usize>,
    /// Relative defect of the intertwining relation on the fitted columns.
    pub welldef_residual: f64,
}

/// The finite-horizon model: basis catalog, Gram kernel, quotient
/// coordinates, and the corner carrying the ambient algebra.
#[derive(Debug, Clone)]
pub struct DilationModel {
    channel: Channel,
    catalog: BasisCatalog,
    gram: CMatrix,
    rank: usize,
    kept_eigenvalues: Vec<f64>,
    clip_relative: f64,
    /// `rank x n_basis`; isometric coordinates of coefficient vectors.
    coords: CMatrix,
    /// `n_basis x rank`; right inverse of `coords`.
    coords_pinv: CMatrix,
    /// Discarded eigenvectors, `n_basis x (n_basis - rank)`.
    discarded: CMatrix,
    /// Coefficient vectors of the corner unit vectors, `n_basis x d`.
    corner_coeffs: CMatrix,
    /// Quotient coordinates of the corner unit vectors, `rank x d`.
    corner_embed: CMatrix,
    /// Orthogonal projection onto the corner, `rank x rank`.
    corner_projection: CMatrix,
    /// Gram of the stacked corner images of the matrix units, `d^2 x d^2`.
    corner_gram: CMatrix,
    corner_min_eig: f64,
}

impl DilationModel {
    /// Assembles the Gram kernel over the truncated catalog, quotients out
    /// its (near-)null space, and sets up the corner data.
    pub fn build(phi: &Channel, params: TruncationParams) -> Result<Self> {
        TruncationParams::new(params.max_height, params.max_len, params.eig_tol)?;
        let d = phi.dim();
        let catalog = BasisCatalog::new(d, params)?;
        let n_gen = catalog.n_generators();
        let n_basis = catalog.n_basis();

        let mut gram = CMatrix::zeros(n_basis, n_basis);
        for i in 0..n_gen {
            let ui_star = catalog.generators[i].involution();
            for j in i..n_gen {
                let block = ui_star
                    .product(&catalog.generators[j])?
                    .expectation(phi)?;
                gram.view_mut((i * d, j * d), (d, d)).copy_from(&block);
                if j > i {
                    gram.view_mut((j * d, i * d), (d, d))
                        .copy_from(&block.adjoint());
                }
            }
        }

        let eig = gram.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n_basis).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .expect("finite eigenvalues")
        });
        let max_eig = eig.eigenvalues[order[0]];
        let min_eig = eig.eigenvalues[order[n_basis - 1]];
        if max_eig <= 0.0 {
            return Err(Error::InvalidParams(
                "Gram kernel has no positive mass".into(),
            ));
        }
        if min_eig < -GRAM_CLIP_ABORT * max_eig {
            return Err(Error::GramClipTooLarge { min_eig, max_eig });
        }
        let cutoff = params.eig_tol * max_eig;
        let rank = order
            .iter()
            .take_while(|&&i| eig.eigenvalues[i] >= cutoff)
            .count();
        let clip_relative = (-min_eig).max(0.0) / max_eig;

        let mut coords = CMatrix::zeros(rank, n_basis);
        let mut coords_pinv = CMatrix::zeros(n_basis, rank);
        let mut kept_eigenvalues = Vec::with_capacity(rank);
        for (row, &idx) in order[..rank].iter().enumerate() {
            let lambda = eig.eigenvalues[idx];
            kept_eigenvalues.push(lambda);
            let v = eig.eigenvectors.column(idx);
            let sqrt = lambda.sqrt();
            for b in 0..n_basis {
                coords[(row, b)] = v[b].conj() * sqrt;
                coords_pinv[(b, row)] = v[b] / sqrt;
            }
        }
        let mut discarded = CMatrix::zeros(n_basis, n_basis - rank);
        for (col, &idx) in order[rank..].iter().enumerate() {
            discarded.set_column(col, &eig.eigenvectors.column(idx));
        }

        let mut corner_coeffs = CMatrix::zeros(n_basis, d);
        let word_zero = Word::singleton(0);
        for j in 0..d {
            for p in 0..d {
                let gen_idx = catalog
                    .generator_index(&word_zero, &[p * d + p])
                    .expect("index-zero word is always in the catalog");
                corner_coeffs[(catalog.basis_index(gen_idx, j), j)] = Complex64::new(1.0, 0.0);
            }
        }
        let corner_embed = &coords * &corner_coeffs;
        let corner_projection = &corner_embed * corner_embed.adjoint();

        // Gram of the d^2 stacked corner images a -> (a e_0, ..., a e_{d-1});
        // the identity matrix in exact arithmetic.
        let d2 = d * d;
        let mut corner_gram = CMatrix::zeros(d2, d2);
        for u in 0..d2 {
            let gu = catalog
                .generator_index(&word_zero, &[u])
                .expect("in catalog");
            for v in 0..d2 {
                let gv = catalog
                    .generator_index(&word_zero, &[v])
                    .expect("in catalog");
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..d {
                    let cu = coords.column(catalog.basis_index(gu, s));
                    let cv = coords.column(catalog.basis_index(gv, s));
                    acc += cu.dotc(&cv);
                }
                corner_gram[(u, v)] = acc;
            }
        }
        let corner_min_eig = crate::algebra::hermitian_eigenvalues(&corner_gram)[0];

        Ok(Self {
            channel: phi.clone(),
            catalog,
            gram,
            rank,
            kept_eigenvalues,
            clip_relative,
            coords,
            coords_pinv,
            discarded,
            corner_coeffs,
            corner_embed,
            corner_projection,
            corner_gram,
            corner_min_eig,
        })
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn catalog(&self) -> &BasisCatalog {
        &self.catalog
    }

    pub fn params(&self) -> &TruncationParams {
        self.catalog.params()
    }

    pub fn d(&self) -> usize {
        self.catalog.d()
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kept_eigenvalues(&self) -> &[f64] {
        &self.kept_eigenvalues
    }

    /// `|most negative eigenvalue| / max eigenvalue` of the raw kernel.
    pub fn clip_relative(&self) -> f64 {
        self.clip_relative
    }

    pub fn coords(&self) -> &CMatrix {
        &self.coords
    }

    pub fn corner_embedding(&self) -> &CMatrix {
        &self.corner_embed
    }

    pub fn corner_projection(&self) -> &CMatrix {
        &self.corner_projection
    }

    pub fn corner_gram(&self) -> &CMatrix {
        &self.corner_gram
    }

    pub fn corner_min_eig(&self) -> f64 {
        self.corner_min_eig
    }

    /// `max(|p^2 - p|, |p^* - p|)` for the corner projection.
    pub fn corner_projection_residual(&self) -> f64 {
        let p = &self.corner_projection;
        let idem = op_norm(&(p * p - p));
        let herm = op_norm(&(p.adjoint() - p));
        idem.max(herm)
    }

    /// `|iota^* iota - I|`, the trustworthiness of corner readouts.
    pub fn corner_isometry_residual(&self) -> f64 {
        let gram = self.corner_embed.adjoint() * &self.corner_embed;
        op_norm(&(gram - identity(self.d())))
    }

    fn check_corner(&self) -> Result<()> {
        if self.corner_min_eig <= 1e-10 {
            return Err(Error::CornerDegenerate {
                min_eig: self.corner_min_eig,
            });
        }
        Ok(())
    }

    /// Expansion of `g * u_j` over the catalog, or the truncation error
    /// naming the offending basis element.
    fn expand_product(&self, g: &Generator, gen_idx: usize) -> Result<Vec<(usize, Complex64)>> {
        let u = &self.catalog.generators[gen_idx];
        let pg = g.product(u)?;
        if !self.catalog.word_fits(pg.word()) {
            return Err(Error::OutOfTruncation {
                generator: g.word().to_string(),
                basis: u.to_string(),
                max_height: self.params().max_height,
                max_len: self.params().max_len,
            });
        }
        self.catalog.expand(&pg)
    }

    /// Left multiplication by `g` on a coefficient vector over the basis.
    /// Fails if any supported component maps outside the truncation.
    pub fn apply_generator_to_coefficients(
        &self,
        g: &Generator,
        coeff: &CVector,
    ) -> Result<CVector> {
        let d = self.d();
        let n_basis = self.catalog.n_basis();
        debug_assert_eq!(coeff.len(), n_basis);
        let mut out = CVector::zeros(n_basis);
        let mut cache: HashMap<usize, Vec<(usize, Complex64)>> = HashMap::new();
        for b in 0..n_basis {
            let c = coeff[b];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let gen_idx = b / d;
            let s = b % d;
            if !cache.contains_key(&gen_idx) {
                let expansion = self.expand_product(g, gen_idx)?;
                cache.insert(gen_idx, expansion);
            }
            for &(target, w) in &cache[&gen_idx] {
                out[self.catalog.basis_index(target, s)] += w * c;
            }
        }
        Ok(out)
    }

    fn image_column(&self, g: &Generator, basis_idx: usize) -> Result<CVector> {
        let d = self.d();
        let gen_idx = basis_idx / d;
        let s = basis_idx % d;
        let expansion = self.expand_product(g, gen_idx)?;
        let mut out = CVector::zeros(self.catalog.n_basis());
        for &(target, w) in &expansion {
            out[self.catalog.basis_index(target, s)] = w;
        }
        Ok(out)
    }

    fn least_squares_op(&self, g: &Generator, domain: Vec<usize>) -> Result<RepresentedOp> {
        let n_dom = domain.len();
        let mut images = CMatrix::zeros(self.rank, n_dom);
        let mut sources = CMatrix::zeros(self.rank, n_dom);
        for (col, &b) in domain.iter().enumerate() {
            let y = self.image_column(g, b)?;
            images.set_column(col, &(&self.coords * y));
            sources.set_column(col, &self.coords.column(b));
        }
        let matrix = if n_dom == self.catalog.n_basis() {
            // Full domain: sources is the coordinate map itself and its
            // pseudoinverse is known in closed form from the eigenfactors.
            &images * &self.coords_pinv
        } else {
            let pinv = sources
                .clone()
                .svd(true, true)
                .pseudo_inverse(1e-12)
                .expect("svd computed with both factors");
            &images * pinv
        };
        let fit = &matrix * &sources;
        let defect = op_norm(&(&images - &fit));
        let scale = op_norm(&images).max(1.0);
        Ok(RepresentedOp {
            matrix,
            domain,
            welldef_residual: defect / scale,
        })
    }

    /// The operator of left multiplication by `g` in quotient coordinates.
    ///
    /// Strict: every basis column must stay inside the truncation, otherwise
    /// the truncation error names the first offending basis element.
    pub fn represent(&self, g: &Generator) -> Result<RepresentedOp> {
        let domain: Vec<usize> = (0..self.catalog.n_basis()).collect();
        // Surface the first offender before any heavy work.
        for gen_idx in 0..self.catalog.n_generators() {
            self.expand_product(g, gen_idx)?;
        }
        self.least_squares_op(g, domain)
    }

    /// Left multiplication by `g` restricted to the basis columns whose
    /// products stay inside the truncation, extended by least squares.
    pub fn represent_partial(&self, g: &Generator) -> Result<RepresentedOp> {
        let d = self.d();
        let mut domain = Vec::new();
        for gen_idx in 0..self.catalog.n_generators() {
            if self.expand_product(g, gen_idx).is_ok() {
                for s in 0..d {
                    domain.push(self.catalog.basis_index(gen_idx, s));
                }
            }
        }
        if domain.is_empty() {
            return Err(Error::OutOfTruncation {
                generator: g.word().to_string(),
                basis: "every basis element".into(),
                max_height: self.params().max_height,
                max_len: self.params().max_len,
            });
        }
        self.least_squares_op(g, domain)
    }

    /// Reads the corner block of an operator on the quotient space as an
    /// element of the ambient algebra, together with the corner readout
    /// residual `|iota^* iota - I|`.
    pub fn compress_operator(&self, x: &CMatrix) -> Result<(CMatrix, f64)> {
        self.check_corner()?;
        if x.nrows() != self.rank || x.ncols() != self.rank {
            return Err(Error::ShapeMismatch {
                expected: self.rank,
                rows: x.nrows(),
                cols: x.ncols(),
            });
        }
        let m = self.corner_embed.adjoint() * x * &self.corner_embed;
        Ok((m, self.corner_isometry_residual()))
    }

    /// Corner compression of left multiplication by `g`, computed directly
    /// on the corner columns. Only the products of `g` with the index-zero
    /// generators need to stay inside the truncation.
    pub fn compress_product(&self, g: &Generator) -> Result<(CMatrix, f64)> {
        self.check_corner()?;
        let d = self.d();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.corner_coeffs.column(j).clone_owned();
            let image = self.apply_generator_to_coefficients(g, &col)?;
            let z = &self.coords * image;
            let readout = self.corner_embed.adjoint() * z;
            m.set_column(j, &readout);
        }
        Ok((m, self.corner_isometry_residual()))
    }

    /// Whether the corner products of `g` stay inside the truncation.
    pub fn corner_fits(&self, g: &Generator) -> bool {
        if g.word().height() > self.params().max_height {
            return false;
        }
        let appended = if g.word().last() == 0 {
            g.word().len()
        } else {
            g.word().len() + 1
        };
        appended <= self.params().max_len
    }

    /// Samples random index tuples and matrices whose generator product
    /// stays inside the truncation, and compares the corner compression of
    /// the represented product against the moment recursion.
    pub fn verify_moment_formula(&self, trials: usize, seed: u64) -> Result<CheckRecord> {
        let start = std::time::Instant::now();
        let d = self.d();
        let n_max = self.params().max_height;
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        let mut max_residual: f64 = 0.0;
        let attempt_cap = trials * 50;
        while accepted < trials && attempts < attempt_cap {
            let mut rng = SplitMix64::new(derive_seed(seed, 31, attempts as u64));
            attempts += 1;
            let k = 1 + rng.next_below(4) as usize;
            let entries: Vec<u32> = (0..k).map(|_| rng.next_below(n_max + 1)).collect();
            let mats: Vec<CMatrix> = (0..k)
                .map(|_| crate::algebra::gaussian_matrix(d, d, &mut rng))
                .collect();
            let tuple = IndexTuple::new(entries).expect("k >= 1");
            let product = Generator::make(&tuple, mats.clone())?;
            if !self.corner_fits(&product) {
                continue;
            }
            accepted += 1;
            let (compressed, _) = self.compress_product(&product)?;
            let recursion = moments::eval(&tuple, &mats, &self.channel)?;
            max_residual = max_residual.max(op_norm(&(compressed - recursion)));
        }
        let skip_rate = (attempts - accepted) as f64 / attempts.max(1) as f64;
        Ok(CheckRecord {
            name: "dilation-moment-formula".into(),
            params: format!(
                "d={d},N={n},L={l},trials={accepted}",
                n = self.params().max_height,
                l = self.params().max_len
            ),
            residual: max_residual,
            threshold: 1e-8,
            pass: accepted >= trials && max_residual < 1e-8,
            skip_rate: Some(skip_rate),
            seed,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }

    /// Checks the two standard-dilation properties for a unital channel:
    /// the shifted unit acts as the identity on the corner, and corner
    /// compression of every admissible catalog generator reproduces its
    /// expectation.
    pub fn verify_standard_properties(&self, seed: u64) -> Result<Vec<CheckRecord>> {
        let residual_unital = self.channel.unitality_residual();
        if residual_unital > 1e-10 {
            return Err(Error::NotUnital {
                residual: residual_unital,
            });
        }
        let d = self.d();
        let start = std::time::Instant::now();
        let shifted_unit = Generator::unit(d).shift(1);
        let mut corner_residual: f64 = 0.0;
        for j in 0..d {
            let col = self.corner_coeffs.column(j).clone_owned();
            let image = self.apply_generator_to_coefficients(&shifted_unit, &col)?;
            let moved = &self.coords * image;
            let fixed = self.corner_embed.column(j);
            corner_residual = corner_residual.max((moved - fixed).norm());
        }
        let unit_record = CheckRecord {
            name: "dilation-corner-unit".into(),
            params: format!(
                "d={d},N={},L={}",
                self.params().max_height,
                self.params().max_len
            ),
            residual: corner_residual,
            threshold: 1e-8,
            pass: corner_residual < 1e-8,
            skip_rate: None,
            seed,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        };

        let start = std::time::Instant::now();
        let mut hered_residual: f64 = 0.0;
        let mut checked = 0usize;
        for g in self.catalog.generators() {
            if !self.corner_fits(g) {
                continue;
            }
            checked += 1;
            let (compressed, _) = self.compress_product(g)?;
            let expectation = g.expectation(&self.channel)?;
            hered_residual = hered_residual.max(op_norm(&(compressed - expectation)));
        }
        let skipped = self.catalog.n_generators() - checked;
        let hered_record = CheckRecord {
            name: "dilation-hereditarity".into(),
            params: format!("generators={checked}"),
            residual: hered_residual,
            threshold: 1e-8,
            pass: hered_residual < 1e-8,
            skip_rate: Some(skipped as f64 / self.catalog.n_generators() as f64),
            seed,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        Ok(vec![unit_record, hered_record])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::gaussian_matrix;

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, Complex64::new(x, 0.0))
    }

    fn tuple(entries: &[u32]) -> IndexTuple {
        IndexTuple::new(entries.to_vec()).unwrap()
    }

    fn params(n: u32, l: usize) -> TruncationParams {
        TruncationParams::new(n, l, 1e-10).unwrap()
    }

    /// Brute-force catalog size: sum over lengths of #words * (d^2)^len.
    fn brute_force_count(d: usize, n: u32, l: usize) -> usize {
        let words = enumerate_words(&params(n, l));
        words
            .iter()
            .map(|w| (d * d).pow(w.len() as u32))
            .sum()
    }

    #[test]
    fn catalog_counts_match_the_closed_formula() {
        // (N+1) * N^(len-1) words of each length.
        for (d, n, l, expected) in [(1usize, 1u32, 1usize, 2usize), (1, 2, 2, 9), (2, 2, 2, 108)] {
            let catalog = BasisCatalog::new(d, params(n, l)).unwrap();
            assert_eq!(catalog.n_generators(), expected);
            assert_eq!(catalog.n_generators(), brute_force_count(d, n, l));
            let formula: usize = (1..=l)
                .map(|len| {
                    ((n as usize + 1) * (n as usize).pow(len as u32 - 1))
                        * (d * d).pow(len as u32)
                })
                .sum();
            assert_eq!(catalog.n_generators(), formula);
        }
    }

    #[test]
    fn catalog_order_is_lexicographic() {
        let catalog = BasisCatalog::new(1, params(1, 1)).unwrap();
        assert_eq!(catalog.generators()[0].word().entries(), &[0]);
        assert_eq!(catalog.generators()[1].word().entries(), &[1]);
    }

    #[test]
    fn identity_channel_rank_one_at_smallest_truncation() {
        let model = DilationModel::build(&Channel::id(1), params(1, 1)).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(op_norm(&(model.gram().clone() - expected)) < 1e-14);
        assert_eq!(model.rank(), 1);
    }

    #[test]
    fn scalar_half_channel_rank_two_at_smallest_truncation() {
        let phi = Channel::scalar(0.5).unwrap();
        let model = DilationModel::build(&phi, params(1, 1)).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        );
        assert!(op_norm(&(model.gram().clone() - expected)) < 1e-14);
        assert_eq!(model.rank(), 2);
    }

    #[test]
    fn corner_projection_is_an_orthogonal_projection() {
        let phi = Channel::random(2, 2, 3, true, 1.0).unwrap();
        let model = DilationModel::build(&phi, params(2, 2)).unwrap();
        assert!(model.corner_projection_residual() < 1e-10);
        assert!(model.corner_isometry_residual() < 1e-10);
    }

    #[test]
    fn corner_gram_is_the_identity() {
        let phi = Channel::random(2, 3, 5, false, 0.7).unwrap();
        let model = DilationModel::build(&phi, params(2, 2)).unwrap();
        assert!(op_norm(&(model.corner_gram().clone() - identity(4))) < 1e-10);
        assert!(model.corner_min_eig() > 1.0 - 1e-10);
    }

    #[test]
    fn clip_stays_tiny_for_random_channels() {
        for seed in 0..5 {
            let phi = Channel::random(2, 2, seed, seed % 2 == 0, 0.5).unwrap();
            let model = DilationModel::build(&phi, params(2, 2)).unwrap();
            assert!(model.clip_relative() < 1e-8, "seed {seed}");
        }
    }

    #[test]
    fn compress_identity_operator_gives_the_unit() {
        let phi = Channel::random(2, 2, 9, true, 1.0).unwrap();
        let model = DilationModel::build(&phi, params(2, 2)).unwrap();
        let x = CMatrix::identity(model.rank(), model.rank());
        let (m, residual) = model.compress_operator(&x).unwrap();
        assert!(op_norm(&(m - identity(2))) < 1e-10);
        assert!(residual < 1e-10);
    }

    #[test]
    fn compress_product_of_index_zero_acts_as_itself() {
        let phi = Channel::random(2, 2, 11, true, 1.0).unwrap();
        let model = DilationModel::build(&phi, params(2, 2)).unwrap();
        let mut rng = SplitMix64::new(4);
        let a = gaussian_matrix(2, 2, &mut rng);
        let g = Generator::make(&tuple(&[0]), vec![a.clone()]).unwrap();
        let (m, _) = model.compress_product(&g).unwrap();
        assert!(op_norm(&(m - a)) < 1e-10);
    }

    #[test]
    fn compress_product_of_shifted_element_is_the_channel() {
        let phi = Channel::random(2, 2, 13, true, 1.0).unwrap();
        let model = DilationModel::build(&phi, params(2, 2)).unwrap();
        let mut rng = SplitMix64::new(5);
        let a = gaussian_matrix(2, 2, &mut rng);
        let g = Generator::make(&tuple(&[1]), vec![a.clone()]).unwrap();
        let (m, _) = model.compress_product(&g).unwrap();
        let expected = phi.apply(&a).unwrap();
        assert!(op_norm(&(m - expected)) < 1e-10);
    }

    #[test]
    fn represent_reports_the_boundary_offender() {
        // At the smallest truncation, multiplying ((0),1) into ((1),1)
        // yields the word (0,1) of length 2 > max_len.
        let phi = Channel::scalar(0.5).unwrap();
        let model = DilationModel::build(&phi, params(1, 1)).unwrap();
        let g = Generator::make(&tuple(&[0]), vec![scalar(1.0)]).unwrap();
        match model.represent(&g) {
            Err(Error::OutOfTruncation { basis, .. }) => {
                assert!(basis.contains("(1)"), "offender was {basis}")
            }
            other => panic!("expected OutOfTruncation, got {other:?}"),
        }
    }

    #[test]
    fn partial_representation_of_the_unit_fixes_zero_words() {
        let phi = Channel::random(2, 2, 17, true, 1.0).unwrap();
        let model = DilationModel::build(&phi, params(2, 2)).unwrap();
        let unit = Generator::unit(2);
        let rep = model.represent_partial(&unit).unwrap();
        assert!(rep.welldef_residual < 1e-8);
        // On every in-domain basis vector whose word starts with zero the
        // operator acts as the identity.
        for &b in &rep.domain {
            let gen_idx = b / 2;
            let word = model.catalog().generators()[gen_idx].word().clone();
            if word.first() != 0 {
                continue;
            }
            let src = model.coords().column(b).clone_owned();
            let out = &rep.matrix * &src;
            assert!((out - src).norm() < 1e-8);
        }
    }

    #[test]
    fn adjoint_compatibility_on_in_truncation_pairs() {
        let phi = Channel::random(2, 2, 19, true, 1.0).unwrap();
        let model = DilationModel::build(&phi, params(2, 2)).unwrap();
        let mut rng = SplitMix64::new(6);
        let a = gaussian_matrix(2, 2, &mut rng);
        let g = Generator::make(&tuple(&[1]), vec![a]).unwrap();
        let g_star = g.involution();
        let n_basis = model.catalog().n_basis();

        let mut left_images = Vec::new();
        let mut right_images = Vec::new();
        for b in 0..n_basis {
            let eb = unit_vector(n_basis, b);
            if let Ok(gb) = model.apply_generator_to_coefficients(&g, &eb) {
                left_images.push((b, gb));
            }
            if let Ok(gsb) = model.apply_generator_to_coefficients(&g_star, &eb) {
                right_images.push((b, model.gram() * gsb));
            }
        }
        assert!(!left_images.is_empty() && !right_images.is_empty());
        // <g xi, eta> = <xi, g* eta> in the kernel form, for every pair of
        // basis vectors whose products stay inside the truncation.
        let mut checked = 0usize;
        for (b, gb) in &left_images {
            for (b2, k_gsb2) in &right_images {
                let lhs = model.gram().column(*b2).dotc(gb);
                let rhs = k_gsb2[*b].conj();
                assert!((lhs - rhs).norm() < 1e-8, "pair ({b}, {b2})");
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    fn unit_vector(n: usize, idx: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[idx] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn representation_respects_products_on_corner_columns() {
        let phi = Channel::random(2, 2, 23, true, 1.0).unwrap();
        let model = DilationModel::build(&phi, params(2, 2)).unwrap();
        let mut rng = SplitMix64::new(7);
        let a = gaussian_matrix(2, 2, &mut rng);
        let b = gaussian_matrix(2, 2, &mut rng);
        let g = Generator::make(&tuple(&[1]), vec![a]).unwrap();
        let h = Generator::make(&tuple(&[0]), vec![b]).unwrap();
        let gh = g.product(&h).unwrap();
        for j in 0..2 {
            let col = model.corner_coeffs.column(j).clone_owned();
            let step = model.apply_generator_to_coefficients(&h, &col).unwrap();
            let two = model.apply_generator_to_coefficients(&g, &step).unwrap();
            let direct = model.apply_generator_to_coefficients(&gh, &col).unwrap();
            let lhs = model.coords() * two;
            let rhs = model.coords() * direct;
            assert!((lhs - rhs).norm() < 1e-8);
        }
    }

    #[test]
    fn moment_formula_two_path_agreement() {
        let phi = Channel::random(2, 2, 7, true, 1.0).unwrap();
        let model = DilationModel::build(&phi, TruncationParams::default()).unwrap();
        let record = model.verify_moment_formula(100, 99).unwrap();
        assert!(record.pass, "{}", record.summary_line());
        assert!(record.residual < 1e-8);
    }

    #[test]
    fn standard_properties_hold_for_unital_channels() {
        let phi = Channel::random(2, 2, 29, true, 1.0).unwrap();
        let model = DilationModel::build(&phi, TruncationParams::default()).unwrap();
        let records = model.verify_standard_properties(1).unwrap();
        for r in &records {
            assert!(r.pass, "{}", r.summary_line());
        }
    }

    #[test]
    fn standard_properties_require_unitality() {
        let phi = Channel::scalar(0.5).unwrap();
        let model = DilationModel::build(&phi, params(1, 2)).unwrap();
        assert!(matches!(
            model.verify_standard_properties(1),
            Err(Error::NotUnital { .. })
        ));
    }

    #[test]
    fn enlarging_the_truncation_preserves_corner_values() {
        let phi = Channel::random(2, 2, 41, true, 1.0).unwrap();
        let small = DilationModel::build(&phi, params(2, 2)).unwrap();
        let taller = DilationModel::build(&phi, params(3, 2)).unwrap();
        let mut rng = SplitMix64::new(8);
        for _ in 0..10 {
            let k = 1 + rng.next_below(3) as usize;
            let entries: Vec<u32> = (0..k).map(|_| rng.next_below(3)).collect();
            let mats: Vec<CMatrix> = (0..k).map(|_| gaussian_matrix(2, 2, &mut rng)).collect();
            let g = Generator::make(&tuple(&entries), mats).unwrap();
            if !small.corner_fits(&g) {
                continue;
            }
            let (m_small, _) = small.compress_product(&g).unwrap();
            let (m_tall, _) = taller.compress_product(&g).unwrap();
            assert!(op_norm(&(m_small - m_tall)) < 1e-8);
        }

        let phi1 = Channel::random(2, 2, 43, true, 1.0).unwrap();
        let narrow = DilationModel::build(&phi1, params(1, 2)).unwrap();
        let longer = DilationModel::build(&phi1, params(1, 3)).unwrap();
        for _ in 0..10 {
            let k = 1 + rng.next_below(3) as usize;
            let entries: Vec<u32> = (0..k).map(|_| rng.next_below(2)).collect();
            let mats: Vec<CMatrix> = (0..k).map(|_| gaussian_matrix(2, 2, &mut rng)).collect();
            let g = Generator::make(&tuple(&entries), mats).unwrap();
            if !narrow.corner_fits(&g) {
                continue;
            }
            let (m_narrow, _) = narrow.compress_product(&g).unwrap();
            let (m_long, _) = longer.compress_product(&g).unwrap();
            assert!(op_norm(&(m_narrow - m_long)) < 1e-8);
        }
    }
}
