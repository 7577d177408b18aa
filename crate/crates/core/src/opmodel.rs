//! Step-function model of the multiplication tuple on `L^2(C_f, H_f)`.
//!
//! At model depth `M` every generation-`M` cell carries one basis vector and
//! the coordinate operators `T_j` act diagonally by the anchor-corner
//! coordinate of the cell. `P_L` averages over the fine cells of each
//! generation-`L` block. Because all cells have equal weight, `[P_L, T_j]`
//! restricted to a block of `K` cells with coordinates `d` is
//! `(1/K)(1 d^T - d 1^T)`: rank two with both singular values equal to the
//! population standard deviation of `d`.

use std::collections::HashSet;
use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fractal::{corner_bit, CantorComplex, Word, MAX_CELLS};
use crate::seqnorm::WeightSequence;

/// Values below `SPECTRUM_CUTOFF * max` are dropped from spectra.
pub const SPECTRUM_CUTOFF: f64 = 1e-12;
/// Largest model accepted by the dense SVD oracle.
pub const BRUTE_FORCE_MAX_CELLS: usize = 4096;

/// Nonincreasing list of nonnegative singular values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    /// Validates an already-sorted spectrum.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "singular values must be finite and >= 0".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "singular values must be nonincreasing".into(),
            ));
        }
        Ok(SingularSpectrum { values })
    }

    /// Sorts (stable, descending) and drops values below the relative cutoff.
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        let max = values.iter().cloned().fold(0.0, f64::max);
        values.retain(|v| *v > 0.0 && *v >= SPECTRUM_CUTOFF * max);
        values.sort_by(|a, b| b.total_cmp(a));
        SingularSpectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest singular value (operator norm), 0 when empty.
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn phi_norm(&self, pi: &WeightSequence) -> Result<f64> {
        pi.norm_of_sorted(&self.values)
    }

    /// Spectrum of `X (x) I_m`: every value repeated `m` times.
    pub fn ampliate(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "ampliation factor must be >= 1".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, m))
            .collect();
        Ok(SingularSpectrum { values })
    }
}

/// Free-function form of [`SingularSpectrum::ampliate`].
pub fn ampliate_spectrum(xs: &SingularSpectrum, m: usize) -> Result<SingularSpectrum> {
    xs.ampliate(m)
}

/// Diagonal data of the multiplication tuple at a fixed model depth.
#[derive(Debug, Clone)]
pub struct FiniteModel {
    complex: CantorComplex,
    depth: usize,
    // `cells * depth` letters, lexicographically ordered by cell
    letters: Vec<u32>,
    // `cells * n` anchor coordinates
    coords: Vec<f64>,
    weight: f64,
}

impl FiniteModel {
    /// All `2^{nM}` depth-`M` cells of the complex.
    pub fn build(complex: &CantorComplex, depth: usize) -> Result<Self> {
        Self::from_words(complex, depth, &[Word::root(complex.n())])
    }

    /// Depth-`M` descendants of the given equal-length words; weights stay `2^{-nM}`.
    pub fn from_words(complex: &CantorComplex, depth: usize, words: &[Word]) -> Result<Self> {
        if depth > complex.depth() {
            return Err(Error::DepthExceeded {
                requested: depth,
                available: complex.depth(),
            });
        }
        let base_len = check_uniform(complex, words, depth)?;
        let mut base: Vec<&Word> = words.iter().collect();
        base.sort();
        base.dedup();

        let n = complex.n();
        let per_word = complex.cell_count(depth - base_len);
        let total = per_word * base.len() as u128;
        if total > MAX_CELLS || n * depth >= 64 {
            return Err(Error::Size {
                what: "model cells",
                requested: total,
                limit: MAX_CELLS,
            });
        }
        let alphabet = 1u64 << n;
        let suffix_len = depth - base_len;
        let mut letters = Vec::with_capacity(total as usize * depth);
        for w in base {
            for index in 0..per_word as u64 {
                letters.extend_from_slice(w.letters());
                let start = letters.len();
                letters.resize(start + suffix_len, 0);
                let mut rest = index;
                for slot in letters[start..].iter_mut().rev() {
                    *slot = (rest % alphabet) as u32 + 1;
                    rest /= alphabet;
                }
            }
        }
        let offsets: Vec<f64> = (1..=depth).map(|m| complex.child_offset(m)).collect();
        let coords = letters
            .chunks(depth.max(1))
            .take(total as usize)
            .flat_map(|word| anchor(word, &offsets, n))
            .collect::<Vec<f64>>();
        let coords = if depth == 0 { vec![0.0; n] } else { coords };
        Ok(FiniteModel {
            complex: complex.clone(),
            depth,
            letters,
            coords,
            weight: 2f64.powi(-((n * depth) as i32)),
        })
    }

    /// Sub-model of the cells descending from any of `cells` (equal length `<= M`).
    pub fn restrict(&self, cells: &[Word]) -> Result<Self> {
        let level = check_uniform(&self.complex, cells, self.depth)?;
        let keep: HashSet<&[u32]> = cells.iter().map(|w| w.letters()).collect();
        let n = self.n();
        let mut letters = Vec::new();
        let mut coords = Vec::new();
        for i in 0..self.cell_count() {
            let word = self.letters_of(i);
            if keep.contains(&word[..level]) {
                letters.extend_from_slice(word);
                coords.extend_from_slice(&self.coords[i * n..(i + 1) * n]);
            }
        }
        if coords.is_empty() {
            return Err(Error::EmptySelection(
                "no model cell lies under the selected words".into(),
            ));
        }
        Ok(FiniteModel {
            complex: self.complex.clone(),
            depth: self.depth,
            letters,
            coords,
            weight: self.weight,
        })
    }

    pub fn complex(&self) -> &CantorComplex {
        &self.complex
    }

    pub fn n(&self) -> usize {
        self.complex.n()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cell_count(&self) -> usize {
        self.coords.len() / self.n()
    }

    /// Common measure `2^{-nM}` of each cell.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Total measure of the modelled set.
    pub fn total_measure(&self) -> f64 {
        self.weight * self.cell_count() as f64
    }

    fn letters_of(&self, cell: usize) -> &[u32] {
        &self.letters[cell * self.depth..(cell + 1) * self.depth]
    }

    pub fn word(&self, cell: usize) -> Word {
        Word::new(self.n(), self.letters_of(cell).to_vec()).expect("model words are valid")
    }

    pub fn coords(&self, cell: usize) -> &[f64] {
        &self.coords[cell * self.n()..(cell + 1) * self.n()]
    }

    /// Per-axis error of representing `x_j` by the anchor corner: `lambda_M`.
    pub fn discretization_error(&self) -> f64 {
        self.complex.lambda(self.depth)
    }

    /// Contiguous cell ranges sharing their first `level` letters.
    pub fn blocks(&self, level: usize) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.cell_count() {
            if i == self.cell_count()
                || self.letters_of(i)[..level] != self.letters_of(start)[..level]
            {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    fn check_projection(&self, level: usize, axis: Option<usize>) -> Result<()> {
        if level > self.depth {
            return Err(Error::DepthExceeded {
                requested: level,
                available: self.depth,
            });
        }
        if let Some(j) = axis {
            if j >= self.n() {
                return Err(Error::InvalidArgument(format!(
                    "axis {j} out of range 0..{}",
                    self.n()
                )));
            }
        }
        Ok(())
    }

    /// Singular values of `[P_L, T_j]` from the block standard deviations.
    /// `L = M` gives `P_L = I` and an empty spectrum.
    pub fn commutator_spectrum_analytic(
        &self,
        level: usize,
        axis: usize,
    ) -> Result<SingularSpectrum> {
        self.check_projection(level, Some(axis))?;
        Ok(self.block_spectra(level).swap_remove(axis))
    }

    /// Spectra of `[P_L, T_j]` for every axis.
    pub fn commutator_spectra(&self, level: usize) -> Result<Vec<SingularSpectrum>> {
        self.check_projection(level, None)?;
        Ok(self.block_spectra(level))
    }

    fn block_spectra(&self, level: usize) -> Vec<SingularSpectrum> {
        let n = self.n();
        let offsets: Vec<f64> = (level + 1..=self.depth)
            .map(|m| self.complex.child_offset(m))
            .collect();
        // Coordinates are rebuilt relative to the block anchor from the word
        // suffix and sorted per axis, so congruent blocks and symmetric axes give
        // bit-identical deviations.
        let sigmas: Vec<Vec<f64>> = self
            .blocks(level)
            .into_par_iter()
            .map(|range| {
                let k = range.len() as f64;
                let rel: Vec<Vec<f64>> = range
                    .clone()
                    .map(|cell| anchor(&self.letters_of(cell)[level..], &offsets, n))
                    .collect();
                (0..n)
                    .map(|axis| {
                        let mut d: Vec<f64> = rel.iter().map(|c| c[axis]).collect();
                        d.sort_by(f64::total_cmp);
                        let mean = d.iter().sum::<f64>() / k;
                        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
                        var.sqrt()
                    })
                    .collect()
            })
            .collect();
        (0..n)
            .map(|axis| {
                let values = sigmas
                    .iter()
                    .filter(|s| s[axis] > 0.0)
                    .flat_map(|s| [s[axis], s[axis]])
                    .collect();
                SingularSpectrum::from_unsorted(values)
            })
            .collect()
    }

    /// Dense oracle: assembles `P_L` and `diag(x_j)` in the orthonormal
    /// step-function basis and takes a full SVD of the commutator.
    pub fn commutator_spectrum_bruteforce(
        &self,
        level: usize,
        axis: usize,
    ) -> Result<SingularSpectrum> {
        self.check_projection(level, Some(axis))?;
        let cells = self.cell_count();
        if cells > BRUTE_FORCE_MAX_CELLS {
            return Err(Error::Size {
                what: "dense commutator",
                requested: cells as u128,
                limit: BRUTE_FORCE_MAX_CELLS as u128,
            });
        }
        let mut p = DMatrix::<f64>::zeros(cells, cells);
        for block in self.blocks(level) {
            let mass = self.weight * block.len() as f64;
            for a in block.clone() {
                for b in block.clone() {
                    p[(a, b)] = self.weight / mass;
                }
            }
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            cells,
            (0..cells).map(|c| self.coords(c)[axis]),
        ));
        let commutator = &p * &d - &d * &p;
        let values = commutator.singular_values().iter().copied().collect();
        Ok(SingularSpectrum::from_unsorted(values))
    }

    /// Per-axis `Phi_pi` norms of `[P_L, tau]` plus the operator-norm bound.
    pub fn commutator_norms(&self, level: usize, pi: &WeightSequence) -> Result<CommutatorReport> {
        let spectra = self.commutator_spectra(level)?;
        let norms = spectra
            .iter()
            .map(|s| s.phi_norm(pi))
            .collect::<Result<Vec<f64>>>()?;
        Ok(CommutatorReport {
            level,
            blocks: self.blocks(level).len(),
            tuple_norm: norms.iter().cloned().fold(0.0, f64::max),
            operator_norm: spectra
                .iter()
                .map(SingularSpectrum::max)
                .fold(0.0, f64::max),
            sup_norm_bound: 2.0 * self.complex.cell_diameter(level),
            discretization_error: self.discretization_error(),
            norms,
            spectra,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    pub level: usize,
    pub blocks: usize,
    pub spectra: Vec<SingularSpectrum>,
    pub norms: Vec<f64>,
    /// `max_j |[P_L, T_j]|_pi`
    pub tuple_norm: f64,
    /// `max_j ||[P_L, T_j]||`
    pub operator_norm: f64,
    /// `2 lambda_L sqrt(n)`
    pub sup_norm_bound: f64,
    pub discretization_error: f64,
}

// Anchor corner of a word relative to its first letter's parent.
fn anchor(word: &[u32], offsets: &[f64], n: usize) -> Vec<f64> {
    let mut corner = vec![0.0; n];
    for (letter, offset) in word.iter().zip(offsets) {
        for (axis, c) in corner.iter_mut().enumerate() {
            if corner_bit(*letter, n, axis) == 1 {
                *c += offset;
            }
        }
    }
    corner
}

fn check_uniform(complex: &CantorComplex, words: &[Word], depth: usize) -> Result<usize> {
    let first = words
        .first()
        .ok_or_else(|| Error::EmptySelection("no cells selected".into()))?;
    let level = first.len();
    if words.iter().any(|w| w.len() != level) {
        return Err(Error::InvalidArgument(
            "selected words must have equal length".into(),
        ));
    }
    if words.iter().any(|w| w.n() != complex.n()) {
        return Err(Error::InvalidWord(
            "word dimension differs from the complex".into(),
        ));
    }
    if level > depth {
        return Err(Error::DepthExceeded {
            requested: level,
            available: depth,
        });
    }
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GaugeSpec;

    fn complex(s: f64, depth: usize) -> CantorComplex {
        CantorComplex::build(GaugeSpec::power(s).unwrap(), depth, None).unwrap()
    }

    #[test]
    fn build_examples() {
        let m = FiniteModel::build(&complex(1.0, 2), 1).unwrap();
        assert_eq!(m.cell_count(), 4);
        let got: Vec<&[f64]> = (0..4).map(|c| m.coords(c)).collect();
        assert_eq!(got, [[0.0, 0.0], [0.0, 0.75], [0.75, 0.0], [0.75, 0.75]]);

        let m = FiniteModel::build(&complex(1.5, 5), 5).unwrap();
        assert_eq!(m.coords(0), [0.0, 0.0]);
        assert_eq!(m.word(0).letters(), [1; 5]);
        assert_eq!(m.total_measure(), 1.0);

        let big = complex(1.0, 11);
        assert!(matches!(
            FiniteModel::build(&big, 11),
            Err(Error::Size { .. })
        ));
        assert!(FiniteModel::build(&big, 10).is_ok());
    }

    #[test]
    fn model_order_matches_enumeration() {
        let c = complex(1.5, 3);
        let m = FiniteModel::build(&c, 3).unwrap();
        for (i, w) in c.enumerate_words(3).unwrap().iter().enumerate() {
            assert_eq!(&m.word(i), w);
            assert_eq!(m.coords(i), c.cell_geometry(w).unwrap().corner.as_slice());
        }
    }

    #[test]
    fn spectrum_sorting() {
        let s = SingularSpectrum::from_unsorted(vec![0.1, 0.5, 1e-20, 0.0, 0.5]);
        assert_eq!(s.values(), [0.5, 0.5, 0.1]);
        assert!(SingularSpectrum::from_unsorted(vec![0.0; 3]).is_empty());
    }

    #[test]
    fn analytic_example() {
        let m = FiniteModel::build(&complex(1.0, 2), 2).unwrap();
        let s = m.commutator_spectrum_analytic(1, 0).unwrap();
        assert_eq!(s.values(), [0.09375; 8]);
        let brute = m.commutator_spectrum_bruteforce(1, 0).unwrap();
        assert_eq!(brute.len(), 8);
        assert!(brute.values().iter().all(|v| (v - 0.09375).abs() < 1e-12));
    }

    #[test]
    fn degenerate_projections() {
        let m = FiniteModel::build(&complex(1.5, 3), 3).unwrap();
        assert!(m.commutator_spectrum_analytic(3, 0).unwrap().is_empty());
        assert!(m.commutator_spectrum_bruteforce(3, 1).unwrap().is_empty());
        assert!(m.commutator_spectrum_analytic(4, 0).is_err());
        assert!(m.commutator_spectrum_analytic(1, 2).is_err());

        let root = FiniteModel::build(&complex(1.5, 3), 0).unwrap();
        assert_eq!(root.cell_count(), 1);
        assert!(root.commutator_spectrum_analytic(0, 0).unwrap().is_empty());
        assert!(root
            .commutator_spectrum_bruteforce(0, 0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn constant_block_contributes_nothing() {
        let c = complex(1.5, 3);
        let m = FiniteModel::from_words(&c, 2, &[Word::new(2, vec![2, 3]).unwrap()]).unwrap();
        assert_eq!(m.cell_count(), 1);
        assert!(m.commutator_spectrum_analytic(1, 0).unwrap().is_empty());
    }

    #[test]
    fn norms_example() {
        let m = FiniteModel::build(&complex(1.0, 2), 2).unwrap();
        let ones = WeightSequence::custom(vec![1.0; 8]).unwrap();
        let r = m.commutator_norms(1, &ones).unwrap();
        assert_eq!(r.norms, [0.75, 0.75]);
        assert_eq!(r.tuple_norm, 0.75);
        assert_eq!(r.operator_norm, 0.09375);
        assert_eq!(r.sup_norm_bound, 2.0 * 0.25 * 2f64.sqrt());

        let op = WeightSequence::custom(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.commutator_norms(1, &op).unwrap().tuple_norm, 0.09375);

        let short = WeightSequence::custom(vec![1.0; 7]).unwrap();
        assert!(matches!(
            m.commutator_norms(1, &short),
            Err(Error::InsufficientWeights { needed: 8, .. })
        ));
    }

    #[test]
    fn ampliation() {
        let x = SingularSpectrum::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(ampliate_spectrum(&x, 3).unwrap().values(), [0.5; 6]);
        assert_eq!(x.ampliate(1).unwrap(), x);
        assert!(x.ampliate(0).is_err());
        let y = SingularSpectrum::new(vec![0.9, 0.4, 0.1]).unwrap();
        let ones = WeightSequence::custom(vec![1.0; 12]).unwrap();
        let base = y.phi_norm(&ones).unwrap();
        assert!((y.ampliate(4).unwrap().phi_norm(&ones).unwrap() - 4.0 * base).abs() < 1e-15);
        assert!(SingularSpectrum::new(vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn restriction() {
        let c = complex(1.5, 4);
        let full = FiniteModel::build(&c, 3).unwrap();
        let all = c.enumerate_words(1).unwrap();
        let same = full.restrict(&all).unwrap();
        assert_eq!(same.coords, full.coords);
        assert_eq!(same.letters, full.letters);

        let two = full.restrict(&all[1..3]).unwrap();
        assert_eq!(two.cell_count(), 2 * 16);
        assert_eq!(two.weight(), full.weight());
        assert!(full.restrict(&[]).is_err());

        let direct = FiniteModel::from_words(&c, 3, &all[1..3]).unwrap();
        assert_eq!(direct.coords, two.coords);
    }

    #[test]
    fn single_cell_is_scaled_root() {
        let c = complex(1.5, 6);
        let w = Word::new(2, vec![3]).unwrap();
        let sub = FiniteModel::from_words(&c, 5, &[w]).unwrap();
        let root = FiniteModel::build(&c, 4).unwrap();
        let l1 = c.lambda(1);
        let a = sub.commutator_spectrum_analytic(3, 0).unwrap();
        let b = root.commutator_spectrum_analytic(2, 0).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - l1 * y).abs() <= 1e-12 * x);
        }
    }

    #[test]
    fn axes_agree() {
        for g in [GaugeSpec::power(1.5).unwrap(), GaugeSpec::Example37] {
            let c = CantorComplex::build(g, 4, None).unwrap();
            let m = FiniteModel::build(&c, 4).unwrap();
            for level in 0..4 {
                let s = m.commutator_spectra(level).unwrap();
                assert_eq!(s[0], s[1]);
            }
        }
    }
}
