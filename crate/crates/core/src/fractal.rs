//! The symmetric generalized Cantor set `C_f` in `R^n`.
//!
//! Generation `m` keeps `2^m` closed intervals of length
//! `lambda_m = f^{-1}(2^{-n m})` per axis. A generation-`L` cell is indexed by
//! a word of `L` letters in `1..=2^n`; letter `k` picks the `k`-th corner of the
//! parent cell in lexicographic order of `{0,1}^n` (first axis most significant).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::GaugeSpec;
use crate::numfmt;

/// Upper bound on materialized cells (enumerations, models).
pub const MAX_CELLS: u128 = 1 << 20;
// 2^{-n m} must stay a normal double
const MAX_EXPONENT: usize = 1000;

/// Address of a generation cell `C_f^w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    n: usize,
    letters: Vec<u32>,
}

impl Word {
    pub fn new(n: usize, letters: Vec<u32>) -> Result<Self> {
        if n == 0 || n > 31 {
            return Err(Error::InvalidWord(format!(
                "dimension n = {n} out of range"
            )));
        }
        let alphabet = 1u32 << n;
        if let Some(bad) = letters.iter().find(|&&l| l == 0 || l > alphabet) {
            return Err(Error::InvalidWord(format!(
                "letter {bad} outside 1..={alphabet}"
            )));
        }
        Ok(Word { n, letters })
    }

    /// The empty word, addressing all of `C_f`.
    pub fn root(n: usize) -> Self {
        Word {
            n,
            letters: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn child(&self, letter: u32) -> Result<Word> {
        let mut letters = self.letters.clone();
        letters.push(letter);
        Word::new(self.n, letters)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.n == other.n && other.letters.starts_with(&self.letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "root");
        }
        let parts: Vec<String> = self.letters.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Bit of `letter` along `axis` (0-based) in an alphabet of `2^n` corners.
#[inline]
pub fn corner_bit(letter: u32, n: usize, axis: usize) -> u32 {
    ((letter - 1) >> (n - 1 - axis)) & 1
}

/// Anchor corner and side length of a cell's bounding box `[corner, corner + side]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub corner: Vec<f64>,
    pub side: f64,
}

/// Length tables of `C_f` up to a fixed generation.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorComplex {
    gauge: GaugeSpec,
    n: usize,
    depth: usize,
    lambda: Vec<f64>,
    eta: Vec<f64>,
}

impl CantorComplex {
    /// Builds the tables `lambda_m = f^{-1}(2^{-n m})` and `eta_m = lambda_{m-1} - 2 lambda_m`
    /// for `m <= depth`. `n` defaults to `floor(s) + 1`.
    pub fn build(gauge: GaugeSpec, depth: usize, n_override: Option<usize>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument("depth must be >= 1".into()));
        }
        let n = n_override.unwrap_or(gauge.index().floor() as usize + 1);
        if n == 0 || n > 20 {
            return Err(Error::InvalidArgument(format!(
                "dimension n = {n} out of range 1..=20"
            )));
        }
        if n * depth > MAX_EXPONENT {
            return Err(Error::Size {
                what: "generation exponent n * depth",
                requested: (n * depth) as u128,
                limit: MAX_EXPONENT as u128,
            });
        }

        let mut lambda = Vec::with_capacity(depth + 1);
        lambda.push(1.0);
        for m in 1..=depth {
            let y = 2f64.powi(-((n * m) as i32));
            lambda.push(gauge.inverse(y)?);
        }
        let mut eta = vec![0.0];
        for m in 1..=depth {
            let gap = lambda[m - 1] - 2.0 * lambda[m];
            if !(gap > 0.0) {
                return Err(Error::Infeasible {
                    generation: m,
                    parent: lambda[m - 1],
                    twice_child: 2.0 * lambda[m],
                });
            }
            eta.push(gap);
        }
        Ok(CantorComplex {
            gauge,
            n,
            depth,
            lambda,
            eta,
        })
    }

    pub fn gauge(&self) -> GaugeSpec {
        self.gauge
    }

    pub fn s(&self) -> f64 {
        self.gauge.index()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `lambda_m`, with `lambda_0 = 1`.
    pub fn lambda(&self, m: usize) -> f64 {
        self.lambda[m]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    /// Gap `eta_m` removed from each generation-`(m-1)` interval, `m >= 1`.
    pub fn eta(&self, m: usize) -> f64 {
        assert!(m >= 1, "eta is defined for m >= 1");
        self.eta[m]
    }

    /// Offset of a "high" child inside its parent along one axis: `lambda_{m-1} - lambda_m`.
    pub fn child_offset(&self, m: usize) -> f64 {
        self.lambda[m - 1] - self.lambda[m]
    }

    /// Number of cells of generation `level`, `2^{n level}`.
    pub fn cell_count(&self, level: usize) -> u128 {
        1u128 << (self.n * level).min(127)
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.depth {
            Err(Error::DepthExceeded {
                requested: level,
                available: self.depth,
            })
        } else {
            Ok(())
        }
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if w.n() != self.n {
            return Err(Error::InvalidWord(format!(
                "word dimension {} differs from complex dimension {}",
                w.n(),
                self.n
            )));
        }
        self.check_level(w.len())
    }

    /// All `2^{n L}` words of length `L` in lexicographic order.
    pub fn enumerate_words(&self, level: usize) -> Result<Vec<Word>> {
        self.check_level(level)?;
        let count = self.cell_count(level);
        if count > MAX_CELLS || self.n * level >= 64 {
            return Err(Error::Size {
                what: "word enumeration",
                requested: count,
                limit: MAX_CELLS,
            });
        }
        let alphabet = 1u64 << self.n;
        let words = (0..count as u64)
            .map(|mut index| {
                let mut letters = vec![0u32; level];
                for slot in letters.iter_mut().rev() {
                    *slot = (index % alphabet) as u32 + 1;
                    index /= alphabet;
                }
                Word { n: self.n, letters }
            })
            .collect();
        Ok(words)
    }

    /// Anchor corner of `C_f^w` and its side `lambda_{|w|}`.
    pub fn cell_geometry(&self, w: &Word) -> Result<CellGeometry> {
        self.check_word(w)?;
        let mut corner = vec![0.0; self.n];
        for (i, &letter) in w.letters().iter().enumerate() {
            let offset = self.child_offset(i + 1);
            for (axis, c) in corner.iter_mut().enumerate() {
                if corner_bit(letter, self.n, axis) == 1 {
                    *c += offset;
                }
            }
        }
        Ok(CellGeometry {
            corner,
            side: self.lambda[w.len()],
        })
    }

    /// Normalized measure `2^{-n |w|}` (with `H_f(C_f) = 1`).
    pub fn cell_measure(&self, w: &Word) -> f64 {
        2f64.powi(-((self.n * w.len()) as i32))
    }

    /// `lambda_{|w|} sqrt(n)`, the diameter of the cell's bounding box.
    pub fn cell_diameter(&self, level: usize) -> f64 {
        self.lambda[level] * (self.n as f64).sqrt()
    }

    /// Covering estimate `sum f(r)` with one ball of radius `lambda_{|w|+d} sqrt(n) / 2`
    /// per generation-`(|w| + d)` subcell of `w`.
    pub fn hausdorff_cover_estimate(&self, w: &Word, extra_depth: usize) -> Result<f64> {
        self.check_word(w)?;
        let level = w.len() + extra_depth;
        self.check_level(level)?;
        let radius = 0.5 * self.cell_diameter(level);
        let balls = 2f64.powi((self.n * extra_depth) as i32);
        Ok(balls * self.gauge.eval(radius)?)
    }

    /// Records `(word, corner, side, measure)` for every generation-`L` cell.
    pub fn export_geometry(&self, level: usize) -> Result<GeometryDocument> {
        let records = self
            .enumerate_words(level)?
            .into_iter()
            .map(|w| {
                let geom = self.cell_geometry(&w)?;
                Ok(GeometryRecord {
                    measure: self.cell_measure(&w),
                    word: w.letters,
                    corner: geom.corner,
                    side: geom.side,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GeometryDocument {
            gauge: self.gauge.to_string(),
            n: self.n,
            level,
            records,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryRecord {
    pub word: Vec<u32>,
    pub corner: Vec<f64>,
    pub side: f64,
    pub measure: f64,
}

/// Serializable cell list for one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDocument {
    pub gauge: String,
    pub n: usize,
    pub level: usize,
    pub records: Vec<GeometryRecord>,
}

impl GeometryDocument {
    pub fn to_json(&self) -> Result<String> {
        numfmt::to_json_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
