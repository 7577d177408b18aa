//! Experiment drivers. Each returns tabular rows plus verdicts of the form
//! `measured <= tolerance`, with `slack = tolerance - measured`.
//!
//! Every modulus quantity here is an upper estimate from the canonical
//! averaging projections `P_L`; `H_f(C_f)` is normalized to 1.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractal::{CantorComplex, Word};
use crate::opmodel::FiniteModel;
use crate::seqnorm::{obstruction_window, WeightSequence};

/// Ratio spread allowed across small-set families.
pub const SMALL_SET_SPREAD: f64 = 4.0;
/// Relative tolerance for the gauge sub-cube scaling law outside the power family.
pub const NONPOWER_SCALING_TOL: f64 = 0.10;
/// Relative tolerance for the exact power-gauge scaling law.
pub const POWER_SCALING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub invariant: String,
    pub tolerance: f64,
    pub measured: f64,
    pub slack: f64,
    pub pass: bool,
    /// A failing fatal verdict makes the run fail; others are reported only.
    pub fatal: bool,
    pub detail: String,
}

impl Verdict {
    pub fn at_most(
        invariant: &str,
        measured: f64,
        tolerance: f64,
        fatal: bool,
        detail: String,
    ) -> Self {
        Verdict {
            invariant: invariant.to_string(),
            tolerance,
            measured,
            slack: tolerance - measured,
            pass: measured <= tolerance,
            fatal,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(x) => Some(*x),
            Value::Text(_) => None,
        }
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub id: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl ExperimentResult {
    fn new(id: &str, columns: &[&str]) -> Self {
        ExperimentResult {
            id: id.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Numeric column by name; text cells are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().filter_map(|r| r[i].as_f64()).collect())
    }

    pub fn verdict(&self, invariant: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.invariant == invariant)
    }

    pub fn fatal_failures(&self) -> Vec<&Verdict> {
        self.verdicts
            .iter()
            .filter(|v| v.fatal && !v.pass)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.fatal_failures().is_empty()
    }
}

fn check_levels(levels: &RangeInclusive<usize>, model_depth: usize) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("empty level range".into()));
    }
    if *levels.start() == 0 {
        return Err(Error::Domain {
            what: "projection level L",
            value: 0.0,
            allowed: "L >= 1".into(),
        });
    }
    if *levels.end() >= model_depth {
        return Err(Error::DepthExceeded {
            requested: *levels.end(),
            available: model_depth - 1,
        });
    }
    Ok(())
}

fn fmt_ratio(x: f64) -> String {
    format!("{x:.6e}")
}

/// `U(L) = max_j |[P_L, T_j]|_pi` for each `L`, against the sup-norm bound
/// `2 lambda_L sqrt(n)` and the prefix-sum bound `2 lambda_L sqrt(n) sum_{k <= 2^{nL}} pi_k`.
pub fn k_upper_curve(
    complex: &CantorComplex,
    pi: &WeightSequence,
    model_depth: usize,
    levels: RangeInclusive<usize>,
) -> Result<ExperimentResult> {
    check_levels(&levels, model_depth)?;
    let model = FiniteModel::build(complex, model_depth)?;
    let sums = pi.prefix_sums();
    let mut out = ExperimentResult::new(
        "k_upper",
        &["L", "cells", "norm", "supnorm_bound", "lemma31_bound"],
    );
    let mut worst_sup: f64 = 0.0;
    let mut worst_prefix: f64 = 0.0;
    let mut norms = Vec::new();
    for level in levels.clone() {
        let report = model.commutator_norms(level, pi)?;
        let cells = complex.cell_count(level) as usize;
        let prefix_bound = report.sup_norm_bound * sums[cells.min(sums.len()) - 1];
        worst_sup = worst_sup.max(report.operator_norm / report.sup_norm_bound);
        worst_prefix = worst_prefix.max(report.tuple_norm / prefix_bound);
        norms.push(report.tuple_norm);
        out.rows.push(vec![
            level.into(),
            cells.into(),
            report.tuple_norm.into(),
            report.sup_norm_bound.into(),
            prefix_bound.into(),
        ]);
    }
    out.verdicts.push(Verdict::at_most(
        "operator_norm_within_supnorm_bound",
        worst_sup,
        1.0,
        true,
        "max over L of ||[P_L, T_j]|| / (2 lambda_L sqrt(n))".into(),
    ));
    out.verdicts.push(Verdict::at_most(
        "norm_within_prefix_sum_bound",
        worst_prefix,
        1.0,
        true,
        "max over L of U(L) / (2 lambda_L sqrt(n) sum_{k <= 2^{nL}} pi_k)".into(),
    ));

    let top = complex.cell_count(*levels.end()) as u64;
    let first = pi.start_index();
    let last = (first + pi.len() as u64 - 1).min(first.max(top));
    let window = obstruction_window(&complex.gauge(), pi, first..=last)?;
    let alpha = pi.regularity_alpha((last - first + 1) as usize)?;
    out.notes.push(format!(
        "window on [{first}, {last}]: inf {} (m = {}), sup {} (m = {}); regularity alpha {}",
        fmt_ratio(window.inf),
        window.inf_at,
        fmt_ratio(window.sup),
        window.sup_at,
        fmt_ratio(alpha)
    ));
    out.notes.push(format!(
        "model depth {model_depth}: coordinate discretization error lambda_M = {}",
        fmt_ratio(model.discretization_error())
    ));
    let (head, tail) = (norms[0], *norms.last().unwrap());
    if window.inf > 0.0 && window.inf / window.sup >= 0.1 {
        let cap = 2.0 * (complex.n() as f64).sqrt() * alpha * window.sup * 2.0;
        out.verdicts.push(Verdict::at_most(
            "curve_bounded_by_window",
            norms.iter().cloned().fold(0.0, f64::max),
            cap,
            false,
            "max U(L) against 4 sqrt(n) alpha sup(window)".into(),
        ));
    } else {
        out.verdicts.push(Verdict::at_most(
            "curve_decays",
            tail / head,
            0.5,
            false,
            "U(L_max) / U(L_min) for a weight whose window vanishes".into(),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaEstimate {
    /// `(L, U(L))` for each probed level.
    pub curve: Vec<(usize, f64)>,
    /// `(min_L U(L))^s`
    pub kappa_plus: f64,
    pub argmin: usize,
    /// `|U(L_max)^s - U(L_max - 1)^s|`, 0 with a single level.
    pub uncertainty: f64,
}

/// Upper estimate `kappa^+ = (min_L U(L))^s` of the modulus at the probed depth.
pub fn kappa_estimate(
    complex: &CantorComplex,
    pi: &WeightSequence,
    model_depth: usize,
    levels: RangeInclusive<usize>,
) -> Result<KappaEstimate> {
    check_levels(&levels, model_depth)?;
    let model = FiniteModel::build(complex, model_depth)?;
    let curve = levels
        .map(|level| Ok((level, model.commutator_norms(level, pi)?.tuple_norm)))
        .collect::<Result<Vec<_>>>()?;
    let s = complex.s();
    let (argmin, umin) =
        curve.iter().copied().fold(
            (0, f64::INFINITY),
            |acc, (l, u)| if u < acc.1 { (l, u) } else { acc },
        );
    let uncertainty = match curve.len() {
        0 | 1 => 0.0,
        k => (curve[k - 1].1.powf(s) - curve[k - 2].1.powf(s)).abs(),
    };
    Ok(KappaEstimate {
        kappa_plus: umin.powf(s),
        argmin,
        uncertainty,
        curve,
    })
}

/// `kappa^+` at several model depths over a common level range. Richer models
/// are expected to give no larger estimates; an increase is reported, not fatal.
pub fn kappa_depth_trend(
    complex: &CantorComplex,
    pi: &WeightSequence,
    depths: &[usize],
    levels: RangeInclusive<usize>,
) -> Result<ExperimentResult> {
    if depths.is_empty() {
        return Err(Error::InvalidArgument("no model depths given".into()));
    }
    let mut out = ExperimentResult::new("kappa", &["M", "kappa_plus", "argmin_L", "uncertainty"]);
    let mut worst_rise = 0.0f64;
    let mut previous: Option<f64> = None;
    for &depth in depths {
        let k = kappa_estimate(complex, pi, depth, levels.clone())?;
        if let Some(p) = previous {
            worst_rise = worst_rise.max((k.kappa_plus - p) / p);
        }
        previous = Some(k.kappa_plus);
        out.rows.push(vec![
            depth.into(),
            k.kappa_plus.into(),
            k.argmin.into(),
            k.uncertainty.into(),
        ]);
    }
    out.verdicts.push(Verdict::at_most(
        "kappa_nonincreasing_in_M",
        worst_rise,
        0.0,
        false,
        "largest relative increase of kappa^+ between consecutive model depths".into(),
    ));
    out.notes.push(
        "kappa^+ is an upper estimate in the normalization H_f(C_f) = 1; the true total mass is not computed"
            .into(),
    );
    Ok(out)
}

/// Compares `|[P_L, T] (x) I_m|_{pi}` with `m^{1/s} |[P_L, T]|_{pi}`.
///
/// The ampliated spectrum is summed against the same prefix of `pi`, which
/// must therefore hold at least `m * rank` weights for every `m`.
pub fn ampliation_check(
    complex: &CantorComplex,
    pi: &WeightSequence,
    model_depth: usize,
    level: usize,
    m_list: &[usize],
    epsilon: f64,
) -> Result<ExperimentResult> {
    check_levels(&(level..=level), model_depth)?;
    if m_list.is_empty() {
        return Err(Error::InvalidArgument("m_list is empty".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain {
            what: "epsilon",
            value: epsilon,
            allowed: "(0, 1)".into(),
        });
    }
    let model = FiniteModel::build(complex, model_depth)?;
    let spectra = model.commutator_spectra(level)?;
    let base = spectra
        .iter()
        .map(|s| s.phi_norm(pi))
        .collect::<Result<Vec<f64>>>()?;
    let base_tuple = base.iter().cloned().fold(0.0, f64::max);
    let s = complex.s();
    let rank = spectra.iter().map(|x| x.len()).max().unwrap_or(0);
    let pi1 = pi.values()[0];
    let op = spectra.iter().map(|x| x.max()).fold(0.0, f64::max);

    let mut out = ExperimentResult::new(
        "ampliation",
        &["m", "amp_norm", "scaled_norm", "deviation", "rel_deviation"],
    );
    let mut worst = 0.0f64;
    for &m in m_list {
        let amp = spectra
            .iter()
            .map(|x| x.ampliate(m)?.phi_norm(pi))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let scaled = (m as f64).powf(1.0 / s) * base_tuple;
        let deviation = (amp - scaled).abs();
        let rel = if base_tuple > 0.0 {
            deviation / base_tuple
        } else {
            0.0
        };
        let allowance = epsilon * base_tuple + (rank as f64) * pi1 * op;
        worst = worst.max(if allowance > 0.0 {
            deviation / allowance
        } else {
            0.0
        });
        out.rows.push(vec![
            m.into(),
            amp.into(),
            scaled.into(),
            deviation.into(),
            rel.into(),
        ]);
    }
    out.verdicts.push(Verdict::at_most(
        "ampliation_within_eps",
        worst,
        1.0,
        true,
        format!(
            "max over m of deviation / (eps |X| + rank pi_1 ||X||), eps = {epsilon}, rank = {rank}"
        ),
    ));
    out.notes
        .push(format!("base norm |X|_pi = {}", fmt_ratio(base_tuple)));
    Ok(out)
}

/// `U(w, d)`: tuple norm of `[P_{|w|+d}, tau]` on the sub-model under `w` refined to `|w|+d+refine`.
pub fn local_norm(
    complex: &CantorComplex,
    pi: &WeightSequence,
    words: &[Word],
    extra_depth: usize,
    refine: usize,
) -> Result<f64> {
    let level = words
        .first()
        .ok_or_else(|| Error::EmptySelection("no cells selected".into()))?
        .len()
        + extra_depth;
    let model = FiniteModel::from_words(complex, level + refine, words)?;
    Ok(model.commutator_norms(level, pi)?.tuple_norm)
}

/// Checks `U(w, d) = U(root, d) * 2^{-n|w|/s}` and that words of equal length
/// give bit-identical norms.
pub fn subcube_scaling_check(
    complex: &CantorComplex,
    pi: &WeightSequence,
    word_lengths: &[usize],
    extra_depth: usize,
    refine: usize,
) -> Result<ExperimentResult> {
    if word_lengths.is_empty() {
        return Err(Error::InvalidArgument("word_lengths is empty".into()));
    }
    let n = complex.n();
    let s = complex.s();
    let root = local_norm(complex, pi, &[Word::root(n)], extra_depth, refine)?;
    let mut out = ExperimentResult::new(
        "scaling",
        &[
            "word_length",
            "words",
            "norm",
            "predicted",
            "rel_error",
            "spread",
        ],
    );
    let mut worst_rel = 0.0f64;
    let mut worst_spread = 0.0f64;
    for &len in word_lengths {
        let words = complex.enumerate_words(len)?;
        let norms = words
            .par_iter()
            .map(|w| local_norm(complex, pi, std::slice::from_ref(w), extra_depth, refine))
            .collect::<Result<Vec<f64>>>()?;
        let first = norms[0];
        let spread = norms.iter().map(|u| (u - first).abs()).fold(0.0, f64::max);
        let identical = norms.iter().all(|u| u.to_bits() == first.to_bits());
        let predicted = root * 2f64.powf(-((n * len) as f64) / s);
        let rel = (first - predicted).abs() / predicted;
        worst_rel = worst_rel.max(rel);
        worst_spread = worst_spread.max(if identical {
            0.0
        } else {
            spread.max(f64::MIN_POSITIVE)
        });
        out.rows.push(vec![
            len.into(),
            words.len().into(),
            first.into(),
            predicted.into(),
            rel.into(),
            spread.into(),
        ]);
    }
    out.verdicts.push(Verdict::at_most(
        "equal_length_words_identical",
        worst_spread,
        0.0,
        true,
        "max |U(w, d) - U(w', d)| over words of equal length (bitwise)".into(),
    ));
    let (tol, fatal) = if complex.gauge().is_power() {
        (POWER_SCALING_TOL, true)
    } else {
        (NONPOWER_SCALING_TOL, false)
    };
    out.verdicts.push(Verdict::at_most(
        "subcube_scaling",
        worst_rel,
        tol,
        fatal,
        format!(
            "max relative error of U(root, d) 2^(-n|w|/s), d = {extra_depth}, refine = {refine}"
        ),
    ));
    out.notes
        .push(format!("U(root, {extra_depth}) = {}", fmt_ratio(root)));
    Ok(out)
}

/// `U(omega) / H_f(omega)^{1/s}` for unions of equal-generation cells.
pub fn small_set_bound_check(
    complex: &CantorComplex,
    pi: &WeightSequence,
    families: &[Vec<Word>],
    extra_depth: usize,
    refine: usize,
) -> Result<ExperimentResult> {
    if families.is_empty() {
        return Err(Error::InvalidArgument("no families given".into()));
    }
    let s = complex.s();
    let rows = families
        .par_iter()
        .map(|family| {
            let u = local_norm(complex, pi, family, extra_depth, refine)?;
            let mut cells = family.clone();
            cells.sort();
            cells.dedup();
            let generation = cells[0].len();
            let measure = cells.len() as f64 * complex.cell_measure(&cells[0]);
            Ok((
                generation,
                cells.len(),
                measure,
                u,
                u / measure.powf(1.0 / s),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = ExperimentResult::new(
        "small_set",
        &["family", "generation", "cells", "measure", "norm", "ratio"],
    );
    for (i, (generation, cells, measure, u, ratio)) in rows.iter().enumerate() {
        out.rows.push(vec![
            (i + 1).into(),
            (*generation).into(),
            (*cells).into(),
            (*measure).into(),
            (*u).into(),
            (*ratio).into(),
        ]);
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.4).collect();
    let measures: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    out.verdicts.push(Verdict::at_most(
        "ratio_spread",
        max / min,
        SMALL_SET_SPREAD,
        true,
        "max/min of U(omega) / H_f(omega)^(1/s) across families".into(),
    ));
    let span = measures.iter().cloned().fold(0.0, f64::max)
        / measures.iter().cloned().fold(f64::INFINITY, f64::min);
    out.verdicts.push(Verdict::at_most(
        "measure_span",
        1e3 / span,
        1.0,
        false,
        format!("families span a measure ratio of {}", fmt_ratio(span)),
    ));
    out.notes
        .push(format!("fitted constant C = {}", fmt_ratio(max)));
    Ok(out)
}

/// A named sequence of cell families `omega_1, omega_2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySequence {
    pub label: String,
    pub steps: Vec<Vec<Word>>,
}

/// Shrinking-measure sequences have `U(omega_k)` decay like `H_f(omega_k)^{1/s}`;
/// constant-measure sequences of fragmented sets do not decay.
pub fn singular_demo(
    complex: &CantorComplex,
    pi: &WeightSequence,
    sequences: &[FamilySequence],
    extra_depth: usize,
    refine: usize,
) -> Result<ExperimentResult> {
    if sequences.is_empty() {
        return Err(Error::InvalidArgument("no sequences given".into()));
    }
    let s = complex.s();
    let n = complex.n();
    let constant =
        SMALL_SET_SPREAD * local_norm(complex, pi, &[Word::root(n)], extra_depth, refine)?;
    let mut out = ExperimentResult::new(
        "singular_demo",
        &["sequence", "step", "generation", "measure", "norm", "bound"],
    );
    let mut worst_bound = 0.0f64;
    for seq in sequences {
        if seq.steps.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "sequence {} has no steps",
                seq.label
            )));
        }
        let rows = seq
            .steps
            .par_iter()
            .map(|family| {
                let u = local_norm(complex, pi, family, extra_depth, refine)?;
                let mut cells = family.clone();
                cells.sort();
                cells.dedup();
                let measure = cells.len() as f64 * complex.cell_measure(&cells[0]);
                Ok((cells[0].len(), measure, u))
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, (generation, measure, u)) in rows.iter().enumerate() {
            let bound = constant * measure.powf(1.0 / s);
            worst_bound = worst_bound.max(u / bound);
            out.rows.push(vec![
                seq.label.as_str().into(),
                (k + 1).into(),
                (*generation).into(),
                (*measure).into(),
                (*u).into(),
                bound.into(),
            ]);
        }
        let (h0, u0) = (rows[0].1, rows[0].2);
        let (h1, u1) = (rows[rows.len() - 1].1, rows[rows.len() - 1].2);
        if h1 / h0 <= 0.5 {
            let expected = (h1 / h0).powf(1.0 / s);
            out.verdicts.push(Verdict::at_most(
                &format!("{}_decays_with_measure", seq.label),
                (u1 / u0) / expected,
                SMALL_SET_SPREAD,
                true,
                format!(
                    "U ratio {} against measure ratio^(1/s) {}",
                    fmt_ratio(u1 / u0),
                    fmt_ratio(expected)
                ),
            ));
        } else {
            out.verdicts.push(Verdict::at_most(
                &format!("{}_does_not_decay", seq.label),
                u0 / u1,
                SMALL_SET_SPREAD,
                true,
                format!("first/last U with measure ratio {}", fmt_ratio(h1 / h0)),
            ));
        }
    }
    out.verdicts.insert(
        0,
        Verdict::at_most(
            "small_set_bound",
            worst_bound,
            1.0,
            true,
            format!("max U / (C H^(1/s)) with C = {}", fmt_ratio(constant)),
        ),
    );
    Ok(out)
}

/// `0 <= |X|_pi - |X|_{S^t pi} <= t pi_1 ||X||` for `X = [P_L, tau]`.
///
/// The gap is evaluated termwise as `sum_k sigma_k (pi_k - pi_{k+t})`.
pub fn shift_invariance_check(
    complex: &CantorComplex,
    pi: &WeightSequence,
    model_depth: usize,
    levels: RangeInclusive<usize>,
    shifts: &[usize],
) -> Result<ExperimentResult> {
    check_levels(&levels, model_depth)?;
    if shifts.is_empty() {
        return Err(Error::InvalidArgument("shifts is empty".into()));
    }
    let model = FiniteModel::build(complex, model_depth)?;
    let pi1 = pi.values()[0];
    let mut out =
        ExperimentResult::new("shift", &["L", "t", "norm", "norm_shifted", "gap", "bound"]);
    let mut worst_ratio = 0.0f64;
    let mut most_negative = 0.0f64;
    let mut monotone_violation = 0.0f64;
    let first_level = *levels.start();
    let last_level = *levels.end();
    let mut gaps_first = Vec::new();
    let mut gaps_last = Vec::new();
    for level in levels {
        let spectra = model.commutator_spectra(level)?;
        let op = spectra.iter().map(|x| x.max()).fold(0.0, f64::max);
        let norm = spectra
            .iter()
            .map(|x| x.phi_norm(pi))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let mut previous = 0.0f64;
        for &t in shifts {
            let shifted = pi.shift(t)?;
            let norm_shifted = spectra
                .iter()
                .map(|x| x.phi_norm(&shifted))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let gap = spectra
                .iter()
                .map(|x| {
                    x.values()
                        .iter()
                        .zip(pi.values())
                        .zip(shifted.values())
                        .map(|((sigma, a), b)| sigma * (a - b))
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let bound = t as f64 * pi1 * op;
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(gap / bound);
            }
            most_negative = most_negative.min(gap);
            monotone_violation = monotone_violation.max(previous - gap);
            previous = gap;
            if level == first_level {
                gaps_first.push(gap);
            }
            if level == last_level {
                gaps_last.push(gap);
            }
            out.rows.push(vec![
                level.into(),
                t.into(),
                norm.into(),
                norm_shifted.into(),
                gap.into(),
                bound.into(),
            ]);
        }
    }
    out.verdicts.push(Verdict::at_most(
        "gap_nonnegative",
        -most_negative,
        0.0,
        true,
        "minus the smallest gap".into(),
    ));
    out.verdicts.push(Verdict::at_most(
        "gap_within_bound",
        worst_ratio,
        1.0,
        true,
        "max gap / (t pi_1 ||X||)".into(),
    ));
    out.verdicts.push(Verdict::at_most(
        "gap_monotone_in_t",
        monotone_violation,
        0.0,
        true,
        "largest decrease of the gap between consecutive shifts".into(),
    ));
    if first_level < last_level && gaps_first[0] > 0.0 {
        out.verdicts.push(Verdict::at_most(
            "gap_decays_in_L",
            gaps_last[0] / gaps_first[0],
            0.5,
            false,
            format!(
                "gap at L = {last_level} over gap at L = {first_level}, t = {}",
                shifts[0]
            ),
        ));
    }
    Ok(out)
}

/// Standard family layouts for small-set experiments.
pub mod families {
    use super::*;

    /// The first `count` words of generation `level` in lexicographic order.
    pub fn leading_cells(complex: &CantorComplex, level: usize, count: usize) -> Result<Vec<Word>> {
        let words = complex.enumerate_words(level)?;
        if count == 0 || count > words.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot take {count} of {} cells",
                words.len()
            )));
        }
        Ok(words.into_iter().take(count).collect())
    }

    /// `count` cells of generation `level` chosen at an even stride.
    pub fn spread_cells(complex: &CantorComplex, level: usize, count: usize) -> Result<Vec<Word>> {
        let words = complex.enumerate_words(level)?;
        if count == 0 || count > words.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot take {count} of {} cells",
                words.len()
            )));
        }
        let stride = words.len() / count;
        Ok(words.into_iter().step_by(stride).take(count).collect())
    }

    /// Nested single cells `1, 1.1, 1.1.1, ...` down to `generations`.
    pub fn nested_corner(n: usize, generations: usize) -> Vec<Vec<Word>> {
        (1..=generations)
            .map(|g| vec![Word::new(n, vec![1; g]).expect("letter 1 is valid")])
            .collect()
    }

    /// Two adjacent cells `1...1.1` and `1...1.2` at each generation.
    pub fn nested_pair(n: usize, generations: usize) -> Vec<Vec<Word>> {
        (1..=generations)
            .map(|g| {
                let mut low = vec![1; g];
                let a = Word::new(n, low.clone()).expect("letter 1 is valid");
                low[g - 1] = 2;
                vec![a, Word::new(n, low).expect("letter 2 is valid")]
            })
            .collect()
    }

    /// Half of the cells of each generation, spread evenly: measure stays 1/2.
    pub fn fragmented_half(complex: &CantorComplex, generations: usize) -> Result<Vec<Vec<Word>>> {
        (1..=generations)
            .map(|g| {
                let count = (complex.cell_count(g) / 2) as usize;
                spread_cells(complex, g, count)
            })
            .collect()
    }
}
