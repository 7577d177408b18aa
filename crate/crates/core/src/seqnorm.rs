//! Weight sequences `pi` and the symmetric norming functions
//! `Phi_pi(xi) = sum_k pi_k xi*_k`, where `xi*` is the nonincreasing
//! rearrangement of `|xi|`.
//!
//! Sequences are finite prefixes. `start_index` records which index of the
//! underlying infinite sequence sits in position 1, so that `rho^{(eps)}`
//! (the tail of `rho` from `N`) is stored re-indexed from position 1.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gauge::GaugeSpec;

/// Closed-form origin of a weight sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `rho_k = h'(k)` for the given gauge.
    RhoOfGauge(GaugeSpec),
    /// `pi_k = 1/k`.
    Harmonic,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    values: Vec<f64>,
    start_index: u64,
    generator: Generator,
}

impl WeightSequence {
    /// Validates a nonincreasing, nonnegative, finite prefix.
    pub fn new(values: Vec<f64>, start_index: u64, generator: Generator) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeights("empty weight sequence".into()));
        }
        if start_index == 0 {
            return Err(Error::InvalidWeights("start index must be >= 1".into()));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "weight at position {} is {} (must be finite and >= 0)",
                i + 1,
                values[i]
            )));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidWeights(format!(
                "weights increase between positions {} and {}",
                i + 1,
                i + 2
            )));
        }
        if values[0] == 0.0 {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        Ok(WeightSequence {
            values,
            start_index,
            generator,
        })
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1, Generator::Custom)
    }

    /// `pi_k = 1/k` for `k = 1..=count`.
    pub fn harmonic(count: usize) -> Result<Self> {
        let values = (1..=count).map(|k| 1.0 / k as f64).collect();
        Self::new(values, 1, Generator::Harmonic)
    }

    /// `rho_k = h'(k)` for `k = start..start + count - 1`.
    ///
    /// Fails with [`Error::Monotonicity`] if `h'` increases anywhere in that range.
    pub fn rho(gauge: &GaugeSpec, start: u64, count: usize) -> Result<Self> {
        if start == 0 {
            return Err(Error::InvalidWeights("start index must be >= 1".into()));
        }
        if count == 0 {
            return Err(Error::InvalidWeights("empty weight sequence".into()));
        }
        let values = (0..count as u64)
            .into_par_iter()
            .map(|i| gauge.hprime((start + i) as f64))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(i) = values.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::Monotonicity {
                k: start + i as u64,
            });
        }
        Self::new(values, start, Generator::RhoOfGauge(*gauge))
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

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    /// Weight of the underlying sequence at index `k` (not position).
    pub fn at_index(&self, k: u64) -> Option<f64> {
        k.checked_sub(self.start_index)
            .and_then(|i| self.values.get(i as usize).copied())
    }

    /// Whether `sum pi_k = inf` is known analytically; `None` for custom lists.
    pub fn diverges(&self) -> Option<bool> {
        match self.generator {
            Generator::RhoOfGauge(_) | Generator::Harmonic => Some(true),
            Generator::Custom => None,
        }
    }

    /// Partial sums `S_m = pi_1 + ... + pi_m` by position, `S_0 = 0` omitted.
    pub fn prefix_sums(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }

    /// Left shift applied `times` times: drops the first `times` weights.
    pub fn shift(&self, times: usize) -> Result<Self> {
        if times >= self.values.len() {
            return Err(Error::Length(format!(
                "cannot shift {} weights by {times}",
                self.values.len()
            )));
        }
        Ok(WeightSequence {
            values: self.values[times..].to_vec(),
            start_index: self.start_index + times as u64,
            generator: self.generator,
        })
    }

    /// `Phi_pi` of a vector already sorted nonincreasing and nonnegative.
    pub fn norm_of_sorted(&self, sorted: &[f64]) -> Result<f64> {
        let nonzero = sorted.iter().take_while(|v| **v != 0.0).count();
        if nonzero > self.values.len() {
            return Err(Error::InsufficientWeights {
                needed: nonzero,
                available: self.values.len(),
            });
        }
        Ok(sorted[..nonzero]
            .iter()
            .zip(&self.values)
            .map(|(x, w)| x * w)
            .sum())
    }

    /// Empirical regularity constant `max_{m <= m_max} S_m / (m pi_m)`.
    pub fn regularity_alpha(&self, m_max: usize) -> Result<f64> {
        if m_max == 0 || m_max > self.values.len() {
            return Err(Error::Length(format!(
                "m_max = {m_max} must lie in 1..={}",
                self.values.len()
            )));
        }
        Ok(self
            .prefix_sums()
            .iter()
            .zip(&self.values)
            .take(m_max)
            .enumerate()
            .map(|(i, (s, p))| s / ((i + 1) as f64 * p))
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// `Phi_pi(xs)`: sorts `|xs|` nonincreasing (stable) and sums against `pi` in index order.
pub fn phi_norm(pi: &WeightSequence, xs: &[f64]) -> Result<f64> {
    let mut sorted: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    pi.norm_of_sorted(&sorted)
}

/// Empirical `inf` and `sup` of `m pi_m f^{-1}(1/m)` over a range of indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub inf: f64,
    pub inf_at: u64,
    pub sup: f64,
    pub sup_at: u64,
}

/// `m pi_m f^{-1}(1/m)` for each `m` in `ms`, with `pi_m` looked up by index.
pub fn window_values(gauge: &GaugeSpec, pi: &WeightSequence, ms: &[u64]) -> Result<Vec<f64>> {
    ms.par_iter()
        .map(|&m| {
            let weight = pi.at_index(m).ok_or_else(|| {
                Error::Length(format!(
                    "index {m} outside weights {}..={}",
                    pi.start_index(),
                    pi.start_index() + pi.len() as u64 - 1
                ))
            })?;
            Ok(m as f64 * weight * gauge.inverse(1.0 / m as f64)?)
        })
        .collect()
}

pub fn obstruction_window(
    gauge: &GaugeSpec,
    pi: &WeightSequence,
    m_range: RangeInclusive<u64>,
) -> Result<Window> {
    let ms: Vec<u64> = m_range.collect();
    if ms.is_empty() {
        return Err(Error::Length("empty index range".into()));
    }
    let values = window_values(gauge, pi, &ms)?;
    let mut out = Window {
        inf: values[0],
        inf_at: ms[0],
        sup: values[0],
        sup_at: ms[0],
    };
    for (&m, &v) in ms.iter().zip(&values) {
        if v < out.inf {
            out.inf = v;
            out.inf_at = m;
        }
        if v > out.sup {
            out.sup = v;
            out.sup_at = m;
        }
    }
    Ok(out)
}

/// `f^{-1}(1/m^n) * sum_{k <= m^n} pi_k` for each `m`; a liminf of 0 signals
/// that `J_pi` is not inside `J_rho`.
pub fn vanishing_sequence(
    gauge: &GaugeSpec,
    pi: &WeightSequence,
    n: u32,
    ms: &[u64],
) -> Result<Vec<f64>> {
    let sums = pi.prefix_sums();
    ms.iter()
        .map(|&m| {
            let count = m
                .checked_pow(n)
                .filter(|c| *c >= 1)
                .ok_or_else(|| Error::InvalidArgument(format!("m^n overflows for m = {m}")))?;
            if count as usize > sums.len() {
                return Err(Error::InsufficientWeights {
                    needed: count as usize,
                    available: sums.len(),
                });
            }
            Ok(gauge.inverse(1.0 / count as f64)? * sums[count as usize - 1])
        })
        .collect()
}

fn log_integer_grid(horizon: u64, per_decade: usize) -> Vec<u64> {
    let decades = (horizon as f64).log10();
    let points = ((decades * per_decade as f64).ceil() as usize).max(1);
    let mut grid: Vec<u64> = (0..=points)
        .map(|i| 10f64.powf(decades * i as f64 / points as f64).round() as u64)
        .map(|k| k.clamp(1, horizon))
        .collect();
    grid.push(horizon);
    grid.dedup();
    grid
}

/// Grid density (points per decade) used by [`choose_start_index`].
pub const START_SEARCH_PER_DECADE: usize = 32;

/// Smallest `N <= horizon` such that, on `N` and every log-grid point of
/// `[N, horizon]`, `h'` does not increase and
/// `|f^{-1}(1/k) / f^{-1}(1/(m k)) - m^{1/s}| < epsilon` for all `m <= m_max`.
pub fn choose_start_index(
    gauge: &GaugeSpec,
    epsilon: f64,
    m_max: u64,
    horizon: u64,
) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    if m_max == 0 || horizon == 0 {
        return Err(Error::InvalidArgument(
            "m_max and horizon must be >= 1".into(),
        ));
    }
    let inv_s = 1.0 / gauge.index();
    let ratio_ok = |k: u64| -> Result<bool> {
        let base = gauge.inverse(1.0 / k as f64)?;
        for m in 2..=m_max {
            let ratio = base / gauge.inverse(1.0 / (m * k) as f64)?;
            if !((ratio - (m as f64).powf(inv_s)).abs() < epsilon) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    // passes at k, with `next` the following sample point
    let passes = |k: u64, next: Option<u64>| -> Result<bool> {
        let here = gauge.hprime(k as f64)?;
        if k < horizon && gauge.hprime((k + 1) as f64)? > here {
            return Ok(false);
        }
        if let Some(nk) = next {
            if gauge.hprime(nk as f64)? > here {
                return Ok(false);
            }
        }
        ratio_ok(k)
    };

    let grid = log_integer_grid(horizon, START_SEARCH_PER_DECADE);
    let verdicts = grid
        .par_iter()
        .enumerate()
        .map(|(i, &k)| passes(k, grid.get(i + 1).copied()))
        .collect::<Result<Vec<bool>>>()?;

    let first_ok = match verdicts.iter().rposition(|ok| !ok) {
        None => 0,
        Some(i) if i + 1 == grid.len() => return Err(Error::NotFound { horizon }),
        Some(i) => i + 1,
    };
    let lower = if first_ok == 0 {
        1
    } else {
        grid[first_ok - 1] + 1
    };
    let upper = grid[first_ok];
    for n in lower..upper {
        if passes(n, Some(upper))? {
            return Ok(n);
        }
    }
    Ok(upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::lambert_w;
    use std::f64::consts::E;

    fn power(s: f64) -> GaugeSpec {
        GaugeSpec::power(s).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn rho_examples() {
        let r = WeightSequence::rho(&power(1.5), 1, 3).unwrap();
        let expect = [1.0, 2f64.powf(-1.0 / 3.0), 3f64.powf(-1.0 / 3.0)].map(|v| v * 2.0 / 3.0);
        for (a, b) in r.values().iter().zip(expect) {
            assert!(rel(*a, b) < 1e-14);
        }
        // h'(1) = 1 / (W(e) + 1) = 1/2
        let r = WeightSequence::rho(&GaugeSpec::Example37, 1, 1).unwrap();
        assert!(rel(r.values()[0], 0.5) < 1e-12);
        let r = WeightSequence::rho(&power(2.0), 4, 1).unwrap();
        assert!(rel(r.values()[0], 0.25) < 1e-15);
    }

    #[test]
    fn rho_matches_generator_definition() {
        let g = GaugeSpec::Example37;
        let r = WeightSequence::rho(&g, 5, 50).unwrap();
        for (i, v) in r.values().iter().enumerate() {
            let k = 5.0 + i as f64;
            assert!(rel(*v, g.hprime(k).unwrap()) < 1e-12);
            assert!(rel(*v, 1.0 / (lambert_w(E * k).unwrap() + 1.0)) < 1e-10);
        }
    }

    #[test]
    fn invalid_sequences() {
        assert!(WeightSequence::custom(vec![]).is_err());
        assert!(WeightSequence::custom(vec![1.0, 2.0]).is_err());
        assert!(WeightSequence::custom(vec![1.0, -0.5]).is_err());
        assert!(WeightSequence::custom(vec![0.0, 0.0]).is_err());
        assert!(WeightSequence::custom(vec![1.0, f64::NAN]).is_err());
        assert!(WeightSequence::custom(vec![1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn phi_norm_examples() {
        let pi = WeightSequence::custom(vec![1.0, 0.5, 1.0 / 3.0]).unwrap();
        let v = phi_norm(&pi, &[3.0, 1.0, 2.0]).unwrap();
        assert!(rel(v, 3.0 + 1.0 + 1.0 / 3.0) < 1e-15);
        assert_eq!(phi_norm(&pi, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        let op = WeightSequence::custom(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(phi_norm(&op, &[0.3, -2.5, 1.0, 2.0]).unwrap(), 2.5);
        assert!(matches!(
            phi_norm(&pi, &[1.0; 4]),
            Err(Error::InsufficientWeights {
                needed: 4,
                available: 3
            })
        ));
    }

    #[test]
    fn regularity_examples() {
        let m_max = 10_000;
        let p = WeightSequence::custom((1..=m_max).map(|k| (k as f64).powf(-1.0 / 3.0)).collect())
            .unwrap();
        assert!(rel(p.regularity_alpha(m_max).unwrap(), 1.5) < 0.01);
        let c = WeightSequence::custom(vec![0.3; 100]).unwrap();
        assert!(rel(c.regularity_alpha(100).unwrap(), 1.0) < 1e-14);
        let h = WeightSequence::harmonic(m_max).unwrap();
        let expect = (m_max as f64).ln() + 0.577_215_664_901_532_9;
        assert!((h.regularity_alpha(m_max).unwrap() - expect).abs() < 1e-3);
        assert!(h.regularity_alpha(m_max + 1).is_err());
    }

    #[test]
    fn shift_examples() {
        let p = WeightSequence::custom(vec![1.0, 0.5, 1.0 / 3.0]).unwrap();
        let s = p.shift(1).unwrap();
        assert_eq!(s.values(), [0.5, 1.0 / 3.0]);
        assert_eq!(s.start_index(), 2);
        assert_eq!(p.shift(0).unwrap(), p);
        assert!(p.shift(3).is_err());

        let g = power(1.5);
        let (n, k) = (7u64, 40usize);
        let shifted = WeightSequence::rho(&g, 1, k)
            .unwrap()
            .shift(n as usize - 1)
            .unwrap();
        let direct = WeightSequence::rho(&g, n, k - n as usize + 1).unwrap();
        assert_eq!(shifted, direct);
    }

    #[test]
    fn window_power_is_inverse_index() {
        for s in [1.5, 2.0] {
            let g = power(s);
            let rho = WeightSequence::rho(&g, 1, 2000).unwrap();
            let w = obstruction_window(&g, &rho, 1..=2000).unwrap();
            assert!((w.inf - 1.0 / s).abs() < 1e-13 && (w.sup - 1.0 / s).abs() < 1e-13);
        }
    }

    #[test]
    fn window_example37_tends_to_one() {
        let g = GaugeSpec::Example37;
        let rho = WeightSequence::rho(&g, 10, 100_000).unwrap();
        let w = obstruction_window(&g, &rho, 10..=100_009).unwrap();
        assert!(w.inf > 0.5 && w.sup < 1.0);
        assert_eq!(w.inf_at, 10);
        assert_eq!(w.sup_at, 100_009);
        // m rho_m f^{-1}(1/m) = W(e m) / (W(e m) + 1)
        let wm = lambert_w(E * 100_009.0).unwrap();
        assert!(rel(w.sup, wm / (wm + 1.0)) < 1e-10);
    }

    #[test]
    fn window_range_outside_weights() {
        let g = power(1.5);
        let rho = WeightSequence::rho(&g, 3, 10).unwrap();
        assert!(obstruction_window(&g, &rho, 1..=5).is_err());
        assert!(obstruction_window(&g, &rho, 3..=12).is_ok());
        assert!(obstruction_window(&g, &rho, 3..=13).is_err());
    }

    #[test]
    fn vanishing_examples() {
        let g = power(1.5);
        let h = WeightSequence::harmonic(40_000).unwrap();
        let v = vanishing_sequence(&g, &h, 2, &[10, 100, 200]).unwrap();
        // m^{-4/3} (ln m^2 + gamma) at m = 100 is 0.0211
        assert!((v[1] - 0.0211).abs() < 2e-4, "{v:?}");
        assert!(v[0] > v[1] && v[1] > v[2] && v[2] < 0.01);

        let rho = WeightSequence::rho(&g, 1, 40_000).unwrap();
        let v = vanishing_sequence(&g, &rho, 2, &[10, 50, 100, 200]).unwrap();
        assert!(v.iter().all(|x| (0.9..=1.0).contains(x)), "{v:?}");
        assert!(v.windows(2).all(|p| p[1] > p[0]));

        let single =
            WeightSequence::custom(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let v = vanishing_sequence(&g, &single, 2, &[1, 2, 3]).unwrap();
        assert!(v[2] < v[1] && v[1] < v[0]);
        assert!(vanishing_sequence(&g, &single, 2, &[4]).is_err());
    }

    #[test]
    fn integral_bracketing_of_rho_sums() {
        for g in [power(1.5), power(2.0), GaugeSpec::Example37] {
            let n = 3u64;
            let rho = WeightSequence::rho(&g, n, 5000).unwrap();
            let sums = rho.prefix_sums();
            let h_n = g.h_and_hprime(n as f64).unwrap().0;
            for (i, s) in sums.iter().enumerate().step_by(97) {
                let m = n + i as u64;
                let h_m = g.h_and_hprime(m as f64).unwrap().0;
                let tol = 1e-12 * s.abs().max(1.0);
                assert!(h_m - h_n <= s + tol, "{g} m = {m}");
                assert!(*s <= rho.values()[0] + h_m - h_n + tol, "{g} m = {m}");
            }
        }
    }

    #[test]
    fn start_index_power_is_one() {
        for eps in [1e-12, 0.05] {
            assert_eq!(
                choose_start_index(&power(1.5), eps, 8, 1_000_000).unwrap(),
                1
            );
        }
    }

    #[test]
    fn start_index_example37() {
        let g = GaugeSpec::Example37;
        // the slowly varying correction is still ~0.36 at k = 1e6 for m = 4
        assert!(matches!(
            choose_start_index(&g, 0.05, 4, 1_000_000),
            Err(Error::NotFound { .. })
        ));
        assert!(matches!(
            choose_start_index(&g, 1e-12, 2, 1000),
            Err(Error::NotFound { .. })
        ));

        let n = choose_start_index(&g, 0.25, 2, 1_000_000).unwrap();
        assert!(n > 1 && n < 1_000_000);
        let dev = |k: u64| {
            (g.inverse(1.0 / k as f64).unwrap() / g.inverse(1.0 / (2 * k) as f64).unwrap() - 2.0)
                .abs()
        };
        assert!(dev(n) < 0.25 && dev(n - 1) >= 0.25);
        for i in 0..100u64 {
            let k = n + i * i * 97;
            assert!(dev(k) < 0.25, "k = {k}");
        }
    }
}
