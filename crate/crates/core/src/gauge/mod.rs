//! Gauge functions `f` generating Hausdorff measures, with closed-form
//! derivatives, a guarded inverse, and the transform `h(x) = 1 / f^{-1}(1/x)`.
//!
//! Three built-in families are supported:
//!
//! * `power`: `f(x) = x^s` on `(0, inf)`,
//! * `example37`: `f(x) = x / log(e/x)` on `(0, 1]`,
//! * `power_log`: `f(x) = x^s (log(e/x))^(-beta)` on `(0, 1]`.
//!
//! `example37` is the `s = 1, beta = 1` member of `power_log`, kept as its own
//! family so that its evaluation avoids `powf`.

mod lambert;

pub use lambert::lambert_w;

use std::fmt;

use crate::error::{Error, Result};

const INVERSE_MAX_ITERATIONS: usize = 200;
const INVERSE_REL_TOL: f64 = 1e-14;

/// A gauge function drawn from the built-in registry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeSpec {
    Power { s: f64 },
    Example37,
    PowerLog { s: f64, beta: f64 },
}

impl fmt::Display for GaugeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeSpec::Power { s } => write!(f, "power(s={s})"),
            GaugeSpec::Example37 => write!(f, "example37"),
            GaugeSpec::PowerLog { s, beta } => write!(f, "power_log(s={s}, beta={beta})"),
        }
    }
}

fn check_index(s: f64) -> Result<()> {
    if s.is_finite() && s >= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "regular-variation index s",
            value: s,
            allowed: "[1, inf)".into(),
        })
    }
}

impl GaugeSpec {
    pub fn power(s: f64) -> Result<Self> {
        check_index(s)?;
        Ok(GaugeSpec::Power { s })
    }

    pub fn power_log(s: f64, beta: f64) -> Result<Self> {
        check_index(s)?;
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Domain {
                what: "log exponent beta",
                value: beta,
                allowed: "[0, inf)".into(),
            });
        }
        Ok(GaugeSpec::PowerLog { s, beta })
    }

    /// Regular-variation index `s` at 0.
    pub fn index(&self) -> f64 {
        match *self {
            GaugeSpec::Power { s } | GaugeSpec::PowerLog { s, .. } => s,
            GaugeSpec::Example37 => 1.0,
        }
    }

    /// Upper end of the validated domain `(0, x_max]`.
    pub fn x_max(&self) -> f64 {
        match self {
            GaugeSpec::Power { .. } => f64::INFINITY,
            _ => 1.0,
        }
    }

    /// `f(x_max)`, the upper end of the range of `f`.
    pub fn y_max(&self) -> f64 {
        match self {
            GaugeSpec::Power { .. } => f64::INFINITY,
            _ => 1.0,
        }
    }

    pub fn is_power(&self) -> bool {
        matches!(self, GaugeSpec::Power { .. })
    }

    // (s, beta) for the logarithmic families
    fn log_params(&self) -> Option<(f64, f64)> {
        match *self {
            GaugeSpec::Power { .. } => None,
            GaugeSpec::Example37 => Some((1.0, 1.0)),
            GaugeSpec::PowerLog { s, beta } => Some((s, beta)),
        }
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if x > 0.0 && x <= self.x_max() && x.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "gauge argument x",
                value: x,
                allowed: format!("(0, {}]", self.x_max()),
            })
        }
    }

    /// `f(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(match *self {
            GaugeSpec::Power { s } => x.powf(s),
            GaugeSpec::Example37 => x / (1.0 - x.ln()),
            GaugeSpec::PowerLog { s, beta } => x.powf(s) * (1.0 - x.ln()).powf(-beta),
        })
    }

    /// `(f'(x), f''(x))` in closed form.
    pub fn derivatives(&self, x: f64) -> Result<(f64, f64)> {
        self.check_x(x)?;
        match *self {
            GaugeSpec::Power { s } => {
                let d1 = s * x.powf(s - 1.0);
                let d2 = if s == 1.0 {
                    0.0
                } else {
                    s * (s - 1.0) * x.powf(s - 2.0)
                };
                Ok((d1, d2))
            }
            GaugeSpec::Example37 => {
                let l = 1.0 - x.ln();
                Ok(((l + 1.0) / (l * l), (l + 2.0) / (x * l * l * l)))
            }
            GaugeSpec::PowerLog { s, beta } => {
                // f = x^s L^-beta with L = 1 - ln x; g = (ln f)'
                let l = 1.0 - x.ln();
                let f = self.eval(x)?;
                let g = s / x + beta / (x * l);
                let dg = -s / (x * x) - beta * (l - 1.0) / (x * x * l * l);
                Ok((f * g, f * (g * g + dg)))
            }
        }
    }

    /// Compositional inverse `f^{-1}(y)` for `0 < y <= f(x_max)`.
    ///
    /// Power gauges use the closed form `y^(1/s)`. The logarithmic families
    /// solve `s u - beta ln(1 - u) = ln y` for `u = ln x` by Newton steps kept
    /// inside a sign-change bracket, falling back to bisection whenever a step
    /// leaves the bracket.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y <= self.y_max() && y.is_finite()) {
            return Err(Error::Domain {
                what: "gauge value y",
                value: y,
                allowed: format!("(0, {}]", self.y_max()),
            });
        }
        let (s, beta) = match *self {
            GaugeSpec::Power { s } => return Ok(y.powf(1.0 / s)),
            _ => self.log_params().expect("log family"),
        };
        if y == 1.0 {
            return Ok(1.0);
        }

        let target = y.ln();
        let residual = |u: f64| s * u - beta * (-u).ln_1p() - target;
        // F(ln(y)/s) <= 0 <= F(0)
        let mut lo = target / s;
        let mut hi = 0.0_f64;
        let mut u = lo;
        let mut converged = false;
        for _ in 0..INVERSE_MAX_ITERATIONS {
            let r = residual(u);
            if r == 0.0 {
                converged = true;
                break;
            }
            if r < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let slope = s + beta / (1.0 - u);
            let mut next = u - r / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - u).abs() <= f64::EPSILON * u.abs();
            u = next;
            if done {
                converged = true;
                break;
            }
        }

        let x = u.exp();
        let rel = (self.eval(x)? - y).abs() / y;
        if converged && rel <= INVERSE_REL_TOL {
            Ok(x)
        } else {
            Err(Error::Convergence {
                routine: "gauge inverse",
                iterations: INVERSE_MAX_ITERATIONS,
                residual: rel,
            })
        }
    }

    /// `h(x) = 1/f^{-1}(1/x)` and `h'(x) = (f(t)/t)^2 / f'(t)` with `t = f^{-1}(1/x)`.
    pub fn h_and_hprime(&self, x: f64) -> Result<(f64, f64)> {
        if !(x > 0.0) {
            return Err(Error::Domain {
                what: "h argument",
                value: x,
                allowed: format!("[{}, inf)", 1.0 / self.y_max()),
            });
        }
        let t = self.inverse(1.0 / x)?;
        let ratio = match *self {
            GaugeSpec::Power { s } => t.powf(s - 1.0),
            _ => self.eval(t)? / t,
        };
        let (d1, _) = self.derivatives(t)?;
        Ok((1.0 / t, ratio * ratio / d1))
    }

    /// `h'(x)` alone.
    pub fn hprime(&self, x: f64) -> Result<f64> {
        self.h_and_hprime(x).map(|(_, d)| d)
    }

    /// Sampled checks of property (R) and log-concavity over `t0_search`.
    pub fn validate(&self, t0_search: (f64, f64)) -> ValidationReport {
        validate_gauge(self, t0_search)
    }

    /// Deviations of the forward and inverse scaling ratios from their
    /// regular-variation limits, probed at a single point.
    pub fn rv_index_check(&self, a_list: &[f64], x_probe: f64) -> Result<Vec<RvDeviation>> {
        let s = self.index();
        a_list
            .iter()
            .map(|&a| {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::Domain {
                        what: "scaling factor a",
                        value: a,
                        allowed: "(0, inf)".into(),
                    });
                }
                let forward = (self.eval(a * x_probe)? / self.eval(x_probe)? - a.powf(s)).abs();
                let inverse =
                    (self.inverse(x_probe)? / self.inverse(a * x_probe)? - a.powf(-1.0 / s)).abs();
                Ok(RvDeviation {
                    a,
                    forward,
                    inverse,
                })
            })
            .collect()
    }
}

/// Output of [`GaugeSpec::rv_index_check`] for one scaling factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RvDeviation {
    pub a: f64,
    /// `|f(a x)/f(x) - a^s|`
    pub forward: f64,
    /// `|f^{-1}(x)/f^{-1}(a x) - a^(-1/s)|`
    pub inverse: f64,
}

/// One sampled check inside a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst sampled value of the checked quantity.
    pub measured: f64,
    /// Pass threshold for `measured`.
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub gauge: GaugeSpec,
    pub interval: (f64, f64),
    pub grid_points: usize,
    pub checks: Vec<GaugeCheck>,
    /// Largest grid point `t0` such that `log f` is concave on every grid point `<= t0`.
    pub log_concave_up_to: Option<f64>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&GaugeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.check(name).is_some_and(|c| c.passed)
    }

    /// Convex, C^2 (closed form) and `f'(0+) = 0`.
    pub fn property_r(&self) -> bool {
        self.passed("convexity") && self.passed("fprime_vanishes_at_zero")
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const VALIDATION_GRID_POINTS: usize = 64;
/// `f'(1e-12) / f'(1e-4)` must fall below this for the sampled limit `f'(0+) = 0`.
pub const FPRIME_DECAY_THRESHOLD: f64 = 0.5;

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

fn validate_gauge(g: &GaugeSpec, t0_search: (f64, f64)) -> ValidationReport {
    let lo = t0_search.0.max(f64::MIN_POSITIVE);
    let hi = t0_search.1.min(g.x_max());
    let grid = log_grid(lo, hi, VALIDATION_GRID_POINTS);
    let mut checks = Vec::new();

    let values: Vec<f64> = grid
        .iter()
        .map(|&x| g.eval(x).unwrap_or(f64::NAN))
        .collect();
    let positive = values.iter().all(|v| *v > 0.0);
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    checks.push(GaugeCheck {
        name: "positive_increasing",
        passed: positive && increasing,
        measured: values.iter().cloned().fold(f64::INFINITY, f64::min),
        threshold: 0.0,
        detail: "f > 0 and strictly increasing on the grid".into(),
    });

    let f_small = g.eval(1e-12).unwrap_or(f64::NAN);
    checks.push(GaugeCheck {
        name: "vanishes_at_zero",
        passed: f_small < 1e-6,
        measured: f_small,
        threshold: 1e-6,
        detail: "f(1e-12) as a sampled limit of f(0+)".into(),
    });

    let fprimes: Vec<f64> = (4..=12)
        .map(|k| {
            g.derivatives(10f64.powi(-k))
                .map(|d| d.0)
                .unwrap_or(f64::NAN)
        })
        .collect();
    let decreasing = fprimes.windows(2).all(|w| w[1] < w[0]);
    let decay = fprimes[fprimes.len() - 1] / fprimes[0];
    checks.push(GaugeCheck {
        name: "fprime_vanishes_at_zero",
        passed: decreasing && decay <= FPRIME_DECAY_THRESHOLD,
        measured: decay,
        threshold: FPRIME_DECAY_THRESHOLD,
        detail: "f'(10^-k), k = 4..12, strictly decreasing; reports f'(1e-12)/f'(1e-4)".into(),
    });

    let second: Vec<(f64, f64, f64, f64)> = grid
        .iter()
        .map(|&x| {
            let f = g.eval(x).unwrap_or(f64::NAN);
            let (d1, d2) = g.derivatives(x).unwrap_or((f64::NAN, f64::NAN));
            (x, f, d1, d2)
        })
        .collect();
    let min_f2 = second.iter().map(|p| p.3).fold(f64::INFINITY, f64::min);
    checks.push(GaugeCheck {
        name: "convexity",
        passed: min_f2 >= 0.0,
        measured: -min_f2,
        threshold: 0.0,
        detail: format!("f'' >= 0 on {VALIDATION_GRID_POINTS} log-spaced points"),
    });

    // (log f)'' = f''/f - (f'/f)^2
    let log_curv: Vec<(f64, f64)> = second
        .iter()
        .map(|&(x, f, d1, d2)| (x, d2 / f - (d1 / f) * (d1 / f)))
        .collect();
    let mut log_concave_up_to = None;
    for &(x, c) in &log_curv {
        if c <= 0.0 {
            log_concave_up_to = Some(x);
        } else {
            break;
        }
    }
    let max_curv = log_curv
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(GaugeCheck {
        name: "log_concavity",
        passed: max_curv <= 0.0,
        measured: max_curv,
        threshold: 0.0,
        detail: "(log f)'' <= 0 on the grid".into(),
    });

    ValidationReport {
        gauge: *g,
        interval: (lo, hi),
        grid_points: VALIDATION_GRID_POINTS,
        checks,
        log_concave_up_to,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn p(s: f64) -> GaugeSpec {
        GaugeSpec::power(s).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p(1.5).eval(4.0).unwrap(), 8.0);
        assert_eq!(GaugeSpec::Example37.eval(1.0).unwrap(), 1.0);
        let v = GaugeSpec::Example37.eval(0.1).unwrap();
        assert!(rel(v, 0.1 / (1.0 + 10f64.ln())) < 1e-15);
        assert!((v - 0.030_279_3).abs() < 1e-7);
    }

    #[test]
    fn eval_domain_errors() {
        assert!(p(1.5).eval(0.0).is_err());
        assert!(p(1.5).eval(-1.0).is_err());
        assert!(GaugeSpec::Example37.eval(1.5).is_err());
        assert!(GaugeSpec::power_log(1.0, 0.5).unwrap().eval(2.0).is_err());
        assert!(GaugeSpec::power(0.5).is_err());
        assert!(GaugeSpec::power_log(1.0, -1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p(1.5).derivatives(1.0).unwrap(), (1.5, 0.75));
        assert_eq!(p(2.0).derivatives(3.0).unwrap(), (6.0, 2.0));
    }

    #[test]
    fn example37_is_power_log_member() {
        let pl = GaugeSpec::power_log(1.0, 1.0).unwrap();
        for &x in &[1e-9, 1e-3, 0.1, 0.5, 1.0] {
            let a = GaugeSpec::Example37.eval(x).unwrap();
            let b = pl.eval(x).unwrap();
            assert!(rel(a, b) < 1e-14);
            let (a1, a2) = GaugeSpec::Example37.derivatives(x).unwrap();
            let (b1, b2) = pl.derivatives(x).unwrap();
            assert!(rel(a1, b1) < 1e-13 && rel(a2, b2) < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn inverse_examples() {
        assert!(rel(p(1.5).inverse(0.125).unwrap(), 0.25) < 1e-15);
        assert_eq!(p(2.0).inverse(1.0).unwrap(), 1.0);
        let x = GaugeSpec::Example37
            .inverse(0.030_279_310_656_411_387)
            .unwrap();
        assert!((x - 0.1).abs() < 1e-10);
        let y = GaugeSpec::Example37.eval(0.1).unwrap();
        assert!((GaugeSpec::Example37.inverse(y).unwrap() - 0.1).abs() < 1e-10);
        assert_eq!(GaugeSpec::Example37.inverse(1.0).unwrap(), 1.0);
    }

    #[test]
    fn inverse_domain_errors() {
        assert!(GaugeSpec::Example37.inverse(0.0).is_err());
        assert!(GaugeSpec::Example37.inverse(1.01).is_err());
        assert!(p(2.0).inverse(-3.0).is_err());
    }

    #[test]
    fn h_power_closed_form() {
        let (h, d) = p(1.5).h_and_hprime(8.0).unwrap();
        assert!(rel(h, 4.0) < 1e-15, "h(8) = 8^(2/3) = 4, got {h}");
        assert!(rel(d, 1.0 / 3.0) < 1e-15);
        let (h, d) = p(2.0).h_and_hprime(16.0).unwrap();
        assert!(rel(h, 4.0) < 1e-15 && rel(d, 0.125) < 1e-15);
    }

    #[test]
    fn h_example37_against_lambert() {
        // h(x) = x / W(e x), h'(x) = 1 / (W(e x) + 1)
        for &k in &[1.0, 10.0, 100.0] {
            let (h, d) = GaugeSpec::Example37.h_and_hprime(k).unwrap();
            let w = lambert_w(E * k).unwrap();
            assert!(rel(h, k / w) < 1e-12, "k = {k}");
            assert!(rel(d, 1.0 / (w + 1.0)) < 1e-8, "k = {k}");
        }
    }

    #[test]
    fn validation_examples() {
        let r = p(1.5).validate((1e-12, 1.0));
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.log_concave_up_to, Some(1.0));

        let r = p(1.0).validate((1e-12, 1.0));
        assert!(r.passed("convexity"));
        assert!(!r.passed("fprime_vanishes_at_zero"));
        assert!(!r.property_r());

        let r = GaugeSpec::Example37.validate((1e-12, 1.0));
        assert!(r.all_passed(), "{r:?}");
        assert!(r.property_r());
        assert_eq!(r.log_concave_up_to, Some(1.0));
    }

    #[test]
    fn rv_examples() {
        let devs = p(1.5).rv_index_check(&[2.0, 1.0], 1e-3).unwrap();
        assert!(devs[0].forward < 1e-14 && devs[0].inverse < 1e-14);
        assert_eq!(devs[1].forward, 0.0);
        assert_eq!(devs[1].inverse, 0.0);

        let devs = GaugeSpec::Example37.rv_index_check(&[2.0], 1e-10).unwrap();
        assert!(devs[0].inverse < 0.05, "{devs:?}");
        // asymptotic inverse ratio (1/a) log(e/x) / (log(e/x) - log a)
        let l = 1.0 - (1e-10f64).ln();
        let predicted = 0.5 * l / (l - 2f64.ln());
        assert!((devs[0].inverse - (predicted - 0.5)).abs() < 0.01);

        assert!(GaugeSpec::Example37.rv_index_check(&[-1.0], 1e-3).is_err());
    }
}
