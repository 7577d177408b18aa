//! Routes a validated [`RunConfig`] to the lab, fractal and gauge operations.

use qcmod::lab::{self, families, ExperimentResult, FamilySequence, Value, Verdict};
use qcmod::seqnorm::{choose_start_index, window_values};
use qcmod::{CantorComplex, Error, GaugeSpec, Result, WeightSequence};

use crate::config::{Experiment, RunConfig, WeightsConfig, DEFAULT_HORIZON};

/// Largest weight prefix generated automatically.
pub const MAX_AUTO_WEIGHTS: u128 = 1 << 24;

/// Tolerance for identities that are exact for power gauges.
pub const EXACT_TOL: f64 = 1e-12;

/// Result of one run, with the configuration as actually resolved.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub config: RunConfig,
    pub result: ExperimentResult,
    /// Additional `(file name, contents)` pairs.
    pub attachments: Vec<(String, String)>,
}

pub fn dispatch(config: &RunConfig) -> Result<Outcome> {
    let mut config = config.clone();
    let gauge = config.gauge.spec()?;
    let mut attachments = Vec::new();
    let result = match config.experiment {
        Experiment::GaugeCheck => gauge_check(&config, &gauge)?,
        Experiment::CantorExport => {
            let level = config.params.level.expect("filled");
            let complex = CantorComplex::build(gauge, level, Some(config.n))?;
            let doc = complex.export_geometry(level)?;
            attachments.push(("geometry.json".to_string(), doc.to_json()?));
            geometry_rows(&complex, &doc)
        }
        Experiment::Rho => {
            let count = config.params.rho_count.expect("filled");
            let pi = resolve_weights(&mut config, &gauge, count as u128)?;
            rho_rows(&gauge, &pi)?
        }
        _ => {
            let (depth, needed) = requirements(&config);
            let complex = CantorComplex::build(gauge, depth, Some(config.n))?;
            let pi = resolve_weights(&mut config, &gauge, needed)?;
            run_model_experiment(&config, &complex, &pi)?
        }
    };
    let mut result = result;
    result
        .notes
        .push(format!("gauge {gauge}, n = {}", config.n));
    Ok(Outcome {
        config,
        result,
        attachments,
    })
}

fn run_model_experiment(
    config: &RunConfig,
    complex: &CantorComplex,
    pi: &WeightSequence,
) -> Result<ExperimentResult> {
    let p = &config.params;
    let levels = config.levels[0]..=config.levels[1];
    let m = config.depth;
    match config.experiment {
        Experiment::KUpper => lab::k_upper_curve(complex, pi, m, levels),
        Experiment::Kappa => {
            lab::kappa_depth_trend(complex, pi, p.depths.as_ref().unwrap(), levels)
        }
        Experiment::Ampliation => lab::ampliation_check(
            complex,
            pi,
            m,
            p.level.unwrap(),
            p.m_list.as_ref().unwrap(),
            p.epsilon.unwrap(),
        ),
        Experiment::Scaling => lab::subcube_scaling_check(
            complex,
            pi,
            p.word_lengths.as_ref().unwrap(),
            p.rel_depth.unwrap(),
            p.refine.unwrap(),
        ),
        Experiment::SmallSet => {
            let mut fams = Vec::new();
            for &g in p.generations.as_ref().unwrap() {
                for &k in p.cell_counts.as_ref().unwrap() {
                    if (k as u128) <= complex.cell_count(g) {
                        fams.push(families::leading_cells(complex, g, k)?);
                    }
                }
            }
            lab::small_set_bound_check(complex, pi, &fams, p.rel_depth.unwrap(), p.refine.unwrap())
        }
        Experiment::SingularDemo => {
            let g = p.generations.as_ref().unwrap()[0];
            let n = complex.n();
            let sequences = vec![
                FamilySequence {
                    label: "nested".into(),
                    steps: families::nested_corner(n, g),
                },
                FamilySequence {
                    label: "pair".into(),
                    steps: families::nested_pair(n, g),
                },
                FamilySequence {
                    label: "fragmented".into(),
                    steps: families::fragmented_half(complex, g)?,
                },
            ];
            lab::singular_demo(
                complex,
                pi,
                &sequences,
                p.rel_depth.unwrap(),
                p.refine.unwrap(),
            )
        }
        Experiment::ShiftCheck => {
            lab::shift_invariance_check(complex, pi, m, levels, p.shifts.as_ref().unwrap())
        }
        Experiment::GaugeCheck | Experiment::CantorExport | Experiment::Rho => {
            unreachable!("handled without a model")
        }
    }
}

/// Complex depth and weight count an experiment needs.
fn requirements(config: &RunConfig) -> (usize, u128) {
    let p = &config.params;
    let n = config.n as u32;
    let cells = |level: usize| 1u128 << (n as usize * level).min(100);
    let top = config.levels[1];
    let max = |v: &Option<Vec<usize>>| {
        v.as_ref()
            .and_then(|v| v.iter().max().copied())
            .unwrap_or(0)
    };
    match config.experiment {
        Experiment::KUpper => (config.depth, 2 * cells(top)),
        Experiment::Kappa => (max(&p.depths), 2 * cells(top)),
        Experiment::ShiftCheck => (config.depth, 2 * cells(top) + max(&p.shifts) as u128),
        Experiment::Ampliation => (
            config.depth,
            2 * cells(p.level.unwrap()) * max(&p.m_list) as u128,
        ),
        Experiment::Scaling => {
            let d = p.rel_depth.unwrap();
            (max(&p.word_lengths) + d + p.refine.unwrap(), 2 * cells(d))
        }
        Experiment::SmallSet => {
            let d = p.rel_depth.unwrap();
            let depth = max(&p.generations) + d + p.refine.unwrap();
            (depth, 2 * max(&p.cell_counts) as u128 * cells(d))
        }
        Experiment::SingularDemo => {
            let d = p.rel_depth.unwrap();
            let g = max(&p.generations);
            (g + d + p.refine.unwrap(), cells(g + d).max(4 * cells(d)))
        }
        Experiment::GaugeCheck | Experiment::CantorExport | Experiment::Rho => (0, 0),
    }
}

/// Builds the weight prefix and records the resolved start index and count.
fn resolve_weights(
    config: &mut RunConfig,
    gauge: &GaugeSpec,
    needed: u128,
) -> Result<WeightSequence> {
    let m_list_max = config
        .params
        .m_list
        .as_ref()
        .and_then(|v| v.iter().max().copied());
    // ampliation always runs on the tail rho^(eps) chosen by the start-index search
    let tail_eps = match config.experiment {
        Experiment::Ampliation => config.params.epsilon,
        _ => None,
    };
    match &mut config.weights {
        WeightsConfig::Rho {
            start,
            epsilon,
            m_max,
            horizon,
            count,
        } => {
            let c = auto_count(*count, needed)?;
            if start.is_none() && epsilon.is_none() {
                *epsilon = tail_eps;
            }
            if start.is_none() {
                *start = Some(match *epsilon {
                    Some(eps) => {
                        let mm = *m_max.get_or_insert(m_list_max.unwrap_or(2));
                        let hz = *horizon.get_or_insert(DEFAULT_HORIZON);
                        choose_start_index(gauge, eps, mm as u64, hz)?
                    }
                    None => 1,
                });
            }
            *count = Some(c);
            WeightSequence::rho(gauge, start.unwrap(), c)
        }
        WeightsConfig::Harmonic { count } => {
            let c = auto_count(*count, needed)?;
            *count = Some(c);
            WeightSequence::harmonic(c)
        }
        WeightsConfig::Custom { values } => WeightSequence::custom(values.clone()),
    }
}

fn auto_count(explicit: Option<usize>, needed: u128) -> Result<usize> {
    match explicit {
        Some(c) => Ok(c),
        None if needed > MAX_AUTO_WEIGHTS => Err(Error::Size {
            what: "weight prefix",
            requested: needed,
            limit: MAX_AUTO_WEIGHTS,
        }),
        None => Ok(needed.max(1) as usize),
    }
}

const PROPERTY_R_CHECKS: [&str; 4] = [
    "positive_increasing",
    "vanishes_at_zero",
    "fprime_vanishes_at_zero",
    "convexity",
];

fn gauge_check(config: &RunConfig, gauge: &GaugeSpec) -> Result<ExperimentResult> {
    let p = &config.params;
    let [lo, hi] = p.t0_search.unwrap();
    let report = gauge.validate((lo, hi.min(gauge.x_max())));
    let x = p.x_probe.unwrap();
    let rv = gauge.rv_index_check(p.a_list.as_ref().unwrap(), x)?;

    let mut out = ExperimentResult {
        id: "gauge_check".into(),
        columns: ["check", "measured", "threshold", "passed"]
            .map(String::from)
            .to_vec(),
        rows: Vec::new(),
        verdicts: Vec::new(),
        notes: Vec::new(),
    };
    for c in &report.checks {
        out.rows.push(vec![
            c.name.into(),
            c.measured.into(),
            c.threshold.into(),
            c.passed.to_string().into(),
        ]);
        let gap = (c.threshold - c.measured).abs();
        out.verdicts.push(Verdict {
            invariant: c.name.to_string(),
            tolerance: c.threshold,
            measured: c.measured,
            slack: if c.passed { gap } else { -gap },
            pass: c.passed,
            fatal: PROPERTY_R_CHECKS.contains(&c.name),
            detail: c.detail.clone(),
        });
    }
    let (tol, fatal) = if gauge.is_power() {
        (EXACT_TOL, true)
    } else {
        (0.05, false)
    };
    for d in &rv {
        for (kind, dev) in [("forward", d.forward), ("inverse", d.inverse)] {
            let name = format!("rv_{kind}_a{}", d.a);
            out.rows.push(vec![
                name.as_str().into(),
                dev.into(),
                tol.into(),
                (dev <= tol).to_string().into(),
            ]);
            out.verdicts.push(Verdict::at_most(
                &name,
                dev,
                tol,
                fatal,
                format!("regular-variation deviation at x = {x:e}"),
            ));
        }
    }
    out.notes.push(match report.log_concave_up_to {
        Some(t0) => format!("log f concave on sampled grid up to t0 = {t0:e}"),
        None => "log f not concave at the smallest sampled point".into(),
    });
    out.notes
        .push(format!("property (R): {}", report.property_r()));
    Ok(out)
}

fn geometry_rows(
    complex: &CantorComplex,
    doc: &qcmod::fractal::GeometryDocument,
) -> ExperimentResult {
    let mut columns = vec!["word".to_string()];
    columns.extend((1..=complex.n()).map(|j| format!("x{j}")));
    columns.extend(["side".to_string(), "measure".to_string()]);
    let rows = doc
        .records
        .iter()
        .map(|r| {
            let word: Vec<String> = r.word.iter().map(u32::to_string).collect();
            let mut row: Vec<Value> = vec![word.join(".").into()];
            row.extend(r.corner.iter().map(|&x| Value::from(x)));
            row.push(r.side.into());
            row.push(r.measure.into());
            row
        })
        .collect();
    ExperimentResult {
        id: "cantor_export".into(),
        columns,
        rows,
        verdicts: Vec::new(),
        notes: vec![format!("generation {} cells of the complex", doc.level)],
    }
}

fn rho_rows(gauge: &GaugeSpec, pi: &WeightSequence) -> Result<ExperimentResult> {
    let ks: Vec<u64> = (0..pi.len() as u64).map(|i| pi.start_index() + i).collect();
    let window = window_values(gauge, pi, &ks)?;
    let mut out = ExperimentResult {
        id: "rho".into(),
        columns: ["k", "rho", "window"].map(String::from).to_vec(),
        rows: ks
            .iter()
            .zip(pi.values())
            .zip(&window)
            .map(|((&k, &r), &w)| vec![k.into(), r.into(), w.into()])
            .collect(),
        verdicts: Vec::new(),
        notes: Vec::new(),
    };
    if gauge.is_power() {
        let target = 1.0 / gauge.index();
        let dev = window
            .iter()
            .map(|w| (w - target).abs())
            .fold(0.0, f64::max);
        out.verdicts.push(Verdict::at_most(
            "window_equals_inverse_index",
            dev,
            EXACT_TOL,
            true,
            "max |m rho_m f^-1(1/m) - 1/s|".into(),
        ));
    } else {
        let spread = window.iter().map(|w| w.log2().abs()).fold(0.0, f64::max);
        out.verdicts.push(Verdict::at_most(
            "window_within_factor_two",
            spread,
            1.0,
            false,
            "max |log2(m rho_m f^-1(1/m))|".into(),
        ));
    }
    Ok(out)
}
