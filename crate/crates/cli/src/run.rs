//! One function per experiment. Each turns resolved settings into a
//! [`Report`]; level-wise numerical failures are recorded and skipped.

use serde::Serialize;
use serde_json::json;
use sparselab::experiments::{
    domination_experiment, scale_bounds_experiment, single_scale_experiment, sparsity_experiment, sup,
    weighted_norm_experiment, DominatedOperator,
};
use sparselab::grid::dyadic_family;
use sparselab::interpolation::{critical_index, gain_exponent, EndpointPair};
use sparselab::oscillatory::{badset_measure, iq_l2_norm, LocalizedPiece, PolynomialPhase};
use sparselab::random_set::{inclusion_probability, sample_random_set};
use sparselab::scale::{concentration_experiment, concentration_scale, opnorm_multiplier, ScaleBlock};
use sparselab::stats::{linear_fit, median};
use sparselab::weights::{ap_report, check_ww_conditions, dual_weight, power_weight, rh_report};
use sparselab::{GridWindow, LabError, Result};

use crate::config::{Format, Operator, Resolved};
use crate::output::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SampleSet,
    Opnorm,
    Concentration,
    ScaleBounds,
    SparseCheck,
    Domination,
    WeightChar,
    WwCheck,
    Wnorm,
    OscDecay,
    Badset,
    Interp,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::SampleSet,
        Experiment::Opnorm,
        Experiment::Concentration,
        Experiment::ScaleBounds,
        Experiment::SparseCheck,
        Experiment::Domination,
        Experiment::WeightChar,
        Experiment::WwCheck,
        Experiment::Wnorm,
        Experiment::OscDecay,
        Experiment::Badset,
        Experiment::Interp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SampleSet => "sample-set",
            Experiment::Opnorm => "opnorm",
            Experiment::Concentration => "concentration",
            Experiment::ScaleBounds => "scale-bounds",
            Experiment::SparseCheck => "sparse-check",
            Experiment::Domination => "domination",
            Experiment::WeightChar => "weight-char",
            Experiment::WwCheck => "ww-check",
            Experiment::Wnorm => "wnorm",
            Experiment::OscDecay => "osc-decay",
            Experiment::Badset => "badset",
            Experiment::Interp => "interp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn default_format(self) -> Format {
        match self {
            Experiment::ScaleBounds | Experiment::WwCheck | Experiment::Interp => Format::Json,
            _ => Format::Csv,
        }
    }

    pub fn run(self, s: &Resolved) -> Result<Report> {
        let mut report = Report::new(self.name());
        match self {
            Experiment::SampleSet => sample_set(s, &mut report)?,
            Experiment::Opnorm => opnorm(s, &mut report)?,
            Experiment::Concentration => concentration(s, &mut report)?,
            Experiment::ScaleBounds => scale_bounds(s, &mut report)?,
            Experiment::SparseCheck => sparse_check(s, &mut report)?,
            Experiment::Domination => domination(s, &mut report)?,
            Experiment::WeightChar => weight_char(s, &mut report)?,
            Experiment::WwCheck => ww_check(s, &mut report)?,
            Experiment::Wnorm => wnorm(s, &mut report)?,
            Experiment::OscDecay => osc_decay(s, &mut report)?,
            Experiment::Badset => badset(s, &mut report)?,
            Experiment::Interp => interp(s, &mut report)?,
        }
        Ok(report)
    }
}

/// Errors that mean the request itself is malformed. These abort the run
/// instead of being recorded as a failed row.
pub fn is_usage_error(e: &LabError) -> bool {
    matches!(
        e,
        LabError::InvalidParameter(_) | LabError::UnderResolved { .. } | LabError::Parse(_)
    )
}

/// Run `f` for every level; usage errors propagate, others are recorded.
fn per_level<T>(s: &Resolved, report: &mut Report, mut f: impl FnMut(u32) -> Result<T>) -> Result<Vec<(u32, T)>> {
    let mut out = Vec::new();
    for k in s.k_min..=s.k_max {
        match f(k) {
            Ok(v) => out.push((k, v)),
            Err(e) if is_usage_error(&e) => return Err(e),
            Err(e) => report.fail(json!({ "k": k }), &e),
        }
    }
    Ok(out)
}

fn sample_set(s: &Resolved, report: &mut Report) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        n: i64,
        probability: f64,
    }
    let set = sample_random_set(s.alpha, s.seed, s.n as u64)?;
    let active = set.active();
    let expected: f64 = (1..=s.n as i64)
        .map(|n| 2.0 * inclusion_probability(s.alpha, n))
        .sum();
    report.extra("active", active.len());
    report.extra("expected_active", expected);
    for n in active {
        report.push(Row {
            n,
            probability: inclusion_probability(s.alpha, n),
        });
    }
    Ok(())
}

fn opnorm(s: &Resolved, report: &mut Report) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        k: u32,
        opnorm: f64,
        l1_norm: f64,
        coefficient_bound: f64,
        scale: f64,
        ratio: f64,
    }
    for (k, block) in per_level(s, report, |k| ScaleBlock::sample(s.alpha, s.seed, k))? {
        let opnorm = opnorm_multiplier(&block);
        let scale = concentration_scale(s.alpha, k);
        report.push(Row {
            k,
            opnorm,
            l1_norm: block.l1_norm(),
            coefficient_bound: block.coefficient_bound(),
            scale,
            ratio: opnorm / scale,
        });
    }
    Ok(())
}

fn concentration(s: &Resolved, report: &mut Report) -> Result<()> {
    let mut summary = Vec::new();
    for (_, table) in per_level(s, report, |k| {
        concentration_experiment(s.alpha, k..=k, s.trials, s.c, s.seed)
    })? {
        table.rows.iter().for_each(|r| report.push(r));
        summary.extend(table.summary);
    }
    report.extra("summary", summary);
    Ok(())
}

fn scale_bounds(s: &Resolved, report: &mut Report) -> Result<()> {
    let mut summary = Vec::new();
    for (k, rows) in per_level(s, report, |k| scale_bounds_experiment(s.alpha, k, s.trials, s.seed))? {
        let l1 = sup(rows.iter().map(|r| r.l1_ratio()));
        let l2 = sup(rows.iter().map(|r| r.l2_ratio()));
        summary.push(json!({ "k": k, "l1_ratio_sup": l1, "l2_ratio_sup": l2 }));
        for (trial, r) in rows.iter().enumerate() {
            let mut row = serde_json::to_value(r).expect("report serializes");
            row["trial"] = json!(trial);
            row["l1_ratio"] = json!(r.l1_ratio());
            row["l2_ratio"] = json!(r.l2_ratio());
            report.push(row);
        }
    }
    report.extra("summary", summary);
    Ok(())
}

fn sparse_check(s: &Resolved, report: &mut Report) -> Result<()> {
    let rows = sparsity_experiment(s.r, s.n, s.trials, s.seed)?;
    for row in &rows {
        if !row.sparse {
            report.fail(
                json!({ "trial": row.trial }),
                &LabError::NotSparse(format!("minimal density {}", row.min_density)),
            );
        }
        report.push(row);
    }
    report.extra("sparse", rows.iter().filter(|r| r.sparse).count());
    report.extra("max_cubes", rows.iter().map(|r| r.cubes).max().unwrap_or(0));
    Ok(())
}

fn domination(s: &Resolved, report: &mut Report) -> Result<()> {
    let op = match s.operator {
        Operator::Hilbert => DominatedOperator::Hilbert,
        Operator::RandomHilbert => DominatedOperator::RandomHilbert { alpha: s.alpha },
    };
    let rows = domination_experiment(op, s.r, s.n, s.trials, s.seed)?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    report.extra("sup_ratio", sup(ratios.iter().copied()));
    report.extra("median_ratio", median(&ratios));
    rows.iter().for_each(|r| report.push(r));
    Ok(())
}

fn weight_window(s: &Resolved) -> Result<GridWindow> {
    GridWindow::new(-(s.n as i64), s.n as i64)
}

fn weight_char(s: &Resolved, report: &mut Report) -> Result<()> {
    let window = weight_window(s)?;
    let family = dyadic_family(window);
    let w = power_weight(s.weight.a, window)?;
    let sigma = dual_weight(&w, s.p)?;
    let rows = [
        ("w", ap_report(&w, s.p, &family)?),
        ("w", rh_report(&w, s.r, &family)?),
        ("sigma", rh_report(&sigma, s.r, &family)?),
    ];
    for (name, rep) in rows {
        let mut row = serde_json::to_value(&rep).expect("report serializes");
        row["weight"] = json!(name);
        report.push(row);
    }
    Ok(())
}

fn ww_check(s: &Resolved, report: &mut Report) -> Result<()> {
    let window = weight_window(s)?;
    let w = power_weight(s.weight.a, window)?;
    let rep = check_ww_conditions(&w, s.p, s.alpha, s.r, &dyadic_family(window))?;
    report.extra("holds", rep.holds);
    report.push(rep);
    Ok(())
}

/// Weighted norms of `H_α` for `n = 2^k`, plus the single-scale sparse
/// bound at scale `k` for the same weight.
fn wnorm(s: &Resolved, report: &mut Report) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        k: u32,
        n: usize,
        sup_ratio: f64,
        median_ratio: f64,
        single_scale_sup: f64,
        single_scale_dual_sup: f64,
    }
    let levels = per_level(s, report, |k| {
        let n = 1usize << k;
        let norms = weighted_norm_experiment(s.alpha, s.p, s.weight.a, n, s.trials, s.seed)?;
        let single = single_scale_experiment(s.weight.a, s.p, s.r, k, s.trials, s.seed)?;
        Ok((n, norms, single))
    })?;
    for (k, (n, norms, single)) in levels {
        let ratios: Vec<f64> = norms.iter().map(|r| r.ratio).collect();
        report.push(Row {
            k,
            n,
            sup_ratio: sup(ratios.iter().copied()),
            median_ratio: median(&ratios),
            single_scale_sup: sup(single.iter().map(|r| r.ratio())),
            single_scale_dual_sup: sup(single.iter().map(|r| r.ratio_dual())),
        });
    }
    Ok(())
}

fn phase(s: &Resolved) -> Result<PolynomialPhase> {
    PolynomialPhase::monomial(s.phase.d)
}

fn osc_decay(s: &Resolved, report: &mut Report) -> Result<()> {
    let phase = phase(s)?;
    let norms = per_level(s, report, |k| {
        iq_l2_norm(&LocalizedPiece::new(phase.clone(), k, 0.0, s.ppw)?)
    })?;
    let eta = (norms.len() >= 2).then(|| {
        let x: Vec<f64> = norms.iter().map(|&(k, _)| f64::from(k)).collect();
        let y: Vec<f64> = norms.iter().map(|&(_, v)| v.log2()).collect();
        -linear_fit(&x, &y).slope
    });
    for (k, norm) in norms {
        report.push(json!({ "k": k, "norm": norm, "fitted_eta": eta }));
    }
    Ok(())
}

fn badset(s: &Resolved, report: &mut Report) -> Result<()> {
    let phase = phase(s)?;
    for (_, rep) in per_level(s, report, |k| {
        badset_measure(&LocalizedPiece::new(phase.clone(), k, 0.0, s.ppw)?, s.eps)
    })? {
        report.push(rep);
    }
    Ok(())
}

fn interp(s: &Resolved, report: &mut Report) -> Result<()> {
    let pair = EndpointPair::random_hilbert(s.alpha)?;
    let c = critical_index(pair)?;
    let eta = gain_exponent(pair, s.r)?;
    report.extra("theta0", c.theta0);
    report.extra("r0", c.r0);
    report.extra("eta", eta);
    report.push(json!({ "alpha": s.alpha, "r": s.r, "theta0": c.theta0, "r0": c.r0, "eta": eta }));
    Ok(())
}
