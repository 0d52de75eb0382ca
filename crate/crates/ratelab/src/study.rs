//! The four rate studies and the basket pricing demonstration.
//!
//! Every study is deterministic for a fixed seed: randomness streams are
//! keyed by logical path index, never by worker thread, and reductions walk
//! results in index order. Rate acceptance uses weighted log-log regression,
//! discarding the smallest ladder point when its standard error exceeds 30%
//! of the estimate.

use crate::config::{StudyConfig, StudyKind};
use anyhow::{anyhow, bail, Context, Result};
use pidenet::builder::Builder;
use pidenet::model::{model_from_file, CoefficientNets, JumpDiffusionSpec, ModelFile, ModelParams};
use pidenet::pricing::{
    mc_price, payoff_network, schedule_from_epsilon, select_realization_set, CalibrationConstants,
    ErrorMeasure, McConfig, PayoffKind, ReferenceConfig,
};
use pidenet::simulate::{euler_path, sample_realization, PathParams, Variant};
use pidenet::stats::{mean_and_se, weighted_line_fit, SlopeFit};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub slope: f64,
    pub slope_se: f64,
    pub r_squared: f64,
}

impl NamedFit {
    fn new(name: impl Into<String>, fit: SlopeFit) -> Self {
        NamedFit {
            name: name.into(),
            slope: fit.slope,
            slope_se: fit.slope_se,
            r_squared: fit.r_squared,
        }
    }

    pub fn band(&self) -> f64 {
        1.96 * self.slope_se
    }
}

/// Tabular study output plus the fitted slopes. The CSV rendering contains
/// only the table; timing goes to the human-readable summary so that fixed
/// seeds give byte-identical files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyResult {
    pub kind: StudyKind,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub fits: Vec<NamedFit>,
    pub meta: Vec<(String, f64)>,
    pub wall_seconds: f64,
}

impl StudyResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "study {} ({} rows, {:.2} s)\n",
            self.kind.as_str(),
            self.rows.len(),
            self.wall_seconds
        );
        for f in &self.fits {
            out.push_str(&format!(
                "  {}: slope {:.4} ± {:.4} (95% band), R^2 {:.4}\n",
                f.name,
                f.slope,
                f.band(),
                f.r_squared
            ));
        }
        for (k, v) in &self.meta {
            out.push_str(&format!("  {k}: {v:.4}\n"));
        }
        out
    }

    pub fn fit(&self, name: &str) -> Option<&NamedFit> {
        self.fits.iter().find(|f| f.name == name)
    }
}

fn default_model(kind: StudyKind) -> ModelFile {
    match kind {
        StudyKind::EulerRate => ModelFile {
            family: "merton".into(),
            d: 1,
            params: ModelParams::default(),
            declared_constants: None,
        },
        StudyKind::TruncRate => ModelFile {
            family: "stable_like".into(),
            d: 1,
            params: ModelParams {
                rho: Some(0.5),
                ..Default::default()
            },
            declared_constants: None,
        },
        StudyKind::CompMcRate => ModelFile {
            family: "finite_activity".into(),
            d: 1,
            params: ModelParams {
                atoms: Some(vec![(0.6, vec![0.9]), (0.4, vec![-0.45])]),
                ..Default::default()
            },
            declared_constants: None,
        },
        StudyKind::SizeScaling => ModelFile {
            family: "black_scholes".into(),
            d: 1,
            params: ModelParams::default(),
            declared_constants: None,
        },
    }
}

fn load_model(cfg: &StudyConfig) -> Result<ModelFile> {
    if let Some(path) = &cfg.model_path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading model file {}", path.display()))?;
        return ModelFile::from_json(&text).map_err(|e| anyhow!("{e}"));
    }
    Ok(cfg
        .model
        .clone()
        .unwrap_or_else(|| default_model(cfg.study)))
}

fn spec_for(
    cfg: &StudyConfig,
    d_override: Option<usize>,
) -> Result<(JumpDiffusionSpec, CoefficientNets)> {
    let mut file = load_model(cfg)?;
    if let Some(d) = d_override {
        file.d = d;
    }
    model_from_file(&file).map_err(|e| anyhow!("{e}"))
}

fn x0_for(cfg: &StudyConfig, d: usize) -> Result<Vec<f64>> {
    match &cfg.x0 {
        Some(x) => {
            if x.len() != d {
                bail!("x0 has {} coordinates but the model has d = {d}", x.len());
            }
            Ok(x.clone())
        }
        None => Ok(vec![1.0; d]),
    }
}

/// Weighted log-log fit of (x, estimate ± se) with the smallest-point
/// discard rule.
fn rate_fit(points: &[(f64, f64, f64)]) -> SlopeFit {
    let mut pts: Vec<(f64, f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(_, est, _)| est > 0.0)
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    if pts.len() > 2 {
        let (x, est, se) = pts[0];
        if se > 0.3 * est {
            pts.remove(0);
            let _ = x;
        }
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let w: Vec<f64> = pts
        .iter()
        .map(|p| {
            if p.2 > 0.0 {
                let rel = p.2 / p.1;
                1.0 / (rel * rel)
            } else {
                1.0
            }
        })
        .collect();
    weighted_line_fit(&lx, &ly, &w)
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let start = Instant::now();
    let mut result = match cfg.study {
        StudyKind::EulerRate => euler_rate(cfg)?,
        StudyKind::TruncRate => trunc_rate(cfg)?,
        StudyKind::CompMcRate => comp_mc_rate(cfg)?,
        StudyKind::SizeScaling => size_scaling(cfg)?,
    };
    result.wall_seconds = start.elapsed().as_secs_f64();
    if let Some(path) = &cfg.out {
        std::fs::write(path, result.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(result)
}

/// Strong Euler rate: coupled fine/coarse paths on one realization per path
/// index; squared sup error against the step size.
fn euler_rate(cfg: &StudyConfig) -> Result<StudyResult> {
    let (spec, _) = spec_for(cfg, None)?;
    let x0 = x0_for(cfg, spec.d)?;
    let top = *cfg.k_ladder.iter().max().expect("validated");
    let ref_k = cfg.ref_k.unwrap_or(top + 3);
    let n_fine = 1usize << ref_k;
    let params = PathParams::new(cfg.t_horizon, n_fine);
    let ladder: Vec<u32> = cfg.k_ladder.clone();

    let per_path: Vec<Result<Vec<f64>>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let r = sample_realization(&spec, &params, cfg.seed, i as u64)
                .map_err(|e| anyhow!("{e}"))?;
            let fine = euler_path(&spec, None, &x0, &r, Variant::ExactCoeff, 1)
                .map_err(|e| anyhow!("{e}"))?;
            ladder
                .iter()
                .map(|&k| {
                    let stride = 1usize << (ref_k - k);
                    let coarse = euler_path(&spec, None, &x0, &r, Variant::ExactCoeff, stride)
                        .map_err(|e| anyhow!("{e}"))?;
                    fine.sup_sq_distance(&coarse).map_err(|e| anyhow!("{e}"))
                })
                .collect()
        })
        .collect();
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut fit_pts = Vec::new();
    for (j, &k) in ladder.iter().enumerate() {
        let col: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
        let (est, se) = mean_and_se(&col);
        let h = cfg.t_horizon / (1u64 << k) as f64;
        rows.push(vec![h, est, se]);
        fit_pts.push((h, est, se));
    }
    let fit = rate_fit(&fit_pts);
    Ok(StudyResult {
        kind: cfg.study,
        columns: vec!["h".into(), "estimate".into(), "std_error".into()],
        rows,
        fits: vec![NamedFit::new("squared-error-vs-h", fit)],
        meta: vec![("ref_k".into(), ref_k as f64)],
        wall_seconds: 0.0,
    })
}

/// Truncation rate: one realization sampled at a fine level per path, the
/// ladder paths drop the jumps below their own level.
fn trunc_rate(cfg: &StudyConfig) -> Result<StudyResult> {
    let (spec, _) = spec_for(cfg, None)?;
    let x0 = x0_for(cfg, spec.d)?;
    let min_delta = cfg
        .delta_ladder
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let ref_delta = cfg.ref_delta.unwrap_or(min_delta / 100.0);
    let n_steps = cfg.trunc_n_steps.unwrap_or(64);
    let params = PathParams::new(cfg.t_horizon, n_steps).with_delta(ref_delta);
    let ladder = cfg.delta_ladder.clone();

    let per_path: Vec<Result<Vec<f64>>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let r = sample_realization(&spec, &params, cfg.seed, i as u64)
                .map_err(|e| anyhow!("{e}"))?;
            let reference = euler_path(&spec, None, &x0, &r, Variant::ExactCoeff, 1)
                .map_err(|e| anyhow!("{e}"))?;
            ladder
                .iter()
                .map(|&delta| {
                    let trunc = euler_path(&spec, None, &x0, &r, Variant::Truncated { delta }, 1)
                        .map_err(|e| anyhow!("{e}"))?;
                    reference
                        .sup_sq_distance(&trunc)
                        .map_err(|e| anyhow!("{e}"))
                })
                .collect()
        })
        .collect();
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut fit_pts = Vec::new();
    for (j, &delta) in ladder.iter().enumerate() {
        let col: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
        let (est, se) = mean_and_se(&col);
        rows.push(vec![delta, est, se]);
        fit_pts.push((delta, est, se));
    }
    let fit = rate_fit(&fit_pts);
    Ok(StudyResult {
        kind: cfg.study,
        columns: vec!["delta".into(), "estimate".into(), "std_error".into()],
        rows,
        fits: vec![NamedFit::new("squared-error-vs-delta", fit)],
        meta: vec![("ref_delta".into(), ref_delta)],
        wall_seconds: 0.0,
    })
}

/// Compensator Monte Carlo rate: exact-compensator reference against the
/// M-sample variant on shared realizations.
fn comp_mc_rate(cfg: &StudyConfig) -> Result<StudyResult> {
    let (spec, nets) = spec_for(cfg, None)?;
    let x0 = x0_for(cfg, spec.d)?;
    let m_max = *cfg.m_ladder.iter().max().expect("validated");
    let n_steps = cfg.mc_n_steps.unwrap_or(16);
    let delta = cfg.mc_delta.unwrap_or(0.0);
    let params = PathParams::new(cfg.t_horizon, n_steps)
        .with_delta(delta)
        .with_m_comp(m_max);
    let ladder = cfg.m_ladder.clone();

    let per_path: Vec<Result<Vec<f64>>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let r = sample_realization(&spec, &params, cfg.seed, i as u64)
                .map_err(|e| anyhow!("{e}"))?;
            let reference = euler_path(&spec, Some(&nets), &x0, &r, Variant::NetCoeff, 1)
                .map_err(|e| anyhow!("{e}"))?;
            ladder
                .iter()
                .map(|&m| {
                    let mc = euler_path(
                        &spec,
                        Some(&nets),
                        &x0,
                        &r,
                        Variant::NetCoeffMc { m_used: m },
                        1,
                    )
                    .map_err(|e| anyhow!("{e}"))?;
                    reference.sup_sq_distance(&mc).map_err(|e| anyhow!("{e}"))
                })
                .collect()
        })
        .collect();
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut fit_pts = Vec::new();
    for (j, &m) in ladder.iter().enumerate() {
        let col: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
        let (est, se) = mean_and_se(&col);
        rows.push(vec![m as f64, est, se]);
        fit_pts.push((m as f64, est, se));
    }
    let fit = rate_fit(&fit_pts);
    Ok(StudyResult {
        kind: cfg.study,
        columns: vec!["m".into(), "estimate".into(), "std_error".into()],
        rows,
        fits: vec![NamedFit::new("squared-error-vs-m", fit)],
        meta: vec![("delta".into(), delta)],
        wall_seconds: 0.0,
    })
}

/// Size of the assembled approximator over the accuracy/dimension ladder,
/// with log-log exponent fits per dimension and per accuracy.
fn size_scaling(cfg: &StudyConfig) -> Result<StudyResult> {
    let calibration = CalibrationConstants {
        c_cal: cfg.c_cal.unwrap_or(0.1),
        r: 1.0,
        q_tilde: None,
    };
    let mut rows = Vec::new();
    let mut predicted_q = 0.0f64;
    let mut predicted_p = 0.0f64;
    for (ci, &d) in cfg.d_ladder.iter().enumerate() {
        let (spec, nets) = spec_for(cfg, Some(d))?;
        let builder = Builder::new(&spec, &nets).map_err(|e| anyhow!("{e}"))?;
        let payoff = payoff_network(
            PayoffKind::ParametricBasketCall {
                weights: vec![1.0 / d as f64; d],
            },
            d,
        )
        .map_err(|e| anyhow!("{e}"))?;
        for (cj, &eps) in cfg.eps_ladder.iter().enumerate() {
            let schedule = schedule_from_epsilon(
                eps,
                d,
                cfg.t_horizon,
                &spec.constants,
                &calibration,
                builder.mode,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let cell_seed = cfg.seed.wrapping_add(
                ((ci * cfg.eps_ladder.len() + cj) as u64).wrapping_mul(0x9e3779b97f4a7c15),
            );
            let approx = builder
                .assemble_approximator(&payoff.hook(cfg.t_horizon), &schedule, cell_seed)
                .map_err(|e| anyhow!("{e}"))?;
            predicted_q = approx.ledger.predicted.q_frak;
            predicted_p = approx.ledger.predicted.p_frak;
            if !approx.ledger.all_hold() {
                bail!("size ledger violation in cell (eps={eps}, d={d})");
            }
            rows.push(vec![
                eps,
                d as f64,
                approx.net.size() as f64,
                schedule.n_steps as f64,
                schedule.n_realizations as f64,
            ]);
        }
    }

    // exponent fits: size vs 1/eps for each d, size vs d for each eps
    let mut fits = Vec::new();
    for &d in &cfg.d_ladder {
        let pts: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter(|r| r[1] == d as f64)
            .map(|r| (1.0 / r[0], r[2], 0.0))
            .collect();
        if pts.len() >= 2 {
            fits.push(NamedFit::new(
                format!("size-vs-inv-eps[d={d}]"),
                rate_fit(&pts),
            ));
        }
    }
    for &eps in &cfg.eps_ladder {
        let pts: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter(|r| r[0] == eps)
            .map(|r| (r[1], r[2], 0.0))
            .collect();
        if pts.len() >= 2 {
            fits.push(NamedFit::new(
                format!("size-vs-d[eps={eps}]"),
                rate_fit(&pts),
            ));
        }
    }
    Ok(StudyResult {
        kind: cfg.study,
        columns: vec![
            "epsilon".into(),
            "d".into(),
            "size".into(),
            "n_steps".into(),
            "n_realizations".into(),
        ],
        rows,
        fits,
        meta: vec![
            ("predicted_q_frak".into(), predicted_q),
            ("predicted_p_frak".into(), predicted_p),
        ],
        wall_seconds: 0.0,
    })
}

// ---------------------------------------------------------------------------
// basket demonstration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasketDemoConfig {
    pub model: ModelFile,
    pub x0: Vec<f64>,
    pub weights: Vec<f64>,
    pub strikes: Vec<f64>,
    pub epsilon: f64,
    pub t_horizon: f64,
    pub seed: u64,
    pub c_cal: f64,
    pub max_attempts: usize,
    pub ref_paths: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasketRow {
    pub strike: f64,
    pub mc_price: f64,
    pub mc_se: f64,
    pub net_price: f64,
    pub abs_diff: f64,
}

pub struct BasketDemoResult {
    pub rows: Vec<BasketRow>,
    pub rms_error: f64,
    pub epsilon: f64,
    pub attempts: usize,
    pub network_size: usize,
}

impl BasketDemoResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strike,mc_price,mc_se,net_price,abs_diff\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.strike, r.mc_price, r.mc_se, r.net_price, r.abs_diff
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str("strike        mc_price      net_price     |diff|\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<12.4}  {:<12.6}  {:<12.6}  {:.6}\n",
                r.strike, r.mc_price, r.net_price, r.abs_diff
            ));
        }
        out.push_str(&format!(
            "rms strike error {:.6} (target epsilon {}), accepted after {} attempt(s), network size {}\n",
            self.rms_error, self.epsilon, self.attempts, self.network_size
        ));
        out
    }
}

/// Builds the strike-parametric approximator once, evaluates it on every
/// strike and compares against per-strike Monte Carlo references.
pub fn run_basket_demo(cfg: &BasketDemoConfig) -> Result<BasketDemoResult> {
    if cfg.strikes.is_empty() {
        bail!("the demo needs at least one strike");
    }
    if cfg.strikes.iter().any(|&k| k < 0.0) {
        bail!("strikes must be nonnegative");
    }
    let (spec, nets) = model_from_file(&cfg.model).map_err(|e| anyhow!("{e}"))?;
    let d = spec.d;
    if cfg.x0.len() != d || cfg.weights.len() != d {
        bail!("x0 and weights must have the model dimension d = {d}");
    }
    let x_norm_sq: f64 = cfg.x0.iter().map(|v| v * v).sum();
    let budget = spec.constants.c * (d as f64).powf(spec.constants.p);
    if x_norm_sq.sqrt() > budget {
        bail!(
            "starting point norm {} outside the declared budget {budget}",
            x_norm_sq.sqrt()
        );
    }
    let builder = Builder::new(&spec, &nets).map_err(|e| anyhow!("{e}"))?;
    let payoff = payoff_network(
        PayoffKind::ParametricBasketCall {
            weights: cfg.weights.clone(),
        },
        d,
    )
    .map_err(|e| anyhow!("{e}"))?;
    let schedule = schedule_from_epsilon(
        cfg.epsilon,
        d,
        cfg.t_horizon,
        &spec.constants,
        &CalibrationConstants {
            c_cal: cfg.c_cal,
            r: 1.0,
            q_tilde: None,
        },
        builder.mode,
    )
    .map_err(|e| anyhow!("{e}"))?;
    let measure = ErrorMeasure::PointMass {
        x0: cfg.x0.clone(),
        strikes: cfg.strikes.clone(),
    };
    let reference = ReferenceConfig {
        n_paths: cfg.ref_paths,
        step_factor: 16,
    };
    let selection = select_realization_set(
        &spec,
        &nets,
        &payoff,
        &schedule,
        &measure,
        cfg.max_attempts,
        cfg.strikes.len().max(16),
        &reference,
        cfg.seed,
    )
    .map_err(|e| anyhow!("{e}"))?;
    let approx = selection.approximator;

    // independent references on a finer grid and a fresh stream
    let cfg_ref = McConfig {
        t_horizon: cfg.t_horizon,
        n_steps: schedule.n_steps * 16,
        delta: schedule.delta,
        n_paths: cfg.ref_paths,
    };
    let mut rows = Vec::new();
    let mut sq = 0.0;
    for (i, &strike) in cfg.strikes.iter().enumerate() {
        let mut k_vec = vec![0.0; d];
        k_vec[0] = strike;
        let (mc, se) = mc_price(
            &spec,
            &payoff,
            &cfg.x0,
            &k_vec,
            &cfg_ref,
            cfg.seed ^ (0xba5ce7 + i as u64),
        )
        .map_err(|e| anyhow!("{e}"))?;
        let net = approx.eval(&cfg.x0, &k_vec).map_err(|e| anyhow!("{e}"))?;
        let diff = (mc - net).abs();
        sq += diff * diff;
        rows.push(BasketRow {
            strike,
            mc_price: mc,
            mc_se: se,
            net_price: net,
            abs_diff: diff,
        });
    }
    let rms = (sq / cfg.strikes.len() as f64).sqrt();
    Ok(BasketDemoResult {
        rows,
        rms_error: rms,
        epsilon: cfg.epsilon,
        attempts: selection.diagnostics.attempts,
        network_size: approx.net.size(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_cfg(weights: Vec<f64>, strikes: Vec<f64>) -> BasketDemoConfig {
        BasketDemoConfig {
            model: ModelFile {
                family: "merton".into(),
                d: 1,
                params: ModelParams::default(),
                declared_constants: None,
            },
            x0: vec![1.0],
            weights,
            strikes,
            epsilon: 0.5,
            t_horizon: 1.0,
            seed: 19,
            c_cal: 0.1,
            max_attempts: 10,
            ref_paths: 20_000,
        }
    }

    #[test]
    fn basket_demo_zero_strike_is_martingale_price() {
        // K = 0 on a positive compensated process: price = E[w X_T] = w x0
        let result = run_basket_demo(&demo_cfg(vec![1.0], vec![0.0])).unwrap();
        let row = &result.rows[0];
        assert!(
            (row.mc_price - 1.0).abs() <= 3.0 * row.mc_se,
            "mc {} se {}",
            row.mc_price,
            row.mc_se
        );
        assert!(result.rms_error < result.epsilon);
    }

    #[test]
    fn basket_demo_zero_weights_gives_zero_prices() {
        let result = run_basket_demo(&demo_cfg(vec![0.0], vec![0.5, 1.0])).unwrap();
        for row in &result.rows {
            assert_eq!(row.mc_price, 0.0);
            assert_eq!(row.net_price, 0.0);
            assert_eq!(row.abs_diff, 0.0);
        }
    }

    fn tiny_euler_cfg() -> StudyConfig {
        StudyConfig {
            study: StudyKind::EulerRate,
            seed: 11,
            model: None,
            model_path: None,
            n_paths: 200,
            x0: None,
            t_horizon: 1.0,
            k_ladder: vec![3, 4, 5],
            ref_k: Some(8),
            delta_ladder: vec![],
            ref_delta: None,
            trunc_n_steps: None,
            m_ladder: vec![],
            mc_n_steps: None,
            mc_delta: None,
            eps_ladder: vec![],
            d_ladder: vec![],
            c_cal: None,
            out: None,
        }
    }

    #[test]
    fn euler_rate_study_is_deterministic() {
        let cfg = tiny_euler_cfg();
        let a = run_study(&cfg).unwrap();
        let b = run_study(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 3);
        let fit = a.fit("squared-error-vs-h").unwrap();
        assert!(fit.slope > 0.3, "slope {}", fit.slope);
    }

    #[test]
    fn csv_is_stable_across_thread_counts() {
        // thread count affects scheduling only, never stream assignment
        let cfg = tiny_euler_cfg();
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool2 = rayon::ThreadPoolBuilder::new()
            .num_threads(2)
            .build()
            .unwrap();
        let a = pool1.install(|| run_study(&cfg)).unwrap();
        let b = pool2.install(|| run_study(&cfg)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn size_scaling_smoke() {
        let cfg = StudyConfig {
            study: StudyKind::SizeScaling,
            seed: 13,
            model: None,
            model_path: None,
            n_paths: 1,
            x0: None,
            t_horizon: 1.0,
            k_ladder: vec![],
            ref_k: None,
            delta_ladder: vec![],
            ref_delta: None,
            trunc_n_steps: None,
            m_ladder: vec![],
            mc_n_steps: None,
            mc_delta: None,
            eps_ladder: vec![1.0, 0.5, 0.25],
            d_ladder: vec![1, 2],
            c_cal: Some(0.1),
            out: None,
        };
        let res = run_study(&cfg).unwrap();
        assert_eq!(res.rows.len(), 6);
        // sizes grow as accuracy tightens
        let s_first = res.rows[0][2];
        let s_last = res.rows[2][2];
        assert!(s_last > s_first);
    }
}
