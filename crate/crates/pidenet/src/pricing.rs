//! Payoffs as exact ReLU networks, Monte Carlo pricing as the ground truth,
//! empirical L2 error of an assembled approximator, the accepted-realization
//! selection and the accuracy-driven schedule.

use crate::builder::{
    realization_within_jump_cap, AssembledApproximator, BuildMode, Builder, PayoffHook, Schedule,
};
use crate::error::{PidenetError, Result};
use crate::model::{CoefficientNets, DeclaredConstants, JumpDiffusionSpec};
use crate::relu_net::{compose, identity_chain, parallelize, Layer, ReluNetwork};
use crate::rng::{domain, stream};
use crate::simulate::{euler_path, sample_realization, PathParams, Variant};
use crate::stats::{mean_and_se, norm_cdf};
use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Piecewise-affine payoff families shipped with the library. All of them
/// are represented exactly by their network, so the payoff approximation
/// budget holds with accuracy exponents zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PayoffKind {
    /// `(w . x - strike)_+` on the terminal value.
    BasketCall { weights: Vec<f64>, strike: f64 },
    /// `(strike - w . x)_+` on the terminal value.
    BasketPut { weights: Vec<f64>, strike: f64 },
    /// `(max_j x_j - strike)_+` on the terminal value.
    CallOnMax { strike: f64 },
    /// `(w . x - K_1)_+` with the strike read from the parameter block.
    ParametricBasketCall { weights: Vec<f64> },
    /// `((1/D) Σ_t w . x_t - strike)_+` over `D` monitoring dates.
    DiscreteAsianCall {
        weights: Vec<f64>,
        monitors: usize,
        strike: f64,
    },
}

/// A payoff with its exact network representation.
#[derive(Debug, Clone)]
pub struct PayoffSpec {
    pub kind: PayoffKind,
    pub d: usize,
    /// Number of monitoring dates `D`.
    pub monitors: usize,
    /// Strike-channel multiplicity `k`: the parameter block has `k d`
    /// coordinates.
    pub k_param: usize,
    pub net: ReluNetwork,
    pub lipschitz: f64,
    /// Budget constant of the payoff assumption (`D + Lip` and the size are
    /// both below `budget_c * d^2`).
    pub budget_c: f64,
}

impl PayoffSpec {
    /// Equally spaced monitoring dates `i T / D`.
    pub fn monitor_times(&self, t_horizon: f64) -> Vec<f64> {
        (1..=self.monitors)
            .map(|i| t_horizon * i as f64 / self.monitors as f64)
            .collect()
    }

    pub fn hook<'a>(&'a self, t_horizon: f64) -> PayoffHook<'a> {
        PayoffHook {
            net: &self.net,
            k_param: self.k_param,
            monitor_times: self.monitor_times(t_horizon),
            budget_c: self.budget_c,
        }
    }

    /// The payoff formula itself, kept independent of the network route.
    pub fn evaluate_direct(&self, monitor_values: &[&[f64]], k_values: &[f64]) -> f64 {
        match &self.kind {
            PayoffKind::BasketCall { weights, strike } => {
                let x = monitor_values.last().expect("terminal value");
                (dot(weights, x) - strike).max(0.0)
            }
            PayoffKind::BasketPut { weights, strike } => {
                let x = monitor_values.last().expect("terminal value");
                (strike - dot(weights, x)).max(0.0)
            }
            PayoffKind::CallOnMax { strike } => {
                let x = monitor_values.last().expect("terminal value");
                let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (m - strike).max(0.0)
            }
            PayoffKind::ParametricBasketCall { weights } => {
                let x = monitor_values.last().expect("terminal value");
                (dot(weights, x) - k_values[0]).max(0.0)
            }
            PayoffKind::DiscreteAsianCall {
                weights, strike, ..
            } => {
                let mean = monitor_values.iter().map(|x| dot(weights, x)).sum::<f64>()
                    / monitor_values.len() as f64;
                (mean - strike).max(0.0)
            }
        }
    }

    /// Network-route evaluation on flattened `(x_{t_1}, ..., x_{t_D}, K)`.
    pub fn evaluate_net(&self, monitor_values: &[&[f64]], k_values: &[f64]) -> Result<f64> {
        let mut input = Vec::with_capacity(self.net.input_dim());
        for v in monitor_values {
            input.extend_from_slice(v);
        }
        input.extend_from_slice(k_values);
        Ok(self.net.eval(&input)?[0])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scalar_head(first: Layer) -> Result<ReluNetwork> {
    let head = Layer::from_dense(
        &Array2::from_shape_vec((1, 1), vec![1.0]).expect("1x1"),
        &Array1::zeros(1),
    )?;
    let d = first.in_dim();
    ReluNetwork::new(d, vec![first, head])
}

/// `max(a, b) = relu(a - b) + relu(b) - relu(-b)` as a two-input gadget.
fn pair_max_gadget() -> Result<ReluNetwork> {
    let a1 = Array2::from_shape_vec((3, 2), vec![1.0, -1.0, 0.0, 1.0, 0.0, -1.0]).expect("3x2");
    let l1 = Layer::from_dense(&a1, &Array1::zeros(3))?;
    let a2 = Array2::from_shape_vec((1, 3), vec![1.0, 1.0, -1.0]).expect("1x3");
    let l2 = Layer::from_dense(&a2, &Array1::zeros(1))?;
    ReluNetwork::new(2, vec![l1, l2])
}

/// Single-input pass-through at the gadget depth.
fn pass_gadget() -> Result<ReluNetwork> {
    identity_chain(1, 2)
}

/// Maximum of `d` inputs as a balanced tree of pairwise gadgets.
fn max_net(d: usize) -> Result<ReluNetwork> {
    let mut level_width = d;
    let mut net: Option<ReluNetwork> = None;
    while level_width > 1 {
        let mut blocks = Vec::new();
        let pairs = level_width / 2;
        for _ in 0..pairs {
            blocks.push(pair_max_gadget()?);
        }
        if level_width % 2 == 1 {
            blocks.push(pass_gadget()?);
        }
        let refs: Vec<&ReluNetwork> = blocks.iter().collect();
        let level = parallelize(&refs, true)?;
        net = Some(match net {
            None => level,
            Some(prev) => compose(&level, &prev)?,
        });
        level_width = pairs + level_width % 2;
    }
    match net {
        Some(n) => Ok(n),
        None => identity_chain(1, 2),
    }
}

/// Builds the exact network representation of a payoff.
pub fn payoff_network(kind: PayoffKind, d: usize) -> Result<PayoffSpec> {
    let (net, monitors, k_param, lipschitz) = match &kind {
        PayoffKind::BasketCall { weights, strike } => {
            check_weights(weights, d)?;
            let a = Array2::from_shape_vec((1, d), weights.clone()).expect("1xd");
            let l1 = Layer::from_dense(&a, &Array1::from(vec![-strike]))?;
            (scalar_head(l1)?, 1, 0, norm(weights))
        }
        PayoffKind::BasketPut { weights, strike } => {
            check_weights(weights, d)?;
            let a =
                Array2::from_shape_vec((1, d), weights.iter().map(|w| -w).collect()).expect("1xd");
            let l1 = Layer::from_dense(&a, &Array1::from(vec![*strike]))?;
            (scalar_head(l1)?, 1, 0, norm(weights))
        }
        PayoffKind::CallOnMax { strike } => {
            let tree = max_net(d)?;
            let a = Array2::from_shape_vec((1, 1), vec![1.0]).expect("1x1");
            let l1 = Layer::from_dense(&a, &Array1::from(vec![-strike]))?;
            let head = scalar_head(l1)?;
            (compose(&head, &tree)?, 1, 0, 1.0)
        }
        PayoffKind::ParametricBasketCall { weights } => {
            check_weights(weights, d)?;
            // input (x, K) in R^{d + d}; the strike is K_1
            let mut row = weights.clone();
            row.push(-1.0);
            row.resize(2 * d, 0.0);
            let a = Array2::from_shape_vec((1, 2 * d), row).expect("1x2d");
            let l1 = Layer::from_dense(&a, &Array1::zeros(1))?;
            (scalar_head(l1)?, 1, 1, norm(weights) + 1.0)
        }
        PayoffKind::DiscreteAsianCall {
            weights,
            monitors,
            strike,
        } => {
            check_weights(weights, d)?;
            if *monitors == 0 {
                return Err(PidenetError::invalid("Asian payoff needs monitors >= 1"));
            }
            let mut row = Vec::with_capacity(d * monitors);
            for _ in 0..*monitors {
                row.extend(weights.iter().map(|w| w / *monitors as f64));
            }
            let a = Array2::from_shape_vec((1, d * monitors), row).expect("1xdD");
            let l1 = Layer::from_dense(&a, &Array1::from(vec![-strike]))?;
            (scalar_head(l1)?, *monitors, 0, norm(weights))
        }
    };
    let size = net.size() as f64;
    let d_plus_lip = monitors as f64 + lipschitz;
    let budget_c = 1.5
        * (size / (d * d) as f64)
            .max(d_plus_lip / (d * d) as f64)
            .max(1.0);
    Ok(PayoffSpec {
        kind,
        d,
        monitors,
        k_param,
        net,
        lipschitz,
        budget_c,
    })
}

fn check_weights(w: &[f64], d: usize) -> Result<()> {
    if w.len() != d {
        return Err(PidenetError::DimensionMismatch {
            context: "payoff weights",
            expected: d,
            got: w.len(),
        });
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Monte Carlo pricing
// ---------------------------------------------------------------------------

/// Euler Monte Carlo configuration for the pricing ground truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub t_horizon: f64,
    pub n_steps: usize,
    pub delta: f64,
    pub n_paths: usize,
}

/// Plain Monte Carlo estimate of `E[payoff(path, K)]` over exact-coefficient
/// Euler paths: price and standard error. Paths failing the overflow guard
/// are excluded and counted; more than 0.1% exclusions is a hard failure.
pub fn mc_price(
    spec: &JumpDiffusionSpec,
    payoff: &PayoffSpec,
    x: &[f64],
    k_values: &[f64],
    cfg: &McConfig,
    seed: u64,
) -> Result<(f64, f64)> {
    if cfg.n_paths < 2 {
        return Err(PidenetError::invalid("mc_price needs at least two paths"));
    }
    let params = PathParams {
        t_horizon: cfg.t_horizon,
        n_steps: cfg.n_steps,
        delta: cfg.delta,
        m_comp: 0,
        monitor_times: payoff.monitor_times(cfg.t_horizon),
    };
    let rows: Vec<Option<f64>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let r = sample_realization(spec, &params, seed, i as u64).ok()?;
            let path = euler_path(spec, None, x, &r, Variant::ExactCoeff, 1).ok()?;
            let v = payoff.evaluate_direct(&path.monitor_values(), k_values);
            v.is_finite().then_some(v)
        })
        .collect();
    let kept: Vec<f64> = rows.iter().filter_map(|v| *v).collect();
    let excluded = cfg.n_paths - kept.len();
    if (excluded as f64) > 0.001 * cfg.n_paths as f64 {
        return Err(PidenetError::NumericFailure {
            step: 0,
            detail: format!("{excluded} of {} paths excluded", cfg.n_paths),
        });
    }
    Ok(mean_and_se(&kept))
}

/// Black-Scholes driftless call, the independent closed-form oracle used to
/// validate the Monte Carlo pricer.
pub fn black_scholes_call(spot: f64, strike: f64, vol: f64, t: f64) -> f64 {
    if t <= 0.0 || vol <= 0.0 {
        return (spot - strike).max(0.0);
    }
    let sd = vol * t.sqrt();
    let d1 = ((spot / strike).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    spot * norm_cdf(d1) - strike * norm_cdf(d2)
}

// ---------------------------------------------------------------------------
// error measure and the empirical L2 error
// ---------------------------------------------------------------------------

/// One discrete atom of an error measure: `(x, K, weight)`.
pub type WeightedAtom = (Vec<f64>, Vec<f64>, f64);

/// The measure against which the expression error is evaluated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ErrorMeasure {
    /// `x` uniform on `[lo, hi]^d` and `K` uniform on `[lo, hi]^{kd}`.
    UniformCube {
        d: usize,
        k_param: usize,
        lo: f64,
        hi: f64,
    },
    /// Atoms `(x0, K_i e_1)`, equally weighted.
    PointMass { x0: Vec<f64>, strikes: Vec<f64> },
    /// Equally weighted product of explicit point sets.
    ProductPointSets {
        xs: Vec<Vec<f64>>,
        ks: Vec<Vec<f64>>,
    },
}

impl ErrorMeasure {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            ErrorMeasure::UniformCube { d, k_param, .. } => (*d, k_param * d),
            ErrorMeasure::PointMass { x0, .. } => (x0.len(), x0.len()),
            ErrorMeasure::ProductPointSets { xs, ks } => (
                xs.first().map(|x| x.len()).unwrap_or(0),
                ks.first().map(|k| k.len()).unwrap_or(0),
            ),
        }
    }

    /// `∫ (1 + |x|^2 + |K|^2) dμ`, available in closed form for every kind.
    pub fn second_moment_budget(&self) -> f64 {
        match self {
            ErrorMeasure::UniformCube { d, k_param, lo, hi } => {
                let m2 = (hi * hi + hi * lo + lo * lo) / 3.0;
                1.0 + (*d as f64) * m2 + (*k_param * *d) as f64 * m2
            }
            ErrorMeasure::PointMass { x0, strikes } => {
                let x2: f64 = x0.iter().map(|v| v * v).sum();
                let k2: f64 =
                    strikes.iter().map(|k| k * k).sum::<f64>() / strikes.len().max(1) as f64;
                1.0 + x2 + k2
            }
            ErrorMeasure::ProductPointSets { xs, ks } => {
                let x2 = xs
                    .iter()
                    .map(|x| x.iter().map(|v| v * v).sum::<f64>())
                    .sum::<f64>()
                    / xs.len().max(1) as f64;
                let k2 = ks
                    .iter()
                    .map(|k| k.iter().map(|v| v * v).sum::<f64>())
                    .sum::<f64>()
                    / ks.len().max(1) as f64;
                1.0 + x2 + k2
            }
        }
    }

    /// Explicit atoms with weights, when the measure is discrete.
    pub fn atoms(&self) -> Option<Vec<WeightedAtom>> {
        match self {
            ErrorMeasure::UniformCube { .. } => None,
            ErrorMeasure::PointMass { x0, strikes } => {
                let w = 1.0 / strikes.len() as f64;
                Some(
                    strikes
                        .iter()
                        .map(|&k| {
                            let mut kv = vec![0.0; x0.len()];
                            kv[0] = k;
                            (x0.clone(), kv, w)
                        })
                        .collect(),
                )
            }
            ErrorMeasure::ProductPointSets { xs, ks } => {
                let w = 1.0 / (xs.len() * ks.len().max(1)) as f64;
                let mut out = Vec::new();
                for x in xs {
                    if ks.is_empty() {
                        out.push((x.clone(), Vec::new(), 1.0 / xs.len() as f64));
                    } else {
                        for k in ks {
                            out.push((x.clone(), k.clone(), w));
                        }
                    }
                }
                Some(out)
            }
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
        match self {
            ErrorMeasure::UniformCube { d, k_param, lo, hi } => {
                let x = (0..*d).map(|_| rng.gen_range(*lo..*hi)).collect();
                let k = (0..k_param * d).map(|_| rng.gen_range(*lo..*hi)).collect();
                (x, k)
            }
            _ => {
                let atoms = self.atoms().expect("discrete measure");
                let idx = rng.gen_range(0..atoms.len());
                (atoms[idx].0.clone(), atoms[idx].1.clone())
            }
        }
    }
}

/// Empirical L2(mu) error of an approximator against the Monte Carlo
/// reference.
#[derive(Debug, Clone)]
pub struct L2Report {
    pub error: f64,
    /// One standard deviation band on the error, combining mu-sampling and
    /// reference-MC uncertainty in quadrature.
    pub band: f64,
    pub n_points: usize,
}

/// Reference pricing configuration for error estimates: the reference grid
/// refines the approximator grid by `step_factor`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub n_paths: usize,
    pub step_factor: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            n_paths: 20_000,
            step_factor: 64,
        }
    }
}

/// Points and cached reference prices for one error evaluation.
struct MuSample {
    points: Vec<WeightedAtom>,
    references: Vec<(f64, f64)>,
}

fn draw_mu_sample(
    spec: &JumpDiffusionSpec,
    payoff: &PayoffSpec,
    measure: &ErrorMeasure,
    schedule: &Schedule,
    n_mu: usize,
    reference: &ReferenceConfig,
    seed: u64,
) -> Result<MuSample> {
    let points: Vec<WeightedAtom> = match measure.atoms() {
        Some(atoms) => atoms,
        None => {
            let mut rng = stream(seed, domain::MEASURE, 0);
            let w = 1.0 / n_mu as f64;
            (0..n_mu)
                .map(|_| {
                    let (x, k) = measure.sample(&mut rng);
                    (x, k, w)
                })
                .collect()
        }
    };
    let cfg = McConfig {
        t_horizon: schedule.t_horizon,
        n_steps: schedule.n_steps * reference.step_factor,
        delta: schedule.delta,
        n_paths: reference.n_paths,
    };
    let references = points
        .iter()
        .enumerate()
        .map(|(i, (x, k, _))| mc_price(spec, payoff, x, k, &cfg, seed ^ (0x9e37 + i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MuSample { points, references })
}

fn squared_error_against(sample: &MuSample, approx: &AssembledApproximator) -> Result<(f64, f64)> {
    let mut mean_sq = 0.0;
    let mut var_terms = Vec::with_capacity(sample.points.len());
    let mut ref_term = 0.0;
    for ((x, k, w), (ref_price, ref_se)) in sample.points.iter().zip(&sample.references) {
        let u = approx.eval(x, k)?;
        let diff = ref_price - u;
        mean_sq += w * diff * diff;
        var_terms.push((diff * diff, *w));
        ref_term += w * (2.0 * diff.abs() * ref_se + ref_se * ref_se);
    }
    // mu-sampling spread of the squared differences
    let n = var_terms.len() as f64;
    let mu_se = if n > 1.0 {
        let m: f64 = var_terms.iter().map(|(v, w)| v * w).sum();
        let var: f64 = var_terms
            .iter()
            .map(|(v, w)| w * (v - m) * (v - m))
            .sum::<f64>();
        (var / n).sqrt()
    } else {
        0.0
    };
    let band_sq = (mu_se * mu_se + ref_term * ref_term).sqrt();
    Ok((mean_sq, band_sq))
}

/// Empirical `L2(mu)` error of the approximator against per-point Monte
/// Carlo references (cached for discrete measures).
#[allow(clippy::too_many_arguments)]
pub fn l2_error(
    approx: &AssembledApproximator,
    spec: &JumpDiffusionSpec,
    payoff: &PayoffSpec,
    measure: &ErrorMeasure,
    n_mu: usize,
    reference: &ReferenceConfig,
    seed: u64,
) -> Result<L2Report> {
    let (dx, dk) = measure.dims();
    if dx != approx.d || dk != approx.k_param * approx.d {
        return Err(PidenetError::DimensionMismatch {
            context: "error measure dimensions",
            expected: approx.d + approx.k_param * approx.d,
            got: dx + dk,
        });
    }
    let sample = draw_mu_sample(
        spec,
        payoff,
        measure,
        &approx.schedule,
        n_mu,
        reference,
        seed,
    )?;
    let (mean_sq, band_sq) = squared_error_against(&sample, approx)?;
    let error = mean_sq.sqrt();
    let band = if error > 0.0 {
        band_sq / (2.0 * error)
    } else {
        band_sq.sqrt()
    };
    Ok(L2Report {
        error,
        band,
        n_points: sample.points.len(),
    })
}

// ---------------------------------------------------------------------------
// realization selection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SelectionDiagnostics {
    pub attempts: usize,
    pub r_values: Vec<f64>,
    pub jump_cap_rejections: usize,
    pub accepted_r: f64,
}

pub struct SelectionResult {
    pub approximator: AssembledApproximator,
    pub realizations: Vec<crate::simulate::RandomnessRealization>,
    pub diagnostics: SelectionDiagnostics,
}

/// Draws candidate realization tuples until the empirical squared `L2(mu)`
/// error of the assembled average falls below `epsilon^2` and, in the
/// compound-Poisson regime, every realization respects the jump-count cap.
/// The acceptance probability of each draw is at least 1/3 when the schedule
/// meets the premises, so a handful of attempts suffices.
#[allow(clippy::too_many_arguments)]
pub fn select_realization_set(
    spec: &JumpDiffusionSpec,
    nets: &CoefficientNets,
    payoff: &PayoffSpec,
    schedule: &Schedule,
    measure: &ErrorMeasure,
    max_attempts: usize,
    n_mu: usize,
    reference: &ReferenceConfig,
    seed: u64,
) -> Result<SelectionResult> {
    if max_attempts == 0 {
        return Err(PidenetError::invalid("max_attempts must be at least 1"));
    }
    let (dx, dk) = measure.dims();
    if dx != spec.d || dk != payoff.k_param * spec.d {
        return Err(PidenetError::DimensionMismatch {
            context: "selection measure dimensions",
            expected: spec.d + payoff.k_param * spec.d,
            got: dx + dk,
        });
    }
    let builder = Builder::new(spec, nets)?;
    let hook = payoff.hook(schedule.t_horizon);
    let sample = draw_mu_sample(spec, payoff, measure, schedule, n_mu, reference, seed)?;
    let mut diagnostics = SelectionDiagnostics {
        attempts: 0,
        r_values: Vec::new(),
        jump_cap_rejections: 0,
        accepted_r: f64::NAN,
    };
    let mut best: Option<(f64, AssembledApproximator, Vec<_>)> = None;
    for attempt in 0..max_attempts {
        diagnostics.attempts = attempt + 1;
        let realizations = crate::builder::sample_schedule_realizations(
            spec,
            &hook,
            schedule,
            seed,
            attempt as u64,
        )?;
        let caps_ok = builder.mode == BuildMode::Multiplicative
            || realizations
                .iter()
                .all(|r| realization_within_jump_cap(spec, r));
        if !caps_ok {
            diagnostics.jump_cap_rejections += 1;
            continue;
        }
        let approx = builder.assemble_from_realizations(&hook, schedule, &realizations)?;
        let (r_value, _) = squared_error_against(&sample, &approx)?;
        diagnostics.r_values.push(r_value);
        if r_value < schedule.epsilon * schedule.epsilon {
            diagnostics.accepted_r = r_value;
            return Ok(SelectionResult {
                approximator: approx,
                realizations,
                diagnostics,
            });
        }
        if best.as_ref().map(|(b, _, _)| r_value < *b).unwrap_or(true) {
            best = Some((r_value, approx, realizations));
        }
    }
    Err(PidenetError::SelectionFailure {
        attempts: max_attempts,
        best_r: best.map(|(r, _, _)| r).unwrap_or(f64::NAN),
    })
}

// ---------------------------------------------------------------------------
// accuracy-driven schedule
// ---------------------------------------------------------------------------

/// Calibration inputs standing in for the proof's existential constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationConstants {
    /// Effective error constant (`c` in the accuracy split).
    pub c_cal: f64,
    /// Dimension exponent of the accuracy split.
    pub r: f64,
    /// Dimension exponent of the compensator sample count; defaults to `r`.
    pub q_tilde: Option<f64>,
}

impl Default for CalibrationConstants {
    fn default() -> Self {
        CalibrationConstants {
            c_cal: 1.0,
            r: 1.0,
            q_tilde: None,
        }
    }
}

/// Derives the discretization and averaging schedule for a target accuracy,
/// following the constructive proof's functional forms.
pub fn schedule_from_epsilon(
    epsilon: f64,
    d: usize,
    t_horizon: f64,
    declared: &DeclaredConstants,
    calibration: &CalibrationConstants,
    mode: BuildMode,
) -> Result<Schedule> {
    if epsilon <= 0.0 || epsilon.is_nan() {
        return Err(PidenetError::invalid("epsilon must be positive"));
    }
    if t_horizon <= 0.0 || t_horizon.is_nan() {
        return Err(PidenetError::invalid("the horizon must be positive"));
    }
    let dd = d as f64;
    let q = declared.q;
    let c = calibration.c_cal;
    let r = calibration.r;
    match mode {
        BuildMode::Multiplicative => {
            let eps_bar = epsilon / (1f64.max(6.0 * c) * dd.powf(r));
            let h_raw = epsilon * epsilon * eps_bar.powf(3.0 * q) / (9.0 * c * dd.powf(r));
            let n_steps = (t_horizon / h_raw).ceil().max(1.0) as usize;
            let h = t_horizon / n_steps as f64;
            let n_real =
                (3.0 * epsilon.powi(-2) * c * dd.powf(r) * eps_bar.powf(-4.0 * q)).ceil() as usize;
            Ok(Schedule {
                epsilon,
                eps_bar,
                t_horizon,
                h,
                n_steps,
                delta: 0.0,
                m_comp: 0,
                n_realizations: n_real.max(1),
                dim_exponent_r: r,
            })
        }
        BuildMode::CompoundPoissonMc => {
            let p_bar = declared.p_bar;
            if p_bar <= 0.0 || p_bar.is_nan() {
                return Err(PidenetError::invalid(
                    "p_bar must be positive for the MC schedule",
                ));
            }
            let eps_bar = epsilon / (1f64.max(8.0 * 3f64.sqrt() * c) * dd.powf(r));
            let h_raw =
                epsilon * epsilon * eps_bar.powf(3.0 * q) / (1f64.max(48.0 * c) * dd.powf(r));
            let n_steps = (t_horizon / h_raw).ceil().max(1.0) as usize;
            let h = t_horizon / n_steps as f64;
            let delta = h.powf(1.0 / p_bar);
            let q_tilde = calibration.q_tilde.unwrap_or(r);
            let m = (epsilon.powi(-2)
                * delta.powi(-2)
                * eps_bar.powf(-6.0 * q)
                * dd.powf(r.max(q_tilde))
                * (12.0 * c).max(declared.l_tilde))
            .ceil() as usize;
            let n_real =
                (12.0 * epsilon.powi(-2) * c * dd.powf(r) * eps_bar.powf(-4.0 * q)).ceil() as usize;
            Ok(Schedule {
                epsilon,
                eps_bar,
                t_horizon,
                h,
                n_steps,
                delta,
                m_comp: m.max(1),
                n_realizations: n_real.max(1),
                dim_exponent_r: r,
            })
        }
    }
}
