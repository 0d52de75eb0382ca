//! Time-grid simulation of the approximation chain: Euler paths on exact
//! coefficients, small-jump truncated paths, network-coefficient paths and
//! the variant with the compensator integral replaced by a Monte Carlo
//! average, all driven by one reusable randomness realization.
//!
//! A realization is sampled independently of the initial condition, so the
//! same draw can be replayed from any starting point; this is what lets the
//! builder compile the path map into a network. Path values are stored on a
//! fine grid holding the Euler nodes, the requested monitoring times and the
//! jump times; between Euler nodes the coefficients stay frozen and values
//! follow the explicit one-step interpolation formula.

use crate::error::{PidenetError, Result};
use crate::model::{
    CoefficientNets, JumpCoefficient, JumpDiffusionSpec, JumpEvent, JumpNets, NuRegion,
};
use crate::rng::{domain, stream};
use crate::stats::mean_and_se;
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Grid and randomness-budget parameters of one realization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathParams {
    pub t_horizon: f64,
    pub n_steps: usize,
    /// Truncation level of the sampled jumps; 0 keeps everything (finite
    /// activity only).
    pub delta: f64,
    /// Compensator Monte Carlo samples per step (0 outside the MC variant).
    pub m_comp: usize,
    /// Extra times at which path values are materialized, in (0, T].
    pub monitor_times: Vec<f64>,
}

impl PathParams {
    pub fn new(t_horizon: f64, n_steps: usize) -> Self {
        PathParams {
            t_horizon,
            n_steps,
            delta: 0.0,
            m_comp: 0,
            monitor_times: Vec::new(),
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_m_comp(mut self, m: usize) -> Self {
        self.m_comp = m;
        self
    }

    pub fn with_monitors(mut self, times: Vec<f64>) -> Self {
        self.monitor_times = times;
        self
    }
}

/// One frozen draw of all driving randomness, independent of the initial
/// condition: Brownian increments on the fine grid, jump events above the
/// truncation level and the per-step compensator marks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomnessRealization {
    pub d: usize,
    pub t_horizon: f64,
    pub n_steps: usize,
    pub delta: f64,
    pub m_comp: usize,
    pub seed: u64,
    pub index: u64,
    /// Fine grid: Euler nodes plus monitoring and jump times, strictly
    /// increasing, from 0 to T.
    pub times: Vec<f64>,
    /// Position of Euler node `n` inside `times`.
    pub euler_nodes: Vec<usize>,
    /// Position of each requested monitoring time inside `times`.
    pub monitor_nodes: Vec<usize>,
    /// Brownian increment over each fine interval.
    pub brownian: Vec<Vec<f64>>,
    /// Jump events, times in (0, T] and sorted, marks above `delta`.
    pub events: Vec<JumpEvent>,
    /// `events[k]` acts on the fine interval ending at `times[event_nodes[k]]`.
    pub event_nodes: Vec<usize>,
    /// Compensator marks `V_{i, t_n}`: `m_comp` marks per Euler step.
    pub compensator_marks: Vec<Vec<Vec<f64>>>,
}

fn grid_tolerance(t: f64) -> f64 {
    1e-12 * t.max(1.0)
}

/// Draws the realization for stream `(seed, index)`. The three randomness
/// sources use disjoint substreams, and nothing here depends on the initial
/// condition.
pub fn sample_realization(
    spec: &JumpDiffusionSpec,
    params: &PathParams,
    seed: u64,
    index: u64,
) -> Result<RandomnessRealization> {
    let d = spec.d;
    let t = params.t_horizon;
    let n = params.n_steps;
    if n == 0 || t <= 0.0 {
        return Err(PidenetError::invalid(
            "need n_steps >= 1 and a positive horizon",
        ));
    }
    let tol = grid_tolerance(t);
    for &m in &params.monitor_times {
        if !(m > 0.0 && m <= t + tol) {
            return Err(PidenetError::invalid(format!(
                "monitoring time {m} outside (0, T]"
            )));
        }
    }

    let mut jump_rng = stream(seed, domain::JUMPS, index);
    let mut events = spec.levy.sample_events(params.delta, t, &mut jump_rng)?;
    // map [0,T) draws to (0,T]
    for e in &mut events {
        e.time = t - e.time;
    }
    events.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite"));

    // fine grid: Euler nodes first, then tolerance-deduplicated extras
    let mut times: Vec<f64> = (0..=n).map(|k| t * k as f64 / n as f64).collect();
    let mut extras: Vec<f64> = params
        .monitor_times
        .iter()
        .copied()
        .chain(events.iter().map(|e| e.time))
        .collect();
    extras.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    for x in extras {
        let pos = times.partition_point(|&v| v < x);
        let near_prev = pos > 0 && (x - times[pos - 1]).abs() <= tol;
        let near_next = pos < times.len() && (times[pos] - x).abs() <= tol;
        if !near_prev && !near_next {
            times.insert(pos, x);
        }
    }
    let locate = |x: f64| -> usize {
        let pos = times.partition_point(|&v| v < x - tol);
        debug_assert!((times[pos] - x).abs() <= tol);
        pos
    };
    let euler_nodes: Vec<usize> = (0..=n).map(|k| locate(t * k as f64 / n as f64)).collect();
    let monitor_nodes: Vec<usize> = params.monitor_times.iter().map(|&m| locate(m)).collect();
    let event_nodes: Vec<usize> = events.iter().map(|e| locate(e.time)).collect();

    let mut brown_rng = stream(seed, domain::BROWNIAN, index);
    let brownian: Vec<Vec<f64>> = times
        .windows(2)
        .map(|w| {
            let sd = (w[1] - w[0]).sqrt();
            (0..d)
                .map(|_| sd * brown_rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();

    let mut comp_rng = stream(seed, domain::COMPENSATOR, index);
    let mut compensator_marks = Vec::with_capacity(n);
    for _ in 0..n {
        let mut marks = Vec::with_capacity(params.m_comp);
        for _ in 0..params.m_comp {
            marks.push(spec.levy.sample_mark_above(params.delta, &mut comp_rng)?);
        }
        compensator_marks.push(marks);
    }

    Ok(RandomnessRealization {
        d,
        t_horizon: t,
        n_steps: n,
        delta: params.delta,
        m_comp: params.m_comp,
        seed,
        index,
        times,
        euler_nodes,
        monitor_nodes,
        brownian,
        events,
        event_nodes,
        compensator_marks,
    })
}

/// Which approximation of the chain a path follows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Euler on the exact coefficients (jumps at the realization's level).
    ExactCoeff,
    /// Exact coefficients, jumps truncated at a coarser level.
    Truncated { delta: f64 },
    /// Network coefficients, exact compensator integral.
    NetCoeff,
    /// Network coefficients, compensator replaced by the Monte Carlo
    /// average over the first `m_used` marks.
    NetCoeffMc { m_used: usize },
}

/// Path values on the realization's fine grid.
#[derive(Debug, Clone)]
pub struct EulerPath {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub euler_nodes: Vec<usize>,
    pub monitor_nodes: Vec<usize>,
    pub variant: Variant,
}

impl EulerPath {
    pub fn terminal(&self) -> &[f64] {
        self.values.last().expect("nonempty path")
    }

    pub fn monitor_values(&self) -> Vec<&[f64]> {
        self.monitor_nodes
            .iter()
            .map(|&i| self.values[i].as_slice())
            .collect()
    }

    /// Largest squared distance to another path over the shared grid.
    pub fn sup_sq_distance(&self, other: &EulerPath) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(PidenetError::invalid(
                "paths live on different grids; couple them through one realization",
            ));
        }
        let mut sup: f64 = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            sup = sup.max(d2);
        }
        Ok(sup)
    }
}

/// State-dependent compensator drift `s -> ∫_{A_delta} gamma(s, z) ν(dz)`.
enum Compensator<'a> {
    Zero,
    /// State-independent drift (the jump coefficient is linear in the mark).
    Constant(Vec<f64>),
    /// Multiplicative structure: `F(s) m_G` with `m_G = ∫ G dν` precomputed.
    MultExact {
        spec: &'a JumpDiffusionSpec,
        m_g: Vec<f64>,
    },
    MultNets {
        nets: &'a CoefficientNets,
        m_g: Vec<f64>,
    },
    /// General structure: quadrature terms against the measure.
    Terms {
        gamma: GammaEval<'a>,
        terms: Vec<(f64, Vec<f64>)>,
    },
    /// Monte Carlo average over the realization's per-step marks.
    McMarks {
        nets: &'a CoefficientNets,
        mass: f64,
        m_used: usize,
    },
}

enum GammaEval<'a> {
    Exact(&'a JumpDiffusionSpec),
    Nets(&'a CoefficientNets, &'a JumpDiffusionSpec),
}

impl GammaEval<'_> {
    fn eval(&self, s: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        match self {
            GammaEval::Exact(spec) => Ok(spec.gamma(s, z)),
            GammaEval::Nets(nets, spec) => match (&nets.jump_nets, &spec.jump) {
                (JumpNets::Columns(_), JumpCoefficient::Multiplicative { g, .. }) => {
                    let gz = g(z);
                    nets.gamma(s, z, Some(&gz))
                }
                (JumpNets::General(_), _) => nets.gamma(s, z, None),
                _ => Err(PidenetError::invalid(
                    "jump network structure does not match the model",
                )),
            },
        }
    }
}

impl Compensator<'_> {
    fn eval(&self, s: &[f64], euler_step: usize, marks: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
        match self {
            Compensator::Zero => Ok(vec![0.0; s.len()]),
            Compensator::Constant(v) => Ok(v.clone()),
            Compensator::MultExact { spec, m_g } => match &spec.jump {
                JumpCoefficient::Multiplicative { f, .. } => Ok(crate::model::mat_vec(&f(s), m_g)),
                JumpCoefficient::General { .. } => unreachable!("constructed multiplicative"),
            },
            Compensator::MultNets { nets, m_g } => {
                let mut out = vec![0.0; s.len()];
                if let JumpNets::Columns(cols) = &nets.jump_nets {
                    for (j, net) in cols.iter().enumerate() {
                        if m_g[j] == 0.0 {
                            continue;
                        }
                        for (o, v) in out.iter_mut().zip(net.eval(s)?) {
                            *o += v * m_g[j];
                        }
                    }
                }
                Ok(out)
            }
            Compensator::Terms { gamma, terms } => {
                let mut out = vec![0.0; s.len()];
                for (w, z) in terms {
                    for (o, v) in out.iter_mut().zip(gamma.eval(s, z)?) {
                        *o += w * v;
                    }
                }
                Ok(out)
            }
            Compensator::McMarks { nets, mass, m_used } => {
                let mut out = vec![0.0; s.len()];
                for v in marks[euler_step].iter().take(*m_used) {
                    for (o, g) in out.iter_mut().zip(nets.gamma(s, v, None)?) {
                        *o += g;
                    }
                }
                let scale = mass / *m_used as f64;
                for o in &mut out {
                    *o *= scale;
                }
                Ok(out)
            }
        }
    }
}

struct PathContext<'a> {
    spec: &'a JumpDiffusionSpec,
    nets: Option<&'a CoefficientNets>,
    variant: Variant,
    active_delta: f64,
    compensator: Compensator<'a>,
}

impl<'a> PathContext<'a> {
    fn new(
        spec: &'a JumpDiffusionSpec,
        nets: Option<&'a CoefficientNets>,
        realization: &RandomnessRealization,
        variant: Variant,
        stride: usize,
    ) -> Result<Self> {
        let active_delta = match variant {
            Variant::ExactCoeff | Variant::NetCoeff => realization.delta,
            Variant::Truncated { delta } => {
                if delta + grid_tolerance(realization.t_horizon) < realization.delta {
                    return Err(PidenetError::invalid(
                        "truncation level below the realization's sampled level",
                    ));
                }
                delta
            }
            Variant::NetCoeffMc { m_used } => {
                if m_used == 0 || m_used > realization.m_comp {
                    return Err(PidenetError::invalid(format!(
                        "m_used = {m_used} outside the realization's budget {}",
                        realization.m_comp
                    )));
                }
                if stride != 1 {
                    return Err(PidenetError::invalid(
                        "the compensator MC variant runs on the sampled grid only",
                    ));
                }
                realization.delta
            }
        };
        let needs_nets = matches!(variant, Variant::NetCoeff | Variant::NetCoeffMc { .. });
        if needs_nets && nets.is_none() {
            return Err(PidenetError::invalid(
                "network-coefficient variant without coefficient networks",
            ));
        }
        let no_jump_mass = spec.levy.mass_above(active_delta) == 0.0;
        let compensator = if no_jump_mass {
            Compensator::Zero
        } else {
            match variant {
                Variant::ExactCoeff | Variant::Truncated { .. } => match &spec.jump {
                    JumpCoefficient::Multiplicative { .. } => Compensator::MultExact {
                        spec,
                        m_g: spec.g_integral_above(active_delta)?,
                    },
                    JumpCoefficient::General { mark_linear, .. } => match mark_linear {
                        Some(a) => {
                            let m_z = spec.levy.integrate(
                                NuRegion::Above {
                                    delta: active_delta,
                                    inclusive: false,
                                },
                                spec.d,
                                &|z| z.to_vec(),
                            );
                            Compensator::Constant(crate::model::mat_vec(a, &m_z))
                        }
                        None => Compensator::Terms {
                            gamma: GammaEval::Exact(spec),
                            terms: spec.levy.nu_terms(NuRegion::Above {
                                delta: active_delta,
                                inclusive: false,
                            }),
                        },
                    },
                },
                Variant::NetCoeff => {
                    let nets = nets.expect("checked above");
                    match &nets.jump_nets {
                        JumpNets::Columns(_) => Compensator::MultNets {
                            nets,
                            m_g: spec.g_integral_above(active_delta)?,
                        },
                        JumpNets::General(_) => Compensator::Terms {
                            gamma: GammaEval::Nets(nets, spec),
                            terms: spec.levy.nu_terms(NuRegion::Above {
                                delta: active_delta,
                                inclusive: false,
                            }),
                        },
                    }
                }
                Variant::NetCoeffMc { m_used } => {
                    let nets = nets.expect("checked above");
                    if !matches!(nets.jump_nets, JumpNets::General(_)) {
                        return Err(PidenetError::invalid(
                            "the compensator MC variant needs a general-form jump network",
                        ));
                    }
                    Compensator::McMarks {
                        nets,
                        mass: spec.levy.mass_above(realization.delta),
                        m_used,
                    }
                }
            }
        };
        Ok(PathContext {
            spec,
            nets,
            variant,
            active_delta,
            compensator,
        })
    }

    fn beta(&self, s: &[f64]) -> Result<Vec<f64>> {
        match self.variant {
            Variant::ExactCoeff | Variant::Truncated { .. } => Ok((self.spec.beta)(s)),
            _ => self.nets.expect("nets checked").beta_net.eval(s),
        }
    }

    fn sigma(&self, s: &[f64]) -> Result<Array2<f64>> {
        match self.variant {
            Variant::ExactCoeff | Variant::Truncated { .. } => Ok((self.spec.sigma)(s)),
            _ => self.nets.expect("nets checked").sigma_matrix(s),
        }
    }

    fn gamma(&self, s: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        match self.variant {
            Variant::ExactCoeff | Variant::Truncated { .. } => Ok(self.spec.gamma(s, z)),
            _ => GammaEval::Nets(self.nets.expect("nets checked"), self.spec).eval(s, z),
        }
    }
}

/// One frozen Euler step: coefficients evaluated at the step's base state.
struct FrozenStep {
    state: Vec<f64>,
    beta_v: Vec<f64>,
    sigma_m: Array2<f64>,
    comp_v: Vec<f64>,
}

impl FrozenStep {
    fn new(
        ctx: &PathContext<'_>,
        state: Vec<f64>,
        euler_step: usize,
        marks: &[Vec<Vec<f64>>],
    ) -> Result<Self> {
        let beta_v = ctx.beta(&state)?;
        let sigma_m = ctx.sigma(&state)?;
        let comp_v = ctx.compensator.eval(&state, euler_step, marks)?;
        Ok(FrozenStep {
            state,
            beta_v,
            sigma_m,
            comp_v,
        })
    }

    /// Interpolated value a lag `dt` after the base node, given accumulated
    /// Brownian and jump contributions.
    fn value(&self, dt: f64, brownian_acc: &[f64], jump_acc: &[f64]) -> Vec<f64> {
        let d = self.state.len();
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let mut diff = 0.0;
            for j in 0..d {
                diff += self.sigma_m[(i, j)] * brownian_acc[j];
            }
            out.push(
                self.state[i] + self.beta_v[i] * dt + diff + jump_acc[i] - dt * self.comp_v[i],
            );
        }
        out
    }
}

const STATE_NORM_LIMIT: f64 = 1e12;

fn check_state(state: &[f64], step: usize) -> Result<()> {
    let n2: f64 = state.iter().map(|v| v * v).sum();
    if !n2.is_finite() || n2 > STATE_NORM_LIMIT * STATE_NORM_LIMIT {
        return Err(PidenetError::NumericFailure {
            step,
            detail: format!("state norm {:.3e} beyond the overflow guard", n2.sqrt()),
        });
    }
    Ok(())
}

/// Runs one Euler path. `stride` coarsens the coefficient-update grid: the
/// state refreshes only at every `stride`-th Euler node, which couples a
/// coarse scheme to the fine realization for strong-error estimates.
pub fn euler_path(
    spec: &JumpDiffusionSpec,
    nets: Option<&CoefficientNets>,
    x: &[f64],
    realization: &RandomnessRealization,
    variant: Variant,
    stride: usize,
) -> Result<EulerPath> {
    if x.len() != spec.d || realization.d != spec.d {
        return Err(PidenetError::DimensionMismatch {
            context: "euler_path initial condition",
            expected: spec.d,
            got: x.len(),
        });
    }
    if stride == 0 || !realization.n_steps.is_multiple_of(stride) {
        return Err(PidenetError::invalid(format!(
            "stride {stride} does not nest into {} steps",
            realization.n_steps
        )));
    }
    let ctx = PathContext::new(spec, nets, realization, variant, stride)?;
    let d = spec.d;

    let mut values: Vec<Vec<f64>> = Vec::with_capacity(realization.times.len());
    values.push(x.to_vec());

    let mut step = FrozenStep::new(&ctx, x.to_vec(), 0, &realization.compensator_marks)?;
    let mut base_time = 0.0f64;
    let mut brownian_acc = vec![0.0f64; d];
    let mut jump_acc = vec![0.0f64; d];
    let mut euler_cursor = 1usize; // next euler node to pass
    let mut event_cursor = 0usize;

    for i in 1..realization.times.len() {
        for (a, inc) in brownian_acc.iter_mut().zip(&realization.brownian[i - 1]) {
            *a += inc;
        }
        while event_cursor < realization.events.len() && realization.event_nodes[event_cursor] == i
        {
            let mark = &realization.events[event_cursor].mark;
            let norm = mark.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > ctx.active_delta {
                let g = ctx.gamma(&step.state, mark)?;
                for (a, v) in jump_acc.iter_mut().zip(g) {
                    *a += v;
                }
            }
            event_cursor += 1;
        }
        let value = step.value(realization.times[i] - base_time, &brownian_acc, &jump_acc);
        values.push(value);

        // refresh the frozen coefficients when passing a stride-aligned node
        if euler_cursor <= realization.n_steps && realization.euler_nodes[euler_cursor] == i {
            if euler_cursor.is_multiple_of(stride) && euler_cursor < realization.n_steps {
                let state = values[i].clone();
                check_state(&state, euler_cursor)?;
                step = FrozenStep::new(&ctx, state, euler_cursor, &realization.compensator_marks)?;
                base_time = realization.times[i];
                brownian_acc.iter_mut().for_each(|a| *a = 0.0);
                jump_acc.iter_mut().for_each(|a| *a = 0.0);
            }
            euler_cursor += 1;
        }
    }
    check_state(values.last().expect("nonempty"), realization.n_steps)?;

    Ok(EulerPath {
        times: realization.times.clone(),
        values,
        euler_nodes: realization.euler_nodes.clone(),
        monitor_nodes: realization.monitor_nodes.clone(),
        variant,
    })
}

/// Reference one-step map: the state reached at time `t` in `(t_n, t_{n+1}]`
/// starting from `state` at Euler node `n` under the given realization. This
/// is the map the step networks must reproduce.
pub fn step_map(
    spec: &JumpDiffusionSpec,
    nets: Option<&CoefficientNets>,
    realization: &RandomnessRealization,
    variant: Variant,
    euler_step: usize,
    t: f64,
    state: &[f64],
) -> Result<Vec<f64>> {
    if euler_step >= realization.n_steps {
        return Err(PidenetError::invalid("euler_step beyond the grid"));
    }
    let ctx = PathContext::new(spec, nets, realization, variant, 1)?;
    let t_n = realization.times[realization.euler_nodes[euler_step]];
    let t_next = realization.times[realization.euler_nodes[euler_step + 1]];
    let tol = grid_tolerance(realization.t_horizon);
    if !(t > t_n && t <= t_next + tol) {
        return Err(PidenetError::invalid(format!(
            "target time {t} outside the step ({t_n}, {t_next}]"
        )));
    }
    let step = FrozenStep::new(
        &ctx,
        state.to_vec(),
        euler_step,
        &realization.compensator_marks,
    )?;
    let lo = realization.euler_nodes[euler_step];
    let mut brownian_acc = vec![0.0f64; spec.d];
    let mut jump_acc = vec![0.0f64; spec.d];
    let mut event_cursor = realization.event_nodes.partition_point(|&e| e <= lo);
    for i in (lo + 1)..realization.times.len() {
        if realization.times[i] > t + tol {
            break;
        }
        for (a, inc) in brownian_acc.iter_mut().zip(&realization.brownian[i - 1]) {
            *a += inc;
        }
        while event_cursor < realization.events.len() && realization.event_nodes[event_cursor] == i
        {
            let mark = &realization.events[event_cursor].mark;
            let norm = mark.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > ctx.active_delta {
                let g = ctx.gamma(&step.state, mark)?;
                for (a, v) in jump_acc.iter_mut().zip(g) {
                    *a += v;
                }
            }
            event_cursor += 1;
        }
    }
    Ok(step.value(t - t_n, &brownian_acc, &jump_acc))
}

/// Pathwise-coupled strong error between two variants sharing one
/// realization per path: the Monte Carlo estimate of
/// `E[ sup_grid || ref - cmp ||^2 ]` and its standard error. The variants
/// are given as (variant, stride) pairs; strides must nest into the grid.
#[allow(clippy::too_many_arguments)]
pub fn strong_error(
    spec: &JumpDiffusionSpec,
    nets: Option<&CoefficientNets>,
    x: &[f64],
    params: &PathParams,
    reference: (Variant, usize),
    comparison: (Variant, usize),
    n_paths: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let sups: Vec<Result<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let realization = sample_realization(spec, params, seed, i as u64)?;
            let ref_path = euler_path(spec, nets, x, &realization, reference.0, reference.1)?;
            let cmp_path = euler_path(spec, nets, x, &realization, comparison.0, comparison.1)?;
            ref_path.sup_sq_distance(&cmp_path)
        })
        .collect();
    let sups = sups.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_se(&sups))
}

/// Second-moment probe `E ||X_t||^2` (and the grid supremum) under the
/// exact-coefficient Euler scheme.
pub struct MomentProbe {
    pub at_time: (f64, f64),
    pub sup: (f64, f64),
}

pub fn moment_probe(
    spec: &JumpDiffusionSpec,
    x: &[f64],
    t: f64,
    params: &PathParams,
    n_paths: usize,
    seed: u64,
) -> Result<MomentProbe> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(t > 0.0 && t <= params.t_horizon) {
        return Err(PidenetError::invalid("probe time outside (0, T]"));
    }
    let mut params = params.clone();
    params.monitor_times.push(t);
    let rows: Vec<Result<(f64, f64)>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let realization = sample_realization(spec, &params, seed, i as u64)?;
            let path = euler_path(spec, None, x, &realization, Variant::ExactCoeff, 1)?;
            let at = path
                .monitor_values()
                .last()
                .map(|v| v.iter().map(|a| a * a).sum::<f64>())
                .expect("monitor present");
            let sup = path
                .values
                .iter()
                .map(|v| v.iter().map(|a| a * a).sum::<f64>())
                .fold(0.0f64, f64::max);
            Ok((at, sup))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let at: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let sup: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(MomentProbe {
        at_time: mean_and_se(&at),
        sup: mean_and_se(&sup),
    })
}

/// Mean terminal state over Monte Carlo paths; used by martingale checks.
pub fn terminal_mean(
    spec: &JumpDiffusionSpec,
    x: &[f64],
    params: &PathParams,
    n_paths: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let finals: Vec<Result<Vec<f64>>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let realization = sample_realization(spec, params, seed, i as u64)?;
            let path = euler_path(spec, None, x, &realization, Variant::ExactCoeff, 1)?;
            Ok(path.terminal().to_vec())
        })
        .collect();
    let finals = finals.into_iter().collect::<Result<Vec<_>>>()?;
    let d = spec.d;
    let mut means = Vec::with_capacity(d);
    let mut ses = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<f64> = finals.iter().map(|v| v[j]).collect();
        let (m, s) = mean_and_se(&col);
        means.push(m);
        ses.push(s);
    }
    Ok((means, ses))
}
