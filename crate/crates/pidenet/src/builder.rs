//! Compiles one frozen randomness realization into ReLU networks: per-step
//! maps, chained path maps, payoff-composed networks and their average, the
//! final approximator. Every assembly level records its actual size next to
//! the bounds it must satisfy.
//!
//! The one-step update from the state at an Euler node is an affine function
//! of networks evaluated at that state: the identity carrier, the drift
//! network scaled by the time lag, each dispersion column scaled by a
//! Brownian increment coordinate, and the jump channels. In the
//! multiplicative regime the jump channels are the `F` columns scaled by the
//! compensated jump-part increments; in the compound-Poisson regime they are
//! the general jump network with its mark input frozen at each realized jump
//! plus the per-step compensator marks entering with negative weight. All
//! summands are lifted to a common depth and merged by one affine
//! combination, so the step network evaluates to exactly the simulated
//! update.

use crate::error::{PidenetError, Result};
use crate::model::{CoefficientNets, JumpCoefficient, JumpDiffusionSpec, JumpNets};
use crate::relu_net::{
    affine_combine, compose, freeze_trailing_inputs, identity_chain, identity_net, lift_to_depth,
    lift_to_depth_outer, parallelize, ReluNetwork,
};
use crate::simulate::RandomnessRealization;
use serde::{Deserialize, Serialize};

/// Which of the two constructive regimes a build follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuildMode {
    /// Levy-driven structure `gamma = F(y) G(z)`; no truncation needed.
    Multiplicative,
    /// General jump coefficient with truncation and compensator Monte Carlo.
    CompoundPoissonMc,
}

/// Discretization and averaging parameters of one assembled approximator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schedule {
    pub epsilon: f64,
    pub eps_bar: f64,
    pub t_horizon: f64,
    pub h: f64,
    pub n_steps: usize,
    pub delta: f64,
    pub m_comp: usize,
    pub n_realizations: usize,
    /// Dimension exponent used by the schedule formulas; kept for the
    /// ledger's exponent predictions.
    pub dim_exponent_r: f64,
}

/// One size-accounting record: the realized nonzero count against the
/// structural bound (valid unconditionally) and the proof-form bound (valid
/// under the declared constants and the jump-count cap).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub actual: usize,
    pub structural_bound: f64,
    pub proof_bound: f64,
}

impl LedgerEntry {
    pub fn holds(&self) -> bool {
        (self.actual as f64) <= self.structural_bound && (self.actual as f64) <= self.proof_bound
    }
}

/// Predicted exponents of `size(U) <= kappa d^{p_frak} eps^{-q_frak}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PredictedExponents {
    pub q_frak: f64,
    pub p_frak: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizeLedger {
    pub mode: BuildMode,
    pub entries: Vec<LedgerEntry>,
    pub predicted: PredictedExponents,
}

impl SizeLedger {
    pub fn violations(&self) -> Vec<&LedgerEntry> {
        self.entries.iter().filter(|e| !e.holds()).collect()
    }

    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.holds())
    }
}

/// The assembled approximator `U : R^{d + k d} -> R` with its schedule and
/// size ledger.
#[derive(Debug, Clone)]
pub struct AssembledApproximator {
    pub net: ReluNetwork,
    pub d: usize,
    pub k_param: usize,
    pub monitor_times: Vec<f64>,
    pub mode: BuildMode,
    pub schedule: Schedule,
    pub ledger: SizeLedger,
}

impl AssembledApproximator {
    pub fn eval(&self, x: &[f64], k_values: &[f64]) -> Result<f64> {
        if x.len() != self.d || k_values.len() != self.k_param * self.d {
            return Err(PidenetError::DimensionMismatch {
                context: "approximator input",
                expected: self.d + self.k_param * self.d,
                got: x.len() + k_values.len(),
            });
        }
        let mut input = Vec::with_capacity(x.len() + k_values.len());
        input.extend_from_slice(x);
        input.extend_from_slice(k_values);
        Ok(self.net.eval(&input)?[0])
    }
}

/// Payoff-side inputs the assembly needs: the payoff network over
/// `R^{d D + k d}`, the strike-channel multiplicity, the monitoring times
/// (sorted ascending) and the payoff budget constant.
pub struct PayoffHook<'a> {
    pub net: &'a ReluNetwork,
    pub k_param: usize,
    pub monitor_times: Vec<f64>,
    pub budget_c: f64,
}

/// Jump-count cap `3 T delta^{-2} L_tilde d^{q_bar}` the realization
/// selection enforces; infinite for untruncated finite activity.
pub fn jump_count_cap(spec: &JumpDiffusionSpec, t_horizon: f64, delta: f64) -> f64 {
    let c = &spec.constants;
    if delta > 0.0 {
        3.0 * t_horizon * delta.powi(-2) * c.l_tilde * (spec.d as f64).powf(c.q_bar)
    } else {
        f64::INFINITY
    }
}

pub fn realization_within_jump_cap(
    spec: &JumpDiffusionSpec,
    realization: &RandomnessRealization,
) -> bool {
    (realization.events.len() as f64)
        <= jump_count_cap(spec, realization.t_horizon, realization.delta)
}

pub struct Builder<'a> {
    pub spec: &'a JumpDiffusionSpec,
    pub nets: &'a CoefficientNets,
    pub mode: BuildMode,
}

struct StepBounds {
    structural: f64,
    proof: f64,
}

impl<'a> Builder<'a> {
    pub fn new(spec: &'a JumpDiffusionSpec, nets: &'a CoefficientNets) -> Result<Self> {
        let mode = match (&nets.jump_nets, &spec.jump) {
            (JumpNets::Columns(_), JumpCoefficient::Multiplicative { .. }) => {
                BuildMode::Multiplicative
            }
            (JumpNets::General(_), _) => BuildMode::CompoundPoissonMc,
            _ => {
                return Err(PidenetError::invalid(
                    "column jump networks need a multiplicative jump coefficient",
                ))
            }
        };
        Ok(Builder { spec, nets, mode })
    }

    fn d(&self) -> usize {
        self.spec.d
    }

    /// Proof-form bound on one step network.
    fn phi_proof_bound(&self, realization: &RandomnessRealization) -> f64 {
        let d = self.d() as f64;
        let c = &self.spec.constants;
        let eps_pow = self.nets.epsilon.powf(-c.q_hat);
        match self.mode {
            BuildMode::Multiplicative => {
                (1.0 + 6.0 * d + 8.0 * d * d) * 2.0 * c.c * d.powf(c.p) * eps_pow
            }
            BuildMode::CompoundPoissonMc => {
                let t = realization.t_horizon;
                let delta_term = if realization.delta > 0.0 {
                    2.0 * realization.delta.powi(-2)
                } else {
                    f64::INFINITY
                };
                12.0 * c.c
                    * 1f64.max(2.0 * t * c.l_tilde)
                    * d.powf(c.p + c.q_bar + 2.0)
                    * eps_pow
                    * (1.0 + delta_term + realization.m_comp as f64)
            }
        }
    }

    /// The one-step network mapping the state at Euler node `n` to the state
    /// at time `t` in `(t_n, t_{n+1}]`, for this realization.
    pub fn build_step_net(
        &self,
        realization: &RandomnessRealization,
        euler_step: usize,
        t: f64,
    ) -> Result<ReluNetwork> {
        self.step_net_with_bounds(realization, euler_step, t)
            .map(|(net, _)| net)
    }

    fn step_net_with_bounds(
        &self,
        realization: &RandomnessRealization,
        euler_step: usize,
        t: f64,
    ) -> Result<(ReluNetwork, StepBounds)> {
        let d = self.d();
        if realization.d != d {
            return Err(PidenetError::DimensionMismatch {
                context: "step net realization",
                expected: d,
                got: realization.d,
            });
        }
        if euler_step >= realization.n_steps {
            return Err(PidenetError::invalid("euler_step beyond the grid"));
        }
        let tol = 1e-12 * realization.t_horizon.max(1.0);
        let lo = realization.euler_nodes[euler_step];
        let hi = realization.euler_nodes[euler_step + 1];
        let t_n = realization.times[lo];
        if !(t > t_n + tol && t <= realization.times[hi] + tol) {
            return Err(PidenetError::invalid(format!(
                "step-net target time {t} outside the step window"
            )));
        }
        let t_node = realization
            .times
            .partition_point(|&v| v < t - tol)
            .min(realization.times.len() - 1);
        if (realization.times[t_node] - t).abs() > tol {
            return Err(PidenetError::invalid(format!(
                "step-net target time {t} is not a grid node"
            )));
        }
        let dt = t - t_n;

        // accumulated Brownian increment over (t_n, t]
        let mut db = vec![0.0f64; d];
        for i in lo..t_node {
            for (a, inc) in db.iter_mut().zip(&realization.brownian[i]) {
                *a += inc;
            }
        }
        // events in (t_n, t]
        let first_event = realization.event_nodes.partition_point(|&e| e <= lo);
        let events: Vec<usize> = (first_event..realization.events.len())
            .take_while(|&k| realization.event_nodes[k] <= t_node)
            .collect();

        // weighted summands, skipping zero networks and zero weights
        let mut components: Vec<(ReluNetwork, f64)> = Vec::new();
        if self.nets.beta_net.size() > 0 {
            components.push((self.nets.beta_net.clone(), dt));
        }
        for (j, col) in self.nets.sigma_nets.iter().enumerate() {
            if col.size() > 0 && db[j] != 0.0 {
                components.push((col.clone(), db[j]));
            }
        }
        match (&self.nets.jump_nets, self.mode) {
            (JumpNets::Columns(cols), BuildMode::Multiplicative) => {
                // compensated jump-part increments of the driving process
                let g = match &self.spec.jump {
                    JumpCoefficient::Multiplicative { g, .. } => g,
                    JumpCoefficient::General { .. } => unreachable!("mode checked"),
                };
                let m_g = self.spec.g_integral_above(realization.delta)?;
                let mut dl = vec![0.0f64; d];
                for &k in &events {
                    let gz = g(&realization.events[k].mark);
                    for (a, v) in dl.iter_mut().zip(gz) {
                        *a += v;
                    }
                }
                for (a, m) in dl.iter_mut().zip(&m_g) {
                    *a -= dt * m;
                }
                for (j, col) in cols.iter().enumerate() {
                    if col.size() > 0 && dl[j] != 0.0 {
                        components.push((col.clone(), dl[j]));
                    }
                }
            }
            (JumpNets::General(gamma_net), BuildMode::CompoundPoissonMc) => {
                for &k in &events {
                    let mark = &realization.events[k].mark;
                    let norm = mark.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm <= realization.delta {
                        return Err(PidenetError::invalid(
                            "realization carries a jump mark inside the truncated ball",
                        ));
                    }
                    components.push((freeze_trailing_inputs(gamma_net, mark)?, 1.0));
                }
                let m = realization.m_comp;
                if m == 0 {
                    return Err(PidenetError::invalid(
                        "compound-Poisson mode needs compensator marks (m_comp >= 1)",
                    ));
                }
                let mass = self.spec.levy.mass_above(realization.delta);
                if mass > 0.0 {
                    let w = -dt * mass / m as f64;
                    for mark in &realization.compensator_marks[euler_step] {
                        components.push((freeze_trailing_inputs(gamma_net, mark)?, w));
                    }
                }
            }
            _ => unreachable!("constructor checked the structure"),
        }

        // common depth: the deepest summand, with at least one hidden layer
        let max_maps = components
            .iter()
            .map(|(n, _)| n.affine_maps())
            .max()
            .unwrap_or(2)
            .max(2);

        let mut structural = (2 * d * max_maps) as f64; // identity carrier
        let mut lifted: Vec<ReluNetwork> = Vec::with_capacity(components.len() + 1);
        let mut weights: Vec<f64> = Vec::with_capacity(components.len() + 1);
        lifted.push(identity_net(d, max_maps)?);
        weights.push(1.0);
        for (net, w) in &components {
            let k_lift = max_maps - net.affine_maps();
            structural += if k_lift == 0 {
                net.size() as f64
            } else {
                // compose bound with the identity inner
                2.0 * net.size() as f64 + 2.0 * (d * k_lift) as f64 + 2.0 * d as f64
            };
            lifted.push(lift_to_depth(net, max_maps + 1)?);
            weights.push(*w);
        }
        let refs: Vec<&ReluNetwork> = lifted.iter().collect();
        let net = affine_combine(&refs, &weights, &vec![0.0; d])?;
        let bounds = StepBounds {
            structural,
            proof: self.phi_proof_bound(realization),
        };
        Ok((net, bounds))
    }

    /// Chains the step networks along one realization, branching the path
    /// map at every monitoring time, and composes the payoff on top.
    fn build_psi_bar(
        &self,
        realization: &RandomnessRealization,
        payoff: &PayoffHook<'_>,
        tag: &str,
        ledger: &mut Vec<LedgerEntry>,
    ) -> Result<ReluNetwork> {
        let d = self.d();
        if payoff.monitor_times.is_empty() {
            return Err(PidenetError::invalid(
                "payoff needs at least one monitoring time",
            ));
        }
        let tol = 1e-12 * realization.t_horizon.max(1.0);
        if payoff.monitor_times.windows(2).any(|w| w[1] - w[0] <= tol) {
            return Err(PidenetError::invalid(
                "monitoring times must be sorted strictly ascending",
            ));
        }

        let mut chain: Option<ReluNetwork> = None;
        let mut phi_sizes: Vec<usize> = Vec::new();
        let mut phi_proof = 0.0f64;
        let mut psis: Vec<ReluNetwork> = Vec::new();
        let mut monitors = payoff.monitor_times.iter().peekable();

        for n in 0..realization.n_steps {
            let t_next = realization.times[realization.euler_nodes[n + 1]];
            // monitoring times strictly inside (t_n, t_{n+1})
            while let Some(&&tau) = monitors.peek() {
                if tau >= t_next - tol {
                    break;
                }
                let (phi_tau, b) = self.step_net_with_bounds(realization, n, tau)?;
                ledger.push(LedgerEntry {
                    label: format!("{tag}.phi[step {n}, t={tau:.6}]"),
                    actual: phi_tau.size(),
                    structural_bound: b.structural,
                    proof_bound: b.proof,
                });
                let psi = match &chain {
                    Some(acc) => compose(&phi_tau, acc)?,
                    None => phi_tau.clone(),
                };
                ledger.push(LedgerEntry {
                    label: format!("{tag}.psi[t={tau:.6}]"),
                    actual: psi.size(),
                    structural_bound: 2.0 * phi_tau.size() as f64
                        + 3.0 * phi_sizes.iter().sum::<usize>() as f64,
                    proof_bound: (2.0 + 3.0 * n as f64) * phi_proof.max(b.proof),
                });
                psis.push(psi);
                monitors.next();
            }
            // the full step to t_{n+1}
            let (phi, b) = self.step_net_with_bounds(realization, n, t_next)?;
            ledger.push(LedgerEntry {
                label: format!("{tag}.phi[step {n}]"),
                actual: phi.size(),
                structural_bound: b.structural,
                proof_bound: b.proof,
            });
            phi_proof = phi_proof.max(b.proof);
            chain = Some(match &chain {
                Some(acc) => compose(&phi, acc)?,
                None => phi.clone(),
            });
            phi_sizes.push(phi.size());
            // monitoring time at the node itself
            while let Some(&&tau) = monitors.peek() {
                if (tau - t_next).abs() > tol {
                    break;
                }
                let psi = chain.clone().expect("at least one step chained");
                let last = *phi_sizes.last().expect("nonempty") as f64;
                let rest: f64 = phi_sizes[..phi_sizes.len() - 1].iter().sum::<usize>() as f64;
                ledger.push(LedgerEntry {
                    label: format!("{tag}.psi[t={tau:.6}]"),
                    actual: psi.size(),
                    structural_bound: 2.0 * last + 3.0 * rest,
                    proof_bound: (2.0 + 3.0 * n as f64) * phi_proof,
                });
                psis.push(psi);
                monitors.next();
            }
        }
        if monitors.peek().is_some() {
            return Err(PidenetError::invalid(
                "monitoring time beyond the realization horizon",
            ));
        }

        let psi_refs: Vec<&ReluNetwork> = psis.iter().collect();
        let (psi_bar, structural) = payoff_composition(&psi_refs, payoff.net, payoff.k_param, d)?;
        ledger.push(LedgerEntry {
            label: format!("{tag}.psi_bar"),
            actual: psi_bar.size(),
            structural_bound: structural,
            proof_bound: self.psi_bar_proof_bound(realization, payoff),
        });
        Ok(psi_bar)
    }

    /// Proof-form bound on the payoff-composed network.
    fn psi_bar_proof_bound(
        &self,
        realization: &RandomnessRealization,
        payoff: &PayoffHook<'_>,
    ) -> f64 {
        let d = self.d() as f64;
        let cst = &self.spec.constants;
        let c = cst.c.max(payoff.budget_c);
        let k = payoff.k_param.max(1) as f64;
        let t = realization.t_horizon;
        let h = t / realization.n_steps as f64;
        let eps_pow = self.nets.epsilon.powf(-(cst.q + cst.q_hat));
        match self.mode {
            BuildMode::Multiplicative => {
                let c_tilde = 4200.0 * c.max(1.0) * k * t * c;
                c_tilde * h.recip() * d.powf(2.0 * cst.p + 4.0) * eps_pow
            }
            BuildMode::CompoundPoissonMc => {
                let c0 = 12.0 * c * 1f64.max(2.0 * t * cst.l_tilde);
                let c_tilde = 60.0 * c * 1f64.max(7.0 * k * c0) * t.max(1.0);
                let delta_sq = if realization.delta > 0.0 {
                    realization.delta.powi(-2)
                } else {
                    f64::INFINITY
                };
                c_tilde
                    * h.recip()
                    * delta_sq
                    * d.powf(2.0 * cst.p + cst.q_bar + 3.0)
                    * eps_pow
                    * (1.0 + realization.m_comp as f64)
            }
        }
    }

    /// Predicted size exponents from the proof forms.
    fn predicted_exponents(&self, schedule: &Schedule) -> PredictedExponents {
        let cst = &self.spec.constants;
        let r = schedule.dim_exponent_r;
        match self.mode {
            BuildMode::Multiplicative => PredictedExponents {
                q_frak: 4.0 + 8.0 * cst.q + cst.q_hat,
                p_frak: 2.0 * cst.p + 4.0 + 2.0 * r + 8.0 * cst.q * r + cst.q_hat * r,
            },
            BuildMode::CompoundPoissonMc => {
                let pb = cst.p_bar;
                PredictedExponents {
                    q_frak: 6.0 + 8.0 / pb + 14.0 * cst.q + cst.q_hat + 12.0 * cst.q / pb,
                    p_frak: 4.0 * r
                        + 4.0 * r / pb
                        + 2.0 * cst.p
                        + cst.q_bar
                        + 3.0
                        + 14.0 * cst.q * r
                        + cst.q_hat * r
                        + 12.0 * cst.q * r / pb,
                }
            }
        }
    }

    /// Builds the approximator from explicit realizations (all sampled
    /// x-independently on matching grids).
    pub fn assemble_from_realizations(
        &self,
        payoff: &PayoffHook<'_>,
        schedule: &Schedule,
        realizations: &[RandomnessRealization],
    ) -> Result<AssembledApproximator> {
        if realizations.len() != schedule.n_realizations {
            return Err(PidenetError::invalid(format!(
                "schedule expects {} realizations, got {}",
                schedule.n_realizations,
                realizations.len()
            )));
        }
        for r in realizations {
            if r.n_steps != schedule.n_steps
                || (r.t_horizon - schedule.t_horizon).abs() > 1e-12 * schedule.t_horizon.max(1.0)
            {
                return Err(PidenetError::invalid(
                    "realization grid does not match the schedule (N != T/h)",
                ));
            }
        }
        let mut entries = Vec::new();
        let mut psi_bars = Vec::with_capacity(realizations.len());
        for (i, r) in realizations.iter().enumerate() {
            let tag = format!("i={i}");
            psi_bars.push(self.build_psi_bar(r, payoff, &tag, &mut entries)?);
        }
        let max_maps = psi_bars
            .iter()
            .map(|p| p.affine_maps())
            .max()
            .expect("nonempty");
        let lifted: Vec<ReluNetwork> = psi_bars
            .iter()
            .map(|p| lift_to_depth_outer(p, max_maps + 1))
            .collect::<Result<_>>()?;
        let refs: Vec<&ReluNetwork> = lifted.iter().collect();
        let w = 1.0 / lifted.len() as f64;
        let net = affine_combine(&refs, &vec![w; lifted.len()], &[0.0])?;
        let structural: f64 = lifted.iter().map(|p| p.size() as f64).sum();
        let proof: f64 = realizations
            .iter()
            .map(|r| self.psi_bar_proof_bound(r, payoff))
            .sum();
        entries.push(LedgerEntry {
            label: "U".into(),
            actual: net.size(),
            structural_bound: structural,
            proof_bound: proof,
        });
        let ledger = SizeLedger {
            mode: self.mode,
            entries,
            predicted: self.predicted_exponents(schedule),
        };
        Ok(AssembledApproximator {
            net,
            d: self.d(),
            k_param: payoff.k_param,
            monitor_times: payoff.monitor_times.clone(),
            mode: self.mode,
            schedule: schedule.clone(),
            ledger,
        })
    }

    /// Samples `n_realizations` independent realizations under the schedule
    /// and assembles the approximator.
    pub fn assemble_approximator(
        &self,
        payoff: &PayoffHook<'_>,
        schedule: &Schedule,
        seed: u64,
    ) -> Result<AssembledApproximator> {
        let realizations = sample_schedule_realizations(self.spec, payoff, schedule, seed, 0)?;
        self.assemble_from_realizations(payoff, schedule, &realizations)
    }
}

/// Samples the x-independent realization tuple for one assembly attempt.
pub fn sample_schedule_realizations(
    spec: &JumpDiffusionSpec,
    payoff: &PayoffHook<'_>,
    schedule: &Schedule,
    seed: u64,
    attempt: u64,
) -> Result<Vec<RandomnessRealization>> {
    let params = crate::simulate::PathParams {
        t_horizon: schedule.t_horizon,
        n_steps: schedule.n_steps,
        delta: schedule.delta,
        m_comp: schedule.m_comp,
        monitor_times: payoff.monitor_times.clone(),
    };
    (0..schedule.n_realizations)
        .map(|i| {
            crate::simulate::sample_realization(
                spec,
                &params,
                seed,
                attempt * schedule.n_realizations as u64 + i as u64,
            )
        })
        .collect()
}

/// Chains step networks `[Phi_{t_1}, ..., Phi_{t_n}, Phi_t]` into the path
/// map; an empty chain returns an identity network.
pub fn chain_steps(d: usize, step_nets: &[&ReluNetwork]) -> Result<ReluNetwork> {
    match step_nets.split_first() {
        None => identity_net(d, 2),
        Some((first, rest)) => {
            let mut acc = (*first).clone();
            for net in rest {
                acc = compose(net, &acc)?;
            }
            Ok(acc)
        }
    }
}

/// Payoff composition: lifts the path maps to a common depth, parallelizes
/// them over the shared state input (with a distinct identity channel for
/// the strike block when present) and composes the payoff network on top.
pub fn assemble_payoff_net(
    psi_nets: &[&ReluNetwork],
    payoff_net: &ReluNetwork,
    k_param: usize,
    d: usize,
) -> Result<ReluNetwork> {
    payoff_composition(psi_nets, payoff_net, k_param, d).map(|(n, _)| n)
}

fn payoff_composition(
    psi_nets: &[&ReluNetwork],
    payoff_net: &ReluNetwork,
    k_param: usize,
    d: usize,
) -> Result<(ReluNetwork, f64)> {
    if psi_nets.is_empty() {
        return Err(PidenetError::invalid("payoff assembly needs path maps"));
    }
    let monitors = psi_nets.len();
    let expected_in = d * monitors + k_param * d;
    if payoff_net.input_dim() != expected_in {
        return Err(PidenetError::DimensionMismatch {
            context: "payoff network input",
            expected: expected_in,
            got: payoff_net.input_dim(),
        });
    }
    let max_maps = psi_nets
        .iter()
        .map(|p| p.affine_maps())
        .max()
        .expect("nonempty");
    let lifted: Vec<ReluNetwork> = psi_nets
        .iter()
        .map(|p| lift_to_depth_outer(p, max_maps + 1))
        .collect::<Result<_>>()?;
    let refs: Vec<&ReluNetwork> = lifted.iter().collect();
    let shared = parallelize(&refs, false)?;
    let inner = if k_param > 0 {
        let ident = identity_chain(k_param * d, max_maps)?;
        parallelize(&[&shared, &ident], true)?
    } else {
        shared
    };
    let structural = 2.0 * payoff_net.size() as f64 + inner.size() as f64 + inner.size_out() as f64;
    let net = compose(payoff_net, &inner)?;
    Ok((net, structural))
}

// ---------------------------------------------------------------------------
// serialization of the assembled approximator
// ---------------------------------------------------------------------------

pub const APPROXIMATOR_FORMAT: &str = "pidenet-approximator";
pub const APPROXIMATOR_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ApproximatorDto {
    format: String,
    version: u32,
    d: usize,
    k_param: usize,
    monitor_times: Vec<f64>,
    mode: BuildMode,
    schedule: Schedule,
    ledger: SizeLedger,
    network: serde_json::Value,
}

impl AssembledApproximator {
    pub fn to_json(&self) -> String {
        let dto = ApproximatorDto {
            format: APPROXIMATOR_FORMAT.to_string(),
            version: APPROXIMATOR_FORMAT_VERSION,
            d: self.d,
            k_param: self.k_param,
            monitor_times: self.monitor_times.clone(),
            mode: self.mode,
            schedule: self.schedule.clone(),
            ledger: self.ledger.clone(),
            network: serde_json::from_str(&self.net.to_json()).expect("network json"),
        };
        serde_json::to_string(&dto).expect("approximator serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: ApproximatorDto =
            serde_json::from_str(text).map_err(|e| PidenetError::Serialization(e.to_string()))?;
        if dto.format != APPROXIMATOR_FORMAT || dto.version != APPROXIMATOR_FORMAT_VERSION {
            return Err(PidenetError::Serialization(format!(
                "unexpected approximator format {} v{}",
                dto.format, dto.version
            )));
        }
        let net = ReluNetwork::from_json(&dto.network.to_string())?;
        Ok(AssembledApproximator {
            net,
            d: dto.d,
            k_param: dto.k_param,
            monitor_times: dto.monitor_times,
            mode: dto.mode,
            schedule: dto.schedule,
            ledger: dto.ledger,
        })
    }
}
