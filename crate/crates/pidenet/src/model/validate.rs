//! Probe-based validation of the model contracts: global Lipschitz and
//! growth conditions, small-jump decay, the Levy integral bound and the
//! coefficient-network budgets. Sampling checks only; a passing report never
//! proves compliance.

use super::levy::NuRegion;
use super::{CoefficientNets, JumpCoefficient, JumpDiffusionSpec, JumpNets};
use crate::rng::{domain, stream};
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    /// Empirical maximum of the ratio the assumption bounds.
    pub observed: f64,
    /// The declared constant the ratio is compared against.
    pub declared: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub n_probes: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn violations(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "assumption validation over {} probes:", self.n_probes)?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {:<28} observed {:>12.5e}  declared {:>12.5e}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.observed,
                c.declared
            )?;
        }
        Ok(())
    }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn frob_sq(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum()
}

/// gamma difference integral `∫ ||gamma(x,z) - gamma(y,z)||^2 ν(dz)` over the
/// precomputed terms, exploiting the multiplicative structure when present.
fn gamma_lip_integral(
    spec: &JumpDiffusionSpec,
    terms: &[(f64, Vec<f64>)],
    x: &[f64],
    y: &[f64],
) -> f64 {
    match &spec.jump {
        JumpCoefficient::Multiplicative { f, g } => {
            let df = f(x) - f(y);
            terms
                .iter()
                .map(|(w, z)| w * sq_norm(&super::mat_vec(&df, &g(z))))
                .sum()
        }
        JumpCoefficient::General { gamma, .. } => terms
            .iter()
            .map(|(w, z)| {
                let gx = gamma(x, z);
                let gy = gamma(y, z);
                w * gx
                    .iter()
                    .zip(&gy)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum(),
    }
}

/// Per-coordinate `∫ |gamma_i(x,z)|^2 ν(dz)`.
fn gamma_growth_integral(
    spec: &JumpDiffusionSpec,
    terms: &[(f64, Vec<f64>)],
    x: &[f64],
) -> Vec<f64> {
    let mut acc = vec![0.0; spec.d];
    match &spec.jump {
        JumpCoefficient::Multiplicative { f, g } => {
            let fx = f(x);
            for (w, z) in terms {
                let v = super::mat_vec(&fx, &g(z));
                for (a, vi) in acc.iter_mut().zip(v) {
                    *a += w * vi * vi;
                }
            }
        }
        JumpCoefficient::General { gamma, .. } => {
            for (w, z) in terms {
                for (a, vi) in acc.iter_mut().zip(gamma(x, z)) {
                    *a += w * vi * vi;
                }
            }
        }
    }
    acc
}

fn net_gamma(nets: &CoefficientNets, spec: &JumpDiffusionSpec, x: &[f64], z: &[f64]) -> Vec<f64> {
    match (&nets.jump_nets, &spec.jump) {
        (JumpNets::Columns(_), JumpCoefficient::Multiplicative { g, .. }) => {
            let gz = g(z);
            nets.gamma(x, z, Some(&gz)).expect("column gamma eval")
        }
        _ => nets.gamma(x, z, None).expect("general gamma eval"),
    }
}

/// Empirical validation of the declared constants.
///
/// Draws `n_probes` probe points (and pairs), computes the maximal ratios the
/// assumptions bound, and flags any ratio exceeding its declared constant.
pub fn validate_assumptions(
    spec: &JumpDiffusionSpec,
    nets: Option<&CoefficientNets>,
    n_probes: usize,
    seed: u64,
) -> ValidationReport {
    assert!(n_probes >= 1, "n_probes must be at least 1");
    let d = spec.d;
    let cst = &spec.constants;
    let mut rng = stream(seed, domain::PROBE, 0);
    let scales = [0.5, 1.0, 2.0, 4.0];
    let draw = |rng: &mut rand_chacha::ChaCha12Rng, k: usize| -> Vec<f64> {
        let s = scales[k % scales.len()];
        (0..d)
            .map(|_| s * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };

    let full_terms = spec.levy.nu_terms(NuRegion::Full);
    let mut checks = Vec::new();

    // Lipschitz: ||beta(x)-beta(y)||^2 + ||sigma(x)-sigma(y)||_F^2 + ∫||dgamma||^2 dnu <= L |x-y|^2
    let mut lip_max = 0.0f64;
    // Growth: max_{i,j} |beta_i|^2 + |sigma_ij|^2 + ∫|gamma_i|^2 dnu <= L (1+|x|^2)
    let mut growth_max = 0.0f64;
    for k in 0..n_probes {
        let x = draw(&mut rng, k);
        let y = draw(&mut rng, k + 1);
        let dx = sq_norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
        if dx > 1e-20 {
            let num = sq_norm(
                &(spec.beta)(&x)
                    .iter()
                    .zip((spec.beta)(&y))
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            ) + frob_sq(&((spec.sigma)(&x) - (spec.sigma)(&y)))
                + gamma_lip_integral(spec, &full_terms, &x, &y);
            lip_max = lip_max.max(num / dx);
        }
        let beta = (spec.beta)(&x);
        let sigma = (spec.sigma)(&x);
        let gi = gamma_growth_integral(spec, &full_terms, &x);
        let sigma_row_max: Vec<f64> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| sigma[(i, j)] * sigma[(i, j)])
                    .fold(0.0, f64::max)
            })
            .collect();
        let denom = 1.0 + sq_norm(&x);
        for i in 0..d {
            growth_max = growth_max.max((beta[i] * beta[i] + sigma_row_max[i] + gi[i]) / denom);
        }
    }
    checks.push(CheckResult {
        name: "global_lipschitz",
        observed: lip_max,
        declared: cst.lipschitz_l,
        pass: lip_max <= cst.lipschitz_l * (1.0 + 1e-9),
    });
    checks.push(CheckResult {
        name: "linear_growth",
        observed: growth_max,
        declared: cst.lipschitz_l,
        pass: growth_max <= cst.lipschitz_l * (1.0 + 1e-9),
    });

    // small-jump decay and Levy integral bounds (general jump form)
    if let JumpCoefficient::General { gamma, .. } = &spec.jump {
        let mut decay_max = 0.0f64;
        for &delta in &[0.05, 0.1, 0.25, 0.5, 0.9] {
            let below = spec.levy.nu_terms(NuRegion::Below { delta });
            for k in 0..n_probes.min(64) {
                let x = draw(&mut rng, k);
                let integral: f64 = below.iter().map(|(w, z)| w * sq_norm(&gamma(&x, z))).sum();
                let bound_scale =
                    delta.powf(cst.p_bar) * (d as f64).powf(cst.q_bar) * (1.0 + sq_norm(&x));
                decay_max = decay_max.max(integral / bound_scale);
            }
        }
        checks.push(CheckResult {
            name: "small_jump_decay",
            observed: decay_max,
            declared: cst.l_tilde,
            pass: decay_max <= cst.l_tilde * (1.0 + 1e-9),
        });

        let levy_int = spec.levy.levy_integral();
        let levy_bound = cst.l_tilde * (d as f64).powf(cst.q_bar);
        checks.push(CheckResult {
            name: "levy_integral",
            observed: levy_int,
            declared: levy_bound,
            pass: levy_int <= levy_bound * (1.0 + 1e-9),
        });

        let mut mass_max = 0.0f64;
        for &delta in &[0.05, 0.1, 0.25, 0.5] {
            mass_max = mass_max.max(spec.levy.mass_above(delta) * delta * delta);
        }
        checks.push(CheckResult {
            name: "truncated_mass_bound",
            observed: mass_max,
            declared: levy_bound,
            pass: mass_max <= levy_bound * (1.0 + 1e-9),
        });
    }

    if let Some(nets) = nets {
        let eps = nets.epsilon;
        // approximation error of the networks against the exact coefficients
        let mut err_max = 0.0f64;
        let mut net_growth_max = 0.0f64;
        for k in 0..n_probes.min(256) {
            let x = draw(&mut rng, k);
            let denom = 1.0 + sq_norm(&x);
            let beta_err = sq_norm(
                &(spec.beta)(&x)
                    .iter()
                    .zip(nets.beta_net.eval(&x).expect("beta net"))
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            );
            let sigma_err = frob_sq(&((spec.sigma)(&x) - nets.sigma_matrix(&x).expect("sigma")));
            let gamma_err: f64 = full_terms
                .iter()
                .map(|(w, z)| {
                    let exact = spec.gamma(&x, z);
                    let approx = net_gamma(nets, spec, &x, z);
                    w * exact
                        .iter()
                        .zip(&approx)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                })
                .sum();
            err_max = err_max.max((beta_err + sigma_err + gamma_err) / denom);

            let g2: f64 = full_terms
                .iter()
                .map(|(w, z)| w * sq_norm(&net_gamma(nets, spec, &x, z)))
                .sum();
            let num = sq_norm(&nets.beta_net.eval(&x).expect("beta net"))
                + frob_sq(&nets.sigma_matrix(&x).expect("sigma"))
                + g2;
            let den = (d as f64).powf(cst.p) * eps.powf(-cst.q) + sq_norm(&x);
            net_growth_max = net_growth_max.max(num / den);
        }
        let err_bound = eps.powf(4.0 * cst.q + 1.0) * cst.c * (d as f64).powf(cst.p);
        checks.push(CheckResult {
            name: "net_approx_error",
            observed: err_max,
            declared: err_bound,
            pass: err_max <= err_bound * (1.0 + 1e-9),
        });
        checks.push(CheckResult {
            name: "net_growth",
            observed: net_growth_max,
            declared: cst.c,
            pass: net_growth_max <= cst.c * (1.0 + 1e-9),
        });

        let budget = cst.c * (d as f64).powf(cst.p) * eps.powf(-cst.q_hat);
        let used = nets.drift_diffusion_size() as f64;
        checks.push(CheckResult {
            name: "net_size_budget",
            observed: used,
            declared: budget,
            pass: used <= budget,
        });
        let jump_size = match &nets.jump_nets {
            JumpNets::Columns(cols) => cols.iter().map(|n| n.size()).max().unwrap_or(0),
            JumpNets::General(n) => n.size(),
        } as f64;
        checks.push(CheckResult {
            name: "jump_net_size",
            observed: jump_size,
            declared: budget,
            pass: jump_size <= budget,
        });
    }

    ValidationReport { checks, n_probes }
}

#[cfg(test)]
mod tests {
    use super::super::builtins::{builtin_model, ModelParams};
    use super::super::{DeclaredConstants, JumpCoefficient, JumpDiffusionSpec, LevyMeasure};
    use super::*;
    use std::sync::Arc;

    fn zero_spec(d: usize, l: f64) -> JumpDiffusionSpec {
        JumpDiffusionSpec {
            d,
            beta: Arc::new(move |_: &[f64]| vec![0.0; d]),
            sigma: Arc::new(move |_: &[f64]| Array2::zeros((d, d))),
            jump: JumpCoefficient::General {
                gamma: Arc::new(move |_: &[f64], _: &[f64]| vec![0.0; d]),
                mark_linear: None,
            },
            levy: LevyMeasure::none(d),
            constants: DeclaredConstants {
                lipschitz_l: l,
                ..DeclaredConstants::default()
            },
        }
    }

    #[test]
    fn zero_model_passes() {
        let report = validate_assumptions(&zero_spec(2, 1e-9), None, 100, 5);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn linear_drift_violation_is_flagged() {
        // beta(x) = 2x with declared L = 1: ratio 4 > 1
        let mut spec = zero_spec(1, 1.0);
        spec.beta = Arc::new(|x: &[f64]| x.iter().map(|v| 2.0 * v).collect());
        let report = validate_assumptions(&spec, None, 200, 6);
        assert!(!report.passed());
        let lip = report
            .checks
            .iter()
            .find(|c| c.name == "global_lipschitz")
            .unwrap();
        assert!((lip.observed - 4.0).abs() < 1e-9);
        assert!(!lip.pass);
    }

    #[test]
    fn merton_passes_with_closed_form_constants() {
        let (spec, nets) = builtin_model("merton", 1, &ModelParams::default()).unwrap();
        let report = validate_assumptions(&spec, Some(&nets), 10_000, 7);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn stable_like_passes_declared_decay() {
        let (spec, nets) = builtin_model("stable_like", 2, &ModelParams::default()).unwrap();
        let report = validate_assumptions(&spec, Some(&nets), 500, 8);
        assert!(report.passed(), "{report}");
    }
}
