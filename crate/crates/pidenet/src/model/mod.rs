//! Jump-diffusion model specifications: exact coefficients, their network
//! representations, Levy measure descriptors, coefficient-form conversion
//! and statistical validation of the model contracts.

mod builtins;
mod levy;
mod validate;

pub use builtins::{
    builtin_model, finite_activity_general, load_model_file, model_from_file, ModelFile,
    ModelParams,
};
pub use levy::{
    large_jump_region, FaComponent, FiniteActivity, JumpEvent, LevyMeasure, MarkLaw, NuRegion,
    StableLike,
};
pub use validate::{validate_assumptions, CheckResult, ValidationReport};

use crate::error::{PidenetError, Result};
use crate::relu_net::ReluNetwork;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatFn = Arc<dyn Fn(&[f64]) -> Array2<f64> + Send + Sync>;
pub type PairFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Constants declared with a model: the Lipschitz/growth constant, the
/// small-jump decay triple and the network budget constants. Validation
/// checks them empirically; the scheduler and the size ledger consume them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeclaredConstants {
    /// Global Lipschitz and growth constant `L`.
    pub lipschitz_l: f64,
    /// Small-jump decay scale (general jump form only).
    pub l_tilde: f64,
    /// Small-jump decay exponent in the truncation level.
    pub p_bar: f64,
    /// Small-jump decay exponent in the dimension.
    pub q_bar: f64,
    /// Coefficient-network budget scale `C`.
    pub c: f64,
    /// Coefficient-network budget exponent `p` in the dimension.
    pub p: f64,
    /// Accuracy exponent `q` of the approximant growth.
    pub q: f64,
    /// Accuracy exponent of the network sizes.
    pub q_hat: f64,
}

impl Default for DeclaredConstants {
    fn default() -> Self {
        DeclaredConstants {
            lipschitz_l: 1.0,
            l_tilde: 1.0,
            p_bar: 2.0,
            q_bar: 0.0,
            c: 8.0,
            p: 2.0,
            q: 0.0,
            q_hat: 0.0,
        }
    }
}

/// Jump coefficient of the SDE.
#[derive(Clone)]
pub enum JumpCoefficient {
    /// `gamma(y, z) = F(y) G(z)` (Levy-driven structure; no truncation needed).
    Multiplicative { f: MatFn, g: VecFn },
    /// General `gamma(y, z)`; requires the small-jump decay constants.
    /// `mark_linear = Some(A)` declares `gamma(y, z) = A z`, which lets the
    /// compensator integral collapse to one precomputed vector.
    General {
        gamma: PairFn,
        mark_linear: Option<Array2<f64>>,
    },
}

impl JumpCoefficient {
    pub fn is_multiplicative(&self) -> bool {
        matches!(self, JumpCoefficient::Multiplicative { .. })
    }
}

/// A jump-diffusion specification: drift `beta`, dispersion `sigma`, jump
/// coefficient `gamma` against the measure `levy`, in compensated form.
#[derive(Clone)]
pub struct JumpDiffusionSpec {
    pub d: usize,
    pub beta: VecFn,
    pub sigma: MatFn,
    pub jump: JumpCoefficient,
    pub levy: LevyMeasure,
    pub constants: DeclaredConstants,
}

impl JumpDiffusionSpec {
    /// `gamma(y, z)` through whichever jump structure the model carries.
    pub fn gamma(&self, y: &[f64], z: &[f64]) -> Vec<f64> {
        match &self.jump {
            JumpCoefficient::Multiplicative { f, g } => {
                let fy = f(y);
                let gz = g(z);
                mat_vec(&fy, &gz)
            }
            JumpCoefficient::General { gamma, .. } => gamma(y, z),
        }
    }

    /// The multiplicative structure exposed as a general-form adapter.
    pub fn general_gamma_adapter(&self) -> PairFn {
        match &self.jump {
            JumpCoefficient::Multiplicative { f, g } => {
                let f = f.clone();
                let g = g.clone();
                Arc::new(move |y: &[f64], z: &[f64]| mat_vec(&f(y), &g(z)))
            }
            JumpCoefficient::General { gamma, .. } => gamma.clone(),
        }
    }

    /// `∫_{A_delta} G(z) ν(dz)` for the multiplicative jump part; the
    /// state-independent half of the compensator.
    pub fn g_integral_above(&self, delta: f64) -> Result<Vec<f64>> {
        match &self.jump {
            JumpCoefficient::Multiplicative { g, .. } => {
                let g = g.clone();
                Ok(self.levy.integrate(
                    NuRegion::Above {
                        delta,
                        inclusive: false,
                    },
                    self.d,
                    &move |z| g(z),
                ))
            }
            JumpCoefficient::General { .. } => Err(PidenetError::invalid(
                "g_integral_above needs a multiplicative jump coefficient",
            )),
        }
    }
}

pub(crate) fn mat_vec(a: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    let (rows, cols) = a.dim();
    debug_assert_eq!(cols, x.len());
    let mut out = vec![0.0; rows];
    for r in 0..rows {
        let mut acc = 0.0;
        for c in 0..cols {
            acc += a[(r, c)] * x[c];
        }
        out[r] = acc;
    }
    out
}

/// Networks representing the coefficients at accuracy `epsilon`.
#[derive(Debug, Clone)]
pub struct CoefficientNets {
    pub beta_net: ReluNetwork,
    /// Column networks: `sigma(x) v = Σ_j sigma_net_j(x) v_j`.
    pub sigma_nets: Vec<ReluNetwork>,
    pub jump_nets: JumpNets,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub enum JumpNets {
    /// Column networks of `F` in the multiplicative structure.
    Columns(Vec<ReluNetwork>),
    /// One network on `R^{2d}`: `(y, z) -> gamma(y, z)`.
    General(ReluNetwork),
}

impl CoefficientNets {
    /// Validates shapes and the declared size budget
    /// `size(beta) + Σ size(sigma_j) <= C d^p eps^{-q_hat}`.
    pub fn new(
        d: usize,
        beta_net: ReluNetwork,
        sigma_nets: Vec<ReluNetwork>,
        jump_nets: JumpNets,
        epsilon: f64,
        constants: &DeclaredConstants,
    ) -> Result<Self> {
        if beta_net.input_dim() != d || beta_net.output_dim() != d {
            return Err(PidenetError::invalid("beta network must map R^d -> R^d"));
        }
        if sigma_nets.len() != d {
            return Err(PidenetError::invalid(format!(
                "need {d} sigma column networks, got {}",
                sigma_nets.len()
            )));
        }
        for n in &sigma_nets {
            if n.input_dim() != d || n.output_dim() != d {
                return Err(PidenetError::invalid(
                    "sigma column nets must map R^d -> R^d",
                ));
            }
        }
        match &jump_nets {
            JumpNets::Columns(cols) => {
                if cols.len() != d {
                    return Err(PidenetError::invalid("need d jump column networks"));
                }
                for n in cols {
                    if n.input_dim() != d || n.output_dim() != d {
                        return Err(PidenetError::invalid(
                            "jump column nets must map R^d -> R^d",
                        ));
                    }
                }
            }
            JumpNets::General(net) => {
                if net.input_dim() != 2 * d || net.output_dim() != d {
                    return Err(PidenetError::invalid(
                        "general jump net must map R^{2d} -> R^d",
                    ));
                }
            }
        }
        let nets = CoefficientNets {
            beta_net,
            sigma_nets,
            jump_nets,
            epsilon,
        };
        let budget = constants.c * (d as f64).powf(constants.p) * epsilon.powf(-constants.q_hat);
        let used = nets.drift_diffusion_size();
        if (used as f64) > budget {
            return Err(PidenetError::invalid(format!(
                "coefficient nets exceed the declared size budget: {used} > {budget}"
            )));
        }
        Ok(nets)
    }

    pub fn drift_diffusion_size(&self) -> usize {
        self.beta_net.size() + self.sigma_nets.iter().map(|n| n.size()).sum::<usize>()
    }

    /// `sigma_net(x) v` assembled from the column networks.
    pub fn sigma_matvec(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let d = self.beta_net.input_dim();
        let mut out = vec![0.0; d];
        for (j, net) in self.sigma_nets.iter().enumerate() {
            if v[j] == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(net.eval(x)?) {
                *o += c * v[j];
            }
        }
        Ok(out)
    }

    /// The dense matrix `sigma_net(x)` column by column.
    pub fn sigma_matrix(&self, x: &[f64]) -> Result<Array2<f64>> {
        let d = self.beta_net.input_dim();
        let mut m = Array2::zeros((d, d));
        for (j, net) in self.sigma_nets.iter().enumerate() {
            for (i, v) in net.eval(x)?.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// `gamma_net(y, z)` through the stored structure. For the multiplicative
    /// case the exact `G` must be supplied by the caller via `g_of_z`.
    pub fn gamma(&self, y: &[f64], z: &[f64], g_of_z: Option<&[f64]>) -> Result<Vec<f64>> {
        match &self.jump_nets {
            JumpNets::Columns(cols) => {
                let g = g_of_z.ok_or_else(|| {
                    PidenetError::invalid("multiplicative gamma needs G(z) values")
                })?;
                let d = self.beta_net.input_dim();
                let mut out = vec![0.0; d];
                for (j, net) in cols.iter().enumerate() {
                    if g[j] == 0.0 {
                        continue;
                    }
                    for (o, c) in out.iter_mut().zip(net.eval(y)?) {
                        *o += c * g[j];
                    }
                }
                Ok(out)
            }
            JumpNets::General(net) => {
                let mut input = Vec::with_capacity(y.len() + z.len());
                input.extend_from_slice(y);
                input.extend_from_slice(z);
                net.eval(&input)
            }
        }
    }
}

/// Exact ReLU representation of the affine map `x -> A x + b`, carried with
/// one hidden layer of paired `relu(x_j), relu(-x_j)` channels so that every
/// coefficient network enters the step builder with a hidden layer.
pub fn affine_to_net(a: &Array2<f64>, b: &Array1<f64>) -> Result<ReluNetwork> {
    use crate::relu_net::Layer;
    let (rows, cols) = a.dim();
    if b.len() != rows {
        return Err(PidenetError::DimensionMismatch {
            context: "affine_to_net bias",
            expected: rows,
            got: b.len(),
        });
    }
    // channels only for input coordinates that are actually read
    let used: Vec<usize> = (0..cols)
        .filter(|&j| (0..rows).any(|i| a[(i, j)] != 0.0))
        .collect();
    let hidden = (2 * used.len()).max(1);
    let mut first = Vec::with_capacity(2 * used.len());
    for (k, &j) in used.iter().enumerate() {
        first.push(((2 * k) as u32, j as u32, 1.0));
        first.push(((2 * k + 1) as u32, j as u32, -1.0));
    }
    let l1 = Layer::from_entries(hidden, cols, first, vec![0.0; hidden])?;
    let mut second = Vec::new();
    for (k, &j) in used.iter().enumerate() {
        for i in 0..rows {
            let v = a[(i, j)];
            if v != 0.0 {
                second.push((i as u32, (2 * k) as u32, v));
                second.push((i as u32, (2 * k + 1) as u32, -v));
            }
        }
    }
    let l2 = Layer::from_entries(rows, hidden, second, b.to_vec())?;
    ReluNetwork::new(cols, vec![l1, l2])
}

/// Rewrites raw SDE coefficients `(b, f, g)` into the compensated form
/// `(beta, gamma)`:
/// `beta(y) = b(y) + ∫_{||z|| >= 1} g(y, z) ν(dz)` and
/// `gamma = f 1_{||z|| < 1} + g 1_{||z|| >= 1}`.
pub fn to_compensated_form(
    d: usize,
    b: VecFn,
    f: PairFn,
    g: PairFn,
    levy: &LevyMeasure,
) -> Result<(VecFn, PairFn)> {
    let terms = levy.nu_terms(large_jump_region());
    // verify integrability at a probe point before capturing
    let probe = vec![0.0; d];
    let mut check = vec![0.0; d];
    for (w, z) in &terms {
        for (acc, v) in check.iter_mut().zip(g(&probe, z)) {
            *acc += w * v;
        }
    }
    if check.iter().any(|v| !v.is_finite()) {
        return Err(PidenetError::ModelConstruction(
            "large-jump part of g is not integrable against the measure".into(),
        ));
    }
    let g_beta = g.clone();
    let beta: VecFn = Arc::new(move |y: &[f64]| {
        let mut out = b(y);
        for (w, z) in &terms {
            for (acc, v) in out.iter_mut().zip(g_beta(y, z)) {
                *acc += w * v;
            }
        }
        out
    });
    let gamma: PairFn = Arc::new(move |y: &[f64], z: &[f64]| {
        let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1.0 {
            f(y, z)
        } else {
            g(y, z)
        }
    });
    Ok((beta, gamma))
}

/// Inverse of [`to_compensated_form`]: recovers `(b, f, g)` from
/// `(beta, gamma)` under the same measure.
pub fn from_compensated_form(
    _d: usize,
    beta: VecFn,
    gamma: PairFn,
    levy: &LevyMeasure,
) -> (VecFn, PairFn, PairFn) {
    let terms = levy.nu_terms(large_jump_region());
    let gamma_b = gamma.clone();
    let b: VecFn = Arc::new(move |y: &[f64]| {
        let mut out = beta(y);
        for (w, z) in &terms {
            for (acc, v) in out.iter_mut().zip(gamma_b(y, z)) {
                *acc -= w * v;
            }
        }
        out
    });
    let gamma_f = gamma.clone();
    let f: PairFn = Arc::new(move |y: &[f64], z: &[f64]| {
        let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1.0 {
            gamma_f(y, z)
        } else {
            vec![0.0; gamma_f(y, z).len()]
        }
    });
    let gamma_g = gamma;
    let g: PairFn = Arc::new(move |y: &[f64], z: &[f64]| {
        let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n >= 1.0 {
            gamma_g(y, z)
        } else {
            vec![0.0; gamma_g(y, z).len()]
        }
    });
    (b, f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, stream};
    use rand::Rng;

    #[test]
    fn affine_net_is_exact() {
        let mut rng = stream(31, domain::PROBE, 0);
        for _ in 0..50 {
            let (rows, cols) = (rng.gen_range(1..4), rng.gen_range(1..4));
            let a = Array2::from_shape_fn((rows, cols), |_| {
                if rng.gen_bool(0.7) {
                    rng.gen_range(-2.0..2.0)
                } else {
                    0.0
                }
            });
            let b = Array1::from_shape_fn(rows, |_| rng.gen_range(-1.0..1.0));
            let net = affine_to_net(&a, &b).unwrap();
            assert_eq!(net.affine_maps(), 2);
            for _ in 0..20 {
                let x: Vec<f64> = (0..cols).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let want = mat_vec(&a, &x)
                    .iter()
                    .zip(b.iter())
                    .map(|(v, bb)| v + bb)
                    .collect::<Vec<_>>();
                let got = net.eval(&x).unwrap();
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()));
                }
            }
        }
    }

    #[test]
    fn compensated_form_trivial_when_g_vanishes() {
        let levy = LevyMeasure::FiniteActivity(FiniteActivity {
            d: 1,
            components: vec![FaComponent {
                rate: 1.5,
                law: MarkLaw::Point(vec![2.0]),
            }],
        });
        let b: VecFn = Arc::new(|y: &[f64]| vec![y[0] + 1.0]);
        let f: PairFn = Arc::new(|y: &[f64], z: &[f64]| vec![y[0] * z[0]]);
        let g: PairFn = Arc::new(|_: &[f64], _: &[f64]| vec![0.0]);
        let (beta, gamma) = to_compensated_form(1, b, f, g, &levy).unwrap();
        assert_eq!(beta(&[2.0]), vec![3.0]);
        // ||z|| >= 1 makes gamma vanish there, f applies below
        assert_eq!(gamma(&[2.0], &[0.5]), vec![1.0]);
        assert_eq!(gamma(&[2.0], &[2.0]), vec![0.0]);
    }

    #[test]
    fn compensated_form_one_atom_oracle() {
        // mass lambda at z0 with ||z0|| >= 1 and g(y, z) = y: beta = b + lambda y
        let lambda = 0.7;
        let levy = LevyMeasure::FiniteActivity(FiniteActivity {
            d: 1,
            components: vec![FaComponent {
                rate: lambda,
                law: MarkLaw::Point(vec![1.0]),
            }],
        });
        let b: VecFn = Arc::new(|y: &[f64]| vec![2.0 * y[0]]);
        let f: PairFn = Arc::new(|_: &[f64], _: &[f64]| vec![0.0]);
        let g: PairFn = Arc::new(|y: &[f64], _: &[f64]| vec![y[0]]);
        let (beta, _) = to_compensated_form(1, b, f, g, &levy).unwrap();
        let y = 3.0;
        let want = 2.0 * y + lambda * y;
        assert!((beta(&[y])[0] - want).abs() < 1e-12);
    }

    #[test]
    fn non_integrable_large_jumps_rejected() {
        let levy = LevyMeasure::FiniteActivity(FiniteActivity {
            d: 1,
            components: vec![FaComponent {
                rate: 1.0,
                law: MarkLaw::Point(vec![2.0]),
            }],
        });
        let b: VecFn = Arc::new(|_: &[f64]| vec![0.0]);
        let f: PairFn = Arc::new(|_: &[f64], _: &[f64]| vec![0.0]);
        let g: PairFn = Arc::new(|_: &[f64], _: &[f64]| vec![f64::INFINITY]);
        assert!(matches!(
            to_compensated_form(1, b, f, g, &levy),
            Err(PidenetError::ModelConstruction(_))
        ));
    }

    #[test]
    fn compensated_form_round_trip() {
        let levy = LevyMeasure::FiniteActivity(FiniteActivity {
            d: 2,
            components: vec![
                FaComponent {
                    rate: 0.5,
                    law: MarkLaw::Point(vec![1.5, 0.0]),
                },
                FaComponent {
                    rate: 1.0,
                    law: MarkLaw::Point(vec![0.2, 0.1]),
                },
            ],
        });
        let b: VecFn = Arc::new(|y: &[f64]| vec![y[0] - y[1], 0.5 * y[1]]);
        let f: PairFn = Arc::new(|y: &[f64], z: &[f64]| vec![y[0] * z[0], z[1]]);
        let g: PairFn = Arc::new(|y: &[f64], z: &[f64]| vec![z[0] + y[1], y[0] * z[1]]);
        let (beta, gamma) = to_compensated_form(2, b.clone(), f.clone(), g.clone(), &levy).unwrap();
        let (b2, f2, g2) = from_compensated_form(2, beta, gamma, &levy);
        let mut rng = stream(32, domain::PROBE, 0);
        for _ in 0..100 {
            let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let z: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            for (got, want) in b2(&y).iter().zip(b(&y)) {
                assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()));
            }
            if z.iter().map(|v| v * v).sum::<f64>().sqrt() < 1.0 {
                assert_eq!(f2(&y, &z), f(&y, &z));
            } else {
                assert_eq!(g2(&y, &z), g(&y, &z));
            }
        }
    }
}
