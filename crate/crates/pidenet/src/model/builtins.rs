//! Shipped model families with exact ReLU coefficient networks.
//!
//! Every family has affine coefficients, so the networks represent them
//! exactly and the budget constants can use `q = q_hat = 0`.

use super::levy::{FaComponent, FiniteActivity, LevyMeasure, MarkLaw, NuRegion, StableLike};
use super::{
    affine_to_net, CoefficientNets, DeclaredConstants, JumpCoefficient, JumpDiffusionSpec,
    JumpNets, MatFn, VecFn,
};
use crate::error::{PidenetError, Result};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Family parameters; unset fields take family defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Constant drift (pure_drift) or linear pull rate (stable_like,
    /// finite_activity).
    pub drift: Option<f64>,
    /// Diffusion scale.
    pub vol: Option<f64>,
    /// Jump intensity of the merton family.
    pub jump_rate: Option<f64>,
    /// Log-space jump mean of the merton family.
    pub jump_mean: Option<f64>,
    /// Log-space jump volatility of the merton family.
    pub jump_vol: Option<f64>,
    /// Small-jump decay exponent of the stable_like family.
    pub rho: Option<f64>,
    /// Radial intensity scale of the stable_like family.
    pub intensity: Option<f64>,
    /// Exponential taper of the stable_like family.
    pub taper: Option<f64>,
    /// Scale of the additive jump coefficient `gamma(x, z) = jump_scale * z`.
    pub jump_scale: Option<f64>,
    /// Atoms of the finite_activity family: (rate, mark).
    pub atoms: Option<Vec<(f64, Vec<f64>)>>,
}

/// On-disk model description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub family: String,
    pub d: usize,
    #[serde(default)]
    pub params: ModelParams,
    /// Overrides the constants computed for the family.
    #[serde(default)]
    pub declared_constants: Option<DeclaredConstants>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PidenetError::Serialization(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serialization")
    }
}

pub fn load_model_file(path: &std::path::Path) -> Result<(JumpDiffusionSpec, CoefficientNets)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PidenetError::Serialization(format!("cannot read {}: {e}", path.display())))?;
    let file = ModelFile::from_json(&text)?;
    model_from_file(&file)
}

pub fn model_from_file(file: &ModelFile) -> Result<(JumpDiffusionSpec, CoefficientNets)> {
    let (mut spec, nets) = if file.family == "finite_activity" {
        let atoms = file
            .params
            .atoms
            .clone()
            .ok_or_else(|| PidenetError::invalid("finite_activity model needs params.atoms"))?;
        finite_activity_general(file.d, &atoms, &file.params)?
    } else {
        builtin_model(&file.family, file.d, &file.params)?
    };
    if let Some(c) = &file.declared_constants {
        spec.constants = c.clone();
    }
    Ok((spec, nets))
}

fn zero_vec_fn(d: usize) -> VecFn {
    Arc::new(move |_: &[f64]| vec![0.0; d])
}

fn const_vec_fn(v: Vec<f64>) -> VecFn {
    Arc::new(move |_: &[f64]| v.clone())
}

fn zero_mat_fn(d: usize) -> MatFn {
    Arc::new(move |_: &[f64]| Array2::zeros((d, d)))
}

fn identity_vec_fn() -> VecFn {
    Arc::new(|z: &[f64]| z.to_vec())
}

/// Column networks for `sigma(x) = scale * diag(x)`.
fn diag_scale_columns(d: usize, scale: f64) -> Result<Vec<ReluNetworkVec>> {
    (0..d)
        .map(|j| {
            let mut a = Array2::zeros((d, d));
            a[(j, j)] = scale;
            affine_to_net(&a, &Array1::zeros(d))
        })
        .collect()
}

type ReluNetworkVec = crate::relu_net::ReluNetwork;

/// Column networks for a constant matrix `m`.
fn const_matrix_columns(m: &Array2<f64>) -> Result<Vec<ReluNetworkVec>> {
    let d = m.nrows();
    (0..d)
        .map(|j| {
            let col = Array1::from_iter(m.column(j).iter().copied());
            affine_to_net(&Array2::zeros((d, d)), &col)
        })
        .collect()
}

/// Budget constant covering the realized sizes, the growth constants and the
/// step-net depth, with headroom.
fn budget_c(d: usize, l: f64, sizes: &[usize], p: f64) -> f64 {
    let dp = (d as f64).powf(p);
    let mut need: f64 = 4.0;
    need = need.max(3.0 * l.max(1.0));
    for &s in sizes {
        need = need.max(s as f64 / dp);
    }
    1.5 * need
}

/// Constructs one of the shipped models together with exact coefficient
/// networks. Families: `pure_drift`, `heat`, `black_scholes`, `merton`,
/// `stable_like`.
pub fn builtin_model(
    name: &str,
    d: usize,
    params: &ModelParams,
) -> Result<(JumpDiffusionSpec, CoefficientNets)> {
    if d == 0 {
        return Err(PidenetError::invalid("dimension must be positive"));
    }
    match name {
        "pure_drift" => {
            let drift = params.drift.unwrap_or(1.0);
            let b = vec![drift; d];
            let beta: VecFn = const_vec_fn(b.clone());
            let beta_net = affine_to_net(&Array2::zeros((d, d)), &Array1::from(b))?;
            let sigma_nets = const_matrix_columns(&Array2::zeros((d, d)))?;
            let f_nets: Vec<_> = (0..d)
                .map(|_| affine_to_net(&Array2::zeros((d, d)), &Array1::zeros(d)))
                .collect::<Result<_>>()?;
            let l = (drift * drift).max(1e-9);
            let constants = DeclaredConstants {
                lipschitz_l: l,
                c: budget_c(d, l, &[beta_net.size()], 2.0),
                ..DeclaredConstants::default()
            };
            let spec = JumpDiffusionSpec {
                d,
                beta,
                sigma: zero_mat_fn(d),
                jump: JumpCoefficient::Multiplicative {
                    f: zero_mat_fn(d),
                    g: identity_vec_fn(),
                },
                levy: LevyMeasure::none(d),
                constants: constants.clone(),
            };
            let nets = CoefficientNets::new(
                d,
                beta_net,
                sigma_nets,
                JumpNets::Columns(f_nets),
                1.0,
                &constants,
            )?;
            Ok((spec, nets))
        }
        "heat" => {
            let vol = params.vol.unwrap_or(1.0);
            let m = Array2::eye(d) * vol;
            let sigma_nets = const_matrix_columns(&m)?;
            let beta_net = affine_to_net(&Array2::zeros((d, d)), &Array1::zeros(d))?;
            let f_nets: Vec<_> = (0..d)
                .map(|_| affine_to_net(&Array2::zeros((d, d)), &Array1::zeros(d)))
                .collect::<Result<_>>()?;
            let l = (vol * vol).max(1e-9);
            let sizes: Vec<usize> = sigma_nets.iter().map(|n| n.size()).collect();
            let constants = DeclaredConstants {
                lipschitz_l: l,
                c: budget_c(d, l, &sizes, 2.0),
                ..DeclaredConstants::default()
            };
            let mc = m.clone();
            let spec = JumpDiffusionSpec {
                d,
                beta: zero_vec_fn(d),
                sigma: Arc::new(move |_: &[f64]| mc.clone()),
                jump: JumpCoefficient::Multiplicative {
                    f: zero_mat_fn(d),
                    g: identity_vec_fn(),
                },
                levy: LevyMeasure::none(d),
                constants: constants.clone(),
            };
            let nets = CoefficientNets::new(
                d,
                beta_net,
                sigma_nets,
                JumpNets::Columns(f_nets),
                1.0,
                &constants,
            )?;
            Ok((spec, nets))
        }
        "black_scholes" => {
            let vol = params.vol.unwrap_or(0.2);
            let sigma_nets = diag_scale_columns(d, vol)?;
            let beta_net = affine_to_net(&Array2::zeros((d, d)), &Array1::zeros(d))?;
            let f_nets: Vec<_> = (0..d)
                .map(|_| affine_to_net(&Array2::zeros((d, d)), &Array1::zeros(d)))
                .collect::<Result<_>>()?;
            let l = (vol * vol).max(1e-9);
            let mut sizes: Vec<usize> = sigma_nets.iter().map(|n| n.size()).collect();
            sizes.push(sizes.iter().sum());
            let constants = DeclaredConstants {
                lipschitz_l: l,
                c: budget_c(d, l, &sizes, 2.0),
                ..DeclaredConstants::default()
            };
            let spec = JumpDiffusionSpec {
                d,
                beta: zero_vec_fn(d),
                sigma: Arc::new(move |x: &[f64]| {
                    let mut m = Array2::zeros((x.len(), x.len()));
                    for (j, &v) in x.iter().enumerate() {
                        m[(j, j)] = vol * v;
                    }
                    m
                }),
                jump: JumpCoefficient::Multiplicative {
                    f: zero_mat_fn(d),
                    g: identity_vec_fn(),
                },
                levy: LevyMeasure::none(d),
                constants: constants.clone(),
            };
            let nets = CoefficientNets::new(
                d,
                beta_net,
                sigma_nets,
                JumpNets::Columns(f_nets),
                1.0,
                &constants,
            )?;
            Ok((spec, nets))
        }
        "merton" => {
            let vol = params.vol.unwrap_or(0.2);
            let rate = params.jump_rate.unwrap_or(0.3);
            let mu = params.jump_mean.unwrap_or(-0.05);
            let sj = params.jump_vol.unwrap_or(0.25);
            let dir: Vec<f64> = vec![1.0 / (d as f64).sqrt(); d];
            let levy = LevyMeasure::FiniteActivity(FiniteActivity {
                d,
                components: vec![FaComponent {
                    rate,
                    law: MarkLaw::RadialLogNormal {
                        direction: dir,
                        mu,
                        sigma: sj,
                    },
                }],
            });
            let sigma_nets = diag_scale_columns(d, vol)?;
            let f_nets = diag_scale_columns(d, 1.0)?;
            let beta_net = affine_to_net(&Array2::zeros((d, d)), &Array1::zeros(d))?;
            // gamma Lipschitz constant: lambda E[(e^J - 1)^2] / d
            let m2 = (2.0 * mu + 2.0 * sj * sj).exp() - 2.0 * (mu + sj * sj / 2.0).exp() + 1.0;
            let l = vol * vol + rate * m2 / d as f64;
            let mut sizes: Vec<usize> = sigma_nets.iter().map(|n| n.size()).collect();
            sizes.extend(f_nets.iter().map(|n| n.size()));
            sizes.push(sigma_nets.iter().map(|n| n.size()).sum());
            let constants = DeclaredConstants {
                lipschitz_l: l,
                l_tilde: (rate * m2).max(rate) * 1.05,
                c: budget_c(d, l, &sizes, 2.0),
                ..DeclaredConstants::default()
            };
            let spec = JumpDiffusionSpec {
                d,
                beta: zero_vec_fn(d),
                sigma: Arc::new(move |x: &[f64]| {
                    let mut m = Array2::zeros((x.len(), x.len()));
                    for (j, &v) in x.iter().enumerate() {
                        m[(j, j)] = vol * v;
                    }
                    m
                }),
                jump: JumpCoefficient::Multiplicative {
                    f: Arc::new(|y: &[f64]| {
                        let mut m = Array2::zeros((y.len(), y.len()));
                        for (j, &v) in y.iter().enumerate() {
                            m[(j, j)] = v;
                        }
                        m
                    }),
                    g: identity_vec_fn(),
                },
                levy,
                constants: constants.clone(),
            };
            let nets = CoefficientNets::new(
                d,
                beta_net,
                sigma_nets,
                JumpNets::Columns(f_nets),
                1.0,
                &constants,
            )?;
            Ok((spec, nets))
        }
        "stable_like" => {
            let rho = params.rho.unwrap_or(0.5);
            if !(0.0 < rho && rho < 2.0) {
                return Err(PidenetError::invalid("stable_like rho must lie in (0,2)"));
            }
            let intensity = params.intensity.unwrap_or(0.25);
            let taper = params.taper.unwrap_or(1.0);
            let pull = params.drift.unwrap_or(0.1);
            let vol = params.vol.unwrap_or(0.1);
            let scale = params.jump_scale.unwrap_or(1.0);
            let levy = LevyMeasure::StableLike(StableLike {
                d,
                rho,
                intensity,
                taper,
            });
            general_additive_model(d, levy, pull, vol, scale, rho, params)
        }
        other => Err(PidenetError::invalid(format!(
            "unknown model family {other:?} (expected one of pure_drift, heat, \
             black_scholes, merton, stable_like)"
        ))),
    }
}

/// Finite-activity model in the general jump form: `gamma(x, z) = s z`
/// against a point-mass mixture. Exercises the compound-Poisson Monte Carlo
/// pipeline with exactly computable compensators.
pub fn finite_activity_general(
    d: usize,
    atoms: &[(f64, Vec<f64>)],
    params: &ModelParams,
) -> Result<(JumpDiffusionSpec, CoefficientNets)> {
    for (rate, z) in atoms {
        if *rate < 0.0 || z.len() != d {
            return Err(PidenetError::invalid(
                "finite_activity atoms must have nonnegative rate and dimension d",
            ));
        }
    }
    let levy = LevyMeasure::FiniteActivity(FiniteActivity {
        d,
        components: atoms
            .iter()
            .map(|(rate, z)| FaComponent {
                rate: *rate,
                law: MarkLaw::Point(z.clone()),
            })
            .collect(),
    });
    let pull = params.drift.unwrap_or(0.1);
    let vol = params.vol.unwrap_or(0.1);
    let scale = params.jump_scale.unwrap_or(1.0);
    // decay exponent 2 is free for point masses bounded away from the origin
    general_additive_model(d, levy, pull, vol, scale, 2.0, params)
}

/// Shared construction: `beta(x) = -pull x`, `sigma = vol I`,
/// `gamma(x, z) = scale z` in the general form.
fn general_additive_model(
    d: usize,
    levy: LevyMeasure,
    pull: f64,
    vol: f64,
    scale: f64,
    p_bar: f64,
    _params: &ModelParams,
) -> Result<(JumpDiffusionSpec, CoefficientNets)> {
    let beta_mat = Array2::eye(d) * -pull;
    let beta_net = affine_to_net(&beta_mat, &Array1::zeros(d))?;
    let sigma_mat = Array2::eye(d) * vol;
    let sigma_nets = const_matrix_columns(&sigma_mat)?;
    // gamma as a 2d-input network reading only the mark block
    let mut gmat = Array2::zeros((d, 2 * d));
    for j in 0..d {
        gmat[(j, d + j)] = scale;
    }
    let gamma_net = affine_to_net(&gmat, &Array1::zeros(d))?;

    // second moment of the jump part and the small-jump decay scale
    let i2 = levy.integrate_scalar(NuRegion::Full, &|z| z.iter().map(|v| v * v).sum());
    let l_tilde = match &levy {
        LevyMeasure::StableLike(s) => {
            let from_decay = scale * scale * s.intensity / s.rho;
            1.05 * from_decay.max(levy.levy_integral())
        }
        LevyMeasure::FiniteActivity(fa) => {
            let mut worst: f64 = 0.0;
            for c in &fa.components {
                if let MarkLaw::Point(z) = &c.law {
                    let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if n > 0.0 && n <= 1.0 {
                        let below: f64 = fa
                            .components
                            .iter()
                            .filter_map(|cc| match &cc.law {
                                MarkLaw::Point(zz) => {
                                    let nn = zz.iter().map(|v| v * v).sum::<f64>().sqrt();
                                    (nn <= n).then_some(cc.rate * nn * nn)
                                }
                                _ => None,
                            })
                            .sum();
                        worst = worst.max(scale * scale * below / n.powf(p_bar));
                    }
                }
            }
            1.05 * worst.max(levy.levy_integral()).max(1e-9)
        }
    };
    let l = pull * pull + vol * vol + scale * scale * i2 / d as f64;
    let mut sizes: Vec<usize> = sigma_nets.iter().map(|n| n.size()).collect();
    sizes.push(beta_net.size());
    sizes.push(gamma_net.size());
    sizes.push(beta_net.size() + sigma_nets.iter().map(|n| n.size()).sum::<usize>());
    let constants = DeclaredConstants {
        lipschitz_l: l.max(1e-9),
        l_tilde,
        p_bar,
        q_bar: 0.0,
        c: budget_c(d, l, &sizes, 2.0),
        p: 2.0,
        q: 0.0,
        q_hat: 0.0,
    };
    let sm = sigma_mat.clone();
    let spec = JumpDiffusionSpec {
        d,
        beta: Arc::new(move |x: &[f64]| x.iter().map(|v| -pull * v).collect()),
        sigma: Arc::new(move |_: &[f64]| sm.clone()),
        jump: JumpCoefficient::General {
            gamma: Arc::new(move |_: &[f64], z: &[f64]| z.iter().map(|v| scale * v).collect()),
            mark_linear: Some(Array2::eye(d) * scale),
        },
        levy,
        constants: constants.clone(),
    };
    let nets = CoefficientNets::new(
        d,
        beta_net,
        sigma_nets,
        JumpNets::General(gamma_net),
        1.0,
        &constants,
    )?;
    Ok((spec, nets))
}
