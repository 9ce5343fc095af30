//! Depolarising and dephasing maps on the GPT vector space.
//!
//! Both maps act on states as `s ↦ D s` and on effects by the transpose.
//! Noise at strength `r` replaces `⟨e, s⟩` by `(1 − r)⟨e, s⟩ + r⟨e, D s⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpt::{GptVector, Role};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Depolarising,
    Dephasing,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::Depolarising => write!(f, "depolarising"),
            NoiseKind::Dephasing => write!(f, "dephasing"),
        }
    }
}

/// Data the map was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseMeta {
    Depolarising {
        max_mixed: GptVector,
        unit: GptVector,
    },
    Dephasing {
        effects: Vec<GptVector>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMap {
    matrix: DMatrix<f64>,
    kind: NoiseKind,
    meta: NoiseMeta,
}

impl NoiseMap {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn meta(&self) -> &NoiseMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Image of a state, `D s`.
    pub fn apply(&self, state: &GptVector) -> Result<GptVector> {
        self.check_dim(state)?;
        Ok(GptVector::from_dvector(
            &self.matrix * state.coords(),
            state.role(),
        ))
    }

    /// Image of an effect under the dual action, `Dᵀ e`.
    pub fn apply_to_effect(&self, effect: &GptVector) -> Result<GptVector> {
        self.check_dim(effect)?;
        Ok(GptVector::from_dvector(
            self.matrix.tr_mul(effect.coords()),
            effect.role(),
        ))
    }

    /// `(1 − r) s + r D s`.
    pub fn noisy_state(&self, state: &GptVector, r: f64) -> Result<GptVector> {
        self.check_dim(state)?;
        let mixed = state.coords() * (1.0 - r) + (&self.matrix * state.coords()) * r;
        Ok(GptVector::from_dvector(mixed, state.role()))
    }

    /// `(1 − r)⟨e, s⟩ + r⟨e, D s⟩`.
    pub fn noisy_probability(&self, state: &DVector<f64>, effect: &DVector<f64>, r: f64) -> f64 {
        (1.0 - r) * effect.dot(state) + r * effect.dot(&(&self.matrix * state))
    }

    fn check_dim(&self, v: &GptVector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        Ok(())
    }
}

/// Discard-and-reprepare map `D = μ uᵀ`.
pub fn depolarising_map(max_mixed: &GptVector, unit: &GptVector) -> Result<NoiseMap> {
    if max_mixed.dim() != unit.dim() {
        return Err(Error::DimensionMismatch {
            expected: unit.dim(),
            got: max_mixed.dim(),
        });
    }
    let norm = max_mixed.dot(unit)?;
    if (norm - 1.0).abs() > tol::PROBABILITY {
        return Err(Error::InvalidNoiseDefinition(format!(
            "⟨μ, u⟩ = {norm}, expected 1"
        )));
    }
    Ok(NoiseMap {
        matrix: max_mixed.coords() * unit.coords().transpose(),
        kind: NoiseKind::Depolarising,
        meta: NoiseMeta::Depolarising {
            max_mixed: max_mixed.clone(),
            unit: unit.clone(),
        },
    })
}

/// Which self-duality condition a dephasing effect set violates.
#[derive(Debug, Clone, PartialEq)]
pub enum SelfDualityFailure {
    Empty,
    DimensionMismatch { index: usize },
    NotOrthogonal { i: usize, j: usize, overlap: f64 },
    Incomplete { deviation: f64 },
    NotNormalized { index: usize, value: f64 },
}

impl fmt::Display for SelfDualityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelfDualityFailure::Empty => write!(f, "empty effect set"),
            SelfDualityFailure::DimensionMismatch { index } => {
                write!(f, "effect {index} has the wrong dimension")
            }
            SelfDualityFailure::NotOrthogonal { i, j, overlap } => {
                write!(
                    f,
                    "effects {i} and {j} are not orthogonal (overlap {overlap:e})"
                )
            }
            SelfDualityFailure::Incomplete { deviation } => {
                write!(
                    f,
                    "effects do not sum to the unit effect (max deviation {deviation:e})"
                )
            }
            SelfDualityFailure::NotNormalized { index, value } => {
                write!(f, "⟨ē_{index}, e_{index}⟩ = {value}, expected 1")
            }
        }
    }
}

fn describe(failures: &[SelfDualityFailure]) -> String {
    failures
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks that the effects are pairwise orthogonal, sum to `u`, and that
/// each transposed effect `ē_i = e_iᵀ` is a normalized counterpart state.
/// All violated conditions are reported.
pub fn selfduality_check(
    effects: &[GptVector],
    unit: &GptVector,
) -> std::result::Result<(), Vec<SelfDualityFailure>> {
    if effects.is_empty() {
        return Err(vec![SelfDualityFailure::Empty]);
    }
    let bad_dims: Vec<_> = effects
        .iter()
        .enumerate()
        .filter(|(_, e)| e.dim() != unit.dim())
        .map(|(index, _)| SelfDualityFailure::DimensionMismatch { index })
        .collect();
    if !bad_dims.is_empty() {
        return Err(bad_dims);
    }
    let mut failures = Vec::new();
    for i in 0..effects.len() {
        for j in (i + 1)..effects.len() {
            let overlap = effects[i].coords().dot(effects[j].coords());
            if overlap.abs() >= tol::SELF_DUAL {
                failures.push(SelfDualityFailure::NotOrthogonal { i, j, overlap });
            }
        }
    }
    let sum = effects
        .iter()
        .fold(DVector::zeros(unit.dim()), |acc, e| acc + e.coords());
    let deviation = (sum - unit.coords()).amax();
    if deviation >= tol::SELF_DUAL {
        failures.push(SelfDualityFailure::Incomplete { deviation });
    }
    for (index, e) in effects.iter().enumerate() {
        let value = e.coords().norm_squared();
        if (value - 1.0).abs() >= tol::SELF_DUAL {
            failures.push(SelfDualityFailure::NotNormalized { index, value });
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures)
    }
}

/// Measure-and-reprepare map `D = Σ_i ē_i e_iᵀ` with `ē_i = e_iᵀ`.
pub fn dephasing_map(effects: &[GptVector], unit: &GptVector) -> Result<NoiseMap> {
    selfduality_check(effects, unit).map_err(|f| Error::NotSelfDualCompatible(describe(&f)))?;
    let dim = unit.dim();
    let mut matrix = DMatrix::zeros(dim, dim);
    for e in effects {
        let counterpart = e.with_role(Role::State);
        matrix += counterpart.coords() * e.coords().transpose();
    }
    Ok(NoiseMap {
        matrix,
        kind: NoiseKind::Dephasing,
        meta: NoiseMeta::Dephasing {
            effects: effects.to_vec(),
        },
    })
}

/// The two qubit effect vectors `(1/√2)(1, ±n)` for the Bloch direction
/// `n = (sin θ cos φ, sin θ sin φ, cos θ)`.
pub fn axis_effects(theta_r: f64, phi_r: f64) -> [GptVector; 2] {
    let n = [
        theta_r.sin() * phi_r.cos(),
        theta_r.sin() * phi_r.sin(),
        theta_r.cos(),
    ];
    bloch_pair(n)
}

fn bloch_pair(n: [f64; 3]) -> [GptVector; 2] {
    let make = |sign: f64| {
        GptVector::from_dvector(
            DVector::from_row_slice(&[1.0, sign * n[0], sign * n[1], sign * n[2]]) * FRAC_1_SQRT_2,
            Role::Effect,
        )
    };
    [make(1.0), make(-1.0)]
}

/// A qubit dephasing axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
    Custom { theta_r: f64, phi_r: f64 },
}

impl Axis {
    pub const PAULI: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Polar and azimuthal angles of the Bloch direction.
    pub fn angles(self) -> (f64, f64) {
        match self {
            Axis::X => (FRAC_PI_2, 0.0),
            Axis::Y => (FRAC_PI_2, FRAC_PI_2),
            Axis::Z => (0.0, 0.0),
            Axis::Custom { theta_r, phi_r } => (theta_r, phi_r),
        }
    }

    /// Projector pair along the axis. Named axes use exact unit vectors.
    pub fn effects(self) -> [GptVector; 2] {
        match self {
            Axis::X => bloch_pair([1.0, 0.0, 0.0]),
            Axis::Y => bloch_pair([0.0, 1.0, 0.0]),
            Axis::Z => bloch_pair([0.0, 0.0, 1.0]),
            Axis::Custom { theta_r, phi_r } => axis_effects(theta_r, phi_r),
        }
    }

    /// Qubit dephasing map for this axis.
    pub fn dephasing_map(self) -> Result<NoiseMap> {
        dephasing_map(&self.effects(), &crate::gpt::unit_effect(2))
    }

    /// Tie-break rank: X, Y, Z, then custom axes.
    pub fn rank(self) -> u8 {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
            Axis::Custom { .. } => 3,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "X"),
            Axis::Y => write!(f, "Y"),
            Axis::Z => write!(f, "Z"),
            Axis::Custom { theta_r, phi_r } => write!(f, "custom:{theta_r},{phi_r}"),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X" | "x" => Ok(Axis::X),
            "Y" | "y" => Ok(Axis::Y),
            "Z" | "z" => Ok(Axis::Z),
            other => {
                let body = other.strip_prefix("custom:").ok_or_else(|| {
                    Error::Parse(format!(
                        "unknown axis {other:?}; use X, Y, Z or custom:theta,phi"
                    ))
                })?;
                let (t, p) = body.split_once(',').ok_or_else(|| {
                    Error::Parse(format!("custom axis needs two angles: {other:?}"))
                })?;
                let parse = |x: &str| {
                    x.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Parse(format!("bad angle {x:?}")))
                };
                Ok(Axis::Custom {
                    theta_r: parse(t)?,
                    phi_r: parse(p)?,
                })
            }
        }
    }
}
