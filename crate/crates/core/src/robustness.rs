//! Robustness of contextuality as one linear program, and the
//! noncontextual ontological model read off its solution.
//!
//! For a noise map `D` the program is
//!
//! ```text
//! minimize r  over r ∈ [0, 1], σ ≥ 0 (entrywise, m × n)
//! subject to  r I_Eᵀ D I_Ω + (1 − r) I_Eᵀ I_Ω = H_Eᵀ σ H_Ω
//! ```
//!
//! The constraint is affine in `(r, σ)` jointly, so a single simplex solve
//! yields the minimum.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AccessibleFragment;
use crate::gpt::GptFragment;
use crate::noise::{Axis, NoiseKind, NoiseMap};
use crate::simplex::{self, LpOutcome, StandardLp};
use crate::tol;

/// Noncontextual model: ontic states `λ = (i, j)` index the populated
/// entries of `σ` (effect facet `i`, state facet `j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologicalModel {
    pub ontic_states: Vec<(usize, usize)>,
    /// `μ_P(λ)`, one row per fragment state.
    pub epistemic: Vec<Vec<f64>>,
    /// `ξ_{k|M}(λ)`, one row per fragment effect.
    pub responses: Vec<Vec<f64>>,
}

impl OntologicalModel {
    pub fn ontic_count(&self) -> usize {
        self.ontic_states.len()
    }

    /// `Σ_λ ξ_e(λ) μ_s(λ)`.
    pub fn probability(&self, state: usize, effect: usize) -> f64 {
        self.epistemic[state]
            .iter()
            .zip(&self.responses[effect])
            .map(|(m, x)| m * x)
            .sum()
    }
}

/// Worst-case deviations of a model from the ontological-model axioms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelAudit {
    /// Max |Σ_λ ξ μ − noisy probability| over all state-effect pairs.
    pub reproduction: f64,
    /// Max |Σ_λ μ_P(λ) − 1| over states.
    pub normalization: f64,
    /// Most negative epistemic weight (0 when none is negative).
    pub epistemic_min: f64,
    pub response_min: f64,
    pub response_max: f64,
    /// Max |ξ_e(λ) + ξ_{u−e}(λ) − 1| over complement pairs.
    pub complement: f64,
}

impl Default for ModelAudit {
    fn default() -> Self {
        Self {
            reproduction: 0.0,
            normalization: 0.0,
            epistemic_min: 0.0,
            response_min: 0.0,
            response_max: 1.0,
            complement: 0.0,
        }
    }
}

impl ModelAudit {
    /// Componentwise worst of two audits.
    pub fn worst(self, other: ModelAudit) -> ModelAudit {
        ModelAudit {
            reproduction: self.reproduction.max(other.reproduction),
            normalization: self.normalization.max(other.normalization),
            epistemic_min: self.epistemic_min.min(other.epistemic_min),
            response_min: self.response_min.min(other.response_min),
            response_max: self.response_max.max(other.response_max),
            complement: self.complement.max(other.complement),
        }
    }

    /// Reproduction, normalization and complement sums within 1e-8;
    /// responses within [−1e-9, 1 + 1e-9]; epistemic weights above −1e-8.
    pub fn is_sound(&self) -> bool {
        self.reproduction < 1e-8
            && self.normalization < 1e-8
            && self.complement < 1e-8
            && self.epistemic_min > -1e-8
            && self.response_min >= -1e-9
            && self.response_max <= 1.0 + 1e-9
    }
}

#[derive(Debug, Clone)]
pub struct RobustnessCertificate {
    pub r_min: f64,
    /// `m × n`: effect facets by state facets.
    pub sigma: DMatrix<f64>,
    pub model: OntologicalModel,
    pub noise_kind: NoiseKind,
    /// Max-abs entry of the program's equality residual at `(r_min, σ)`.
    pub residual_max: f64,
}

/// JSON form of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub r_min: f64,
    pub sigma: Vec<Vec<f64>>,
    pub ontic_count: usize,
    pub model: ModelFile,
    pub residual_max: f64,
    pub noise: NoiseKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub ontic_states: Vec<(usize, usize)>,
    pub epistemic: Vec<Vec<f64>>,
    pub responses: Vec<Vec<f64>>,
}

impl RobustnessCertificate {
    pub fn to_file(&self) -> CertificateFile {
        CertificateFile {
            r_min: self.r_min,
            sigma: self
                .sigma
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            ontic_count: self.model.ontic_count(),
            model: ModelFile {
                ontic_states: self.model.ontic_states.clone(),
                epistemic: self.model.epistemic.clone(),
                responses: self.model.responses.clone(),
            },
            residual_max: self.residual_max,
            noise: self.noise_kind,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    /// Checks the extracted model against the fragment it came from.
    pub fn audit(&self, frag: &GptFragment, noise: &NoiseMap) -> ModelAudit {
        audit_model(&self.model, frag, noise, self.r_min)
    }
}

/// Left-hand side of the program at strength `r`, in span coordinates.
fn noisy_pairing(acc: &AccessibleFragment, noise: &NoiseMap, r: f64) -> DMatrix<f64> {
    let plain = acc.pairing();
    let noisy = acc
        .effect_inclusion
        .tr_mul(&(noise.matrix() * &acc.state_inclusion));
    plain * (1.0 - r) + noisy * r
}

fn check_noise_dim(acc: &AccessibleFragment, noise: &NoiseMap) -> Result<()> {
    let dim = acc.state_inclusion.nrows();
    if noise.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: noise.dim(),
        });
    }
    Ok(())
}

/// Columns of `σ ↦ H_Eᵀ σ H_Ω` flattened row-major over `(a, b)`.
fn sigma_block(acc: &AccessibleFragment) -> DMatrix<f64> {
    let he = &acc.effect_facets;
    let hs = &acc.state_facets;
    let (m, ke) = he.shape();
    let (n, ks) = hs.shape();
    let mut block = DMatrix::zeros(ke * ks, m * n);
    for i in 0..m {
        for j in 0..n {
            let col = i * n + j;
            for a in 0..ke {
                let hea = he[(i, a)];
                if hea == 0.0 {
                    continue;
                }
                for b in 0..ks {
                    block[(a * ks + b, col)] = hea * hs[(j, b)];
                }
            }
        }
    }
    block
}

fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(
        m.len(),
        m.row_iter()
            .flat_map(|r| r.iter().copied().collect::<Vec<_>>()),
    )
}

/// Minimal noise strength at which the fragment becomes simplex-embeddable,
/// with its witness `σ` and the extracted ontological model.
pub fn solve_robustness(
    acc: &AccessibleFragment,
    noise: &NoiseMap,
) -> Result<RobustnessCertificate> {
    check_noise_dim(acc, noise)?;
    let plain = acc.pairing();
    let delta = noisy_pairing(acc, noise, 1.0) - &plain;
    let block = sigma_block(acc);
    let rows = block.nrows();
    let sigma_vars = block.ncols();

    // Columns: r, σ (row-major), slack for r ≤ 1.
    let mut a = DMatrix::zeros(rows + 1, sigma_vars + 2);
    let delta_flat = flatten(&delta);
    for row in 0..rows {
        a[(row, 0)] = -delta_flat[row];
    }
    a.view_mut((0, 1), (rows, sigma_vars)).copy_from(&block);
    a[(rows, 0)] = 1.0;
    a[(rows, sigma_vars + 1)] = 1.0;
    let mut b = DVector::zeros(rows + 1);
    b.rows_mut(0, rows).copy_from(&flatten(&plain));
    b[rows] = 1.0;
    let mut c = DVector::zeros(sigma_vars + 2);
    c[0] = 1.0;

    let solution = match StandardLp::new(a, b, c)?.solve()? {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible => return Err(Error::NoFiniteRobustness),
        LpOutcome::Unbounded => {
            return Err(Error::SolverError(
                "robustness program reported unbounded".into(),
            ))
        }
    };
    let r_min = solution.x[0].clamp(0.0, 1.0);
    let (m, n) = (acc.effect_facets.nrows(), acc.state_facets.nrows());
    let sigma = DMatrix::from_row_slice(m, n, solution.x.rows(1, sigma_vars).as_slice());
    let residual_max = equality_residual(acc, noise, r_min, &sigma);
    let model = extract_model(&sigma, acc)?;
    Ok(RobustnessCertificate {
        r_min,
        sigma,
        model,
        noise_kind: noise.kind(),
        residual_max,
    })
}

/// Convenience wrapper that builds the accessible fragment first.
pub fn robustness(frag: &GptFragment, noise: &NoiseMap) -> Result<RobustnessCertificate> {
    solve_robustness(&AccessibleFragment::new(frag)?, noise)
}

/// Whether some `σ ≥ 0` satisfies the program's equality at fixed `r`.
pub fn feasible_at(acc: &AccessibleFragment, noise: &NoiseMap, r: f64) -> Result<bool> {
    check_noise_dim(acc, noise)?;
    let target = flatten(&noisy_pairing(acc, noise, r));
    Ok(simplex::find_feasible(&sigma_block(acc), &target)?.is_some())
}

/// `max |LHS(r) − H_Eᵀ σ H_Ω|`.
pub fn equality_residual(
    acc: &AccessibleFragment,
    noise: &NoiseMap,
    r: f64,
    sigma: &DMatrix<f64>,
) -> f64 {
    let rhs = acc.effect_facets.transpose() * sigma * &acc.state_facets;
    (noisy_pairing(acc, noise, r) - rhs).amax()
}

/// Factorises `σ` into epistemic states and response functions.
///
/// Ontic states are the entries with `σ_ij > 1e-10`. Unnormalized weights
/// `μ_P(i,j) = σ_ij h_j^Ω(s_P)` and `ξ_e(i,j) = h_i^E(e)` are rescaled per
/// ontic state by `c = h_i^E(u)`, which makes every response to `u` equal 1.
pub fn extract_model(sigma: &DMatrix<f64>, acc: &AccessibleFragment) -> Result<OntologicalModel> {
    let (m, n) = sigma.shape();
    if m != acc.effect_facets.nrows() || n != acc.state_facets.nrows() {
        return Err(Error::DimensionMismatch {
            expected: acc.effect_facets.nrows(),
            got: m,
        });
    }
    let unit_response = &acc.effect_facets * &acc.unit_coords;
    let mut ontic_states = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if sigma[(i, j)] > tol::ONTIC_SUPPORT {
                if unit_response[i] <= f64::EPSILON {
                    return Err(Error::DegenerateModel((i, j)));
                }
                ontic_states.push((i, j));
            }
        }
    }
    let epistemic = acc
        .state_coords
        .iter()
        .map(|v| {
            let h = &acc.state_facets * v;
            ontic_states
                .iter()
                .map(|&(i, j)| sigma[(i, j)] * h[j] * unit_response[i])
                .collect()
        })
        .collect();
    let responses = acc
        .effect_coords
        .iter()
        .map(|w| {
            let h = &acc.effect_facets * w;
            ontic_states
                .iter()
                .map(|&(i, _)| h[i] / unit_response[i])
                .collect()
        })
        .collect();
    Ok(OntologicalModel {
        ontic_states,
        epistemic,
        responses,
    })
}

/// Compares a model with the fragment's statistics after noise at `r`.
pub fn audit_model(
    model: &OntologicalModel,
    frag: &GptFragment,
    noise: &NoiseMap,
    r: f64,
) -> ModelAudit {
    let mut audit = ModelAudit {
        response_max: f64::NEG_INFINITY,
        response_min: f64::INFINITY,
        ..Default::default()
    };
    for (si, s) in frag.states.iter().enumerate() {
        let total: f64 = model.epistemic[si].iter().sum();
        audit.normalization = audit.normalization.max((total - 1.0).abs());
        for &w in &model.epistemic[si] {
            audit.epistemic_min = audit.epistemic_min.min(w);
        }
        for (ei, e) in frag.effects.iter().enumerate() {
            let target = noise.noisy_probability(s.coords(), e.coords(), r);
            audit.reproduction = audit
                .reproduction
                .max((model.probability(si, ei) - target).abs());
        }
    }
    for row in &model.responses {
        for &x in row {
            audit.response_min = audit.response_min.min(x);
            audit.response_max = audit.response_max.max(x);
        }
    }
    if model.ontic_states.is_empty() {
        audit.response_min = 0.0;
        audit.response_max = 1.0;
    }
    for (a, b) in frag.complement_pairs() {
        for (xa, xb) in model.responses[a].iter().zip(&model.responses[b]) {
            audit.complement = audit.complement.max((xa + xb - 1.0).abs());
        }
    }
    audit
}

/// One axis of [`min_over_axes`]; `certificate` is `None` when no finite
/// robustness exists for the axis.
#[derive(Debug, Clone)]
pub struct AxisOutcome {
    pub axis: Axis,
    pub certificate: Option<RobustnessCertificate>,
}

impl AxisOutcome {
    pub fn r(&self) -> Option<f64> {
        self.certificate.as_ref().map(|c| c.r_min)
    }
}

#[derive(Debug, Clone)]
pub struct AxisMinimum {
    pub r_min: f64,
    pub argmin: Axis,
    pub table: Vec<AxisOutcome>,
}

impl AxisMinimum {
    pub fn get(&self, axis: Axis) -> Option<&AxisOutcome> {
        self.table.iter().find(|o| o.axis == axis)
    }

    pub fn best(&self) -> &AxisOutcome {
        self.get(self.argmin).expect("argmin axis is in the table")
    }
}

/// Dephasing robustness minimised over qubit axes. Axes without finite
/// robustness are reported but excluded; ties (within 1e-9) go to X, then
/// Y, then Z, then custom axes in input order.
pub fn min_over_axes(acc: &AccessibleFragment, axes: &[Axis]) -> Result<AxisMinimum> {
    let mut table = Vec::with_capacity(axes.len());
    for &axis in axes {
        let noise = axis.dephasing_map()?;
        let certificate = match solve_robustness(acc, &noise) {
            Ok(c) => Some(c),
            Err(Error::NoFiniteRobustness) => None,
            Err(e) => return Err(e),
        };
        table.push(AxisOutcome { axis, certificate });
    }
    let min = table
        .iter()
        .filter_map(AxisOutcome::r)
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::NoFiniteRobustness);
    }
    let argmin = table
        .iter()
        .enumerate()
        .filter(|(_, o)| o.r().is_some_and(|r| r <= min + tol::AXIS_TIE))
        .min_by_key(|(idx, o)| (o.axis.rank(), *idx))
        .map(|(_, o)| o.axis)
        .expect("at least one finite axis");
    Ok(AxisMinimum {
        r_min: min,
        argmin,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpt::{build_fragment, maximally_mixed, qubit_effect, qubit_state, unit_effect};
    use crate::noise::depolarising_map;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn two_to_one() -> GptFragment {
        let s = FRAC_1_SQRT_2;
        let states = [[s, 0.0, s], [s, 0.0, -s], [-s, 0.0, s], [-s, 0.0, -s]]
            .into_iter()
            .map(|b| qubit_state(b).unwrap())
            .collect();
        let effects = vec![
            qubit_effect([1.0, 0.0, 0.0]).unwrap(),
            qubit_effect([0.0, 0.0, 1.0]).unwrap(),
        ];
        build_fragment(
            states,
            effects,
            unit_effect(2),
            maximally_mixed(2),
            None,
            true,
        )
        .unwrap()
    }

    fn classical_bit() -> GptFragment {
        let states = vec![
            qubit_state([0.0, 0.0, 1.0]).unwrap(),
            qubit_state([0.0, 0.0, -1.0]).unwrap(),
        ];
        let effects = vec![qubit_effect([0.0, 0.0, 1.0]).unwrap()];
        build_fragment(
            states,
            effects,
            unit_effect(2),
            maximally_mixed(2),
            None,
            true,
        )
        .unwrap()
    }

    #[test]
    fn two_to_one_depolarising_robustness() {
        let frag = two_to_one();
        let noise = depolarising_map(&frag.max_mixed, &frag.unit).unwrap();
        let cert = robustness(&frag, &noise).unwrap();
        assert!(
            (cert.r_min - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-9,
            "r = {}",
            cert.r_min
        );
        assert!(cert.residual_max < 1e-10);
        assert!(cert.sigma.min() > -1e-9);
        assert!(
            cert.audit(&frag, &noise).is_sound(),
            "{:?}",
            cert.audit(&frag, &noise)
        );
    }

    #[test]
    fn classical_bit_needs_no_noise() {
        let frag = classical_bit();
        let noise = depolarising_map(&frag.max_mixed, &frag.unit).unwrap();
        let cert = robustness(&frag, &noise).unwrap();
        assert!(cert.r_min.abs() < 1e-12);
        assert_eq!(cert.model.ontic_count(), 2);
        assert!(cert.audit(&frag, &noise).is_sound());
    }

    #[test]
    fn fixed_strength_below_optimum_is_infeasible() {
        let frag = two_to_one();
        let acc = AccessibleFragment::new(&frag).unwrap();
        let noise = depolarising_map(&frag.max_mixed, &frag.unit).unwrap();
        let r = solve_robustness(&acc, &noise).unwrap().r_min;
        assert!(!feasible_at(&acc, &noise, r - 1e-4).unwrap());
        assert!(feasible_at(&acc, &noise, r + 1e-4).unwrap());
    }

    #[test]
    fn dephasing_axis_minimum_prefers_pauli_order_on_ties() {
        let frag = two_to_one();
        let acc = AccessibleFragment::new(&frag).unwrap();
        // The XZ square is symmetric under X ↔ Z.
        let result = min_over_axes(&acc, &[Axis::Z, Axis::X, Axis::Y]).unwrap();
        let rx = result.get(Axis::X).unwrap().r().unwrap();
        let rz = result.get(Axis::Z).unwrap().r().unwrap();
        assert!((rx - rz).abs() < 1e-9);
        if (result.r_min - rx).abs() < 1e-9 {
            assert_eq!(result.argmin, Axis::X);
        }
    }

    #[test]
    fn wrong_noise_dimension_is_rejected() {
        let frag = classical_bit();
        let acc = AccessibleFragment::new(&frag).unwrap();
        let noise = depolarising_map(&maximally_mixed(3), &unit_effect(3)).unwrap();
        assert!(matches!(
            solve_robustness(&acc, &noise),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
