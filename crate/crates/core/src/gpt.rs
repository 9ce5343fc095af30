//! Real-vector representation of quantum states and effects, and GPT
//! fragments assembled from them.
//!
//! Operators are expanded in an orthonormal Hermitian basis: the scaled
//! identity `1/√d` first, followed by the generalized Gell-Mann matrices
//! scaled to unit Hilbert-Schmidt norm (all symmetric, then all
//! antisymmetric, then diagonal). For a qubit this is `{1, X, Y, Z}/√2`, so
//! the dot product of two vectorized operators equals `Tr(AB)`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    State,
    Effect,
}

/// A state or effect of a GPT, as coordinates in the fixed operator basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GptVector {
    coords: DVector<f64>,
    role: Role,
}

impl GptVector {
    pub fn new(coords: impl Into<Vec<f64>>, role: Role) -> Result<Self> {
        let coords: Vec<f64> = coords.into();
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coordinate {bad}"
            )));
        }
        Ok(Self {
            coords: DVector::from_vec(coords),
            role,
        })
    }

    pub fn state(coords: impl Into<Vec<f64>>) -> Result<Self> {
        Self::new(coords, Role::State)
    }

    pub fn effect(coords: impl Into<Vec<f64>>) -> Result<Self> {
        Self::new(coords, Role::Effect)
    }

    pub(crate) fn from_dvector(coords: DVector<f64>, role: Role) -> Self {
        Self { coords, role }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.coords.iter().copied().collect()
    }

    /// Same coordinates, other role. Transposition self-duality uses this to
    /// read an effect vector as a state.
    pub fn with_role(&self, role: Role) -> Self {
        Self {
            coords: self.coords.clone(),
            role,
        }
    }

    pub fn dot(&self, other: &GptVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self.coords.dot(&other.coords))
    }

    /// Max-abs coordinate comparison at the duplicate tolerance.
    pub fn approx_eq(&self, other: &GptVector) -> bool {
        self.dim() == other.dim()
            && self
                .coords
                .iter()
                .zip(other.coords.iter())
                .all(|(a, b)| (a - b).abs() < tol::DUPLICATE)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.abs() < tol::DUPLICATE)
    }
}

/// Orthonormal Hermitian operator basis for a `d`-level system.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    d: usize,
    elements: Vec<CMatrix>,
}

impl OperatorBasis {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "Hilbert space dimension must be positive");
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(d * d);

        elements.push(CMatrix::identity(d, d).map(|c| c / (d as f64).sqrt()));
        for j in 0..d {
            for k in (j + 1)..d {
                let mut m = CMatrix::from_element(d, d, zero);
                m[(j, k)] = one * inv_sqrt2;
                m[(k, j)] = one * inv_sqrt2;
                elements.push(m);
            }
        }
        for j in 0..d {
            for k in (j + 1)..d {
                let mut m = CMatrix::from_element(d, d, zero);
                m[(j, k)] = Complex64::new(0.0, -inv_sqrt2);
                m[(k, j)] = Complex64::new(0.0, inv_sqrt2);
                elements.push(m);
            }
        }
        for l in 1..d {
            let lf = l as f64;
            let scale = 1.0 / (lf * (lf + 1.0)).sqrt();
            let mut m = CMatrix::from_element(d, d, zero);
            for j in 0..l {
                m[(j, j)] = one * scale;
            }
            m[(l, l)] = one * (-lf * scale);
            elements.push(m);
        }
        Self { d, elements }
    }

    /// Hilbert-space dimension.
    pub fn hilbert_dim(&self) -> usize {
        self.d
    }

    /// Number of real coordinates, `d²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Hilbert-Schmidt coordinates of a Hermitian operator.
    pub fn vectorize(&self, op: &CMatrix) -> Result<DVector<f64>> {
        check_hermitian(op, self.d)?;
        Ok(DVector::from_iterator(
            self.len(),
            self.elements.iter().map(|b| hs_inner(b, op)),
        ))
    }

    pub fn devectorize(&self, coords: &DVector<f64>) -> Result<CMatrix> {
        if coords.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coords.len(),
            });
        }
        let mut out = CMatrix::zeros(self.d, self.d);
        for (c, b) in coords.iter().zip(&self.elements) {
            out += b.map(|z| z * *c);
        }
        Ok(out)
    }
}

/// `Tr(A B)` for Hermitian `A`, `B` (real by construction).
fn hs_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

fn check_hermitian(op: &CMatrix, d: usize) -> Result<()> {
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: op.nrows().max(op.ncols()),
        });
    }
    for i in 0..d {
        for j in 0..d {
            let z = op[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidOperator(format!(
                    "non-finite entry at ({i}, {j})"
                )));
            }
            if (z - op[(j, i)].conj()).norm() > tol::OPERATOR {
                return Err(Error::InvalidOperator(format!(
                    "not Hermitian at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

fn square_dim(op: &CMatrix) -> Result<usize> {
    if op.nrows() != op.ncols() || op.nrows() == 0 {
        return Err(Error::InvalidOperator(format!(
            "expected a nonempty square matrix, got {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(op.nrows())
}

fn eigenvalues(op: &CMatrix) -> Vec<f64> {
    op.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Vectorizes a density operator. It must be Hermitian, positive
/// semidefinite and trace one.
pub fn vectorize_state(rho: &CMatrix) -> Result<GptVector> {
    let d = square_dim(rho)?;
    let coords = OperatorBasis::new(d).vectorize(rho)?;
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > tol::OPERATOR {
        return Err(Error::InvalidOperator(format!("state has trace {trace}")));
    }
    if let Some(ev) = eigenvalues(rho).into_iter().find(|&ev| ev < -tol::OPERATOR) {
        return Err(Error::InvalidOperator(format!(
            "state has negative eigenvalue {ev}"
        )));
    }
    Ok(GptVector::from_dvector(coords, Role::State))
}

/// Vectorizes a POVM element; eigenvalues must lie in [0, 1].
pub fn vectorize_effect(effect: &CMatrix) -> Result<GptVector> {
    let d = square_dim(effect)?;
    let coords = OperatorBasis::new(d).vectorize(effect)?;
    if let Some(ev) = eigenvalues(effect)
        .into_iter()
        .find(|&ev| !(-tol::OPERATOR..=1.0 + tol::OPERATOR).contains(&ev))
    {
        return Err(Error::InvalidEffect(format!(
            "eigenvalue {ev} outside [0, 1]"
        )));
    }
    Ok(GptVector::from_dvector(coords, Role::Effect))
}

/// `p(k|M,P) = ⟨s_P, e_{k|M}⟩`.
pub fn probability(state: &GptVector, effect: &GptVector) -> Result<f64> {
    if state.role() != Role::State {
        return Err(Error::RoleMismatch("first argument must be a state".into()));
    }
    if effect.role() != Role::Effect {
        return Err(Error::RoleMismatch(
            "second argument must be an effect".into(),
        ));
    }
    state.dot(effect)
}

/// Unit (discard) effect of a `d`-level system: `√d e_0`.
pub fn unit_effect(d: usize) -> GptVector {
    let mut coords = vec![0.0; d * d];
    coords[0] = (d as f64).sqrt();
    GptVector::from_dvector(DVector::from_vec(coords), Role::Effect)
}

/// Maximally mixed state of a `d`-level system: `e_0/√d`.
pub fn maximally_mixed(d: usize) -> GptVector {
    let mut coords = vec![0.0; d * d];
    coords[0] = 1.0 / (d as f64).sqrt();
    GptVector::from_dvector(DVector::from_vec(coords), Role::State)
}

pub mod pauli {
    //! Qubit operators.
    use super::CMatrix;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    /// `(1 + b·σ)/2`; a density operator when `|b| ≤ 1`.
    pub fn bloch_operator(b: [f64; 3]) -> CMatrix {
        let half = c(0.5, 0.0);
        (identity() + x() * c(b[0], 0.0) + y() * c(b[1], 0.0) + z() * c(b[2], 0.0)) * half
    }
}

/// Qubit state with the given Bloch vector.
pub fn qubit_state(bloch: [f64; 3]) -> Result<GptVector> {
    vectorize_state(&pauli::bloch_operator(bloch))
}

/// Qubit effect `(1 + b·σ)/2`.
pub fn qubit_effect(bloch: [f64; 3]) -> Result<GptVector> {
    vectorize_effect(&pauli::bloch_operator(bloch))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FragmentLabels {
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub effects: Vec<String>,
}

/// A GPT fragment: states, effects, the unit effect `u` and the maximally
/// mixed state `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GptFragment {
    /// Hilbert-space dimension when the fragment comes from quantum operators.
    pub basis_dim: Option<usize>,
    pub states: Vec<GptVector>,
    pub effects: Vec<GptVector>,
    pub unit: GptVector,
    pub max_mixed: GptVector,
    pub labels: FragmentLabels,
}

impl GptFragment {
    pub fn dim(&self) -> usize {
        self.unit.dim()
    }

    /// `⟨s_i, e_j⟩` for every state `i` and effect `j`.
    pub fn probability_table(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.states.len(), self.effects.len(), |i, j| {
            self.states[i].coords().dot(self.effects[j].coords())
        })
    }

    /// Indices `(a, b)` of effect pairs with `e_a + e_b = u`, `a < b`.
    pub fn complement_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for a in 0..self.effects.len() {
            for b in (a + 1)..self.effects.len() {
                let sum = self.effects[a].coords() + self.effects[b].coords();
                if (sum - self.unit.coords()).amax() < tol::DUPLICATE {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }

    pub fn to_file(&self) -> FragmentFile {
        FragmentFile {
            basis_dim: self.basis_dim,
            states: self.states.iter().map(GptVector::to_vec).collect(),
            effects: self.effects.iter().map(GptVector::to_vec).collect(),
            unit: Some(self.unit.to_vec()),
            max_mixed: Some(self.max_mixed.to_vec()),
            labels: Some(self.labels.clone()),
            augment: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FragmentFile = serde_json::from_str(text)?;
        file.into_fragment()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }
}

/// Assembles a fragment and validates its probability rule.
///
/// With `augment` set, the effect list is closed under `{0, u, u − e}`:
/// original effects come first (duplicates dropped), then missing
/// complements, then `0` and `u` when absent.
pub fn build_fragment(
    states: Vec<GptVector>,
    effects: Vec<GptVector>,
    unit: GptVector,
    max_mixed: GptVector,
    labels: Option<FragmentLabels>,
    augment: bool,
) -> Result<GptFragment> {
    if states.is_empty() {
        return Err(Error::InvalidFragment("no states".into()));
    }
    let dim = unit.dim();
    if dim == 0 {
        return Err(Error::InvalidFragment(
            "zero-dimensional unit effect".into(),
        ));
    }
    for v in states
        .iter()
        .chain(&effects)
        .chain(std::iter::once(&max_mixed))
    {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
    }
    if states
        .iter()
        .chain(std::iter::once(&max_mixed))
        .any(|s| s.role() != Role::State)
    {
        return Err(Error::RoleMismatch(
            "states and max_mixed must be tagged as states".into(),
        ));
    }
    if effects
        .iter()
        .chain(std::iter::once(&unit))
        .any(|e| e.role() != Role::Effect)
    {
        return Err(Error::RoleMismatch(
            "effects and unit must be tagged as effects".into(),
        ));
    }
    let mu_u = max_mixed.dot(&unit)?;
    if (mu_u - 1.0).abs() > tol::PROBABILITY {
        return Err(Error::InvalidFragment(format!(
            "⟨μ, u⟩ = {mu_u}, expected 1"
        )));
    }

    let labels = labels.unwrap_or_default();
    let state_labels = fill_labels(labels.states, states.len(), "s")?;
    let effect_labels = fill_labels(labels.effects, effects.len(), "e")?;

    fn push(kept: &mut Vec<GptVector>, labels: &mut Vec<String>, v: GptVector, label: String) {
        if !kept.iter().any(|k| k.approx_eq(&v)) {
            kept.push(v);
            labels.push(label);
        }
    }
    let mut kept: Vec<GptVector> = Vec::with_capacity(effects.len() + 2);
    let mut kept_labels = Vec::with_capacity(effects.len() + 2);
    for (e, l) in effects.iter().zip(&effect_labels) {
        push(&mut kept, &mut kept_labels, e.clone(), l.clone());
    }
    if augment {
        let originals: Vec<(GptVector, String)> = kept
            .iter()
            .cloned()
            .zip(kept_labels.iter().cloned())
            .collect();
        for (e, l) in &originals {
            let comp = GptVector::from_dvector(unit.coords() - e.coords(), Role::Effect);
            push(&mut kept, &mut kept_labels, comp, complement_label(l));
        }
        let zero = GptVector::from_dvector(DVector::zeros(dim), Role::Effect);
        push(&mut kept, &mut kept_labels, zero, "0".into());
        push(&mut kept, &mut kept_labels, unit.clone(), "u".into());
    }
    if kept.is_empty() {
        return Err(Error::InvalidFragment("no effects".into()));
    }

    for (i, s) in states.iter().enumerate() {
        for (j, e) in kept.iter().chain(std::iter::once(&unit)).enumerate() {
            let p = s.dot(e)?;
            if !(-tol::PROBABILITY..=1.0 + tol::PROBABILITY).contains(&p) {
                let name = kept_labels.get(j).map(String::as_str).unwrap_or("u");
                return Err(Error::InvalidFragment(format!(
                    "⟨{}, {}⟩ = {p} lies outside [0, 1]",
                    state_labels[i], name
                )));
            }
        }
    }

    Ok(GptFragment {
        basis_dim: None,
        states,
        effects: kept,
        unit,
        max_mixed,
        labels: FragmentLabels {
            states: state_labels,
            effects: kept_labels,
        },
    })
}

fn fill_labels(given: Vec<String>, count: usize, prefix: &str) -> Result<Vec<String>> {
    if given.is_empty() {
        return Ok((0..count).map(|i| format!("{prefix}{i}")).collect());
    }
    // Effect labels may already cover the augmented list of an exported file.
    if given.len() < count {
        return Err(Error::InvalidFragment(format!(
            "{} labels for {count} {prefix}-vectors",
            given.len()
        )));
    }
    Ok(given.into_iter().take(count).collect())
}

fn complement_label(label: &str) -> String {
    match label.strip_prefix("u-") {
        Some(inner) => inner.to_string(),
        None => format!("u-{label}"),
    }
}

/// On-disk fragment format.
///
/// Each entry of `states`/`effects` is either a coordinate vector of length
/// `d²` or, when `basis_dim = d` is given, a `d×d` complex matrix written as
/// interleaved `(re, im)` pairs in row-major order (length `2d²`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_dim: Option<usize>,
    pub states: Vec<Vec<f64>>,
    pub effects: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_mixed: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<FragmentLabels>,
    /// Effect-list augmentation; on when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augment: Option<bool>,
}

impl FragmentFile {
    pub fn into_fragment(self) -> Result<GptFragment> {
        let coord_len = match self.basis_dim {
            Some(d) => d * d,
            None => self
                .unit
                .as_ref()
                .map(Vec::len)
                .or_else(|| self.states.first().map(Vec::len))
                .ok_or_else(|| Error::InvalidFragment("no states".into()))?,
        };
        let hilbert_dim = self.basis_dim.or_else(|| exact_sqrt(coord_len));
        let basis = hilbert_dim.map(OperatorBasis::new);

        let decode = |entry: &Vec<f64>, role: Role| -> Result<GptVector> {
            if entry.len() == coord_len {
                return GptVector::new(entry.clone(), role);
            }
            match (&basis, self.basis_dim) {
                (Some(basis), Some(d)) if entry.len() == 2 * d * d => {
                    let op = CMatrix::from_row_iterator(
                        d,
                        d,
                        entry.chunks(2).map(|p| Complex64::new(p[0], p[1])),
                    );
                    debug_assert_eq!(basis.hilbert_dim(), d);
                    match role {
                        Role::State => vectorize_state(&op),
                        Role::Effect => vectorize_effect(&op),
                    }
                }
                _ => Err(Error::DimensionMismatch {
                    expected: coord_len,
                    got: entry.len(),
                }),
            }
        };

        let states = self
            .states
            .iter()
            .map(|s| decode(s, Role::State))
            .collect::<Result<Vec<_>>>()?;
        let effects = self
            .effects
            .iter()
            .map(|e| decode(e, Role::Effect))
            .collect::<Result<Vec<_>>>()?;
        let unit = match &self.unit {
            Some(u) => decode(u, Role::Effect)?,
            None => unit_effect(hilbert_dim.ok_or_else(|| {
                Error::InvalidFragment(
                    "unit effect required for non-square coordinate length".into(),
                )
            })?),
        };
        let max_mixed = match &self.max_mixed {
            Some(m) => decode(m, Role::State)?,
            None => maximally_mixed(hilbert_dim.ok_or_else(|| {
                Error::InvalidFragment("max_mixed required for non-square coordinate length".into())
            })?),
        };
        let mut frag = build_fragment(
            states,
            effects,
            unit,
            max_mixed,
            self.labels,
            self.augment.unwrap_or(true),
        )?;
        frag.basis_dim = self.basis_dim;
        Ok(frag)
    }
}

fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Labelled `(state, effect) → probability` map, mostly for reports.
pub fn probability_map(frag: &GptFragment) -> BTreeMap<(String, String), f64> {
    let table = frag.probability_table();
    let mut out = BTreeMap::new();
    for (i, sl) in frag.labels.states.iter().enumerate() {
        for (j, el) in frag.labels.effects.iter().enumerate() {
            out.insert((sl.clone(), el.clone()), table[(i, j)]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn assert_coords(v: &GptVector, expected: &[f64]) {
        assert_eq!(v.dim(), expected.len());
        for (a, b) in v.coords().iter().zip(expected) {
            assert!(
                (a - b).abs() < 1e-12,
                "{:?} != {:?}",
                v.coords().as_slice(),
                expected
            );
        }
    }

    #[test]
    fn qubit_basis_is_scaled_paulis() {
        let basis = OperatorBasis::new(2);
        let expected = [pauli::identity(), pauli::x(), pauli::y(), pauli::z()];
        for (b, p) in basis.elements().iter().zip(expected) {
            assert!((b - p.map(|z| z * FRAC_1_SQRT_2)).norm() < 1e-15);
        }
    }

    #[test]
    fn basis_is_orthonormal_for_qutrit() {
        let basis = OperatorBasis::new(3);
        assert_eq!(basis.len(), 9);
        for (i, a) in basis.elements().iter().enumerate() {
            for (j, b) in basis.elements().iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((hs_inner(a, b) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn vectorize_state_examples() {
        let mixed = pauli::identity().map(|z| z * 0.5);
        assert_coords(
            &vectorize_state(&mixed).unwrap(),
            &[FRAC_1_SQRT_2, 0.0, 0.0, 0.0],
        );
        let zero = pauli::bloch_operator([0.0, 0.0, 1.0]);
        assert_coords(
            &vectorize_state(&zero).unwrap(),
            &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2],
        );
        // rho_(000) at θ = π/2: Bloch vector (1/√2, 1/√2, 0).
        let theta = PI / 2.0;
        let b = theta.sin() / SQRT_2;
        let rho = pauli::bloch_operator([b, b, theta.cos()]);
        assert_coords(
            &vectorize_state(&rho).unwrap(),
            &[FRAC_1_SQRT_2, 0.5, 0.5, 0.0],
        );
    }

    #[test]
    fn vectorize_effect_examples() {
        assert_coords(
            &vectorize_effect(&pauli::identity()).unwrap(),
            &[SQRT_2, 0.0, 0.0, 0.0],
        );
        let proj = pauli::bloch_operator([0.0, 0.0, 1.0]);
        assert_coords(
            &vectorize_effect(&proj).unwrap(),
            &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2],
        );
        assert_coords(&vectorize_effect(&CMatrix::zeros(2, 2)).unwrap(), &[0.0; 4]);
    }

    #[test]
    fn vectorize_rejects_bad_operators() {
        let mut m = pauli::x();
        m[(0, 1)] = Complex64::new(1.0, 0.5);
        assert!(matches!(
            vectorize_state(&m),
            Err(Error::InvalidOperator(_))
        ));
        let too_big = pauli::identity().map(|z| z * 1.5);
        assert!(matches!(
            vectorize_effect(&too_big),
            Err(Error::InvalidEffect(_))
        ));
        let negative = pauli::z();
        assert!(matches!(
            vectorize_effect(&negative),
            Err(Error::InvalidEffect(_))
        ));
    }

    #[test]
    fn probability_examples() {
        let mu = maximally_mixed(2);
        let u = unit_effect(2);
        assert!((probability(&mu, &u).unwrap() - 1.0).abs() < 1e-15);
        let zero = qubit_state([0.0, 0.0, 1.0]).unwrap();
        let minus = qubit_effect([0.0, 0.0, -1.0]).unwrap();
        assert!(probability(&zero, &minus).unwrap().abs() < 1e-15);
        for theta in [0.0, 0.3, 1.0, PI / 2.0] {
            let b = theta.sin() / SQRT_2;
            let rho = qubit_state([b, b, theta.cos()]).unwrap();
            let e0z = qubit_effect([0.0, 0.0, 1.0]).unwrap();
            let p = probability(&rho, &e0z).unwrap();
            assert!((p - (1.0 + theta.cos()) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn probability_checks_dimension_and_role() {
        let s = GptVector::state(vec![1.0, 0.0]).unwrap();
        let e = GptVector::effect(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            probability(&s, &e),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(probability(&e, &s), Err(Error::RoleMismatch(_))));
    }

    #[test]
    fn fragment_rejects_empty_and_out_of_range() {
        let u = unit_effect(2);
        let mu = maximally_mixed(2);
        let e = qubit_effect([0.0, 0.0, 1.0]).unwrap();
        let err = build_fragment(vec![], vec![e.clone()], u.clone(), mu.clone(), None, true);
        assert!(matches!(err, Err(Error::InvalidFragment(_))));

        let s = qubit_state([0.0, 0.0, 1.0]).unwrap();
        let bad = GptVector::effect(e.coords().scale(1.2).as_slice().to_vec()).unwrap();
        let err = build_fragment(vec![s], vec![bad], u, mu, None, false);
        assert!(matches!(err, Err(Error::InvalidFragment(_))));
    }

    #[test]
    fn augmentation_adds_complements_zero_and_unit_once() {
        let u = unit_effect(2);
        let mu = maximally_mixed(2);
        let s = qubit_state([0.0, 0.0, 1.0]).unwrap();
        let e = qubit_effect([1.0, 0.0, 0.0]).unwrap();
        let frag = build_fragment(
            vec![s],
            vec![e.clone(), e.clone()],
            u.clone(),
            mu.clone(),
            None,
            true,
        )
        .unwrap();
        assert_eq!(frag.effects.len(), 4);
        assert_eq!(frag.labels.effects, vec!["e0", "u-e0", "0", "u"]);
        assert_eq!(frag.complement_pairs(), vec![(0, 1), (2, 3)]);

        let plain =
            build_fragment(vec![frag.states[0].clone()], vec![e], u, mu, None, false).unwrap();
        assert_eq!(plain.effects.len(), 1);
    }

    #[test]
    fn json_accepts_interleaved_complex_matrices() {
        // |+><+| and the Y projector (1 + Y)/2 as interleaved (re, im) pairs.
        let text = r#"{
            "basis_dim": 2,
            "states": [[0.5,0, 0.5,0, 0.5,0, 0.5,0]],
            "effects": [[0.5,0, 0,-0.5, 0,0.5, 0.5,0]]
        }"#;
        let frag = GptFragment::from_json(text).unwrap();
        assert_coords(&frag.states[0], &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0]);
        assert_coords(&frag.effects[0], &[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0]);
        assert_eq!(frag.effects.len(), 4);
        assert_coords(&frag.unit, &[SQRT_2, 0.0, 0.0, 0.0]);

        let back = GptFragment::from_json(&frag.to_json().unwrap()).unwrap();
        assert_eq!(back.effects.len(), frag.effects.len());
        assert_eq!(back.labels, frag.labels);
    }

    #[test]
    fn json_rejects_wrong_lengths() {
        let text = r#"{"basis_dim": 2, "states": [[1, 0, 0]], "effects": []}"#;
        assert!(matches!(
            GptFragment::from_json(text),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
