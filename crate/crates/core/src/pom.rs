//! n-to-1 parity-oblivious multiplexing: scenario generators, success
//! rates, the parity-obliviousness check and the closed-form relations
//! between success rate and depolarising robustness.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpt::{self, build_fragment, FragmentLabels, GptFragment, GptVector};

/// Success rate of the best noncontextual strategy, `(1 + 1/n)/2`.
pub fn noncontextual_bound(n: u32) -> f64 {
    0.5 * (1.0 + 1.0 / n as f64)
}

/// Optimal quantum success rate, `(1 + 1/√n)/2`.
pub fn quantum_bound(n: u32) -> f64 {
    0.5 * (1.0 + 1.0 / (n as f64).sqrt())
}

/// `(s_NC, s_Q)` for `n ≥ 1`.
pub fn bounds(n: u32) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok((noncontextual_bound(n), quantum_bound(n)))
}

/// Depolarising noise needed to bring success rate `s` down to the
/// noncontextual bound: `max(0, (s − s_NC)/(s − 1/2))`.
pub fn analytic_robustness(s: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(s > 0.5 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "success rate {s} must lie in (1/2, 1]"
        )));
    }
    Ok(((s - noncontextual_bound(n)) / (s - 0.5)).max(0.0))
}

/// Success rate after depolarising at strength `r`: `(1 − r)s + r/2`.
pub fn depolarized_success(s: f64, r: f64) -> f64 {
    (1.0 - r) * s + 0.5 * r
}

/// Largest `n` with `1 − 1/√n < r_cap`: the most bits a qubit can encode
/// with optimal advantage if its depolarising robustness stays below
/// `r_cap`.
pub fn max_encodable_bits(r_cap: f64) -> Result<u32> {
    if !(r_cap > 0.0 && r_cap < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "r_cap {r_cap} must lie in (0, 1)"
        )));
    }
    let mut n = 1u32;
    while 1.0 - 1.0 / ((n + 1) as f64).sqrt() < r_cap {
        n += 1;
    }
    Ok(n)
}

/// Closed-form success rate of the 3-to-1 cuboid family,
/// `1/2 + (√2 sin θ + cos θ)/6`.
pub fn pom3_success_closed_form(theta: f64) -> f64 {
    0.5 + (std::f64::consts::SQRT_2 * theta.sin() + theta.cos()) / 6.0
}

/// θ at which the cuboid becomes a cube, `arctan √2`. The 3-to-1 success
/// rate and depolarising robustness both peak here.
pub fn cube_angle() -> f64 {
    std::f64::consts::SQRT_2.atan()
}

/// Bitstring `x` as big-endian characters `x1x2…xn`.
pub fn bit_label(x: usize, n: u32) -> String {
    (0..n)
        .map(|y| if bit(x, y, n) == 1 { '1' } else { '0' })
        .collect()
}

/// `x_y` for `y ∈ 0..n`, with `x_1` the most significant bit.
pub fn bit(x: usize, y: u32, n: u32) -> u8 {
    ((x >> (n - 1 - y)) & 1) as u8
}

#[derive(Debug, Clone, PartialEq)]
pub struct PomScenario {
    pub n: u32,
    pub theta: Option<f64>,
    /// Indexed by the bitstring read as a big-endian integer.
    pub states: Vec<GptVector>,
    /// `effects[y][k]` is `E_{k|M_{y+1}}`.
    pub effects: Vec<[GptVector; 2]>,
    pub unit: GptVector,
    pub max_mixed: GptVector,
}

impl PomScenario {
    /// Validates counts (`2ⁿ` states, `n` binary measurements) and that each
    /// measurement sums to the unit effect.
    pub fn new(
        n: u32,
        theta: Option<f64>,
        states: Vec<GptVector>,
        effects: Vec<[GptVector; 2]>,
        unit: GptVector,
        max_mixed: GptVector,
    ) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::InvalidParameter(format!("n = {n} outside 1..=16")));
        }
        if states.len() != 1 << n {
            return Err(Error::InvalidParameter(format!(
                "{} states for n = {n}",
                states.len()
            )));
        }
        if effects.len() != n as usize {
            return Err(Error::InvalidParameter(format!(
                "{} measurements for n = {n}",
                effects.len()
            )));
        }
        for (y, [e0, e1]) in effects.iter().enumerate() {
            let sum = e0.coords() + e1.coords();
            if (sum - unit.coords()).amax() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "measurement {} does not sum to u",
                    y + 1
                )));
            }
        }
        Ok(Self {
            n,
            theta,
            states,
            effects,
            unit,
            max_mixed,
        })
    }

    /// `p(k | M_y, P_x)` with `y ∈ 0..n`.
    pub fn probability(&self, x: usize, y: usize, k: usize) -> f64 {
        self.states[x].coords().dot(self.effects[y][k].coords())
    }

    /// Average probability of decoding the queried bit correctly.
    pub fn success_rate(&self) -> f64 {
        let n = self.n;
        let total: f64 = (0..n)
            .flat_map(|y| (0..self.states.len()).map(move |x| (x, y)))
            .map(|(x, y)| self.probability(x, y as usize, bit(x, y, n) as usize))
            .sum();
        total / ((1usize << n) as f64 * n as f64)
    }

    /// Every preparation mixed with `μ` at strength `r`.
    pub fn depolarised(&self, r: f64) -> Self {
        let mut out = self.clone();
        for s in out.states.iter_mut() {
            let mixed = s.coords() * (1.0 - r) + self.max_mixed.coords() * r;
            *s = GptVector::state(mixed.as_slice().to_vec()).expect("finite mixture");
        }
        out
    }

    pub fn state_labels(&self) -> Vec<String> {
        (0..self.states.len())
            .map(|x| bit_label(x, self.n))
            .collect()
    }

    /// Effect labels `k|M_y` in fragment order.
    pub fn effect_labels(&self) -> Vec<String> {
        (1..=self.n)
            .flat_map(|y| (0..2).map(move |k| format!("{k}|M{y}")))
            .collect()
    }

    /// The scenario as a GPT fragment; states in bitstring order, effects
    /// ordered `0|M1, 1|M1, 0|M2, …`.
    pub fn to_fragment(&self, augment: bool) -> Result<GptFragment> {
        let effects = self
            .effects
            .iter()
            .flat_map(|pair| pair.iter().cloned())
            .collect();
        let mut frag = build_fragment(
            self.states.clone(),
            effects,
            self.unit.clone(),
            self.max_mixed.clone(),
            Some(FragmentLabels {
                states: self.state_labels(),
                effects: self.effect_labels(),
            }),
            augment,
        )?;
        frag.basis_dim = Some(2);
        Ok(frag)
    }
}

fn pauli_pair(axis: usize) -> Result<[GptVector; 2]> {
    let mut plus = [0.0; 3];
    plus[axis] = 1.0;
    let minus = plus.map(|c| -c);
    Ok([gpt::qubit_effect(plus)?, gpt::qubit_effect(minus)?])
}

fn sign(b: u8) -> f64 {
    if b == 0 {
        1.0
    } else {
        -1.0
    }
}

/// 3-to-1 cuboid family: `ρ_x = ½(1 + (−1)^{x1} sinθ/√2 X + (−1)^{x2} sinθ/√2 Y
/// + (−1)^{x3} cosθ Z)` measured in the Pauli X, Y, Z bases.
pub fn pom3_scenario(theta: f64) -> Result<PomScenario> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "θ = {theta} outside [0, π/2]"
        )));
    }
    let a = theta.sin() * FRAC_1_SQRT_2;
    let c = theta.cos();
    let states = (0..8)
        .map(|x| {
            gpt::qubit_state([
                sign(bit(x, 0, 3)) * a,
                sign(bit(x, 1, 3)) * a,
                sign(bit(x, 2, 3)) * c,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let effects = (0..3).map(pauli_pair).collect::<Result<Vec<_>>>()?;
    PomScenario::new(
        3,
        Some(theta),
        states,
        effects,
        gpt::unit_effect(2),
        gpt::maximally_mixed(2),
    )
}

/// Optimal 2-to-1 scenario: the XZ-plane square
/// `((−1)^{x1}/√2, 0, (−1)^{x2}/√2)` measured in X then Z.
pub fn pom2_scenario() -> Result<PomScenario> {
    let states = (0..4)
        .map(|x| {
            gpt::qubit_state([
                sign(bit(x, 0, 2)) * FRAC_1_SQRT_2,
                0.0,
                sign(bit(x, 1, 2)) * FRAC_1_SQRT_2,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let effects = vec![pauli_pair(0)?, pauli_pair(2)?];
    PomScenario::new(
        2,
        None,
        states,
        effects,
        gpt::unit_effect(2),
        gpt::maximally_mixed(2),
    )
}

/// A violated parity constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityViolation {
    /// Parity string, big-endian.
    pub t: String,
    /// Measurement index, 1-based.
    pub y: u32,
    /// Largest gap between the even- and odd-parity sums.
    pub gap: f64,
}

/// Checks parity-obliviousness for every parity string `t` with at least
/// two set bits and every measurement `y`.
///
/// Both the decoding form, `Σ_{x·t=0} p(x_y|M_y,P_x) = Σ_{x·t=1} p(x_y|M_y,P_x)`,
/// and the per-outcome form (equal sums of `p(k|M_y,P_x)` for each `k`,
/// i.e. equal even- and odd-parity mixtures as seen by `M_y`) must hold.
pub fn parity_oblivious_check(
    sc: &PomScenario,
    tol: f64,
) -> std::result::Result<(), Vec<ParityViolation>> {
    let n = sc.n;
    let count = 1usize << n;
    let mut violations = Vec::new();
    for t in 0..count {
        if t.count_ones() < 2 {
            continue;
        }
        for y in 0..n {
            let mut decode = [0.0; 2];
            let mut outcome = [[0.0; 2]; 2];
            for x in 0..count {
                let parity = ((x & t).count_ones() % 2) as usize;
                decode[parity] += sc.probability(x, y as usize, bit(x, y, n) as usize);
                for (k, slot) in outcome[parity].iter_mut().enumerate() {
                    *slot += sc.probability(x, y as usize, k);
                }
            }
            let gap = [
                (decode[0] - decode[1]).abs(),
                (outcome[0][0] - outcome[1][0]).abs(),
                (outcome[0][1] - outcome[1][1]).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            if gap > tol {
                violations.push(ParityViolation {
                    t: bit_label(t, n),
                    y: y + 1,
                    gap,
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
