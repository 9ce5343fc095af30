//! Deterministic numerical studies: θ sweeps of the 3-to-1 cuboid family,
//! hemisphere scaling of depolarising robustness, and the random-axis
//! dephasing audit.
//!
//! Rows are independent and computed through [`Execution`]; output order
//! always follows the input grid.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AccessibleFragment;
use crate::gpt::{self, build_fragment, FragmentLabels, GptFragment};
use crate::noise::{depolarising_map, Axis};
use crate::par::Execution;
use crate::pom;
use crate::robustness::{min_over_axes, solve_robustness, AxisMinimum, ModelAudit};

/// Default number of θ grid points.
pub const DEFAULT_GRID: usize = 200;

/// Name of the generator used for random axes; recorded in audit output.
pub const RNG_NAME: &str = "ChaCha8";

/// `grid` uniform points on `[0, π/2]`, both ends included.
pub fn theta_grid(grid: usize) -> Result<Vec<f64>> {
    if grid < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid = {grid}, need at least 2 points"
        )));
    }
    let step = FRAC_PI_2 / (grid - 1) as f64;
    Ok((0..grid)
        .map(|i| {
            if i + 1 == grid {
                FRAC_PI_2
            } else {
                i as f64 * step
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepConfig {
    pub grid: usize,
    pub depolarising: bool,
    pub dephasing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            depolarising: true,
            dephasing: true,
        }
    }
}

/// One θ grid point. `None` in a dephasing column means the axis admits no
/// finite robustness (or that dephasing was not requested).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub theta: f64,
    pub s: f64,
    pub r_depol: Option<f64>,
    pub r_deph_x: Option<f64>,
    pub r_deph_y: Option<f64>,
    pub r_deph_z: Option<f64>,
    pub r_deph_min: Option<f64>,
    pub argmin_axis: Option<String>,
    /// Solver error for this row, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// Worst model audit across the row's certificates.
    #[serde(skip)]
    pub audit: Option<ModelAudit>,
}

impl SweepRecord {
    fn empty(theta: f64, s: f64) -> Self {
        Self {
            theta,
            s,
            r_depol: None,
            r_deph_x: None,
            r_deph_y: None,
            r_deph_z: None,
            r_deph_min: None,
            argmin_axis: None,
            error: None,
            audit: None,
        }
    }

    fn absorb(&mut self, audit: ModelAudit) {
        self.audit = Some(self.audit.map_or(audit, |a| a.worst(audit)));
    }
}

fn audited_axis_min(
    frag: &GptFragment,
    acc: &AccessibleFragment,
    axes: &[Axis],
) -> Result<(AxisMinimum, ModelAudit)> {
    let min = min_over_axes(acc, axes)?;
    let mut audit = ModelAudit::default();
    for outcome in &min.table {
        if let Some(cert) = &outcome.certificate {
            audit = audit.worst(cert.audit(frag, &outcome.axis.dephasing_map()?));
        }
    }
    Ok((min, audit))
}

fn sweep_row(theta: f64, config: SweepConfig) -> SweepRecord {
    let scenario = match pom::pom3_scenario(theta) {
        Ok(sc) => sc,
        Err(e) => {
            let mut rec = SweepRecord::empty(theta, f64::NAN);
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let mut rec = SweepRecord::empty(theta, scenario.success_rate());
    if let Err(e) = fill_row(&mut rec, &scenario, config) {
        rec.error = Some(e.to_string());
    }
    rec
}

fn fill_row(rec: &mut SweepRecord, scenario: &pom::PomScenario, config: SweepConfig) -> Result<()> {
    let frag = scenario.to_fragment(true)?;
    let acc = AccessibleFragment::with_execution(&frag, Execution::Sequential)?;
    if config.depolarising {
        let noise = depolarising_map(&frag.max_mixed, &frag.unit)?;
        let cert = solve_robustness(&acc, &noise)?;
        rec.absorb(cert.audit(&frag, &noise));
        rec.r_depol = Some(cert.r_min);
    }
    if config.dephasing {
        let (min, audit) = audited_axis_min(&frag, &acc, &Axis::PAULI)?;
        rec.absorb(audit);
        rec.r_deph_x = min.get(Axis::X).and_then(|o| o.r());
        rec.r_deph_y = min.get(Axis::Y).and_then(|o| o.r());
        rec.r_deph_z = min.get(Axis::Z).and_then(|o| o.r());
        rec.r_deph_min = Some(min.r_min);
        rec.argmin_axis = Some(min.argmin.to_string());
    }
    Ok(())
}

/// Evaluates the 3-to-1 cuboid family over the θ grid. Per-row solver
/// errors are recorded in [`SweepRecord::error`] and do not stop the sweep.
pub fn sweep_theta(config: SweepConfig, exec: Execution) -> Result<Vec<SweepRecord>> {
    let thetas = theta_grid(config.grid)?;
    Ok(exec.map(&thetas, |&theta| sweep_row(theta, config)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub n: u32,
    pub two_n: u32,
    pub r_depol: f64,
    #[serde(skip)]
    pub audit: Option<ModelAudit>,
}

/// Real-hemisphere fragment with `2n` pure states at Bloch angles `kπ/n`
/// in the XZ plane and `2n` projective effects offset by `π/4`,
/// `k = 0..2n−1`, closed under complements.
pub fn hemisphere_fragment(n: u32) -> Result<GptFragment> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n}, need n ≥ 2")));
    }
    let count = 2 * n;
    let bloch = |angle: f64| [angle.sin(), 0.0, angle.cos()];
    let mut states = Vec::with_capacity(count as usize);
    let mut effects = Vec::with_capacity(count as usize);
    for k in 0..count {
        let angle = k as f64 * PI / n as f64;
        states.push(gpt::qubit_state(bloch(angle))?);
        effects.push(gpt::qubit_effect(bloch(angle + FRAC_PI_4))?);
    }
    let labels = FragmentLabels {
        states: (0..count).map(|k| format!("psi{k}")).collect(),
        effects: (0..count).map(|k| format!("phi{k}")).collect(),
    };
    let mut frag = build_fragment(
        states,
        effects,
        gpt::unit_effect(2),
        gpt::maximally_mixed(2),
        Some(labels),
        true,
    )?;
    frag.basis_dim = Some(2);
    Ok(frag)
}

fn scaling_row(n: u32) -> Result<ScalingRecord> {
    let frag = hemisphere_fragment(n)?;
    let acc = AccessibleFragment::with_execution(&frag, Execution::Sequential)?;
    let noise = depolarising_map(&frag.max_mixed, &frag.unit)?;
    let cert = solve_robustness(&acc, &noise)?;
    Ok(ScalingRecord {
        n,
        two_n: 2 * n,
        r_depol: cert.r_min,
        audit: Some(cert.audit(&frag, &noise)),
    })
}

/// Depolarising robustness of [`hemisphere_fragment`] for each `n`.
pub fn hemisphere_scaling(ns: &[u32], exec: Execution) -> Result<Vec<ScalingRecord>> {
    if let Some(&bad) = ns.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidParameter(format!("n = {bad}, need n ≥ 2")));
    }
    exec.map(ns, |&n| scaling_row(n)).into_iter().collect()
}

/// `count` axes with `θ_r ~ U[0, π)` and `φ_r ~ U[0, 2π)` from a ChaCha8
/// stream seeded with `seed`.
pub fn random_axes(count: usize, seed: u64) -> Vec<Axis> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let theta_r = rng.random_range(0.0..PI);
            let phi_r = rng.random_range(0.0..2.0 * PI);
            Axis::Custom { theta_r, phi_r }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub theta: f64,
    pub r_min_xyz: f64,
    pub r_min_aug: f64,
    pub abs_diff: f64,
    #[serde(skip)]
    pub audit: Option<ModelAudit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisAudit {
    pub seed: u64,
    pub rng: String,
    pub extra_axes: usize,
    pub max_abs_diff: f64,
    pub rows: Vec<AuditRow>,
}

fn audit_row(theta: f64, extra: &[Axis]) -> Result<AuditRow> {
    let frag = pom::pom3_scenario(theta)?.to_fragment(true)?;
    let acc = AccessibleFragment::with_execution(&frag, Execution::Sequential)?;
    let (xyz, audit_xyz) = audited_axis_min(&frag, &acc, &Axis::PAULI)?;
    let (r_min_aug, audit) = if extra.is_empty() {
        (xyz.r_min, audit_xyz)
    } else {
        let (aug, audit_extra) = audited_axis_min(&frag, &acc, extra)?;
        (xyz.r_min.min(aug.r_min), audit_xyz.worst(audit_extra))
    };
    Ok(AuditRow {
        theta,
        r_min_xyz: xyz.r_min,
        r_min_aug,
        abs_diff: (xyz.r_min - r_min_aug).abs(),
        audit: Some(audit),
    })
}

/// Compares dephasing robustness minimised over {X, Y, Z} with the minimum
/// over {X, Y, Z} plus `extra_axes` seeded random axes at each θ.
pub fn random_axis_audit(
    extra_axes: usize,
    seed: u64,
    grid: usize,
    exec: Execution,
) -> Result<AxisAudit> {
    let thetas = theta_grid(grid)?;
    let extra = random_axes(extra_axes, seed);
    let rows = exec
        .map(&thetas, |&theta| audit_row(theta, &extra))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let max_abs_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    Ok(AxisAudit {
        seed,
        rng: RNG_NAME.into(),
        extra_axes,
        max_abs_diff,
        rows,
    })
}

/// Range of `n` used as the numerical premise for [`pom::max_encodable_bits`].
pub const PREMISE_RANGE: std::ops::RangeInclusive<u32> = 2..=32;

/// Explains `max_encodable_bits(r_cap)` given hemisphere scaling records:
/// the bit count, and whether every record stays below `r_cap`.
pub fn bits_report(r_cap: f64, scaling: &[ScalingRecord]) -> Result<String> {
    let bits = pom::max_encodable_bits(r_cap)?;
    let worst = scaling
        .iter()
        .map(|r| r.r_depol)
        .fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = (
        scaling.iter().map(|r| r.n).min().unwrap_or(0),
        scaling.iter().map(|r| r.n).max().unwrap_or(0),
    );
    let holds = !scaling.is_empty() && worst < r_cap;
    Ok(format!(
        "max_encodable_bits = {bits} (largest n with 1 - 1/sqrt(n) < {r_cap})\n\
         premise: hemisphere scaling gives r(n) < {r_cap} for n = {lo}..{hi} (max r = {worst:.9}): {}\n",
        if holds { "holds" } else { "VIOLATED" }
    ))
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "theta",
        "s",
        "r_depol",
        "r_deph_x",
        "r_deph_y",
        "r_deph_z",
        "r_deph_min",
        "argmin_axis",
    ])?;
    for r in records {
        w.write_record([
            r.theta.to_string(),
            r.s.to_string(),
            cell(r.r_depol),
            cell(r.r_deph_x),
            cell(r.r_deph_y),
            cell(r.r_deph_z),
            cell(r.r_deph_min),
            r.argmin_axis.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scaling_csv<W: Write>(records: &[ScalingRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "two_n", "r_depol"])?;
    for r in records {
        w.write_record([r.n.to_string(), r.two_n.to_string(), r.r_depol.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Audit table preceded by a `#` comment line carrying the seed.
pub fn write_audit_csv<W: Write>(audit: &AxisAudit, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# seed={} rng={} extra_axes={} max_abs_diff={}",
        audit.seed, audit.rng, audit.extra_axes, audit.max_abs_diff
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta", "r_min_xyz", "r_min_aug", "abs_diff"])?;
    for r in &audit.rows {
        w.write_record([
            r.theta.to_string(),
            r.r_min_xyz.to_string(),
            r.r_min_aug.to_string(),
            r.abs_diff.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = theta_grid(200).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[199], FRAC_PI_2);
        assert!(theta_grid(1).is_err());
    }

    #[test]
    fn classical_row() {
        let rec = sweep_row(0.0, SweepConfig::default());
        assert!(rec.error.is_none(), "{:?}", rec.error);
        assert!((rec.s - 2.0 / 3.0).abs() < 1e-14);
        assert!(rec.r_depol.unwrap() < 1e-9);
        assert!(rec.r_deph_min.unwrap() < 1e-9);
        assert!(rec.audit.unwrap().is_sound());
    }

    #[test]
    fn n2_hemisphere_matches_two_to_one() {
        let rec = scaling_row(2).unwrap();
        assert!((rec.r_depol - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-9);
        assert_eq!(rec.two_n, 4);
        assert!(hemisphere_fragment(1).is_err());
    }

    #[test]
    fn random_axes_are_seeded() {
        assert_eq!(random_axes(5, 7), random_axes(5, 7));
        assert_ne!(random_axes(5, 7), random_axes(5, 8));
        for axis in random_axes(50, 1) {
            let (t, p) = axis.angles();
            assert!((0.0..PI).contains(&t) && (0.0..2.0 * PI).contains(&p));
        }
    }

    #[test]
    fn audit_without_extra_axes_is_exact() {
        let audit = random_axis_audit(0, 3, 3, Execution::Sequential).unwrap();
        assert_eq!(audit.max_abs_diff, 0.0);
        assert_eq!(audit.rows.len(), 3);
    }

    #[test]
    fn csv_layout() {
        let rows = sweep_theta(
            SweepConfig {
                grid: 2,
                ..Default::default()
            },
            Execution::Sequential,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "theta,s,r_depol,r_deph_x,r_deph_y,r_deph_z,r_deph_min,argmin_axis"
        );
        assert_eq!(lines.count(), 2);

        let mut buf = Vec::new();
        write_audit_csv(
            &random_axis_audit(1, 9, 2, Execution::Sequential).unwrap(),
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# seed=9 rng=ChaCha8 extra_axes=1"));
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "theta,r_min_xyz,r_min_aug,abs_diff"
        );
    }
}
