//! Numerical thresholds shared across modules.

/// Two vectors are the same point when no coordinate differs by this much.
pub const DUPLICATE: f64 = 1e-10;

/// Hermiticity and eigenvalue-range slack for operator inputs.
pub const OPERATOR: f64 = 1e-10;

/// Slack on fragment probabilities outside [0, 1].
pub const PROBABILITY: f64 = 1e-9;

/// Relative singular-value cutoff for numerical span.
pub const SPAN: f64 = 1e-9;

/// Sign threshold for rays against constraints during facet enumeration.
pub const FACET: f64 = 1e-9;

/// Orthogonality, completeness and self-duality checks on dephasing effects.
pub const SELF_DUAL: f64 = 1e-10;

/// Primal and dual feasibility in the simplex solver.
pub const LP_FEASIBILITY: f64 = 1e-9;

/// `sigma` entries at or below this value do not populate an ontic state.
pub const ONTIC_SUPPORT: f64 = 1e-10;

/// Two axis robustness values within this distance count as a tie.
pub const AXIS_TIE: f64 = 1e-9;
