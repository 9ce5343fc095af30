//! Noncontextuality tests for prepare-and-measure fragments of generalized
//! probabilistic theories.
//!
//! A fragment is a finite set of state vectors and effect vectors in a real
//! inner-product space. It admits a noncontextual ontological model exactly
//! when its accessible cones embed in a simplex; the minimal amount of noise
//! that makes this happen is the robustness of contextuality. This crate
//! computes that robustness with a single linear program for depolarising
//! or dephasing noise, extracts the resulting ontological model, and ships
//! generators and sweep harnesses for n-to-1 parity-oblivious multiplexing.
//!
//! Module map:
//!
//! * [`gpt`]: operator basis, vectorization, fragments and their JSON form.
//! * [`geometry`]: span bases, inclusion maps and cone facet enumeration.
//! * [`noise`]: depolarising and dephasing maps.
//! * [`simplex`]: the dense LP solver used by everything above it.
//! * [`robustness`]: the robustness program and ontological-model extraction.
//! * [`pom`]: parity-oblivious multiplexing scenarios and closed forms.
//! * [`experiments`]: deterministic θ sweeps, hemisphere scaling, axis audits.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod gpt;
pub mod noise;
pub mod par;
pub mod plot;
pub mod pom;
pub mod robustness;
pub mod simplex;
pub mod tol;

pub use error::{Error, Result};
pub use geometry::AccessibleFragment;
pub use gpt::{GptFragment, GptVector, Role};
pub use noise::{Axis, NoiseKind, NoiseMap};
pub use robustness::{OntologicalModel, RobustnessCertificate};
