//! Accessible-fragment coordinates and cone facets.
//!
//! States and effects are re-expressed in orthonormal bases of the
//! subspaces they span, so both cones are full-dimensional before their
//! facets are enumerated. Facets come from a floating-point
//! double-description pass over the dual cone `{h : ⟨h, g⟩ ≥ 0 ∀ g}`: its
//! extreme rays are exactly the facet normals of the primal cone.

use std::cmp::Ordering;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gpt::GptFragment;
use crate::par::Execution;
use crate::simplex;
use crate::tol;

/// Orthonormal basis of a numerical span together with the coordinates of
/// the spanning vectors in it. The basis matrix is the inclusion map.
#[derive(Debug, Clone)]
pub struct SpanBasis {
    /// `D × k` matrix with orthonormal columns.
    pub inclusion: DMatrix<f64>,
    /// One length-`k` coordinate vector per input vector.
    pub coords: Vec<DVector<f64>>,
}

impl SpanBasis {
    pub fn dim(&self) -> usize {
        self.inclusion.ncols()
    }
}

/// Orthonormal basis for the span of `vectors`, keeping singular directions
/// above `tol × σ_max`.
pub fn span_basis(vectors: &[DVector<f64>], tol: f64) -> Result<SpanBasis> {
    let Some(first) = vectors.first() else {
        return Err(Error::DegenerateSpan);
    };
    let dim = first.len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    let m = DMatrix::from_columns(vectors);
    if m.amax() < f64::EPSILON {
        return Err(Error::DegenerateSpan);
    }
    let svd = m.svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(Ordering::Equal)
    });
    let smax = svd.singular_values[order[0]];
    let kept: Vec<DVector<f64>> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > tol * smax)
        .map(|i| {
            let mut col = u.column(i).into_owned();
            // Sign convention: largest-magnitude component positive.
            if col[col.iamax()] < 0.0 {
                col.neg_mut();
            }
            col
        })
        .collect();
    let inclusion = DMatrix::from_columns(&kept);
    let coords = vectors.iter().map(|v| inclusion.tr_mul(v)).collect();
    Ok(SpanBasis { inclusion, coords })
}

/// Numerical rank of a set of vectors.
pub fn rank(vectors: &[DVector<f64>], tol: f64) -> usize {
    match span_basis(vectors, tol) {
        Ok(b) => b.dim(),
        Err(_) => 0,
    }
}

fn normalized_nonzero(coords: &[DVector<f64>]) -> Vec<(usize, DVector<f64>)> {
    coords
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let n = v.norm();
            (n > tol::DUPLICATE).then(|| (i, v / n))
        })
        .collect()
}

/// Indices of a minimal generating subset of `Cone(coords)`.
///
/// Zero vectors and repeated directions are dropped first. The remaining
/// vectors are scanned in order and a vector is discarded when a
/// feasibility LP writes it as a nonnegative combination of the vectors
/// still kept.
pub fn extreme_rays(coords: &[DVector<f64>]) -> Result<Vec<usize>> {
    let mut unique: Vec<(usize, DVector<f64>)> = Vec::new();
    for (i, v) in normalized_nonzero(coords) {
        if !unique.iter().any(|(_, u)| (u - &v).amax() < tol::DUPLICATE) {
            unique.push((i, v));
        }
    }
    let mut alive = vec![true; unique.len()];
    for i in 0..unique.len() {
        let others: Vec<DVector<f64>> = unique
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i && alive[j])
            .map(|(_, (_, v))| v.clone())
            .collect();
        if others.is_empty() {
            continue;
        }
        let a = DMatrix::from_columns(&others);
        if simplex::find_feasible(&a, &unique[i].1)?.is_some() {
            alive[i] = false;
        }
    }
    Ok(unique
        .into_iter()
        .zip(alive)
        .filter_map(|((i, _), keep)| keep.then_some(i))
        .collect())
}

/// Facet matrix of `Cone(coords)` in `R^k`: one unit-norm row `h` per facet
/// with `h·v ≥ 0` exactly on the cone, rows in lexicographic order.
pub fn cone_facets(coords: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let Some(first) = coords.first() else {
        return Err(Error::DegenerateSpan);
    };
    let k = first.len();
    if let Some(v) = coords.iter().find(|v| v.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: v.len(),
        });
    }
    let gens: Vec<DVector<f64>> = normalized_nonzero(coords)
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    let r = rank(&gens, tol::SPAN);
    if r < k {
        return Err(Error::NotFullDimensional { rank: r, dim: k });
    }
    let rays = DoubleDescription::new(&gens).run();
    Ok(canonical_rows(rays, k))
}

fn canonical_rows(rows: Vec<DVector<f64>>, k: usize) -> DMatrix<f64> {
    let mut rows: Vec<DVector<f64>> = rows
        .into_iter()
        .filter_map(|r| {
            let n = r.norm();
            (n > tol::FACET).then(|| r / n)
        })
        .collect();
    rows.sort_by(lex_cmp);
    rows.dedup_by(|a, b| (&*a - &*b).amax() < tol::FACET);
    let mut out = DMatrix::zeros(rows.len(), k);
    for (i, r) in rows.iter().enumerate() {
        out.row_mut(i).copy_from(&r.transpose());
    }
    out
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// Fixed-width bitset over constraint indices.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn is_subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    v: DVector<f64>,
    zeros: Bits,
}

/// Incremental ray insertion for `{h : G h ≥ 0}`.
struct DoubleDescription<'a> {
    gens: &'a [DVector<f64>],
    k: usize,
}

impl<'a> DoubleDescription<'a> {
    fn new(gens: &'a [DVector<f64>]) -> Self {
        Self {
            gens,
            k: gens[0].len(),
        }
    }

    /// Greedy pivoted Gram-Schmidt: the `k` generators that are furthest
    /// from the span of the ones already chosen.
    fn initial_rows(&self) -> Vec<usize> {
        let mut chosen = Vec::with_capacity(self.k);
        let mut residuals: Vec<DVector<f64>> = self.gens.to_vec();
        for _ in 0..self.k {
            let (best, _) = residuals
                .iter()
                .enumerate()
                .filter(|(i, _)| !chosen.contains(i))
                .map(|(i, r)| (i, r.norm()))
                .fold(
                    (usize::MAX, -1.0),
                    |acc, x| if x.1 > acc.1 { x } else { acc },
                );
            chosen.push(best);
            let q = residuals[best].normalize();
            for r in residuals.iter_mut() {
                let proj = q.dot(r);
                r.axpy(-proj, &q, 1.0);
            }
        }
        chosen
    }

    fn zero_set(&self, v: &DVector<f64>, processed: &[usize]) -> Bits {
        let mut z = Bits::new(self.gens.len());
        for &i in processed {
            if self.gens[i].dot(v).abs() <= tol::FACET {
                z.set(i);
            }
        }
        z
    }

    fn run(&self) -> Vec<DVector<f64>> {
        let k = self.k;
        let init = self.initial_rows();
        let a = DMatrix::from_rows(
            &init
                .iter()
                .map(|&i| self.gens[i].transpose())
                .collect::<Vec<_>>(),
        );
        let inv = a
            .try_inverse()
            .expect("initial rows are linearly independent");
        let mut processed = init.clone();
        let mut rays: Vec<Ray> = (0..k)
            .map(|j| {
                let v = inv.column(j).normalize();
                let zeros = self.zero_set(&v, &processed);
                Ray { v, zeros }
            })
            .collect();

        for c in 0..self.gens.len() {
            if init.contains(&c) {
                continue;
            }
            let g = &self.gens[c];
            let vals: Vec<f64> = rays.iter().map(|r| g.dot(&r.v)).collect();
            let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -tol::FACET).collect();
            if neg.is_empty() {
                for (r, &val) in rays.iter_mut().zip(&vals) {
                    if val.abs() <= tol::FACET {
                        r.zeros.set(c);
                    }
                }
                processed.push(c);
                continue;
            }
            let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > tol::FACET).collect();

            let mut created = Vec::new();
            for &p in &pos {
                for &n in &neg {
                    let common = rays[p].zeros.and(&rays[n].zeros);
                    if common.count() + 2 < k {
                        continue;
                    }
                    let adjacent = rays
                        .iter()
                        .enumerate()
                        .all(|(t, r)| t == p || t == n || !common.is_subset_of(&r.zeros));
                    if !adjacent {
                        continue;
                    }
                    let v = &rays[n].v * vals[p] - &rays[p].v * vals[n];
                    let norm = v.norm();
                    if norm <= tol::FACET {
                        continue;
                    }
                    let mut zeros = common;
                    zeros.set(c);
                    created.push(Ray { v: v / norm, zeros });
                }
            }

            let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
            for (i, mut r) in rays.into_iter().enumerate() {
                if vals[i] < -tol::FACET {
                    continue;
                }
                if vals[i].abs() <= tol::FACET {
                    r.zeros.set(c);
                }
                next.push(r);
            }
            next.extend(created);
            rays = next;
            processed.push(c);
        }
        rays.into_iter().map(|r| r.v).collect()
    }
}

/// `H v` evaluated row by row.
pub fn facet_values(h: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    h * v
}

/// One facet per line, comma-separated.
pub fn write_facets_csv(h: &DMatrix<f64>, mut out: impl Write) -> Result<()> {
    for row in h.row_iter() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Accessible fragment: span coordinates, inclusion maps and facet matrices
/// of both cones.
#[derive(Debug, Clone)]
pub struct AccessibleFragment {
    pub state_coords: Vec<DVector<f64>>,
    pub effect_coords: Vec<DVector<f64>>,
    /// `I_Ω`: `D × dim span(Ω)`.
    pub state_inclusion: DMatrix<f64>,
    /// `I_E`: `D × dim span(E)`.
    pub effect_inclusion: DMatrix<f64>,
    /// `H_Ω`: facets × `dim span(Ω)`.
    pub state_facets: DMatrix<f64>,
    /// `H_E`: facets × `dim span(E)`.
    pub effect_facets: DMatrix<f64>,
    /// The unit effect in effect-span coordinates.
    pub unit_coords: DVector<f64>,
}

impl AccessibleFragment {
    pub fn new(frag: &GptFragment) -> Result<Self> {
        Self::with_execution(frag, Execution::default())
    }

    pub fn with_execution(frag: &GptFragment, exec: Execution) -> Result<Self> {
        let states: Vec<DVector<f64>> = frag.states.iter().map(|s| s.coords().clone()).collect();
        let effects: Vec<DVector<f64>> = frag.effects.iter().map(|e| e.coords().clone()).collect();
        let side = |vectors: &[DVector<f64>]| -> Result<(SpanBasis, DMatrix<f64>)> {
            let span = span_basis(vectors, tol::SPAN)?;
            let extreme = extreme_rays(&span.coords)?;
            let gens: Vec<DVector<f64>> = extreme.iter().map(|&i| span.coords[i].clone()).collect();
            let h = cone_facets(&gens)?;
            Ok((span, h))
        };
        let (s, e) = exec.join(|| side(&states), || side(&effects));
        let (state_span, state_facets) = s?;
        let (effect_span, effect_facets) = e?;
        let unit_coords = effect_span.inclusion.tr_mul(frag.unit.coords());
        Ok(Self {
            state_coords: state_span.coords,
            effect_coords: effect_span.coords,
            state_inclusion: state_span.inclusion,
            effect_inclusion: effect_span.inclusion,
            state_facets,
            effect_facets,
            unit_coords,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.state_inclusion.ncols()
    }

    pub fn effect_dim(&self) -> usize {
        self.effect_inclusion.ncols()
    }

    /// `I_Eᵀ I_Ω`: the probability bilinear form in span coordinates.
    pub fn pairing(&self) -> DMatrix<f64> {
        self.effect_inclusion.tr_mul(&self.state_inclusion)
    }
}
