//! Shared test helpers: an exhaustive facet oracle and random cone
//! generators.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Facets of `Cone(gens)` by brute force: every `(k−1)`-subset of
/// generators spanning a hyperplane contributes its normal if all
/// generators lie on one side. Rows are unit-norm and deduplicated.
pub fn brute_force_facets(gens: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let k = gens[0].len();
    let mut found: Vec<DVector<f64>> = Vec::new();
    for subset in combinations(gens.len(), k - 1) {
        let Some(normal) = hyperplane_normal(gens, &subset, k) else {
            continue;
        };
        let values: Vec<f64> = gens.iter().map(|g| normal.dot(g)).collect();
        let oriented = if values.iter().all(|&v| v >= -1e-9) {
            normal
        } else if values.iter().all(|&v| v <= 1e-9) {
            -normal
        } else {
            continue;
        };
        if !found.iter().any(|f| (f - &oriented).amax() < 1e-7) {
            found.push(oriented);
        }
    }
    found
}

/// Unit normal to the span of `gens[subset]` when it has dimension `k−1`.
fn hyperplane_normal(gens: &[DVector<f64>], subset: &[usize], k: usize) -> Option<DVector<f64>> {
    if k == 1 {
        return Some(DVector::from_element(1, 1.0));
    }
    let m = DMatrix::from_fn(subset.len(), k, |r, c| gens[subset[r]][c]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    if svd.singular_values[order[k - 2]] < 1e-9 {
        return None;
    }
    // Null vector: orthogonal complement of the row space via projection.
    let rows: Vec<DVector<f64>> = order[..k - 1]
        .iter()
        .map(|&i| v_t.row(i).transpose())
        .collect();
    (0..k).find_map(|axis| {
        let mut v = DVector::zeros(k);
        v[axis] = 1.0;
        for r in &rows {
            v -= r * r.dot(&v);
        }
        (v.norm() > 1e-6).then(|| v.normalize())
    })
}

pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// Pointed, full-dimensional random cone in `R^k` with `count` generators:
/// first coordinate in `[0.5, 1.5]`, the rest in `[−1, 1]`.
pub fn random_cone(rng: &mut ChaCha8Rng, k: usize, count: usize) -> Vec<DVector<f64>> {
    loop {
        let gens: Vec<DVector<f64>> = (0..count)
            .map(|_| {
                DVector::from_fn(k, |i, _| {
                    if i == 0 {
                        rng.random_range(0.5..1.5)
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
            })
            .collect();
        if contextlab::geometry::rank(&gens, 1e-9) == k {
            return gens;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Same rows up to order, within `tol` in max-abs.
pub fn same_row_set(h: &DMatrix<f64>, oracle: &[DVector<f64>], tol: f64) -> bool {
    h.nrows() == oracle.len()
        && h.row_iter().all(|row| {
            let row = row.transpose();
            oracle.iter().any(|o| (o - &row).amax() < tol)
        })
}
