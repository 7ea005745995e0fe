//! Approximate active sets, normal cones and tangent-cone generators.
//!
//! The tangent cone `T = {v : w^T v <= 0 for every normal w}` splits into its
//! lineality space (the orthogonal complement of the span `S` of the normals)
//! and the pointed cone `T ∩ S`. The pointed part is converted from its
//! inequality description to extreme rays with an incremental double
//! description method run in coordinates of `S`.

use nalgebra::{DMatrix, DVector};

use super::{null_space_basis, FeasibleRegion, GeometryError, ACTIVE_SET_SLACK, FEASIBILITY_TOL};

/// Indices of inequality rows approximately active at their upper and lower
/// bounds for the step size `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
    pub xi: f64,
}

impl ActiveSet {
    pub fn is_empty(&self) -> bool {
        self.upper.is_empty() && self.lower.is_empty()
    }
}

/// Generators of an approximate tangent cone in reduced coordinates:
/// `T = span(lineality) + cone(pointed)`.
#[derive(Debug, Clone, Default)]
pub struct ConeGenerators {
    /// Orthonormal basis of the lineality space.
    pub lineality: Vec<DVector<f64>>,
    /// Unit extreme rays of the pointed part.
    pub pointed: Vec<DVector<f64>>,
}

impl ConeGenerators {
    pub fn is_empty(&self) -> bool {
        self.lineality.is_empty() && self.pointed.is_empty()
    }
}

pub(super) fn approx_active_sets(
    region: &FeasibleRegion,
    x: &DVector<f64>,
    xi: f64,
) -> Result<ActiveSet, GeometryError> {
    if x.len() != region.dim() {
        return Err(GeometryError::Dimension(format!(
            "point has length {}, expected {}",
            x.len(),
            region.dim()
        )));
    }
    let violation = region.violation(x);
    if !(violation <= FEASIBILITY_TOL) {
        return Err(GeometryError::InfeasiblePoint(violation));
    }
    let reduced = region.to_reduced(x);
    let offset = region.ineq_matrix() * region.reference();
    let moved = region.reduced_rows() * &reduced;
    let mut active = ActiveSet {
        upper: Vec::new(),
        lower: Vec::new(),
        xi,
    };
    for i in 0..region.num_inequalities() {
        let radius = xi * region.reduced_normal_norm(i) + ACTIVE_SET_SLACK;
        let value = offset[i] + moved[i];
        let (l, u) = (region.lower()[i], region.upper()[i]);
        if u.is_finite() && (u - value).abs() <= radius {
            active.upper.push(i);
        }
        if l.is_finite() && (l - value).abs() <= radius {
            active.lower.push(i);
        }
    }
    Ok(active)
}

pub(super) fn normal_cone_generators(region: &FeasibleRegion, active: &ActiveSet) -> Vec<DVector<f64>> {
    let up = active.upper.iter().map(|&i| region.reduced_normal(i));
    let lo = active.lower.iter().map(|&i| -region.reduced_normal(i));
    up.chain(lo).collect()
}

const RAY_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-9;

/// Lineality basis and pointed generators of the polar of `cone(normals)` in
/// `R^dim`.
pub fn tangent_cone_generators(normals: &[DVector<f64>], dim: usize) -> Result<ConeGenerators, GeometryError> {
    let mut unit = Vec::with_capacity(normals.len());
    for (i, w) in normals.iter().enumerate() {
        if w.len() != dim {
            return Err(GeometryError::Dimension(format!(
                "normal {i} has length {}, expected {dim}",
                w.len()
            )));
        }
        let norm = w.norm();
        if !(norm > 1e-14) {
            return Err(GeometryError::ZeroNormal(i));
        }
        unit.push(w / norm);
    }
    if unit.is_empty() || dim == 0 {
        return Ok(ConeGenerators {
            lineality: (0..dim)
                .map(|i| DVector::from_fn(dim, |r, _| (r == i) as u8 as f64))
                .collect(),
            pointed: Vec::new(),
        });
    }

    let span = span_basis(&unit, dim);
    let r = span.ncols();
    let lineality = null_space_basis(&span.transpose())
        .expect("orthonormal rows have full rank")
        .column_iter()
        .map(|c| c.into_owned())
        .collect();

    // Normals expressed in coordinates of S.
    let reduced: Vec<DVector<f64>> = unit
        .iter()
        .map(|w| {
            let v = span.tr_mul(w);
            let n = v.norm();
            v / n
        })
        .collect();
    let rays = double_description(&reduced, r);
    let mut pointed: Vec<DVector<f64>> = Vec::with_capacity(rays.len());
    for ray in rays {
        let ray = polish_ray(&reduced, ray, r);
        let d = &span * ray;
        let d = &d / d.norm();
        if pointed.iter().all(|p| p.dot(&d) < 1.0 - 1e-12) {
            pointed.push(d);
        }
    }
    Ok(ConeGenerators { lineality, pointed })
}

/// Orthonormal basis (columns) of the span of `vectors`.
fn span_basis(vectors: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, vectors.len(), |r, c| vectors[c][r]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > RANK_TOL * smax)
        .collect();
    DMatrix::from_fn(dim, keep.len(), |r, c| u[(r, keep[c])])
}

fn rank_of_rows(rows: &[DVector<f64>], subset: &[usize], dim: usize) -> usize {
    if subset.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(subset.len(), dim, |r, c| rows[subset[r]][c]);
    let sv = m.singular_values();
    let smax = sv.max();
    sv.iter().filter(|&&s| s > RANK_TOL * smax.max(1.0)).count()
}

struct Ray {
    v: DVector<f64>,
    // Indices of processed constraints that are tight at this ray, sorted.
    zero: Vec<usize>,
}

/// Extreme rays of the pointed cone `{c in R^r : a_i^T c <= 0}`, where the
/// unit rows `a_i` span `R^r`.
fn double_description(rows: &[DVector<f64>], r: usize) -> Vec<DVector<f64>> {
    // Greedy choice of r independent rows for the initial simplicial cone.
    let mut basis: Vec<usize> = Vec::with_capacity(r);
    let mut ortho: Vec<DVector<f64>> = Vec::with_capacity(r);
    for (i, a) in rows.iter().enumerate() {
        if basis.len() == r {
            break;
        }
        let mut res = a.clone();
        for q in &ortho {
            res -= q * q.dot(&res);
        }
        let n = res.norm();
        if n > RANK_TOL {
            ortho.push(res / n);
            basis.push(i);
        }
    }
    debug_assert_eq!(basis.len(), r);
    let m = DMatrix::from_fn(r, r, |i, j| rows[basis[i]][j]);
    let inv = m.try_inverse().expect("independent rows give an invertible matrix");
    let mut rays: Vec<Ray> = (0..r)
        .map(|k| {
            let v = -inv.column(k).into_owned();
            let v = &v / v.norm();
            let mut zero: Vec<usize> = basis.iter().copied().filter(|&b| b != basis[k]).collect();
            zero.sort_unstable();
            Ray { v, zero }
        })
        .collect();

    for (j, a) in rows.iter().enumerate() {
        if basis.contains(&j) {
            continue;
        }
        let values: Vec<f64> = rays.iter().map(|ray| a.dot(&ray.v)).collect();
        let mut next = Vec::with_capacity(rays.len());
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k] > RAY_TOL).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| values[k] < -RAY_TOL).collect();
        for &p in &pos {
            for &q in &neg {
                let common = intersect(&rays[p].zero, &rays[q].zero);
                if r < 2 || common.len() + 2 < r || rank_of_rows(rows, &common, r) != r - 2 {
                    continue;
                }
                let v = values[p] * &rays[q].v - values[q] * &rays[p].v;
                let v = &v / v.norm();
                let mut zero = common;
                zero.push(j);
                zero.sort_unstable();
                next.push(Ray { v, zero });
            }
        }
        for (k, ray) in rays.into_iter().enumerate() {
            if values[k] < -RAY_TOL {
                next.push(ray);
            } else if values[k] <= RAY_TOL {
                let mut ray = ray;
                ray.zero.push(j);
                ray.zero.sort_unstable();
                next.push(ray);
            }
        }
        rays = next;
        if rays.is_empty() {
            break;
        }
    }
    rays.into_iter().map(|ray| ray.v).collect()
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Recomputes an extreme ray as the null vector of its tight rows, which
/// removes the rounding accumulated by repeated combinations.
fn polish_ray(rows: &[DVector<f64>], ray: DVector<f64>, r: usize) -> DVector<f64> {
    let worst = |v: &DVector<f64>| rows.iter().map(|a| a.dot(v)).fold(f64::NEG_INFINITY, f64::max);
    if r < 2 {
        return ray;
    }
    let tight: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].dot(&ray).abs() <= 1e-8).collect();
    if rank_of_rows(rows, &tight, r) != r - 1 {
        return ray;
    }
    let m = DMatrix::from_fn(tight.len(), r, |i, c| rows[tight[i]][c]);
    let eig = m.tr_mul(&m).symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let mut v = eig.eigenvectors.column(k).into_owned();
    if v.dot(&ray) < 0.0 {
        v = -v;
    }
    v /= v.norm();
    if worst(&v) <= worst(&ray).max(0.0) {
        v
    } else {
        ray
    }
}
