//! Independent oracles shared by the integration tests. Nothing here calls the
//! solver internals being checked.

#![allow(dead_code)]

use fle_core::{DMatrix, DVector, FeasibleRegion, Objective};
use rand::Rng;

/// Minimizer of `1/2 x^T Q x + c^T x` on `{C x = d}` from the KKT system, or
/// `None` when the system is inconsistent.
pub fn affine_qp(q: &DMatrix<f64>, c: &DVector<f64>, rows: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let n = q.nrows();
    let k = rows.nrows();
    let mut kkt = DMatrix::zeros(n + k, n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(q);
    if k > 0 {
        kkt.view_mut((0, n), (n, k)).copy_from(&rows.transpose());
        kkt.view_mut((n, 0), (k, n)).copy_from(rows);
    }
    let mut b = DVector::zeros(n + k);
    b.rows_mut(0, n).copy_from(&(-c));
    b.rows_mut(n, k).copy_from(rhs);
    let sol = kkt.clone().svd(true, true).solve(&b, 1e-11).ok()?;
    let residual = (&kkt * &sol - &b).norm();
    (residual <= 1e-8 * (1.0 + b.norm())).then(|| sol.rows(0, n).into_owned())
}

/// Global minimizer of a convex quadratic over `region` by enumerating every
/// assignment of each inequality row to free, lower or upper. Exponential in
/// the number of rows.
pub fn enumerate_qp(q: &DMatrix<f64>, c: &DVector<f64>, region: &FeasibleRegion) -> Option<(DVector<f64>, f64)> {
    let n = region.dim();
    let m_i = region.num_inequalities();
    let value = |x: &DVector<f64>| 0.5 * x.dot(&(q * x)) + c.dot(x);
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut state = vec![0u8; m_i];
    loop {
        let mut rows: Vec<DVector<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        let mut usable = true;
        for r in 0..region.num_equalities() {
            rows.push(region.eq_matrix().row(r).transpose());
            rhs.push(region.eq_rhs()[r]);
        }
        for (i, &s) in state.iter().enumerate() {
            let bound = match s {
                0 => continue,
                1 => region.lower()[i],
                _ => region.upper()[i],
            };
            if !bound.is_finite() {
                usable = false;
                break;
            }
            rows.push(region.ineq_matrix().row(i).transpose());
            rhs.push(bound);
        }
        if usable {
            let matrix = if rows.is_empty() {
                DMatrix::zeros(0, n)
            } else {
                DMatrix::from_columns(&rows).transpose()
            };
            if let Some(x) = affine_qp(q, c, &matrix, &DVector::from_vec(rhs)) {
                if region.violation(&x) <= 1e-9 {
                    let v = value(&x);
                    if best.as_ref().is_none_or(|(_, b)| v < *b) {
                        best = Some((x, v));
                    }
                }
            }
        }
        // Next assignment in base 3.
        let mut i = 0;
        loop {
            if i == m_i {
                return best;
            }
            state[i] += 1;
            if state[i] < 3 {
                break;
            }
            state[i] = 0;
            i += 1;
        }
    }
}

/// Euclidean projection by active-set enumeration.
pub fn brute_force_projection(region: &FeasibleRegion, z: &DVector<f64>) -> DVector<f64> {
    let n = region.dim();
    enumerate_qp(&DMatrix::identity(n, n), &(-z), region)
        .expect("nonempty region has a projection")
        .0
}

/// Nonnegative least squares `min ||A l - b||, l >= 0` (Lawson and Hanson).
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    let mut x = DVector::zeros(k);
    let mut passive = vec![false; k];
    let tol = 1e-12 * (1.0 + a.norm() * b.norm());
    for _ in 0..(3 * k + 10) {
        let w = a.tr_mul(&(b - a * &x));
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let cols: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
            let z_sub = sub.clone().svd(true, true).solve(b, 1e-13).expect("svd solve");
            if z_sub.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (c, &i) in cols.iter().enumerate() {
                    x[i] = z_sub[c];
                }
                break;
            }
            let mut step = f64::INFINITY;
            for (c, &i) in cols.iter().enumerate() {
                if z_sub[c] <= 0.0 {
                    step = step.min(x[i] / (x[i] - z_sub[c]));
                }
            }
            for (c, &i) in cols.iter().enumerate() {
                x[i] += step * (z_sub[c] - x[i]);
                if x[i] <= 1e-15 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    x
}

/// Matrix whose columns are `vectors` (dimension `dim` when empty).
pub fn columns(vectors: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    if vectors.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(vectors)
    }
}

/// Hessian and linear term of a quadratic objective recovered from its
/// analytic gradient, or `None` when the objective is not quadratic.
pub fn quadratic_model(f: &dyn Objective, n: usize) -> Option<(DMatrix<f64>, DVector<f64>, f64)> {
    let zero = DVector::zeros(n);
    let c = f.gradient(&zero)?;
    let k = f.value(&zero);
    let mut q = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        q.set_column(j, &(f.gradient(&e)? - &c));
    }
    let q = (&q + q.transpose()) * 0.5;
    for s in 1..=5 {
        let x = DVector::from_fn(n, |i, _| ((i * 7 + s * 3) % 11) as f64 / 5.0 - 1.0);
        let model = 0.5 * x.dot(&(&q * &x)) + c.dot(&x) + k;
        if (model - f.value(&x)).abs() > 1e-9 * (1.0 + model.abs()) {
            return None;
        }
    }
    Some((q, c, k))
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(rand_distr::StandardNormal))
}

/// Random region with `n <= 4`, `m <= 2` (and `m < n`), `m_I <= 5` built
/// around a feasible reference point.
pub fn random_region<R: Rng>(rng: &mut R) -> FeasibleRegion {
    loop {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(0..=2.min(n - 1));
        let m_i = rng.random_range(0..=5);
        let reference = gaussian_vector(rng, n);
        let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let b = &a * &reference;
        let a_i = DMatrix::from_fn(m_i, n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let at_ref = &a_i * &reference;
        let mut lower = DVector::zeros(m_i);
        let mut upper = DVector::zeros(m_i);
        for i in 0..m_i {
            lower[i] = at_ref[i] - rng.random_range(0.0..1.5);
            upper[i] = at_ref[i] + rng.random_range(0.0..1.5);
            match rng.random_range(0..4) {
                0 => lower[i] = f64::NEG_INFINITY,
                1 => upper[i] = f64::INFINITY,
                _ => {}
            }
        }
        if let Ok(region) = FeasibleRegion::new(a, b, a_i, lower, upper, reference) {
            return region;
        }
    }
}

/// Feasible point near `center` obtained by projecting a perturbation.
pub fn feasible_near<R: Rng>(rng: &mut R, region: &FeasibleRegion, center: &DVector<f64>, scale: f64) -> DVector<f64> {
    let z = center + gaussian_vector(rng, center.len()) * scale;
    region.project_from(&z, center).unwrap_or_else(|e| e.fallback)
}
