//! The feasible polyhedron `{x : Ax = b, l <= A_I x <= u}` and the geometric
//! machinery built on it: projection, approximate active sets, normal and
//! tangent cone generators, and polling-direction sampling.
//!
//! Points are stored in the original `R^n` coordinates. Cone computations run
//! in the reduced coordinates `x = W x~ + x_ref`, where the columns of `W` form
//! an orthonormal basis of the null space of `A`.

mod cones;
pub mod format;
mod polling;
mod projection;

pub use cones::{tangent_cone_generators, ActiveSet, ConeGenerators};
pub use polling::sample_polling_directions;
pub use projection::ProjectionError;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Absolute tolerance used when checking that a point satisfies the constraints.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// Slack added to the right-hand side of the approximate active-set test so
/// that points exactly on a bound are classified deterministically.
pub const ACTIVE_SET_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("equality matrix is rank deficient: rank {rank} with {rows} rows")]
    RankDeficient { rank: usize, rows: usize },
    #[error("inequality row {row}: lower bound {lower} is not below upper bound {upper}")]
    EmptyInterval { row: usize, lower: f64, upper: f64 },
    #[error("inequality row {0} has a vanishing reduced normal (redundant constraint)")]
    RedundantRow(usize),
    #[error("reference point is infeasible (violation {0:e})")]
    InfeasibleReference(f64),
    #[error("point is infeasible (violation {0:e})")]
    InfeasiblePoint(f64),
    #[error("normal generator {0} is the zero vector")]
    ZeroNormal(usize),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

/// Orthonormal basis of the null space of `a` (an `m x n` matrix).
///
/// Returns the `n x n` identity when `m = 0`. Fails when `a` does not have
/// full row rank.
pub fn null_space_basis(a: &DMatrix<f64>) -> Result<DMatrix<f64>, GeometryError> {
    let (m, n) = a.shape();
    if m == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    if m > n {
        return Err(GeometryError::RankDeficient { rank: n, rows: m });
    }
    let rank = numerical_rank(a);
    if rank < m {
        return Err(GeometryError::RankDeficient { rank, rows: m });
    }
    // Householder QR of A^T; the trailing n - m columns of the full Q span ker(A).
    let qr = a.transpose().qr();
    let mut q_t = DMatrix::<f64>::identity(n, n);
    qr.q_tr_mul(&mut q_t);
    Ok(q_t.rows(m, n - m).transpose())
}

/// Rank from singular values with the usual `max(m, n) * eps * sigma_max` cutoff.
pub(crate) fn numerical_rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    let cutoff = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * smax;
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// The feasible set `{x in R^n : Ax = b, l <= A_I x <= u}` together with a null
/// space basis `W` of `A` and a feasible reference point.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct FeasibleRegion {
    eq_matrix: DMatrix<f64>,
    eq_rhs: DVector<f64>,
    ineq_matrix: DMatrix<f64>,
    lower: DVector<f64>,
    upper: DVector<f64>,
    basis: DMatrix<f64>,
    reference: DVector<f64>,
    // Row i is (W^T A_I^T e_i)^T.
    reduced_rows: DMatrix<f64>,
    reduced_row_norms: Vec<f64>,
}

impl FeasibleRegion {
    pub fn new(
        eq_matrix: DMatrix<f64>,
        eq_rhs: DVector<f64>,
        ineq_matrix: DMatrix<f64>,
        lower: DVector<f64>,
        upper: DVector<f64>,
        reference: DVector<f64>,
    ) -> Result<Self, GeometryError> {
        let n = reference.len();
        if eq_matrix.ncols() != n && eq_matrix.nrows() > 0 {
            return Err(GeometryError::Dimension(format!(
                "equality matrix has {} columns, expected {n}",
                eq_matrix.ncols()
            )));
        }
        let eq_matrix = if eq_matrix.nrows() == 0 {
            DMatrix::zeros(0, n)
        } else {
            eq_matrix
        };
        if eq_rhs.len() != eq_matrix.nrows() {
            return Err(GeometryError::Dimension(format!(
                "equality right-hand side has length {}, expected {}",
                eq_rhs.len(),
                eq_matrix.nrows()
            )));
        }
        let ineq_matrix = if ineq_matrix.nrows() == 0 {
            DMatrix::zeros(0, n)
        } else {
            ineq_matrix
        };
        if ineq_matrix.ncols() != n {
            return Err(GeometryError::Dimension(format!(
                "inequality matrix has {} columns, expected {n}",
                ineq_matrix.ncols()
            )));
        }
        let m_i = ineq_matrix.nrows();
        if lower.len() != m_i || upper.len() != m_i {
            return Err(GeometryError::Dimension(format!(
                "bounds have lengths {} and {}, expected {m_i}",
                lower.len(),
                upper.len()
            )));
        }
        for row in 0..m_i {
            let (l, u) = (lower[row], upper[row]);
            if l.is_nan() || u.is_nan() || l >= u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(GeometryError::EmptyInterval {
                    row,
                    lower: l,
                    upper: u,
                });
            }
        }

        let basis = null_space_basis(&eq_matrix)?;
        let reduced_rows = &ineq_matrix * &basis;
        let reduced_row_norms: Vec<f64> = reduced_rows.row_iter().map(|r| r.norm()).collect();
        for (row, &norm) in reduced_row_norms.iter().enumerate() {
            let scale = ineq_matrix.row(row).norm();
            if norm <= 1e-12 * scale.max(1.0) {
                return Err(GeometryError::RedundantRow(row));
            }
        }

        let region = Self {
            eq_matrix,
            eq_rhs,
            ineq_matrix,
            lower,
            upper,
            basis,
            reference,
            reduced_rows,
            reduced_row_norms,
        };
        let violation = region.violation(&region.reference);
        if !(violation <= FEASIBILITY_TOL) {
            return Err(GeometryError::InfeasibleReference(violation));
        }
        Ok(region)
    }

    /// Box `lower <= x <= upper`; infinite entries are allowed but each
    /// coordinate must have at least one finite bound.
    pub fn bounds(lower: DVector<f64>, upper: DVector<f64>, reference: DVector<f64>) -> Result<Self, GeometryError> {
        let n = reference.len();
        Self::new(
            DMatrix::zeros(0, n),
            DVector::zeros(0),
            DMatrix::identity(n, n),
            lower,
            upper,
            reference,
        )
    }

    /// `R^n` without constraints.
    pub fn unconstrained(n: usize) -> Self {
        Self::new(
            DMatrix::zeros(0, n),
            DVector::zeros(0),
            DMatrix::zeros(0, n),
            DVector::zeros(0),
            DVector::zeros(0),
            DVector::zeros(n),
        )
        .expect("R^n is a valid region")
    }

    pub fn dim(&self) -> usize {
        self.reference.len()
    }

    pub fn num_equalities(&self) -> usize {
        self.eq_matrix.nrows()
    }

    pub fn num_inequalities(&self) -> usize {
        self.ineq_matrix.nrows()
    }

    /// Dimension `n - m` of the reduced space.
    pub fn reduced_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn eq_matrix(&self) -> &DMatrix<f64> {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &DVector<f64> {
        &self.eq_rhs
    }

    pub fn ineq_matrix(&self) -> &DMatrix<f64> {
        &self.ineq_matrix
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    /// The null-space basis `W`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn reference(&self) -> &DVector<f64> {
        &self.reference
    }

    /// `W^T A_I^T e_i`, the reduced normal of inequality row `i`.
    pub fn reduced_normal(&self, row: usize) -> DVector<f64> {
        self.reduced_rows.row(row).transpose()
    }

    pub fn reduced_normal_norm(&self, row: usize) -> f64 {
        self.reduced_row_norms[row]
    }

    pub(crate) fn reduced_rows(&self) -> &DMatrix<f64> {
        &self.reduced_rows
    }

    /// Largest constraint violation at `x` (equality residuals included).
    pub fn violation(&self, x: &DVector<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        if self.num_equalities() > 0 {
            let r = &self.eq_matrix * x - &self.eq_rhs;
            worst = worst.max(r.amax());
        }
        if self.num_inequalities() > 0 {
            let s = &self.ineq_matrix * x;
            for i in 0..s.len() {
                worst = worst.max(self.lower[i] - s[i]).max(s[i] - self.upper[i]);
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        worst
    }

    pub fn is_feasible(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.dim() && self.violation(x) <= tol
    }

    /// Reduced coordinates `W^T (x - x_ref)`.
    pub fn to_reduced(&self, x: &DVector<f64>) -> DVector<f64> {
        self.basis.tr_mul(&(x - &self.reference))
    }

    /// Full coordinates `x_ref + W t`.
    pub fn from_reduced(&self, t: &DVector<f64>) -> DVector<f64> {
        &self.reference + &self.basis * t
    }

    /// Lifts a reduced direction: `W d`.
    pub fn lift(&self, d: &DVector<f64>) -> DVector<f64> {
        &self.basis * d
    }

    /// Copy of this region with some inequality rows and/or all equality rows
    /// removed. The reference point is kept.
    pub fn without_rows(&self, drop_equalities: &[usize], drop_inequalities: &[usize]) -> Result<Self, GeometryError> {
        let n = self.dim();
        let keep_eq: Vec<usize> = (0..self.num_equalities())
            .filter(|i| !drop_equalities.contains(i))
            .collect();
        let keep_in: Vec<usize> = (0..self.num_inequalities())
            .filter(|i| !drop_inequalities.contains(i))
            .collect();
        let eq = DMatrix::from_fn(keep_eq.len(), n, |r, c| self.eq_matrix[(keep_eq[r], c)]);
        let rhs = DVector::from_fn(keep_eq.len(), |r, _| self.eq_rhs[keep_eq[r]]);
        let ineq = DMatrix::from_fn(keep_in.len(), n, |r, c| self.ineq_matrix[(keep_in[r], c)]);
        let lo = DVector::from_fn(keep_in.len(), |r, _| self.lower[keep_in[r]]);
        let up = DVector::from_fn(keep_in.len(), |r, _| self.upper[keep_in[r]]);
        Self::new(eq, rhs, ineq, lo, up, self.reference.clone())
    }

    /// Whether inequality row `i` is a simple bound on a single variable.
    pub fn is_bound_row(&self, row: usize) -> bool {
        self.ineq_matrix.row(row).iter().filter(|v| **v != 0.0).count() == 1
    }

    /// Approximate active sets `I_u(x, xi)` and `I_l(x, xi)`.
    pub fn approx_active_sets(&self, x: &DVector<f64>, xi: f64) -> Result<ActiveSet, GeometryError> {
        cones::approx_active_sets(self, x, xi)
    }

    /// Generators of the approximate normal cone for `active`.
    pub fn normal_cone_generators(&self, active: &ActiveSet) -> Vec<DVector<f64>> {
        cones::normal_cone_generators(self, active)
    }

    /// Euclidean projection onto the region, starting the active-set solver
    /// from the reference point.
    pub fn project(&self, z: &DVector<f64>) -> Result<DVector<f64>, ProjectionError> {
        projection::project(self, z, None)
    }

    /// Euclidean projection warm-started from a feasible point `start`
    /// (typically the current iterate). Falls back to the reference point when
    /// `start` is not feasible.
    pub fn project_from(&self, z: &DVector<f64>, start: &DVector<f64>) -> Result<DVector<f64>, ProjectionError> {
        projection::project(self, z, Some(start))
    }

    /// Criticality measure `||P(x - grad) - x||`.
    pub fn criticality_measure(&self, x: &DVector<f64>, gradient: &DVector<f64>) -> Result<f64, ProjectionError> {
        let p = self.project_from(&(x - gradient), x)?;
        Ok((p - x).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn null_space_of_empty_matrix_is_identity() {
        let w = null_space_basis(&DMatrix::zeros(0, 3)).unwrap();
        assert_eq!(w, DMatrix::identity(3, 3));
    }

    #[test]
    fn null_space_of_single_row() {
        let a = dmatrix![1.0, 1.0];
        let w = null_space_basis(&a).unwrap();
        assert_eq!(w.shape(), (2, 1));
        assert!((&a * &w).amax() < 1e-12);
        assert!((w.norm() - 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((w[0].abs() - s).abs() < 1e-12 && (w[0] + w[1]).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_matrix_is_rejected() {
        let a = dmatrix![1.0, 2.0, 3.0; 2.0, 4.0, 6.0];
        match null_space_basis(&a) {
            Err(GeometryError::RankDeficient { rank, rows }) => assert_eq!((rank, rows), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn region_rejects_infeasible_reference() {
        let err = FeasibleRegion::bounds(dvector![0.0, 0.0], dvector![1.0, 1.0], dvector![2.0, 0.5]);
        assert!(matches!(err, Err(GeometryError::InfeasibleReference(_))));
    }

    #[test]
    fn region_rejects_redundant_row() {
        // x1 + x2 = 1 makes the row x1 + x2 <= 2 constant on the feasible set.
        let err = FeasibleRegion::new(
            dmatrix![1.0, 1.0],
            dvector![1.0],
            dmatrix![1.0, 1.0],
            dvector![f64::NEG_INFINITY],
            dvector![2.0],
            dvector![0.5, 0.5],
        );
        assert!(matches!(err, Err(GeometryError::RedundantRow(0))));
    }

    #[test]
    fn region_rejects_crossed_bounds() {
        let err = FeasibleRegion::bounds(dvector![1.0], dvector![1.0], dvector![1.0]);
        assert!(matches!(err, Err(GeometryError::EmptyInterval { row: 0, .. })));
    }

    #[test]
    fn reduced_round_trip() {
        let region = FeasibleRegion::new(
            dmatrix![1.0, 1.0, 1.0],
            dvector![1.0],
            DMatrix::identity(3, 3),
            dvector![0.0, 0.0, 0.0],
            dvector![f64::INFINITY, f64::INFINITY, f64::INFINITY],
            dvector![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        )
        .unwrap();
        let x = dvector![0.2, 0.3, 0.5];
        let t = region.to_reduced(&x);
        assert!((region.from_reduced(&t) - x).amax() < 1e-14);
        assert_eq!(region.reduced_dim(), 2);
    }
}
