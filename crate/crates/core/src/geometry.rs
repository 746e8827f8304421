//! Convex-geometry kernel for simplest simplices in `R^(N-1)`.
//!
//! A simplest simplex with `N` affinely independent vertices is equivalently
//! described by its `N` facet hyperplanes. This module converts between the two
//! representations and provides the small primitives (volumes, distances, rank
//! checks) the estimator is built from. Vertex and facet indices are 0-based.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which a matrix is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// The hyperplane `{ x : normal . x = constant }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: DVector<f64>,
    pub constant: f64,
}

impl Hyperplane {
    pub fn new(normal: DVector<f64>, constant: f64) -> Result<Self> {
        if normal.norm() == 0.0 {
            return Err(Error::ZeroNormal);
        }
        Ok(Self { normal, constant })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }
}

/// `N` vertices in `R^(N-1)`.
///
/// Construction checks only the shape. Affine independence is a property of the
/// values and is tested where an operation needs it, so degenerate vertex sets can
/// still be represented (their volume is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVertices {
    vertices: Vec<DVector<f64>>,
}

impl SimplexVertices {
    pub fn new(vertices: Vec<DVector<f64>>) -> Result<Self> {
        let n = vertices.len();
        if n < 2 {
            return Err(Error::InvalidEndmemberCount(n));
        }
        for v in &vertices {
            if v.len() != n - 1 {
                return Err(Error::DimensionMismatch {
                    expected: n - 1,
                    got: v.len(),
                });
            }
        }
        Ok(Self { vertices })
    }

    /// Builds vertices from the columns of an `(N-1) x N` matrix.
    pub fn from_columns(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.column_iter().map(|c| c.into_owned()).collect())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<DVector<f64>> {
        self.vertices
    }

    /// The `(N-1) x N` matrix whose columns are the vertices.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.vertices)
    }

    pub fn is_affinely_independent(&self) -> bool {
        is_affinely_independent(&self.vertices, RANK_TOL)
    }
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// True when the smallest singular value is within `tol` of the largest.
fn is_rank_deficient(m: &DMatrix<f64>, tol: f64) -> bool {
    let sv = singular_values(m);
    if sv.is_empty() {
        return false;
    }
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max == 0.0 || min <= tol * max
}

/// Outward normal of the facet opposite vertex `i`.
///
/// The difference `alpha_j - alpha_i` (with `j` the smallest index other than `i`)
/// is projected onto the orthogonal complement of the facet's direction space,
/// which is spanned by `alpha_k - alpha_j` for `k` not in `{i, j}`. The result is
/// left unnormalized and satisfies `b . alpha_i < b . alpha_k` for every `k != i`.
pub fn normal_from_vertices(vertices: &[DVector<f64>], i: usize) -> Result<DVector<f64>> {
    let n = vertices.len();
    if n < 2 {
        return Err(Error::InvalidEndmemberCount(n));
    }
    if i >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: i,
        });
    }
    for v in vertices {
        if v.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                got: v.len(),
            });
        }
    }
    let j = if i == 0 { 1 } else { 0 };
    let diff = &vertices[j] - &vertices[i];
    let diff_norm = diff.norm();
    if diff_norm == 0.0 {
        return Err(Error::DegenerateSimplex);
    }

    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&k| k != i && k != j)
        .map(|k| &vertices[k] - &vertices[j])
        .collect();
    let normal = if cols.is_empty() {
        diff
    } else {
        let p = DMatrix::from_columns(&cols);
        if is_rank_deficient(&p, RANK_TOL) {
            return Err(Error::DegenerateSimplex);
        }
        let q = p.qr().q();
        let coeffs = q.tr_mul(&diff);
        diff - q * coeffs
    };
    if normal.norm() <= RANK_TOL * diff_norm {
        return Err(Error::DegenerateSimplex);
    }
    Ok(normal)
}

/// Facet normal from `N-1` points on the facet, using the origin as the opposite vertex.
///
/// The zero vector is inserted at position `i` and the result passed through
/// [`normal_from_vertices`]. When the points lie on a facet of a simplex whose
/// interior contains the origin, the returned vector points away from the origin.
pub fn normal_from_points_with_origin(points: &[DVector<f64>], i: usize) -> Result<DVector<f64>> {
    let dim = points.len();
    if i > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: i,
        });
    }
    let mut augmented = Vec::with_capacity(dim + 1);
    augmented.extend(points[..i].iter().cloned());
    augmented.push(DVector::zeros(dim));
    augmented.extend(points[i..].iter().cloned());
    normal_from_vertices(&augmented, i)
}

/// The `N` facet hyperplanes of a nondegenerate simplex, facet `i` opposite vertex `i`.
pub fn facet_hyperplanes(simplex: &SimplexVertices) -> Result<Vec<Hyperplane>> {
    let vs = simplex.vertices();
    (0..vs.len())
        .map(|i| {
            let normal = normal_from_vertices(vs, i)?;
            let j = if i == 0 { 1 } else { 0 };
            let constant = normal.dot(&vs[j]);
            Ok(Hyperplane { normal, constant })
        })
        .collect()
}

/// Solves `B_{-i} x = h_{-i}` for every `i`.
///
/// `B_{-i}` stacks the normals of every plane except plane `i` as rows, so the
/// solution is the vertex where all facets other than facet `i` meet.
pub fn reconstruct_vertices(planes: &[Hyperplane]) -> Result<SimplexVertices> {
    let n = planes.len();
    if n < 2 {
        return Err(Error::InvalidEndmemberCount(n));
    }
    for p in planes {
        if p.dim() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                got: p.dim(),
            });
        }
    }
    let vertices = (0..n)
        .map(|i| solve_facet_system(planes, i, 1.0))
        .collect::<Result<Vec<_>>>()?;
    SimplexVertices::new(vertices)
}

/// Vertex `i` of the simplex bounded by `planes`, with every constant divided by `scale`.
pub(crate) fn solve_facet_system(planes: &[Hyperplane], i: usize, scale: f64) -> Result<DVector<f64>> {
    let n = planes.len();
    let dim = n - 1;
    let others: Vec<&Hyperplane> = planes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, p)| p)
        .collect();
    let b = DMatrix::from_fn(dim, dim, |r, c| others[r].normal[c]);
    let h = DVector::from_iterator(dim, others.iter().map(|p| p.constant / scale));
    if is_rank_deficient(&b, RANK_TOL) {
        return Err(Error::SingularFacetSystem { vertex: i });
    }
    b.lu()
        .solve(&h)
        .ok_or(Error::SingularFacetSystem { vertex: i })
}

/// `|det([v_1 .. v_N; 1 .. 1])| / (N-1)!`.
pub fn simplex_volume(simplex: &SimplexVertices) -> f64 {
    let n = simplex.len();
    let m = DMatrix::from_fn(n, n, |r, c| {
        if r + 1 == n {
            1.0
        } else {
            simplex.vertices()[c][r]
        }
    });
    let factorial: f64 = (1..n).map(|k| k as f64).product();
    m.determinant().abs() / factorial
}

pub fn point_to_hyperplane_distance(p: &DVector<f64>, plane: &Hyperplane) -> Result<f64> {
    if p.len() != plane.dim() {
        return Err(Error::DimensionMismatch {
            expected: plane.dim(),
            got: p.len(),
        });
    }
    let norm = plane.normal.norm();
    if norm == 0.0 {
        return Err(Error::ZeroNormal);
    }
    Ok((plane.constant - plane.normal.dot(p)).abs() / norm)
}

/// Affine independence of `points` via the rank of their difference matrix.
///
/// The `k - 1` differences `p_m - p_(k-1)` must have rank `k - 1`, with the
/// smallest singular value above `tol` times the largest. An empty slice or a
/// single point is trivially independent.
pub fn is_affinely_independent(points: &[DVector<f64>], tol: f64) -> bool {
    let k = points.len();
    if k <= 1 {
        return true;
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) || k - 1 > dim {
        return false;
    }
    let last = &points[k - 1];
    let diffs: Vec<DVector<f64>> = points[..k - 1].iter().map(|p| p - last).collect();
    let m = DMatrix::from_columns(&diffs);
    !is_rank_deficient(&m, tol)
}
