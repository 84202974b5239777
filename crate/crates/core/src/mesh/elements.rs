//! Element stiffness kernels for the lowest-order element library:
//! tri3, quad4, tet4, hex8. Gauss quadrature is 2 points per axis for
//! tensor-product elements and a single point for simplices, which is
//! exact for these shape functions on affine geometry.

use nalgebra::DMatrix;

use super::{ElemKind, MeshError, Pde};

/// Reference-space shape function derivatives at a quadrature point.
/// Rows: local node, columns: reference coordinate.
fn shape_gradients(kind: ElemKind, q: &[f64]) -> DMatrix<f64> {
    match kind {
        ElemKind::Tri3 => {
            // N = [1 - xi - eta, xi, eta]
            DMatrix::from_row_slice(3, 2, &[-1.0, -1.0, 1.0, 0.0, 0.0, 1.0])
        }
        ElemKind::Tet4 => DMatrix::from_row_slice(
            4,
            3,
            &[-1.0, -1.0, -1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ),
        ElemKind::Quad4 => {
            let (xi, eta) = (q[0], q[1]);
            // corners in counterclockwise order
            let signs = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
            let mut g = DMatrix::zeros(4, 2);
            for (a, (sx, sy)) in signs.iter().enumerate() {
                g[(a, 0)] = 0.25 * sx * (1.0 + sy * eta);
                g[(a, 1)] = 0.25 * sy * (1.0 + sx * xi);
            }
            g
        }
        ElemKind::Hex8 => {
            let (xi, eta, zeta) = (q[0], q[1], q[2]);
            let signs = [
                (-1.0, -1.0, -1.0),
                (1.0, -1.0, -1.0),
                (1.0, 1.0, -1.0),
                (-1.0, 1.0, -1.0),
                (-1.0, -1.0, 1.0),
                (1.0, -1.0, 1.0),
                (1.0, 1.0, 1.0),
                (-1.0, 1.0, 1.0),
            ];
            let mut g = DMatrix::zeros(8, 3);
            for (a, (sx, sy, sz)) in signs.iter().enumerate() {
                g[(a, 0)] = 0.125 * sx * (1.0 + sy * eta) * (1.0 + sz * zeta);
                g[(a, 1)] = 0.125 * sy * (1.0 + sx * xi) * (1.0 + sz * zeta);
                g[(a, 2)] = 0.125 * sz * (1.0 + sx * xi) * (1.0 + sy * eta);
            }
            g
        }
    }
}

/// Quadrature points and weights in reference coordinates.
fn quadrature(kind: ElemKind) -> Vec<(Vec<f64>, f64)> {
    let g = 1.0 / 3.0_f64.sqrt();
    match kind {
        ElemKind::Tri3 => vec![(vec![1.0 / 3.0, 1.0 / 3.0], 0.5)],
        ElemKind::Tet4 => vec![(vec![0.25, 0.25, 0.25], 1.0 / 6.0)],
        ElemKind::Quad4 => {
            let mut pts = Vec::new();
            for &xi in &[-g, g] {
                for &eta in &[-g, g] {
                    pts.push((vec![xi, eta], 1.0));
                }
            }
            pts
        }
        ElemKind::Hex8 => {
            let mut pts = Vec::new();
            for &xi in &[-g, g] {
                for &eta in &[-g, g] {
                    for &zeta in &[-g, g] {
                        pts.push((vec![xi, eta, zeta], 1.0));
                    }
                }
            }
            pts
        }
    }
}

/// Isotropic elastic moduli in Voigt form. 2D uses plane strain.
fn elastic_moduli(dim: usize, e: f64, nu: f64) -> DMatrix<f64> {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    if dim == 2 {
        DMatrix::from_row_slice(
            3,
            3,
            &[lambda + 2.0 * mu, lambda, 0.0, lambda, lambda + 2.0 * mu, 0.0, 0.0, 0.0, mu],
        )
    } else {
        let mut c = DMatrix::zeros(6, 6);
        for i in 0..3 {
            for j in 0..3 {
                c[(i, j)] = lambda;
            }
            c[(i, i)] = lambda + 2.0 * mu;
            c[(i + 3, i + 3)] = mu;
        }
        c
    }
}

/// Element stiffness matrix, exactly symmetric by construction.
///
/// `coords` holds the element's node coordinates row by row. The matrix is
/// ordered node-major: dof = local_node * dofs_per_node + component.
pub fn element_stiffness(
    kind: ElemKind,
    elem_index: usize,
    coords: &DMatrix<f64>,
    pde: &Pde,
) -> Result<DMatrix<f64>, MeshError> {
    let dim = kind.dim();
    let n_nodes = kind.arity();
    debug_assert_eq!(coords.nrows(), n_nodes);
    debug_assert_eq!(coords.ncols(), dim);
    let dpn = pde.dofs_per_node(dim);
    let n_dofs = n_nodes * dpn;
    let mut k = DMatrix::zeros(n_dofs, n_dofs);

    let moduli = match *pde {
        Pde::Laplace => None,
        Pde::Elasticity { e, nu } => Some(elastic_moduli(dim, e, nu)),
    };

    for (q, w) in quadrature(kind) {
        let dn = shape_gradients(kind, &q);
        // jacobian J_ij = d x_i / d xi_j
        let jac = coords.transpose() * &dn;
        let det = jac.determinant();
        if det <= 0.0 || !det.is_finite() {
            return Err(MeshError::DegenerateElement { elem: elem_index, det });
        }
        let jinv = jac.try_inverse().expect("positive determinant implies invertible");
        // physical gradients, one row per node
        let grad = &dn * &jinv;

        match &moduli {
            None => {
                let contrib = &grad * grad.transpose() * (w * det);
                k += contrib;
            }
            Some(c) => {
                let n_strain = if dim == 2 { 3 } else { 6 };
                let mut b = DMatrix::zeros(n_strain, n_dofs);
                for a in 0..n_nodes {
                    let col = a * dpn;
                    if dim == 2 {
                        b[(0, col)] = grad[(a, 0)];
                        b[(1, col + 1)] = grad[(a, 1)];
                        b[(2, col)] = grad[(a, 1)];
                        b[(2, col + 1)] = grad[(a, 0)];
                    } else {
                        b[(0, col)] = grad[(a, 0)];
                        b[(1, col + 1)] = grad[(a, 1)];
                        b[(2, col + 2)] = grad[(a, 2)];
                        // engineering shear strains xy, yz, zx
                        b[(3, col)] = grad[(a, 1)];
                        b[(3, col + 1)] = grad[(a, 0)];
                        b[(4, col + 1)] = grad[(a, 2)];
                        b[(4, col + 2)] = grad[(a, 1)];
                        b[(5, col)] = grad[(a, 2)];
                        b[(5, col + 2)] = grad[(a, 0)];
                    }
                }
                k += b.transpose() * c * b * (w * det);
            }
        }
    }

    // mirror the upper triangle so assembly is exactly symmetric
    for i in 0..n_dofs {
        for j in (i + 1)..n_dofs {
            let v = k[(i, j)];
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Rigid body mode vectors for an element or mesh coordinate block
/// (translations plus linearized rotations), one column per mode.
pub fn rigid_body_modes(coords: &DMatrix<f64>) -> DMatrix<f64> {
    let n = coords.nrows();
    let dim = coords.ncols();
    let n_modes = if dim == 2 { 3 } else { 6 };
    let mut modes = DMatrix::zeros(n * dim, n_modes);
    for a in 0..n {
        let base = a * dim;
        for d in 0..dim {
            modes[(base + d, d)] = 1.0;
        }
        if dim == 2 {
            let (x, y) = (coords[(a, 0)], coords[(a, 1)]);
            modes[(base, 2)] = -y;
            modes[(base + 1, 2)] = x;
        } else {
            let (x, y, z) = (coords[(a, 0)], coords[(a, 1)], coords[(a, 2)]);
            // rotation about x
            modes[(base + 1, 3)] = -z;
            modes[(base + 2, 3)] = y;
            // rotation about y
            modes[(base, 4)] = z;
            modes[(base + 2, 4)] = -x;
            // rotation about z
            modes[(base, 5)] = -y;
            modes[(base + 1, 5)] = x;
        }
    }
    modes
}
