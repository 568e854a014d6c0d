//! Quartic box-spline basis of a regular Loop patch.
//!
//! The twelve basis polynomials are not typed in: they are recovered once by
//! refining a regular lattice twice, reading off the limit position of the
//! 15 vertices inside the patch, and interpolating the (exactly quartic)
//! result on that 4-uniform grid.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Vector2};

use super::patch::gather_patch;
use super::step::{limit_stencil, subdivide_once};
use super::template::cone_template;

/// Exponents `(p, q)` of the monomials `v^p w^q` of total degree <= 4.
const MONOMIALS: [(i32, i32); 15] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

#[derive(Debug)]
pub struct RegularBasis {
    coeffs: [[f64; 15]; 12],
}

fn powi(x: f64, p: i32) -> f64 {
    if p == 0 {
        1.0
    } else {
        x.powi(p)
    }
}

impl RegularBasis {
    pub fn get() -> &'static RegularBasis {
        static BASIS: OnceLock<RegularBasis> = OnceLock::new();
        BASIS.get_or_init(derive)
    }

    pub fn eval(&self, v: f64, w: f64) -> [f64; 12] {
        let m: [f64; 15] = MONOMIALS.map(|(p, q)| powi(v, p) * powi(w, q));
        self.coeffs.map(|c| c.iter().zip(&m).map(|(a, b)| a * b).sum())
    }

    /// `(d/dv, d/dw)` of every basis function.
    pub fn eval_derivatives(&self, v: f64, w: f64) -> ([f64; 12], [f64; 12]) {
        let dv: [f64; 15] = MONOMIALS.map(|(p, q)| {
            if p == 0 {
                0.0
            } else {
                p as f64 * powi(v, p - 1) * powi(w, q)
            }
        });
        let dw: [f64; 15] = MONOMIALS.map(|(p, q)| {
            if q == 0 {
                0.0
            } else {
                q as f64 * powi(v, p) * powi(w, q - 1)
            }
        });
        let dot = |c: &[f64; 15], m: &[f64; 15]| c.iter().zip(m).map(|(a, b)| a * b).sum();
        (self.coeffs.map(|c| dot(&c, &dv)), self.coeffs.map(|c| dot(&c, &dw)))
    }

    /// Coefficients of basis function `i` in the monomial order
    /// `1, v, w, v^2, vw, w^2, v^3, ..., w^4`.
    pub fn coefficients(&self, i: usize) -> &[f64; 15] {
        &self.coeffs[i]
    }
}

fn derive() -> RegularBasis {
    let lattice = cone_template(6, 5);
    let (c, a, b) = (0, 1, 2);
    let control = gather_patch(&lattice, c, a, b).expect("regular lattice patch");
    let s1 = subdivide_once(&lattice).expect("lattice is manifold");
    let s2 = subdivide_once(&s1.refined).expect("lattice is manifold");
    let fine = &s2.refined;
    let pc = lattice.vertices()[c];
    let (da, db) = (lattice.vertices()[a] - pc, lattice.vertices()[b] - pc);

    let mut vand = DMatrix::<f64>::zeros(15, 15);
    let mut values = DMatrix::<f64>::zeros(15, 12);
    let mut row = 0;
    for j in 0..=4 {
        for k in 0..=(4 - j) {
            let (v, w) = (j as f64 / 4.0, k as f64 / 4.0);
            let target = pc + da * v + db * w;
            // refinement reproduces the planar lattice, so positions locate vertices
            let vid = (0..fine.num_vertices())
                .min_by(|&x, &y| {
                    let dx = (fine.vertices()[x] - target).norm();
                    let dy = (fine.vertices()[y] - target).norm();
                    dx.total_cmp(&dy)
                })
                .unwrap();
            debug_assert!((fine.vertices()[vid] - target).norm() < 1e-9);
            let fine_row = limit_stencil(fine, vid);
            let mid = s2.matrix.combine_rows(&fine_row);
            let coarse = s1.matrix.combine_rows(&mid);
            for (col, wgt) in coarse {
                match control.iter().position(|&cp| cp == col) {
                    Some(i) => values[(row, i)] += wgt,
                    None => assert!(wgt.abs() < 1e-13, "support leaks outside the patch"),
                }
            }
            for (m, &(p, q)) in MONOMIALS.iter().enumerate() {
                vand[(row, m)] = powi(v, p) * powi(w, q);
            }
            row += 1;
        }
    }
    let coeffs = vand.lu().solve(&values).expect("4-uniform grid is unisolvent");
    let mut out = [[0.0; 15]; 12];
    for (i, basis) in out.iter_mut().enumerate() {
        for (m, c) in basis.iter_mut().enumerate() {
            *c = coeffs[(m, i)];
        }
    }
    RegularBasis { coeffs: out }
}

/// Affine map from a triangle with the given domain-space corners to the
/// local barycentric parameters `(v', w')` of that triangle.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LocalFrame {
    origin: Vector2<f64>,
    inv: nalgebra::Matrix2<f64>,
}

impl LocalFrame {
    pub(crate) fn new(corners: [Vector2<f64>; 3]) -> Self {
        let m = nalgebra::Matrix2::from_columns(&[corners[1] - corners[0], corners[2] - corners[0]]);
        LocalFrame {
            origin: corners[0],
            inv: m.try_inverse().expect("non-degenerate child triangle"),
        }
    }

    pub(crate) fn local(&self, p: Vector2<f64>) -> Vector2<f64> {
        self.inv * (p - self.origin)
    }

    /// `d(v', w') / d(v, w)`.
    pub(crate) fn jacobian(&self) -> nalgebra::Matrix2<f64> {
        self.inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_positivity() {
        let basis = RegularBasis::get();
        for &(v, w) in &[(1.0 / 3.0, 1.0 / 3.0), (0.1, 0.7), (0.0, 0.0), (0.5, 0.5)] {
            let b = basis.eval(v, w);
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(b.iter().all(|&x| x > -1e-14));
        }
        let center = basis.eval(1.0 / 3.0, 1.0 / 3.0);
        assert!(center.iter().all(|&x| x > 0.0));
        let (dv, dw) = basis.eval_derivatives(0.2, 0.3);
        assert!(dv.iter().sum::<f64>().abs() < 1e-12);
        assert!(dw.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn corner_value_is_regular_limit_stencil() {
        // at (0,0) the surface passes through the limit point of c:
        // 1/2 for c and 1/12 for each of its six neighbours
        let b = RegularBasis::get().eval(0.0, 0.0);
        assert!((b[0] - 0.5).abs() < 1e-13);
        for &x in &b[1..7] {
            assert!((x - 1.0 / 12.0).abs() < 1e-13);
        }
        for &x in &b[7..] {
            assert!(x.abs() < 1e-13);
        }
    }
}
