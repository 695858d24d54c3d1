use super::Mesh;

/// Affine map from the reference triangle onto one mesh element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub element: usize,
    /// `jac[r][c] = d x_r / d xhat_c`; columns are the edge vectors from vertex 0.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    /// Transposed inverse Jacobian.
    pub inv_t: [[f64; 2]; 2],
    pub translation: [f64; 2],
}

pub fn affine_map(mesh: &Mesh, element: usize) -> AffineMap {
    let [a, b, c] = mesh.element_vertices(element);
    let jac = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    let inv_t = [
        [jac[1][1] / det, -jac[1][0] / det],
        [-jac[0][1] / det, jac[0][0] / det],
    ];
    AffineMap {
        element,
        jac,
        det,
        inv_t,
        translation: a,
    }
}

impl AffineMap {
    #[inline]
    pub fn map(&self, p: [f64; 2]) -> [f64; 2] {
        let j = &self.jac;
        [
            self.translation[0] + j[0][0] * p[0] + j[0][1] * p[1],
            self.translation[1] + j[1][0] * p[0] + j[1][1] * p[1],
        ]
    }

    /// Reference coordinates of a physical point.
    #[inline]
    pub fn inverse(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.translation[0], x[1] - self.translation[1]];
        // J^{-1} = (J^{-T})^T
        let it = &self.inv_t;
        [it[0][0] * d[0] + it[1][0] * d[1], it[0][1] * d[0] + it[1][1] * d[1]]
    }

    /// Contravariant Piola transform of a reference vector: `J v / det J`.
    #[inline]
    pub fn piola(&self, v: [f64; 2]) -> [f64; 2] {
        let j = &self.jac;
        [
            (j[0][0] * v[0] + j[0][1] * v[1]) / self.det,
            (j[1][0] * v[0] + j[1][1] * v[1]) / self.det,
        ]
    }

    /// Physical gradient of a Piola-mapped field from its reference gradient:
    /// `J (grad_ref v) J^{-1} / det J`.
    #[inline]
    pub fn piola_grad(&self, g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let j = &self.jac;
        let it = &self.inv_t;
        let mut jg = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                jg[r][c] = j[r][0] * g[0][c] + j[r][1] * g[1][c];
            }
        }
        let mut out = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                // (J^{-1})[m][c] = inv_t[c][m]
                out[r][c] = (jg[r][0] * it[c][0] + jg[r][1] * it[c][1]) / self.det;
            }
        }
        out
    }

    /// Physical gradient of a scalar from its reference gradient: `J^{-T} grad_ref`.
    #[inline]
    pub fn scalar_grad(&self, g: [f64; 2]) -> [f64; 2] {
        let it = &self.inv_t;
        [it[0][0] * g[0] + it[0][1] * g[1], it[1][0] * g[0] + it[1][1] * g[1]]
    }

    /// `J^T J`, the metric that appears in Piola mass matrices.
    #[inline]
    pub fn metric(&self) -> [[f64; 2]; 2] {
        let j = &self.jac;
        let mut m = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] = j[0][a] * j[0][b] + j[1][a] * j[1][b];
            }
        }
        m
    }
}
