use super::sparse::{CsrMatrix, TripletBuilder};

/// Constrained composite velocity DOFs and their prescribed values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dirichlet {
    pub n: usize,
    /// Sorted constrained indices.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Dirichlet {
    pub fn new(n: usize, mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        pairs.dedup_by_key(|p| p.0);
        Dirichlet {
            n,
            indices: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Full-length vector holding the prescribed values and zeros elsewhere.
    pub fn lift(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        for (&i, &x) in self.indices.iter().zip(&self.values) {
            v[i] = x;
        }
        v
    }

    pub fn homogeneous(&self) -> Dirichlet {
        Dirichlet {
            n: self.n,
            indices: self.indices.clone(),
            values: vec![0.0; self.indices.len()],
        }
    }
}

/// Saddle-point operator `[[A, B^T], [B, 0]]` (optionally with a mean-pressure
/// multiplier), reduced to the unconstrained velocity DOFs.
///
/// Reduced unknown ordering: free velocity, pressure, multiplier.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub mean: Option<Vec<f64>>,
    pub constrained: Vec<usize>,
    free: Vec<Option<usize>>,
    nfree: usize,
    pub matrix: CsrMatrix,
}

impl SparseSystem {
    pub fn new(a: CsrMatrix, b: CsrMatrix, mean: Option<Vec<f64>>, constrained: &[usize]) -> Self {
        let nv = a.nrows;
        let np = b.nrows;
        let mut free = vec![None; nv];
        let mut is_c = vec![false; nv];
        for &c in constrained {
            is_c[c] = true;
        }
        let mut nfree = 0;
        for (i, f) in free.iter_mut().enumerate() {
            if !is_c[i] {
                *f = Some(nfree);
                nfree += 1;
            }
        }
        let n = nfree + np + usize::from(mean.is_some());
        let mut t = TripletBuilder::new(n, n);
        for r in 0..nv {
            if let Some(rr) = free[r] {
                for (c, v) in a.row(r) {
                    if let Some(cc) = free[c] {
                        t.push(rr, cc, v);
                    }
                }
            }
        }
        for p in 0..np {
            for (c, v) in b.row(p) {
                if let Some(cc) = free[c] {
                    t.push(nfree + p, cc, v);
                    t.push(cc, nfree + p, v);
                }
            }
        }
        if let Some(m) = &mean {
            for (p, &v) in m.iter().enumerate() {
                if v != 0.0 {
                    t.push(n - 1, nfree + p, v);
                    t.push(nfree + p, n - 1, v);
                }
            }
        }
        SparseSystem {
            a,
            b,
            mean,
            constrained: constrained.to_vec(),
            free,
            nfree,
            matrix: t.build(),
        }
    }

    pub fn nv(&self) -> usize {
        self.a.nrows
    }

    pub fn np(&self) -> usize {
        self.b.nrows
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows
    }

    pub fn num_free(&self) -> usize {
        self.nfree
    }

    pub fn free_index(&self, i: usize) -> Option<usize> {
        self.free[i]
    }

    /// Reduced right-hand side for velocity load `fv`, pressure load `gp` and
    /// lifting vector `lift` (full velocity length, prescribed values on constrained DOFs).
    pub fn reduced_rhs(&self, fv: &[f64], gp: &[f64], lift: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.size()];
        let al = self.a.mul_vec(lift);
        let bl = self.b.mul_vec(lift);
        for i in 0..self.nv() {
            if let Some(ii) = self.free[i] {
                r[ii] = fv[i] - al[i];
            }
        }
        for p in 0..self.np() {
            r[self.nfree + p] = gp[p] - bl[p];
        }
        r
    }

    /// Full velocity and pressure from a reduced solution.
    pub fn expand(&self, x: &[f64], lift: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut u = lift.to_vec();
        for i in 0..self.nv() {
            if let Some(ii) = self.free[i] {
                u[i] = x[ii];
            }
        }
        let p = x[self.nfree..self.nfree + self.np()].to_vec();
        (u, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (CsrMatrix, CsrMatrix) {
        let mut a = TripletBuilder::new(3, 3);
        for (r, c, v) in [(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0)] {
            a.push(r, c, v);
        }
        let mut b = TripletBuilder::new(1, 3);
        for (c, v) in [(0, 1.0), (1, 2.0), (2, 3.0)] {
            b.push(0, c, v);
        }
        (a.build(), b.build())
    }

    #[test]
    fn constrained_rows_are_removed() {
        let (a, b) = small();
        let s = SparseSystem::new(a, b, None, &[1]);
        assert_eq!((s.num_free(), s.size()), (2, 3));
        assert_eq!(s.free_index(1), None);
        assert_eq!(s.matrix.get(0, 0), 2.0);
        assert_eq!(s.matrix.get(0, 1), 0.0);
        assert_eq!(s.matrix.get(2, 1), 3.0);
        assert_eq!(s.matrix.get(1, 2), 3.0);
        assert!(s.matrix.max_asymmetry() == 0.0);
    }

    #[test]
    fn lifting_moves_data_to_the_right_hand_side() {
        let (a, b) = small();
        let s = SparseSystem::new(a, b, Some(vec![0.5]), &[1]);
        assert_eq!(s.size(), 4);
        let lift = [0.0, 2.0, 0.0];
        let r = s.reduced_rhs(&[1.0, 1.0, 1.0], &[0.0], &lift);
        // fv - A lift on free rows, -B lift on the pressure row, zero mean row
        assert_eq!(r, vec![3.0, 3.0, -4.0, 0.0]);
        let (u, p) = s.expand(&[7.0, 8.0, 9.0, 10.0], &lift);
        assert_eq!(u, vec![7.0, 2.0, 8.0]);
        assert_eq!(p, vec![9.0]);
    }

    #[test]
    fn dirichlet_pairs_are_sorted_and_lifted() {
        let d = Dirichlet::new(4, vec![(3, 1.5), (0, -1.0)]);
        assert_eq!(d.indices, vec![0, 3]);
        assert_eq!(d.lift(), vec![-1.0, 0.0, 0.0, 1.5]);
        assert!(d.homogeneous().values.iter().all(|&v| v == 0.0));
    }
}
