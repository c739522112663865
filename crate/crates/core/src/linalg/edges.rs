use super::CsrMatrix;

/// Symmetric operator with zero row sums stored as pair couplings, so that
/// `y += a K x` adds each pair flux to one row and subtracts it from the
/// other; `sum(y)` then changes only by accumulation rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeOperator {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl EdgeOperator {
    /// `None` unless `k` is square, symmetric and has vanishing row sums to
    /// within `tol * max|k_ij|`.
    pub fn from_matrix(k: &CsrMatrix, tol: f64) -> Option<Self> {
        if k.nrows() != k.ncols() {
            return None;
        }
        let limit = tol * k.max_abs();
        if k.asymmetry() > limit || k.row_sums().iter().any(|s| s.abs() > limit) {
            return None;
        }
        let edges = k
            .triplets()
            .filter(|&(i, j, _)| i < j)
            .map(|(i, j, v)| (i, j, 0.5 * (v + k.get(j, i))))
            .collect();
        Some(Self { n: k.nrows(), edges })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Matrix with the symmetric couplings and diagonal `-sum_j w_ij`, so
    /// that columns sum to zero up to one rounding per entry.
    pub fn to_matrix(&self) -> CsrMatrix {
        let mut diag = vec![0.0; self.n];
        let mut trip = Vec::with_capacity(2 * self.edges.len() + self.n);
        for &(i, j, w) in &self.edges {
            trip.push((i, j, w));
            trip.push((j, i, w));
            diag[i] -= w;
            diag[j] -= w;
        }
        trip.extend(diag.iter().enumerate().filter(|(_, d)| **d != 0.0).map(|(i, &d)| (i, i, d)));
        CsrMatrix::from_triplets(self.n, self.n, &trip)
    }

    /// `y += a K x`.
    pub fn mul_vec_add(&self, a: f64, x: &[f64], y: &mut [f64]) {
        for &(i, j, w) in &self.edges {
            let f = a * w * (x[j] - x[i]);
            y[i] += f;
            y[j] -= f;
        }
    }
}
