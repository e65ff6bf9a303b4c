use nalgebra::DMatrix;

/// Compact Householder QR of an n x k matrix with n >= k.
///
/// Reflector j is `I - tau_j v_j v_j^T` with `v_j[j] = 1` and the remaining
/// entries stored below the diagonal of `packed`.
#[derive(Clone, Debug)]
pub(crate) struct HouseholderQr {
    packed: DMatrix<f64>,
    taus: Vec<f64>,
}

impl HouseholderQr {
    pub(crate) fn new(a: &DMatrix<f64>) -> Self {
        let (n, k) = a.shape();
        debug_assert!(n >= k);
        let mut qr = a.clone();
        let mut taus = vec![0.0; k];
        for j in 0..k {
            let alpha = qr[(j, j)];
            let tail_sq: f64 = (j + 1..n).map(|i| qr[(i, j)] * qr[(i, j)]).sum();
            if tail_sq == 0.0 {
                // already upper triangular in this column
                continue;
            }
            let norm = (alpha * alpha + tail_sq).sqrt();
            let beta = if alpha >= 0.0 { -norm } else { norm };
            let scale = 1.0 / (alpha - beta);
            for i in j + 1..n {
                qr[(i, j)] *= scale;
            }
            let tau = (beta - alpha) / beta;
            taus[j] = tau;
            qr[(j, j)] = beta;
            for c in j + 1..k {
                let mut s = qr[(j, c)];
                for i in j + 1..n {
                    s += qr[(i, j)] * qr[(i, c)];
                }
                s *= tau;
                qr[(j, c)] -= s;
                for i in j + 1..n {
                    let vi = qr[(i, j)];
                    qr[(i, c)] -= s * vi;
                }
            }
        }
        Self { packed: qr, taus }
    }

    pub(crate) fn ncols(&self) -> usize {
        self.packed.ncols()
    }

    /// Upper-triangular k x k factor.
    pub(crate) fn r(&self) -> DMatrix<f64> {
        let k = self.ncols();
        DMatrix::from_fn(k, k, |i, j| if i <= j { self.packed[(i, j)] } else { 0.0 })
    }

    pub(crate) fn r_diagonal(&self) -> Vec<f64> {
        (0..self.ncols()).map(|j| self.packed[(j, j)]).collect()
    }

    fn reflect(&self, j: usize, x: &mut [f64]) {
        let tau = self.taus[j];
        if tau == 0.0 {
            return;
        }
        let n = self.packed.nrows();
        let mut s = x[j];
        for i in j + 1..n {
            s += self.packed[(i, j)] * x[i];
        }
        s *= tau;
        x[j] -= s;
        for i in j + 1..n {
            x[i] -= s * self.packed[(i, j)];
        }
    }

    /// x <- Q^T x (full-length n vector).
    pub(crate) fn apply_qt(&self, x: &mut [f64]) {
        for j in 0..self.ncols() {
            self.reflect(j, x);
        }
    }

    /// x <- Q x (full-length n vector).
    pub(crate) fn apply_q(&self, x: &mut [f64]) {
        for j in (0..self.ncols()).rev() {
            self.reflect(j, x);
        }
    }
}

/// Solve R x = y for upper-triangular R.
pub(crate) fn back_substitute(r: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let k = r.ncols();
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = y[i];
        for j in i + 1..k {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}
