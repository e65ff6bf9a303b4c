use nalgebra::DMatrix;

/// Solve G x = c for symmetric positive-definite G by Cholesky.
///
/// Returns `None` when a pivot drops to `K * eps * max(diag G)` or below.
pub(crate) fn solve_spd(g: &DMatrix<f64>, c: &[f64]) -> Option<Vec<f64>> {
    let k = g.nrows();
    let max_diag = (0..k).map(|i| g[(i, i)]).fold(0.0f64, f64::max);
    let floor = k as f64 * f64::EPSILON * max_diag;
    let mut l = DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        let mut d = g[(j, j)];
        for p in 0..j {
            d -= l[(j, p)] * l[(j, p)];
        }
        if !d.is_finite() || d <= floor {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..k {
            let mut s = g[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    // L y = c, then L^T x = y
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut s = c[i];
        for p in 0..i {
            s -= l[(i, p)] * y[p];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = y[i];
        for p in i + 1..k {
            s -= l[(p, i)] * x[p];
        }
        x[i] = s / l[(i, i)];
    }
    Some(x)
}
