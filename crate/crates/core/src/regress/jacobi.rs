use nalgebra::DMatrix;

const MAX_SWEEPS: usize = 100;

/// One-sided (Hestenes) Jacobi SVD of a small square matrix.
///
/// Returns `(w, v, sigma)` with `m v = w`, the columns of `w` mutually
/// orthogonal, `sigma[j] = |w_j|`, sorted so sigma is descending.
pub(crate) fn one_sided_jacobi(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
    let (rows, k) = m.shape();
    let mut w = m.clone();
    let mut v = DMatrix::<f64>::identity(k, k);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + 1.0f64.hypot(zeta));
                let c = 1.0 / 1.0f64.hypot(t);
                let s = c * t;
                for i in 0..rows {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..k {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..k).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let w_sorted = DMatrix::from_fn(rows, k, |i, j| w[(i, order[j])]);
    let v_sorted = DMatrix::from_fn(k, k, |i, j| v[(i, order[j])]);
    let sigma = order.iter().map(|&j| norms[j]).collect();
    (w_sorted, v_sorted, sigma)
}
