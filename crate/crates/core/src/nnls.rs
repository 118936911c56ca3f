//! Nonnegative least squares by the Lawson–Hanson active-set method,
//! working on the normal equations so one Gram matrix serves many pixels.

use nalgebra::{DMatrix, DVector};

/// Solves `min |M x - b|^2, x >= 0` given `gram = M^T M` and `mtb = M^T b`.
///
/// Returns an exactly nonnegative vector. Passive-set subproblems are solved
/// by Cholesky with an LU fallback.
pub fn nnls_normal(gram: &DMatrix<f64>, mtb: &DVector<f64>) -> DVector<f64> {
    let n = mtb.len();
    let scale = gram.diagonal().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale * mtb.amax().max(1.0);
    let max_outer = 3 * n + 10;

    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];

    for _ in 0..max_outer {
        let w = mtb - gram * &x;
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .fold(None, |best: Option<(usize, f64)>, j| match best {
                Some((_, bw)) if bw >= w[j] => best,
                _ => Some((j, w[j])),
            });
        match candidate {
            Some((j, wj)) if wj > tol => passive[j] = true,
            _ => break,
        }

        loop {
            let s = solve_passive(gram, mtb, &passive);
            let blocked: Vec<usize> = (0..n).filter(|&i| passive[i] && s[i] <= 0.0).collect();
            if blocked.is_empty() {
                x = s;
                break;
            }
            let (alpha, first) = blocked
                .iter()
                .map(|&i| (x[i] / (x[i] - s[i]), i))
                .fold((f64::INFINITY, blocked[0]), |best, cur| if cur.0 < best.0 { cur } else { best });
            for i in 0..n {
                x[i] += alpha * (s[i] - x[i]);
            }
            x[first] = 0.0;
            for i in 0..n {
                if passive[i] && x[i] <= tol * 1e-3 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    x
}

fn solve_passive(gram: &DMatrix<f64>, mtb: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |r, c| gram[(idx[r], idx[c])]);
    let rhs = DVector::from_fn(k, |r, _| mtb[idx[r]]);
    let sol = match sub.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => sub.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k)),
    };
    let mut s = DVector::zeros(passive.len());
    for (r, &i) in idx.iter().enumerate() {
        s[i] = sol[r];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(m: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
        nnls_normal(&(m.transpose() * m), &(m.transpose() * b))
    }

    #[test]
    fn unconstrained_optimum_when_feasible() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x_true = DVector::from_vec(vec![0.4, 0.9]);
        let x = solve(&m, &(&m * &x_true));
        assert!((x - x_true).amax() < 1e-12);
    }

    #[test]
    fn constrained_solution_satisfies_kkt() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 1.0, -2.0]);
        let x = solve(&m, &b);
        assert!(x[1] == 0.0 && x[0] > 0.0);
        let g = m.transpose() * (&m * &x - &b);
        for i in 0..2 {
            if x[i] > 0.0 {
                assert!(g[i].abs() < 1e-10);
            } else {
                assert!(g[i] > -1e-10);
            }
        }
    }

    #[test]
    fn all_negative_target_gives_zero() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.1, 1.0]);
        let x = solve(&m, &DVector::from_vec(vec![-1.0, -2.0]));
        assert_eq!(x, DVector::zeros(2));
    }
}
