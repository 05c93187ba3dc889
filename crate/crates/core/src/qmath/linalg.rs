use super::Operator;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian operator, descending.
///
/// `H = A + iB` is diagonalized through the real symmetric embedding
/// `[[A, -B], [B, A]]`, whose spectrum is that of `H` with every eigenvalue
/// doubled; one copy of each pair is returned.
pub fn hermitian_eigenvalues(op: &Operator) -> Vec<f64> {
    let n = op.dim();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let z = op.get(r, c);
            // symmetrize so tiny rounding asymmetry cannot stall the sweep
            let w = op.get(c, r).conj();
            let (re, im) = ((z.re + w.re) / 2.0, (z.im + w.im) / 2.0);
            a[r * m + c] = re;
            a[(r + n) * m + (c + n)] = re;
            a[r * m + (c + n)] = -im;
            a[(r + n) * m + c] = im;
        }
    }
    let mut eig = symmetric_eigenvalues(&mut a, m);
    eig.sort_by(|x, y| y.total_cmp(x));
    eig.into_iter().step_by(2).collect()
}

/// Cyclic Jacobi on a dense row-major symmetric matrix (destroys `a`).
pub fn symmetric_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn diagonal_spectrum() {
        let op = Operator::from_real(3, &[3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let e = hermitian_eigenvalues(&op);
        assert_eq!(e.len(), 3);
        for (x, y) in e.iter().zip([3.0, 2.0, -1.0]) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn pauli_y_has_plus_minus_one() {
        let i = Complex64::new(0.0, 1.0);
        let op = Operator::new(2, vec![0.0.into(), -i, i, 0.0.into()]).unwrap();
        let e = hermitian_eigenvalues(&op);
        assert!((e[0] - 1.0).abs() < 1e-13);
        assert!((e[1] + 1.0).abs() < 1e-13);
    }

    #[test]
    fn dense_hermitian_two_by_two() {
        // [[2, 1+i], [1-i, 3]]: trace 5, determinant 4
        let op = Operator::new(
            2,
            vec![
                Complex64::new(2.0, 0.0),
                Complex64::new(1.0, 1.0),
                Complex64::new(1.0, -1.0),
                Complex64::new(3.0, 0.0),
            ],
        )
        .unwrap();
        let e = hermitian_eigenvalues(&op);
        assert!((e[0] - 4.0).abs() < 1e-13);
        assert!((e[1] - 1.0).abs() < 1e-13);
    }
}
