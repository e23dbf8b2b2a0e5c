//! Dense two-phase simplex (Bland's rule), used only as an exact oracle.

const EPS: f64 = 1e-11;

/// Minimizes `c . v` subject to `a v = b`, `v >= 0`. Returns `None` if infeasible.
pub fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = a.len();
    let n = c.len();
    // Tableau columns: n originals, m artificials, rhs.
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = flip * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Phase 1 objective: sum of artificials, expressed in non-basic terms.
    for j in 0..width {
        t[m][j] = if (n..n + m).contains(&j) { 0.0 } else { -(0..m).map(|i| t[i][j]).sum::<f64>() };
    }
    pivot_loop(&mut t, &mut basis, n + m);
    if -t[m][width - 1] > 1e-9 {
        return None;
    }
    // Drive remaining artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    // Phase 2 objective.
    for j in 0..width {
        t[m][j] = if j < n { c[j] } else { 0.0 };
    }
    for i in 0..m {
        if basis[i] < n {
            let f = t[m][basis[i]];
            if f != 0.0 {
                for j in 0..width {
                    t[m][j] -= f * t[i][j];
                }
            }
        }
    }
    // Artificials may no longer enter.
    for row in t.iter_mut() {
        for v in &mut row[n..n + m] {
            *v = 0.0;
        }
    }
    pivot_loop(&mut t, &mut basis, n);
    let mut v = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            v[basis[i]] = t[i][width - 1];
        }
    }
    let obj = c.iter().zip(&v).map(|(a, b)| a * b).sum();
    Some((obj, v))
}

fn pivot_loop(t: &mut [Vec<f64>], basis: &mut [usize], n_enter: usize) {
    let m = basis.len();
    let rhs = t[0].len() - 1;
    loop {
        let Some(col) = (0..n_enter).find(|&j| t[m][j] < -EPS) else { return };
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..m {
            if t[i][col] > EPS {
                let ratio = t[i][rhs] / t[i][col];
                let better = match best {
                    None => true,
                    Some((r, _, bi)) => ratio < r - 1e-12 || ((ratio - r).abs() <= 1e-12 && basis[i] < bi),
                };
                if better {
                    best = Some((ratio, i, basis[i]));
                }
            }
        }
        let Some((_, row, _)) = best else { panic!("unbounded LP") };
        pivot(t, basis, row, col);
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row {
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    basis[row] = col;
}
