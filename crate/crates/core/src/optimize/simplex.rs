//! Euclidean projections onto the probability simplex and onto the simplex
//! cut by one linear budget.

/// Projection of `v` onto `{x : x >= 0, sum x = 1}` (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let mut x: Vec<f64> = v.iter().map(|&vi| (vi - theta).max(0.0)).collect();
    // Renormalise away rounding so rows sum to 1 to machine precision.
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        for xi in &mut x {
            *xi /= s;
        }
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projection onto `{x in simplex : cost . x <= budget}`.
///
/// KKT: the projection is `project_simplex(v - lambda * cost)` for the
/// least `lambda >= 0` meeting the budget. `phi(lambda) = cost . x(lambda)`
/// is piecewise linear and non-increasing, so a bracketed Newton step on
/// the current linear piece finds it in a handful of projections. The set
/// must be non-empty, which holds whenever some coordinate has zero cost.
pub fn project_capped_simplex(v: &[f64], cost: &[f64], budget: f64) -> Vec<f64> {
    let x0 = project_simplex(v);
    if !budget.is_finite() || dot(cost, &x0) <= budget {
        return x0;
    }
    let min_cost = cost.iter().copied().fold(f64::INFINITY, f64::min);
    let max_cost = cost.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while dot(cost, &project_simplex(&shift(v, cost, hi))) > budget && hi < 1e12 {
        lo = hi;
        hi *= 2.0;
    }
    let mut lambda = hi;
    let mut x = project_simplex(&shift(v, cost, lambda));
    for _ in 0..200 {
        let phi = dot(cost, &x);
        let gap = phi - budget;
        if gap > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if gap.abs() <= 1e-15 || hi - lo <= 1e-16 * hi.max(1.0) {
            break;
        }
        // Slope of phi on the linear piece with the current support.
        let (mut k, mut c1, mut c2) = (0.0, 0.0, 0.0);
        for (xi, ci) in x.iter().zip(cost) {
            if *xi > 0.0 {
                k += 1.0;
                c1 += ci;
                c2 += ci * ci;
            }
        }
        let slope = -(c2 - c1 * c1 / k);
        let newton = if slope < 0.0 { lambda - gap / slope } else { f64::NAN };
        lambda = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        x = project_simplex(&shift(v, cost, lambda));
    }
    if dot(cost, &x) > budget + 1e-12 {
        x = project_simplex(&shift(v, cost, hi));
    }
    // Clear any residual rounding excess by mixing toward the cheapest coordinate.
    let spent = dot(cost, &x);
    if spent > budget && max_cost > min_cost {
        let cheapest = cost.iter().position(|&c| c == min_cost).unwrap_or(0);
        let alpha = ((spent - budget) / (spent - min_cost)).clamp(0.0, 1.0);
        for xi in x.iter_mut() {
            *xi *= 1.0 - alpha;
        }
        x[cheapest] += alpha;
    }
    x
}

fn shift(v: &[f64], cost: &[f64], lambda: f64) -> Vec<f64> {
    v.iter().zip(cost).map(|(a, c)| a - lambda * c).collect()
}
