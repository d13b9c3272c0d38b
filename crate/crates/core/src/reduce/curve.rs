//! Fit of the low-dimensional similarity curve `1 / (1 + a x^(2b))`.

/// Cached result of [`fit_ab`] for `min_dist = 0.1`, `spread = 1`.
pub const DEFAULT_AB: (f64, f64) = (1.576_943_460_405_378, 0.895_060_878_122_785_9);

fn target(x: f64, min_dist: f64, spread: f64) -> f64 {
    if x < min_dist {
        1.0
    } else {
        (-(x - min_dist) / spread).exp()
    }
}

fn model(x: f64, a: f64, b: f64) -> f64 {
    1.0 / (1.0 + a * x.powf(2.0 * b))
}

fn sum_sq(xs: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (model(x, a, b) - y).powi(2))
        .sum()
}

/// Least-squares `(a, b)` over 300 evenly spaced points in `[0, 3 spread]`,
/// by Levenberg-Marquardt from `(1, 1)`.
pub fn fit_ab(min_dist: f64, spread: f64) -> (f64, f64) {
    let m = 300;
    let xs: Vec<f64> = (0..m)
        .map(|i| 3.0 * spread * i as f64 / (m - 1) as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| target(x, min_dist, spread)).collect();

    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut lambda = 1e-3;
    let mut cost = sum_sq(&xs, &ys, a, b);
    for _ in 0..500 {
        // Normal equations J^T J and J^T r for the two parameters.
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x <= 0.0 {
                continue;
            }
            let p = x.powf(2.0 * b);
            let den = (1.0 + a * p).powi(2);
            let da = -p / den;
            let db = -a * p * 2.0 * x.ln() / den;
            let r = model(x, a, b) - y;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let mut improved = false;
        for _ in 0..30 {
            let (h11, h22) = (jaa * (1.0 + lambda), jbb * (1.0 + lambda));
            let det = h11 * h22 - jab * jab;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(h22 * ga - jab * gb) / det;
            let step_b = -(h11 * gb - jab * ga) / det;
            let (na, nb) = (a + step_a, b + step_b);
            let new_cost = if na > 0.0 && nb > 0.0 {
                sum_sq(&xs, &ys, na, nb)
            } else {
                f64::INFINITY
            };
            if new_cost < cost {
                let rel = (cost - new_cost) / cost.max(1e-300);
                a = na;
                b = nb;
                cost = new_cost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

/// `(a, b)` for the given `min_dist` with unit spread, using the cached pair
/// for the default.
pub fn curve_params(min_dist: f64) -> (f64, f64) {
    if min_dist == 0.1 {
        DEFAULT_AB
    } else {
        fit_ab(min_dist, 1.0)
    }
}
