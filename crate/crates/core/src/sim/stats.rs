//! Small statistics kit for experiment summaries: population moments, a
//! least-squares fit quality, and rank correlation.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divisor N, not N-1).
pub fn population_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    var.sqrt()
}

/// Coefficient of determination of the least-squares line through `points`.
///
/// A flat response fits a horizontal line exactly, so zero total variance
/// reports 1.0 rather than dividing by it.
pub fn linear_r2(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 1.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    let sxy = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let syy = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum::<f64>();
    if syy == 0.0 {
        return 1.0;
    }
    if sxx == 0.0 {
        return 0.0;
    }
    let slope = sxy / sxx;
    let ss_res = points
        .iter()
        .map(|p| {
            let fit = my + slope * (p.0 - mx);
            (p.1 - fit) * (p.1 - fit)
        })
        .sum::<f64>();
    1.0 - ss_res / syy
}

/// Spearman rank correlation with tie-averaged ranks.
pub fn spearman(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    pearson(&ranks(&xs), &ranks(&ys))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Ties share the average of the ranks they span (1-based).
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = shared;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_hand_results() {
        assert_eq!(mean(&[3.0, 5.0]), 4.0);
        assert_eq!(population_std(&[3.0, 5.0]), 1.0);
        assert_eq!(mean(&[4.0, 4.0, 4.0]), 4.0);
        assert_eq!(population_std(&[4.0, 4.0, 4.0]), 0.0);
    }

    #[test]
    fn r2_is_one_on_a_line_and_degrades_off_it() {
        let exact: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 2.0 + 3.0 * i as f64)).collect();
        assert!((linear_r2(&exact) - 1.0).abs() < 1e-12);
        let noisy = [(0.0, 0.0), (1.0, 2.0), (2.0, 1.0), (3.0, 4.0)];
        let r2 = linear_r2(&noisy);
        assert!(r2 > 0.0 && r2 < 1.0, "got {r2}");
        assert!((linear_r2(&[(0.0, 5.0), (1.0, 5.0), (2.0, 5.0)]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_sees_monotone_growth_through_outliers() {
        let curved = [(1.0, 1.0), (2.0, 4.0), (4.0, 9.0), (8.0, 100.0)];
        assert!((spearman(&curved) - 1.0).abs() < 1e-12);
        let falling = [(1.0, 9.0), (2.0, 4.0), (3.0, 1.0)];
        assert!((spearman(&falling) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_averages_tied_ranks() {
        let tied = [(1.0, 2.0), (2.0, 2.0), (3.0, 5.0)];
        let rho = spearman(&tied);
        assert!(rho > 0.0 && rho < 1.0, "got {rho}");
        assert_eq!(ranks(&[2.0, 2.0, 5.0]), vec![1.5, 1.5, 3.0]);
    }
}
