//! Central finite-difference gradient checking.

/// Central-difference gradient of `f` at `point`.
pub fn central_difference(point: &[f64], step: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let all: Vec<usize> = (0..point.len()).collect();
    central_difference_at(point, step, &all, f)
}

/// Central differences for the listed coordinates only.
pub fn central_difference_at(
    point: &[f64],
    step: f64,
    indices: &[usize],
    f: impl Fn(&[f64]) -> f64,
) -> Vec<f64> {
    let mut probe = point.to_vec();
    indices
        .iter()
        .map(|&i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = f(&probe);
            probe[i] = orig - step;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub checked: usize,
}

/// Relative error with the `max(1, |a|, |n|)` denominator.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / 1f64.max(analytic.abs()).max(numeric.abs())
}

/// Compares `analytic` against central differences of `loss` at every coordinate.
pub fn grad_check(
    loss: impl Fn(&[f64]) -> f64,
    analytic: &[f64],
    point: &[f64],
    step: f64,
) -> GradCheckReport {
    let all: Vec<usize> = (0..point.len()).collect();
    grad_check_at(loss, analytic, point, step, &all)
}

/// Like [`grad_check`] but probes only `indices`; used for large models.
pub fn grad_check_at(
    loss: impl Fn(&[f64]) -> f64,
    analytic: &[f64],
    point: &[f64],
    step: f64,
    indices: &[usize],
) -> GradCheckReport {
    assert_eq!(analytic.len(), point.len());
    let numeric = central_difference_at(point, step, indices, loss);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: indices.first().copied().unwrap_or(0),
        checked: indices.len(),
    };
    for (&i, &n) in indices.iter().zip(&numeric) {
        let e = relative_error(analytic[i], n);
        if e > report.max_rel_error || e.is_nan() {
            report.max_rel_error = e;
            report.worst_index = i;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_loss() {
        let p = vec![0.3, -1.5, 2.0, 7.0];
        let loss = |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>();
        let r = grad_check(loss, &p, &p, 1e-5);
        assert!(r.max_rel_error < 1e-8);
        assert_eq!(r.checked, 4);
    }

    #[test]
    fn detects_a_wrong_gradient() {
        let p = vec![1.0, 2.0];
        let loss = |x: &[f64]| x[0] * x[1];
        let r = grad_check(loss, &[2.0, 0.0], &p, 1e-5);
        assert!(r.max_rel_error > 0.5);
        assert_eq!(r.worst_index, 1);
    }
}
