use super::{Marginals, TransportPlan};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_MAX_ITER: usize = 1000;
pub const DEFAULT_TOL_MARG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornParams {
    /// Entropic regularization strength.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Stop once both L1 marginal residuals are at most this.
    pub tol_marg: f64,
}

impl Default for SinkhornParams {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            max_iter: DEFAULT_MAX_ITER,
            tol_marg: DEFAULT_TOL_MARG,
        }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Entropic transport maximizing `<T, S> + epsilon H(T)` under the
/// marginals, `T = diag(e^f) exp(S / epsilon) diag(e^g)`.
///
/// Potentials are updated in the log domain, so no kernel entry is ever
/// exponentiated on its own. An unconverged plan is still returned, with
/// `converged == false`.
pub fn sinkhorn(similarity: &[f64], marg: &Marginals, params: &SinkhornParams) -> Result<TransportPlan> {
    let (n, p) = (marg.row().len(), marg.col().len());
    if similarity.len() != n * p {
        return Err(Error::DimensionMismatch(format!(
            "similarity has {} entries, marginals imply {n}x{p}",
            similarity.len()
        )));
    }
    if !(params.epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be > 0, got {}",
            params.epsilon
        )));
    }
    let kernel: Vec<f64> = similarity.iter().map(|s| s / params.epsilon).collect();
    let log_a: Vec<f64> = marg.row().iter().map(|x| x.ln()).collect();
    let log_b: Vec<f64> = marg.col().iter().map(|x| x.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; p];

    let row_residual = |f: &[f64], g: &[f64]| -> f64 {
        (0..n)
            .map(|i| {
                let k = &kernel[i * p..(i + 1) * p];
                let s: f64 = (0..p).map(|j| (f[i] + g[j] + k[j]).exp()).sum();
                (s - marg.row()[i]).abs()
            })
            .sum()
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        iterations += 1;
        for i in 0..n {
            let k = &kernel[i * p..(i + 1) * p];
            f[i] = log_a[i] - log_sum_exp((0..p).map(|j| g[j] + k[j]));
        }
        for j in 0..p {
            g[j] = log_b[j] - log_sum_exp((0..n).map(|i| f[i] + kernel[i * p + j]));
        }
        // columns are exact after the g-update; only rows can be off
        if row_residual(&f, &g) <= params.tol_marg {
            converged = true;
            break;
        }
    }

    let mut data = Vec::with_capacity(n * p);
    for i in 0..n {
        for j in 0..p {
            let v = (f[i] + g[j] + kernel[i * p + j]).exp();
            data.push(if v.is_finite() { v } else { 0.0 });
        }
    }
    let mut plan = TransportPlan::from_dense(n, p, data)?;
    let (r, c) = plan.residuals(marg);
    plan.row_residual = r;
    plan.col_residual = c;
    plan.converged = converged && r <= params.tol_marg && c <= params.tol_marg;
    plan.iterations = iterations;
    plan.objective = plan.inner(similarity);
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let m = Marginals::new(vec![1.0], vec![1.0]).unwrap();
        let plan = sinkhorn(&[0.37], &m, &SinkhornParams::default()).unwrap();
        assert!((plan.get(0, 0) - 1.0).abs() < 1e-15);
        assert!(plan.converged);
    }

    #[test]
    fn constant_similarity_gives_product_coupling() {
        let m = Marginals::new(vec![0.2, 0.3, 0.5], vec![0.1, 0.6, 0.3]).unwrap();
        let plan = sinkhorn(&[0.4; 9], &m, &SinkhornParams::default()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((plan.get(i, j) - m.row()[i] * m.col()[j]).abs() < 1e-12);
            }
        }
    }

    /// Closed form: the feasible set is `T = [[t, 1/2 - t], [1/2 - t, t]]`,
    /// `<T, S> = 4t - 1`, maximal at `t = 1/2`.
    #[test]
    fn two_by_two_approaches_diagonal() {
        let m = Marginals::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let s = [1.0, -1.0, -1.0, 1.0];
        let params = SinkhornParams {
            epsilon: 0.05,
            ..Default::default()
        };
        let plan = sinkhorn(&s, &m, &params).unwrap();
        let target = [0.5, 0.0, 0.0, 0.5];
        for (x, y) in plan.data().iter().zip(target) {
            assert!((x - y).abs() < 1e-3, "{:?}", plan.data());
        }
    }

    #[test]
    fn small_epsilon_does_not_overflow() {
        let m = Marginals::new(vec![0.5, 0.5], vec![0.25, 0.75]).unwrap();
        let params = SinkhornParams {
            epsilon: 1e-4,
            max_iter: 200,
            ..Default::default()
        };
        // exp(1 / 1e-4) overflows; the log-domain plan must stay finite
        let plan = sinkhorn(&[1.0, -1.0, 0.5, 0.9], &m, &params).unwrap();
        assert!(plan.data().iter().all(|x| x.is_finite()));
        assert!(plan.total_mass() > 0.0);
    }

    #[test]
    fn unconverged_plan_is_flagged() {
        let m = Marginals::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let params = SinkhornParams {
            epsilon: 0.01,
            max_iter: 1,
            tol_marg: 1e-15,
        };
        let plan = sinkhorn(&[1.0, 0.0, 0.9, 0.0], &m, &params).unwrap();
        assert!(!plan.converged);
        assert_eq!(plan.iterations, 1);
    }

    #[test]
    fn shape_checked() {
        let m = Marginals::new(vec![1.0], vec![1.0]).unwrap();
        assert!(sinkhorn(&[0.0, 1.0], &m, &SinkhornParams::default()).is_err());
    }
}
