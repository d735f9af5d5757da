//! Polynomial interpolation and quadrature helpers for the multistep
//! coefficients.
//!
//! Step data is expressed in the scaled variable `s = (t - t_n) / h_n`, so the
//! new point sits at `s = 0` and past points at negative nodes `s_j`.
//! Polynomials are never expanded into monomials: values come from product
//! forms and derivatives from logarithmic derivatives, and integrals over
//! `[-1, 0]` from Gauss-Legendre quadrature that is exact at the degrees used.

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Quadrature points; exact for polynomials up to degree 31.
const QUAD_POINTS: usize = 16;

/// `int_{-1}^{0} f(s) ds`, exact for polynomials of degree below 32.
pub fn integrate_unit<F: Fn(f64) -> f64>(f: F) -> f64 {
    thread_local! {
        static RULE: (Vec<f64>, Vec<f64>) = gauss_legendre(QUAD_POINTS);
    }
    RULE.with(|(x, w)| {
        x.iter()
            .zip(w)
            .map(|(xi, wi)| 0.5 * wi * f(0.5 * (xi - 1.0)))
            .sum()
    })
}

/// `prod_j (s - r_j)`
pub fn node_product(roots: &[f64], s: f64) -> f64 {
    roots.iter().map(|r| s - r).product()
}

/// Lagrange basis values `l_i(x)` for the given nodes.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &sj)| (x - sj) / (nodes[i] - sj))
                .product()
        })
        .collect()
}

/// Weights `c_i` with `f[s_0, ..., s_k] = sum_i c_i f(s_i)`.
pub fn divided_difference_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            1.0 / nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &sj)| nodes[i] - sj)
                .product::<f64>()
        })
        .collect()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn harmonic(k: usize) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}

/// One step of a multistep formula in the implicit form
/// `y_n - gamma f_n - a_n = 0`.
///
/// With `y_{n-i}` and `f_{n-i}` the history (`i >= 1`):
/// the prediction is `sum_i pred_y[i-1] y_{n-i} + h sum_i pred_f[i-1] f_{n-i}`
/// and the known data is `a_n = sum_i a_y[i-1] y_{n-i} + h sum_i a_f[i-1] f_{n-i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepWeights {
    pub pred_y: Vec<f64>,
    pub pred_f: Vec<f64>,
    pub a_y: Vec<f64>,
    pub a_f: Vec<f64>,
    /// `gamma / h`
    pub gamma_ratio: f64,
    /// Factor mapping the correction `y_n - y_pred` to the local error.
    pub err_coef: f64,
}

/// Fixed-leading-coefficient BDF of order `q = nodes.len()`, where `nodes`
/// holds `s_1 = -1, s_2, ..., s_q`.
///
/// The predictor interpolates `y_{n-1}, ..., y_{n-q}` and `f_{n-1}`. The
/// corrector adds `(y_n - y_pred) prod_j (1 + s / j)`, whose zeros stay at the
/// uniform points whatever the step history, and matches the derivative
/// `f_n` at `s = 0`.
pub fn bdf_weights(nodes: &[f64]) -> StepWeights {
    let q = nodes.len();
    assert!(q >= 1 && nodes[0] == -1.0);
    let s1 = nodes[0];
    let rest = &nodes[1..];
    let gamma_ratio = 1.0 / harmonic(q);

    // g(s) = prod_{j>=2} (s - s_j) / (s_1 - s_j)
    let g = |s: f64| node_product(rest, s) / node_product(rest, s1);
    let dlog = |s: f64, roots: &[f64]| roots.iter().map(|r| 1.0 / (s - r)).sum::<f64>();
    let g0 = g(0.0);
    let dg0 = g0 * dlog(0.0, rest);
    let dg1 = dlog(s1, rest);

    let mut val = vec![0.0; q];
    let mut der = vec![0.0; q];
    // H_1 = g (1 - (s - s_1) g'(s_1))
    val[0] = g0 * (1.0 + s1 * dg1);
    der[0] = dg0 * (1.0 + s1 * dg1) - g0 * dg1;
    for i in 1..q {
        let si = nodes[i];
        let others: Vec<f64> = rest.iter().copied().filter(|&r| r != si).collect();
        let b = |s: f64| {
            (s - s1).powi(2) / (si - s1).powi(2) * node_product(&others, s)
                / node_product(&others, si)
        };
        let b0 = b(0.0);
        val[i] = b0;
        der[i] = b0 * (2.0 / (0.0 - s1) + dlog(0.0, &others));
    }
    // D_1 = (s - s_1) g
    let d0 = -s1 * g0;
    let dd0 = g0 - s1 * dg0;

    let a_y = val
        .iter()
        .zip(&der)
        .map(|(v, d)| v - gamma_ratio * d)
        .collect();
    let a_f = vec![d0 - gamma_ratio * dd0];

    let sum: f64 = 2.0 / -s1 + rest.iter().map(|s| 1.0 / -s).sum::<f64>();
    let err_coef = (1.0 - 1.0 / (gamma_ratio * sum)).abs();

    StepWeights {
        pred_y: val,
        pred_f: vec![d0],
        a_y,
        a_f,
        gamma_ratio,
        err_coef,
    }
}

/// Adams-Moulton of order `q = nodes.len()` with an Adams-Bashforth
/// predictor, where `nodes` holds `s_1 = -1, ..., s_q`.
pub fn adams_weights(nodes: &[f64]) -> StepWeights {
    let q = nodes.len();
    assert!(q >= 1 && nodes[0] == -1.0);
    let ell: Vec<f64> = (0..q)
        .map(|i| {
            integrate_unit(|s| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &sj)| (s - sj) / (nodes[i] - sj))
                    .product()
            })
        })
        .collect();
    let at_zero = lagrange_weights(nodes, 0.0);
    let corr = &nodes[..q - 1];
    let gamma_ratio = integrate_unit(|s| node_product(corr, s) / node_product(corr, 0.0));
    let a_f = ell
        .iter()
        .zip(&at_zero)
        .map(|(l, z)| l - gamma_ratio * z)
        .collect();

    let int_r = integrate_unit(|s| s * node_product(corr, s));
    let int_q = integrate_unit(|s| node_product(nodes, s));
    let err_coef = (int_r / (int_q - int_r)).abs();

    StepWeights {
        pred_y: vec![1.0],
        pred_f: ell,
        a_y: vec![1.0],
        a_f,
        gamma_ratio,
        err_coef,
    }
}

/// Constant-step local error constant `C_k` of BDF order `k`, normalized so
/// that the error is `C_k h^{k+1} y^{(k+1)}` with unit leading coefficient.
pub fn bdf_error_constant(k: usize) -> f64 {
    1.0 / ((k + 1) as f64 * harmonic(k))
}

/// Constant-step local error constant of Adams-Moulton order `k`.
pub fn adams_error_constant(k: usize) -> f64 {
    let roots: Vec<f64> = (0..k).map(|j| -(j as f64)).collect();
    (integrate_unit(|u| node_product(&roots, u)) / factorial(k)).abs()
}

/// `k! f[s_0, ..., s_k]`, the weights estimating `h^k y^{(k)}` from values at
/// `k + 1` scaled nodes.
pub fn derivative_weights(nodes: &[f64]) -> Vec<f64> {
    let k = nodes.len() - 1;
    let f = factorial(k);
    divided_difference_weights(nodes)
        .into_iter()
        .map(|c| c * f)
        .collect()
}
