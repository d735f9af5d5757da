//! Butcher tables for the additive Runge-Kutta integrator.

use super::{IntegratorError, Result};

/// Runge-Kutta coefficients `(A, b, c)` with an embedding `b_embed` for error
/// estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTable {
    pub name: &'static str,
    /// Row-major `s x s` stage matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub b_embed: Vec<f64>,
    pub order: usize,
    pub embed_order: usize,
}

/// Absolute tolerance for the row-sum condition `c_i = sum_j a_ij`.
const ROW_SUM_TOL: f64 = 1e-12;

impl ButcherTable {
    /// Builds a table, checking shapes, row sums and lower triangularity.
    pub fn new(
        name: &'static str,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        b_embed: Vec<f64>,
        order: usize,
        embed_order: usize,
    ) -> Result<Self> {
        let t = ButcherTable {
            name,
            a,
            b,
            c,
            b_embed,
            order,
            embed_order,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Strictly lower triangular `A`.
    pub fn is_explicit(&self) -> bool {
        (0..self.stages()).all(|i| self.a[i][i] == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(IntegratorError::Config(format!("table {}: {m}", self.name)));
        let s = self.b.len();
        if s == 0 {
            return bad("no stages".into());
        }
        if self.a.len() != s || self.a.iter().any(|r| r.len() != s) {
            return bad("A must be s x s".into());
        }
        if self.c.len() != s || self.b_embed.len() != s {
            return bad("b, b_embed and c must have s entries".into());
        }
        if self.order == 0 || self.embed_order == 0 {
            return bad("orders must be positive".into());
        }
        for i in 0..s {
            if self.a[i][i + 1..].iter().any(|&x| x != 0.0) {
                return bad(format!("A is not lower triangular in row {i}"));
            }
            let sum: f64 = self.a[i].iter().sum();
            if (sum - self.c[i]).abs() > ROW_SUM_TOL {
                return bad(format!("row sum of A differs from c in row {i}"));
            }
        }
        Ok(())
    }

    /// Largest residual of the order conditions up to `order` (at most 4) for
    /// the weights `b`, or for `b_embed` if `embedded`.
    pub fn order_residual(&self, order: usize, embedded: bool) -> f64 {
        let b = if embedded { &self.b_embed } else { &self.b };
        rk_order_residual(&self.a, b, &self.c, order)
    }

    pub fn forward_euler() -> Self {
        ButcherTable {
            name: "forward-euler",
            a: vec![vec![0.0]],
            b: vec![1.0],
            c: vec![0.0],
            b_embed: vec![1.0],
            order: 1,
            embed_order: 1,
        }
    }

    pub fn backward_euler() -> Self {
        ButcherTable {
            name: "backward-euler",
            a: vec![vec![1.0]],
            b: vec![1.0],
            c: vec![1.0],
            b_embed: vec![1.0],
            order: 1,
            embed_order: 1,
        }
    }

    /// Heun's method with an Euler embedding, order 2(1).
    pub fn heun_euler() -> Self {
        ButcherTable {
            name: "heun-euler",
            a: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            b: vec![0.5, 0.5],
            c: vec![0.0, 1.0],
            b_embed: vec![1.0, 0.0],
            order: 2,
            embed_order: 1,
        }
    }

    /// Two-stage SDIRK, order 2(1).
    pub fn sdirk2() -> Self {
        ButcherTable {
            name: "sdirk-2",
            a: vec![vec![1.0, 0.0], vec![-1.0, 1.0]],
            b: vec![0.5, 0.5],
            c: vec![1.0, 0.0],
            b_embed: vec![1.0, 0.0],
            order: 2,
            embed_order: 1,
        }
    }

    /// Explicit half of the four-stage ARK 3(2) IMEX pair, used alone as a
    /// third-order ERK.
    pub fn ark324_explicit() -> Self {
        let (b, be, c) = ark324_weights();
        let a = vec![
            vec![0.0; 4],
            vec![1767732205903.0 / 2027836641118.0, 0.0, 0.0, 0.0],
            vec![
                5535828885825.0 / 10492691773637.0,
                788022342437.0 / 10882634858940.0,
                0.0,
                0.0,
            ],
            vec![
                6485989280629.0 / 16251701735622.0,
                -4246266847089.0 / 9704473918619.0,
                10755448449292.0 / 10357097424841.0,
                0.0,
            ],
        ];
        ButcherTable {
            name: "ark324-erk",
            a,
            b,
            c,
            b_embed: be,
            order: 3,
            embed_order: 2,
        }
    }

    /// Implicit half of the four-stage ARK 3(2) IMEX pair: a stiffly accurate
    /// ESDIRK with an explicit first stage.
    pub fn ark324_implicit() -> Self {
        let (b, be, c) = ark324_weights();
        let g = ARK324_GAMMA;
        let a = vec![
            vec![0.0; 4],
            vec![g, g, 0.0, 0.0],
            vec![
                2746238789719.0 / 10658868560708.0,
                -640167445237.0 / 6845629431997.0,
                g,
                0.0,
            ],
            b.clone(),
        ];
        ButcherTable {
            name: "ark324-esdirk",
            a,
            b,
            c,
            b_embed: be,
            order: 3,
            embed_order: 2,
        }
    }

    /// Five-stage explicit method of order 4 with an order-3 embedding.
    pub fn zonneveld4() -> Self {
        ButcherTable {
            name: "zonneveld-4",
            a: vec![
                vec![0.0; 5],
                vec![0.5, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0, 0.0],
                vec![5.0 / 32.0, 7.0 / 32.0, 13.0 / 32.0, -1.0 / 32.0, 0.0],
            ],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 0.0],
            c: vec![0.0, 0.5, 0.5, 1.0, 0.75],
            b_embed: vec![-0.5, 7.0 / 3.0, 7.0 / 3.0, 13.0 / 6.0, -16.0 / 3.0],
            order: 4,
            embed_order: 3,
        }
    }
}

const ARK324_GAMMA: f64 = 1767732205903.0 / 4055673282236.0;

fn ark324_weights() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let b = vec![
        1471266399579.0 / 7840856788654.0,
        -4482444167858.0 / 7529755066697.0,
        11266239266428.0 / 11593286722821.0,
        ARK324_GAMMA,
    ];
    let be = vec![
        2756255671327.0 / 12835298489170.0,
        -10771552573575.0 / 22201958757719.0,
        9247589265047.0 / 10645013368117.0,
        2193209047091.0 / 5459859503100.0,
    ];
    let c = vec![0.0, 1767732205903.0 / 2027836641118.0, 0.6, 1.0];
    (b, be, c)
}

/// Largest residual among the Runge-Kutta order conditions up to `order`
/// (at most 4).
pub fn rk_order_residual(a: &[Vec<f64>], b: &[f64], c: &[f64], order: usize) -> f64 {
    let s = b.len();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let mat = |v: &[f64]| (0..s).map(|i| dot(&a[i], v)).collect::<Vec<f64>>();
    let had = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).collect::<Vec<f64>>();
    let ones = vec![1.0; s];
    let mut res: Vec<f64> = vec![dot(b, &ones) - 1.0];
    if order >= 2 {
        res.push(dot(b, c) - 0.5);
    }
    if order >= 3 {
        let c2 = had(c, c);
        res.push(dot(b, &c2) - 1.0 / 3.0);
        res.push(dot(b, &mat(c)) - 1.0 / 6.0);
    }
    if order >= 4 {
        let c2 = had(c, c);
        let c3 = had(&c2, c);
        let ac = mat(c);
        res.push(dot(b, &c3) - 0.25);
        res.push(dot(b, &had(c, &ac)) - 0.125);
        res.push(dot(b, &mat(&c2)) - 1.0 / 12.0);
        res.push(dot(b, &mat(&ac)) - 1.0 / 24.0);
    }
    res.into_iter().fold(0.0, |m, r| m.max(r.abs()))
}
