//! Generalized Laguerre polynomials with overflow-safe scaling, and
//! Gauss-Laguerre rules with weights stored as logarithms.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use parking_lot::RwLock;

const RESCALE: f64 = 1e150;

/// `(L^alpha_k(x), L^alpha_{k-1}(x), ln s)` with both values multiplied by
/// `exp(-ln s)`; `L_{-1}` is taken as 0.
pub fn laguerre_pair(k: usize, alpha: f64, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    for j in 0..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    (cur, prev, log_scale)
}

/// Plain evaluation of L^alpha_k(x); overflows for extreme arguments.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    let (v, _, s) = laguerre_pair(k, alpha, x);
    v * s.exp()
}

/// Gauss-Laguerre rule for the weight e^{-x} on (0, inf).
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Laguerre order must be positive");
        let mut jac = DMatrix::<f64>::zeros(order, order);
        for i in 0..order {
            jac[(i, i)] = (2 * i + 1) as f64;
            if i + 1 < order {
                jac[(i, i + 1)] = (i + 1) as f64;
                jac[(i + 1, i)] = (i + 1) as f64;
            }
        }
        let mut guesses: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
        guesses.sort_by(|a, b| a.total_cmp(b));
        let nf = order as f64;
        let mut nodes = Vec::with_capacity(order);
        let mut log_weights = Vec::with_capacity(order);
        for mut x in guesses {
            x = x.max(f64::MIN_POSITIVE);
            for _ in 0..100 {
                let (ln, lnm1, _) = laguerre_pair(order, 0.0, x);
                let step = ln * x / (nf * (ln - lnm1));
                x -= step;
                if step.abs() <= 4.0 * f64::EPSILON * x {
                    break;
                }
            }
            let (_, lnm1, s) = laguerre_pair(order, 0.0, x);
            nodes.push(x);
            log_weights.push(x.ln() - 2.0 * nf.ln() - 2.0 * (lnm1.abs().ln() + s));
        }
        Self { nodes, log_weights }
    }

    /// Shared rule of the given order, built once per process.
    pub fn cached(order: usize) -> Arc<GaussLaguerre> {
        static RULES: OnceLock<RwLock<HashMap<usize, Arc<GaussLaguerre>>>> = OnceLock::new();
        let rules = RULES.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(r) = rules.read().get(&order) {
            return r.clone();
        }
        let rule = Arc::new(GaussLaguerre::new(order));
        rules.write().entry(order).or_insert(rule).clone()
    }
}
