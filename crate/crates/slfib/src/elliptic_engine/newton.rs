use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

/// A square nonlinear system `R(x) = 0` with a sparse Jacobian.
pub(crate) trait NonlinearSystem {
    fn dim(&self) -> usize;
    fn residual(&self, x: &[f64], out: &mut [f64]);
    fn jacobian(&self, x: &[f64]) -> Vec<Triplet<usize, usize, f64>>;
    /// Max-norm of the residual, each row divided by its diagonal weight.
    fn scaled_norm(&self, x: &[f64], r: &[f64]) -> f64;
    /// Key under which the Jacobian sparsity pattern may be shared.
    fn pattern_key(&self) -> Option<String> {
        None
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Give up once the line search has to go below this step.
    pub min_lambda: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 60,
            max_halvings: 30,
            min_lambda: 0.0,
        }
    }
}

pub(crate) struct NewtonOutcome {
    pub x: Vec<f64>,
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn symbolic_cache() -> &'static Mutex<HashMap<String, SymbolicLu<usize>>> {
    static CACHE: OnceLock<Mutex<HashMap<String, SymbolicLu<usize>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

const SYMBOLIC_CACHE_LIMIT: usize = 8;

pub(crate) fn sparse_solve(
    n: usize,
    triplets: &[Triplet<usize, usize, f64>],
    rhs: &[f64],
    pattern: Option<&str>,
) -> Option<Vec<f64>> {
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, triplets).ok()?;
    let lu = match pattern {
        Some(key) => {
            let key = format!("{key}:{}", a.compute_nnz());
            let cached = symbolic_cache().lock().ok()?.get(&key).cloned();
            let sym = match cached {
                Some(s) => s,
                None => {
                    let s = SymbolicLu::try_new(a.symbolic()).ok()?;
                    let mut c = symbolic_cache().lock().ok()?;
                    if c.len() >= SYMBOLIC_CACHE_LIMIT {
                        c.clear();
                    }
                    c.insert(key, s.clone());
                    s
                }
            };
            Lu::try_new_with_symbolic(sym, a.as_ref()).ok()?
        }
        None => a.sp_lu().ok()?,
    };
    let b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().all(|v| v.is_finite()) {
        Some(out)
    } else {
        None
    }
}

fn l2(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Damped Newton with backtracking. After reaching `tol` a few extra steps
/// are taken while they keep lowering the residual.
pub(crate) fn newton<S: NonlinearSystem>(sys: &S, x0: Vec<f64>, opt: NewtonOptions) -> NewtonOutcome {
    let n = sys.dim();
    let mut x = x0;
    let mut r = vec![0.0; n];
    sys.residual(&x, &mut r);
    let mut norm = sys.scaled_norm(&x, &r);
    let mut iterations = 0;
    let mut polish = 0;
    let mut xt = vec![0.0; n];
    let mut rt = vec![0.0; n];
    let key = sys.pattern_key();
    while iterations < opt.max_iter {
        if !norm.is_finite() {
            break;
        }
        if norm <= opt.tol {
            if polish >= 2 || norm < 1e-15 {
                break;
            }
            polish += 1;
        }
        let jac = sys.jacobian(&x);
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let Some(dx) = sparse_solve(n, &jac, &neg, key.as_deref()) else {
            break;
        };
        iterations += 1;
        let base_l2 = l2(&r);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opt.max_halvings {
            if lambda < opt.min_lambda {
                break;
            }
            for k in 0..n {
                xt[k] = x[k] + lambda * dx[k];
            }
            sys.residual(&xt, &mut rt);
            let nt = sys.scaled_norm(&xt, &rt);
            if nt.is_finite()
                && (nt <= (1.0 - 1e-4 * lambda) * norm || l2(&rt) <= (1.0 - 1e-4 * lambda) * base_l2)
            {
                accepted = true;
                std::mem::swap(&mut x, &mut xt);
                std::mem::swap(&mut r, &mut rt);
                norm = nt;
                break;
            }
            lambda *= 0.5;
        }
        if std::env::var("SLFIB_TRACE").is_ok() {
            eprintln!("newton it={iterations} norm={norm:e} lambda={lambda} accepted={accepted}");
        }
        if !accepted {
            break;
        }
    }
    NewtonOutcome {
        converged: norm <= opt.tol,
        x,
        norm,
        iterations,
    }
}
