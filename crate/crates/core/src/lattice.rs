//! LLL reduction and short-vector enumeration for small positive definite
//! integer Gram matrices.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::abelian::IntMatrix;

fn to_f64(g: &IntMatrix) -> Vec<Vec<f64>> {
    (0..g.rows())
        .map(|i| {
            (0..g.cols())
                .map(|j| g[(i, j)].to_f64().unwrap_or(f64::MAX))
                .collect()
        })
        .collect()
}

/// `u · g · uᵀ`.
pub fn congruence(u: &IntMatrix, g: &IntMatrix) -> IntMatrix {
    u.mul(g).mul(&u.transpose())
}

/// Gram–Schmidt data `(mu, b)` of a Gram matrix.
fn gso(g: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= mu[j][k] * mu[i][k] * b[k];
            }
            mu[i][j] = s / b[j];
        }
        let mut s = g[i][i];
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * b[k];
        }
        b[i] = s;
    }
    (mu, b)
}

/// LLL-reduces the lattice with Gram matrix `g0`; returns the unimodular
/// transform `u` (new basis = `u` · old basis).
pub fn lll(g0: &IntMatrix) -> IntMatrix {
    let n = g0.rows();
    let mut u = IntMatrix::identity(n);
    if n <= 1 {
        return u;
    }
    let mut k = 1;
    let mut guard = 0;
    while k < n {
        guard += 1;
        assert!(guard < 100_000, "LLL failed to terminate");
        for j in (0..k).rev() {
            let g = to_f64(&congruence(&u, g0));
            let (mu, _) = gso(&g);
            let q = mu[k][j].round();
            if q != 0.0 {
                let q = BigInt::from(q as i64);
                for c in 0..n {
                    let t = &u[(j, c)] * &q;
                    u[(k, c)] -= t;
                }
            }
        }
        let g = to_f64(&congruence(&u, g0));
        let (mu, b) = gso(&g);
        if b[k] < (0.99 - mu[k][k - 1] * mu[k][k - 1]) * b[k - 1] {
            for c in 0..n {
                let t = u[(k, c)].clone();
                u[(k, c)] = u[(k - 1, c)].clone();
                u[(k - 1, c)] = t;
            }
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
    u
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Enumeration {
    /// Every vector within the bound was visited.
    Completed,
    /// The callback asked to stop.
    Stopped,
    /// The node budget ran out first.
    BudgetExhausted,
}

/// Calls `visit` on every nonzero `x` with `x g xᵀ ≤ bound` (up to a tiny
/// outward margin; callers re-check exactly). Both `x` and `-x` are
/// visited.
pub fn enumerate<F>(g: &IntMatrix, bound: f64, budget: u64, mut visit: F) -> Enumeration
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let n = g.rows();
    let gf = to_f64(g);
    let (mu, b) = gso(&gf);
    let bound = bound * (1.0 + 1e-9) + 1e-6;
    let mut x = vec![0i64; n];
    let mut nodes = 0u64;
    // recursive descent from the last coordinate
    fn rec<F: FnMut(&[i64]) -> ControlFlow<()>>(
        i: usize,
        n: usize,
        rem: f64,
        x: &mut Vec<i64>,
        mu: &[Vec<f64>],
        b: &[f64],
        nodes: &mut u64,
        budget: u64,
        visit: &mut F,
    ) -> Enumeration {
        // centre of coordinate i given x[i+1..]
        let mut c = 0.0;
        for j in i + 1..n {
            c -= mu[j][i] * x[j] as f64;
        }
        let r = (rem / b[i]).max(0.0).sqrt();
        let lo = (c - r).ceil() as i64;
        let hi = (c + r).floor() as i64;
        for v in lo..=hi {
            *nodes += 1;
            if *nodes > budget {
                return Enumeration::BudgetExhausted;
            }
            let d = v as f64 - c;
            let used = d * d * b[i];
            if used > rem + 1e-9 * rem.abs() + 1e-9 {
                continue;
            }
            x[i] = v;
            if i == 0 {
                if x.iter().any(|&t| t != 0) && visit(x).is_break() {
                    return Enumeration::Stopped;
                }
            } else {
                match rec(i - 1, n, rem - used, x, mu, b, nodes, budget, visit) {
                    Enumeration::Completed => {}
                    other => return other,
                }
            }
        }
        x[i] = 0;
        Enumeration::Completed
    }
    if n == 0 {
        return Enumeration::Completed;
    }
    rec(
        n - 1,
        n,
        bound,
        &mut x,
        &mu,
        &b,
        &mut nodes,
        budget,
        &mut visit,
    )
}

/// Exact value of `x g xᵀ`.
pub fn quad_form(g: &IntMatrix, x: &[i64]) -> BigInt {
    let xs: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
    let gx = g.apply(&xs);
    gx.iter().zip(&xs).map(|(a, b)| a * b).sum()
}

/// All nonzero `x` with `max |x_i| ≤ k`, one of each `±x` pair, in a fixed
/// order.
pub fn box_vectors(n: usize, k: i64) -> Vec<Vec<i64>> {
    let side = (2 * k + 1) as usize;
    let total = side.pow(n as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut v = vec![0i64; n];
        for t in v.iter_mut() {
            *t = (c % side) as i64 - k;
            c /= side;
        }
        match v.iter().rev().find(|&&t| t != 0) {
            Some(&t) if t > 0 => out.push(v),
            _ => {}
        }
    }
    out
}

pub fn is_unimodular(u: &IntMatrix) -> bool {
    u.determinant().abs().is_one()
}
