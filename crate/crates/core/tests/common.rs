#![allow(dead_code)]

use superrad::{AtomEnsemble, AtomParams};

pub fn params() -> AtomParams {
    AtomParams { r_min: 1e-6, ..AtomParams::default() }
}

pub fn ensemble(positions: Vec<[f64; 3]>, params: AtomParams) -> AtomEnsemble {
    AtomEnsemble::new(positions, params).expect("valid ensemble")
}

pub fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Double-loop sums of `sin(kr)/kr` and `cos(kr)/kr` over partners, per atom.
pub fn brute_force(positions: &[[f64; 3]], gamma_s: f64) -> (Vec<f64>, Vec<f64>) {
    let n = positions.len();
    let mut g = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let r = dist(&positions[i], &positions[j]);
                g[i] += gamma_s * r.sin() / r;
                d[i] += gamma_s * r.cos() / r;
            }
        }
    }
    (g, d)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
