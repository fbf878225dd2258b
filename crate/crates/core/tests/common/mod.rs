//! Two-party reference maxima shared by the integration tests.

use mkbell::DensityMatrix;
use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;

fn paulis() -> [Matrix2<Complex64>; 3] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
        Matrix2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
        Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
    ]
}

/// Two-party correlation matrix `T_ij = Tr{(σ_i ⊗ σ_j) ρ}`.
pub fn correlation_matrix(rho: &DensityMatrix) -> Matrix3<f64> {
    let s = paulis();
    Matrix3::from_fn(|i, j| rho.product_trace(&[s[i], s[j]]).re)
}

/// Largest CHSH value in the ½-normalization: square root of the sum of the
/// two largest eigenvalues of `TᵀT`.
pub fn horodecki_max(rho: &DensityMatrix) -> f64 {
    let t = correlation_matrix(rho);
    let mut eig: Vec<f64> = (t.transpose() * t).symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    (eig[0] + eig[1]).sqrt()
}

/// Grid over Bob's two directions with Alice's best response in closed form.
pub fn grid_max(rho: &DensityMatrix, theta_steps: usize, phi_steps: usize) -> f64 {
    let t = correlation_matrix(rho);
    let dirs: Vec<[f64; 3]> = (0..=theta_steps)
        .flat_map(|i| {
            let theta = std::f64::consts::PI * i as f64 / theta_steps as f64;
            (0..phi_steps).map(move |k| {
                let phi = std::f64::consts::TAU * k as f64 / phi_steps as f64;
                [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
            })
        })
        .collect();
    let tb: Vec<[f64; 3]> = dirs
        .iter()
        .map(|b| {
            let mut v = [0.0; 3];
            for (i, vi) in v.iter_mut().enumerate() {
                *vi = (0..3).map(|j| t[(i, j)] * b[j]).sum();
            }
            v
        })
        .collect();
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let mut best: f64 = 0.0;
    for x in &tb {
        for y in &tb {
            // ½[a·T(b+b′) + a′·T(b−b′)] maximized over unit a, a′
            let plus = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
            let minus = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
            best = best.max(0.5 * (norm(plus) + norm(minus)));
        }
    }
    best
}
