/// Numerical tolerances shared by every computation in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    /// Target accuracy of quadrature-based integrals.
    pub quad_tol: f64,
    /// Target accuracy for scalar root finding (absolute in the unknown,
    /// scaled by `max(1, |x|)`).
    pub root_tol: f64,
    /// Default number of grid points for sampled fields.
    pub grid_points: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            quad_tol: 1e-10,
            root_tol: 1e-12,
            grid_points: 2048,
        }
    }
}
