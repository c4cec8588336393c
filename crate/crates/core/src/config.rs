use serde::{Deserialize, Serialize};

/// Numerical knobs shared by every module. Defaults are the values the test
/// suite is calibrated against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Degree of one-variable interpolants.
    pub degree_1d: usize,
    /// Degrees (x, y) of two-variable interpolants.
    pub degree_2d: (usize, usize),
    /// Relative size allowed for the trailing coefficients of a fit.
    pub tail_tol: f64,
    /// Sign-change scan resolution, as a fraction of the domain length.
    pub root_resolution: f64,
    /// Points in the scan for periodic orbits of f^p.
    pub orbit_scan: usize,
    /// Endpoint conditions f(0) = f(1) = 0.
    pub endpoint_tol: f64,
    /// Expansion margin for |f'(0)|, |f'(alpha)| and cycle multipliers.
    pub expansion_margin: f64,
    pub invariance_samples: usize,
    /// Newton degree for period doubling and for longer permutations.
    pub newton_degree_doubling: usize,
    pub newton_degree_long: usize,
    pub fd_step: f64,
    pub newton_max_iter: usize,
    /// Critical-locus margin, as a fraction of the central box width.
    pub gamma: f64,
    /// Allowed excursion of G(B0_diag) outside B0_diag, relative to sup|eps|.
    pub invariance_slack: f64,
    pub piece_boundary_samples: usize,
    pub piece_inflation: f64,
    pub depth_doubling: usize,
    pub depth_long: usize,
    /// Truncation threshold for t_{m,n} increments.
    pub tip_increment_floor: f64,
    /// Scales below this are treated as underflowed.
    pub underflow_floor: f64,
    /// Worker threads, 0 means the rayon default.
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            degree_1d: 64,
            degree_2d: (48, 16),
            tail_tol: 1e-9,
            root_resolution: 1e-4,
            orbit_scan: 2000,
            endpoint_tol: 1e-10,
            expansion_margin: 1e-6,
            invariance_samples: 200,
            newton_degree_doubling: 40,
            newton_degree_long: 60,
            fd_step: 1e-7,
            newton_max_iter: 30,
            gamma: 0.05,
            invariance_slack: 10.0,
            piece_boundary_samples: 12,
            piece_inflation: 1e-6,
            depth_doubling: 6,
            depth_long: 4,
            tip_increment_floor: 1e-14,
            underflow_floor: 1e-250,
            workers: 0,
        }
    }
}

impl Config {
    pub fn newton_degree(&self, p: usize) -> usize {
        if p == 2 {
            self.newton_degree_doubling
        } else {
            self.newton_degree_long
        }
    }

    pub fn default_depth(&self, p: usize) -> usize {
        if p == 2 {
            self.depth_doubling
        } else {
            self.depth_long
        }
    }
}
