//! Named reference inputs used by tests, examples and the validation
//! command. These are chosen test values, not fitted epidemiological data.

use crate::model::ModelParams;

/// Reference parameter set.
pub const P0: ModelParams = ModelParams {
    beta_s: 0.4,
    beta_a: 0.3,
    beta_h: 0.1,
    sigma: 0.2,
    r: 0.5,
    gamma_s: 0.1,
    gamma_a: 0.15,
    gamma_h: 0.12,
    phi_s: 0.05,
    delta_s: 0.01,
    delta_h: 0.02,
};

/// Reference state `(S, E, Is, Ia, Ih, R)` with `N = 1000`.
pub const X0: [f64; 6] = [900.0, 50.0, 20.0, 20.0, 5.0, 5.0];

/// Recovered-only state: `S = 0`, zero force of infection.
pub const X1: [f64; 6] = [0.0, 0.0, 0.0, 0.0, 0.0, 100.0];
