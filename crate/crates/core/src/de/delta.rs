//! Input/output transfer function `δ_u(z)` of the graph seen from one
//! symmetric pair of positions, and the one-dimensional iteration count
//! built on it.

use super::{incoming_messages, step_in_place, Clamp, DeModel, DeOptions, DeState, Workspace};
use crate::ensemble::DegreeDistribution;
use crate::error::{param_err, Result};

/// Sampled map `z_q ↦ δ_u(z_q)` on the grid `z_q = ε q / Q`, `q = 1..=Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaProfile {
    pub u: usize,
    pub epsilon: f64,
    pub z: Vec<f64>,
    pub delta: Vec<f64>,
}

impl DeltaProfile {
    /// Grid size `Q`.
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Grid spacing `ε / Q`.
    pub fn dz(&self) -> f64 {
        self.epsilon / self.z.len() as f64
    }

    /// CSV with columns `q, z_q, delta`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("q,z_q,delta\n");
        for (i, (z, d)) in self.z.iter().zip(&self.delta).enumerate() {
            s.push_str(&format!("{},{z},{d}\n", i + 1));
        }
        s
    }
}

/// [`precompute_delta_with_model`] on a freshly built model.
pub fn precompute_delta(
    e: &crate::ensemble::Ensemble,
    epsilon: f64,
    u: usize,
    q_count: usize,
    opts: &DeOptions,
) -> Result<DeltaProfile> {
    precompute_delta_with_model(&DeModel::from_ensemble(e), epsilon, u, q_count, opts)
}

/// Clamps positions `u` and its mirror at each `z_q`, lets every other
/// position saturate, and records the incoming message at `u`.
///
/// Grid points are visited from `z_Q = ε` downwards, each warm-started from
/// the previous saturated state. DE is monotone, so the previous fixed point
/// lies between the new one and the all-`ε` start; iterating from it reaches
/// the same fixed point as a cold start.
pub fn precompute_delta_with_model(
    model: &DeModel,
    epsilon: f64,
    u: usize,
    q_count: usize,
    opts: &DeOptions,
) -> Result<DeltaProfile> {
    let n = model.positions();
    if 2 * u + 1 > n {
        return param_err(format!("position {u} beyond the first half of L = {n}"));
    }
    if q_count < 2 {
        return param_err(format!("grid size {q_count} below 2"));
    }
    let z: Vec<f64> = (1..=q_count).map(|q| epsilon * q as f64 / q_count as f64).collect();
    let mut delta = vec![0.0; q_count];
    let mut state = DeState::initial(model, epsilon);
    let mut ws = Workspace::new(model);
    for qi in (0..q_count).rev() {
        let clamp = Clamp { a: u, b: n - 1 - u, value: z[qi] };
        state.x[u] = z[qi];
        state.x[n - 1 - u] = z[qi];
        for _ in 0..opts.max_iters {
            if step_in_place(model, &mut state, epsilon, Some(clamp), &mut ws) < opts.fixpoint_tol {
                break;
            }
        }
        delta[qi] = incoming_messages(model, &state, epsilon)[u].clamp(0.0, 1.0);
    }
    Ok(DeltaProfile { u, epsilon, z, delta })
}

/// Approximate iteration count of `z ← ε λ(δ(z))` from `ε` down to `ε/Q`:
/// `Σ_{q=2}^{Q-1} Δz / (z_q - ε λ(δ(z_q)))`, `Δz = ε/Q`. Returns `+∞` when
/// some gap is not positive.
pub fn one_dim_iterations(lambda: &DegreeDistribution, p: &DeltaProfile, epsilon: f64) -> f64 {
    let q = p.len();
    let dz = epsilon / q as f64;
    let mut total = 0.0;
    for i in 1..q.saturating_sub(1) {
        let gap = p.z[i] - epsilon * lambda.eval(p.delta[i]);
        if gap <= 0.0 {
            return f64::INFINITY;
        }
        total += dz / gap;
    }
    total
}
