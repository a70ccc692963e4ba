//! Discrete integrator for the convex subgradient flow `ẋ ∈ −∂f(x)`.
//!
//! Backward Euler is used rather than forward subgradient steps: each state
//! solves `x⁺ = argmin f(u) + ‖u − x‖²/(2τ)`, so `(x − x⁺)/τ ∈ ∂f(x⁺)` and
//! the inclusion holds exactly at the discrete times. Monotonicity of the
//! values, of the distances to any critical point, and the discrete energy
//! identity then hold unconditionally, so the monitors test the function,
//! not the step size.

use crate::critical::CriticalSet;
use crate::error::{Error, Result};
use crate::instance::FunctionInstance;
use crate::linalg;
use crate::prox;

pub const MAX_FLOW_STEP: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub instance_name: String,
    pub step: f64,
    pub horizon: f64,
    pub states: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub step_norms: Vec<f64>,
}

impl Trajectory {
    pub fn terminal(&self) -> &[f64] {
        self.states.last().expect("nonempty trajectory")
    }
}

/// Integrate the flow from `x0` with proximal-point steps of size `tau` up
/// to time `horizon`.
pub fn integrate_flow(
    instance: &FunctionInstance,
    x0: &[f64],
    tau: f64,
    horizon: f64,
) -> Result<Trajectory> {
    if !instance.convex {
        return Err(Error::Capability(format!(
            "`{}` is not convex; the subgradient-curve properties are stated for convex functions",
            instance.name
        )));
    }
    if !(tau > 0.0 && tau <= MAX_FLOW_STEP) {
        return Err(Error::Usage(format!(
            "flow step must lie in (0, {MAX_FLOW_STEP}]"
        )));
    }
    if !instance.in_domain(x0) {
        return Err(Error::Usage("flow start is outside dom f".into()));
    }
    let steps = (horizon / tau).round() as usize;
    if steps == 0 {
        return Err(Error::Usage("horizon shorter than one step".into()));
    }

    let mut states = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut step_norms = Vec::with_capacity(steps);
    let mut x = x0.to_vec();
    values.push(instance.evaluate(&x)?.value());
    states.push(x.clone());
    for _ in 0..steps {
        let next = prox::prox_full(instance, &x, tau)?;
        step_norms.push(linalg::dist(&next, &x));
        values.push(instance.evaluate(&next)?.value());
        states.push(next.clone());
        x = next;
    }
    Ok(Trajectory {
        instance_name: instance.name.clone(),
        step: tau,
        horizon,
        states,
        values,
        step_norms,
    })
}

/// Outcome of the four trajectory monitors.
#[derive(Debug, Clone)]
pub struct FlowReport {
    /// (a) `f(x_k)` nonincreasing; on failure, the first ascending step.
    pub values_monotone: bool,
    pub first_ascending_step: Option<usize>,
    /// (b) `‖x_k − z‖` nonincreasing for every critical grid point `z`.
    pub distances_monotone: bool,
    /// (c) terminal state within tolerance of the critical set.
    pub terminal_near_critical: bool,
    pub terminal_distance: f64,
    /// (d) discrete energy inequality
    /// `f(x_k) − f(x_{k+1}) ≥ ‖x_{k+1} − x_k‖²/τ − tol`.
    pub energy_inequality: bool,
    pub limit: Vec<f64>,
    pub tolerance: f64,
}

impl FlowReport {
    pub fn all_pass(&self) -> bool {
        self.values_monotone
            && self.distances_monotone
            && self.terminal_near_critical
            && self.energy_inequality
    }
}

/// Check the trajectory against the subgradient-curve properties at `tol`.
pub fn verify_flow_properties(
    trajectory: &Trajectory,
    critical: &CriticalSet,
    tol: f64,
) -> Result<FlowReport> {
    if trajectory.states.len() < 2 {
        return Err(Error::Usage("trajectory has no steps".into()));
    }

    let mut values_monotone = true;
    let mut first_ascending_step = None;
    for (k, w) in trajectory.values.windows(2).enumerate() {
        if w[1] > w[0] + tol {
            values_monotone = false;
            first_ascending_step = Some(k);
            break;
        }
    }

    // grid of critical points: each piece contributes its representative and
    // the projection of the start state
    let mut grid: Vec<Vec<f64>> = Vec::new();
    for piece in &critical.pieces {
        grid.push(piece.representative());
        grid.push(piece.project(&trajectory.states[0]));
    }
    let mut distances_monotone = true;
    'outer: for z in &grid {
        let mut prev = linalg::dist(&trajectory.states[0], z);
        for state in &trajectory.states[1..] {
            let d = linalg::dist(state, z);
            if d > prev + tol {
                distances_monotone = false;
                break 'outer;
            }
            prev = d;
        }
    }

    let terminal_distance = critical.distance(trajectory.terminal())?;
    let terminal_near_critical = terminal_distance <= tol;

    let mut energy_inequality = true;
    for k in 0..trajectory.step_norms.len() {
        let decrease = trajectory.values[k] - trajectory.values[k + 1];
        let required = trajectory.step_norms[k] * trajectory.step_norms[k] / trajectory.step;
        if decrease < required - tol {
            energy_inequality = false;
            break;
        }
    }

    Ok(FlowReport {
        values_monotone,
        first_ascending_step,
        distances_monotone,
        terminal_near_critical,
        terminal_distance,
        energy_inequality,
        limit: trajectory.terminal().to_vec(),
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::critical::enumerate_critical_set;

    #[test]
    fn half_square_recursion_is_geometric() {
        let inst = catalog::builtin("half-square").unwrap();
        let traj = integrate_flow(&inst, &[1.0], 0.1, 1.0).unwrap();
        assert_eq!(traj.states.len(), 11);
        let expected = 1.1f64.powi(-10);
        assert!((traj.terminal()[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn abs_flow_absorbs_at_the_minimizer() {
        let inst = catalog::builtin("abs").unwrap();
        let traj = integrate_flow(&inst, &[1.0], 0.25, 2.0).unwrap();
        let want = [1.0, 0.75, 0.5, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0];
        for (state, w) in traj.states.iter().zip(want) {
            assert!((state[0] - w).abs() < 1e-15);
        }
    }

    #[test]
    fn lasso_flow_reaches_the_minimizer() {
        let inst = catalog::builtin("lasso-toy").unwrap();
        let traj = integrate_flow(&inst, &[2.0], 0.25, 30.0).unwrap();
        assert!((traj.terminal()[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn monitors_pass_on_half_square() {
        let inst = catalog::builtin("half-square").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        let traj = integrate_flow(&inst, &[1.0], 0.1, 25.0).unwrap();
        let report = verify_flow_properties(&traj, &cs, 1e-10).unwrap();
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn corrupted_trajectory_fails_value_monotonicity() {
        let inst = catalog::builtin("half-square").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        let mut traj = integrate_flow(&inst, &[1.0], 0.1, 25.0).unwrap();
        let k = traj.states.len() / 2;
        traj.states[k][0] += 1.0;
        traj.values[k] = inst.evaluate(&traj.states[k]).unwrap().value();
        let report = verify_flow_properties(&traj, &cs, 1e-10).unwrap();
        assert!(!report.values_monotone);
        assert_eq!(report.first_ascending_step, Some(k - 1));
    }

    #[test]
    fn nonconvex_flow_is_a_capability_error() {
        let inst = catalog::builtin("zq3").unwrap();
        let err = integrate_flow(&inst, &[1.0, 1.0, 0.0], 0.1, 1.0).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }

    #[test]
    fn halving_the_step_halves_the_terminal_drift() {
        let inst = catalog::builtin("half-square").unwrap();
        let t1 = integrate_flow(&inst, &[1.0], 0.2, 5.0).unwrap().terminal()[0];
        let t2 = integrate_flow(&inst, &[1.0], 0.1, 5.0).unwrap().terminal()[0];
        let t3 = integrate_flow(&inst, &[1.0], 0.05, 5.0).unwrap().terminal()[0];
        let ratio = (t1 - t2) / (t2 - t3);
        assert!((ratio - 2.0).abs() < 0.3, "refinement ratio {ratio}");
    }
}
