use serde::{Deserialize, Serialize};

use super::{Fcm, FcmError, SquashSpec, StateVector};

/// Largest node count for which [`basin_map`] enumerates `{0,1}^n`.
pub const DEFAULT_BASIN_BOUND: usize = 20;

/// Limit of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Equilibrium {
    FixedPoint {
        state: StateVector,
    },
    /// `states[i]` steps to `states[i + 1]`, and the last state steps back to
    /// the first.
    LimitCycle {
        states: Vec<StateVector>,
    },
    NonConvergent {
        last_state: StateVector,
        steps_run: usize,
    },
}

impl Equilibrium {
    /// 1 for a fixed point, `k` for a k-cycle, `None` when unresolved.
    pub fn period(&self) -> Option<usize> {
        match self {
            Equilibrium::FixedPoint { .. } => Some(1),
            Equilibrium::LimitCycle { states } => Some(states.len()),
            Equilibrium::NonConvergent { .. } => None,
        }
    }

    pub fn states(&self) -> &[StateVector] {
        match self {
            Equilibrium::FixedPoint { state } => std::slice::from_ref(state),
            Equilibrium::LimitCycle { states } => states,
            Equilibrium::NonConvergent { last_state, .. } => std::slice::from_ref(last_state),
        }
    }

    /// Re-applies `step` to every state and checks the defining tolerance
    /// condition. `NonConvergent` never verifies.
    pub fn verify(&self, fcm: &Fcm, squash: &SquashSpec, tol: f64) -> bool {
        let states = match self {
            Equilibrium::NonConvergent { .. } => return false,
            _ => self.states(),
        };
        let k = states.len();
        states.iter().enumerate().all(|(i, s)| match step(fcm, s, squash) {
            Ok(next) => next.approx_eq(&states[(i + 1) % k], tol),
            Err(_) => false,
        })
    }

    /// Same kind and period with states matching within `tol`, allowing any
    /// rotation of a cycle.
    pub fn same_as(&self, other: &Equilibrium, tol: f64) -> bool {
        match (self, other) {
            (Equilibrium::FixedPoint { state: a }, Equilibrium::FixedPoint { state: b }) => {
                a.approx_eq(b, tol)
            }
            (Equilibrium::LimitCycle { states: a }, Equilibrium::LimitCycle { states: b }) => {
                let k = a.len();
                k == b.len()
                    && (0..k).any(|r| (0..k).all(|i| a[i].approx_eq(&b[(i + r) % k], tol)))
            }
            (
                Equilibrium::NonConvergent { last_state: a, .. },
                Equilibrium::NonConvergent { last_state: b, .. },
            ) => a.approx_eq(b, tol),
            _ => false,
        }
    }
}

fn check_dim(fcm: &Fcm, state: &StateVector) -> Result<(), FcmError> {
    if state.len() != fcm.len() {
        return Err(FcmError::Dimension {
            expected: fcm.len(),
            actual: state.len(),
        });
    }
    Ok(())
}

/// One synchronous update: `C_j(t+1) = phi(sum_i C_i(t) * w_ij)`.
pub fn step(fcm: &Fcm, state: &StateVector, squash: &SquashSpec) -> Result<StateVector, FcmError> {
    check_dim(fcm, state)?;
    squash.validate()?;
    // fixed summation order keeps results bit-identical across platforms
    let edges = fcm.edges();
    let values = state.values();
    let next = (0..fcm.len())
        .map(|j| {
            let input = values
                .iter()
                .enumerate()
                .fold(0.0, |acc, (i, c)| acc + c * edges[[i, j]]);
            squash.apply(input)
        })
        .collect();
    Ok(StateVector(next))
}

enum Outcome {
    Revisit { from: usize },
    Exhausted,
}

/// Iterates until the newest state revisits a stored one within `tol` or
/// `max_steps` updates have run. The returned trajectory includes the
/// revisiting state.
fn run(
    fcm: &Fcm,
    initial: &StateVector,
    squash: &SquashSpec,
    max_steps: usize,
    tol: f64,
) -> Result<(Vec<StateVector>, Outcome), FcmError> {
    check_dim(fcm, initial)?;
    squash.validate()?;
    if max_steps == 0 {
        return Err(FcmError::ZeroSteps("max_steps"));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(FcmError::Tolerance(tol));
    }
    let mut states = vec![initial.clone()];
    for _ in 0..max_steps {
        let next = step(fcm, states.last().expect("non-empty"), squash)?;
        // newest first, so the smallest period wins
        let hit = states.iter().rposition(|s| s.approx_eq(&next, tol));
        states.push(next);
        if let Some(from) = hit {
            return Ok((states, Outcome::Revisit { from }));
        }
    }
    Ok((states, Outcome::Exhausted))
}

/// `[C(0), C(1), ...]`, stopping at the first state that revisits an earlier
/// one within [`super::DEFAULT_TOL`].
pub fn trajectory(
    fcm: &Fcm,
    initial: &StateVector,
    squash: &SquashSpec,
    max_steps: usize,
) -> Result<Vec<StateVector>, FcmError> {
    trajectory_with_tol(fcm, initial, squash, max_steps, super::DEFAULT_TOL)
}

pub fn trajectory_with_tol(
    fcm: &Fcm,
    initial: &StateVector,
    squash: &SquashSpec,
    max_steps: usize,
    tol: f64,
) -> Result<Vec<StateVector>, FcmError> {
    run(fcm, initial, squash, max_steps, tol).map(|(states, _)| states)
}

pub fn find_equilibrium(
    fcm: &Fcm,
    initial: &StateVector,
    squash: &SquashSpec,
    max_steps: usize,
    tol: f64,
) -> Result<Equilibrium, FcmError> {
    let (mut states, outcome) = run(fcm, initial, squash, max_steps, tol)?;
    Ok(match outcome {
        Outcome::Revisit { from } => {
            states.pop();
            let mut cycle = states.split_off(from);
            if cycle.len() == 1 {
                Equilibrium::FixedPoint {
                    state: cycle.pop().expect("one state"),
                }
            } else {
                Equilibrium::LimitCycle { states: cycle }
            }
        }
        Outcome::Exhausted => Equilibrium::NonConvergent {
            last_state: states.pop().expect("non-empty"),
            steps_run: max_steps,
        },
    })
}

/// Equilibria reached from every binary corner of the state hypercube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinMap {
    pub nodes: usize,
    pub equilibria: Vec<Equilibrium>,
    /// `assignments[bits]` is the equilibrium id reached from
    /// `StateVector::corner(bits, nodes)`.
    pub assignments: Vec<usize>,
}

impl BasinMap {
    /// Corners (as bit patterns) whose trajectories reach equilibrium `id`.
    pub fn basin(&self, id: usize) -> Vec<u64> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == id)
            .map(|(bits, _)| bits as u64)
            .collect()
    }

    pub fn id_of(&self, corner: &StateVector) -> Option<usize> {
        if corner.len() != self.nodes {
            return None;
        }
        let mut bits = 0usize;
        for (i, &v) in corner.values().iter().enumerate() {
            match v {
                x if x == 1.0 => bits |= 1 << i,
                x if x == 0.0 => {}
                _ => return None,
            }
        }
        self.assignments.get(bits).copied()
    }
}

pub fn basin_map(
    fcm: &Fcm,
    squash: &SquashSpec,
    max_steps: usize,
    tol: f64,
) -> Result<BasinMap, FcmError> {
    basin_map_with_bound(fcm, squash, max_steps, tol, DEFAULT_BASIN_BOUND)
}

pub fn basin_map_with_bound(
    fcm: &Fcm,
    squash: &SquashSpec,
    max_steps: usize,
    tol: f64,
    bound: usize,
) -> Result<BasinMap, FcmError> {
    let n = fcm.len();
    if n > bound || n >= usize::BITS as usize {
        return Err(FcmError::BasinBound { nodes: n, bound });
    }
    let mut equilibria: Vec<Equilibrium> = Vec::new();
    let mut assignments = Vec::with_capacity(1 << n);
    for bits in 0..(1u64 << n) {
        let eq = find_equilibrium(fcm, &StateVector::corner(bits, n), squash, max_steps, tol)?;
        let id = match equilibria.iter().position(|e| e.same_as(&eq, tol)) {
            Some(id) => id,
            None => {
                equilibria.push(eq);
                equilibria.len() - 1
            }
        };
        assignments.push(id);
    }
    Ok(BasinMap {
        nodes: n,
        equilibria,
        assignments,
    })
}
