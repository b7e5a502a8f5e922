//! Fermi pairwise imitation.

use rand::Rng;

use crate::config::{ImitationParams, UtilityBasis};
use crate::model::{AgentState, ImitationOutcome};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DynamicsError {
    #[error("PopulationTooSmall: imitation needs at least 2 agents (got {0})")]
    PopulationTooSmall(usize),
}

/// Probability that an agent with `payoff_a` copies one with `payoff_b`:
/// `1 / (1 + exp(-beta * (payoff_b - payoff_a)))`.
///
/// Evaluated on the branch that never overflows, so large `|beta * diff|`
/// saturates to 0 or 1.
pub fn fermi_probability(payoff_a: f64, payoff_b: f64, beta: f64) -> f64 {
    let x = beta * (payoff_b - payoff_a);
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Uniform over every index except `focal`.
pub fn select_role_model<R: Rng + ?Sized>(
    focal: usize,
    population: usize,
    rng: &mut R,
) -> Result<usize, DynamicsError> {
    if population < 2 {
        return Err(DynamicsError::PopulationTooSmall(population));
    }
    let pick = rng.random_range(0..population - 1);
    Ok(if pick >= focal { pick + 1 } else { pick })
}

fn payoff(agent: &AgentState, basis: UtilityBasis) -> f64 {
    match basis {
        UtilityBasis::PerIteration => agent.iteration_utility,
        UtilityBasis::Cumulative => agent.cumulative_utility,
    }
}

/// One synchronous imitation round over the whole population.
///
/// Every agent draws a role model and one uniform number in canonical order;
/// adoptions are decided against the pre-update labels and applied together.
pub fn imitation_step<R: Rng + ?Sized>(
    population: &mut [AgentState],
    params: &ImitationParams,
    rng: &mut R,
) -> Result<Vec<ImitationOutcome>, DynamicsError> {
    let n = population.len();
    if n < 2 {
        return Err(DynamicsError::PopulationTooSmall(n));
    }
    let mut outcomes = Vec::with_capacity(n);
    for (i, focal) in population.iter().enumerate() {
        let j = select_role_model(i, n, rng)?;
        let model = &population[j];
        let pa = payoff(focal, params.utility_basis);
        let pb = payoff(model, params.utility_basis);
        let probability = fermi_probability(pa, pb, params.beta);
        let uniform_draw: f64 = rng.random();
        outcomes.push(ImitationOutcome {
            focal_id: focal.agent_id.clone(),
            focal_strategy: focal.strategy,
            role_model_id: model.agent_id.clone(),
            role_model_strategy: model.strategy,
            payoff_diff: pb - pa,
            probability,
            uniform_draw,
            adopted: uniform_draw < probability,
        });
    }
    for (agent, outcome) in population.iter_mut().zip(&outcomes) {
        if outcome.adopted {
            agent.adopt(outcome.role_model_strategy);
        }
    }
    Ok(outcomes)
}
