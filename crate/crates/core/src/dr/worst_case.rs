use super::MomentAmbiguitySet;
use crate::error::{invalid, Result};
use crate::lp::{dr_block, solve, LpModel, Var};
use crate::risk::{srm, DiscreteDistribution};

/// `sup_{q ∈ amb} Σ_l q_l ρ_{σ_l}(values)` through the dual LP in the moment
/// multipliers and the CVaR auxiliaries. Scenarios must be equiprobable.
pub fn worst_case_arsrm(values: &[f64], probs: &[f64], amb: &MomentAmbiguitySet) -> Result<f64> {
    let weights = amb.arsrm_weights(probs)?;
    let mut m = LpModel::new();
    let v: Vec<Var> = values
        .iter()
        .enumerate()
        .map(|(j, &x)| m.add_var(0.0, x, x, format!("v[{j}]")))
        .collect();
    for (var, a) in dr_block(&mut m, &v, probs, &weights, amb, "") {
        m.add_cost(var, a);
    }
    let s = solve(&m)?;
    if !s.is_optimal() {
        return Err(invalid(format!("worst-case dual is {}", s.status.as_str())));
    }
    Ok(s.objective)
}

/// Per-support-point risk values `r_l = ρ_{σ_l}(values)`.
pub fn support_values(values: &[f64], probs: &[f64], amb: &MomentAmbiguitySet) -> Result<Vec<f64>> {
    let dist = DiscreteDistribution::new(values.to_vec(), probs.to_vec())?;
    Ok(amb.spectra().iter().map(|s| srm(&dist, s)).collect())
}

/// The primal problem `max_q Σ_l q_l r_l` over the ambiguity set; returns
/// the value and a maximizer.
pub fn worst_case_primal(
    values: &[f64],
    probs: &[f64],
    amb: &MomentAmbiguitySet,
) -> Result<(f64, Vec<f64>)> {
    let r = support_values(values, probs, amb)?;
    let mut m = LpModel::new();
    let q = amb.add_membership(&mut m);
    for (&ql, rl) in q.iter().zip(&r) {
        m.add_cost(ql, -rl);
    }
    let s = solve(&m)?;
    if !s.is_optimal() {
        return Err(invalid(format!(
            "worst-case primal is {}",
            s.status.as_str()
        )));
    }
    Ok((-s.objective, q.iter().map(|v| s.x[v.0]).collect()))
}

/// `Σ_l q_l ρ_{σ_l}(values)` for a fixed member `q`.
pub fn arsrm_under(
    values: &[f64],
    probs: &[f64],
    amb: &MomentAmbiguitySet,
    q: &[f64],
) -> Result<f64> {
    let r = support_values(values, probs, amb)?;
    if q.len() != r.len() {
        return Err(invalid("weight vector does not match the support"));
    }
    Ok(q.iter().zip(&r).map(|(a, b)| a * b).sum())
}
