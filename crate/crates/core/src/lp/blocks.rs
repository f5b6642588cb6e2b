//! Risk aggregation blocks shared by the stage subproblems and the
//! extensive-form oracles. Each block takes child value columns `v` and
//! returns linear terms whose minimum (together with the rows it adds)
//! equals the risk functional of `v`.

use super::{LpModel, RowSense, Var};
use crate::dr::MomentAmbiguitySet;
use crate::risk::ArsrmWeights;

/// `Σ_k w_k CVaR_{α_k}(v)` with each CVaR in its variational form.
/// Levels with zero weight are skipped and `α = 0` is the plain mean.
pub(crate) fn marsrm_block(
    model: &mut LpModel,
    v: &[Var],
    p: &[f64],
    w: &[f64],
    alpha: &[f64],
    tag: &str,
) -> Vec<(Var, f64)> {
    let mut terms = Vec::new();
    for (k, (&wk, &ak)) in w.iter().zip(alpha).enumerate() {
        if wk <= 0.0 {
            continue;
        }
        if ak == 0.0 {
            terms.extend(v.iter().zip(p).map(|(&vj, &pj)| (vj, wk * pj)));
            continue;
        }
        let eta = model.free(0.0, format!("{tag}eta[{k}]"));
        terms.push((eta, wk));
        for (j, (&vj, &pj)) in v.iter().zip(p).enumerate() {
            let delta = model.nonneg(0.0, format!("{tag}delta[{k},{j}]"));
            terms.push((delta, wk * pj / (1.0 - ak)));
            model.add_row(
                [(delta, 1.0), (vj, -1.0), (eta, 1.0)],
                RowSense::Ge,
                0.0,
                format!("{tag}tail[{k},{j}]"),
            );
        }
    }
    terms
}

/// `sup_{q ∈ amb} Σ_l q_l Σ_k β_{l,k} CVaR_{α_k}(v)` through its LP dual:
/// one free multiplier per moment equation and one row per support point.
pub(crate) fn dr_block(
    model: &mut LpModel,
    v: &[Var],
    p: &[f64],
    weights: &ArsrmWeights,
    amb: &MomentAmbiguitySet,
    tag: &str,
) -> Vec<(Var, f64)> {
    let (moment_rows, targets) = amb.moment_system();
    let slab = amb.slab();
    let mut terms = Vec::new();

    // ω_e, possibly split as ω⁺ - ω⁻ when the equation is relaxed to a slab.
    let mut omega: Vec<Vec<(Var, f64)>> = Vec::with_capacity(targets.len());
    for (e, &target) in targets.iter().enumerate() {
        if e == 0 || slab == 0.0 {
            let w = model.free(0.0, format!("{tag}omega[{e}]"));
            terms.push((w, target));
            omega.push(vec![(w, 1.0)]);
        } else {
            let up = model.nonneg(0.0, format!("{tag}omega+[{e}]"));
            let dn = model.nonneg(0.0, format!("{tag}omega-[{e}]"));
            terms.push((up, target + slab));
            terms.push((dn, -target + slab));
            omega.push(vec![(up, 1.0), (dn, -1.0)]);
        }
    }

    // CVaR level expressions E_k, shared across support points.
    let mut level_expr: Vec<Option<Vec<(Var, f64)>>> = Vec::with_capacity(weights.k);
    for (k, &ak) in weights.alpha_levels.iter().enumerate() {
        if weights.beta.iter().all(|row| row[k] <= 0.0) {
            level_expr.push(None);
            continue;
        }
        if ak == 0.0 {
            level_expr.push(Some(v.iter().zip(p).map(|(&vj, &pj)| (vj, pj)).collect()));
            continue;
        }
        let eta = model.free(0.0, format!("{tag}eta[{k}]"));
        let mut expr = vec![(eta, 1.0)];
        for (j, (&vj, &pj)) in v.iter().zip(p).enumerate() {
            let delta = model.nonneg(0.0, format!("{tag}delta[{k},{j}]"));
            expr.push((delta, pj / (1.0 - ak)));
            model.add_row(
                [(delta, 1.0), (vj, -1.0), (eta, 1.0)],
                RowSense::Ge,
                0.0,
                format!("{tag}tail[{k},{j}]"),
            );
        }
        level_expr.push(Some(expr));
    }

    for (l, (beta_l, m_l)) in weights.beta.iter().zip(&moment_rows).enumerate() {
        let mut row: Vec<(Var, f64)> = Vec::new();
        for (b, expr) in beta_l.iter().zip(&level_expr) {
            if let (true, Some(expr)) = (*b > 0.0, expr) {
                row.extend(expr.iter().map(|&(x, a)| (x, a * b)));
            }
        }
        for (om, m) in omega.iter().zip(m_l) {
            row.extend(om.iter().map(|&(x, s)| (x, -s * m)));
        }
        model.add_row(row, RowSense::Le, 0.0, format!("{tag}support[{l}]"));
    }
    terms
}
