//! Offline utilities: one-shot correlation estimates and ROC tables.

use std::io::Write;

use qseal_core::{
    estimate_correlation, roc_curve, threshold_for_far, DecisionConfig, KappaTotals,
};

use crate::Error;

/// Estimate the correlation for explicit coincidence totals and print the
/// mean and standard deviation at 12 significant digits.
pub fn tool_estimate(
    k_sd: f64,
    k_ss: f64,
    k_ds: f64,
    k_dd: f64,
    out: &mut dyn Write,
) -> Result<(), Error> {
    let kappa = KappaTotals::new(k_sd, k_ss, k_ds, k_dd);
    let est = estimate_correlation(&kappa).map_err(|e| Error::Estimate(e.to_string()))?;
    writeln!(out, "e_kappa     = {:.12e}", est.e_kappa)?;
    writeln!(out, "sigma_kappa = {:.12e}", est.sigma_kappa)?;
    Ok(())
}

/// Write the ROC curve for an operating point as CSV and print the
/// P_FAR = 1e-9 operating point.
pub fn tool_roc(cfg: &DecisionConfig, csv: &mut dyn Write, out: &mut dyn Write) -> Result<(), Error> {
    // degenerate e1 = e0 is allowed here: it draws the chance diagonal
    if !(cfg.sigma > 0.0) || cfg.e0 > cfg.e1 {
        return Err(Error::Config("need sigma > 0 and e0 <= e1".into()));
    }
    let points = roc_curve(cfg, 512);
    writeln!(csv, "epsilon,p_far,p_d")?;
    for p in &points {
        writeln!(csv, "{:.17e},{:.17e},{:.17e}", p.epsilon, p.p_far, p.p_d)?;
    }
    let target = 1e-9;
    let eps =
        threshold_for_far(cfg.e1, cfg.sigma, target).map_err(|e| Error::Config(e.to_string()))?;
    let at = DecisionConfig { epsilon: eps, ..*cfg };
    let (p_d, p_far, _) = qseal_core::detection_stats(&at);
    writeln!(
        out,
        "operating point: epsilon = {eps:.6}, p_far = {p_far:.3e}, p_d = {p_d:.6}"
    )?;
    Ok(())
}
