use rayon::prelude::*;
use serde::Serialize;

use super::lyapunov::{lyapunov_exponent, LyapunovResult};
use crate::error::{Error, Result};
use crate::integrate::{stroboscopic_section, IntegratorSettings, SectionDataset};
use crate::velocity::{BohmField, PlanePoint, VelocityField};
use crate::wavefunction::SuperpositionState;

/// Per-period exponent above which a seed counts as chaotic.
pub const DEFAULT_CHAOS_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct SeedExponent {
    pub seed: PlanePoint,
    pub lyapunov: LyapunovResult,
    pub chaotic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateSummary {
    pub a_over_b: f64,
    pub threshold: f64,
    /// Chaotic seeds over all seeds; zero for an empty seed list.
    pub chaotic_fraction: f64,
    /// Mean per-period exponent; zero for an empty seed list.
    pub mean_lambda: f64,
    pub seeds: Vec<SeedExponent>,
    #[serde(skip)]
    pub section: SectionDataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanParams {
    /// Length of each Lyapunov run, with one renormalization per period.
    pub lyapunov_periods: usize,
    pub section_periods: usize,
    pub threshold: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self { lyapunov_periods: 1600, section_periods: 200, threshold: DEFAULT_CHAOS_THRESHOLD }
    }
}

/// Section and Lyapunov exponents for every seed of every state.
///
/// States and seeds run in parallel.
pub fn scan_transition(
    states: &[SuperpositionState],
    seeds: &[PlanePoint],
    params: &ScanParams,
    settings: &IntegratorSettings,
) -> Result<Vec<StateSummary>> {
    let ScanParams { lyapunov_periods: periods, section_periods, threshold } = *params;
    settings.validate()?;
    if let Some(first) = states.first() {
        let same = |s: &SuperpositionState| s.gamma1() == first.gamma1() && s.gamma2() == first.gamma2();
        if !states.iter().all(same) {
            return Err(Error::InvalidArgument("scan states must share γ₁ and γ₂".into()));
        }
    }
    if periods == 0 {
        return Err(Error::InvalidArgument("Lyapunov runs need at least one period".into()));
    }
    states
        .par_iter()
        .map(|state| {
            let field = BohmField::new(*state);
            let section = stroboscopic_section(&field, seeds, section_periods, settings)?;
            let total = periods as f64 * field.period();
            let exps = seeds
                .par_iter()
                .map(|&seed| {
                    let lyapunov = lyapunov_exponent(&field, seed, total, field.period(), settings)?;
                    let chaotic = lyapunov.per_period > threshold;
                    Ok(SeedExponent { seed, lyapunov, chaotic })
                })
                .collect::<Result<Vec<_>>>()?;
            let n = exps.len().max(1) as f64;
            let chaotic_fraction = exps.iter().filter(|e| e.chaotic).count() as f64 / n;
            let mean_lambda = exps.iter().map(|e| e.lyapunov.per_period).sum::<f64>() / n;
            Ok(StateSummary {
                a_over_b: state.a() / state.b(),
                threshold,
                chaotic_fraction,
                mean_lambda,
                seeds: exps,
                section,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_seed_list() {
        let s = SuperpositionState::from_ratio(0.1, 3.876968, 2.684916).unwrap();
        let out = scan_transition(&[s], &[], &ScanParams::default(), &Default::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].seeds.is_empty());
        assert_eq!(out[0].chaotic_fraction, 0.0);
    }

    #[test]
    fn mixed_phases_rejected() {
        let a = SuperpositionState::from_ratio(0.1, 3.876968, 2.684916).unwrap();
        let b = SuperpositionState::from_ratio(0.1, 3.0, 2.684916).unwrap();
        assert!(scan_transition(&[a, b], &[], &ScanParams::default(), &Default::default()).is_err());
    }
}
