use num_complex::Complex64;
use serde::Serialize;

use super::CensusError;
use crate::autcoeffs::CoeffProvider;
use crate::dirichlet::CharacterGroup;
use crate::lfun::{
    band_scales, dual_piece, dual_piece_direct, forward_piece, forward_piece_direct, lvalues_for_modulus, AfeConfig,
    CoefficientTable, LfunError, SmoothWindow,
};
use crate::moduli::{build_moduli, ModuliProfile};

/// Relative agreement required between the band reconstruction and the direct sum.
pub const PIPELINE_TOLERANCE: f64 = 1e-4;
const MAX_SCALE: f64 = 200.0;
/// Rounding allowance when comparing consecutive ablation residuals.
const ABLATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct BandDiff {
    pub side: &'static str,
    pub band: f64,
    pub divisor_side: Complex64,
    pub character_side: Complex64,
    pub diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationStep {
    pub dual_bands_kept: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectorCheck {
    pub sign: i32,
    /// `sum_q sum_{chi primitive} chi(+-1) L(1/2, pi x chi)` from the census rows.
    pub direct: Complex64,
    pub reconstructed: Complex64,
    pub forward_total: Complex64,
    pub dual_total: Complex64,
    pub main_term: Complex64,
    pub relative_error: f64,
    pub within: bool,
    pub bands: Vec<BandDiff>,
    /// Residual after keeping only the lowest `k` dual bands, `k` decreasing.
    pub ablation: Vec<AblationStep>,
    /// Leading ablation steps over which the residual never decreases.
    pub ablation_monotone_steps: usize,
    /// Whether the residual is non-decreasing while every dropped band lies at
    /// or above the smallest dual scale `M_0`; below it low bands can cancel.
    pub ablation_monotone: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub moduli: Vec<u64>,
    pub tolerance: f64,
    pub selectors: Vec<SelectorCheck>,
    pub pass: bool,
}

/// Rebuilds `sum chi(+-1) L(1/2, pi x chi)` over the moduli set from dyadic
/// forward and dual bands and compares with the direct census sum.
pub fn pipeline_shape_check(provider: &CoeffProvider, profile: &ModuliProfile) -> Result<PipelineReport, CensusError> {
    if profile.q > MAX_SCALE {
        return Err(LfunError::Precondition(format!("pipeline check is for Q <= {MAX_SCALE}, got {}", profile.q)).into());
    }
    let profile = super::effective_profile(provider, profile, 1);
    let set = build_moduli(&profile)?;
    let moduli = set.moduli();
    let config = AfeConfig::default();
    let window = SmoothWindow::partition();
    let (mut len_f, mut len_d) = (1usize, 1usize);
    let mut m0_min = f64::INFINITY;
    for m in &set.members {
        m0_min = m0_min.min(config.scales(m.q, provider.conductor()).1);
        let (a, b) = config.lengths(m.q, provider)?;
        len_f = len_f.max(a);
        len_d = len_d.max(b);
    }
    let coeffs = CoefficientTable::new(provider, len_f.max(len_d))?;
    let mut rows = Vec::new();
    for q in &moduli {
        let group = CharacterGroup::new(q).map_err(LfunError::from)?;
        rows.extend(lvalues_for_modulus(provider, &group, &config, &coeffs)?);
    }
    let mut selectors = Vec::new();
    for sign in [1, -1] {
        let direct: Complex64 = rows.iter().map(|r| if sign == 1 || r.parity == 1 { r.value } else { -r.value }).sum();
        let mut bands = Vec::new();
        let mut forward_total = Complex64::new(0.0, 0.0);
        let mut main_term = Complex64::new(0.0, 0.0);
        for band in band_scales(len_f, &window) {
            let piece = forward_piece(provider, &coeffs, &moduli, band, sign, &window, &config)?;
            let check = forward_piece_direct(provider, &coeffs, &moduli, band, sign, &window, &config)?;
            forward_total += piece.value;
            main_term += piece.main_term;
            bands.push(BandDiff { side: "forward", band, divisor_side: piece.value, character_side: check, diff: (piece.value - check).norm() });
        }
        let mut dual_values = Vec::new();
        let dual_bands = band_scales(len_d, &window);
        for &band in &dual_bands {
            let piece = dual_piece(provider, &coeffs, &moduli, band, sign, &window, &config)?;
            let check = dual_piece_direct(provider, &coeffs, &moduli, band, sign, &window, &config)?;
            dual_values.push(piece.value);
            bands.push(BandDiff { side: "dual", band, divisor_side: piece.value, character_side: check, diff: (piece.value - check).norm() });
        }
        let dual_total: Complex64 = dual_values.iter().sum();
        let reconstructed = forward_total + dual_total;
        let relative_error = (reconstructed - direct).norm() / direct.norm();
        let ablation: Vec<AblationStep> = (0..=dual_values.len())
            .rev()
            .map(|k| {
                let partial: Complex64 = dual_values[..k].iter().sum();
                AblationStep { dual_bands_kept: k, residual: (direct - forward_total - partial).norm() }
            })
            .collect();
        let ablation_monotone_steps =
            ablation.windows(2).take_while(|w| w[1].residual + ABLATION_SLACK >= w[0].residual).count() + 1;
        let tail_steps = dual_bands.iter().filter(|&&b| b >= m0_min).count();
        let ablation_monotone = ablation_monotone_steps > tail_steps;
        selectors.push(SelectorCheck {
            sign,
            direct,
            reconstructed,
            forward_total,
            dual_total,
            main_term,
            relative_error,
            within: relative_error <= PIPELINE_TOLERANCE,
            bands,
            ablation,
            ablation_monotone_steps,
            ablation_monotone,
        });
    }
    let pass = selectors.iter().all(|s| s.within);
    Ok(PipelineReport { moduli: set.members.iter().map(|m| m.q).collect(), tolerance: PIPELINE_TOLERANCE, selectors, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autcoeffs::sym3_delta;

    #[test]
    fn singleton_reconstruction() {
        let pi = sym3_delta(20_000);
        let r = pipeline_shape_check(&pi, &ModuliProfile::singleton_15()).unwrap();
        assert_eq!(r.moduli, vec![15]);
        for s in &r.selectors {
            assert!(s.relative_error < 1e-6, "{:?}", (s.sign, s.direct, s.reconstructed, s.relative_error));
            assert!(s.bands.iter().all(|b| b.diff < 1e-6));
            assert!(s.ablation_monotone, "{:?}", s.ablation);
        }
        let odd = r.selectors.iter().find(|s| s.sign == -1).unwrap();
        assert_eq!(odd.main_term, Complex64::new(0.0, 0.0));
        let even = r.selectors.iter().find(|s| s.sign == 1).unwrap();
        assert!(even.main_term.norm() > 0.0);
    }

    #[test]
    fn large_scale_is_rejected() {
        let pi = sym3_delta(100);
        assert!(pipeline_shape_check(&pi, &ModuliProfile::desk()).is_err());
    }
}
